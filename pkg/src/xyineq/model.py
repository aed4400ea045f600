"""Coupling tables on site subsets, plus lattice builders and the JSON model format.

Subsets of sites are plain ``int`` bit masks: bit ``x`` set means site ``x``
belongs to the subset.  Every engine in the package takes its couplings from a
:class:`CouplingTable`, whose terms are kept sorted by mask so that iteration
order (and therefore floating point summation order) is deterministic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import ModelError

MAX_SITES = 64
MODEL_TAGS = ("classical-xy", "quantum-xy", "ising")
GEOMETRIES = ("chain", "square", "cubic", "kitaev-edges")
# Which spin axes the two coupling slots act on.  Kitaev tables use "1-3".
CONVENTIONS = ("1-2", "1-3")


def mask_of(sites: Iterable[int]) -> int:
    mask = 0
    for x in sites:
        if x < 0 or x >= MAX_SITES:
            raise ModelError(f"site {x} outside 0..{MAX_SITES - 1}")
        mask |= 1 << x
    return mask


def sites_of(mask: int) -> tuple[int, ...]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def nonempty_subsets(n_sites: int) -> Iterator[int]:
    """All nonempty subsets of ``n_sites`` sites, in ascending mask order."""
    return iter(range(1, 1 << n_sites))


@dataclass(frozen=True)
class SiteSet:
    """Sites ``0..n-1`` with an optional geometry tag."""

    n: int
    geometry: str | None = None
    dims: tuple[int, ...] = ()
    periodic: bool = False

    def __post_init__(self):
        if not 1 <= self.n <= MAX_SITES:
            raise ModelError(f"site count must be in 1..{MAX_SITES}, got {self.n}", "sites")
        if self.geometry is not None and self.geometry not in GEOMETRIES:
            raise ModelError(f"unknown geometry {self.geometry!r}", "geometry")

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def contains(self, mask: int) -> bool:
        return mask & ~self.full_mask == 0


class Term(NamedTuple):
    mask: int
    j1: float
    j2: float


@dataclass(frozen=True)
class CouplingTable:
    """Map from nonempty site subsets to a pair of couplings ``(j1, j2)``.

    For Ising tables only ``j1`` is meaningful.  ``convention`` records which
    spin axes the two slots act on; Kitaev tables store the third-axis face
    couplings in the second slot and are tagged ``"1-3"``.
    """

    terms: tuple[Term, ...] = ()
    model: str = "classical-xy"
    convention: str = "1-2"

    def __post_init__(self):
        if self.model not in MODEL_TAGS:
            raise ModelError(f"unknown model tag {self.model!r}", "model")
        if self.convention not in CONVENTIONS:
            raise ModelError(f"unknown axis convention {self.convention!r}", "convention")
        terms = tuple(sorted((Term(int(m), float(a), float(b)) for m, a, b in self.terms),
                             key=lambda t: t.mask))
        for i, t in enumerate(terms):
            if t.mask <= 0:
                raise ModelError("coupling on the empty subset", f"couplings[{i}].subset")
            if t.mask >> MAX_SITES:
                raise ModelError("subset exceeds the 64-site budget", f"couplings[{i}].subset")
            if i and terms[i - 1].mask == t.mask:
                raise ModelError(f"duplicate subset {list(sites_of(t.mask))}",
                                 f"couplings[{i}].subset")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int | Sequence[int], Any], model: str = "classical-xy",
                     convention: str = "1-2") -> "CouplingTable":
        """Build from ``{subset: (j1, j2)}``; subsets may be masks or site tuples, values may be scalars."""
        terms = []
        for key, value in mapping.items():
            mask = key if isinstance(key, int) else mask_of(key)
            if isinstance(value, (int, float)):
                value = (value, 0.0)
            terms.append(Term(mask, float(value[0]), float(value[1])))
        return cls(tuple(terms), model, convention)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    @property
    def ferromagnetic(self) -> bool:
        return all(t.j1 >= 0 and t.j2 >= 0 for t in self.terms)

    @property
    def support(self) -> int:
        mask = 0
        for t in self.terms:
            mask |= t.mask
        return mask

    def get(self, mask: int) -> tuple[float, float]:
        for t in self.terms:
            if t.mask == mask:
                return t.j1, t.j2
        return 0.0, 0.0

    def with_term(self, mask: int, j1: float, j2: float) -> "CouplingTable":
        """Copy with the entry on ``mask`` replaced (or added)."""
        kept = tuple(t for t in self.terms if t.mask != mask) + (Term(mask, j1, j2),)
        return replace(self, terms=kept)

    def shifted(self, mask: int, d1: float = 0.0, d2: float = 0.0) -> "CouplingTable":
        j1, j2 = self.get(mask)
        return self.with_term(mask, j1 + d1, j2 + d2)

    def scaled(self, factor: float) -> "CouplingTable":
        return replace(self, terms=tuple(Term(t.mask, factor * t.j1, factor * t.j2)
                                         for t in self.terms))

    def with_model(self, model: str) -> "CouplingTable":
        return replace(self, model=model)


@dataclass(frozen=True)
class ModelSpec:
    sites: SiteSet
    couplings: CouplingTable
    beta: float = 1.0
    spin: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if not self.beta > 0:
            raise ModelError(f"beta must be positive, got {self.beta}", "beta")
        spin = Fraction(self.spin)
        if spin <= 0 or (2 * spin).denominator != 1:
            raise ModelError(f"spin must be a positive half-integer, got {self.spin}", "spin")
        object.__setattr__(self, "spin", spin)
        object.__setattr__(self, "beta", float(self.beta))
        for i, t in enumerate(self.couplings):
            if not self.sites.contains(t.mask):
                raise ModelError(f"subset {list(sites_of(t.mask))} uses sites beyond {self.sites.n - 1}",
                                 f"couplings[{i}].subset")

    @property
    def n(self) -> int:
        return self.sites.n

    @property
    def model(self) -> str:
        return self.couplings.model

    def with_beta(self, beta: float) -> "ModelSpec":
        return replace(self, beta=beta)

    def with_couplings(self, couplings: CouplingTable) -> "ModelSpec":
        return replace(self, couplings=couplings)


@dataclass(frozen=True)
class GibbsEstimate:
    """A Gibbs expectation with an error bound.

    ``error`` is a convergence estimate for the exact engines and a standard
    error for Monte Carlo.  ``method`` is one of quadrature, enumeration,
    eigensolve, monte-carlo.
    """

    value: float
    error: float
    method: str
    converged: bool = True
    details: dict = field(default_factory=dict, compare=False)


# -- lattice builders ---------------------------------------------------------

def box_sites(dims: Sequence[int], periodic: bool = False) -> SiteSet:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ModelError(f"dimensions must be >= 1, got {dims}", "dims")
    n = 1
    for d in dims:
        n *= d
    if n > MAX_SITES:
        raise ModelError(f"{n} sites exceed the {MAX_SITES}-site budget", "dims")
    geometry = {1: "chain", 2: "square", 3: "cubic"}.get(len(dims))
    return SiteSet(n, geometry, dims, periodic)


def box_edges(dims: Sequence[int], periodic: bool = False) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs of a box in row-major site order (duplicates removed)."""
    sites = box_sites(dims, periodic)
    dims = sites.dims
    strides = [1] * len(dims)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    edges = set()
    for coord in itertools.product(*(range(d) for d in dims)):
        x = sum(c * s for c, s in zip(coord, strides))
        for k, d in enumerate(dims):
            c = coord[k] + 1
            if c == d:
                if not periodic:
                    continue
                c = 0
            y = x + (c - coord[k]) * strides[k]
            if y != x:
                edges.add((min(x, y), max(x, y)))
    return sorted(edges)


def nearest_neighbour_couplings(dims: Sequence[int], j1: float = 1.0, j2: float = 1.0,
                                periodic: bool = False, model: str = "classical-xy") -> CouplingTable:
    terms = [Term(mask_of(e), j1, j2) for e in box_edges(dims, periodic)]
    return CouplingTable(tuple(terms), model)


def _kitaev_geometry(width: int, height: int):
    if width < 1 or height < 1:
        raise ModelError("Kitaev lattice needs width, height >= 1", "dims")
    vertex = {(i, j): j * (width + 1) + i for j in range(height + 1) for i in range(width + 1)}
    edges = []
    for j in range(height + 1):
        for i in range(width):
            edges.append(((i, j), (i + 1, j)))
    for j in range(height):
        for i in range(width + 1):
            edges.append(((i, j), (i, j + 1)))
    if len(edges) > MAX_SITES:
        raise ModelError(f"{len(edges)} edges exceed the {MAX_SITES}-site budget", "dims")
    edge_index = {e: k for k, e in enumerate(edges)}
    faces = []
    for j in range(height):
        for i in range(width):
            faces.append([edge_index[((i, j), (i + 1, j))], edge_index[((i, j + 1), (i + 1, j + 1))],
                          edge_index[((i, j), (i, j + 1))], edge_index[((i + 1, j), (i + 1, j + 1))]])
    incident = {v: [] for v in vertex}
    for k, (a, b) in enumerate(edges):
        incident[a].append(k)
        incident[b].append(k)
    vertices = [incident[v] for v in sorted(vertex, key=vertex.get)]
    return edges, vertices, faces


def kitaev_sites(width: int, height: int) -> SiteSet:
    edges, _, _ = _kitaev_geometry(width, height)
    return SiteSet(len(edges), "kitaev-edges", (width, height), False)


def kitaev_couplings(width: int, height: int, jx: float | Sequence[float] = 1.0,
                     jf: float | Sequence[float] = 1.0) -> CouplingTable:
    """Kitaev-type model on the edges of a ``width x height`` block of unit squares.

    Sites are the lattice edges.  Each vertex contributes an axis-1 term over its
    incident edges; each complete unit square contributes a third-axis term over
    its four boundary edges, stored in the second slot of a ``"1-3"`` table.
    """
    _, vertices, faces = _kitaev_geometry(width, height)
    jx = [float(jx)] * len(vertices) if isinstance(jx, (int, float)) else [float(v) for v in jx]
    jf = [float(jf)] * len(faces) if isinstance(jf, (int, float)) else [float(v) for v in jf]
    if len(jx) != len(vertices):
        raise ModelError(f"expected {len(vertices)} vertex couplings, got {len(jx)}", "jx")
    if len(jf) != len(faces):
        raise ModelError(f"expected {len(faces)} face couplings, got {len(jf)}", "jf")
    entries: dict[int, list[float]] = {}
    for edges_at, j in zip(vertices, jx):
        entries.setdefault(mask_of(edges_at), [0.0, 0.0])[0] += j
    for face, j in zip(faces, jf):
        entries.setdefault(mask_of(face), [0.0, 0.0])[1] += j
    terms = tuple(Term(m, a, b) for m, (a, b) in entries.items())
    return CouplingTable(terms, "quantum-xy", "1-3")


# -- JSON model files ---------------------------------------------------------

def _parse_spin(raw: Any) -> Fraction:
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError):
        raise ModelError(f"cannot parse spin {raw!r}", "spin") from None


def model_from_dict(data: Mapping[str, Any]) -> ModelSpec:
    if not isinstance(data, Mapping):
        raise ModelError("model file must hold a JSON object")
    unknown = set(data) - {"sites", "spin", "beta", "model", "convention", "geometry", "couplings"}
    if unknown:
        raise ModelError(f"unknown fields {sorted(unknown)}")
    n = data.get("sites")
    if not isinstance(n, int) or isinstance(n, bool):
        raise ModelError("must be an integer site count", "sites")
    geometry = data.get("geometry") or {}
    if not isinstance(geometry, Mapping):
        raise ModelError("must be an object", "geometry")
    sites = SiteSet(n, geometry.get("type"), tuple(geometry.get("dims", ())),
                    bool(geometry.get("periodic", False)))
    beta = data.get("beta", 1.0)
    if not isinstance(beta, (int, float)) or isinstance(beta, bool):
        raise ModelError("must be a number", "beta")
    model = data.get("model", "quantum-xy")
    raw_couplings = data.get("couplings", [])
    if not isinstance(raw_couplings, list):
        raise ModelError("must be a list", "couplings")
    terms = []
    seen = set()
    for i, entry in enumerate(raw_couplings):
        where = f"couplings[{i}]"
        if not isinstance(entry, Mapping):
            raise ModelError("must be an object", where)
        subset = entry.get("subset")
        if not isinstance(subset, list) or not all(isinstance(x, int) and not isinstance(x, bool)
                                                   for x in subset):
            raise ModelError("must be a list of site indices", where + ".subset")
        if not subset:
            raise ModelError("coupling on the empty subset", where + ".subset")
        if any(b <= a for a, b in zip(subset, subset[1:])):
            raise ModelError("must be strictly ascending", where + ".subset")
        if subset[0] < 0 or subset[-1] >= n:
            raise ModelError(f"site outside 0..{n - 1}", where + ".subset")
        mask = mask_of(subset)
        if mask in seen:
            raise ModelError(f"duplicate subset {subset}", where + ".subset")
        seen.add(mask)
        values = []
        for key in ("j1", "j2"):
            v = entry.get(key, 0.0)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ModelError("must be a number", f"{where}.{key}")
            values.append(float(v))
        if model == "ising" and "j" in entry:
            values[0] = float(entry["j"])
        terms.append(Term(mask, *values))
    couplings = CouplingTable(tuple(terms), model, data.get("convention", "1-2"))
    return ModelSpec(sites, couplings, beta, _parse_spin(data.get("spin", "1/2")))


def model_to_dict(spec: ModelSpec) -> dict:
    out: dict[str, Any] = {"sites": spec.n, "spin": str(spec.spin), "beta": spec.beta,
                           "model": spec.model}
    if spec.couplings.convention != "1-2":
        out["convention"] = spec.couplings.convention
    if spec.sites.geometry is not None:
        out["geometry"] = {"type": spec.sites.geometry, "dims": list(spec.sites.dims),
                           "periodic": spec.sites.periodic}
    out["couplings"] = [{"subset": list(sites_of(t.mask)), "j1": t.j1, "j2": t.j2}
                        for t in spec.couplings]
    return out


def load_model(path: str | Path) -> ModelSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(data)


def save_model(spec: ModelSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(spec), indent=2) + "\n")
