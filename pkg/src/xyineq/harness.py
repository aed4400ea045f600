"""Seeded verification campaigns for the correlation inequalities.

A :class:`SweepConfig` lists campaigns; each campaign runs one registered
check on ``count`` random instances.  Every check yields records whose
``margin`` is oriented so that ``margin >= -tolerance`` means the inequality
holds.  Instance ``i`` of campaign ``c`` draws from its own generator seeded
with ``(seed, c, i)``, so reports do not depend on the thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Callable, Iterable

import numpy as np

from . import quantum as qu
from .classical import (DuplicatedInstance, classical_energy, classical_mc, cosine_form, duplicated_expectation,
                        fkg_log_margin, random_cone_expression, sigma, torus_means)
from .errors import BudgetError, HypothesisError, ModelError, QuadratureError
from .ising import IsingEnumeration, IsingModel
from .model import (CouplingTable, ModelSpec, SiteSet, Term, box_sites, kitaev_couplings, kitaev_sites,
                    model_to_dict, nearest_neighbour_couplings, popcount, sites_of)

# Literature values, quoted for context only; nothing here reproduces them.
LITERATURE_CONTEXT = {
    "tc_ising_3d_numerical": 4.511,
    "tc_classical_xy_3d_numerical": 2.202,
    "tc_quantum_xy_3d_numerical": 1.008,
    "tc_ising_3d_rigorous_upper": 5.0010,
}


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-9
    finite_difference: float = 1e-7
    mc_sigma: float = 3.0
    roundtrip: float = 1e-10
    sign_pattern: float = 1e-13


@dataclass(frozen=True)
class Campaign:
    check: str
    count: int
    min_sites: int = 1
    max_sites: int = 3
    j_min: float = 0.0
    j_max: float = 2.0
    beta_min: float = 0.0
    beta_max: float = 2.0
    max_terms: int = 3
    engine: str = "exact"
    spins: tuple[str, ...] = ("1/2",)
    enforce_hypotheses: bool = True
    sweeps: int = 100_000

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ModelError(f"unknown check {self.check!r}", "campaigns.check")
        if self.count < 1:
            raise ModelError("count must be >= 1", "campaigns.count")
        if not 1 <= self.min_sites <= self.max_sites:
            raise ModelError("need 1 <= min_sites <= max_sites", "campaigns.min_sites")
        if self.j_min > self.j_max or self.beta_min < 0 or self.beta_min >= self.beta_max:
            raise ModelError("empty coupling or beta range", "campaigns")
        if self.enforce_hypotheses and self.j_min < 0:
            raise ModelError("negative couplings need enforce_hypotheses = false", "campaigns.j_min")
        if self.engine not in ("exact", "mc"):
            raise ModelError(f"unknown engine {self.engine!r}", "campaigns.engine")
        if self.max_terms < 1:
            raise ModelError("max_terms must be >= 1", "campaigns.max_terms")
        object.__setattr__(self, "spins", tuple(str(Fraction(s)) for s in self.spins))


@dataclass(frozen=True)
class SweepConfig:
    campaigns: tuple[Campaign, ...]
    seed: int = 0
    fd_step: float = 1e-4
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not self.campaigns:
            raise ModelError("at least one campaign is required", "campaigns")

    def to_dict(self) -> dict:
        return {"seed": self.seed, "fd_step": self.fd_step, "tolerances": asdict(self.tolerances),
                "campaigns": [{**asdict(c), "spins": list(c.spins)} for c in self.campaigns]}

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ModelError("sweep config must be a JSON object")
        known = {f.name for f in fields(Campaign)}
        campaigns = []
        for i, raw in enumerate(data.get("campaigns", [])):
            unknown = set(raw) - known
            if unknown:
                raise ModelError(f"unknown fields {sorted(unknown)}", f"campaigns[{i}]")
            if "spins" in raw:
                raw = {**raw, "spins": tuple(raw["spins"])}
            try:
                campaigns.append(Campaign(**raw))
            except TypeError as exc:
                raise ModelError(str(exc), f"campaigns[{i}]") from None
            except ModelError as exc:
                raise ModelError(str(exc).split(": ", 1)[-1], f"campaigns[{i}]") from None
        tol = Tolerances(**data.get("tolerances", {}))
        return cls(tuple(campaigns), int(data.get("seed", 0)), float(data.get("fd_step", 1e-4)), tol)


def default_config(seed: int = 20240917, mc_sweeps: int = 1_000_000) -> SweepConfig:
    """The acceptance campaign: every theorem at desk scale."""
    return SweepConfig((
        Campaign("ginibre-classical", 200, 1, 4),
        Campaign("ginibre-quantum", 200, 1, 5, max_terms=4),
        Campaign("ginibre-kitaev", 2),
        Campaign("coupling-monotonicity-classical", 100, 1, 4),
        Campaign("coupling-monotonicity-quantum", 100, 1, 5, max_terms=4),
        Campaign("beta-monotonicity-classical", 100, 2, 4),
        Campaign("pair-monotonicity-classical", 50, 2, 4),
        Campaign("ising-domination-classical", 50, 1, 3),
        Campaign("ising-domination-quantum", 50, 1, 3, spins=("1/2", "1")),
        Campaign("ising-domination-composite", 50, 1, 3, spins=("1/2", "1")),
        Campaign("fkg-lattice-condition", 100, 1, 3),
        Campaign("duplicated-cone-positivity", 50, 1, 2),
        Campaign("mu-nu-sign-pattern", 20, 1, 2),
        Campaign("cosine-form-roundtrip", 100, 1, 4),
        Campaign("mc-quadrature-agreement", 20, 4, 4, j_max=1.0, beta_max=1.0, sweeps=mc_sweeps),
    ), seed)


# -- instance generation ------------------------------------------------------

def _uniform_beta(rng: np.random.Generator, c: Campaign) -> float:
    # (beta_min, beta_max]; flip the half-open interval of rng.uniform
    return float(c.beta_max - rng.uniform(0.0, c.beta_max - c.beta_min))


def _n_sites(rng: np.random.Generator, c: Campaign) -> int:
    return int(rng.integers(c.min_sites, c.max_sites + 1))


def random_mask(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(1, 1 << n))


def _random_masks(rng: np.random.Generator, n: int, count: int, even_first: bool = False) -> list[int]:
    count = min(count, (1 << n) - 1)
    masks: list[int] = []
    if even_first and n >= 2:
        x, y = rng.choice(n, size=2, replace=False)
        masks.append((1 << int(x)) | (1 << int(y)))
    while len(masks) < count:
        m = random_mask(rng, n)
        if m not in masks:
            masks.append(m)
    return masks


def random_ferromagnet(rng: np.random.Generator, c: Campaign, model: str, n: int | None = None,
                       j2: bool = True) -> ModelSpec:
    n = _n_sites(rng, c) if n is None else n
    masks = _random_masks(rng, n, int(rng.integers(1, c.max_terms + 1)))
    terms = [Term(m, float(rng.uniform(c.j_min, c.j_max)),
                  float(rng.uniform(c.j_min, c.j_max)) if j2 else 0.0) for m in masks]
    return ModelSpec(SiteSet(n), CouplingTable(tuple(terms), model), _uniform_beta(rng, c))


def random_monotone_instance(rng: np.random.Generator, c: Campaign, n: int | None = None) -> ModelSpec:
    """Couplings with ``J1 >= |J2|`` and ``J2 = 0`` on odd sets; ``J2`` takes both signs."""
    n = _n_sites(rng, c) if n is None else n
    masks = _random_masks(rng, n, int(rng.integers(1, c.max_terms + 1)), even_first=True)
    terms = []
    for m in masks:
        j1 = float(rng.uniform(max(c.j_min, 0.0), c.j_max))
        j2 = float(rng.uniform(-j1, j1)) if popcount(m) % 2 == 0 else 0.0
        terms.append(Term(m, j1, j2))
    return ModelSpec(SiteSet(n), CouplingTable(tuple(terms), "classical-xy"), _uniform_beta(rng, c))


def digest(payload: Any) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# -- checks -------------------------------------------------------------------

@dataclass
class Ctx:
    config: SweepConfig
    campaign: Campaign
    rng: np.random.Generator

    @property
    def tol(self) -> Tolerances:
        return self.config.tolerances


def _record(kind: str, instance: dict, lhs: float, rhs: float, margin: float, tolerance: float,
            x: int | None = None, y: int | None = None, **detail) -> dict:
    rec = {"kind": kind, "instance": instance, "lhs": float(lhs), "rhs": float(rhs),
           "margin": float(margin), "tolerance": float(tolerance)}
    if x is not None:
        rec["X"] = list(sites_of(x))
    if y is not None:
        rec["Y"] = list(sites_of(y))
    if detail:
        rec["detail"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in detail.items()}
    return rec


def _quadrature_or_raise(spec: ModelSpec, observables, nodes: int = 32, max_nodes: int = 256):
    fine, coarse, n = torus_means(spec, observables, nodes, 1e-12, max_nodes)
    err = float(np.max(np.abs(fine - coarse)))
    if err > 1e-6:
        raise QuadratureError(f"quadrature error estimate {err:.3g} at {n} nodes")
    return fine, err, n


def _check_hypothesis(ctx: Ctx, spec: ModelSpec) -> None:
    if ctx.campaign.enforce_hypotheses and not spec.couplings.ferromagnetic:
        raise HypothesisError("instance is not ferromagnetic")


def check_theorem1(spec: ModelSpec, x: int, y: int, axes: tuple[int, int] | None = None,
                   nodes: int = 32) -> tuple[float, float, dict]:
    """``(m1, m2)``: same-axis truncated correlation (expected >= 0) and cross-axis (expected <= 0).

    Classical models use the torus quadrature; quantum models the eigensolver,
    where the cross-axis observable lives on the table's second axis.
    """
    if spec.model == "classical-xy":
        obs = [sigma(1, x) + sigma(1, y), sigma(1, x), sigma(1, y), sigma(1, x) + sigma(2, y), sigma(2, y)]
        v, err, n = _quadrature_or_raise(spec, obs, nodes)
        return float(v[0] - v[1] * v[2]), float(v[3] - v[1] * v[4]), {"quadrature_error": err, "nodes": n}
    if spec.model == "quantum-xy":
        a, b = qu._axes_for(spec, axes)
        state = qu.GibbsState(qu.assemble_hamiltonian(spec, (a, b)), spec.beta)
        sx = qu.spin_product(1, x, spec.n, spec.spin)
        sy1 = qu.spin_product(1, y, spec.n, spec.spin)
        syb = qu.spin_product(b, y, spec.n, spec.spin)
        return state.truncated(sx, sy1), state.truncated(sx, syb), {"axes": [a, b]}
    raise ModelError(f"no Ginibre check for model {spec.model!r}")


def _ginibre_records(ctx: Ctx, spec: ModelSpec, x: int, y: int, axes=None) -> list[dict]:
    inst = model_to_dict(spec)
    if ctx.campaign.engine == "mc" and spec.model == "classical-xy":
        obs = [sigma(1, x) + sigma(1, y), sigma(1, x), sigma(1, y), sigma(1, x) + sigma(2, y), sigma(2, y)]
        run = classical_mc(spec, obs, ctx.campaign.sweeps, seed=int(ctx.rng.integers(2 ** 31)))
        t1, t2 = run.truncated(0, 1, 2), run.truncated(3, 1, 4)
        tol1 = max(ctx.tol.exact, ctx.tol.mc_sigma * t1.error)
        tol2 = max(ctx.tol.exact, ctx.tol.mc_sigma * t2.error)
        return [_record("same-axis", inst, t1.value, 0.0, t1.value, tol1, x, y, stderr=t1.error),
                _record("cross-axis", inst, t2.value, 0.0, -t2.value, tol2, x, y, stderr=t2.error)]
    m1, m2, detail = check_theorem1(spec, x, y, axes)
    return [_record("same-axis", inst, m1, 0.0, m1, ctx.tol.exact, x, y, **detail),
            _record("cross-axis", inst, m2, 0.0, -m2, ctx.tol.exact, x, y, **detail)]


def _ginibre_classical(ctx: Ctx) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, "classical-xy")
    _check_hypothesis(ctx, spec)
    return _ginibre_records(ctx, spec, random_mask(ctx.rng, spec.n), random_mask(ctx.rng, spec.n))


def _ginibre_quantum(ctx: Ctx) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, "quantum-xy")
    _check_hypothesis(ctx, spec)
    return _ginibre_records(ctx, spec, random_mask(ctx.rng, spec.n), random_mask(ctx.rng, spec.n), (1, 2))


def _ginibre_kitaev(ctx: Ctx) -> list[dict]:
    """Kitaev blocks alternate 1x1 and 2x1, with random ferromagnetic couplings."""
    width = 1 + int(ctx.rng.integers(0, 2))
    sites = kitaev_sites(width, 1)
    n_vertices, n_faces = 2 * (width + 1), width
    c = ctx.campaign
    table = kitaev_couplings(width, 1, list(ctx.rng.uniform(c.j_min, c.j_max, n_vertices)),
                             list(ctx.rng.uniform(c.j_min, c.j_max, n_faces)))
    spec = ModelSpec(sites, table, _uniform_beta(ctx.rng, c))
    _check_hypothesis(ctx, spec)
    records = []
    for _ in range(3):
        records += _ginibre_records(ctx, spec, random_mask(ctx.rng, spec.n), random_mask(ctx.rng, spec.n), (1, 3))
    return records


def _central_difference(f: Callable[[float], float], h: float) -> tuple[float, float, float]:
    plus, minus = f(h), f(-h)
    return plus, minus, (plus - minus) / (2 * h)


def _classical_mean_fn(spec: ModelSpec, obs, vary: Callable[[float], ModelSpec]) -> Callable[[float], float]:
    # pin the node count at the central point so both sides see the same rule
    _, _, n = _quadrature_or_raise(spec, [obs])

    def f(delta: float) -> float:
        v, _, _ = _quadrature_or_raise(vary(delta), [obs], nodes=n, max_nodes=n)
        return float(v[0])

    return f


def check_coupling_monotonicity(spec: ModelSpec, x: int, y: int, axis: int, h: float = 1e-4):
    """``(f(J+h), f(J-h), derivative)`` of ``<prod_{X} spin^1>`` in ``J^axis_Y``."""
    d = (1.0, 0.0) if axis == 1 else (0.0, 1.0)

    def vary(delta):
        return spec.with_couplings(spec.couplings.shifted(y, d[0] * delta, d[1] * delta))

    if spec.model == "classical-xy":
        f = _classical_mean_fn(spec, sigma(1, x), vary)
    else:
        op = qu.spin_product(1, x, spec.n, spec.spin)

        def f(delta):
            return qu.GibbsState(qu.assemble_hamiltonian(vary(delta)), spec.beta).expectation(op)
    return _central_difference(f, h)


def _coupling_monotonicity(ctx: Ctx, model: str) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, model)
    _check_hypothesis(ctx, spec)
    x, y = random_mask(ctx.rng, spec.n), random_mask(ctx.rng, spec.n)
    axis = int(ctx.rng.integers(1, 3))
    plus, minus, deriv = check_coupling_monotonicity(spec, x, y, axis, ctx.config.fd_step)
    margin = deriv if axis == 1 else -deriv
    return [_record(f"axis-{axis}", model_to_dict(spec), plus, minus, margin, ctx.tol.finite_difference,
                    x, y, derivative=deriv)]


def check_beta_monotonicity(spec: ModelSpec, b: int, h: float = 1e-4):
    """``(f(beta+h), f(beta-h), derivative)`` of ``<sigma^1_B>``."""
    for t in spec.couplings:
        if t.j1 < abs(t.j2) or (popcount(t.mask) % 2 and t.j2):
            raise HypothesisError("need J1 >= |J2| everywhere and J2 = 0 on odd sets")
    f = _classical_mean_fn(spec, sigma(1, b), lambda delta: spec.with_beta(spec.beta + delta))
    return _central_difference(f, h)


def _beta_monotonicity(ctx: Ctx) -> list[dict]:
    spec = random_monotone_instance(ctx.rng, ctx.campaign)
    spec = spec.with_beta(max(spec.beta, 2 * ctx.config.fd_step))
    b = random_mask(ctx.rng, spec.n)
    plus, minus, deriv = check_beta_monotonicity(spec, b, ctx.config.fd_step)
    negative = any(t.j2 < 0 for t in spec.couplings)
    return [_record("beta", model_to_dict(spec), plus, minus, deriv, ctx.tol.finite_difference, b,
                    derivative=deriv, negative_j2=negative)]


def _pair_monotonicity(ctx: Ctx) -> list[dict]:
    """Two-body couplings ``J (s1 s1 + eta s2 s2)`` with ``|eta| <= 1``; derivative in one ``J``."""
    c = ctx.campaign
    n = _n_sites(ctx.rng, c)
    pairs = [m for m in range(1, 1 << n) if popcount(m) == 2]
    chosen = [pairs[i] for i in ctx.rng.choice(len(pairs), size=min(len(pairs), c.max_terms), replace=False)]
    terms, etas = [], {}
    for m in chosen:
        j, eta = float(ctx.rng.uniform(c.j_min, c.j_max)), float(ctx.rng.uniform(-1, 1))
        etas[m] = eta
        terms.append(Term(m, j, eta * j))
    spec = ModelSpec(SiteSet(n), CouplingTable(tuple(terms)), _uniform_beta(ctx.rng, c))
    pair = chosen[int(ctx.rng.integers(len(chosen)))]
    a = random_mask(ctx.rng, n)
    eta = etas[pair]
    f = _classical_mean_fn(spec, sigma(1, a),
                           lambda d: spec.with_couplings(spec.couplings.shifted(pair, d, eta * d)))
    plus, minus, deriv = _central_difference(f, ctx.config.fd_step)
    return [_record("pair", model_to_dict(spec), plus, minus, deriv, ctx.tol.finite_difference, a, pair,
                    derivative=deriv, eta=eta)]


def check_xy_vs_ising(spec: ModelSpec, x: int) -> tuple[float, float]:
    """``(ising bound, xy value)``; the bound must dominate.

    Classical: ``<s_X>`` with couplings ``J1``.  Quantum spin ``S``:
    ``S^|X| <s_X>`` with couplings ``S^|A| J1_A``, which for spin 1/2 is the
    ``2^-|X|`` and ``2^-|A|`` rescaling.
    """
    if spec.model == "classical-xy":
        xy, _, _ = _quadrature_or_raise(spec, [sigma(1, x)])
        ising = IsingEnumeration(IsingModel.from_table(spec.n, spec.couplings, spec.beta)).expectation(x)
        return ising, float(xy[0])
    s = float(spec.spin)
    xy = qu.gibbs_expectation(qu.assemble_hamiltonian(spec, (1, 2)), spec.beta,
                              qu.spin_product(1, x, spec.n, spec.spin))
    terms = [(t.mask, s ** popcount(t.mask) * t.j1) for t in spec.couplings if t.j1]
    ising = IsingEnumeration(IsingModel(spec.n, tuple(terms), spec.beta)).expectation(x)
    return s ** popcount(x) * ising, xy


def _random_spin(ctx: Ctx) -> Fraction:
    spins = ctx.campaign.spins
    return Fraction(spins[int(ctx.rng.integers(len(spins)))])


def _ising_domination(ctx: Ctx, model: str) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, model)
    if model == "quantum-xy":
        spec = ModelSpec(spec.sites, spec.couplings, spec.beta, _random_spin(ctx))
    _check_hypothesis(ctx, spec)
    x = random_mask(ctx.rng, spec.n)
    bound, value = check_xy_vs_ising(spec, x)
    return [_record("ising-bound", model_to_dict(spec), bound, value, bound - value, ctx.tol.exact, x)]


def _ising_composite(ctx: Ctx) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, "quantum-xy")
    spec = ModelSpec(spec.sites, CouplingTable(spec.couplings.terms, "quantum-xy", "1-3"), spec.beta,
                     _random_spin(ctx))
    _check_hypothesis(ctx, spec)
    x = random_mask(ctx.rng, spec.n)
    quantum, ising = qu.composite_ising_quantum_expectation(spec, x)
    return [_record("rescaled-1-3", model_to_dict(spec), ising, quantum, ising - quantum, ctx.tol.exact, x)]


def check_fkg_hypothesis(spec: ModelSpec, theta, xi) -> float:
    """Relative lattice-condition margin ``w(t v x) w(t ^ x) / (w(t) w(x)) - 1``."""
    return fkg_log_margin(spec, theta, xi)


def _fkg(ctx: Ctx) -> list[dict]:
    spec = random_ferromagnet(ctx.rng, ctx.campaign, "classical-xy")
    _check_hypothesis(ctx, spec)
    theta = ctx.rng.uniform(0, np.pi / 2, spec.n)
    xi = ctx.rng.uniform(0, np.pi / 2, spec.n)
    margin = check_fkg_hypothesis(spec, theta, xi)
    inst = {**model_to_dict(spec), "theta": theta.tolist(), "xi": xi.tolist()}
    return [_record("lattice-condition", inst, margin, 0.0, margin, ctx.tol.exact)]


def _dup_cone(ctx: Ctx) -> list[dict]:
    spec = random_monotone_instance(ctx.rng, ctx.campaign)
    form = cosine_form(spec.couplings, spec.n)
    lam = {m: float(ctx.rng.uniform(0, 1)) for m in form.coefficients}
    dup = DuplicatedInstance(form, form.scaled(lam), spec.beta)
    expr = random_cone_expression(ctx.rng, spec.n, depth=2)
    value = duplicated_expectation(dup, expr)
    inst = {**model_to_dict(spec), "bar_factors": [[list(m), v] for m, v in lam.items()], "expr": repr(expr)}
    return [_record("cone", inst, value, 0.0, value, ctx.tol.exact)]


def _mu_nu(ctx: Ctx) -> list[dict]:
    n = _n_sites(ctx.rng, ctx.campaign)
    w = qu.mu_nu_basis(n)
    tol = ctx.tol.sign_pattern
    ops = {}
    for x in range(n):
        for axis in (1, 3):
            single = qu.spin_product(axis, 1 << x, n)
            ops[(x, axis, 1)] = (w @ qu.doubled_operator(single, 1) @ w.conj().T)
            ops[(x, axis, -1)] = (w @ qu.doubled_operator(single, -1) @ w.conj().T)
    inst = {"sites": n, "spin": "1/2"}
    records = []
    for (x, axis, sign), mat in ops.items():
        if np.max(np.abs(mat.imag)) > tol:
            raise ModelError("mu/nu representation is not real")
        # (S3)_- is the one nonpositive generator
        oriented = -mat.real if (axis, sign) == (3, -1) else mat.real
        records.append(_record(f"S{axis}{'+' if sign > 0 else '-'}", inst, oriented.min(), 0.0,
                               oriented.min(), tol, 1 << x))
    generators = [(-m.real if (k[1], k[2]) == (3, -1) else m.real) for k, m in ops.items()]
    poly = np.zeros_like(generators[0])
    for _ in range(4):
        mono = np.eye(poly.shape[0])
        for _ in range(int(ctx.rng.integers(1, 4))):
            mono = mono @ generators[int(ctx.rng.integers(len(generators)))]
        poly += float(ctx.rng.uniform(0.1, 1.0)) * mono
    scale = max(1.0, float(np.abs(poly).max()))
    records.append(_record("polynomial", inst, poly.min(), np.trace(poly), poly.min() / scale, tol,
                           trace=float(np.trace(poly))))
    return records


def _cosine_roundtrip(ctx: Ctx) -> list[dict]:
    spec = random_monotone_instance(ctx.rng, ctx.campaign, None) if ctx.campaign.min_sites >= 2 or \
        ctx.rng.random() < 0.8 else random_ferromagnet(ctx.rng, ctx.campaign, "classical-xy", j2=False)
    form = cosine_form(spec.couplings, spec.n)
    phi = ctx.rng.uniform(0, 2 * np.pi, spec.n)
    direct, via_form = classical_energy(spec, phi), form.energy(phi)
    inst = {**model_to_dict(spec), "phi": phi.tolist()}
    return [_record("energy", inst, direct, via_form, -abs(direct - via_form), ctx.tol.roundtrip),
            _record("nonnegative", inst, min(form.coefficients.values(), default=0.0), 0.0,
                    min(form.coefficients.values(), default=0.0), 0.0)]


def _mc_agreement(ctx: Ctx) -> list[dict]:
    """Metropolis against quadrature on the open 2x2 square."""
    c = ctx.campaign
    j1, j2 = ctx.rng.uniform(max(c.j_min, 0.0), c.j_max, 2)
    spec = ModelSpec(box_sites((2, 2)), nearest_neighbour_couplings((2, 2), float(j1), float(j2)),
                     _uniform_beta(ctx.rng, c))
    obs_choices = [sigma(1, 0b0011), sigma(1, 0b0101), sigma(2, 0b1001), sigma(1, 0b1111),
                   sigma(1, 0b0001) + sigma(1, 0b0001), sigma(2, 0b0110)]
    obs = obs_choices[int(ctx.rng.integers(len(obs_choices)))]
    exact, _, _ = _quadrature_or_raise(spec, [obs])
    run = classical_mc(spec, [obs], c.sweeps, seed=int(ctx.rng.integers(2 ** 31)))
    est = run.estimate(0)
    inst = {**model_to_dict(spec), "obs": [list(f) for f in obs]}
    gap = abs(est.value - exact[0])
    return [_record("agreement", inst, est.value, exact[0], ctx.tol.mc_sigma * est.error - gap, 0.0,
                    stderr=est.error, tau=est.details["tau"]),
            _record("stderr", inst, est.error, 5e-3, 5e-3 - est.error, 0.0)]


CHECKS: dict[str, Callable[[Ctx], list[dict]]] = {
    "ginibre-classical": _ginibre_classical,
    "ginibre-quantum": _ginibre_quantum,
    "ginibre-kitaev": _ginibre_kitaev,
    "coupling-monotonicity-classical": lambda ctx: _coupling_monotonicity(ctx, "classical-xy"),
    "coupling-monotonicity-quantum": lambda ctx: _coupling_monotonicity(ctx, "quantum-xy"),
    "beta-monotonicity-classical": _beta_monotonicity,
    "pair-monotonicity-classical": _pair_monotonicity,
    "ising-domination-classical": lambda ctx: _ising_domination(ctx, "classical-xy"),
    "ising-domination-quantum": lambda ctx: _ising_domination(ctx, "quantum-xy"),
    "ising-domination-composite": _ising_composite,
    "fkg-lattice-condition": _fkg,
    "duplicated-cone-positivity": _dup_cone,
    "mu-nu-sign-pattern": _mu_nu,
    "cosine-form-roundtrip": _cosine_roundtrip,
    "mc-quadrature-agreement": _mc_agreement,
}

# -- running and reporting ----------------------------------------------------


def _run_instance(config: SweepConfig, ci: int, ii: int) -> list[dict]:
    campaign = config.campaigns[ci]
    ctx = Ctx(config, campaign, np.random.default_rng([config.seed, ci, ii]))
    try:
        records = CHECKS[campaign.check](ctx)
    except (BudgetError, QuadratureError, HypothesisError) as exc:
        return [{"check": campaign.check, "campaign": ci, "index": ii, "error": f"{type(exc).__name__}: {exc}"}]
    out = []
    for rec in records:
        inst = rec.pop("instance")
        rec = {"theorem": f"{campaign.check}/{rec['kind']}", "check": campaign.check, "campaign": ci,
               "index": ii, "instance": digest(inst), **rec}
        rec["pass"] = rec["margin"] >= -rec["tolerance"]
        rec["_instance"] = inst
        out.append(rec)
    return out


@dataclass
class InequalityReport:
    config: dict
    checks: list[dict]
    summary: dict

    @property
    def failures(self) -> int:
        return self.summary["failures"]

    def to_dict(self) -> dict:
        return {"config": self.config, "checks": self.checks, "summary": self.summary,
                "context": LITERATURE_CONTEXT}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        columns = ["check", "kind", "campaign", "index", "instance", "X", "Y", "lhs", "rhs", "margin",
                   "tolerance", "pass", "error"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for rec in self.checks:
            row = []
            for col in columns:
                v = rec.get(col, "")
                if isinstance(v, list):
                    v = " ".join(map(str, v))
                elif isinstance(v, float):
                    v = repr(v)
                row.append(v)
            writer.writerow(row)
        return buf.getvalue()

    def lines(self) -> Iterable[str]:
        for name, s in self.summary["by_check"].items():
            status = "PASS" if s["failures"] == 0 else "FAIL"
            yield (f"{status} {name}: {s['checks']} checks, {s['failures']} failures, "
                   f"{s['errors']} errors, worst margin {s['worst_margin']:.3e}")


def _summarise(records: list[dict]) -> dict:
    by_check: dict[str, dict] = {}
    worst = None
    for rec in records:
        s = by_check.setdefault(rec["check"], {"checks": 0, "failures": 0, "errors": 0,
                                               "worst_margin": float("inf")})
        if "error" in rec:
            s["errors"] += 1
            continue
        s["checks"] += 1
        s["failures"] += not rec["pass"]
        slack = rec["margin"] + rec["tolerance"]
        s["worst_margin"] = min(s["worst_margin"], rec["margin"])
        if worst is None or slack < worst[0]:
            worst = (slack, rec)
    summary = {"checks": sum(s["checks"] for s in by_check.values()),
               "failures": sum(s["failures"] for s in by_check.values()),
               "errors": sum(s["errors"] for s in by_check.values()),
               "worst_margin": min((s["worst_margin"] for s in by_check.values()), default=0.0),
               "by_check": by_check}
    beta_recs = [r for r in records if r["check"] == "beta-monotonicity-classical" and "error" not in r]
    if beta_recs:
        frac = sum(r["detail"]["negative_j2"] for r in beta_recs) / len(beta_recs)
        summary["negative_j2_coverage"] = {"fraction": frac, "required": 0.4, "pass": frac >= 0.4}
        if frac < 0.4:
            summary["failures"] += 1
    if worst is not None:
        summary["worst"] = {**{k: v for k, v in worst[1].items() if k != "_instance"},
                            "model": worst[1]["_instance"]}
    return summary


def run_sweep(config: SweepConfig, threads: int = 1,
              progress: Callable[[str], None] | None = None) -> InequalityReport:
    jobs = [(ci, ii) for ci, c in enumerate(config.campaigns) for ii in range(c.count)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda job: _run_instance(config, *job), jobs))
    else:
        results = []
        for ci, ii in jobs:
            results.append(_run_instance(config, ci, ii))
            if progress and ii == config.campaigns[ci].count - 1:
                progress(config.campaigns[ci].check)
    records = [rec for group in results for rec in group]
    summary = _summarise(records)
    for rec in records:
        inst = rec.pop("_instance", None)
        if inst is not None and not rec["pass"]:
            rec["model"] = inst
    return InequalityReport(config.to_dict(), records, summary)
