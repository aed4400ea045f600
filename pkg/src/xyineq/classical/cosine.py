"""Cosine form of the XY hamiltonian and the duplicated (two-replica) system.

Writing ``cos(phi) = (e^{i phi} + e^{-i phi})/2`` and likewise for ``sin``,
a term ``J1 prod cos + J2 prod sin`` over an even set ``A`` of size ``2k``
becomes ``2^{-|A|} sum_eps [J1 + (-1)^k J2 prod(eps)] cos(eps . phi)`` with
``eps`` ranging over sign vectors on ``A``.  Every coefficient is
nonnegative as soon as ``J1 >= |J2|``; odd sets carry only the ``J1`` part.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from ..errors import HypothesisError, ModelError, QuadratureError
from ..model import CouplingTable, sites_of
from .quadrature import CONVERGED_ERROR, GRID_BUDGET

Vector = tuple[int, ...]


def canonical(m: Sequence[int]) -> Vector:
    """Representative of ``{M, -M}`` whose first nonzero entry is positive."""
    m = tuple(int(v) for v in m)
    for v in m:
        if v:
            return m if v > 0 else tuple(-u for u in m)
    return m


@dataclass(frozen=True)
class CosineForm:
    """``H(phi) = -sum_M K_M cos(M . phi)`` over canonical integer vectors ``M``."""

    n_sites: int
    coefficients: Mapping[Vector, float] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[Vector, float] = {}
        for m, k in self.coefficients.items():
            if len(m) != self.n_sites:
                raise ModelError(f"vector {m} has wrong length for {self.n_sites} sites")
            key = canonical(m)
            if not any(key):
                raise ModelError("the zero vector only shifts the energy")
            merged[key] = merged.get(key, 0.0) + float(k)
        merged = {m: k for m, k in sorted(merged.items()) if k != 0.0}
        object.__setattr__(self, "coefficients", MappingProxyType(merged))

    def __getitem__(self, m: Sequence[int]) -> float:
        return self.coefficients.get(canonical(m), 0.0)

    @property
    def nonnegative(self) -> bool:
        return all(k >= 0 for k in self.coefficients.values())

    def energy(self, phi: Sequence[float]) -> float:
        phi = np.asarray(phi, dtype=float)
        return -float(sum(k * np.cos(np.dot(m, phi)) for m, k in self.coefficients.items()))

    def scaled(self, factors: Mapping[Vector, float] | float) -> "CosineForm":
        if isinstance(factors, (int, float)):
            return CosineForm(self.n_sites, {m: factors * k for m, k in self.coefficients.items()})
        return CosineForm(self.n_sites, {m: factors.get(m, 1.0) * k for m, k in self.coefficients.items()})


def cosine_form(couplings: CouplingTable, n_sites: int) -> CosineForm:
    """Expand an XY coupling table into its cosine form.

    Raises :class:`HypothesisError` if some odd subset carries a nonzero
    second-axis coupling (its sine product has no cosine expansion).
    """
    coeffs: dict[Vector, float] = {}
    for t in couplings:
        sites = sites_of(t.mask)
        size = len(sites)
        if t.j2 and size % 2:
            raise HypothesisError(f"odd subset {list(sites)} has a nonzero second-axis coupling")
        sin_sign = -1.0 if (size // 2) % 2 else 1.0
        for eps in itertools.product((1, -1), repeat=size):
            if eps[0] < 0:
                continue  # -eps gives the same cosine
            parity = float(np.prod(eps))
            k = 2.0 * (t.j1 + sin_sign * parity * t.j2) / 2.0 ** size
            m = [0] * n_sites
            for x, e in zip(sites, eps):
                m[x] = e
            key = tuple(m)
            coeffs[key] = coeffs.get(key, 0.0) + k
    return CosineForm(n_sites, coeffs)


def pair_coefficients(j: float, eta: float) -> tuple[float, float]:
    """``(K-, K+)`` for ``-J (s1 s1 + eta s2 s2)``: the ``cos(phi_x -+ phi_y)`` weights."""
    return j * (1 + eta) / 2, j * (1 - eta) / 2


# -- duplicated system --------------------------------------------------------

@dataclass(frozen=True)
class DuplicatedInstance:
    """Two replicas ``phi``, ``phibar`` with cosine forms ``K >= Kbar >= 0``."""

    form: CosineForm
    form_bar: CosineForm
    beta: float = 1.0

    def __post_init__(self):
        if self.form.n_sites != self.form_bar.n_sites:
            raise ModelError("replicas live on different site sets")
        if not self.beta > 0:
            raise ModelError("beta must be positive", "beta")
        for m in set(self.form.coefficients) | set(self.form_bar.coefficients):
            k, kb = self.form[m], self.form_bar[m]
            if not k >= kb >= 0:
                raise HypothesisError(f"need K >= Kbar >= 0, got K={k}, Kbar={kb} at M={m}")

    @property
    def n_sites(self) -> int:
        return self.form.n_sites


class ConeExpr:
    """Element of the cone generated by ``cos(M.phi) +- cos(M.phibar)``."""

    def evaluate(self, phi_dot, phibar_dot):
        raise NotImplementedError

    def __add__(self, other: "ConeExpr") -> "ConeExpr":
        return Sum((self, other))

    def __mul__(self, other: "ConeExpr") -> "ConeExpr":
        return Product((self, other))

    def __rmul__(self, c: float) -> "ConeExpr":
        return Scale(c, self)


@dataclass(frozen=True, eq=False)
class Atom(ConeExpr):
    m: Vector
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("atom sign must be +1 or -1")

    def evaluate(self, phi_dot, phibar_dot):
        return np.cos(phi_dot(self.m)) + self.sign * np.cos(phibar_dot(self.m))

    def __repr__(self):
        return f"(cos{self.m}{'+' if self.sign > 0 else '-'}cos{self.m}')"


@dataclass(frozen=True, eq=False)
class Sum(ConeExpr):
    terms: tuple[ConeExpr, ...]

    def evaluate(self, phi_dot, phibar_dot):
        return sum(t.evaluate(phi_dot, phibar_dot) for t in self.terms)

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


@dataclass(frozen=True, eq=False)
class Product(ConeExpr):
    factors: tuple[ConeExpr, ...]

    def evaluate(self, phi_dot, phibar_dot):
        out = 1.0
        for f in self.factors:
            out = out * f.evaluate(phi_dot, phibar_dot)
        return out

    def __repr__(self):
        return "*".join(map(repr, self.factors))


@dataclass(frozen=True, eq=False)
class Scale(ConeExpr):
    c: float
    expr: ConeExpr

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("cone scalings must be positive")

    def evaluate(self, phi_dot, phibar_dot):
        return self.c * self.expr.evaluate(phi_dot, phibar_dot)

    def __repr__(self):
        return f"{self.c:g}{self.expr!r}"


def random_cone_expression(rng: np.random.Generator, n_sites: int, depth: int = 2,
                           max_entry: int = 2) -> ConeExpr:
    if depth <= 0 or rng.random() < 0.3:
        m = tuple(int(v) for v in rng.integers(-max_entry, max_entry + 1, size=n_sites))
        if not any(m):
            m = (1,) + m[1:]
        return Atom(m, int(rng.choice((1, -1))))
    kind = rng.integers(3)
    if kind == 0:
        return Sum(tuple(random_cone_expression(rng, n_sites, depth - 1, max_entry) for _ in range(2)))
    if kind == 1:
        return Product(tuple(random_cone_expression(rng, n_sites, depth - 1, max_entry) for _ in range(2)))
    return Scale(float(rng.uniform(0.1, 2.0)), random_cone_expression(rng, n_sites, depth - 1, max_entry))


def _replica_weights(form: CosineForm, beta: float, phi_axes: list[np.ndarray], shape) -> np.ndarray:
    log_w = np.zeros(shape)
    for m, k in form.coefficients.items():
        log_w = log_w + beta * k * np.cos(sum(mx * ax for mx, ax in zip(m, phi_axes)))
    return np.exp(log_w - log_w.max())


def duplicated_expectation(dup: DuplicatedInstance, expr: ConeExpr, nodes: int = 16,
                           tol: float = 1e-12) -> float:
    """``<expr>`` under the product Gibbs measure of the two replicas.

    Quadrature over the doubled torus ``[0, 2pi)^{2N}``; nodes are doubled
    until ``|I(n) - I(n/2)| <= tol`` or the grid budget runs out.
    """
    n_sites = dup.n_sites
    dims = 2 * n_sites
    if dims > 6:
        raise ModelError(f"duplicated quadrature handles at most 3 sites, got {n_sites}")
    n = nodes
    while True:
        phi = 2.0 * np.pi * np.arange(n) / n
        axes = []
        for d in range(dims):
            shape = [1] * dims
            shape[d] = n
            axes.append(phi.reshape(shape))
        full = (n,) * dims
        w = (_replica_weights(dup.form, dup.beta, axes[:n_sites], full[:n_sites] + (1,) * n_sites)
             * _replica_weights(dup.form_bar, dup.beta, axes[n_sites:], (1,) * n_sites + full[n_sites:]))

        def phi_dot(m):
            return sum(mx * ax for mx, ax in zip(m, axes[:n_sites]))

        def phibar_dot(m):
            return sum(mx * ax for mx, ax in zip(m, axes[n_sites:]))

        f = np.broadcast_to(expr.evaluate(phi_dot, phibar_dot), w.shape)
        sub = (slice(None, None, 2),) * dims
        fine = float(np.sum(w * f) / np.sum(w))
        coarse = float(np.sum(w[sub] * f[sub]) / np.sum(w[sub]))
        err = abs(fine - coarse)
        if err <= tol or (2 * n) ** dims > GRID_BUDGET:
            if err > CONVERGED_ERROR:
                raise QuadratureError(f"duplicated quadrature error {err:.3g} at {n} nodes")
            return fine
        n *= 2
