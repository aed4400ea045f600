"""Rotor spins as an angle in [0, pi/2] times a pair of Ising spins.

With ``cos(phi_x) = cos(theta_x) U_x`` and ``sin(phi_x) = sin(theta_x) V_x``
the XY energy splits into two Ising energies whose couplings depend on
``theta``.  Summing out the Ising spins leaves a weight on the cube
``[0, pi/2]^N`` that is the product of two Ising partition functions.
The inverse temperature is absorbed into the couplings, so the Ising
factors are always evaluated at ``beta = 1``.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from ..errors import BudgetError
from ..ising import IsingEnumeration, IsingModel
from ..model import ModelSpec, sites_of
from .quadrature import Observable


def _ising_pair(spec: ModelSpec, theta: np.ndarray) -> tuple[IsingModel, IsingModel]:
    c, s = np.cos(theta), np.sin(theta)
    cos_terms, sin_terms = [], []
    for t in spec.couplings:
        idx = list(sites_of(t.mask))
        cos_terms.append((t.mask, spec.beta * t.j1 * float(np.prod(c[idx]))))
        sin_terms.append((t.mask, spec.beta * t.j2 * float(np.prod(s[idx]))))
    return IsingModel(spec.n, tuple(cos_terms)), IsingModel(spec.n, tuple(sin_terms))


def _check_theta(spec: ModelSpec, theta: Sequence[float]) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({spec.n},)")
    if np.any(theta < 0) or np.any(theta > np.pi / 2):
        raise ValueError("theta must lie in [0, pi/2]^N")
    return theta


def decomposition_log_weight(spec: ModelSpec, theta: Sequence[float]) -> float:
    theta = _check_theta(spec, theta)
    cos_model, sin_model = _ising_pair(spec, theta)
    return IsingEnumeration(cos_model).log_partition + IsingEnumeration(sin_model).log_partition


def ising_decomposition_weight(spec: ModelSpec, theta: Sequence[float]) -> float:
    """Unnormalised weight ``Z_Ising[J1 prod cos theta] * Z_Ising[J2 prod sin theta]``."""
    return float(np.exp(decomposition_log_weight(spec, theta)))


def fkg_log_margin(spec: ModelSpec, theta: Sequence[float], xi: Sequence[float]) -> float:
    """``w(theta v xi) w(theta ^ xi) / (w(theta) w(xi)) - 1``; nonnegative for ferromagnets."""
    theta = _check_theta(spec, theta)
    xi = _check_theta(spec, xi)
    lw = decomposition_log_weight
    gap = (lw(spec, np.maximum(theta, xi)) + lw(spec, np.minimum(theta, xi))
           - lw(spec, theta) - lw(spec, xi))
    return float(np.expm1(gap))


def decomposed_expectation(spec: ModelSpec, obs: Observable, order: int = 32) -> float:
    """Gibbs expectation of a product observable through the angle/Ising split.

    Integrates over ``theta`` in ``[0, pi/2]^N`` with a tensor Gauss-Legendre
    rule of ``order`` points per site.  This route shares nothing with the
    torus quadrature and serves as its independent cross-check.
    """
    if order ** spec.n > 1 << 16:
        raise BudgetError(f"{order}^{spec.n} Gauss-Legendre nodes exceed the budget")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = (nodes + 1) * np.pi / 4
    weights = weights * np.pi / 4
    u_mask = v_mask = 0
    for f in obs:
        if f.axis == 1:
            u_mask ^= 1 << f.site
        else:
            v_mask ^= 1 << f.site
    num = den = 0.0
    # upper bound on log w(theta): keeps every rescaled weight <= 1
    log_ref = 2 * spec.n * np.log(2.0) + spec.beta * sum(abs(t.j1) + abs(t.j2) for t in spec.couplings)
    for idx in itertools.product(range(order), repeat=spec.n):
        theta = nodes[list(idx)]
        cos_model, sin_model = _ising_pair(spec, theta)
        ec, es = IsingEnumeration(cos_model), IsingEnumeration(sin_model)
        log_w = ec.log_partition + es.log_partition
        w = float(np.prod(weights[list(idx)])) * np.exp(log_w - log_ref)
        trig = 1.0
        for f in obs:
            trig *= np.cos(theta[f.site]) if f.axis == 1 else np.sin(theta[f.site])
        num += w * trig * ec.expectation(u_mask) * es.expectation(v_mask)
        den += w
    return num / den
