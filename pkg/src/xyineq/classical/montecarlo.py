"""Metropolis sampling of the classical XY Gibbs measure.

Single-site updates ``phi_x -> phi_x + w*u`` with ``u`` uniform in (-1, 1),
sites visited in order.  The proposal width is tuned during burn-in towards
50% acceptance.  Error bars come from batch means; derived quantities such
as truncated correlations use a jackknife over the same batches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from ..errors import ModelError
from ..model import GibbsEstimate, ModelSpec, sites_of
from .quadrature import Observable

_BLOCK = 1 << 15


@numba.njit(cache=True)
def _run_block(phi, beta, width, term_sites, term_len, j1, j2, site_ptr, site_terms,
               shifts, uniforms, obs_sites, obs_axes, obs_len, out):
    n_sites = phi.shape[0]
    accepted = 0
    for sweep in range(shifts.shape[0]):
        for x in range(n_sites):
            c_field = 0.0
            s_field = 0.0
            for k in range(site_ptr[x], site_ptr[x + 1]):
                t = site_terms[k]
                pc = j1[t]
                ps = j2[t]
                for q in range(term_len[t]):
                    y = term_sites[t, q]
                    if y != x:
                        pc *= np.cos(phi[y])
                        ps *= np.sin(phi[y])
                c_field += pc
                s_field += ps
            old = phi[x]
            new = old + width * shifts[sweep, x]
            d_energy = -(c_field * (np.cos(new) - np.cos(old)) + s_field * (np.sin(new) - np.sin(old)))
            if d_energy <= 0.0 or uniforms[sweep, x] < np.exp(-beta * d_energy):
                phi[x] = new % (2.0 * np.pi)
                accepted += 1
        if out.shape[0] > 0:
            for k in range(obs_len.shape[0]):
                v = 1.0
                for q in range(obs_len[k]):
                    if obs_axes[k, q] == 1:
                        v *= np.cos(phi[obs_sites[k, q]])
                    else:
                        v *= np.sin(phi[obs_sites[k, q]])
                out[sweep, k] = v
    return accepted


class _Tables:
    def __init__(self, spec: ModelSpec, observables: Sequence[Observable]):
        terms = list(spec.couplings)
        width = max([len(sites_of(t.mask)) for t in terms] + [1])
        self.term_sites = np.zeros((max(len(terms), 1), width), dtype=np.int64)
        self.term_len = np.zeros(max(len(terms), 1), dtype=np.int64)
        self.j1 = np.zeros(max(len(terms), 1))
        self.j2 = np.zeros(max(len(terms), 1))
        per_site = [[] for _ in range(spec.n)]
        for i, t in enumerate(terms):
            sites = sites_of(t.mask)
            self.term_sites[i, :len(sites)] = sites
            self.term_len[i] = len(sites)
            self.j1[i], self.j2[i] = t.j1, t.j2
            for x in sites:
                per_site[x].append(i)
        self.site_ptr = np.cumsum([0] + [len(p) for p in per_site]).astype(np.int64)
        self.site_terms = np.array([i for p in per_site for i in p] or [0], dtype=np.int64)
        width = max([len(o) for o in observables] + [1])
        self.obs_sites = np.zeros((len(observables), width), dtype=np.int64)
        self.obs_axes = np.ones((len(observables), width), dtype=np.int64)
        self.obs_len = np.array([len(o) for o in observables], dtype=np.int64)
        for k, o in enumerate(observables):
            for q, f in enumerate(o):
                if f.site >= spec.n or f.axis not in (1, 2):
                    raise ModelError(f"invalid factor {f} for a {spec.n}-site model", "obs")
                self.obs_sites[k, q] = f.site
                self.obs_axes[k, q] = f.axis


@dataclass
class MCRun:
    """Per-sweep records reduced to batch means, plus sampler diagnostics."""

    batch_means: np.ndarray
    sweeps: int
    width: float
    acceptance: float
    tau: np.ndarray
    seed: int

    @property
    def n_batches(self) -> int:
        return self.batch_means.shape[0]

    def estimate(self, k: int) -> GibbsEstimate:
        col = self.batch_means[:, k]
        stderr = float(col.std(ddof=1) / np.sqrt(col.size))
        return GibbsEstimate(float(col.mean()), stderr, "monte-carlo", True,
                             {"sweeps": self.sweeps, "batches": self.n_batches,
                              "tau": float(self.tau[k]), "acceptance": self.acceptance})

    @property
    def estimates(self) -> list[GibbsEstimate]:
        return [self.estimate(k) for k in range(self.batch_means.shape[1])]

    def truncated(self, i_ab: int, i_a: int, i_b: int) -> GibbsEstimate:
        """``<AB> - <A><B>`` with a jackknife error over batches."""
        bm = self.batch_means
        b = bm.shape[0]
        total = bm.sum(axis=0)
        mean = total / b
        value = mean[i_ab] - mean[i_a] * mean[i_b]
        loo = (total[None, :] - bm) / (b - 1)
        jack = loo[:, i_ab] - loo[:, i_a] * loo[:, i_b]
        err = float(np.sqrt((b - 1) / b * np.sum((jack - jack.mean()) ** 2)))
        return GibbsEstimate(float(value), err, "monte-carlo", True, {"sweeps": self.sweeps})


def classical_mc(spec: ModelSpec, observables: Sequence[Observable], sweeps: int,
                 burn_in: int | None = None, seed: int = 0, n_batches: int = 20) -> MCRun:
    if sweeps < 100:
        raise ValueError(f"need at least 100 sweeps, got {sweeps}")
    if n_batches < 20:
        raise ValueError("batch means need at least 20 batches")
    burn_in = max(sweeps // 10, 100) if burn_in is None else burn_in
    tables = _Tables(spec, observables)
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=spec.n)
    width = np.pi
    args = (tables.term_sites, tables.term_len, tables.j1, tables.j2, tables.site_ptr, tables.site_terms)
    obs_args = (tables.obs_sites, tables.obs_axes, tables.obs_len)
    no_records = np.zeros((0, len(observables)))

    # burn-in in rounds; each round nudges the width towards 50% acceptance
    done = 0
    while done < burn_in:
        m = min(100, burn_in - done)
        acc = _run_block(phi, spec.beta, width, *args, rng.uniform(-1, 1, (m, spec.n)),
                         rng.random((m, spec.n)), *obs_args, no_records) / (m * spec.n)
        if not 0.4 <= acc <= 0.6:
            width = float(np.clip(width * np.clip(acc / 0.5, 0.5, 2.0), 1e-3, np.pi))
        done += m

    records = np.empty((sweeps, len(observables)))
    accepted = 0
    for start in range(0, sweeps, _BLOCK):
        m = min(_BLOCK, sweeps - start)
        accepted += _run_block(phi, spec.beta, width, *args, rng.uniform(-1, 1, (m, spec.n)),
                               rng.random((m, spec.n)), *obs_args, records[start:start + m])
    size = sweeps // n_batches
    batch_means = records[:size * n_batches].reshape(n_batches, size, -1).mean(axis=1)
    var = records.var(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(var > 0, size * batch_means.var(axis=0, ddof=1) / (2 * var), 0.0)
    if np.any(tau > sweeps / 50):
        warnings.warn(f"integrated autocorrelation time {tau.max():.3g} exceeds sweeps/50; "
                      "error bars are unreliable", RuntimeWarning, stacklevel=2)
    return MCRun(batch_means, sweeps, width, accepted / (sweeps * spec.n), tau, seed)


def classical_expectation_mc(spec: ModelSpec, obs: Observable, sweeps: int, burn_in: int | None = None,
                             seed: int = 0, n_batches: int = 20) -> GibbsEstimate:
    return classical_mc(spec, [obs], sweeps, burn_in, seed, n_batches).estimate(0)
