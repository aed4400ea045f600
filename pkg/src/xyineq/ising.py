"""Exact many-body Ising model by enumeration of all 2^N spin configurations.

Configurations are integers: bit ``x`` set means ``s_x = -1``.  The product
``prod_{x in A} s_x`` is then ``(-1)**popcount(state & A)``, so energies of a
whole block of states are evaluated with vectorised bit counting.  Weights
are always max-shifted before exponentiation, which keeps ``log Z`` and all
expectation ratios finite at any temperature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetError, ModelError
from .model import CouplingTable, ModelSpec, mask_of

MAX_ENUMERATION_SITES = 24
_CHUNK = 1 << 20


@dataclass(frozen=True)
class IsingModel:
    """Couplings ``J_A`` on site subsets (masks) of ``n_sites`` Ising spins."""

    n_sites: int
    couplings: tuple[tuple[int, float], ...] = ()
    beta: float = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ModelError("need at least one site", "sites")
        if not self.beta > 0:
            raise ModelError(f"beta must be positive, got {self.beta}", "beta")
        full = (1 << self.n_sites) - 1
        terms = tuple(sorted((int(m), float(j)) for m, j in self.couplings))
        for m, _ in terms:
            if m <= 0 or m & ~full:
                raise ModelError(f"invalid subset mask {m:#x}", "couplings")
        object.__setattr__(self, "couplings", terms)

    @classmethod
    def from_mapping(cls, n_sites: int, mapping: Mapping[int | Sequence[int], float],
                     beta: float = 1.0) -> "IsingModel":
        terms = [(k if isinstance(k, int) else mask_of(k), v) for k, v in mapping.items()]
        return cls(n_sites, tuple(terms), beta)

    @classmethod
    def from_table(cls, n_sites: int, table: CouplingTable, beta: float = 1.0,
                   slot: int = 1) -> "IsingModel":
        terms = [(t.mask, t.j1 if slot == 1 else t.j2) for t in table]
        return cls(n_sites, tuple((m, j) for m, j in terms if j != 0.0), beta)

    @classmethod
    def from_spec(cls, spec: ModelSpec, slot: int = 1) -> "IsingModel":
        return cls.from_table(spec.n, spec.couplings, spec.beta, slot)

    @property
    def ferromagnetic(self) -> bool:
        return all(j >= 0 for _, j in self.couplings)


def _sign_of(states: np.ndarray, mask: int) -> np.ndarray:
    """``prod_{x in mask} s_x`` for every state, as float +-1."""
    parity = np.bitwise_count(states & np.uint32(mask)) & 1
    return 1.0 - 2.0 * parity


def _states(n_sites: int) -> Iterable[np.ndarray]:
    total = 1 << n_sites
    for start in range(0, total, _CHUNK):
        yield np.arange(start, min(total, start + _CHUNK), dtype=np.uint32)


class IsingEnumeration:
    """All Boltzmann weights of one model, computed once and reused."""

    def __init__(self, model: IsingModel):
        if model.n_sites > MAX_ENUMERATION_SITES:
            raise BudgetError(f"{model.n_sites} Ising sites exceed the enumeration cap "
                              f"of {MAX_ENUMERATION_SITES}")
        self.model = model
        n = model.n_sites
        self.states = np.arange(1 << n, dtype=np.uint32)
        log_w = np.empty(1 << n)
        for block in _states(n):
            minus_energy = np.zeros(block.size)
            for mask, j in model.couplings:
                minus_energy += j * _sign_of(block, mask)
            log_w[block[0]:block[-1] + 1] = model.beta * minus_energy
        self.shift = float(log_w.max())
        self.weights = np.exp(log_w - self.shift)
        self._z = float(self.weights.sum())

    @property
    def log_partition(self) -> float:
        return self.shift + float(np.log(self._z))

    def expectation(self, mask: int) -> float:
        if mask == 0:
            return 1.0
        return float(self.weights @ _sign_of(self.states, mask)) / self._z

    def truncated(self, x_mask: int, y_mask: int) -> float:
        # overlapping sites square to one: s_X s_Y = s_{X xor Y}
        return self.expectation(x_mask ^ y_mask) - self.expectation(x_mask) * self.expectation(y_mask)


def ising_energy(model: IsingModel, config: Sequence[int]) -> float:
    """Energy of one configuration of spins ``s_x = +1 or -1``."""
    if len(config) != model.n_sites:
        raise ValueError(f"configuration has {len(config)} entries, expected {model.n_sites}")
    if any(s not in (1, -1) for s in config):
        raise ValueError("spins must be +1 or -1")
    state = sum(1 << x for x, s in enumerate(config) if s == -1)
    energy = 0.0
    for mask, j in model.couplings:
        energy -= j * (-1.0 if bin(state & mask).count("1") & 1 else 1.0)
    return energy


def ising_log_partition(model: IsingModel) -> float:
    return IsingEnumeration(model).log_partition


def ising_partition(model: IsingModel) -> float:
    log_z = ising_log_partition(model)
    if log_z > 709.0:
        raise OverflowError(f"log Z = {log_z:.6g} overflows a double; use ising_log_partition")
    return float(np.exp(log_z))


def ising_expectation(model: IsingModel, x_mask: int) -> float:
    return IsingEnumeration(model).expectation(x_mask)


def ising_truncated(model: IsingModel, x_mask: int, y_mask: int) -> float:
    return IsingEnumeration(model).truncated(x_mask, y_mask)
