"""Dense-matrix quantum spin systems and their Gibbs states.

Site 0 is the leftmost Kronecker factor.  Single-site matrices are written in
the ``S^3`` eigenbasis ordered ``m = S, S-1, ..., -S``, so for spin 1/2 index
0 is ``|+>``.  Operators are plain complex ``numpy`` arrays.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .errors import BudgetError, ModelError
from .ising import IsingEnumeration, IsingModel
from .model import ModelSpec, sites_of

DIMENSION_BUDGET = 1 << 14
HERMITIAN_TOL = 1e-12


def _as_spin(spin) -> Fraction:
    spin = Fraction(spin)
    if spin <= 0 or (2 * spin).denominator != 1:
        raise ModelError(f"spin must be a positive half-integer, got {spin}", "spin")
    return spin


@lru_cache(maxsize=None)
def _spin_matrices(spin: Fraction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = float(spin)
    m = s - np.arange(int(2 * spin) + 1)
    # <m+1|S+|m> = sqrt(S(S+1) - m(m+1)); row index of m+1 is one above m
    raise_op = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    lower_op = raise_op.conj().T
    s1 = (raise_op + lower_op) / 2
    s2 = (raise_op - lower_op) / 2j
    s3 = np.diag(m).astype(complex)
    for a in (s1, s2, s3):
        a.setflags(write=False)
    return s1, s2, s3


def spin_matrices(spin=Fraction(1, 2)) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(S1, S2, S3)`` for spin ``S`` built from the ladder operators."""
    # copies, so callers may modify them freely
    return tuple(a.copy() for a in _spin_matrices(_as_spin(spin)))


def local_dim(spin) -> int:
    return int(2 * _as_spin(spin)) + 1


def check_dimension(n_sites: int, spin, budget: int = DIMENSION_BUDGET) -> int:
    dim = local_dim(spin) ** n_sites
    if dim > budget:
        raise BudgetError(f"Hilbert space dimension {dim} exceeds the budget {budget}")
    return dim


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(op), initial=0.0)))


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops)


def site_operator(op: np.ndarray, x: int, n_sites: int) -> np.ndarray:
    """``op`` acting on site ``x`` of ``n_sites``, identity elsewhere."""
    d = op.shape[0]
    if not 0 <= x < n_sites:
        raise ModelError(f"site {x} outside 0..{n_sites - 1}")
    if d ** n_sites > DIMENSION_BUDGET:
        raise BudgetError(f"Hilbert space dimension {d ** n_sites} exceeds the budget {DIMENSION_BUDGET}")
    return np.kron(np.kron(np.eye(d ** x), op), np.eye(d ** (n_sites - x - 1)))


def product_operator(factors: Sequence[tuple[int, int]], n_sites: int, spin=Fraction(1, 2),
                     rescaled: bool = False) -> np.ndarray:
    """``prod S^axis_site`` over ``(site, axis)`` factors, multiplied in the given order.

    With ``rescaled`` the single-site matrices are divided by ``S``.
    """
    spin = _as_spin(spin)
    check_dimension(n_sites, spin)
    mats = _spin_matrices(spin)
    scale = 1.0 / float(spin) if rescaled else 1.0
    d = local_dim(spin)
    per_site: list[np.ndarray] = [np.eye(d, dtype=complex) for _ in range(n_sites)]
    for site, axis in factors:
        if not 0 <= site < n_sites:
            raise ModelError(f"site {site} outside 0..{n_sites - 1}", "obs")
        if axis not in (1, 2, 3):
            raise ModelError(f"spin axis must be 1, 2 or 3, got {axis}", "obs")
        per_site[site] = per_site[site] @ (scale * mats[axis - 1])
    return kron_all(per_site)


def spin_product(axis: int, mask: int, n_sites: int, spin=Fraction(1, 2), rescaled: bool = False) -> np.ndarray:
    return product_operator([(x, axis) for x in sites_of(mask)], n_sites, spin, rescaled)


def _axes_for(spec: ModelSpec, axes: tuple[int, int] | None) -> tuple[int, int]:
    if axes is None:
        axes = (1, 3) if spec.couplings.convention == "1-3" else (1, 2)
    if tuple(axes) not in ((1, 2), (1, 3)):
        raise ModelError(f"axes must be (1, 2) or (1, 3), got {axes}")
    return tuple(axes)


def assemble_hamiltonian(spec: ModelSpec, axes: tuple[int, int] | None = None,
                         rescaled: bool = False) -> np.ndarray:
    """``-sum_A [J1_A prod S^a + J2_A prod S^b]`` with ``(a, b) = axes``.

    ``axes`` defaults to the table's convention: (1, 3) for Kitaev tables,
    (1, 2) otherwise.
    """
    a, b = _axes_for(spec, axes)
    dim = check_dimension(spec.n, spec.spin)
    h = np.zeros((dim, dim), dtype=complex)
    for t in spec.couplings:
        if t.j1:
            h -= t.j1 * spin_product(a, t.mask, spec.n, spec.spin, rescaled)
        if t.j2:
            h -= t.j2 * spin_product(b, t.mask, spec.n, spec.spin, rescaled)
    return h


class GibbsState:
    """``exp(-beta H)/Z`` from one hermitian eigendecomposition."""

    def __init__(self, hamiltonian: np.ndarray, beta: float):
        if not is_hermitian(hamiltonian):
            raise ModelError("hamiltonian is not hermitian")
        if beta < 0:
            raise ModelError("beta must be nonnegative", "beta")
        self.beta = beta
        self.energies, self.vectors = np.linalg.eigh(hamiltonian)
        log_w = -beta * self.energies
        w = np.exp(log_w - log_w.max())
        self.weights = w / w.sum()
        self.log_partition = float(log_w.max() + np.log(w.sum()))

    @property
    def dim(self) -> int:
        return self.energies.size

    def _check(self, op: np.ndarray) -> None:
        if op.shape != (self.dim, self.dim):
            raise ModelError(f"operator of shape {op.shape} on a {self.dim}-dimensional space")

    def expectation_complex(self, op: np.ndarray) -> complex:
        self._check(op)
        u = self.vectors
        diag = np.einsum("ij,ij->j", u.conj(), op @ u)
        return complex(self.weights @ diag)

    def expectation(self, op: np.ndarray) -> float:
        return self.expectation_complex(op).real

    def truncated(self, op_a: np.ndarray, op_b: np.ndarray) -> float:
        return (self.expectation_complex(op_a @ op_b)
                - self.expectation_complex(op_a) * self.expectation_complex(op_b)).real

    def density_matrix(self) -> np.ndarray:
        u = self.vectors
        return (u * self.weights) @ u.conj().T


def gibbs_expectation(hamiltonian: np.ndarray, beta: float, op: np.ndarray) -> float:
    return GibbsState(hamiltonian, beta).expectation(op)


def truncated_correlation(hamiltonian: np.ndarray, beta: float, op_a: np.ndarray, op_b: np.ndarray) -> float:
    return GibbsState(hamiltonian, beta).truncated(op_a, op_b)


# -- doubled space ------------------------------------------------------------

def doubled_operator(op: np.ndarray, sign: int = 1) -> np.ndarray:
    """``op (x) 1 + sign * 1 (x) op`` on the tensor square."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d = op.shape[0]
    if d * d > DIMENSION_BUDGET:
        raise BudgetError(f"doubled dimension {d * d} exceeds the budget {DIMENSION_BUDGET}")
    eye = np.eye(d)
    return np.kron(op, eye) + sign * np.kron(eye, op)


def doubled_expectation(hamiltonian: np.ndarray, beta: float, op: np.ndarray) -> float:
    """``Tr op exp(-beta H_+) / Z^2``, the product state of two replicas."""
    return GibbsState(doubled_operator(hamiltonian, 1), beta).expectation(op)


# Per-site basis of C^2 (x) C^2, rows in the |++>, |+->, |-+>, |--> basis.
# The last vector carries the phase that makes the S1 and S3 difference
# operators sign-definite.
_MU_NU = np.array([[1, 0, 0, 1],
                   [1, 0, 0, -1],
                   [0, 1, 1, 0],
                   [0, -1, 1, 0]]) / np.sqrt(2.0)


def mu_nu_basis(n_sites: int) -> np.ndarray:
    """Unitary ``W`` such that ``W O W^dag`` writes a doubled spin-1/2 operator in the mu/nu basis.

    Input operators act on ``H (x) H`` with the replica index outermost;
    ``W`` first regroups the factors site by site, then applies the 4x4
    change of basis on every site pair.
    """
    if n_sites > 6:
        raise BudgetError("mu/nu basis is limited to 6 sites")
    order = [ax for x in range(n_sites) for ax in (x, n_sites + x)]
    perm = np.arange(4 ** n_sites).reshape([2] * (2 * n_sites)).transpose(order).ravel()
    regroup = np.eye(4 ** n_sites)[perm]
    return kron_all([_MU_NU] * n_sites) @ regroup


# -- Ising comparison and magnetisation ---------------------------------------

def composite_ising_quantum_expectation(spec: ModelSpec, x_mask: int) -> tuple[float, float]:
    """``(<S3_X>, <s_X>)`` for the rescaled-spin model and its Ising companion.

    The quantum hamiltonian is ``-sum J1 S1_A + J3 S3_A`` in rescaled spins
    ``S^i / S``, with ``(J1, J3)`` read from the two coupling slots; the
    Ising model carries the ``J3`` couplings.  Both are at ``spec.beta``.
    The Gibbs state of the composite system is the product of the two, so
    the pair is computed separately.
    """
    h = assemble_hamiltonian(spec, (1, 3), rescaled=True)
    quantum = GibbsState(h, spec.beta).expectation(spin_product(3, x_mask, spec.n, spec.spin, True))
    ising = IsingEnumeration(IsingModel.from_table(spec.n, spec.couplings, spec.beta, slot=2))
    return quantum, ising.expectation(x_mask)


def finite_volume_magnetisation(spec: ModelSpec, axes: tuple[int, int] | None = None) -> float:
    """``(1/N^2) sum_{x,y} <S1_x S1_y>``."""
    state = GibbsState(assemble_hamiltonian(spec, axes), spec.beta)
    total = 0.0
    ops = [spin_product(1, 1 << x, spec.n, spec.spin) for x in range(spec.n)]
    for x in range(spec.n):
        for y in range(spec.n):
            total += state.expectation(ops[x] @ ops[y])
    return total / spec.n ** 2
