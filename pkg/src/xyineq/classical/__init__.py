"""Classical XY model engines and the machinery behind its correlation inequalities."""

from .cosine import (Atom, ConeExpr, CosineForm, DuplicatedInstance, Product, Scale, Sum, canonical,
                     cosine_form, duplicated_expectation, pair_coefficients, random_cone_expression)
from .decomposition import (decomposed_expectation, decomposition_log_weight, fkg_log_margin,
                            ising_decomposition_weight)
from .montecarlo import MCRun, classical_expectation_mc, classical_mc
from .quadrature import (Factor, Observable, TorusGrid, classical_energy, classical_expectation,
                         classical_expectations, classical_truncated, observable, parse_observable,
                         sigma, torus_means)

__all__ = [
    "Atom", "ConeExpr", "CosineForm", "DuplicatedInstance", "Factor", "MCRun", "Observable", "Product",
    "Scale", "Sum", "TorusGrid", "canonical", "classical_energy", "classical_expectation",
    "classical_expectation_mc", "classical_expectations", "classical_mc", "classical_truncated",
    "cosine_form", "decomposed_expectation", "decomposition_log_weight", "duplicated_expectation",
    "fkg_log_margin", "ising_decomposition_weight", "observable", "pair_coefficients",
    "parse_observable", "random_cone_expression", "sigma", "torus_means",
]
