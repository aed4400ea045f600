"""Correlation inequalities for classical and quantum XY models, checked numerically.

Exact engines are cross-checked by a Metropolis sampler.  A seeded harness
verifies the inequalities on random instances, and ``bound`` solves for the
critical temperature lower bound.
"""

from .bound import BoundConstants, BoundResult, critical_threshold, tc_interval
from .errors import BudgetError, HypothesisError, ModelError, NoCrossingError, QuadratureError
from .model import CouplingTable, GibbsEstimate, ModelSpec, SiteSet, Term, load_model, save_model

__version__ = "0.1.0"

__all__ = ["BoundConstants", "BoundResult", "BudgetError", "CouplingTable", "GibbsEstimate",
           "HypothesisError", "ModelError", "ModelSpec", "NoCrossingError", "QuadratureError", "SiteSet",
           "Term", "critical_threshold", "load_model", "save_model", "tc_interval"]
