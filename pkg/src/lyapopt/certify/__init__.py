"""Certificates: domination, typicality, extremal norms, additive potentials."""
from ..projcone import MulticoneFamily
from .barabanov import (
    EuclideanNorm,
    PolygonalNorm,
    barabanov_norm,
    common_eigendirection,
    extremal_residual,
    norm_equivalence_constant,
)
from .cuneo import AdditivePotential, birkhoff_sum, cuneo_potential, potential_defect
from .domination import (
    DominationFit,
    MulticoneSearch,
    SplittingSample,
    check_domination_rate,
    compute_splitting,
    find_invariant_family,
    find_invariant_multicone,
    inverse_on_dual,
    search_backward_noc,
)
from .typicality import check_pinching, check_twisting

__all__ = [
    "AdditivePotential", "DominationFit", "EuclideanNorm", "MulticoneFamily", "MulticoneSearch",
    "PolygonalNorm", "SplittingSample", "barabanov_norm", "birkhoff_sum", "check_domination_rate",
    "check_pinching", "check_twisting", "common_eigendirection", "compute_splitting", "cuneo_potential",
    "extremal_residual", "find_invariant_family", "find_invariant_multicone", "inverse_on_dual", "norm_equivalence_constant",
    "potential_defect", "search_backward_noc",
]
