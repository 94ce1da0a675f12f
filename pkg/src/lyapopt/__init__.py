"""Ergodic optimization of the top Lyapunov exponent for 2x2 cocycles."""
__version__ = "0.1.0"

from .cocycle import (
    ExponentBracket,
    OneStepCocycle,
    alpha_bounds,
    almost_multiplicativity_constant,
    beta_bracket,
    beta_lower,
    beta_upper,
    periodic_exponent,
    word_product,
)
from .errors import InputError, NumericError
from .projcone import (
    Arc,
    Multicone,
    MulticoneFamily,
    check_backward_noc,
    check_forward_noc,
    check_subshift_noc,
    complementary,
    is_strictly_forward_invariant,
)
from .symbolics import CyclicWord, TransitionMatrix, enumerate_cyclic_words, topological_entropy

__all__ = [
    "Arc", "CyclicWord", "ExponentBracket", "InputError", "Multicone", "MulticoneFamily", "NumericError",
    "OneStepCocycle", "TransitionMatrix", "__version__", "alpha_bounds", "almost_multiplicativity_constant",
    "beta_bracket", "beta_lower", "beta_upper", "check_backward_noc", "check_forward_noc", "check_subshift_noc",
    "complementary", "enumerate_cyclic_words", "is_strictly_forward_invariant", "periodic_exponent",
    "topological_entropy", "word_product",
]
