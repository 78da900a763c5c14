"""Weighted moduli of smoothness, K-functionals and best polynomial approximation on [-1, 1]."""

__version__ = "0.1.0"

from .funcspace import FunctionSpec, get, names  # noqa: E402,F401
from .moduli import ModulusQuery, compute, modulus_value  # noqa: E402,F401
from .kfunctional import k_functional_upper, k_scaling_check  # noqa: E402,F401
from .bestapprox import best_approx, en_sequence, potapov_ratio, derivative_error  # noqa: E402,F401
