"""Parameterized Gallager first bounds for binary linear codes on BPSK-AWGN."""

from .bounds import (
    BoundPreconditionError,
    ChannelParams,
    sphere_bound,
    tangential_bound,
    tangential_sphere_bound,
    union_bound,
)
from .codes import GeneratorMatrix, WeightEnumerator, canned_code, weight_enumerator
from .core import BoundResult, GallagerFamily, evaluate_at, min_form_bound, optimal_parameter
from .montecarlo import MCEstimate, simulate_fer

__version__ = "0.1.0"

__all__ = [
    "BoundPreconditionError",
    "BoundResult",
    "ChannelParams",
    "GallagerFamily",
    "GeneratorMatrix",
    "MCEstimate",
    "WeightEnumerator",
    "canned_code",
    "evaluate_at",
    "min_form_bound",
    "optimal_parameter",
    "simulate_fer",
    "sphere_bound",
    "tangential_bound",
    "tangential_sphere_bound",
    "union_bound",
    "weight_enumerator",
]
