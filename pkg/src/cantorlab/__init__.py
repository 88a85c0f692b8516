"""Cantor attractors of two-map bi-Lipschitz IFSs on the line.

Exact interval lengths, exact covering counts and the five classical
dimensions (lower, Hausdorff, lower box, upper box, Assouad) for three
families of Cantor sets.
"""

__version__ = "0.1.0"

from cantorlab.errors import (  # noqa: F401
    CantorlabError,
    ConfigError,
    DeltaTooLarge,
    DepthExceeded,
    DomainError,
    ModelInvalid,
    PrecondFailed,
    TooLarge,
    UnsupportedModel,
    UnsupportedPrefix,
)
from cantorlab.symbolic import Word, ones_split, remove_last, floor_boundary  # noqa: F401
from cantorlab.loglength import LogLength, Ordering, ll_mul, ll_cmp, ll_to_float  # noqa: F401
