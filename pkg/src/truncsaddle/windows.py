"""Truncation windows and the common evaluation record for truncated CGFs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import InvalidParameterError

METHOD_LR = "LR"
METHOD_CONV1 = "CONV1"
METHOD_CONV2 = "CONV2"
METHOD_HYBRID = "HYBRID"
METHOD_EXACT = "EXACT"


@dataclass(frozen=True)
class Window:
    """Open truncation interval (a, b); either endpoint may be infinite."""

    a: float
    b: float

    def __post_init__(self):
        a = float(self.a)
        b = float(self.b)
        if math.isnan(a) or math.isnan(b):
            raise InvalidParameterError("window endpoints must not be NaN")
        if not a < b:
            raise InvalidParameterError(f"window requires a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def left_open(self) -> bool:
        return math.isinf(self.a) and self.a < 0

    @property
    def right_open(self) -> bool:
        return math.isinf(self.b) and self.b > 0

    @property
    def two_sided(self) -> bool:
        return not self.left_open and not self.right_open

    @property
    def untruncated(self) -> bool:
        return self.left_open and self.right_open

    def __str__(self):
        return f"({self.a}, {self.b})"


@dataclass(frozen=True)
class TruncCgfEval:
    """Value and first two derivatives of a truncated-CGF approximation at one point.

    `method` tags the producing approximation; `inner` records the dispatched
    method when `method` is HYBRID.  `theta_domain` is the open interval on
    which the producing evaluator is defined.
    """

    k: float
    k1: float
    k2: float
    method: str
    theta_domain: Tuple[float, float]
    inner: Optional[str] = None
