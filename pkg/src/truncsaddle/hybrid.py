"""Rule-of-thumb dispatch between the tilted (LR) and convolution
approximations, plus strip-edge diagnostics for the wrong-tail conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

from .cgf import CgfModel, ConvergenceStrip
from .conv import conv_evaluator_for_window
from .errors import InvalidParameterError
from .lr import lr_evaluator
from .windows import (
    METHOD_CONV1,
    METHOD_CONV2,
    METHOD_HYBRID,
    METHOD_LR,
    TruncCgfEval,
    Window,
)


@dataclass(frozen=True)
class MethodChoice:
    method: str
    reason: str


def _right_extension(strip: ConvergenceStrip, window: Window) -> bool:
    # truncation at a finite b extends the domain beyond a finite strip edge
    return math.isfinite(window.b) and math.isfinite(strip.upper)


def _left_extension(strip: ConvergenceStrip, window: Window) -> bool:
    return math.isfinite(window.a) and math.isfinite(strip.lower)


def select_method(strip: ConvergenceStrip, window: Window, theta: float) -> MethodChoice:
    """Pick the approximation for (window, theta): the tilted/LR form in any
    tail without a domain extension, otherwise the convolution branch that
    owns the extension.  Right tail means theta >= 0."""
    if theta >= 0.0:
        if _right_extension(strip, window):
            return MethodChoice(
                METHOD_CONV1,
                "right tail with finite window endpoint extending a finite strip edge",
            )
        return MethodChoice(METHOD_LR, "right tail without domain extension")
    if _left_extension(strip, window):
        return MethodChoice(
            METHOD_CONV2,
            "left tail with finite window endpoint extending a finite strip edge",
        )
    return MethodChoice(METHOD_LR, "left tail without domain extension")


class HybridTruncatedCgf:
    """Prepared rule-of-thumb evaluator for one (model, window)."""

    method = METHOD_HYBRID

    def __init__(self, model: CgfModel, window: Window):
        self.model = model
        self.window = window
        lo = -math.inf if _left_extension(model.strip, window) else model.strip.interior()[0]
        hi = math.inf if _right_extension(model.strip, window) else model.strip.interior()[1]
        self.domain = (lo, hi)

    def _inner(self, theta: float):
        choice = select_method(self.model.strip, self.window, theta)
        if choice.method == METHOD_LR:
            return lr_evaluator(self.model, self.window), choice
        branch = 1 if choice.method == METHOD_CONV1 else 2
        return conv_evaluator_for_window(self.model, self.window, branch), choice

    def k(self, theta: float) -> float:
        ev, _ = self._inner(theta)
        return ev.k(theta)

    def k1(self, theta: float) -> float:
        ev, _ = self._inner(theta)
        return ev.k1(theta)

    def k2(self, theta: float) -> float:
        ev, _ = self._inner(theta)
        return ev.k2(theta)

    def eval(self, theta: float) -> TruncCgfEval:
        ev, choice = self._inner(theta)
        inner = ev.eval(theta)
        return TruncCgfEval(
            k=inner.k,
            k1=inner.k1,
            k2=inner.k2,
            method=METHOD_HYBRID,
            theta_domain=self.domain,
            inner=choice.method,
        )


@lru_cache(maxsize=256)
def hybrid_evaluator(model: CgfModel, window: Window) -> HybridTruncatedCgf:
    return HybridTruncatedCgf(model, window)


def hybrid_truncated_cgf(model: CgfModel, window: Window, theta: float) -> TruncCgfEval:
    """Rule-of-thumb truncated-CGF approximation (continuous at 0 by calibration)."""
    return hybrid_evaluator(model, window).eval(theta)


# ---------------------------------------------------------------------------
# strip-edge diagnostics
# ---------------------------------------------------------------------------


@dataclass
class TailDiagnostics:
    """Ratio sequences along a geometric approach to one strip edge.

    `holds_*` are monotone-trend verdicts: ratio conditions require the
    sequence to decrease toward zero; the boundedness condition fails when
    the derivative magnitudes grow without an apparent bound.
    """

    model_name: str
    side: str
    s_values: List[float] = field(default_factory=list)
    ratio_k2_over_k1sq: List[float] = field(default_factory=list)
    ratio_k2_over_k1: List[float] = field(default_factory=list)
    ratio_k4_over_k1cu: List[float] = field(default_factory=list)
    deriv_bound: List[float] = field(default_factory=list)
    holds_ratio_31: bool = False
    holds_ratio_32: bool = False
    holds_bounded_34: bool = False

    def verdicts(self) -> Dict[str, bool]:
        return {
            "curvature_over_slope_sq_to_zero": self.holds_ratio_31,
            "slope_ratio_conditions_to_zero": self.holds_ratio_32,
            "derivatives_stay_bounded": self.holds_bounded_34,
        }


def _approach_grid(edge: float, side: str, m_max: int = 20) -> List[float]:
    out = []
    if math.isfinite(edge):
        base = abs(edge) if edge != 0.0 else 1.0
        for m in range(1, m_max + 1):
            s = edge + 2.0**-m * base if side == "left" else edge - 2.0**-m * base
            out.append(s)
    else:
        for m in range(1, m_max + 1):
            out.append(-(2.0**m) if side == "left" else 2.0**m)
    return out


def _decreasing_to_zero(vals: List[float], window: int = 5) -> bool:
    vals = [abs(v) for v in vals if math.isfinite(v)]
    if len(vals) < window + 1:
        return False
    tail = vals[-window:]
    if any(tail[i + 1] >= tail[i] for i in range(len(tail) - 1)):
        return False
    return tail[-1] < 0.5 * max(vals[0], 1e-300)


def _stays_bounded(vals: List[float], window: int = 5) -> bool:
    vals = [abs(v) for v in vals if math.isfinite(v)]
    if len(vals) < window + 1:
        return False
    tail = vals[-window:]
    growing = all(tail[i + 1] > tail[i] for i in range(len(tail) - 1))
    blown_up = tail[-1] > 10.0 * max(vals[0], 1e-300)
    return not (growing and blown_up)


def tail_diagnostics(model: CgfModel, side: str) -> TailDiagnostics:
    """Evaluate the wrong-tail ratio conditions along one strip edge.

    `side="left"` approaches the lower edge (the tail relevant to the
    branch-1 form at very negative arguments), `side="right"` the upper
    edge (mirror case for branch 2).
    """
    if side not in ("left", "right"):
        raise InvalidParameterError("side must be 'left' or 'right'")
    edge = model.strip.lower if side == "left" else model.strip.upper
    diag = TailDiagnostics(model_name=model.name, side=side)
    for s in _approach_grid(edge, side):
        if not model.strip.contains(s):
            continue
        try:
            _, k1, k2, k3, k4 = model.derivs(s)
        except (OverflowError, ValueError):
            break
        if not all(map(math.isfinite, (k1, k2, k3, k4))):
            break
        diag.s_values.append(s)
        diag.ratio_k2_over_k1sq.append(k2 / k1**2 if k1 != 0.0 else math.inf)
        diag.ratio_k2_over_k1.append(k2 / abs(k1) if k1 != 0.0 else math.inf)
        diag.ratio_k4_over_k1cu.append(k4 / abs(k1) ** 3 if k1 != 0.0 else math.inf)
        diag.deriv_bound.append(max(abs(k2), abs(k3), abs(k4)))
    diag.holds_ratio_31 = _decreasing_to_zero(diag.ratio_k2_over_k1sq)
    diag.holds_ratio_32 = _decreasing_to_zero(
        diag.ratio_k2_over_k1
    ) and _decreasing_to_zero(diag.ratio_k4_over_k1cu)
    diag.holds_bounded_34 = _stays_bounded(diag.deriv_bound)
    return diag
