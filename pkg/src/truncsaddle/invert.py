"""Downstream saddlepoint inversion for arbitrary CGF evaluators.

An evaluator is anything exposing k(theta), k1(theta), k2(theta) and an
open `domain` interval containing 0 with k(0) = 0; the truncated-CGF
approximations, the quadrature oracle and plain models all qualify, as do
pointwise sums of them.
"""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple

from .cgf import CgfModel
from .errors import (
    DefectiveCgfError,
    InvalidParameterError,
    NoConvergenceError,
    OutOfRangeError,
)
from .solve import MAX_ITER, SaddleRoot, _newton_in_bracket, central_first_derivative

DOMAIN_SHRINK = 1e-6
W_TOL = 1e-4


class ModelCgf:
    """Adapter presenting a CgfModel as a plain (k, k1, k2) evaluator."""

    def __init__(self, model: CgfModel):
        self.model = model
        self.domain = model.strip.interior()

    def k(self, theta):
        return self.model.k(theta)

    def k1(self, theta):
        return self.model.k1(theta)

    def k2(self, theta):
        return self.model.k2(theta)


class SumCgf:
    """Pointwise sum of CGF evaluators on the intersection of their domains."""

    def __init__(self, parts: Sequence):
        if not parts:
            raise InvalidParameterError("sum_cgf needs a nonempty list")
        self.parts = list(parts)
        lo = max(p.domain[0] for p in self.parts)
        hi = min(p.domain[1] for p in self.parts)
        if not lo < 0.0 < hi:
            raise InvalidParameterError(
                f"evaluator domains do not intersect around 0: ({lo}, {hi})"
            )
        self.domain = (lo, hi)

    def k(self, theta):
        return sum(p.k(theta) for p in self.parts)

    def k1(self, theta):
        return sum(p.k1(theta) for p in self.parts)

    def k2(self, theta):
        return sum(p.k2(theta) for p in self.parts)


def sum_cgf(parts: Sequence) -> SumCgf:
    """CGF evaluator of a sum of independent variables (pointwise sums)."""
    return SumCgf(parts)


def _search_domain(cgf) -> Tuple[float, float]:
    lo, hi = cgf.domain
    if math.isfinite(lo):
        lo = lo + DOMAIN_SHRINK * max(1.0, abs(lo))
    if math.isfinite(hi):
        hi = hi - DOMAIN_SHRINK * max(1.0, abs(hi))
    return lo, hi


def solve_cgf_saddle(cgf, x: float) -> SaddleRoot:
    """Solve k1(t) = x by bracket expansion from 0 plus safeguarded Newton.

    k1 is assumed increasing; if the expansion sweep sees it decrease, the
    evaluator is defective and the solve fails loudly.
    """
    lo_edge, hi_edge = _search_domain(cgf)
    f = lambda t: cgf.k1(t) - x
    f0 = f(0.0)
    if f0 == 0.0:
        return SaddleRoot(0.0, 0.0, (0.0, 0.0), 0)
    going_right = f0 < 0.0
    a, fa = 0.0, f0
    b = None
    prev_t, prev_f = 0.0, f0
    for m in range(1, 64):
        if going_right:
            t = hi_edge - (hi_edge - 0.0) * 2.0**-m if math.isfinite(hi_edge) else float(2.0**m)
            if t <= prev_t:
                break
        else:
            t = lo_edge + (0.0 - lo_edge) * 2.0**-m if math.isfinite(lo_edge) else -float(2.0**m)
            if t >= prev_t:
                break
        try:
            ft = f(t)
        except Exception:
            break
        if not math.isfinite(ft):
            break
        monotone_ok = (ft >= prev_f - 1e-9 * (1 + abs(prev_f))) if going_right else (
            ft <= prev_f + 1e-9 * (1 + abs(prev_f))
        )
        if not monotone_ok:
            raise DefectiveCgfError(
                f"k1 not monotone during bracket expansion near theta={t}"
                f" (k1 moved from {prev_f + x:.6g} to {ft + x:.6g})"
            )
        if (going_right and ft >= 0.0) or (not going_right and ft <= 0.0):
            b, fb = t, ft
            a, fa = prev_t, prev_f
            break
        prev_t, prev_f = t, ft
    if b is None:
        raise OutOfRangeError(f"level x={x} not attained by the evaluator's k1")
    if not going_right:
        a, b, fa, fb = b, a, fb, fa
    ftol = 1e-9 * (1.0 + abs(x))
    root, res, its = _newton_in_bracket(f, cgf.k2, a, b, fa, fb, ftol, MAX_ITER)
    return SaddleRoot(root, res, (a, b), its)


def saddlepoint_density(cgf, x: float) -> float:
    """First-order saddlepoint density of the evaluator's law at x."""
    sr = solve_cgf_saddle(cgf, x)
    t = sr.root
    k2 = cgf.k2(t)
    if not k2 > 0.0:
        raise DefectiveCgfError(
            f"non-positive curvature {k2} at saddlepoint theta={t} (x={x})"
        )
    return math.exp(cgf.k(t) - t * x) / math.sqrt(2.0 * math.pi * k2)


def lr_tail_probability(cgf, y: float) -> float:
    """Upper-tail-calibrated CDF approximation P(X <= y) from the evaluator.

    Uses the same tail formula as the truncated-CGF module, built from the
    evaluator's own (k, k1, k2); near the vanishing point of w the limit is
    taken with a numerically differentiated third cumulant.
    """
    from scipy.special import ndtr

    sr = solve_cgf_saddle(cgf, y)
    t = sr.root
    k_t = cgf.k(t)
    k2_t = cgf.k2(t)
    if not k2_t > 0.0:
        raise DefectiveCgfError(f"non-positive curvature {k2_t} at saddlepoint {t}")
    w = math.copysign(math.sqrt(max(2.0 * (t * y - k_t), 0.0)), t)
    u = t * math.sqrt(k2_t)
    if abs(w) < W_TOL:
        k3_t = central_first_derivative(cgf.k2, t, domain=_search_domain(cgf))
        return 0.5 + k3_t / (6.0 * math.sqrt(2.0 * math.pi) * k2_t**1.5)
    phi_w = math.exp(-0.5 * w * w) / math.sqrt(2.0 * math.pi)
    return float(ndtr(w) + phi_w * (1.0 / w - 1.0 / u))
