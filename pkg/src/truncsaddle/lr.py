"""Truncated-CGF approximation built on the Lugannani-Rice tail formula
applied to the exponentially tilted family.

The tilted CDF at level y is an explicit function of theta once the single
saddlepoint t_y (for the untilted law) is known, so a whole theta-curve
costs one root solve per finite window endpoint.  All CDF magnitudes are
carried in signed log space; far tails therefore do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from scipy.special import log_ndtr, ndtr

from .cgf import CgfModel
from .errors import DegenerateWindowError, OutsideStripError
from .solve import central_second_derivative, solve_saddlepoint
from .stable import log_normal_pdf, logsub, signed_logsum
from .windows import METHOD_LR, TruncCgfEval, Window

# |w| below this switches to the removable-singularity limit of the tail
# formula; the theta-derivative is replaced by the two-sided offset average.
W_TOL = 1e-4
DTHETA_OFFSET = 1e-4


@dataclass(frozen=True)
class LrIngredients:
    """Saddlepoint pieces entering the tail formula at one (theta, y)."""

    t_y: float
    w: float
    u: float
    k2_at_ty: float


@lru_cache(maxsize=4096)
def _saddle(model: CgfModel, y: float):
    root = solve_saddlepoint(model, y).root
    k, _, k2, k3, k4 = model.derivs(root)
    return root, k, k2, k3, k4


def lr_ingredients(model: CgfModel, theta: float, y: float) -> LrIngredients:
    t_y, k_at, k2_at, _, _ = _saddle(model, y)
    arg = 2.0 * ((t_y - theta) * y - k_at + model.k(theta))
    w = math.copysign(math.sqrt(max(arg, 0.0)), t_y - theta)
    u = (t_y - theta) * math.sqrt(k2_at)
    return LrIngredients(t_y=t_y, w=w, u=u, k2_at_ty=k2_at)


def _w_zero_limit(model: CgfModel, y: float) -> float:
    """Value of the tail formula as w -> 0 (theta -> t_y), constant term only."""
    _, _, k2, k3, _ = _saddle(model, y)
    return 0.5 + k3 / (6.0 * math.sqrt(2.0 * math.pi) * k2**1.5)


def _dcdf_zero_limit(model: CgfModel, y: float) -> float:
    """Finite limit of the theta-derivative display as theta -> t_y.

    Term-by-term the display is singular there; expanding w and u in
    (t_y - theta) leaves phi(0) * [ (K4*K2 - K3^2) / (24 K2^{5/2}) - K2^{1/2} ]
    with all cumulants at t_y.
    """
    _, _, k2, k3, k4 = _saddle(model, y)
    return ((k4 * k2 - k3 * k3) / (24.0 * k2**2.5) - math.sqrt(k2)) / math.sqrt(
        2.0 * math.pi
    )


def _log_cdf_pair(model: CgfModel, theta: float, y: float):
    """(log F, log(1-F)) of the tilted-CDF tail approximation, both in log space."""
    ing = lr_ingredients(model, theta, y)
    w, u = ing.w, ing.u
    if abs(w) < W_TOL:
        val = _w_zero_limit(model, y)
        if not 0.0 < val < 1.0:
            raise DegenerateWindowError(
                f"tail-formula limit {val} outside (0,1) at theta={theta}, y={y}"
            )
        return math.log(val), math.log1p(-val)
    x = 0.0 if w == u else 1.0 / w - 1.0 / u
    lphi = log_normal_pdf(w)
    terms_f = [(1, log_ndtr(w))]
    terms_s = [(1, log_ndtr(-w))]
    if x != 0.0:
        lx = lphi + math.log(abs(x))
        terms_f.append((int(math.copysign(1, x)), lx))
        terms_s.append((-int(math.copysign(1, x)), lx))
    sf, lf = signed_logsum(terms_f)
    ss, ls = signed_logsum(terms_s)
    if sf <= 0 or ss <= 0:
        raise DegenerateWindowError(
            f"tail formula left (0,1) at theta={theta}, y={y} (w={w:.3g}, u={u:.3g})"
        )
    return lf, ls


def _dcdf_raw(model: CgfModel, theta: float, y: float):
    """Signed log of the analytic theta-derivative of the tilted-CDF formula."""
    ing = lr_ingredients(model, theta, y)
    w, u, t_y = ing.w, ing.u, ing.t_y
    bracket = (y - model.k1(theta)) * (w**-3 - 1.0 / u) - (
        (t_y - theta) ** -2
    ) * ing.k2_at_ty**-0.5
    if bracket == 0.0:
        return 0, -math.inf
    sign = int(math.copysign(1, bracket))
    return sign, log_normal_pdf(w) + math.log(abs(bracket))


def _dcdf_signed(model: CgfModel, theta: float, y: float):
    ing = lr_ingredients(model, theta, y)
    if abs(ing.w) < W_TOL:
        # term-by-term singular at w = 0; the offset average of the raw
        # display loses ~eps/offset^4 digits to cancellation, so use the
        # analytic limit instead
        val = _dcdf_zero_limit(model, y)
        if val == 0.0:
            return 0, -math.inf
        return int(math.copysign(1, val)), math.log(abs(val))
    return _dcdf_raw(model, theta, y)


def lr_cdf(model: CgfModel, theta: float, y: float) -> float:
    """Tail-formula approximation to the theta-tilted CDF at y."""
    lf, _ = _log_cdf_pair(model, theta, y)
    return math.exp(lf)


def lr_cdf_dtheta(model: CgfModel, theta: float, y: float) -> float:
    """Analytic partial derivative of lr_cdf with respect to theta."""
    s, l = _dcdf_signed(model, theta, y)
    return s * math.exp(l)


class LrTruncatedCgf:
    """Prepared LR-based truncated-CGF evaluator for one (model, window)."""

    method = METHOD_LR

    def __init__(self, model: CgfModel, window: Window):
        self.model = model
        self.window = window
        self.domain = model.strip.interior()
        # saddles are solved once; the curve in theta is then explicit
        if not window.left_open:
            _saddle(model, window.a)
        if not window.right_open:
            _saddle(model, window.b)
        self._logmass0 = self._log_mass(0.0)

    def _log_mass(self, theta: float) -> float:
        """log of the approximate tilted window mass F(b) - F(a)."""
        w = self.window
        if w.untruncated:
            return 0.0
        if w.left_open:
            lf, _ = _log_cdf_pair(self.model, theta, w.b)
            return lf
        if w.right_open:
            _, ls = _log_cdf_pair(self.model, theta, w.a)
            return ls
        lfb, _ = _log_cdf_pair(self.model, theta, w.b)
        lfa, _ = _log_cdf_pair(self.model, theta, w.a)
        if not lfb > lfa:
            raise DegenerateWindowError(
                f"approximate mass non-positive on {w} at theta={theta}"
            )
        return logsub(lfb, lfa)

    def k(self, theta: float) -> float:
        if not self.model.strip.contains(theta):
            raise OutsideStripError(
                f"LR-based approximation is only defined inside the strip; theta={theta}"
            )
        if theta == 0.0:
            return 0.0
        return self.model.k(theta) + self._log_mass(theta) - self._logmass0

    def k1(self, theta: float) -> float:
        w = self.window
        k1_0 = self.model.k1(theta)
        if w.untruncated:
            return k1_0
        if w.left_open:
            sd, ld = _dcdf_signed(self.model, theta, w.b)
            lf, _ = _log_cdf_pair(self.model, theta, w.b)
            return k1_0 + sd * math.exp(ld - lf)
        if w.right_open:
            sd, ld = _dcdf_signed(self.model, theta, w.a)
            _, ls = _log_cdf_pair(self.model, theta, w.a)
            return k1_0 - sd * math.exp(ld - ls)
        sb, lb = _dcdf_signed(self.model, theta, w.b)
        sa, la = _dcdf_signed(self.model, theta, w.a)
        snum, lnum = signed_logsum([(sb, lb), (-sa, la)])
        if snum == 0:
            return k1_0
        return k1_0 + snum * math.exp(lnum - self._log_mass(theta))

    def k2(self, theta: float) -> float:
        scale = 1.0 + abs(self.k(theta)) + abs(self.model.k(theta))
        val, _ = central_second_derivative(
            self.k, theta, scale=scale, domain=self.domain
        )
        return val

    def eval(self, theta: float) -> TruncCgfEval:
        return TruncCgfEval(
            k=self.k(theta),
            k1=self.k1(theta),
            k2=self.k2(theta),
            method=METHOD_LR,
            theta_domain=self.domain,
        )


@lru_cache(maxsize=256)
def lr_evaluator(model: CgfModel, window: Window) -> LrTruncatedCgf:
    return LrTruncatedCgf(model, window)


def lr_truncated_cgf(model: CgfModel, window: Window, theta: float) -> TruncCgfEval:
    """One-shot LR-based truncated-CGF evaluation (see LrTruncatedCgf)."""
    return lr_evaluator(model, window).eval(theta)
