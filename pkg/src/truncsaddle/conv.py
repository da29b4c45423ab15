"""Exponential-convolution approximations to truncated CGFs.

The one-sided exponential moments are approximated by the saddlepoint form
of the density of X plus/minus an independent exponential variable; ratios
of those approximations give truncated-CGF approximations whose domain can
extend beyond the convergence strip of the underlying CGF.  First
derivatives of the one-sided forms are analytic; everything else is
numerically differentiated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .cgf import CgfModel
from .errors import (
    ApproximationBreakdownError,
    InvalidParameterError,
    SecondOrderTermError,
)
from .solve import (
    central_first_derivative,
    central_second_derivative,
    solve_convolution_saddlepoint,
)
from .stable import logsub
from .windows import METHOD_CONV1, METHOD_CONV2, TruncCgfEval, Window

_LOG_2PI = math.log(2.0 * math.pi)

SIDE_RIGHT_TRUNCATION = "right"  # window (-inf, y)
SIDE_LEFT_TRUNCATION = "left"  # window (y, inf)


@dataclass(frozen=True)
class XiEval:
    """Saddlepoint approximation to a one-sided exponential moment."""

    value: float
    log_value: float
    s_root: float
    order: int


def _second_order_factor(model: CgfModel, theta: float, s: float) -> float:
    """Standard second-order saddlepoint correction for the convolved CGF."""
    d = theta - s
    _, _, k2, k3, k4 = model.derivs(s)
    denom = k2 + d**-2
    r = (
        1.0
        + (k4 + 6.0 * d**-4) / (8.0 * denom**2)
        - 5.0 * (k3 + 2.0 * d**-3) ** 2 / (24.0 * denom**3)
    )
    if not math.isfinite(r) or r <= 0.0:
        raise SecondOrderTermError(
            f"second-order factor {r} unusable at theta={theta}, s={s}"
        )
    return r


def _log_xi(model: CgfModel, theta: float, y: float, branch: int, order: int):
    """(log xi, s_root) for the saddlepoint approximation of the one-sided moment."""
    s = solve_convolution_saddlepoint(model, theta, y, branch).root
    g = 1.0 + (theta - s) ** 2 * model.k2(s)
    log_val = -0.5 * (_LOG_2PI + math.log(g)) + model.k(s) - (s - theta) * y
    if order == 2:
        log_val += math.log(_second_order_factor(model, theta, s))
    return log_val, s


def xi_hat(
    model: CgfModel, theta: float, y: float, branch: int, order: int = 1
) -> XiEval:
    """Saddlepoint approximation to the exponential moment over (-inf, y)
    (branch 1) or (y, inf) (branch 2); order 2 applies the usual second-order
    correction factor."""
    if order not in (1, 2):
        raise InvalidParameterError("order must be 1 or 2")
    log_val, s = _log_xi(model, theta, y, branch, order)
    return XiEval(
        value=math.exp(log_val), log_value=log_val, s_root=s, order=order
    )


class ConvOneSidedCgf:
    """Prepared convolution approximation for a one-sided window.

    `side="right"` truncates to (-inf, y) (branch 1, domain extends to
    +inf); `side="left"` truncates to (y, inf) (branch 2, domain extends
    to -inf).
    """

    def __init__(self, model: CgfModel, y: float, side: str, order: int = 1):
        if side not in (SIDE_RIGHT_TRUNCATION, SIDE_LEFT_TRUNCATION):
            raise InvalidParameterError(f"side must be 'right' or 'left', got {side!r}")
        if order not in (1, 2):
            raise InvalidParameterError("order must be 1 or 2")
        self.model = model
        self.y = float(y)
        self.side = side
        self.order = order
        self.branch = 1 if side == SIDE_RIGHT_TRUNCATION else 2
        if self.branch == 1:
            self.domain = (model.strip.interior()[0], math.inf)
            self.method = METHOD_CONV1
        else:
            self.domain = (-math.inf, model.strip.interior()[1])
            self.method = METHOD_CONV2
        self._log_xi0, _ = _log_xi(model, 0.0, self.y, self.branch, order)

    def _check(self, theta: float):
        lo, hi = self.domain
        if not lo < theta < hi:
            raise ApproximationBreakdownError(
                f"theta={theta} outside extended domain ({lo}, {hi})"
            )

    def k(self, theta: float) -> float:
        self._check(theta)
        if theta == 0.0:
            return 0.0
        log_val, _ = _log_xi(self.model, theta, self.y, self.branch, self.order)
        return log_val - self._log_xi0

    def k1(self, theta: float) -> float:
        self._check(theta)
        s = solve_convolution_saddlepoint(self.model, theta, self.y, self.branch).root
        _, k1s, k2s, k3s, _ = self.model.derivs(s)
        d = theta - s
        g = 1.0 + d * d * k2s
        ds_dtheta = 1.0 / g
        d2s_dtheta2 = -(d * d) * (k3s + 2.0 * d * k2s * k2s) / g**3
        dprime = 0.5 * d2s_dtheta2 / ds_dtheta
        val = self.y + dprime - (self.y - k1s) * ds_dtheta
        if self.order == 2:
            # the correction factor varies with theta; differentiate its log
            def logr(t):
                st = solve_convolution_saddlepoint(
                    self.model, t, self.y, self.branch
                ).root
                return math.log(_second_order_factor(self.model, t, st))

            val += central_first_derivative(logr, theta, domain=self.domain)
        return val

    def k2(self, theta: float) -> float:
        self._check(theta)
        scale = 1.0 + abs(self.k(theta))
        val, _ = central_second_derivative(self.k, theta, scale=scale, domain=self.domain)
        return val

    def eval(self, theta: float) -> TruncCgfEval:
        return TruncCgfEval(
            k=self.k(theta),
            k1=self.k1(theta),
            k2=self.k2(theta),
            method=self.method,
            theta_domain=self.domain,
        )


class ConvTwoSidedCgf:
    """Prepared convolution approximation for a finite window (a, b).

    Branch 1 differences the (-inf, y) moments (domain extending to +inf),
    branch 2 the (y, inf) moments (domain extending to -inf).  A window
    endpoint with no distribution mass below it degenerates to the
    corresponding one-sided form.
    """

    def __init__(self, model: CgfModel, window: Window, branch: int, order: int = 2):
        if not window.two_sided:
            raise InvalidParameterError(f"two-sided form needs finite endpoints, got {window}")
        if branch not in (1, 2):
            raise InvalidParameterError("branch must be 1 or 2")
        if order not in (1, 2):
            raise InvalidParameterError("order must be 1 or 2")
        self.model = model
        self.window = window
        self.branch = branch
        self.order = order
        if branch == 1:
            self.domain = (model.strip.interior()[0], math.inf)
            self.method = METHOD_CONV1
        else:
            self.domain = (-math.inf, model.strip.interior()[1])
            self.method = METHOD_CONV2
        self._log_num0 = self._log_num(0.0)

    def _check(self, theta: float):
        lo, hi = self.domain
        if not lo < theta < hi:
            raise ApproximationBreakdownError(
                f"theta={theta} outside extended domain ({lo}, {hi})"
            )

    def _log_num(self, theta: float) -> float:
        a, b = self.window.a, self.window.b
        if self.branch == 1:
            lb, _ = _log_xi(self.model, theta, b, 1, self.order)
            la, _ = _log_xi(self.model, theta, a, 1, self.order)
        else:
            lb, _ = _log_xi(self.model, theta, a, 2, self.order)
            la, _ = _log_xi(self.model, theta, b, 2, self.order)
        if not lb > la:
            raise ApproximationBreakdownError(
                f"convolution difference non-positive on {self.window} at "
                f"theta={theta} (branch {self.branch})"
            )
        return logsub(lb, la)

    def k(self, theta: float) -> float:
        self._check(theta)
        if theta == 0.0:
            return 0.0
        return self._log_num(theta) - self._log_num0

    def k1(self, theta: float) -> float:
        self._check(theta)
        scale = 1.0 + abs(self.k(theta))
        return central_first_derivative(self.k, theta, scale=scale, domain=self.domain)

    def k2(self, theta: float) -> float:
        self._check(theta)
        scale = 1.0 + abs(self.k(theta))
        val, _ = central_second_derivative(self.k, theta, scale=scale, domain=self.domain)
        return val

    def eval(self, theta: float) -> TruncCgfEval:
        return TruncCgfEval(
            k=self.k(theta),
            k1=self.k1(theta),
            k2=self.k2(theta),
            method=self.method,
            theta_domain=self.domain,
        )


@lru_cache(maxsize=256)
def conv_onesided_evaluator(model, y, side, order=1) -> ConvOneSidedCgf:
    return ConvOneSidedCgf(model, y, side, order)


@lru_cache(maxsize=256)
def conv_twosided_evaluator(model, window, branch, order=2) -> ConvTwoSidedCgf:
    return ConvTwoSidedCgf(model, window, branch, order)


def conv_truncated_cgf_onesided(
    model: CgfModel, y: float, side: str, theta: float, order: int = 1
) -> TruncCgfEval:
    """Convolution approximation for the one-sided window given by `side`."""
    return conv_onesided_evaluator(model, float(y), side, order).eval(theta)


def conv_truncated_cgf_twosided(
    model: CgfModel, window: Window, branch: int, theta: float, order: int = 2
) -> TruncCgfEval:
    """Convolution approximation for a finite window via the chosen branch."""
    return conv_twosided_evaluator(model, window, branch, order).eval(theta)


def conv_evaluator_for_window(
    model: CgfModel, window: Window, branch: int, order: Optional[int] = None
):
    """Pick the convolution evaluator appropriate for `window`.

    Finite windows whose lower (branch 1) endpoint carries no mass below it
    reduce exactly to the one-sided form, since the subtracted moment is
    identically zero there.  Default order follows the one-sided/two-sided
    rule (1 and 2 respectively).
    """
    if window.untruncated:
        raise InvalidParameterError("untruncated window needs no approximation")
    if window.left_open:
        return conv_onesided_evaluator(
            model, window.b, SIDE_RIGHT_TRUNCATION, order or 1
        )
    if window.right_open:
        return conv_onesided_evaluator(
            model, window.a, SIDE_LEFT_TRUNCATION, order or 1
        )
    if branch == 1 and model.cdf is not None and model.cdf(window.a) <= 0.0:
        return conv_onesided_evaluator(
            model, window.b, SIDE_RIGHT_TRUNCATION, order or 2
        )
    if branch == 2 and model.cdf is not None and model.cdf(window.b) >= 1.0:
        return conv_onesided_evaluator(
            model, window.a, SIDE_LEFT_TRUNCATION, order or 2
        )
    return conv_twosided_evaluator(model, window, branch, order or 2)
