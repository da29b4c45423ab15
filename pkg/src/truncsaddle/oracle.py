"""Quadrature ground truth for truncated MGFs/CGFs and the one-sided
exponential moments, plus seeded Monte-Carlo truncated sampling.

All integrals run through one adaptive-quadrature wrapper with hard
accuracy targets; failure to meet them raises rather than degrading.
The Monte-Carlo sampler uses the counter-based Philox generator so
streams are reproducible across platforms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .cgf import CgfModel
from .errors import (
    AcceptanceTooLowError,
    InvalidParameterError,
    QuadratureError,
)
from .windows import METHOD_EXACT, TruncCgfEval, Window

QUAD_ABS_TARGET = 1e-14
QUAD_REL_TARGET = 1e-10
QUAD_PANEL_BUDGET = 20000

MIN_ACCEPTANCE = 1e-6


def _quad(fn, a, b, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        kwargs = dict(epsabs=QUAD_ABS_TARGET, epsrel=1e-11, limit=QUAD_PANEL_BUDGET)
        if points is not None and math.isfinite(a) and math.isfinite(b):
            pts = sorted(p for p in points if a < p < b)
            if pts:
                kwargs["points"] = pts
        val, err = integrate.quad(fn, a, b, **kwargs)
    if err > max(QUAD_ABS_TARGET, QUAD_REL_TARGET * abs(val)):
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} misses targets for value {val:.6e}"
        )
    return val


def _require_logpdf(model: CgfModel):
    if model.logpdf is None:
        raise InvalidParameterError(f"{model.name} carries no density; oracle unusable")
    return model.logpdf


def _shift(model: CgfModel, a: float, b: float, theta: float) -> float:
    """Exponent shift c with sup_(a,b) [theta*x] <= c, making
    exp(theta*x - c) * f0(x) overflow-safe on the window."""
    if theta == 0.0:
        return 0.0
    if theta > 0:
        if math.isfinite(b):
            return theta * b
        if model.strip.contains(theta):
            # integral over any window is bounded by M0(theta)
            return model.k(theta)
        raise QuadratureError(
            f"tilted integral over ({a}, {b}) diverges at theta={theta} for {model.name}"
        )
    if math.isfinite(a):
        return theta * a
    if model.strip.contains(theta):
        return model.k(theta)
    raise QuadratureError(
        f"tilted integral over ({a}, {b}) diverges at theta={theta} for {model.name}"
    )


def _tilted_moments(model: CgfModel, a: float, b: float, theta: float, orders=(0, 1, 2)):
    """Quadrature moments m_r = int_a^b x^r exp(theta*x - c) f0(x) dx.

    Returns (c, {r: m_r}).  The shift c keeps the integrand bounded by ~1.
    """
    logpdf = _require_logpdf(model)
    c = _shift(model, a, b, theta)

    out = {}
    for r in orders:
        if r == 0:
            fn = lambda x: math.exp(theta * x - c + logpdf(x))
        else:
            fn = lambda x, _r=r: x**_r * math.exp(theta * x - c + logpdf(x))
        out[r] = _quad(fn, a, b)
    return c, out


@lru_cache(maxsize=512)
def _window_log_mass(model: CgfModel, window: Window) -> float:
    c, m = _tilted_moments(model, window.a, window.b, 0.0, orders=(0,))
    if m[0] <= 0.0:
        raise InvalidParameterError(f"window {window} carries no mass under {model.name}")
    return math.log(m[0])


def exact_truncated_logmgf(model: CgfModel, window: Window, theta: float) -> float:
    """log of the truncated MGF, i.e. the exact truncated CGF at theta."""
    if theta == 0.0:
        return 0.0
    c, m = _tilted_moments(model, window.a, window.b, theta, orders=(0,))
    if m[0] <= 0.0:
        raise QuadratureError(f"non-positive tilted mass on {window} at theta={theta}")
    return c + math.log(m[0]) - _window_log_mass(model, window)


def exact_truncated_mgf(model: CgfModel, window: Window, theta: float) -> float:
    """Truncated MGF by adaptive quadrature of the tilted density (exact oracle)."""
    return math.exp(exact_truncated_logmgf(model, window, theta))


class ExactTruncatedCgf:
    """Prepared quadrature-exact truncated-CGF evaluator for one window."""

    method = METHOD_EXACT

    def __init__(self, model: CgfModel, window: Window):
        self.model = model
        self.window = window
        lo = -math.inf if math.isfinite(window.a) else model.strip.lower
        hi = math.inf if math.isfinite(window.b) else model.strip.upper
        self.domain = (lo, hi)
        _window_log_mass(model, window)  # validate mass early

    def k(self, theta: float) -> float:
        return exact_truncated_logmgf(self.model, self.window, theta)

    def _moments(self, theta: float):
        c, m = _tilted_moments(self.model, self.window.a, self.window.b, theta)
        return m

    def k1(self, theta: float) -> float:
        m = self._moments(theta)
        return m[1] / m[0]

    def k2(self, theta: float) -> float:
        m = self._moments(theta)
        mu = m[1] / m[0]
        return m[2] / m[0] - mu * mu

    def eval(self, theta: float) -> TruncCgfEval:
        m = self._moments(theta)
        mu = m[1] / m[0]
        return TruncCgfEval(
            k=self.k(theta),
            k1=mu,
            k2=m[2] / m[0] - mu * mu,
            method=METHOD_EXACT,
            theta_domain=self.domain,
        )


@lru_cache(maxsize=256)
def exact_truncated_cgf_evaluator(model: CgfModel, window: Window) -> ExactTruncatedCgf:
    return ExactTruncatedCgf(model, window)


def exact_truncated_cgf(model: CgfModel, window: Window, theta: float) -> TruncCgfEval:
    return exact_truncated_cgf_evaluator(model, window).eval(theta)


def exact_log_xi(model: CgfModel, theta: float, y: float, branch: int) -> float:
    """log of the one-sided exponential moment over (-inf, y) (branch 1) or
    (y, inf) (branch 2)."""
    if branch == 1:
        if not theta > model.strip.lower:
            raise QuadratureError(f"branch 1 requires theta > {model.strip.lower}")
        a, b = -math.inf, y
    elif branch == 2:
        if not theta < model.strip.upper:
            raise QuadratureError(f"branch 2 requires theta < {model.strip.upper}")
        a, b = y, math.inf
    else:
        raise ValueError("branch must be 1 or 2")
    c, m = _tilted_moments(model, a, b, theta, orders=(0,))
    if m[0] <= 0.0:
        raise QuadratureError(f"one-sided moment vanished (theta={theta}, y={y})")
    return c + math.log(m[0])


def exact_xi(model: CgfModel, theta: float, y: float, branch: int) -> float:
    return math.exp(exact_log_xi(model, theta, y, branch))


def tilted_cdf(model: CgfModel, theta: float, x: float) -> float:
    """CDF of the theta-tilted distribution at x, by quadrature."""
    return math.exp(exact_log_xi(model, theta, x, 1) - model.k(theta))


def mc_sample_truncated(
    model: CgfModel, window: Window, n: int, seed: int
) -> np.ndarray:
    """n rejection-sampled draws of X | X in (a, b), deterministic per seed.

    The first batch has size exactly n, so a full-support window returns the
    same stream as n untruncated draws.
    """
    if model.sampler is None:
        raise InvalidParameterError(f"{model.name} carries no sampler")
    if n <= 0:
        raise InvalidParameterError("n must be positive")
    if model.cdf is not None:
        acc = float(model.cdf(window.b) - model.cdf(window.a))
        if acc < MIN_ACCEPTANCE:
            raise AcceptanceTooLowError(
                f"window {window} acceptance {acc:.2e} below {MIN_ACCEPTANCE}"
            )
    else:
        acc = 1.0
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    got = 0
    batch = n
    max_total = max(int(20 * n / max(acc, MIN_ACCEPTANCE)), 10 * n)
    drawn = 0
    while got < n:
        x = np.asarray(model.sampler(rng, batch))
        drawn += batch
        keep = x[(x > window.a) & (x < window.b)]
        out.append(keep)
        got += keep.size
        if drawn > max_total:
            raise AcceptanceTooLowError(
                f"rejection sampling on {window} too slow (acceptance ~{got/drawn:.2e})"
            )
        batch = min(max(int((n - got) / max(acc, 1e-3)) + 64, 64), 4 * n + 64)
    return np.concatenate(out)[:n]
