"""CGF models: the evaluator contract plus a catalog of built-in families.

Each family supplies the cumulant generating function and its first four
derivatives in closed form, the open convergence strip of the MGF, and
(for oracle use) density/CDF handles and a seeded sampler.
"""

from __future__ import annotations

import math
import shlex
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special, stats

from .errors import InvalidParameterError, OutsideStripError, UnknownFamilyError

# Evaluation keeps this absolute margin inside the open strip to avoid
# overflow at the edges.
STRIP_MARGIN = 1e-12

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ConvergenceStrip:
    """Open interval of MGF convergence; must contain zero."""

    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise InvalidParameterError("strip endpoints must not be NaN")
        if not (self.lower < 0.0 < self.upper):
            raise InvalidParameterError(
                f"strip must be an open neighborhood of 0, got ({self.lower}, {self.upper})"
            )

    def interior(self, margin: float = STRIP_MARGIN) -> Tuple[float, float]:
        lo = self.lower + margin if math.isfinite(self.lower) else -math.inf
        hi = self.upper - margin if math.isfinite(self.upper) else math.inf
        return lo, hi

    def contains(self, theta: float, margin: float = STRIP_MARGIN) -> bool:
        lo, hi = self.interior(margin)
        return lo < theta < hi


@dataclass(frozen=True)
class CgfEval:
    """CGF value and derivatives at one point; orders above max_order are None."""

    k: float
    k1: float
    k2: float
    k3: Optional[float] = None
    k4: Optional[float] = None


@dataclass(frozen=True, eq=False)
class CgfModel:
    """Immutable bundle of analytic CGF derivatives and distribution handles.

    `derivs(theta)` returns the tuple (k, k1, k2, k3, k4) and is defined
    exactly on the open strip.  `density`/`logpdf`/`cdf` are optional but
    required by the quadrature oracle; `sampler(rng, size)` draws from the
    untruncated law.  Instances are stateless and safe to share.
    """

    name: str
    strip: ConvergenceStrip
    derivs: Callable[[float], Tuple[float, float, float, float, float]]
    density: Optional[Callable[[float], float]] = None
    logpdf: Optional[Callable[[float], float]] = None
    cdf: Optional[Callable[[float], float]] = None
    sampler: Optional[Callable[..., np.ndarray]] = None

    def _check(self, theta: float):
        if not self.strip.contains(theta):
            raise OutsideStripError(
                f"theta={theta!r} outside convergence strip "
                f"({self.strip.lower}, {self.strip.upper}) of {self.name}"
            )

    def k(self, theta: float) -> float:
        self._check(theta)
        return self.derivs(theta)[0]

    def k1(self, theta: float) -> float:
        self._check(theta)
        return self.derivs(theta)[1]

    def k2(self, theta: float) -> float:
        self._check(theta)
        return self.derivs(theta)[2]

    def k3(self, theta: float) -> float:
        self._check(theta)
        return self.derivs(theta)[3]

    def k4(self, theta: float) -> float:
        self._check(theta)
        return self.derivs(theta)[4]

    def __repr__(self):
        return f"CgfModel({self.name})"


def eval_cgf(model: CgfModel, theta: float, max_order: int = 4) -> CgfEval:
    """Evaluate the model CGF and derivatives up to `max_order` at `theta`.

    Raises OutsideStripError when `theta` is not strictly inside the strip
    (with the evaluation margin applied at finite endpoints).
    """
    if not 0 <= max_order <= 4:
        raise InvalidParameterError("max_order must be in 0..4")
    model._check(theta)
    k, k1, k2, k3, k4 = model.derivs(theta)
    return CgfEval(
        k=k,
        k1=k1 if max_order >= 1 else None,
        k2=k2 if max_order >= 2 else None,
        k3=k3 if max_order >= 3 else None,
        k4=k4 if max_order >= 4 else None,
    )


# ---------------------------------------------------------------------------
# family builders
# ---------------------------------------------------------------------------


def _normal(loc=0.0, scale=1.0):
    loc, scale = float(loc), float(scale)
    if not scale > 0:
        raise InvalidParameterError("normal scale must be > 0")
    v = scale * scale
    dist = stats.norm(loc=loc, scale=scale)

    def derivs(t):
        return (loc * t + 0.5 * v * t * t, loc + v * t, v, 0.0, 0.0)

    return CgfModel(
        name=f"normal(loc={loc}, scale={scale})",
        strip=ConvergenceStrip(-math.inf, math.inf),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.normal(loc, scale, size),
    )


def _exponential(rate=1.0):
    rate = float(rate)
    if not rate > 0:
        raise InvalidParameterError("exponential rate must be > 0")
    dist = stats.expon(scale=1.0 / rate)

    def derivs(t):
        d = rate - t
        return (
            math.log(rate) - math.log(d),
            1.0 / d,
            1.0 / d**2,
            2.0 / d**3,
            6.0 / d**4,
        )

    return CgfModel(
        name=f"exponential(rate={rate})",
        strip=ConvergenceStrip(-math.inf, rate),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.exponential(1.0 / rate, size),
    )


def _gamma(shape, rate=1.0):
    shape, rate = float(shape), float(rate)
    if not shape > 0 or not rate > 0:
        raise InvalidParameterError("gamma shape and rate must be > 0")
    dist = stats.gamma(a=shape, scale=1.0 / rate)

    def derivs(t):
        d = rate - t
        return (
            -shape * (math.log(d) - math.log(rate)),
            shape / d,
            shape / d**2,
            2.0 * shape / d**3,
            6.0 * shape / d**4,
        )

    return CgfModel(
        name=f"gamma(shape={shape}, rate={rate})",
        strip=ConvergenceStrip(-math.inf, rate),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.gamma(shape, 1.0 / rate, size),
    )


def _gumbel(loc=0.0, scale=1.0):
    # Max-Gumbel with CDF exp(-exp(-(x-loc)/scale)); MGF loc*t + lgamma(1 - scale*t).
    loc, scale = float(loc), float(scale)
    if not scale > 0:
        raise InvalidParameterError("gumbel scale must be > 0")
    dist = stats.gumbel_r(loc=loc, scale=scale)

    def derivs(t):
        x = 1.0 - scale * t
        return (
            loc * t + special.gammaln(x),
            loc - scale * special.polygamma(0, x),
            scale**2 * special.polygamma(1, x),
            -(scale**3) * special.polygamma(2, x),
            scale**4 * special.polygamma(3, x),
        )

    return CgfModel(
        name=f"gumbel(loc={loc}, scale={scale})",
        strip=ConvergenceStrip(-math.inf, 1.0 / scale),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.gumbel(loc, scale, size),
    )


def _logistic(loc=0.0, scale=1.0):
    # Standard logistic MGF is Gamma(1-t)Gamma(1+t); strip (-1/scale, 1/scale).
    loc, scale = float(loc), float(scale)
    if not scale > 0:
        raise InvalidParameterError("logistic scale must be > 0")
    dist = stats.logistic(loc=loc, scale=scale)

    def derivs(t):
        p = 1.0 + scale * t
        m = 1.0 - scale * t
        return (
            loc * t + special.gammaln(m) + special.gammaln(p),
            loc + scale * (special.polygamma(0, p) - special.polygamma(0, m)),
            scale**2 * (special.polygamma(1, p) + special.polygamma(1, m)),
            scale**3 * (special.polygamma(2, p) - special.polygamma(2, m)),
            scale**4 * (special.polygamma(3, p) + special.polygamma(3, m)),
        )

    return CgfModel(
        name=f"logistic(loc={loc}, scale={scale})",
        strip=ConvergenceStrip(-1.0 / scale, 1.0 / scale),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.logistic(loc, scale, size),
    )


def _inverse_gaussian(mean=1.0, shape=1.0):
    mean, shape = float(mean), float(shape)
    if not mean > 0 or not shape > 0:
        raise InvalidParameterError("inverse gaussian mean and shape must be > 0")
    dist = stats.invgauss(mu=mean / shape, scale=shape)
    beta = shape / (2.0 * mean * mean)

    def derivs(t):
        r = math.sqrt(1.0 - t / beta)
        return (
            (shape / mean) * (1.0 - r),
            mean / r,
            mean**3 / (shape * r**3),
            3.0 * mean**5 / (shape**2 * r**5),
            15.0 * mean**7 / (shape**3 * r**7),
        )

    return CgfModel(
        name=f"inverse_gaussian(mean={mean}, shape={shape})",
        strip=ConvergenceStrip(-math.inf, beta),
        derivs=derivs,
        density=dist.pdf,
        logpdf=dist.logpdf,
        cdf=dist.cdf,
        sampler=lambda rng, size: rng.wald(mean, shape, size),
    )


_FAMILIES = {
    "normal": _normal,
    "gaussian": _normal,
    "exponential": _exponential,
    "gamma": _gamma,
    "gumbel": _gumbel,
    "logistic": _logistic,
    "inverse_gaussian": _inverse_gaussian,
    "invgauss": _inverse_gaussian,
}


def make_model(family: str, **params) -> CgfModel:
    """Build a CgfModel for a named family with keyword parameters."""
    try:
        builder = _FAMILIES[family.lower()]
    except KeyError:
        raise UnknownFamilyError(
            f"unknown family {family!r}; known: {sorted(set(_FAMILIES))}"
        ) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameters for {family!r}: {exc}") from None


def model_from_text(text: str) -> CgfModel:
    """Parse a key=value model spec such as ``family=gamma shape=2.0 rate=1.0``."""
    fields = {}
    for token in shlex.split(text):
        if "=" not in token:
            raise InvalidParameterError(f"expected key=value token, got {token!r}")
        key, value = token.split("=", 1)
        fields[key.strip()] = value.strip()
    family = fields.pop("family", None)
    if family is None:
        raise InvalidParameterError("model spec must contain family=<name>")
    params = {}
    for key, value in fields.items():
        try:
            params[key] = float(value)
        except ValueError:
            raise InvalidParameterError(f"parameter {key}={value!r} is not numeric") from None
    return make_model(family, **params)
