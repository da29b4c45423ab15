"""Scalar root finding for the saddlepoint equations and step-controlled
finite differences used throughout the package."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .cgf import CgfModel
from .errors import (
    NoConvergenceError,
    NonFiniteStencilError,
    NoRootInBranchError,
    OutOfRangeError,
)

_EPS = 2.220446049250313e-16

RESIDUAL_TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class SaddleRoot:
    """Solved root with the bracket that contained it and iteration count."""

    root: float
    residual: float
    bracket: Tuple[float, float]
    iterations: int


def _newton_in_bracket(f, fprime, lo, hi, flo, fhi, ftol, max_iter=MAX_ITER):
    """Newton iteration kept inside a sign-change bracket, with bisection
    fallback whenever the Newton step leaves the bracket.

    Assumes f(lo) and f(hi) have opposite signs.  Returns (root, residual,
    iterations)."""
    if flo == 0.0:
        return lo, 0.0, 0
    if fhi == 0.0:
        return hi, 0.0, 0
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise NoRootInBranchError(f"no sign change on bracket ({lo}, {hi})")
    x = 0.5 * (lo + hi)
    fx = f(x)
    best_x, best_f = x, fx
    for it in range(1, max_iter + 1):
        if abs(fx) <= ftol:
            return x, fx, it
        # maintain the bracket
        if math.copysign(1.0, fx) == math.copysign(1.0, flo):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        width = hi - lo
        if width <= 4.0 * _EPS * max(1.0, abs(lo), abs(hi)):
            return best_x, best_f, it
        step_ok = False
        d = fprime(x)
        if math.isfinite(d) and d != 0.0:
            x_new = x - fx / d
            if lo < x_new < hi:
                x = x_new
                step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if not math.isfinite(fx):
            x = 0.5 * (lo + hi)
            fx = f(x)
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
    raise NoConvergenceError(
        f"root iteration exceeded {max_iter} iterations (best residual {best_f:.3e})"
    )


def solve_saddlepoint(model: CgfModel, y: float) -> SaddleRoot:
    """Solve K'(t) = y for t inside the convergence strip.

    K' is strictly increasing (K'' > 0), so the bracket search expands
    geometrically from 0 toward the relevant strip edge; steep families
    guarantee a sign change whenever y is attained.
    """
    lo_edge, hi_edge = model.strip.interior()
    f = lambda t: model.k1(t) - y
    fp = model.k2
    f0 = f(0.0)
    if f0 == 0.0:
        return SaddleRoot(0.0, 0.0, (0.0, 0.0), 0)
    if f0 < 0.0:
        # expand to the right
        a, fa = 0.0, f0
        b = None
        for m in range(1, 64):
            t = hi_edge - (hi_edge - 0.0) * 2.0**-m if math.isfinite(hi_edge) else float(2.0 ** m)
            if math.isfinite(hi_edge) and t >= hi_edge:
                break
            ft = f(t)
            if not math.isfinite(ft):
                break
            if ft >= 0.0:
                b, fb = t, ft
                break
            a, fa = t, ft
        if b is None:
            raise OutOfRangeError(f"level y={y} not attained by K' of {model.name}")
    else:
        b, fb = 0.0, f0
        a = None
        for m in range(1, 64):
            t = lo_edge + (0.0 - lo_edge) * 2.0**-m if math.isfinite(lo_edge) else -float(2.0 ** m)
            if math.isfinite(lo_edge) and t <= lo_edge:
                break
            ft = f(t)
            if not math.isfinite(ft):
                break
            if ft <= 0.0:
                a, fa = t, ft
                break
            b, fb = t, ft
        if a is None:
            raise OutOfRangeError(f"level y={y} not attained by K' of {model.name}")
    tol = RESIDUAL_TOL * max(1.0, abs(y))
    root, res, its = _newton_in_bracket(f, fp, a, b, fa, fb, tol)
    if abs(res) > 1e-10 * (1.0 + abs(y)):
        raise NoConvergenceError(
            f"saddlepoint residual {res:.3e} above tolerance for y={y} ({model.name})"
        )
    return SaddleRoot(root, res, (a, b), its)


def solve_convolution_saddlepoint(
    model: CgfModel, theta: float, y: float, branch: int
) -> SaddleRoot:
    """Solve K'(s) + 1/(theta - s) = y on the requested side of the pole.

    Branch 1 takes the root with s < theta, branch 2 the root with
    s > theta; in both cases s stays inside the strip.  The left-hand side
    is strictly increasing on each branch interval, so any sign change
    brackets the unique root.
    """
    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    lo_edge, hi_edge = model.strip.interior()
    if branch == 1 and not theta > model.strip.lower:
        raise NoRootInBranchError(
            f"branch 1 requires theta > {model.strip.lower}, got {theta}"
        )
    if branch == 2 and not theta < model.strip.upper:
        raise NoRootInBranchError(
            f"branch 2 requires theta < {model.strip.upper}, got {theta}"
        )

    def f(s):
        return model.k1(s) + 1.0 / (theta - s) - y

    def fp(s):
        return model.k2(s) + 1.0 / (theta - s) ** 2

    delta0 = 1e-3 * (1.0 + abs(theta))
    if branch == 1:
        sup = min(theta, hi_edge)
        # approach the pole / strip edge from the left until f > 0
        start = sup - delta0
        if start <= lo_edge:
            start = 0.5 * (lo_edge + sup)
        hi = None
        for m in range(0, 80):
            s = sup - (sup - start) * 2.0**-m
            if not s < sup:
                break
            fs = f(s)
            if math.isfinite(fs) and fs > 0.0:
                hi, fhi = s, fs
                break
        if hi is None:
            raise NoRootInBranchError(
                f"no positive value of the branch-1 equation near s={sup} "
                f"(theta={theta}, y={y}, {model.name})"
            )
        # walk left until f < 0
        lo = None
        for m in range(0, 80):
            if math.isfinite(lo_edge):
                s = lo_edge + (start - lo_edge) * 2.0**-m
                if not s > lo_edge:
                    break
            else:
                s = start - delta0 * (2.0**m - 1.0) if m else start
            if s >= hi:
                continue
            fs = f(s)
            if not math.isfinite(fs):
                break
            if fs <= 0.0:
                lo, flo = s, fs
                break
        if lo is None:
            raise NoRootInBranchError(
                f"branch-1 equation never negative left of the pole "
                f"(theta={theta}, y={y}, {model.name})"
            )
    else:
        inf_ = max(theta, lo_edge)
        start = inf_ + delta0
        if start >= hi_edge:
            start = 0.5 * (inf_ + hi_edge)
        lo = None
        for m in range(0, 80):
            s = inf_ + (start - inf_) * 2.0**-m
            if not s > inf_:
                break
            fs = f(s)
            if math.isfinite(fs) and fs < 0.0:
                lo, flo = s, fs
                break
        if lo is None:
            raise NoRootInBranchError(
                f"no negative value of the branch-2 equation near s={inf_} "
                f"(theta={theta}, y={y}, {model.name})"
            )
        hi = None
        for m in range(0, 80):
            if math.isfinite(hi_edge):
                s = hi_edge - (hi_edge - start) * 2.0**-m
                if not s < hi_edge:
                    break
            else:
                s = start + delta0 * (2.0**m - 1.0) if m else start
            if s <= lo:
                continue
            fs = f(s)
            if not math.isfinite(fs):
                break
            if fs >= 0.0:
                hi, fhi = s, fs
                break
        if hi is None:
            raise NoRootInBranchError(
                f"branch-2 equation never positive right of the pole "
                f"(theta={theta}, y={y}, {model.name})"
            )

    tol = RESIDUAL_TOL * max(1.0, abs(y))
    root, res, its = _newton_in_bracket(f, fp, lo, hi, flo, fhi, tol)
    if abs(res) > 1e-10 * (1.0 + abs(y)):
        raise NoConvergenceError(
            f"convolution saddlepoint residual {res:.3e} above tolerance "
            f"(theta={theta}, y={y}, branch={branch})"
        )
    if branch == 1 and not root < theta:
        raise NoRootInBranchError(f"branch-1 root {root} not below theta={theta}")
    if branch == 2 and not root > theta:
        raise NoRootInBranchError(f"branch-2 root {root} not above theta={theta}")
    return SaddleRoot(root, res, (lo, hi), its)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def _clip_step(x, h, domain):
    if domain is None:
        return h
    lo, hi = domain
    room = min(
        (hi - x) if math.isfinite(hi) else math.inf,
        (x - lo) if math.isfinite(lo) else math.inf,
    )
    if room <= 0.0:
        raise NonFiniteStencilError(f"point {x} has no room inside domain {domain}")
    return min(h, 0.5 * room)


def central_first_derivative(
    f: Callable[[float], float],
    x: float,
    h: Optional[float] = None,
    scale: float = 1.0,
    domain: Optional[Tuple[float, float]] = None,
) -> float:
    """Central difference (f(x+h) - f(x-h)) / 2h with a truncation/round-off
    balanced step; `scale` is the magnitude of f near x (raises the noise
    floor of the balance) and `domain` clips the stencil."""
    if h is None:
        h = (_EPS * max(1.0, scale)) ** (1.0 / 3.0) * max(1.0, abs(x))
    h = _clip_step(x, h, domain)
    fp, fm = f(x + h), f(x - h)
    if not (math.isfinite(fp) and math.isfinite(fm)):
        raise NonFiniteStencilError(f"non-finite stencil at {x}+/-{h}")
    return (fp - fm) / (2.0 * h)


def central_second_derivative(
    f: Callable[[float], float],
    x: float,
    h: Optional[float] = None,
    scale: float = 1.0,
    domain: Optional[Tuple[float, float]] = None,
) -> Tuple[float, float]:
    """Second central difference of f at x, paired with a step-halving error
    estimate.

    The default step balances the O(h^2) truncation error against the
    rounding noise eps*scale/h^2 of the three-point stencil, giving
    h ~ (eps*scale)^(1/4) * max(1, |x|).  Returns (value, error_estimate).
    """
    if h is None:
        h = (_EPS * max(1.0, scale)) ** 0.25 * max(1.0, abs(x))
    h = _clip_step(x, h, domain)

    def stencil(step):
        fp, f0, fm = f(x + step), f(x), f(x - step)
        if not (math.isfinite(fp) and math.isfinite(f0) and math.isfinite(fm)):
            raise NonFiniteStencilError(f"non-finite stencil at {x}+/-{step}")
        return (fp - 2.0 * f0 + fm) / (step * step)

    d_h = stencil(h)
    d_h2 = stencil(0.5 * h)
    return d_h, abs(d_h - d_h2)
