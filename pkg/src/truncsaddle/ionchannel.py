"""Two-state semi-Markov sojourns observed under time-interval omission.

Residences shorter than the detection threshold of their state are
invisible, so consecutive raw sojourns merge; the observed sojourn MGF is
a geometric-series composition of detected/undetected truncated MGFs.
Truncated MGFs come from a pluggable backend (quadrature-exact or any of
the saddlepoint approximations), and observed-sojourn densities follow by
first-order saddlepoint inversion of the composed CGF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .cgf import CgfModel
from .conv import conv_evaluator_for_window
from .errors import (
    InvalidParameterError,
    SeriesDivergenceError,
    TruncSaddleError,
)
from .hybrid import hybrid_evaluator
from .invert import saddlepoint_density
from .lr import lr_evaluator
from .oracle import exact_truncated_cgf_evaluator
from .solve import central_first_derivative, central_second_derivative
from .windows import Window

METHODS = ("EXACT", "CONV", "LR", "HYBRID")

OPEN, CLOSED = "open", "closed"


@dataclass(frozen=True)
class ChannelSpec:
    """Sojourn laws and detection thresholds of the two states."""

    open_model: CgfModel
    closed_model: CgfModel
    tau_o: float
    tau_c: float

    def __post_init__(self):
        if self.tau_o < 0 or self.tau_c < 0:
            raise InvalidParameterError("thresholds must be nonnegative")
        for m in (self.open_model, self.closed_model):
            if m.cdf is None:
                raise InvalidParameterError(f"{m.name} needs a CDF handle")

    def model(self, state: str) -> CgfModel:
        return self.open_model if state == OPEN else self.closed_model

    def tau(self, state: str) -> float:
        return self.tau_o if state == OPEN else self.tau_c


def _check_state(state: str):
    if state not in (OPEN, CLOSED):
        raise InvalidParameterError(f"state must be 'open' or 'closed', got {state!r}")


def _trunc_evaluator(model: CgfModel, window: Window, method: str, theta: float):
    if method == "EXACT":
        return exact_truncated_cgf_evaluator(model, window)
    if method == "LR":
        return lr_evaluator(model, window)
    if method == "HYBRID":
        return hybrid_evaluator(model, window)
    if method == "CONV":
        branch = 1 if theta >= 0.0 else 2
        return conv_evaluator_for_window(model, window, branch)
    raise InvalidParameterError(f"method must be one of {METHODS}")


def truncated_sojourn_mgfs(
    spec: ChannelSpec, state: str, theta: float, method: str = "EXACT"
) -> Tuple[float, float, float]:
    """(detected MGF part, undetected MGF part, detection probability).

    The detected part is pi * MGF of the sojourn truncated to (tau, inf),
    the undetected part (1 - pi) * MGF truncated to (0, tau]; at theta = 0
    they partition to pi and 1 - pi exactly.
    """
    _check_state(state)
    model = spec.model(state)
    tau = spec.tau(state)
    if tau == 0.0:
        return math.exp(model.k(theta)), 0.0, 1.0
    pi = 1.0 - float(model.cdf(tau))
    if theta == 0.0:
        return pi, 1.0 - pi, pi
    phi_d = pi * math.exp(
        _trunc_evaluator(model, Window(tau, math.inf), method, theta).k(theta)
    )
    phi_u = (1.0 - pi) * math.exp(
        _trunc_evaluator(model, Window(0.0, tau), method, theta).k(theta)
    )
    return phi_d, phi_u, pi


def observed_sojourn_mgf(
    spec: ChannelSpec, direction: str, theta: float, method: str = "EXACT"
) -> float:
    """MGF of a typical observed sojourn in `direction` under omission.

    Composes the detected part of the own-state sojourn with a geometric
    series over (undetected other-state blip, full own-state residence)
    pairs; raises SeriesDivergenceError where the series stops converging.
    """
    _check_state(direction)
    own, other = (OPEN, CLOSED) if direction == OPEN else (CLOSED, OPEN)
    own_model = spec.model(own)
    phi_d_own, _, pi_own = truncated_sojourn_mgfs(spec, own, theta, method)
    _, phi_u_other, pi_other = truncated_sojourn_mgfs(spec, other, theta, method)
    denom = 1.0 - phi_u_other * math.exp(own_model.k(theta))
    if denom <= 0.0:
        raise SeriesDivergenceError(
            f"observed-sojourn series diverges at theta={theta} (denominator {denom:.3e})"
        )
    return (phi_d_own / pi_own) * pi_other / denom


class ObservedCgf:
    """CGF evaluator of the observed sojourn, for saddlepoint inversion.

    Derivatives are central differences of log Phi-tilde; the upper domain
    edge is the smaller of the component strips' caps and the divergence
    point of the geometric series (located once by bisection).
    """

    def __init__(self, spec: ChannelSpec, direction: str, method: str = "EXACT"):
        _check_state(direction)
        self.spec = spec
        self.direction = direction
        self.method = method
        own = spec.model(direction)
        other = spec.model(CLOSED if direction == OPEN else OPEN)
        hi = own.strip.interior()[1]
        if method in ("LR",):
            hi = min(hi, other.strip.interior()[1])
        self.domain = (-math.inf, self._divergence_edge(hi))

    def _phi(self, theta: float) -> float:
        return observed_sojourn_mgf(self.spec, self.direction, theta, self.method)

    def _divergence_edge(self, hi: float) -> float:
        margin = 1e-9 * max(1.0, abs(hi)) if math.isfinite(hi) else 0.0
        probe = hi - margin if math.isfinite(hi) else 1.0

        def diverges(t):
            try:
                self._phi(t)
                return False
            except (SeriesDivergenceError, TruncSaddleError, OverflowError):
                return True

        if math.isinf(hi):
            while not diverges(probe) and probe < 1e12:
                probe *= 2.0
            if probe >= 1e12:
                return math.inf
        elif not diverges(probe):
            return hi
        lo, up = 0.0, probe
        for _ in range(200):
            mid = 0.5 * (lo + up)
            if diverges(mid):
                up = mid
            else:
                lo = mid
            if up - lo <= 1e-12 * max(1.0, abs(up)):
                break
        return lo

    def k(self, theta: float) -> float:
        if theta == 0.0:
            return 0.0
        lo, hi = self.domain
        if not lo < theta < hi:
            raise SeriesDivergenceError(f"theta={theta} outside observed-CGF domain")
        return math.log(self._phi(theta))

    def k1(self, theta: float) -> float:
        return central_first_derivative(self.k, theta, domain=self.domain)

    def k2(self, theta: float) -> float:
        val, _ = central_second_derivative(self.k, theta, domain=self.domain)
        return val


@dataclass
class DensityResult:
    grid: np.ndarray
    density: np.ndarray
    failures: List[Tuple[float, str]] = field(default_factory=list)


def observed_sojourn_density(
    spec: ChannelSpec,
    grid: Sequence[float],
    method: str = "EXACT",
    direction: str = OPEN,
) -> DensityResult:
    """First-order saddlepoint density of the observed sojourn on a grid.

    Failures are reported per grid point (NaN in the output array) rather
    than aborting the batch.
    """
    cgf = ObservedCgf(spec, direction, method)
    grid = np.asarray(list(grid), dtype=float)
    out = np.full(grid.shape, math.nan)
    failures: List[Tuple[float, str]] = []
    for i, x in enumerate(grid):
        try:
            out[i] = saddlepoint_density(cgf, float(x))
        except TruncSaddleError as exc:
            failures.append((float(x), f"{type(exc).__name__}: {exc}"))
    return DensityResult(grid=grid, density=out, failures=failures)


class _Pool:
    """Buffered draws from one sampler, consumed one at a time."""

    def __init__(self, sampler, rng, block=1 << 16):
        self.sampler = sampler
        self.rng = rng
        self.block = block
        self.buf = np.empty(0)
        self.idx = 0

    def draw(self) -> float:
        if self.idx >= self.buf.size:
            self.buf = np.asarray(self.sampler(self.rng, self.block))
            self.idx = 0
        v = self.buf[self.idx]
        self.idx += 1
        return float(v)


def simulate_observed_sojourns(
    spec: ChannelSpec, start: str, n: int, seed: int
) -> np.ndarray:
    """n observed sojourns of the `start` state from a merged alternating chain.

    The chain begins in `start`; a residence is detected iff it exceeds its
    state's threshold, and an undetected residence (plus the following
    same-state residence) accumulates into the current observed sojourn.
    The chain-initial observed sojourn is atypical (its first residence is
    unconditioned) and is discarded.  Deterministic per seed (Philox).
    """
    _check_state(start)
    if n <= 0:
        raise InvalidParameterError("n must be positive")
    for m in (spec.open_model, spec.closed_model):
        if m.sampler is None:
            raise InvalidParameterError(f"{m.name} carries no sampler")
    rng = np.random.Generator(np.random.Philox(seed))
    pools = {
        OPEN: _Pool(spec.open_model.sampler, rng),
        CLOSED: _Pool(spec.closed_model.sampler, rng),
    }
    taus = {OPEN: spec.tau_o, CLOSED: spec.tau_c}
    other = {OPEN: CLOSED, CLOSED: OPEN}

    out = np.empty(n)
    got = 0
    cur_state = start
    cur_time = pools[cur_state].draw()
    pending_skip = True
    while got < n:
        nxt = other[cur_state]
        t = pools[nxt].draw()
        if t > taus[nxt]:
            if cur_state == start:
                if pending_skip:
                    pending_skip = False
                else:
                    out[got] = cur_time
                    got += 1
            cur_state, cur_time = nxt, t
        else:
            cur_time += t + pools[cur_state].draw()
    return out
