"""Small signed log-space helpers shared by the approximation modules."""

from __future__ import annotations

import math

_LOG_2PI = math.log(2.0 * math.pi)


def log_normal_pdf(w: float) -> float:
    return -0.5 * w * w - 0.5 * _LOG_2PI


def logsub(la: float, lb: float) -> float:
    """log(exp(la) - exp(lb)) for la > lb; -inf when lb == -inf and la == -inf."""
    if lb == -math.inf:
        return la
    if not la > lb:
        raise ValueError(f"logsub requires la > lb, got {la} <= {lb}")
    return la + math.log1p(-math.exp(lb - la))


def signed_logsum(terms):
    """Sum of signed log-magnitude terms [(sign, log|x|), ...].

    Returns (sign, log|sum|); sign 0 with log -inf for an exact zero.
    """
    pos = [l for s, l in terms if s > 0 and l > -math.inf]
    neg = [l for s, l in terms if s < 0 and l > -math.inf]

    def lse(vals):
        if not vals:
            return -math.inf
        m = max(vals)
        return m + math.log(sum(math.exp(v - m) for v in vals))

    lp, ln = lse(pos), lse(neg)
    if ln == -math.inf:
        return (1 if lp > -math.inf else 0), lp
    if lp == -math.inf:
        return -1, ln
    if lp > ln:
        return 1, logsub(lp, ln)
    if ln > lp:
        return -1, logsub(ln, lp)
    return 0, -math.inf
