"""Batch command-line front end emitting CSV tables for curves, Dirichlet
rectangle probabilities, ion-channel runs, and strip-edge diagnostics."""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from typing import List, Optional

import numpy as np

from . import __version__
from .cgf import CgfModel, make_model, model_from_text
from .conv import conv_evaluator_for_window
from .dirichlet import DirichletSpec, dirichlet_rectangle_probability
from .errors import TruncSaddleError
from .hybrid import hybrid_evaluator, tail_diagnostics
from .ionchannel import (
    ChannelSpec,
    ObservedCgf,
    observed_sojourn_density,
    simulate_observed_sojourns,
)
from .lr import lr_evaluator
from .oracle import (
    exact_log_xi,
    exact_truncated_cgf_evaluator,
    exact_truncated_logmgf,
    tilted_cdf,
)
from .windows import Window

FMT = "{:.11e}"  # 12 significant digits


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return FMT.format(float(x))


def _parse_window(text: str) -> Window:
    parts = text.split(",")
    if len(parts) != 2:
        raise TruncSaddleError(f"window must be 'a,b', got {text!r}")
    vals = []
    for p in parts:
        p = p.strip().lower()
        if p in ("-inf", "-infinity"):
            vals.append(-math.inf)
        elif p in ("inf", "+inf", "infinity"):
            vals.append(math.inf)
        else:
            vals.append(float(p))
    return Window(vals[0], vals[1])


def _parse_kv_line(line: str) -> dict:
    out = {}
    for token in line.split():
        if "=" not in token:
            raise TruncSaddleError(f"expected key=value token, got {token!r}")
        k, v = token.split("=", 1)
        out[k] = v
    return out


class _Output:
    """Writes CSV to a temp file and renames on success, so failures leave
    no partial outputs behind."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self.tmp = None
        self.handle = None

    def __enter__(self):
        if self.path is None:
            self.handle = sys.stdout
        else:
            d = os.path.dirname(os.path.abspath(self.path))
            fd, self.tmp = tempfile.mkstemp(prefix=".truncsaddle-", dir=d)
            self.handle = os.fdopen(fd, "w", newline="")
        return self.handle

    def __exit__(self, exc_type, exc, tb):
        if self.path is None:
            return False
        self.handle.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            os.unlink(self.tmp)
        return False


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

CURVE_METHODS = ("lr", "conv1", "conv2", "hybrid")


def _curve_evaluators(model: CgfModel, window: Window, order: Optional[int]):
    evs = {}
    evs["lr"] = lambda: lr_evaluator(model, window)
    evs["conv1"] = lambda: conv_evaluator_for_window(model, window, 1, order)
    evs["conv2"] = lambda: conv_evaluator_for_window(model, window, 2, order)
    evs["hybrid"] = lambda: hybrid_evaluator(model, window)
    return evs


def _cmd_curve(args) -> int:
    model = model_from_text(args.model)
    window = _parse_window(args.window)
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_steps)
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in CURVE_METHODS + ("exact",)]
    if bad:
        raise TruncSaddleError(f"unknown methods {bad}; known: exact,{','.join(CURVE_METHODS)}")
    want = [m for m in CURVE_METHODS if m in methods]
    want_exact = "exact" in methods
    makers = _curve_evaluators(model, window, args.order)

    header = ["theta"]
    if want_exact:
        header.append("exact")
    header += want + [f"err_{m}" for m in want if want_exact]

    with _Output(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for theta in thetas:
            theta = float(theta)
            row = [_fmt(theta)]
            exact_val = None
            if want_exact:
                try:
                    exact_val = exact_truncated_logmgf(model, window, theta)
                except TruncSaddleError:
                    exact_val = None
                row.append(_fmt(exact_val))
            vals = {}
            for m in want:
                try:
                    vals[m] = makers[m]().k(theta)
                except TruncSaddleError:
                    vals[m] = None
                row.append(_fmt(vals[m]))
            if want_exact:
                for m in want:
                    err = (
                        abs(vals[m] - exact_val)
                        if vals[m] is not None and exact_val is not None
                        else None
                    )
                    row.append(_fmt(err))
            writer.writerow(row)
    return 0


# ---------------------------------------------------------------------------
# dirichlet
# ---------------------------------------------------------------------------


def _cmd_dirichlet(args) -> int:
    records = []
    with open(args.spec) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            records.append(_parse_kv_line(line))
    rows = []
    for rec in records:
        gamma = tuple(float(x) for x in rec["gamma"].split(","))
        a = tuple(float(x) for x in rec["a"].split(","))
        b = tuple(float(x) for x in rec["b"].split(","))
        methods = rec.get("methods", rec.get("method", "CONV")).split(",")
        order = int(rec.get("order", 2))
        if len(gamma) > 3 and args.seed is None:
            raise TruncSaddleError(
                "records with n > 3 need --seed for the Monte-Carlo exact reference"
            )
        for method in methods:
            spec = DirichletSpec(gamma=gamma, a=a, b=b, method=method, conv_order=order)
            res = dirichlet_rectangle_probability(spec, seed=args.seed)
            rows.append(
                [
                    str(spec.n),
                    ";".join(repr(g) for g in gamma),
                    ";".join(repr(x) for x in a),
                    ";".join(repr(x) for x in b),
                    spec.method,
                    _fmt(res.probability),
                    _fmt(res.saddlepoint),
                    _fmt(res.mean),
                    _fmt(res.exact),
                ]
            )
    with _Output(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "gamma", "a", "b", "method", "probability", "saddlepoint", "mean", "exact_if_available"]
        )
        writer.writerows(rows)
    return 0


# ---------------------------------------------------------------------------
# ionchannel
# ---------------------------------------------------------------------------


def _model_from_record(rec: dict, prefix: str) -> CgfModel:
    family = rec.get(f"{prefix}_family")
    if family is None:
        raise TruncSaddleError(f"spec record needs {prefix}_family")
    params = {}
    for key, val in rec.items():
        if key.startswith(f"{prefix}_") and key != f"{prefix}_family":
            params[key[len(prefix) + 1 :]] = float(val)
    return make_model(family, **params)


def _cmd_ionchannel(args) -> int:
    with open(args.spec) as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.strip().startswith("#")]
    if len(lines) != 1:
        raise TruncSaddleError("ionchannel spec file must contain exactly one record")
    rec = _parse_kv_line(lines[0])
    spec = ChannelSpec(
        open_model=_model_from_record(rec, "open"),
        closed_model=_model_from_record(rec, "closed"),
        tau_o=float(rec["tau_o"]),
        tau_c=float(rec["tau_c"]),
    )
    direction = rec.get("direction", "open")
    methods = rec.get("methods", "EXACT").split(",")
    grid = np.linspace(
        float(rec["grid_min"]), float(rec["grid_max"]), int(rec.get("grid_steps", 25))
    )
    sim_n = int(rec.get("sim_n", "0"))
    if sim_n > 0 and args.seed is None:
        raise TruncSaddleError("simulation requested: --seed is mandatory")

    densities = {}
    for method in methods:
        densities[method] = observed_sojourn_density(
            spec, grid, method=method, direction=direction
        ).density

    hist = None
    if sim_n > 0:
        draws = simulate_observed_sojourns(spec, direction, sim_n, args.seed)
        edges = np.empty(grid.size + 1)
        mids = 0.5 * (grid[1:] + grid[:-1])
        edges[1:-1] = mids
        edges[0] = grid[0] - (mids[0] - grid[0])
        edges[-1] = grid[-1] + (grid[-1] - mids[-1])
        counts, _ = np.histogram(draws, bins=edges)
        hist = counts / (sim_n * np.diff(edges))

    with _Output(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["x"] + [f"density_{m}" for m in methods] + (["sim_hist"] if hist is not None else [])
        )
        for i, x in enumerate(grid):
            row = [_fmt(x)] + [_fmt(densities[m][i]) for m in methods]
            if hist is not None:
                row.append(_fmt(hist[i]))
            writer.writerow(row)

    for method in methods:
        cgf = ObservedCgf(spec, direction, method)
        mean = cgf.k1(0.0)
        var = cgf.k2(0.0)
        print(f"summary method={method} mean={_fmt(mean)} variance={_fmt(var)}")
    if sim_n > 0:
        print(
            f"summary method=SIMULATION mean={_fmt(float(np.mean(draws)))} "
            f"variance={_fmt(float(np.var(draws)))}"
        )
    return 0


# ---------------------------------------------------------------------------
# diagnose / selftest
# ---------------------------------------------------------------------------


def _cmd_diagnose(args) -> int:
    model = model_from_text(args.model)
    diag = tail_diagnostics(model, args.side)
    with _Output(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["s", "curvature_over_slope_sq", "curvature_over_slope", "fourth_over_slope_cubed", "max_deriv_2_to_4"]
        )
        for i, s in enumerate(diag.s_values):
            writer.writerow(
                [
                    _fmt(s),
                    _fmt(diag.ratio_k2_over_k1sq[i]),
                    _fmt(diag.ratio_k2_over_k1[i]),
                    _fmt(diag.ratio_k4_over_k1cu[i]),
                    _fmt(diag.deriv_bound[i]),
                ]
            )
    for name, verdict in diag.verdicts().items():
        print(f"verdict {name}={'PASS' if verdict else 'FAIL'}")
    return 0


def _selftest_cases():
    cases = []
    normal = make_model("normal", loc=0.0, scale=1.0)
    gam = make_model("gamma", shape=2.0, rate=1.0)
    gum = make_model("gumbel", loc=0.0, scale=1.0)
    for model, thetas, ys in (
        (normal, (-2.0, -0.5, 0.3, 0.7, 1.5), (-0.5, 0.5, 1.5)),
        (gam, (-2.0, -0.5, 0.3, 0.7, 0.9), (0.3, 0.8, 1.7)),
        (gum, (-2.0, -0.5, 0.3, 0.7, 0.9), (-0.5, 0.5, 1.5)),
    ):
        cases.append((model, thetas, ys))
    return cases


def _cmd_selftest(args) -> int:
    failures = 0
    for model, thetas, ys in _selftest_cases():
        for theta in thetas:
            for y in ys:
                x1 = math.exp(exact_log_xi(model, theta, y, 1))
                x2 = math.exp(exact_log_xi(model, theta, y, 2))
                m0 = math.exp(model.k(theta))
                rel = abs(x1 + x2 - m0) / m0
                ok = rel < 1e-8
                failures += not ok
                print(
                    f"{'PASS' if ok else 'FAIL'} one-sided-moment-partition "
                    f"model={model.name} theta={theta} y={y} rel={rel:.2e}"
                )
        lo, hi = ys[0], ys[-1]
        window = Window(lo, hi)
        mass = model.cdf(hi) - model.cdf(lo)
        for theta in thetas:
            exact = math.exp(exact_truncated_logmgf(model, window, theta))
            via_xi = (
                math.exp(exact_log_xi(model, theta, lo, 2))
                - math.exp(exact_log_xi(model, theta, hi, 2))
            ) / mass
            rel = abs(via_xi - exact) / exact
            ok = rel < 1e-8
            failures += not ok
            print(
                f"{'PASS' if ok else 'FAIL'} upper-moment-difference-representation "
                f"model={model.name} theta={theta} rel={rel:.2e}"
            )
            tilted = (
                math.exp(model.k(theta))
                * (tilted_cdf(model, theta, hi) - tilted_cdf(model, theta, lo))
                / mass
            )
            rel = abs(tilted - exact) / exact
            ok = rel < 1e-8
            failures += not ok
            print(
                f"{'PASS' if ok else 'FAIL'} tilted-representation "
                f"model={model.name} theta={theta} rel={rel:.2e}"
            )
    print(f"selftest {'PASS' if failures == 0 else 'FAIL'} ({failures} failures)")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="truncsaddle",
        description="Truncated-CGF approximations, Dirichlet rectangle "
        "probabilities, and ion-channel sojourn distributions.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve", help="truncated-CGF curves and errors over a theta grid")
    c.add_argument("--model", required=True, help="e.g. 'family=normal loc=0 scale=1'")
    c.add_argument("--window", required=True, help="a,b with -inf/inf allowed")
    c.add_argument("--theta-min", type=float, required=True)
    c.add_argument("--theta-max", type=float, required=True)
    c.add_argument("--theta-steps", type=int, default=101)
    c.add_argument("--methods", default="exact,lr,conv1,conv2,hybrid")
    c.add_argument("--order", type=int, default=None, help="convolution order override")
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_curve)

    d = sub.add_parser("dirichlet", help="rectangle probabilities from a spec file")
    d.add_argument("--spec", required=True)
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--out", default=None)
    d.set_defaults(func=_cmd_dirichlet)

    i = sub.add_parser("ionchannel", help="observed-sojourn densities from a spec file")
    i.add_argument("--spec", required=True)
    i.add_argument("--seed", type=int, default=None)
    i.add_argument("--out", default=None)
    i.set_defaults(func=_cmd_ionchannel)

    g = sub.add_parser("diagnose", help="strip-edge ratio-condition report")
    g.add_argument("--model", required=True)
    g.add_argument("--side", choices=("left", "right"), required=True)
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_diagnose)

    s = sub.add_parser("selftest", help="run the quadrature-identity suite")
    s.set_defaults(func=_cmd_selftest)
    return p


def run_cli(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TruncSaddleError as exc:
        print(
            f'error command={args.command} type={type(exc).__name__} message="{exc}"',
            file=sys.stderr,
        )
        return 1
    except OSError as exc:
        print(f'error command={args.command} type=OSError message="{exc}"', file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
