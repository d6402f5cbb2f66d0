"""terndio command line: one entry point for searches, weights, exponential
sums, near-point counters and sweeps.

Exit codes: 0 success, 2 parameter/validation error, 3 budget or
certification refusal.  Every run emits a RunManifest (JSON): next to --out
as <out>.manifest.json, or embedded under "manifest" in the stdout payload
when no file output was requested.  File formats are documented in
docs/formats.md.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import BudgetError, CertificationError, ValidationError
from . import experiments as xp
from . import expsums as es
from . import nearpoints as npt
from . import weights as wt
from .forms import BoxRegion, FormParams, min_search_brute, min_search_fast
from .serialize import dumps_json, fmt17, sha256_file
from .zeta import zeta_half_line


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None
    version: str
    wall_time_s: float
    outputs: dict  # path -> sha256


def _resolved_params(args: argparse.Namespace) -> dict:
    skip = {"cmd", "func"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip or callable(val):
            continue
        out[key] = val
    return out


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _finish(args, payload: dict | None, file_outputs: list, t0: float,
            seed: int | None = None) -> int:
    manifest = RunManifest(
        subcommand=args.cmd, parameters=_resolved_params(args), seed=seed,
        version=__version__, wall_time_s=time.perf_counter() - t0,
        outputs={p: sha256_file(p) for p in file_outputs})
    out = getattr(args, "out", None)
    if payload is not None and out:
        _write_text(out, dumps_json(payload, indent=2) + "\n")
        manifest.outputs[out] = sha256_file(out)
        file_outputs = file_outputs + [out]
    if file_outputs or out:
        anchor = out or file_outputs[0]
        manifest_path = getattr(args, "manifest", None) or anchor + ".manifest.json"
        _write_text(manifest_path, dumps_json(asdict(manifest), indent=2) + "\n")
        if payload is not None and not out:
            print(dumps_json(payload, indent=2))
    else:
        body = dict(payload or {})
        body["manifest"] = asdict(manifest)
        print(dumps_json(body, indent=2))
    return 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_min(args) -> int:
    t0 = time.perf_counter()
    vals = [int(v) for v in args.pbox.split(",")]
    if len(vals) != 6:
        raise ValidationError("--pbox wants 6 integers L1,U1,L2,U2,L3,U3")
    box = BoxRegion(lo=(vals[0], vals[2], vals[4]), hi=(vals[1], vals[3], vals[5]))
    params = FormParams(k=args.k, alpha2=args.alpha2, alpha3=args.alpha3)
    if args.method == "brute":
        rep = min_search_brute(params, box, budget=args.budget_evals)
    else:
        rep = min_search_fast(params, box)
    payload = {"min_abs": rep.min_abs, "witness": list(rep.witness),
               "evaluations": rep.evaluations, "method": rep.method}
    return _finish(args, payload, [], t0)


def _cmd_weights(args) -> int:
    t0 = time.perf_counter()
    support = wt.solve_support(args.alpha2)
    check = wt.verify_support(support, args.alpha2, args.k)
    payload = {
        "support": {k: getattr(support, k) for k in ("a1", "b1", "a2", "b2", "a3", "b3")},
        "slacks": list(check.slacks), "min_slack": check.min_slack,
        "ok": check.ok,
    }
    outputs = []
    if args.emit_profile:
        family = wt.make_bumps(support)
        xs = np.linspace(0.0, support.b1 * 1.05, args.profile_points)
        lines = ["x,w1,w2,w3,w4"]
        for x in xs:
            row = [fmt17(x)] + [fmt17(wt.bump_eval(family, i, float(x)))
                                for i in (1, 2, 3, 4)]
            lines.append(",".join(row))
        _write_text(args.emit_profile, "\n".join(lines) + "\n")
        outputs.append(args.emit_profile)
    return _finish(args, payload, outputs, t0)


def _make_ctx(args) -> es.ExpSumContext:
    return es.make_context(args.k, args.alpha2, args.P,
                           alpha3=getattr(args, "alpha3", 0.75) or 0.75)


def _cmd_expsum(args) -> int:
    t0 = time.perf_counter()
    ctx = _make_ctx(args)
    if args.which == "f1":
        val = es.f1(ctx, args.t)
    elif args.which == "f2":
        val = es.f2(ctx, args.t)
    else:
        if args.X1 is None or args.X2 is None:
            raise ValidationError("--which S needs --X1 and --X2")
        val = es.partial_sum(ctx, args.X1, args.X2, args.t)
    payload = {"which": args.which, "P": args.P, "t": args.t,
               "re": val.real, "im": val.imag, "abs": abs(val)}
    return _finish(args, payload, [], t0)


def _cmd_expsum_scan(args) -> int:
    t0 = time.perf_counter()
    ctx = _make_ctx(args)
    grid = es.TGrid.for_context(ctx, args.tmin, args.tmax)
    if grid.n > args.max_nodes:
        raise BudgetError(
            f"scan needs {grid.n} nodes, over --max-nodes {args.max_nodes}",
            required=grid.n, budget=args.max_nodes)
    ts = grid.values()
    vals = es.f1_on_grid(ctx, grid) if args.which == "f1" else es.f2_many(ctx, ts)
    lines = ["t,re,im,abs"]
    for t, v in zip(ts, vals):
        lines.append(",".join((fmt17(t), fmt17(v.real), fmt17(v.imag), fmt17(abs(v)))))
    _write_text(args.out_csv, "\n".join(lines) + "\n")
    return _finish(args, None, [args.out_csv], t0)


def _cmd_zeta(args) -> int:
    t0 = time.perf_counter()
    val = zeta_half_line(args.t)
    payload = {"t": val.t, "magnitude": val.magnitude, "method": val.method,
               "error_bound": val.error_bound}
    return _finish(args, payload, [], t0)


def _cmd_nearpoints(args) -> int:
    t0 = time.perf_counter()
    if args.mode == "surface":
        if args.Q is None or args.delta is None:
            raise ValidationError("surface mode needs --Q and --delta")
        support = wt.solve_support(args.alpha2)
        family = wt.make_bumps(support)
        surface = npt.MongeSurface.from_support(support, args.k, args.alpha2)
        rep = npt.count_near_surface(surface, family, args.Q, args.delta,
                                     budget=args.budget)
        payload = {"mode": "surface", "count": rep.count,
                   "main_term": rep.main_term, "ratio": rep.ratio,
                   "params": rep.params}
    elif args.mode == "curve":
        if args.P is None or args.delta is None:
            raise ValidationError("curve mode needs --P and --delta")
        params = FormParams(k=args.k, alpha2=args.alpha2,
                            alpha3=args.alpha3 or 0.75)
        rep = npt.count_near_curve(params, args.P, args.delta, budget=args.budget)
        payload = {"mode": "curve", "count": rep.count,
                   "main_term": rep.main_term, "ratio": rep.ratio,
                   "params": rep.params}
    elif args.mode == "i4":
        if args.P is None or args.U is None:
            raise ValidationError("i4 mode needs --P and --U")
        ctx = _make_ctx(args)
        val = npt.i4_count(ctx, args.U)
        payload = {"mode": "i4", "count": val, "main_term": math.nan,
                   "ratio": math.nan, "params": {"P": args.P, "U": args.U}}
    else:
        if args.P is None or args.U is None:
            raise ValidationError("r mode needs --P and --U")
        val = npt.r_count(int(args.P), args.k, args.U)
        payload = {"mode": "r", "count": val, "main_term": math.nan,
                   "ratio": math.nan, "params": {"P": args.P, "U": args.U}}
    return _finish(args, payload, [], t0)


def _parse_sweep_config(path: str, seed_override: int | None) -> xp.SweepConfig:
    keys = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"config line without '=': {raw.rstrip()}")
            key, val = (s.strip() for s in line.split("=", 1))
            keys[key] = val
    try:
        seed = seed_override if seed_override is not None else int(keys.get("seed", "0"))
        rules = tuple(xp.ThetaRule.parse(s) for s in keys.get("theta", "").split(",") if s.strip())
        return xp.SweepConfig(
            k=int(keys["k"]),
            alpha2=float(keys.get("alpha2", "0.75")),
            samples=int(keys["samples"]),
            seed=seed,
            P_list=tuple(int(s) for s in keys["P"].split(",")),
            theta_rules=rules,
            method=keys.get("method", "fast"),
            sample_alpha2=keys.get("sample_alpha2", "false").lower() == "true",
        )
    except KeyError as exc:
        raise ValidationError(f"config missing required key {exc}") from exc


def _cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    env_seed = os.environ.get("TERNDIO_SEED")
    seed_override = int(env_seed) if env_seed is not None else None
    config = _parse_sweep_config(args.config, seed_override)
    runner = xp.run_double_average if config.sample_alpha2 else xp.run_alpha3_sweep
    result = runner(config, workers=args.workers)
    xp.write_sweep_csv(result, args.out_csv)
    outputs = [args.out_csv]
    if args.plots:
        outputs.extend(xp.write_plot_data(result, args.plots))
    summary = {
        "slope": result.slope,
        "slope_ci": list(result.slope_ci),
        "medians": {str(P): m for P, m in sorted(result.medians.items())},
        "normalized_medians": {fmt17(e): {str(P): v for P, v in sorted(d.items())}
                               for e, d in result.normalized_medians.items()},
        "failure_fractions": {r: {str(P): v for P, v in sorted(d.items())}
                              for r, d in result.failure_fractions.items()},
    }
    print(dumps_json(summary, indent=2))
    return _finish(args, None, outputs, t0, seed=config.seed)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="terndio",
        description="numerics for ternary diagonal Diophantine inequalities")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("min", help="minimum |form| over an integer box")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--alpha3", type=float, required=True)
    sp.add_argument("--pbox", required=True, help="L1,U1,L2,U2,L3,U3")
    sp.add_argument("--method", choices=("brute", "fast"), default="fast")
    sp.add_argument("--budget-evals", type=int, default=10 ** 9,
                    dest="budget_evals")
    sp.add_argument("--out")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_min)

    sp = sub.add_parser("weights", help="support constants and weight profiles")
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--emit-profile", dest="emit_profile")
    sp.add_argument("--profile-points", type=int, default=801,
                    dest="profile_points")
    sp.add_argument("--out")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_weights)

    sp = sub.add_parser("expsum", help="single exponential-sum values")
    sp.add_argument("--which", choices=("f1", "f2", "S"), required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--alpha3", type=float)
    sp.add_argument("--P", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--X1", type=float)
    sp.add_argument("--X2", type=float)
    sp.add_argument("--out")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_expsum)

    sp = sub.add_parser("expsum-scan", help="exponential sum on a dense t-grid")
    sp.add_argument("--which", choices=("f1", "f2"), default="f1")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--alpha3", type=float)
    sp.add_argument("--P", type=float, required=True)
    sp.add_argument("--tmin", type=float, required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--max-nodes", type=int, default=2_000_000, dest="max_nodes")
    sp.add_argument("--out", required=True, dest="out_csv")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_expsum_scan)

    sp = sub.add_parser("zeta", help="critical-line zeta magnitude")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--out")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_zeta)

    sp = sub.add_parser("nearpoints", help="near-point counters")
    sp.add_argument("--mode", choices=("surface", "curve", "i4", "r"),
                    required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--alpha3", type=float)
    sp.add_argument("--Q", type=int)
    sp.add_argument("--P", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--U", type=float)
    sp.add_argument("--budget", type=int, default=npt.DEFAULT_Q_BUDGET)
    sp.add_argument("--out")
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_nearpoints)

    sp = sub.add_parser("sweep", help="coefficient sweeps over dyadic P")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True, dest="out_csv")
    sp.add_argument("--plots")
    sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--manifest")
    sp.set_defaults(func=_cmd_sweep)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, CertificationError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
