"""Command-line front end.

Every command echoes its full configuration (with the package version) at
the top of its output and is a pure function of its flags and input
files; worker count only changes wall time.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import CompoundChannel, load_channel, paper_example
from .codes import DEFAULT_DELTA
from .errors import (BlocklengthTooSmall, CompoundMacError, ConfigurationError, InfeasiblePlan,
                     QuantizationInfeasible, ValidationError)
from .optimize import (OptimizerConfig, full_region_thresholds, min_conf_sum, optimize_region,
                       sum_capacity_full_coop, support_at)
from .regions import RateRegion, hausdorff
from .simulation import run_simulation

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_COMPARISON = 0, 2, 3, 4

# published values of the bundled example and the tolerances they are checked with
PAPER_MINCONF = (0.58, 0.04)
PAPER_THRESHOLD_2 = (0.43, 0.02)
FULL_COOP_TOL = 0.01
PAPER_REGIONS = ((0.0, 0.0), (0.29, 0.29), (0.33, 0.43), (0.47, 0.47), (5.0, 5.0))

BUNDLED = "bundled:paper_example"


def _r4(x: float) -> str:
    return f"{x:.4f}"


def _rounded(obj, digits: int = 6):
    """Round floats in nested containers so text output is stable."""
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: _rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return _rounded(obj.tolist(), digits)
    if isinstance(obj, np.generic):
        return _rounded(obj.item(), digits)
    return obj


def _channel(args) -> CompoundChannel:
    return paper_example() if args.channel in (None, BUNDLED) else load_channel(args.channel)


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(directions=args.dirs, restarts=args.restarts, u_size=args.usize, seed=args.seed)


def _config_echo(args, channel: CompoundChannel) -> dict:
    keys = ("command", "channel", "mode", "c1", "c2", "dirs", "restarts", "usize", "delta",
            "n", "trials", "seed", "r1", "r2", "fraction", "format")
    cfg = {"version": __version__}
    for k in keys:
        if hasattr(args, k):
            v = getattr(args, k)
            cfg[k] = BUNDLED if (k == "channel" and v is None) else v
    cfg["channel_fingerprint"] = channel.fingerprint()
    return cfg


def _csv_text(config: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(config: dict, result: dict) -> str:
    return json.dumps({"config": config, "result": _rounded(result)}, indent=2) + "\n"


def _emit(args, text: str, summary: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)


def _scalar_output(args, config: dict, values: dict, extra: dict | None = None) -> str:
    if args.format == "csv":
        return _csv_text(config, ["quantity", "value"], [[k, _r4(v)] for k, v in values.items()])
    return _json_text(config, {k: round(v, 4) for k, v in values.items()} | (extra or {}))


def region_rows(region: RateRegion) -> tuple[list[str], list[list[str]]]:
    k = region.dimension
    header = [f"dir_{i + 1}" for i in range(k)] + ["support_value"] + [f"point_{i + 1}" for i in range(k)] \
        + ["policy"]
    rows = [[f"{v:.6f}" for v in d] + [_r4(val)] + [_r4(v) for v in p] + [str(int(j))]
            for d, val, p, j in zip(region.directions, region.values, region.points, region.policy_index)]
    return header, rows


def region_text(args, config: dict, region: RateRegion) -> str:
    if args.format == "csv":
        return _csv_text(config, *region_rows(region))
    return _json_text(config, {
        "kind": region.kind, "c1": region.c1, "c2": region.c2,
        "directions": region.directions, "support_values": np.round(region.values, 4),
        "points": np.round(region.points, 4), "policy_index": region.policy_index,
        "policies": [p.to_dict() for p in region.policies],
        "corners": {k: round(v, 4) for k, v in region.corner_points().items()},
        "metadata": region.metadata,
    })


def parse_region_csv(text: str) -> dict:
    """Read back a region CSV written by ``region``: config echo plus columns."""
    config, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            config[k] = json.loads(v)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    k = sum(h.startswith("dir_") for h in header)
    return {"config": config, "directions": data[:, :k], "values": data[:, k],
            "points": data[:, k + 1:2 * k + 1], "policy": data[:, -1].astype(int)}


# --- commands -------------------------------------------------------------------

def cmd_region(args) -> int:
    ch = _channel(args)
    region = optimize_region(ch, args.mode, args.c1, args.c2, _optimizer(args))
    corners = region.corner_points()
    summary = "  ".join(f"{k}={_r4(v)}" for k, v in corners.items())
    _emit(args, region_text(args, _config_echo(args, ch), region),
          f"region mode={args.mode} C1={_r4(args.c1)} C2={_r4(args.c2)}: {summary}")
    return EXIT_OK


def cmd_sumcap(args) -> int:
    ch = _channel(args)
    res = sum_capacity_full_coop(ch, _optimizer(args))
    _emit(args, _scalar_output(args, _config_echo(args, ch), {"c_inf": res.value},
                               {"policy": res.policy.to_dict()}),
          f"full-cooperation sum capacity C_inf={_r4(res.value)}")
    return EXIT_OK


def cmd_minconf(args) -> int:
    ch = _channel(args)
    res = min_conf_sum(ch, _optimizer(args))
    vals = {"c_inf": res.c_inf, "common": res.common, "min_conf_sum": res.value, "slack": res.slack}
    _emit(args, _scalar_output(args, _config_echo(args, ch), vals, {"policy": res.policy.to_dict()}),
          f"min C1+C2 = C_inf - common = {_r4(res.c_inf)} - {_r4(res.common)} = {_r4(res.value)}")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    ch = _channel(args)
    res = full_region_thresholds(ch, _optimizer(args))
    vals = {"c_inf": res.c_inf, "max_a": res.max_a, "max_b": res.max_b,
            "threshold_1": res.t1, "threshold_2": res.t2}
    _emit(args, _scalar_output(args, _config_echo(args, ch), vals,
                               {"policies": [p.to_dict() for p in res.policies]}),
          f"C1 >= C_inf - max a = {_r4(res.c_inf)} - {_r4(res.max_a)} = {_r4(res.t1)}; "
          f"C2 >= C_inf - max b = {_r4(res.c_inf)} - {_r4(res.max_b)} = {_r4(res.t2)}")
    return EXIT_OK


def operating_point(channel: CompoundChannel, c1: float, c2: float, fraction: float,
                    config: OptimizerConfig) -> tuple[float, float]:
    """``fraction`` times the boundary point of the region in the (1, 1) direction."""
    _, point = support_at(channel, c1, c2, np.ones(2) / np.sqrt(2.0), config)
    return float(fraction * point[0]), float(fraction * point[1])


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise ConfigurationError("simulate needs an explicit --seed")
    ch = _channel(args)
    r1, r2 = args.r1, args.r2
    if r1 is None or r2 is None:
        p1, p2 = operating_point(ch, args.c1, args.c2, args.fraction, _optimizer(args))
        r1 = p1 if r1 is None else r1
        r2 = p2 if r2 is None else r2
    res = run_simulation(ch, r1, r2, args.c1, args.c2, args.n, args.trials, args.seed, args.delta)
    config = _config_echo(args, ch)
    if args.format == "csv":
        rows = [[r.n, r.state, r.trials, _r4(r.error), _r4(r.ci95)] for r in res.reports]
        text = _csv_text(config | {"rates": [round(r1, 4), round(r2, 4)]},
                         ["n", "state", "trials", "error", "ci95"], rows)
    else:
        text = _json_text(config, {
            "rates": [r1, r2], "policy": res.policy.to_dict(), "error_bound": res.score,
            "plans": {str(n): p.to_dict() for n, p in res.plans.items()},
            "reports": [r.to_dict() for r in res.reports]})
    lines = [f"rates R1={_r4(r1)} R2={_r4(r2)}"] + [
        f"n={r.n:4d} {r.state}: error={_r4(r.error)} +/- {_r4(r.ci95)}" for r in res.reports]
    _emit(args, text, "\n".join(lines))
    return EXIT_OK


def paper_comparison(minconf: float, threshold_2: float, full_gap: float) -> list[tuple[str, float, str, bool]]:
    """Rows ``(quantity, computed, target, ok)`` against the published example values."""
    (m, mt), (t, tt) = PAPER_MINCONF, PAPER_THRESHOLD_2
    return [
        ("min C1+C2", minconf, f"{m:.2f} +/- {mt:.2f}", abs(minconf - m) <= mt),
        ("threshold C2", threshold_2, f"{t:.2f} +/- {tt:.2f}", abs(threshold_2 - t) <= tt),
        ("dH(region(.47,.47), region(5,5))", full_gap, f"<= {FULL_COOP_TOL:.2f}", full_gap <= FULL_COOP_TOL),
    ]


def cmd_paper_example(args) -> int:
    ch = paper_example()
    cfg = _optimizer(args)
    out = Path(args.out or "paper_example_out")
    out.mkdir(parents=True, exist_ok=True)
    args.mode = "conf"
    regions = {}
    for c1, c2 in PAPER_REGIONS:
        args.c1, args.c2 = c1, c2
        region = optimize_region(ch, "conf", c1, c2, cfg)
        regions[(c1, c2)] = region
        suffix = "csv" if args.format == "csv" else "json"
        (out / f"region_{c1:.2f}_{c2:.2f}.{suffix}").write_text(region_text(args, _config_echo(args, ch), region))
    mc = min_conf_sum(ch, cfg)
    th = full_region_thresholds(ch, cfg)
    gap = hausdorff(regions[(0.47, 0.47)], regions[(5.0, 5.0)])
    rows = paper_comparison(mc.value, th.t2, gap)

    lines = [f"# compound-mac {__version__} paper-example seed={args.seed} restarts={args.restarts} "
             f"dirs={args.dirs or 128} usize={args.usize}"]
    lines.append(f"{'quantity':36s} {'computed':>9s}  {'target':14s} result")
    for name, val, target, ok in rows:
        lines.append(f"{name:36s} {val:9.4f}  {target:14s} {'PASS' if ok else 'FAIL'}")
    lines.append(f"{'C_inf':36s} {mc.c_inf:9.4f}")
    lines.append(f"{'common term max min I(Z;XY|U)':36s} {mc.common:9.4f}")
    lines.append(f"{'threshold C1':36s} {th.t1:9.4f}")
    for (c1, c2), r in regions.items():
        lines.append(f"{f'region ({c1:.2f},{c2:.2f}) max R1+R2':36s} {r.corner_points()['max_sum']:9.4f}")
    text = "\n".join(lines) + "\n"
    (out / "comparison.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if all(ok for *_, ok in rows) else EXIT_COMPARISON


# --- parser -----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, seed_default: int | None = 0) -> None:
    p.add_argument("--channel", default=None,
                   help=f"channel JSON file (default: {BUNDLED})")
    p.add_argument("--restarts", type=int, default=8, help="multi-start runs per search (default 8)")
    p.add_argument("--usize", type=int, default=None,
                   help="time-sharing alphabet size (default min(|X||Y|+2, |Z|+3))")
    p.add_argument("--dirs", type=int, default=None,
                   help="support directions (default 128 for conf, 256 for cm)")
    p.add_argument("--seed", type=int, default=seed_default, help="master seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compound-mac",
                                 description="Capacity regions and coding simulations for compound MACs "
                                             "with conferencing encoders.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="sample the support function of a capacity region")
    _common(p)
    p.add_argument("--mode", choices=("conf", "cm"), default="conf",
                   help="conf: (R1,R2) with conferencing; cm: (R0,R1,R2) common-message region")
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.set_defaults(func=cmd_region)

    for name, fn, text in (("sumcap", cmd_sumcap, "full-cooperation sum capacity"),
                           ("minconf", cmd_minconf, "smallest C1+C2 reaching the full-cooperation sum capacity"),
                           ("thresholds", cmd_thresholds, "conferencing capacities giving the full-cooperation region")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("simulate", help="random-coding simulation of the conferencing scheme")
    _common(p, seed_default=None)
    p.add_argument("--c1", type=float, default=0.29)
    p.add_argument("--c2", type=float, default=0.29)
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--fraction", type=float, default=0.3,
                   help="without --r1/--r2, scale of the boundary point in direction (1,1) (default 0.3)")
    p.add_argument("--n", type=int, nargs="+", default=[20, 40, 80], help="blocklengths")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="typicality constant")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("paper-example", help="reproduce the bundled two-state example and compare")
    _common(p)
    p.set_defaults(func=cmd_paper_example)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BlocklengthTooSmall, InfeasiblePlan, QuantizationInfeasible) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigurationError, CompoundMacError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
