"""Command-line harness: convergence study, energy audit, free-stream and operator checks."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import curvilinear, experiment, report, sbp

_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(experiment.ExperimentConfig)}


def _parse_config_file(path: str) -> dict:
    """Plain key=value overrides, one per line, # comments allowed."""
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        overrides[key] = _coerce(key, value)
    return overrides


def _coerce(key: str, value: str):
    if key in ("case", "jacobian_mode", "divergence", "out"):
        return value
    if key == "order":
        return _parse_orders(value)
    if key == "filter_width":
        return int(value)
    return float(value)


def _parse_orders(text: str) -> tuple[int, int]:
    parts = [int(p) for p in text.replace("(", "").replace(")", "").split(",")]
    if len(parts) != 2:
        raise ValueError(f"order must be two integers, got {text!r}")
    return tuple(parts)


def _parse_n_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _config_from_args(args) -> experiment.ExperimentConfig:
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(_parse_config_file(args.config))
    if getattr(args, "case", None):
        overrides["case"] = args.case
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilon"] = args.epsilon
    if getattr(args, "orders", None):
        overrides["order"] = _parse_orders(args.orders)
    if getattr(args, "jacobian_mode", None):
        overrides["jacobian_mode"] = args.jacobian_mode
    if getattr(args, "filter", None) is not None:
        overrides["filter_theta"] = 0.0 if args.filter == "off" else float(args.filter)
    return experiment.ExperimentConfig(**overrides)


def _add_common(parser):
    parser.add_argument("--case", choices=experiment.CASES, default=None)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--orders", default=None, help="interior,boundary (e.g. 4,2)")
    parser.add_argument("--jacobian-mode", dest="jacobian_mode", choices=experiment.JACOBIAN_MODES, default=None)
    parser.add_argument("--filter", default=None, help="filter strength in [0,1], or 'off'")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--out", default=None, help="output CSV path")


def _cmd_converge(args) -> int:
    config = _config_from_args(args)
    n_list = _parse_n_list(args.N)
    rows = experiment.run_convergence(config, n_list)
    out = Path(args.out or f"reports/converge_{config.case}.csv")
    written = report.write_convergence({config.case: rows}, out)
    for row in rows:
        rate = "-" if row.rate is None else f"{row.rate:.2f}"
        print(f"N={row.n:4d}  log10(err)={row.log10_error:8.4f}  rate={rate}")
    print(f"wrote {written[0]} and {written[1]}")
    return 0


def _cmd_audit(args) -> int:
    config = _config_from_args(args)
    reports = experiment.audit_sweep(config, n=args.N, samples=args.samples, alpha=args.alpha)
    out = Path(args.out or f"reports/audit_{config.case}.csv")
    written = report.write_audit(reports, out)
    n_pass = sum(rep.passed for rep in reports)
    print(f"{n_pass}/{len(reports)} samples PASS")
    print(f"wrote {written[0]} and {written[1]}")
    return 0 if n_pass == len(reports) else 1


def _cmd_freestream(args) -> int:
    config = _config_from_args(args)
    u_values = [float(v) for v in args.u_inf.split(",")]
    results, histories = [], {}
    for u_inf in u_values:
        for filtered in (False, True):
            hist: list = []
            res = experiment.freestream_deviation(
                config, n=args.N, u_inf=u_inf, use_filter=filtered, history=hist
            )
            results.append(res)
            histories[f"u_inf={u_inf} filter={'on' if filtered else 'off'}"] = hist
            print(
                f"u_inf={u_inf:+.2f} filter={'on ' if filtered else 'off'} "
                f"max deviation = {res.max_deviation:.3e} "
                f"{'PASS' if res.passed else 'FAIL'}"
            )
    out = Path(args.out or f"reports/freestream_{config.case}.csv")
    written = report.write_freestream(results, histories, out)
    all_pass = all(res.passed for res in results)

    if args.twod:
        rows = []
        for mapping in (curvilinear.dilation_mapping(), curvilinear.curved_moving_mapping()):
            ops = curvilinear.TensorOps2D(args.twod_n, config.order)
            check = curvilinear.fsp_mode_check(ops, mapping)
            dev = curvilinear.freestream_deviation_2d(
                n=args.twod_n, u_inf=u_values[0], mapping=mapping, order=config.order
            )
            rows.append((mapping.name, "physical-divergence", f"{check.discrepancy:.3e}", f"{dev:.3e}"))
            all_pass = all_pass and dev <= 1e-12
            print(f"2d mapping {mapping.name}: deviation {dev:.3e}")
        curvi_path = report.write_curvilinear(rows, out.with_name(out.stem + "_curvilinear.csv"))
        print(f"wrote {curvi_path}")

    print(f"wrote {written[0]} and {written[1]}")
    return 0 if all_pass else 1


def _cmd_ops(args) -> int:
    config = _config_from_args(args)
    order = config.order
    entries = []
    single = sbp.build_operator(order, args.N + 1, 1.0 / args.N)
    entries.append((f"single-{order[0]}{order[1]}", single.n, sbp.sbp_residual(single)))
    other = (2, 1) if order == (4, 2) else (4, 2)
    alt = sbp.build_operator(other, args.N + 1, 1.0 / args.N)
    entries.append((f"single-{other[0]}{other[1]}", alt.n, sbp.sbp_residual(alt)))
    coupled = sbp.couple_blocks(
        sbp.build_operator(order, args.N + 1, 1.0 / args.N),
        sbp.build_operator(order, args.N + 1, 0.2 / args.N),
    )
    entries.append((f"coupled-{order[0]}{order[1]}", coupled.n, sbp.sbp_residual(coupled)))
    out = Path(args.out or "reports/ops.csv")
    written = report.write_sbp_report(entries, out)
    if args.dump:
        dumped = sbp.dump_csv(coupled, out.parent / "operator_dump")
        print(f"dumped {', '.join(str(p) for p in dumped)}")
    worst = max(e[2] for e in entries)
    for name, n, res in entries:
        print(f"{name:14s} n={n:4d}  residual={res:.3e}")
    print(f"wrote {written[0]} and {written[1]}")
    return 0 if worst <= 1e-13 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbpale",
        description="Energy-stable moving-mesh SBP solvers: benchmark and verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="max-norm convergence table and plot")
    _add_common(p)
    p.add_argument("--N", default="8,16,32,64,128", help="comma-separated resolutions")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("audit", help="energy-condition eigenvalue sweep")
    _add_common(p)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--alpha", type=float, default=0.0)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("freestream", help="constant-state preservation check")
    _add_common(p)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--u-inf", dest="u_inf", default="1,-3.7")
    p.add_argument("--twod", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--twod-n", dest="twod_n", type=int, default=13)
    p.set_defaults(func=_cmd_freestream)

    p = sub.add_parser("ops", help="SBP structure residual report")
    _add_common(p)
    p.add_argument("--N", type=int, default=16, help="spacings per block")
    p.add_argument("--dump", action="store_true", help="also dump P/Q/D as CSV")
    p.set_defaults(func=_cmd_ops)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
