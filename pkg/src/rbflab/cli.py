"""Command-line front end for simulation runs, analytic curves, and checks.

Every output CSV starts with a `#`-prefixed manifest header (command, config
digest, seed, version) so the file is self-describing, and gets a sidecar
<name>.manifest.json carrying the same record plus a timestamp and the
resolved inputs.  The headers deliberately omit the timestamp: reruns with
identical config, seed, and trial counts must produce byte-identical CSVs.

Exit codes: 0 success, 1 a validation or KS check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analytic_cdf import CdfHypothesisError, as_cdf, default_grid, mf_cdf, mmse_cdf
from .core_random import RngStream
from .dof_analysis import dof_region, optimal_beams_single_cell
from .network_model import NetworkConfig, config_to_dict, derive_gains, load_config
from .receivers import ReceiverKind, sample_sinr
from .scheduler_sim import UserScaling, estimate_sum_rate, sweep_beams, users_for_snr
from .suites import SUITES, run_suites
from .validation import EmpiricalCdf, ks_distance

__all__ = ["main"]

_SAMPLE_FLOOR = 1000
_CDF_TAG = 0x434C4946
_RATE_TAG = 0x434C4952
_SWEEP_TAG = 0x434C4953


def _parse_float_list(text: str) -> list[float]:
    """Accept `a:b` or `a:b:step` (inclusive ranges) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1.0)
            if len(parts) != 3:
                raise ValueError(f"expected start:stop[:step], got {text!r}")
            start, stop, step = parts
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise ValueError(f"empty range {text!r}")
            return [start + i * step for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _parse_int_list(text: str) -> list[int]:
    values = _parse_float_list(text)
    out = []
    for v in values:
        if v != int(v):
            raise _UsageError(f"expected integers, got {v!r}")
        out.append(int(v))
    return out


def _digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _header_lines(command: str, digest: str, seed: int) -> list[str]:
    return [
        f"# command: {command}",
        f"# config: {digest}",
        f"# seed: {seed}",
        f"# version: {__version__}",
    ]


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _write_csv(
    path: Path, header_lines: Sequence[str], columns: Sequence[str], rows
) -> None:
    with open(path, "w", newline="\n") as handle:
        for line in header_lines:
            handle.write(line + "\n")
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_format_cell(v) for v in row) + "\n")


def _write_manifest(
    path: Path, command: str, digest: str, seed: int, inputs: dict, extra: dict | None = None
) -> None:
    record = {
        "command": command,
        "config_digest": digest,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"
        ),
        "inputs": inputs,
    }
    if extra:
        record.update(extra)
    with open(path, "w", newline="\n") as handle:
        json.dump(record, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _load_config_or_die(path: str) -> NetworkConfig:
    try:
        return load_config(path)
    except (OSError, ValueError) as exc:
        raise _UsageError(str(exc)) from exc


class _UsageError(Exception):
    pass


def cmd_sinr_cdf(args: argparse.Namespace) -> int:
    if args.samples < _SAMPLE_FLOOR:
        raise _UsageError(f"need at least {_SAMPLE_FLOOR} samples, got {args.samples}")
    cfg = _load_config_or_die(args.config)
    if not 0 <= args.cell < len(cfg.beams):
        raise _UsageError(f"cell {args.cell} outside 0..{len(cfg.beams) - 1}")
    if cfg.beams[args.cell] == 0:
        raise _UsageError(f"cell {args.cell} is silent, no SINR to sample")
    kind = ReceiverKind(args.rx)
    gains = derive_gains(cfg)
    eta = gains.eta[args.cell]

    if args.grid_min is not None or args.grid_max is not None:
        lo = args.grid_min if args.grid_min is not None else 1e-3 * eta
        hi = args.grid_max if args.grid_max is not None else 1e3 * eta
        if not 0 < lo < hi:
            raise _UsageError("grid bounds must satisfy 0 < min < max")
        grid = np.geomspace(lo, hi, args.grid_points)
    else:
        grid = default_grid(eta, args.grid_points)

    law = None
    warnings = []
    try:
        if kind is ReceiverKind.MMSE:
            law = mmse_cdf(gains, cfg, args.cell)
        elif kind is ReceiverKind.MF:
            law = mf_cdf(gains, cfg, args.cell)
        else:
            law = as_cdf(gains, cfg, args.cell)
    except CdfHypothesisError as exc:
        warnings.append(str(exc))

    rng = RngStream(args.seed, _CDF_TAG)
    samples = sample_sinr(cfg, kind, args.cell, args.samples, rng)
    empirical = EmpiricalCdf.from_samples(samples)

    digest = _digest(config_to_dict(cfg))
    header = _header_lines("sinr-cdf", digest, args.seed)
    out = Path(args.out)
    inputs = {
        "config": config_to_dict(cfg),
        "rx": kind.value,
        "cell": args.cell,
        "samples": args.samples,
        "grid_points": args.grid_points,
    }

    if law is None:
        rows = zip(grid, empirical.evaluate(grid))
        _write_csv(out, header, ("s", "F_empirical"), rows)
        _write_manifest(
            Path(str(out) + ".manifest.json"),
            "sinr-cdf",
            digest,
            args.seed,
            inputs,
            extra={"warnings": warnings, "ks": None},
        )
        for message in warnings:
            print(f"warning: {message}", file=sys.stderr)
        print(f"wrote {out} (empirical only)")
        return 0

    report = ks_distance(empirical, law.evaluate)
    rows = zip(grid, empirical.evaluate(grid), law.evaluate(grid))
    _write_csv(out, header, ("s", "F_empirical", "F_analytic"), rows)
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "sinr-cdf",
        digest,
        args.seed,
        inputs,
        extra={"warnings": warnings, "ks": report.to_record()},
    )
    marker = "PASS" if report.passed else "FAIL"
    print(
        f"[{marker}] KS distance {report.statistic:.5f} "
        f"(critical {report.critical_value:.5f}, n={args.samples})"
    )
    return 0 if report.passed else 1


def cmd_sumrate(args: argparse.Namespace) -> int:
    cfg = _load_config_or_die(args.config)
    kind = ReceiverKind(args.rx)
    rho_db = _parse_float_list(args.rho_db)
    if not rho_db:
        raise _UsageError("empty rho list")
    cells = len(cfg.beams)
    scaling = UserScaling(alpha=(args.alpha,) * cells, prefactor=(1.0,) * cells)
    rng = RngStream(args.seed, _RATE_TAG)

    rows = []
    for i, rdb in enumerate(rho_db):
        rho = 10 ** (rdb / 10)
        try:
            users = tuple(users_for_snr(scaling, rho, c) for c in range(cells))
            run_cfg = dataclasses.replace(
                cfg, users=users, total_power=rho * cfg.noise_power
            )
        except ValueError as exc:
            raise _UsageError(f"rho {rdb:g} dB: {exc}") from exc
        estimate = estimate_sum_rate(run_cfg, kind, args.trials, rng.child(i))
        rows.append((rdb, users[0], estimate.total_rate, estimate.total_stderr))

    digest = _digest(config_to_dict(cfg))
    out = Path(args.out)
    _write_csv(
        out,
        _header_lines("sumrate", digest, args.seed),
        ("rho_db", "K", "rate", "stderr"),
        rows,
    )
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "sumrate",
        digest,
        args.seed,
        {
            "config": config_to_dict(cfg),
            "rx": kind.value,
            "rho_db": rho_db,
            "alpha": args.alpha,
            "trials": args.trials,
        },
    )
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def cmd_sweep_m(args: argparse.Namespace) -> int:
    cfg = _load_config_or_die(args.config)
    kind = ReceiverKind(args.rx)
    rho_db = _parse_float_list(args.rho_db)
    if not rho_db:
        raise _UsageError("empty rho list")
    if args.m_range is None:
        beam_counts = list(range(1, cfg.num_tx_antennas + 1))
    else:
        beam_counts = _parse_int_list(args.m_range)
    if not beam_counts:
        raise _UsageError("empty M range")
    cells = len(cfg.beams)
    options = [(m,) * cells for m in beam_counts]
    rng = RngStream(args.seed, _SWEEP_TAG)

    rows = []
    for i, rdb in enumerate(rho_db):
        rho = 10 ** (rdb / 10)
        run_cfg = dataclasses.replace(cfg, total_power=rho * cfg.noise_power)
        try:
            per_trial = sweep_beams(run_cfg, options, kind, args.trials, rng.child(i))
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
        totals = per_trial.sum(axis=2)
        means = totals.mean(axis=1)
        stderrs = totals.std(axis=1, ddof=1) / math.sqrt(args.trials)
        for j, m in enumerate(beam_counts):
            rows.append((rdb, m, float(means[j]), float(stderrs[j])))

    digest = _digest(config_to_dict(cfg))
    out = Path(args.out)
    _write_csv(
        out,
        _header_lines("sweep-m", digest, args.seed),
        ("rho_db", "M", "rate_total", "stderr"),
        rows,
    )
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "sweep-m",
        digest,
        args.seed,
        {
            "config": config_to_dict(cfg),
            "rx": kind.value,
            "rho_db": rho_db,
            "beam_counts": beam_counts,
            "trials": args.trials,
        },
    )
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def cmd_dof(args: argparse.Namespace) -> int:
    kind = ReceiverKind(args.rx)
    alphas = _parse_float_list(args.alpha)
    if not alphas:
        raise _UsageError("need at least one alpha")
    if args.nt < 1 or args.nr < 1:
        raise _UsageError("antenna counts must be at least 1")
    grid = _parse_float_list(args.alpha_grid)
    weights = [_parse_float_list(w) for w in args.weights or []]
    for w in weights:
        if len(w) != len(alphas):
            raise _UsageError("each weight vector needs one entry per cell")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {
        "alpha": alphas,
        "num_tx_antennas": args.nt,
        "num_rx_antennas": args.nr,
        "rx": kind.value,
        "alpha_grid": args.alpha_grid,
        "weights": weights,
    }
    digest = _digest(params)
    header = _header_lines("dof", digest, args.seed)

    curve_rows = []
    for a in grid:
        d_star, m_star = optimal_beams_single_cell(a, args.nt, args.nr, kind)
        curve_rows.append((a, d_star, m_star))
    _write_csv(
        out_dir / "single_cell.csv",
        header,
        ("alpha", "d_star", "m_star"),
        curve_rows,
    )

    region = dof_region(alphas, args.nt, args.nr, kind)
    cells = len(alphas)
    point_rows = [
        tuple(m) + tuple(point.d)
        for m, point in region.points
        if m is not None
    ]
    _write_csv(
        out_dir / "region_points.csv",
        header,
        tuple(f"m{c + 1}" for c in range(cells)) + tuple(f"d{c + 1}" for c in range(cells)),
        point_rows,
    )

    written = ["single_cell.csv", "region_points.csv"]
    if cells == 2:
        hull = region.hull_vertices or ()
        _write_csv(
            out_dir / "hull.csv",
            header,
            ("d1", "d2"),
            [(p.d[0], p.d[1]) for p in hull],
        )
        written.append("hull.csv")
    if weights:
        support_rows = [
            tuple(w) + (region.support(np.asarray(w)),) for w in weights
        ]
        _write_csv(
            out_dir / "support.csv",
            header,
            tuple(f"w{c + 1}" for c in range(cells)) + ("value",),
            support_rows,
        )
        written.append("support.csv")

    _write_manifest(out_dir / "manifest.json", "dof", digest, args.seed, params)
    print(f"wrote {', '.join(written)} in {out_dir}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    passed = run_suites(names, args.seed)
    print(f"overall: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbflab",
        description=(
            "Multi-cell random-beamforming downlink: Monte Carlo simulation, "
            "closed-form SINR laws, and DoF analysis."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            p.add_argument("--config", required=True, help="network config JSON")
        p.add_argument(
            "--rx",
            choices=[k.value for k in ReceiverKind],
            default="mmse",
            help="receiver kind (default mmse)",
        )
        p.add_argument("--seed", type=int, default=1234, help="RNG seed")
        p.add_argument("--out", required=True, help="output path")

    p_cdf = sub.add_parser(
        "sinr-cdf", help="empirical vs closed-form SINR CDF for one cell"
    )
    add_common(p_cdf)
    p_cdf.add_argument("--cell", type=int, default=0, help="cell index (default 0)")
    p_cdf.add_argument(
        "--samples", type=int, default=100_000, help="SINR draws (>= 1000)"
    )
    p_cdf.add_argument(
        "--grid-points", type=int, default=400, help="CDF grid size (default 400)"
    )
    p_cdf.add_argument("--grid-min", type=float, default=None, help="grid lower edge")
    p_cdf.add_argument("--grid-max", type=float, default=None, help="grid upper edge")
    p_cdf.set_defaults(func=cmd_sinr_cdf)

    p_rate = sub.add_parser(
        "sumrate", help="scheduled sum rate vs SNR with K growing as rho^alpha"
    )
    add_common(p_rate)
    p_rate.add_argument(
        "--rho-db", required=True, help="SNR grid in dB: a:b:step or comma list"
    )
    p_rate.add_argument(
        "--alpha", type=float, default=1.0, help="user-growth exponent (default 1)"
    )
    p_rate.add_argument("--trials", type=int, default=2000, help="Monte Carlo slots")
    p_rate.set_defaults(func=cmd_sumrate)

    p_sweep = sub.add_parser(
        "sweep-m", help="sum rate across shared beam counts, common random numbers"
    )
    add_common(p_sweep)
    p_sweep.add_argument(
        "--rho-db", required=True, help="SNR grid in dB: a:b:step or comma list"
    )
    p_sweep.add_argument(
        "--m-range", default=None, help="beam counts: a:b:step or comma list (default 1..N_T)"
    )
    p_sweep.add_argument("--trials", type=int, default=2000, help="Monte Carlo slots")
    p_sweep.set_defaults(func=cmd_sweep_m)

    p_dof = sub.add_parser(
        "dof", help="DoF staircase, region points, hull, and support values"
    )
    p_dof.add_argument(
        "--alpha", required=True, help="per-cell user-growth exponents, comma list"
    )
    p_dof.add_argument("--nt", type=int, required=True, help="transmit antennas")
    p_dof.add_argument("--nr", type=int, required=True, help="receive antennas")
    p_dof.add_argument(
        "--rx",
        choices=[k.value for k in ReceiverKind],
        default="mmse",
        help="receiver kind (default mmse)",
    )
    p_dof.add_argument(
        "--alpha-grid",
        default="0:3:0.05",
        help="grid for the single-cell staircase (default 0:3:0.05)",
    )
    p_dof.add_argument(
        "--weights",
        action="append",
        default=None,
        help="weight vector for the support function, comma list (repeatable)",
    )
    p_dof.add_argument("--seed", type=int, default=1234, help="recorded in manifest")
    p_dof.add_argument("--out", required=True, help="output directory")
    p_dof.set_defaults(func=cmd_dof)

    p_val = sub.add_parser("validate", help="run named validation suites")
    p_val.add_argument(
        "--suite",
        choices=["all", *SUITES],
        default="all",
        help="suite name (default all)",
    )
    p_val.add_argument("--seed", type=int, default=1234, help="RNG seed")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
