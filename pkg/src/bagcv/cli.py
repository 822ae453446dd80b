"""Command-line front end.

Subcommands: select (bagged bandwidth), m0 (optimal subsample size),
density (estimate on a grid), sim (study runner from a JSON config),
bench (timing comparison), calibrate-rv (kernel-variance calibration).

Machine output is JSON (or CSV for grids/studies) on stdout or --output;
human-readable progress goes to stderr.  Exit status: 0 success, 2 usage
error, 3 data error, 4 numerical/diagnostic failure.
"""

from __future__ import annotations

import argparse
import array
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .amse import calibrate_rv, estimate_m0
from .bagging import BagConfig, bagged_bandwidth
from .data import Sample
from .errors import ConfigError, DataError, DomainError, FitError, NumericalError
from .experiments import (
    BENCH_HEADER,
    ISE_HEADER,
    SAMPLING_HEADER,
    TABLE1_HEADER,
    StudySpec,
    run_ise_study,
    run_sampling_study,
    run_table1,
    run_timing_bench,
)
from .kde import kde_eval
from .kernel import gaussian_constants

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Data ingestion


def _parse_cell(token: str):
    try:
        return float(token)
    except ValueError:
        return None


def ingest(path, column=None, jitter: float = 0.0, seed: int = 0) -> Sample:
    """Read a numeric column from a newline- or comma-separated file.

    ``column`` selects by header name or zero-based index.  A header row is
    skipped automatically when its selected cell is not numeric.  With
    jitter j > 0, independent Uniform(-j, j) noise is added (deterministic
    per seed) to break ties; n and the pre-jitter tie count are reported.
    """
    if jitter < 0:
        raise DomainError("jitter half-width must be >= 0")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    values = array.array("d")
    bad: list[int] = []
    col_idx = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if col_idx is None:
                # resolve the column selector on the first non-empty row
                if column is None:
                    col_idx = 0
                elif isinstance(column, int) or str(column).lstrip("-").isdigit():
                    col_idx = int(column)
                elif column in [c.strip() for c in row]:
                    col_idx = [c.strip() for c in row].index(column)
                    continue  # header row consumed
                else:
                    raise DataError(
                        f"column {column!r} not found in header {row!r}"
                    )
            if col_idx >= len(row):
                bad.append(lineno)
                continue
            v = _parse_cell(row[col_idx].strip())
            if v is None or not np.isfinite(v):
                if lineno == 1 and not values:
                    continue  # header row without --column by name
                bad.append(lineno)
            else:
                values.append(v)
            if len(bad) >= 5:
                raise DataError(
                    f"unparsable rows at lines {bad[:5]} of {path}"
                )
    if bad:
        raise DataError(f"unparsable rows at lines {bad[:5]} of {path}")
    if len(values) < 2:
        raise DataError(f"need at least 2 numeric values, got {len(values)}")
    x = np.frombuffer(values, dtype=float).copy()
    x.sort()
    ties = int(x.size - np.unique(x).size)
    _info(f"read n={x.size} values from {path} ({ties} tied)")
    if jitter > 0:
        rng = np.random.default_rng(seed)
        x = x + rng.uniform(-jitter, jitter, size=x.size)
        x.sort()
    return Sample(x)


# ---------------------------------------------------------------------------
# Output plumbing


def _emit_json(obj: dict, output) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, output) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([row[k] for k in header])
    if output:
        Path(output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# ---------------------------------------------------------------------------
# Commands


def _interval(args):
    if args.lower is not None and args.upper is not None:
        return (args.lower, args.upper)
    if args.lower is not None or args.upper is not None:
        raise DomainError("--lower and --upper must be given together")
    return None


def _select(data: Sample, args) -> tuple[dict, int]:
    t0 = time.perf_counter()
    kc = gaussian_constants()
    report: dict = {}
    if args.m is None:
        model = estimate_m0(
            data, kc, args.N, s=args.s,
            r=args.r, seed=args.seed, threads=args.threads,
        )
        m = model.m_hat
        report["m0"] = model.to_json()
    else:
        m = args.m
    cfg = BagConfig(
        m=m,
        n_resamples=args.N,
        seed=args.seed,
        interval=_interval(args),
        binned_sub=args.nb is not None,
        nb_sub=args.nb,
    )
    res = bagged_bandwidth(data, cfg, threads=args.threads)
    report = {
        "bandwidth": res.h_bag,
        "m": m,
        "N": args.N,
        "n": data.n,
        "boundary_hits": res.boundary_hits,
        "failures": res.failures,
        "seed": args.seed,
        "version": __version__,
        **report,
    }
    # elapsed time goes to stderr only, keeping the JSON byte-reproducible
    _info(
        f"bagged bandwidth {res.h_bag:.6g} (m={m}, N={args.N}, "
        f"{time.perf_counter() - t0:.2f}s elapsed)"
    )
    if res.boundary_hits > args.N / 2:
        _info(
            f"diagnostic failure: {res.boundary_hits}/{args.N} resamples hit a "
            "search-interval boundary; selection unreliable"
        )
        return report, EXIT_NUMERIC
    return report, EXIT_OK


def cmd_select(args) -> int:
    data = ingest(args.input, args.column, args.jitter, args.seed)
    report, status = _select(data, args)
    _emit_json(report, args.output)
    return status


def cmd_m0(args) -> int:
    data = ingest(args.input, args.column, args.jitter, args.seed)
    kc = gaussian_constants()
    model = estimate_m0(
        data, kc, args.N, s=args.s, r=args.r,
        seed=args.seed, threads=args.threads,
    )
    report = {"seed": args.seed, "version": __version__, **model.to_json()}
    _info(f"estimated optimal subsample size m0 = {model.m_hat}")
    _emit_json(report, args.output)
    return EXIT_OK


def cmd_density(args) -> int:
    data = ingest(args.input, args.column, args.jitter, args.seed)
    report, status = _select(data, args)
    if status != EXIT_OK:
        return status
    h = report["bandwidth"]
    lo = data.values[0] - 3.0 * h
    hi = data.values[-1] + 3.0 * h
    grid = np.linspace(lo, hi, 512)
    dens = kde_eval(data, h, grid)
    rows = [{"x": x, "density": d} for x, d in zip(grid, dens)]
    _emit_csv(["x", "density"], rows, args.output)
    return EXIT_OK


def cmd_sim(args) -> int:
    cfg_path = Path(args.input)
    if not cfg_path.is_file():
        raise DataError(f"no such config: {cfg_path}")
    try:
        obj = json.loads(cfg_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"bad JSON config: {exc}") from exc
    study = obj.get("study", "sampling")
    if study == "table1":
        rows = run_table1()
        _emit_csv(TABLE1_HEADER, rows, args.output)
        return EXIT_OK
    spec = StudySpec.from_json(obj)
    if study == "sampling":
        rows = run_sampling_study(spec, threads=args.threads)
        _emit_csv(SAMPLING_HEADER, rows, args.output)
    elif study == "ise":
        rows, summary = run_ise_study(spec, threads=args.threads)
        _emit_csv(ISE_HEADER, rows, args.output)
        _info(f"summary: {json.dumps({str(k): v for k, v in summary.items()})}")
    else:
        raise DomainError(f"unknown study type {study!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    n_list = [int(tok) for tok in args.input.split(",")] if args.input else [10_000]
    rows = run_timing_bench(
        n_list, m=args.m or 1000, n_resamples=args.N,
        seed=args.seed, threads=args.threads,
    )
    _emit_csv(BENCH_HEADER, rows, args.output)
    return EXIT_OK


def cmd_calibrate_rv(args) -> int:
    cal = calibrate_rv(seed=args.seed, replicates=args.N)
    report = {
        "r_v": cal.r_v,
        "a_hats": {str(m): a for m, a in sorted(cal.a_hats.items())},
        "seed": cal.seed,
        "replicates": cal.replicates,
        "d1_m_hat": cal.d1_m_hat,
        "d1_target": cal.d1_target,
        "d1_within_10pct": cal.d1_within_10pct,
        "version": __version__,
    }
    _emit_json(report, args.output)
    return EXIT_OK


_COMMANDS = {
    "select": cmd_select,
    "m0": cmd_m0,
    "density": cmd_density,
    "sim": cmd_sim,
    "bench": cmd_bench,
    "calibrate-rv": cmd_calibrate_rv,
}

_NEEDS_INPUT = {"select", "m0", "density", "sim"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bagcv",
        description="Bagged cross-validated bandwidth selection for kernel "
        "density estimation.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--input", help="data file, JSON study config (sim), "
                        "or comma-separated n list (bench)")
    parser.add_argument("--column", help="column name or zero-based index")
    parser.add_argument("--jitter", type=float, default=0.0,
                        help="half-width of uniform tie-breaking noise")
    parser.add_argument("--m", type=int, help="subsample size (default: estimated)")
    parser.add_argument("--N", type=int, default=100,
                        help="number of resamples (replicates for calibrate-rv)")
    parser.add_argument("--s", type=int, default=50, help="pilot subsample count")
    parser.add_argument("--r", type=int, help="pilot subsample size "
                        "(default max(500, n/100))")
    parser.add_argument("--nb", type=int, help="bin count for subsample CV "
                        "(default: exact, unbinned)")
    parser.add_argument("--lower", type=float, help="search interval lower bound")
    parser.add_argument("--upper", type=float, help="search interval upper bound")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--output", help="write machine output here instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in _NEEDS_INPUT and not args.input:
        parser.error(f"{args.command} requires --input")
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, ConfigError) as exc:
        _info(f"usage error: {exc}")
        return EXIT_USAGE
    except DataError as exc:
        _info(f"data error: {exc}")
        return EXIT_DATA
    except (NumericalError, FitError) as exc:
        _info(f"numerical failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
