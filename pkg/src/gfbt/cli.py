"""``gfbt`` command line: spectrum | sweep | simulate.

Exit codes: 0 success, 2 usage or input error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .bounds import (
    BoundPreconditionError,
    ChannelParams,
    sb_optimal_radius,
    sphere_bound,
    tangential_bound,
    tangential_sphere_bound,
    tsb_inner_radius,
    union_bound,
)
from .codes import CodeError, GeneratorMatrix, WeightEnumerator, canned_code, weight_enumerator
from .montecarlo import MAX_SIMULATION_K, simulate_fer
from .special import QuadratureError

BOUND_NAMES = ("union", "sb", "tb", "tsb")
COLUMNS = ("ebn0_db", "sigma", "union", "sb", "sb_r1", "tb", "tb_zstar", "tsb", "tsb_inner_r1")
MC_COLUMNS = ("mc_fer", "mc_ci95")
NA = "NA"

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepConfig:
    ebn0_start_db: float = 0.0
    ebn0_stop_db: float = 8.0
    ebn0_step_db: float = 1.0
    bounds_selected: tuple[str, ...] = BOUND_NAMES
    trials: int = 0
    seed: int = 1
    output_format: str = "csv"
    two_term: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.ebn0_step_db > 0:
            raise UsageError("--ebn0-step must be positive")
        if self.ebn0_start_db > self.ebn0_stop_db:
            raise UsageError("--ebn0-start must not exceed --ebn0-stop")
        if not self.bounds_selected:
            raise UsageError("select at least one bound")
        unknown = set(self.bounds_selected) - set(BOUND_NAMES)
        if unknown:
            raise UsageError(f"unknown bound(s): {', '.join(sorted(unknown))}")
        if self.trials < 0:
            raise UsageError("--trials must be >= 0")
        if self.output_format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")

    def grid(self) -> list[float]:
        count = int(math.floor((self.ebn0_stop_db - self.ebn0_start_db) / self.ebn0_step_db + 1e-9)) + 1
        return [round(self.ebn0_start_db + i * self.ebn0_step_db, 12) for i in range(count)]

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS + (MC_COLUMNS if self.trials > 0 else ())


@dataclass
class CodeInput:
    spectrum: WeightEnumerator
    generator: GeneratorMatrix | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        if self.spectrum.k is not None:
            return self.spectrum.k
        total = self.spectrum.total + 1
        if total & (total - 1) == 0:
            return total.bit_length() - 1
        raise UsageError("spectrum file does not record k and its size is not 2^k - 1")

    @property
    def rate(self) -> float:
        return self.k / self.spectrum.n


def load_code(args, need_generator: bool = False) -> CodeInput:
    if getattr(args, "spectrum_file", None):
        if need_generator:
            raise UsageError("this command needs a generator matrix (--code or --gen-file)")
        return CodeInput(WeightEnumerator.read(args.spectrum_file))
    if args.code:
        g = canned_code(args.code)
    elif args.gen_file:
        g = GeneratorMatrix.read(args.gen_file)
    else:
        raise UsageError("give one of --code, --gen-file, --spectrum-file")
    if need_generator:
        return CodeInput(WeightEnumerator(g.n, {}, g.k), g)
    return CodeInput(weight_enumerator(g), g)


def format_number(x) -> str:
    if x is None:
        return NA
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def evaluate_point(w: WeightEnumerator, rate: float, ebn0_db: float, selected, two_term: bool):
    """Evaluate the selected bounds at one grid point.

    Returns ``(row, failures)``: ``row`` maps column name to a float or
    ``None`` and ``failures`` maps bound name to the precondition message.
    """
    ch = ChannelParams.from_ebn0_db(ebn0_db, w.n, rate)
    row: dict = {c: None for c in COLUMNS}
    row["ebn0_db"] = ebn0_db
    row["sigma"] = ch.sigma
    failures = {}
    if "union" in selected:
        row["union"] = union_bound(w, ch)
    if "sb" in selected:
        try:
            res = sphere_bound(w, ch, two_term=two_term)
            row["sb"], row["sb_r1"] = res.value, sb_optimal_radius(w)
        except BoundPreconditionError as exc:
            failures["sb"] = str(exc)
    if "tb" in selected:
        try:
            res = tangential_bound(w, ch, two_term=two_term)
            row["tb"], row["tb_zstar"] = res.value, res.optimal_parameter
        except BoundPreconditionError as exc:
            failures["tb"] = str(exc)
    if "tsb" in selected:
        try:
            res = tangential_sphere_bound(w, ch, two_term=two_term)
            row["tsb"], row["tsb_inner_r1"] = res.value, tsb_inner_radius(w)
        except BoundPreconditionError as exc:
            failures["tsb"] = str(exc)
    return row, failures


def _evaluate_star(job):
    return evaluate_point(*job)


def sweep(code: CodeInput, config: SweepConfig) -> list[dict]:
    """Rows of the sweep table in grid order; ``None`` marks NA cells."""
    w = code.spectrum
    rate = code.rate
    if config.trials > 0:
        if code.generator is None:
            raise UsageError("simulation needs a generator matrix, not a spectrum file")
        if code.generator.k > MAX_SIMULATION_K:
            raise UsageError(f"simulation limited to k <= {MAX_SIMULATION_K}")
    jobs = [(w, rate, db, config.bounds_selected, config.two_term) for db in config.grid()]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_star, jobs))
    else:
        results = [_evaluate_star(job) for job in jobs]
    rows = []
    reported = set()
    for row, failures in results:
        for name, msg in failures.items():
            if name not in reported:
                code.warnings.append(f"warning: {name} set to {NA}: {msg}")
                reported.add(name)
        if config.trials > 0:
            est = simulate_fer(code.generator, row["sigma"], config.trials, config.seed,
                               workers=config.workers)
            row["mc_fer"], row["mc_ci95"] = est.fer, est.ci95_half_width
        rows.append(row)
    return rows


def render(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        def cell(v):
            return v if v is None or math.isfinite(v) else format_number(v)

        return json.dumps([{c: cell(row.get(c)) for c in columns} for row in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_spectrum(args, out=None) -> int:
    out = out or sys.stdout
    code = load_code(args)
    out.write(code.spectrum.to_json() + "\n")
    return 0


def cmd_sweep(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    selected = tuple(b.strip() for b in args.bounds.split(",") if b.strip())
    config = SweepConfig(
        args.ebn0_start, args.ebn0_stop, args.ebn0_step, selected,
        args.trials, args.seed, args.format, args.two_term, args.workers,
    )
    code = load_code(args)
    rows = sweep(code, config)
    for msg in code.warnings:
        print(msg, file=err)
    out.write(render(rows, config.columns, config.output_format))
    return 0


def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    code = load_code(args, need_generator=True)
    g = code.generator
    if g.k > MAX_SIMULATION_K:
        raise UsageError(f"k={g.k} exceeds the simulation budget (k <= {MAX_SIMULATION_K})")
    if args.sigma is not None:
        sigma = args.sigma
    elif args.ebn0 is not None:
        sigma = ChannelParams.from_ebn0_db(args.ebn0, g.n, g.rate).sigma
    else:
        raise UsageError("give --sigma or --ebn0")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    est = simulate_fer(g, sigma, args.trials, args.seed, workers=args.workers)
    out.write(json.dumps(est.to_dict()) + "\n")
    return 0


def _add_code_args(p: argparse.ArgumentParser, spectrum: bool = True):
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--code", metavar="NAME", help="canned code, e.g. hamming_7_4, golay_23_12, repetition_5")
    group.add_argument("--gen-file", metavar="PATH", help="generator matrix text file")
    if spectrum:
        group.add_argument("--spectrum-file", metavar="PATH", help="weight enumerator JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfbt",
        description="Gallager first-bound upper bounds on ML decoding error for binary linear codes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="print the weight enumerator as JSON")
    _add_code_args(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="tabulate bounds over an Eb/N0 grid")
    _add_code_args(p)
    p.add_argument("--ebn0-start", type=float, default=0.0, help="first Eb/N0 in dB")
    p.add_argument("--ebn0-stop", type=float, default=8.0, help="last Eb/N0 in dB")
    p.add_argument("--ebn0-step", type=float, default=1.0, help="grid step in dB")
    p.add_argument("--bounds", default=",".join(BOUND_NAMES), help="comma list from union,sb,tb,tsb")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per point (0: none)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--two-term", action="store_true",
                   help="evaluate the two-term form at the optimal parameter instead of the min-form")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo ML frame error rate")
    _add_code_args(p, spectrum=False)
    level = p.add_mutually_exclusive_group(required=True)
    level.add_argument("--sigma", type=float)
    level.add_argument("--ebn0", type=float, help="Eb/N0 in dB")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CodeError, BoundPreconditionError, OSError) as exc:
        print(f"gfbt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"gfbt: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
