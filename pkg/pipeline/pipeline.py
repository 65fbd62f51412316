"""
pipeline.py

Command-line entry point.

Subcommands:
- cdf        CDF table of the maximal height or of the LOE top eigenvalue
- verify     full identity suite (exit 0 iff every check passes)
- mc-loe     LOE sampler against loe_cdf (KS distance)
- mc-bridges Hermitian-bridge maxima against loe_cdf(N, 2r^2) (KS distance)
- tw-limit   finite-N laws against the GOE Tracy-Widom limit

Exit codes: 0 success, 1 failed checks, 2 argument errors, 3 numeric
trouble. Data goes to stdout or --output; status lines go to stderr.
"""

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from config.settings import (
    BRIDGE_KS_THRESHOLD,
    DEFAULT_MC_SAMPLES,
    DEFAULT_PATH_STEPS,
    DEFAULT_R_SET,
    DEFAULT_SEED,
    DEFAULT_VERIFY_N_MAX,
    FREDHOLM_ORDER,
    LOE_KS_THRESHOLD,
    TW_GRID,
    TW_MATCHED_TOLERANCE,
    TW_N_LIST,
)
from model.errors import ArgumentError, NumericError
from model.fredholm import tw_limit_compare
from model.kernelmat import CDF_KINDS, cdf_table, loe_cdf
from model.montecarlo import (
    PathGrid,
    SampleSummary,
    ks_statistic,
    sample_bridges,
    sample_loe,
)
from model.verify import (
    VerificationCheck,
    VerificationReport,
    make_report,
    verify_all,
)
from pipeline.writers import FORMATS, emit, serialize

# -------------------- PIPELINE CONFIG --------------------

SUBCOMMANDS = ("cdf", "verify", "mc-loe", "mc-bridges", "tw-limit")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

MIN_MC_SAMPLES = 10


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation depends on."""

    subcommand: str
    N_list: Tuple[int, ...]
    grid: Optional[Tuple[float, float, int]] = None
    samples: int = DEFAULT_MC_SAMPLES
    seed: int = DEFAULT_SEED
    quad_order: int = FREDHOLM_ORDER
    output: str = "-"
    fmt: str = "csv"
    kind: str = "maxheight"
    r_set: Tuple[float, ...] = DEFAULT_R_SET
    ks_threshold: float = LOE_KS_THRESHOLD
    steps: int = DEFAULT_PATH_STEPS
    grid_kind: str = "s"
    crossing: bool = True
    workers: Optional[int] = None
    informational: bool = True
    quiet: bool = False

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ArgumentError(f"Unknown subcommand: {self.subcommand}")
        if self.fmt not in FORMATS:
            raise ArgumentError(f"Unknown format: {self.fmt}")
        if not self.N_list or any(N < 1 for N in self.N_list):
            raise ArgumentError("N must be a positive integer")
        if self.grid is not None and self.grid[2] < 2:
            raise ArgumentError("grid needs steps >= 2")
        if self.subcommand.startswith("mc-") and self.samples < MIN_MC_SAMPLES:
            raise ArgumentError(f"Monte Carlo runs need --samples >= {MIN_MC_SAMPLES}")
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError("seed must be a 64-bit unsigned integer")

    @property
    def N(self) -> int:
        return self.N_list[0]

    @property
    def grid_points(self) -> np.ndarray:
        lo, hi, steps = self.grid
        return np.linspace(lo, hi, steps)


# -------------------- PARSING HELPERS --------------------

def parse_grid(text: str) -> Tuple[float, float, int]:
    """
    Parse "min:max:steps" (inclusive endpoints).

    Examples:
        "0.25:3:12" -> (0.25, 3.0, 12)
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ArgumentError(f"grid must be min:max:steps, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise ArgumentError(f"grid must be min:max:steps, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ArgumentError(f"grid needs finite min < max, got {text!r}")
    if steps < 2:
        raise ArgumentError(f"grid needs steps >= 2, got {steps}")
    return lo, hi, steps


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ArgumentError(f"expected comma-separated integers, got {text!r}") from None


def parse_float_list(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ArgumentError("empty list")
    return values


def parse_seed(text: str) -> int:
    """Decimal or 0x-prefixed hexadecimal seed."""
    try:
        return int(text, 0)
    except ValueError:
        raise ArgumentError(f"seed must be an integer, got {text!r}") from None


# -------------------- PIPELINE STEPS --------------------

def status(config: RunConfig, message: str) -> None:
    if not config.quiet:
        print(message, file=sys.stderr)


def run_cdf(config: RunConfig) -> Tuple[object, int]:
    status(config, f"🔍 Tabulating {config.kind} CDF for N={config.N}")
    table = cdf_table(config.kind, config.N, config.grid_points)
    return table, EXIT_OK


def run_verify(config: RunConfig) -> Tuple[object, int]:
    n_max = max(config.N_list)
    status(config, f"🔍 Running identity suite up to N={n_max}, r in {list(config.r_set)}")
    report = verify_all(n_max, config.r_set, config.seed, config.informational)
    for check in report.failures:
        status(config, f"❌ {check.name}: err={check.max_err:.3e} > tol={check.tol:.1e}")
    return report, EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _ks_report(
    suite: str,
    summary: SampleSummary,
    cdf: Callable[[float], float],
    anchor: str,
    config: RunConfig,
) -> Tuple[VerificationReport, int]:
    ks = ks_statistic(summary, cdf)
    check = VerificationCheck(
        f"ks[{summary.label},n={summary.n}]",
        anchor,
        {"N": config.N, "n": summary.n, "seed": config.seed},
        ks,
        config.ks_threshold,
    )
    status(config, f"{'✅' if check.passed else '❌'} KS = {ks:.5f} (threshold {config.ks_threshold})")
    report = make_report(suite, [check], config.seed)
    return report, EXIT_OK if report.passed else EXIT_CHECK_FAILED


def run_mc_loe(config: RunConfig) -> Tuple[object, int]:
    status(config, f"🎲 Sampling {config.samples} LOE matrices, N={config.N}, seed={config.seed:#x}")
    summary = sample_loe(config.N, config.samples, config.seed, config.workers)
    return _ks_report(
        "mc-loe", summary, lambda s: loe_cdf(config.N, s),
        "sup |F_emp - F_LOE,N| for lambda_max(X^T X)", config,
    )


def bridge_grid(config: RunConfig) -> PathGrid:
    if config.grid_kind == "t":
        return PathGrid.uniform_in_t(config.steps, config.crossing)
    return PathGrid.uniform_in_s(config.steps, crossing=config.crossing)


def run_mc_bridges(config: RunConfig) -> Tuple[object, int]:
    status(
        config,
        f"🎲 Sampling {config.samples} Hermitian bridges, N={config.N}, K={config.steps}, "
        f"seed={config.seed:#x}",
    )
    summary = sample_bridges(
        config.N, config.samples, config.seed, bridge_grid(config),
        config.workers, scale=math.sqrt(2.0),
    )
    return _ks_report(
        "mc-bridges", summary, lambda r: loe_cdf(config.N, 2.0 * r * r) if r > 0 else 0.0,
        "sup |F_emp - F_LOE,N(2 r^2)| for max_t sqrt(2) B_N(t)", config,
    )


def run_tw_limit(config: RunConfig) -> Tuple[object, int]:
    status(config, f"🔍 Comparing N in {list(config.N_list)} with the GOE Tracy-Widom limit")
    comparison = tw_limit_compare(config.N_list, config.grid_points, config.quad_order)
    code = EXIT_OK
    for N in comparison.N_list:
        status(config, f"   N={N}: sup error {comparison.errors[N]:.4e}")
        if comparison.matched_diff[N] > TW_MATCHED_TOLERANCE:
            status(config, f"❌ N={N}: scalings disagree by {comparison.matched_diff[N]:.3e}")
            code = EXIT_CHECK_FAILED
    return comparison, code


STEPS = {
    "cdf": run_cdf,
    "verify": run_verify,
    "mc-loe": run_mc_loe,
    "mc-bridges": run_mc_bridges,
    "tw-limit": run_tw_limit,
}


# -------------------- ARGUMENTS --------------------

def build_parser() -> argparse.ArgumentParser:
    """
    Argument grammar for every subcommand.
    """
    parser = argparse.ArgumentParser(
        prog="bridge-loe",
        description="Maximal height of non-intersecting Brownian bridges and the LOE top eigenvalue",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, fmt: str) -> None:
        p.add_argument("--format", choices=FORMATS, default=fmt, help="Output format")
        p.add_argument("--output", default="-", help="Output file ('-' for stdout)")
        p.add_argument("--quiet", action="store_true", help="No status lines on stderr")

    def monte_carlo(p: argparse.ArgumentParser, threshold: float) -> None:
        p.add_argument("--n", type=int, required=True, help="Matrix size / number of bridges")
        p.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES, help="Sample count (>= 10)")
        p.add_argument("--seed", default=hex(DEFAULT_SEED), help="Master seed")
        p.add_argument("--ks-threshold", type=float, default=threshold, help="Pass if KS is below this")
        p.add_argument("--workers", type=int, default=None, help="Worker processes (default BRIDGE_LOE_THREADS)")

    p = sub.add_parser("cdf", help="Tabulate a CDF")
    p.add_argument("--kind", choices=CDF_KINDS, default="maxheight")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", required=True, help="min:max:steps, endpoints included")
    common(p, "csv")

    p = sub.add_parser("verify", help="Run the identity suite")
    p.add_argument("--n-max", type=int, default=DEFAULT_VERIFY_N_MAX)
    p.add_argument("--r", default=",".join(f"{r:g}" for r in DEFAULT_R_SET), help="Comma-separated r values")
    p.add_argument("--seed", default="0")
    p.add_argument("--no-informational", action="store_true", help="Leave out the informational entries")
    common(p, "json")

    p = sub.add_parser("mc-loe", help="LOE sampler vs exact CDF")
    monte_carlo(p, LOE_KS_THRESHOLD)
    common(p, "json")

    p = sub.add_parser("mc-bridges", help="Bridge maxima vs exact CDF")
    monte_carlo(p, BRIDGE_KS_THRESHOLD)
    p.add_argument("--steps", type=int, default=DEFAULT_PATH_STEPS, help="Grid steps K")
    p.add_argument("--grid-kind", choices=("s", "t"), default="s", help="Uniform in s or in t")
    p.add_argument("--no-crossing-correction", action="store_true")
    common(p, "json")

    p = sub.add_parser("tw-limit", help="Finite N vs Tracy-Widom GOE")
    p.add_argument("--n", default=",".join(str(N) for N in TW_N_LIST), help="Comma-separated N values")
    p.add_argument("--grid", default=TW_GRID, help="min:max:steps for s")
    p.add_argument("--quad-order", type=int, default=FREDHOLM_ORDER)
    common(p, "csv")

    return parser


def parse_arguments(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Parse command-line arguments into a RunConfig.

    Raises:
        SystemExit: On argparse usage errors (code 2)
        ArgumentError: On values argparse accepts but the run cannot
    """
    args = build_parser().parse_args(argv)
    base = dict(
        subcommand=args.subcommand,
        output=args.output,
        fmt=args.format,
        quiet=args.quiet,
    )

    if args.subcommand == "cdf":
        return RunConfig(N_list=(args.n,), grid=parse_grid(args.grid), kind=args.kind, **base)

    if args.subcommand == "verify":
        return RunConfig(
            N_list=(args.n_max,),
            r_set=parse_float_list(args.r),
            seed=parse_seed(args.seed),
            informational=not args.no_informational,
            **base,
        )

    if args.subcommand == "tw-limit":
        return RunConfig(
            N_list=parse_int_list(args.n),
            grid=parse_grid(args.grid),
            quad_order=args.quad_order,
            **base,
        )

    extra = {}
    if args.subcommand == "mc-bridges":
        extra = dict(
            steps=args.steps,
            grid_kind=args.grid_kind,
            crossing=not args.no_crossing_correction,
        )
    return RunConfig(
        N_list=(args.n,),
        samples=args.samples,
        seed=parse_seed(args.seed),
        ks_threshold=args.ks_threshold,
        workers=args.workers,
        **extra,
        **base,
    )


# -------------------- MAIN --------------------

def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one CLI invocation.

    Args:
        argv (Sequence[str], optional): Arguments without the program name

    Returns:
        int: Exit code 0 / 1 / 2 / 3
    """
    try:
        config = parse_arguments(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ArgumentError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        result, code = STEPS[config.subcommand](config)
        written = emit(serialize(result, config.fmt), config.output)
    except ArgumentError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"❌ Numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if written is not None:
        status(config, f"📁 Wrote {written}")
    if code == EXIT_OK:
        status(config, "✅ Done")
    return code


def main() -> None:
    """
    CLI entry point.
    """
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""
Run this from the Main Project Folder

python -m pipeline.pipeline cdf --kind maxheight --n 1 --grid 0.25:3:12
python -m pipeline.pipeline verify --n-max 8 --r 0.5,1,2 --format json
python -m pipeline.pipeline mc-loe --n 1 --samples 10000 --seed 7 --ks-threshold 0.02
python -m pipeline.pipeline mc-bridges --n 2 --samples 20000 --steps 2000
python -m pipeline.pipeline tw-limit --n 8,16,32 --grid=-4:2:25 --output tw.csv
"""
