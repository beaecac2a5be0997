"""Command-line interface.

Subcommands
-----------
``match``
    Read a CSV of scored rows, run a matching algorithm, emit matched pairs
    as CSV (columns treated_row_id, control_row_id, treated_score,
    control_score, distance) referring to the input's row ids.
``min-caliper``
    Find the smallest constant caliper reaching a target share of the
    possible pairs; prints ``caliper: <value>`` and ``pairs: <count>``.
``simulate``
    Run the Monte-Carlo comparison study and write ``summary.csv`` plus one
    CDF table per statistic into an output directory.

Input CSV format: a header row with columns ``id``, ``group``, ``score``
(header names case-insensitive, any column order). ``id`` values must be
unique; ``group`` is "treated" or "control" (case-insensitive); ``score``
must be a finite number. Rows may come in any order - sorting happens
internally and all output refers to the original ids.

Caliper spec file format (for ``--caliper-file``): ``key = value`` lines,
``#`` comments. Every file declares ``kind``; the remaining keys depend on it:

    kind = constant           kind = separable              kind = stepsum
    value = 0.02              g = 0.0:0.01, 1.0:0.51        f = -inf:0.01, 0.5:0.1
                              h = 0.0:0.0                   s = -inf:0.0

``g``/``h`` are piecewise-linear knots ``abscissa:value`` for the treated and
control side (slope magnitude <= 1 per piece); ``f``/``s`` are nondecreasing
nonnegative step tables ``threshold:value`` applying on [threshold, next).
Three annotated examples ship in the package's ``data/`` directory.

Exit codes: 0 success, 2 invalid input, 3 infeasible target.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calipers import Caliper, ConstantCaliper, StepSumCaliper, load_caliper_file
from .core import (
    InfeasibleTargetError,
    InputValidationError,
    MatchResult,
    MatchingError,
    ScoreSet,
    prepare_score_set,
)
from .maximal import (
    match_one_to_n,
    match_one_to_one,
    match_one_to_one_piecewise,
    min_constant_caliper,
)
from .nearest import (
    complete_match_max_cost,
    complete_match_min_cost,
    nn_match_sorted,
    nn_match_tree,
    rematch_by_rank,
)
from .simulate import STATISTICS, SimConfig, emit_cdf, run_simulation

__all__ = ["main", "run", "InputTable", "read_input_table"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3

MATCH_MODES = (
    "one-to-one",
    "one-to-n",
    "gnnm-sorted",
    "gnnm-tree",
    "complete",
    "anti-complete",
)

_REQUIRED_COLUMNS = ("id", "group", "score")


@dataclass(frozen=True)
class InputTable:
    """Parsed input rows: unique ids, treated flags, finite scores."""

    ids: tuple[str, ...]
    treated: np.ndarray
    scores: np.ndarray

    def to_score_set(self) -> ScoreSet:
        return prepare_score_set(self.scores[self.treated], self.scores[~self.treated])


def read_input_table(stream, source: str = "<input>") -> InputTable:
    """Parse the id/group/score CSV, naming the offending line on errors."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputValidationError(f"{source}: empty input, expected a header row")
    columns = [c.strip().lower() for c in header]
    missing = [c for c in _REQUIRED_COLUMNS if c not in columns]
    if missing:
        raise InputValidationError(
            f"{source}: header is missing column(s) {missing}; "
            f"expected columns {list(_REQUIRED_COLUMNS)}"
        )
    idx = {c: columns.index(c) for c in _REQUIRED_COLUMNS}

    ids: list[str] = []
    treated: list[bool] = []
    scores: list[float] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(columns):
            raise InputValidationError(
                f"{source} line {lineno}: expected {len(columns)} fields, got {len(row)}"
            )
        row_id = row[idx["id"]].strip()
        if not row_id:
            raise InputValidationError(f"{source} line {lineno}: empty id")
        if row_id in seen:
            raise InputValidationError(f"{source} line {lineno}: duplicate id {row_id!r}")
        seen.add(row_id)
        group = row[idx["group"]].strip().lower()
        if group == "treated":
            treated.append(True)
        elif group == "control":
            treated.append(False)
        else:
            raise InputValidationError(
                f"{source} line {lineno}: group must be treated or control, "
                f"got {row[idx['group']]!r}"
            )
        raw_score = row[idx["score"]].strip()
        try:
            score = float(raw_score)
        except ValueError:
            raise InputValidationError(
                f"{source} line {lineno}: score is not a number: {raw_score!r}"
            )
        if not np.isfinite(score):
            raise InputValidationError(
                f"{source} line {lineno}: score is not finite: {raw_score!r}"
            )
        ids.append(row_id)
        scores.append(score)
    return InputTable(
        ids=tuple(ids),
        treated=np.array(treated, dtype=bool),
        scores=np.array(scores, dtype=float),
    )


def _load_table(path: str) -> InputTable:
    if path == "-":
        return read_input_table(sys.stdin, "<stdin>")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_input_table(fh, path)


def _resolve_caliper(args, parser: argparse.ArgumentParser) -> Caliper | None:
    has_file = getattr(args, "caliper_file", None)
    has_value = getattr(args, "caliper", None) is not None
    if has_file and has_value:
        parser.error("pass either --caliper or --caliper-file, not both")
    if has_file:
        return load_caliper_file(args.caliper_file)
    if has_value:
        return ConstantCaliper(args.caliper)
    return None


def _dispatch_match(
    scores: ScoreSet, caliper: Caliper | None, args, parser
) -> MatchResult:
    mode = args.mode
    if mode in ("complete", "anti-complete"):
        if args.rematch and mode == "anti-complete":
            parser.error("--rematch would undo anti-complete; omit one of them")
        result = (
            complete_match_min_cost(scores)
            if mode == "complete"
            else complete_match_max_cost(scores)
        )
        if args.rematch:
            # complete output is already rank-aligned; this is a no-op
            result = rematch_by_rank(result, scores, ConstantCaliper(np.inf))
        return result
    if caliper is None:
        parser.error(f"mode {mode} requires --caliper or --caliper-file")
    if mode == "one-to-one":
        if isinstance(caliper, StepSumCaliper):
            result = match_one_to_one_piecewise(scores, caliper)
        else:
            result = match_one_to_one(scores, caliper)
    elif mode == "one-to-n":
        if args.rematch:
            parser.error("--rematch applies to one-to-one matchings only")
        return match_one_to_n(scores, caliper, args.n)
    elif mode == "gnnm-sorted":
        result = nn_match_sorted(scores, caliper)
    elif mode == "gnnm-tree":
        result = nn_match_tree(
            scores, caliper, order=args.order, random_state=args.seed
        )
    else:  # pragma: no cover - argparse restricts choices
        parser.error(f"unknown mode {mode!r}")
    if args.rematch:
        result = rematch_by_rank(result, scores, caliper)
    return result


def _write_pairs(table: InputTable, scores: ScoreSet, result: MatchResult, out) -> None:
    treated_rows = np.flatnonzero(table.treated)
    control_rows = np.flatnonzero(~table.treated)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["treated_row_id", "control_row_id", "treated_score", "control_score", "distance"]
    )
    for m in range(result.pair_count):
        ti = int(result.treated_indices[m])
        ci = int(result.control_indices[m])
        t_row = int(treated_rows[scores.treated_perm[ti]])
        c_row = int(control_rows[scores.control_perm[ci]])
        writer.writerow(
            [
                table.ids[t_row],
                table.ids[c_row],
                repr(float(scores.treated_scores[ti])),
                repr(float(scores.control_scores[ci])),
                repr(float(result.distances[m])),
            ]
        )


def _cmd_match(args, parser) -> int:
    table = _load_table(args.input)
    caliper = _resolve_caliper(args, parser)
    scores = table.to_score_set()
    result = _dispatch_match(scores, caliper, args, parser)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            _write_pairs(table, scores, result, fh)
    else:
        _write_pairs(table, scores, result, sys.stdout)
    return EXIT_OK


def _cmd_min_caliper(args, parser) -> int:
    table = _load_table(args.input)
    scores = table.to_score_set()
    width = min_constant_caliper(scores, args.target_fraction, args.iterations)
    achieved = match_one_to_one(scores, ConstantCaliper(width)).pair_count
    print(f"caliper: {width!r}")
    print(f"pairs: {achieved}")
    return EXIT_OK


def _cmd_simulate(args, parser) -> int:
    config = SimConfig(
        group_size=args.group_size,
        caliper_maximal=args.caliper_maximal,
        caliper_greedy=args.caliper_greedy,
        replications=args.replications,
        seed=args.seed,
        greedy_order=args.greedy_order,
    )
    summary = run_simulation(config)
    out_dir = Path(args.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["algorithm", "mean_pairs", "mean_max_distance", "mean_avg_distance"]
            )
            for name in ("maximal", "greedy", "greedy_rematched"):
                stats = summary.algorithm(name)
                writer.writerow(
                    [
                        name,
                        repr(stats.mean_pairs),
                        repr(stats.mean_max_distance),
                        repr(stats.mean_avg_distance),
                    ]
                )
        for statistic in STATISTICS:
            emit_cdf(summary, statistic, out_dir / f"cdf_{statistic}.csv")
    except OSError as exc:
        raise InputValidationError(f"cannot write to {out_dir}: {exc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calipermatch",
        description="Caliper matching of treated and control groups on a scalar score.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="match a CSV of scored rows")
    p_match.add_argument("input", help="input CSV path, or - for stdin")
    p_match.add_argument(
        "--mode", choices=MATCH_MODES, default="one-to-one",
        help="matching algorithm (default one-to-one)",
    )
    p_match.add_argument(
        "--caliper", type=float, default=None, metavar="WIDTH",
        help="constant caliper width",
    )
    p_match.add_argument(
        "--caliper-file", default=None, metavar="PATH",
        help="caliper spec file (see --help header for the grammar)",
    )
    p_match.add_argument(
        "--n", type=int, default=1, metavar="N",
        help="controls per treated object for mode one-to-n (default 1)",
    )
    p_match.add_argument(
        "--order", choices=("given", "sorted", "random"), default="given",
        help="treated processing order for mode gnnm-tree (default given)",
    )
    p_match.add_argument(
        "--seed", type=int, default=None,
        help="seed for --order random",
    )
    p_match.add_argument(
        "--rematch", action="store_true",
        help="re-pair the matched rows by score rank afterwards",
    )
    p_match.add_argument("--output", default=None, help="output CSV path (default stdout)")
    p_match.set_defaults(func=_cmd_match)

    p_min = sub.add_parser(
        "min-caliper", help="smallest constant caliper reaching a pair-count target"
    )
    p_min.add_argument("input", help="input CSV path, or - for stdin")
    p_min.add_argument(
        "--target-fraction", type=float, required=True, metavar="Q",
        help="required share of min(#treated, #control) pairs, in (0, 1]",
    )
    p_min.add_argument(
        "--iterations", type=int, default=20,
        help="bisection steps; bracket width is range * 2**-iterations (default 20)",
    )
    p_min.set_defaults(func=_cmd_min_caliper)

    p_sim = sub.add_parser("simulate", help="run the Monte-Carlo comparison study")
    p_sim.add_argument("--group-size", type=int, required=True)
    p_sim.add_argument("--caliper-maximal", type=float, required=True)
    p_sim.add_argument("--caliper-greedy", type=float, required=True)
    p_sim.add_argument("--replications", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument(
        "--greedy-order", choices=("sorted", "given", "random"), default="given",
        help="treated processing order for the greedy matcher (default given, "
        "i.e. the i.i.d. draw order)",
    )
    p_sim.add_argument("--output-dir", required=True)
    p_sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except InfeasibleTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MatchingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run() -> None:  # pragma: no cover - console-script shim
    sys.exit(main())
