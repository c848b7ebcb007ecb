"""``rankdyn`` command line.

Exit status: 0 on success, 1 for invalid input or arguments, 2 when the
input is valid but the computation is undefined.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Any, Callable, Sequence

from . import arwu, io, ranking, scoring
from .analysis import (
    correlation_matrix,
    difference_series,
    pca_from_correlation,
    regressiveness_report,
)
from .arwu import RAW_INDICATORS, Indicator, Mode
from .errors import ComputationError, InputError, RankDynError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_COMPUTATION = 2


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default; bad arguments are input errors here.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        _diagnose(f"{self.prog}: {message}")
        raise SystemExit(EXIT_INPUT)


def _diagnose(message: str) -> None:
    color = sys.stderr.isatty() and not os.environ.get("RANKDYN_NO_COLOR")
    label = "\033[31merror\033[0m" if color else "error"
    print(f"rankdyn: {label}: {message}", file=sys.stderr)


def _exclusive(flag_a: str, flag_b: str, present_a: bool, present_b: bool) -> None:
    if present_a and present_b:
        raise UsageError(f"{flag_a} and {flag_b} are mutually exclusive")


def _scope(text: str) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition("-")
        bounds = (int(lo), int(hi) if hi else int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rank range '{text}' (expected e.g. 151-500)") from None
    if bounds[0] < 1 or bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"invalid rank range '{text}'")
    return bounds


def _weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(w) for w in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid weight list '{text}'") from None


# --- subcommands --------------------------------------------------------


def _score_table_output(table: arwu.ScoreTable, fmt: str) -> str:
    columns = [ind.column for ind in Indicator]
    if fmt == "json":
        doc = {
            "mode": table.mode.value,
            "gains": io.gainset_to_dict(table.gains) if table.gains else None,
            "rows": [
                {
                    "id": row.id,
                    "scores": dict(zip(columns, row.indicator_scores)),
                    "total": row.total,
                    "rank": row.rank,
                    "band": row.band,
                }
                for row in table.rows
            ],
        }
        return io.render_json(doc)
    header = ["id", *columns, "total", "rank", "band"]
    rows = [[r.id, *r.indicator_scores, r.total, r.rank, r.band] for r in table.rows]
    return io.render_csv(header, rows)


def cmd_score(args: argparse.Namespace) -> str:
    annual = args.mode == Mode.ANNUAL.value
    _exclusive("--mode annual", "--gains", annual, args.gains is not None)
    _exclusive("--mode fixed", "--k", not annual, args.k is not None)
    dataset = io.ingest_dataset(args.data)
    band = args.band_width or None
    if annual:
        table = arwu.score_annual(dataset, k=args.k, band_width=band)
    else:
        gains = io.load_gainset(args.gains) if args.gains else arwu.GainSet()
        table = arwu.score_fixed_gain(dataset, gains, band_width=band)
    return _score_table_output(table, args.format)


def cmd_invert(args: argparse.Namespace) -> str:
    published = io.ingest_published(args.published)
    gains = io.load_gainset(args.gains) if args.gains else None
    rows: list[list[Any]] = []
    for ident in sorted(published):
        scores = published[ident]
        for ind in Indicator:
            if ind.column not in scores:
                continue
            s = scores[ind.column]
            gain = gains.gain(ind) if gains else None
            try:
                raw, lo, hi = arwu.invert_with_error(s, gain, args.half_width)
            except InputError as exc:
                raise InputError(f"id '{ident}', {ind.column}: {exc}") from None
            rows.append([ident, ind.column, s, raw, lo, hi])
    if args.format == "json":
        keys = ("id", "indicator", "score", "raw", "raw_low", "raw_high")
        doc = {
            "scale": "raw_with_gain" if gains else "scaled10000",
            "half_width": args.half_width,
            "rows": [dict(zip(keys, r)) for r in rows],
        }
        return io.render_json(doc)
    return io.render_csv(["id", "indicator", "score", "raw", "raw_low", "raw_high"], rows)


def cmd_rank_driven(args: argparse.Namespace) -> str:
    _exclusive("--method kam-remodeled", "--population", args.method == "kam-remodeled", args.population is not None)
    _exclusive("--gains", "--k", args.gains is not None, args.k is not None)
    dataset = io.ingest_dataset(args.data)
    ids = [rec.id for rec in dataset]
    weights = args.weights or arwu.STANDARD_WEIGHTS
    expected = 5 if args.pcp == "exclude" else 6
    if len(weights) != expected:
        raise UsageError(f"--weights needs {expected} values with --pcp {args.pcp}, got {len(weights)}")

    def normalise(values: Sequence[float]) -> ranking.KamResult:
        if args.method == "kam":
            population = args.population if args.population is not None else 500
            return ranking.kam_scores(values, population, ids)
        return ranking.kam_remodeled(values, ids)

    tables: list[ranking.ScoreTableLike] = []
    for ind in RAW_INDICATORS:
        tables.append(normalise([rec.effective_raw()[ind - 1] for rec in dataset]))
    if args.pcp != "exclude":
        if args.gains:
            scored = arwu.score_fixed_gain(dataset, io.load_gainset(args.gains))
        else:
            scored = arwu.score_annual(dataset, k=args.k)
        pcp = {row.id: row.indicator_scores[Indicator.PCP - 1] for row in scored.rows}
        if args.pcp == "kam":
            tables.append(normalise([pcp[i] for i in ids]))
        else:
            # 0-100 score brought onto the 0-10 KAM scale.
            tables.append({i: pcp[i] / 10.0 for i in ids})
    ranked = ranking.aggregate_rank_driven(tables, weights)
    if args.format == "json":
        doc = {
            "method": args.method,
            "pcp": args.pcp,
            "weights": list(weights),
            "rows": [{"id": e.id, "score": e.score, "rank": e.rank} for e in ranked],
        }
        return io.render_json(doc)
    return io.render_csv(["id", "score", "rank"], [[e.id, e.score, e.rank] for e in ranked])


def cmd_compare(args: argparse.Namespace) -> str:
    result = ranking.compare_rankings(io.read_ranking_csv(args.a), io.read_ranking_csv(args.b), args.scope)
    rows = [[k, result.rank_a[k], result.rank_b[k], s] for k, s in result.shifts.items()]
    if args.format == "json":
        doc = {
            "scope": list(args.scope) if args.scope else None,
            "mean_abs_shift": result.mean_abs_shift,
            "max_abs_shift": result.max_abs_shift,
            "rows": [dict(zip(("id", "rank_a", "rank_b", "shift"), r)) for r in rows],
        }
        return io.render_json(doc)
    print(
        f"mean_abs_shift={io.fmt_float(result.mean_abs_shift)} max_abs_shift={result.max_abs_shift}",
        file=sys.stderr,
    )
    return io.render_csv(["id", "rank_a", "rank_b", "shift"], rows)


def cmd_analyze_pca(args: argparse.Namespace) -> str:
    if args.matrix:
        matrix = io.load_correlation_csv(args.matrix, args.n)
    else:
        _exclusive("--data", "--n", True, args.n is not None)
        dataset = io.ingest_dataset(args.data)
        columns = {ind.column: [rec.effective_raw()[ind - 1] for rec in dataset] for ind in RAW_INDICATORS}
        matrix = correlation_matrix(columns)
    report = pca_from_correlation(matrix)
    if args.format == "json":
        return io.render_json(report.to_dict())
    rows = [
        [j + 1, report.eigenvalues[j], report.pct_variance[j], report.cumulative_pct[j]]
        for j in range(len(report.eigenvalues))
    ]
    return io.render_csv(["component", "eigenvalue", "pct", "cum_pct"], rows)


def _read_values(path: str) -> list[float]:
    values = []
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            for lineno, row in enumerate(csv.reader(handle), start=1):
                if not row or not row[0].strip():
                    continue
                try:
                    values.append(float(row[0]))
                except ValueError:
                    if lineno == 1:
                        continue  # header
                    raise InputError(f"{path}: row {lineno}: malformed number '{row[0]}'") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    return values


def cmd_analyze_regressiveness(args: argparse.Namespace) -> str:
    _exclusive("--values", "--indicator", args.values is not None, args.indicator is not None)
    if args.data:
        if args.indicator is None:
            raise UsageError("--data requires --indicator")
        ind = Indicator.from_column(args.indicator)
        if ind is Indicator.PCP:
            raise UsageError("regressiveness applies to the raw indicators alumni, award, hici, ns, pub")
        values = [rec.effective_raw()[ind - 1] for rec in io.ingest_dataset(args.data)]
    else:
        values = _read_values(args.values)
    series = difference_series(values)
    pairs = regressiveness_report(values, drop_top=args.drop_top, rescale=args.rescale)
    if args.format == "json":
        doc = {
            "sorted_scores": list(series.sorted_scores),
            "ds": list(series.ds),
            "regressiveness_index": series.regressiveness_index,
            "series": [{"n": n, "ds": d} for n, d in pairs],
        }
        return io.render_json(doc)
    return io.render_csv(["n", "ds"], pairs)


def cmd_event_set(args: argparse.Namespace) -> str:
    event_set = scoring.load_event_set(args.config)
    names = [e.name or f"e{i + 1}" for i, e in enumerate(event_set.elements)]
    results = []
    try:
        handle = open(args.marks, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{args.marks}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[0].strip() != "id":
            raise InputError(f"{args.marks}: first column must be 'id'")
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            marks = []
            for col, cell in zip(header[1:], row[1:]):
                try:
                    marks.append(float(cell))
                except ValueError:
                    raise InputError(f"{args.marks}: row {line}, column '{col}': malformed number '{cell}'") from None
            if len(marks) != len(event_set.elements):
                raise InputError(
                    f"{args.marks}: row {line}: {len(marks)} marks for {len(event_set.elements)} elements"
                )
            points = [scoring.transform_mark(e, m) for e, m in zip(event_set.elements, marks)]
            if event_set.rounding is scoring.Rounding.NEAREST:
                points = [scoring.round_half_away(p) for p in points]
            results.append((row[0].strip(), points, scoring.score_event_set(event_set, marks)))
    if args.format == "json":
        doc = {
            "rounding": event_set.rounding.value,
            "rows": [{"id": i, "points": dict(zip(names, p)), "total": t} for i, p, t in results],
        }
        return io.render_json(doc)
    return io.render_csv(["id", *names, "total"], [[i, *p, t] for i, p, t in results])


# --- parser ---------------------------------------------------------------

_CONTEXT = {
    "score": "arwu-engine",
    "invert": "arwu-engine/invert_published",
    "rank-driven": "rank-aggregation",
    "compare": "rank-aggregation/compare_rankings",
    "analyze-pca": "indicator-analysis/pca_from_correlation",
    "analyze-regressiveness": "indicator-analysis/difference_series",
    "event-set": "scoring-pipeline/score_event_set",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankdyn", description="Score-driven and rank-driven ranking dynamics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, func: Callable[[argparse.Namespace], str], help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        return p

    p = command("score", cmd_score, "Score an institution CSV in annual or fixed-gain mode.")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", choices=("annual", "fixed"), default="annual")
    p.add_argument("--gains", help="gain set JSON (fixed mode; default: built-in fixed gains)")
    p.add_argument("--k", type=float, help="PCP parameter K for institutions without FTE (annual mode)")
    p.add_argument("--band-width", type=int, default=50, help="band size for ranks 101-500; 0 disables")

    p = command("invert", cmd_invert, "Recover raw scores from published indicator scores.")
    p.add_argument("--published", required=True)
    p.add_argument("--gains", help="gain set JSON; without it raws are on the scaled 0-10000 scale")
    p.add_argument("--half-width", type=float, default=0.05, help="score uncertainty (default 0.05)")

    p = command("rank-driven", cmd_rank_driven, "Aggregate KAM-normalised indicator ranks.")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("kam", "kam-remodeled"), default="kam")
    p.add_argument("--population", type=int, help="KAM population (default 500)")
    p.add_argument(
        "--pcp",
        choices=("kam", "pass-through", "exclude"),
        required=True,
        help="how PCP enters: KAM-normalised, its score passed through (/10), or left out",
    )
    p.add_argument("--weights", type=_weights, help="comma-separated indicator weights")
    p.add_argument("--k", type=float, help="K for PCP of institutions without FTE (annual PCP)")
    p.add_argument("--gains", help="take PCP from fixed-gain scoring with this gain set")

    p = command("compare", cmd_compare, "Rank shifts between two ranking CSVs (id,rank).")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--scope", type=_scope, help="rank range on --a, e.g. 151-500")

    p = command("analyze-pca", cmd_analyze_pca, "PCA, KMO and Bartlett on a correlation matrix.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="square correlation CSV")
    src.add_argument("--data", help="institution CSV; correlations computed from raw indicators")
    p.add_argument("--n", type=int, help="sample size behind --matrix")

    p = command("analyze-regressiveness", cmd_analyze_regressiveness, "Adjacent-rank difference function.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="institution CSV")
    src.add_argument("--values", help="file with one score per line")
    p.add_argument("--indicator", help="raw indicator column with --data")
    p.add_argument("--drop-top", action="store_true", help="omit the top-ranked institution")
    p.add_argument("--rescale", action="store_true", help="rescale gaps to a maximum of 1")

    p = command("event-set", cmd_event_set, "Score marks against an event-set config.")
    p.add_argument("--config", required=True)
    p.add_argument("--marks", required=True, help="CSV: id then one column per element")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    context = _CONTEXT.get(args.command, args.command)
    try:
        text = args.func(args)
        io.write_output(text, args.out)
    except InputError as exc:
        _diagnose(f"{args.command} [{context}]: {exc}")
        return EXIT_INPUT
    except ComputationError as exc:
        _diagnose(f"{args.command} [{context}]: {exc}")
        return EXIT_COMPUTATION
    except RankDynError as exc:
        _diagnose(f"{args.command} [{context}]: {exc}")
        return EXIT_COMPUTATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
