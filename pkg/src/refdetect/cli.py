"""Command-line entry point: ``refdetect detect|evaluate|calibrate``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import repo_io
from .evaluation import (
    DEFAULT_GRID,
    MalformedOracle,
    OracleEntry,
    UncoveredType,
    calibrate_all,
    parse_grid,
    precision_recall,
    read_oracle,
)
from .pipeline import PreparedPair
from .thresholds import REPORTED_TYPES, RelationshipType, ThresholdConfig, parse_types

EXIT_OK = 0
EXIT_INPUT = 2


class InputError(Exception):
    pass


@dataclass
class DetectionRecord:
    label: str
    type: str
    before: str
    after: str
    similarity: float
    elapsed_ms: float | None = None

    def as_dict(self, timing: bool) -> dict:
        d = {
            "label": self.label,
            "type": self.type,
            "before": self.before,
            "after": self.after,
            "similarity": round(self.similarity, 3),
        }
        if timing:
            d["elapsed_ms"] = round(self.elapsed_ms or 0.0, 1)
        return d


@dataclass
class PairResult:
    label: str
    records: list
    errors: list
    elapsed_ms: float


def analyze_pair(pair: repo_io.RevisionPair, config: ThresholdConfig) -> PairResult:
    t0 = time.perf_counter()
    prepared = PreparedPair.from_pair(pair)
    rels = prepared.refactorings(config)
    elapsed = (time.perf_counter() - t0) * 1000.0
    records = [
        DetectionRecord(pair.label, r.type.label, r.before.descriptor(), r.after.descriptor(), r.similarity, elapsed)
        for r in rels
    ]
    return PairResult(pair.label, records, [str(e) for e in prepared.errors], elapsed)


def _analyze_commit(job) -> PairResult:
    repo, commit, config = job
    return analyze_pair(repo_io.load_commit_pair(repo, commit), config)


def _config(args) -> ThresholdConfig:
    try:
        return ThresholdConfig.resolve(args.config)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot load threshold config: {exc}") from None


def run_detection(args, config: ThresholdConfig) -> list[PairResult]:
    if args.before or args.after:
        if not (args.before and args.after):
            raise InputError("--before and --after must be given together")
        return [analyze_pair(repo_io.load_directory_pair(args.before, args.after), config)]
    if not args.repo:
        raise InputError("give --repo with --commit/--range, or --before/--after")
    if args.commit and args.range:
        raise InputError("--commit and --range are mutually exclusive")
    if args.commit:
        return [analyze_pair(repo_io.load_commit_pair(args.repo, args.commit), config)]
    if not args.range:
        raise InputError("--repo needs --commit or --range")
    commits = repo_io.list_commits(args.repo, args.range)
    jobs = [(args.repo, c, config) for c in commits]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(_analyze_commit, jobs))
    return [_analyze_commit(j) for j in jobs]


def format_records(records: list[DetectionRecord], fmt: str, timing: bool = False) -> str:
    rows = [r.as_dict(timing) for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    fields = ["label", "type", "before", "after", "similarity"] + (["elapsed_ms"] if timing else [])
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        row["similarity"] = f"{row['similarity']:.3f}"
        w.writerow(row)
    return buf.getvalue()


def _report_errors(results: list[PairResult]) -> bool:
    bad = False
    for res in results:
        for err in res.errors:
            print(f"refdetect: {res.label}: {err}", file=sys.stderr)
            bad = True
    return bad


def cmd_detect(args) -> int:
    config = _config(args)
    results = run_detection(args, config)
    records = [r for res in results for r in res.records]
    sys.stdout.write(format_records(records, args.format, args.timing))
    if args.timing:
        for res in results:
            print(f"refdetect: {res.label}: {res.elapsed_ms:.1f} ms", file=sys.stderr)
    return EXIT_INPUT if _report_errors(results) else EXIT_OK


def _load_oracle(path, label=None) -> list[OracleEntry]:
    try:
        return read_oracle(path, label)
    except OSError as exc:
        raise InputError(f"cannot read oracle: {exc}") from None


def cmd_evaluate(args) -> int:
    try:
        oracle = _load_oracle(args.oracle)
        if args.found:
            found = _load_oracle(args.found)
            errors = False
        else:
            results = run_detection(args, _config(args))
            errors = _report_errors(results)
            found = [
                OracleEntry(RelationshipType.parse(r.type), r.before, r.after, r.label)
                for res in results
                for r in res.records
            ]
    except MalformedOracle as exc:
        print(f"refdetect: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not any(e.label for e in oracle):
        found = [OracleEntry(e.type, e.before, e.after) for e in found]
    types = parse_types(args.types.split(",")) if args.types else REPORTED_TYPES
    report = precision_recall(found, oracle, types, lenient=args.lenient_methods)
    present = {e.type for e in oracle} | {e.type for e in found}
    report.per_type = {t: c for t, c in report.per_type.items() if t in present or args.types}
    sys.stdout.write(report.table())
    return EXIT_INPUT if errors else EXIT_OK


def load_manifest(path) -> tuple[list[repo_io.RevisionPair], list[OracleEntry]]:
    """Read a calibration corpus manifest (JSON).

    ``{"pairs": [{"label": ..., "before": dir, "after": dir, "oracle": csv},
    {"repo": dir, "commit": id, "oracle": csv}], "oracle": csv}``. Paths
    are relative to the manifest. Per-pair oracles are labelled with the
    pair label; a top-level oracle must carry its own ``label`` column.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from None
    root = path.parent
    pairs, oracle = [], []
    for k, item in enumerate(doc.get("pairs", [])):
        try:
            if "repo" in item:
                pair = repo_io.load_commit_pair(root / item["repo"], item["commit"])
            else:
                pair = repo_io.load_directory_pair(root / item["before"], root / item["after"])
        except (repo_io.RepoError, KeyError) as exc:
            print(f"refdetect: manifest pair {k} skipped: {exc}", file=sys.stderr)
            continue
        pair.label = item.get("label", pair.label)
        pairs.append(pair)
        if "oracle" in item:
            oracle.extend(_load_oracle(root / item["oracle"], pair.label))
    if "oracle" in doc:
        oracle.extend(_load_oracle(root / doc["oracle"]))
    return pairs, oracle


def cmd_calibrate(args) -> int:
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        pairs, oracle = load_manifest(args.corpus)
    except MalformedOracle as exc:
        print(f"refdetect: {exc}", file=sys.stderr)
        return EXIT_INPUT
    types = parse_types(args.types.split(",")) if args.types else None
    base = ThresholdConfig.load(args.base) if args.base else ThresholdConfig()
    sizes: dict = {}
    for e in oracle:
        sizes[e.type] = sizes.get(e.type, 0) + 1
    rows = [("type", "#", "tau", "TP", "FP", "FN", "precision", "recall")]
    sweeps_out = []

    def on_sweep(t, sweep, tau):
        c = dict(sweep)[tau].overall
        rows.append((t.label, str(sizes.get(t, 0)), f"{tau:.3f}", str(c.tp), str(c.fp), str(c.fn),
                     _fmt(c.precision), _fmt(c.recall)))
        if args.verbose:
            for g, rep in sweep:
                o = rep.overall
                sweeps_out.append(f"  {t.label} tau={g:.3f} TP={o.tp} FP={o.fp} FN={o.fn} F1={o.f1:.3f}\n")

    try:
        config = calibrate_all(pairs, oracle, grid, types, base, on_sweep)
    except UncoveredType as exc:
        print(f"refdetect: {exc}", file=sys.stderr)
        return EXIT_INPUT
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    for r in rows:
        line = "  ".join(c.ljust(w) if k == 0 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths)))
        print(line.rstrip())
    if sweeps_out:
        sys.stdout.write("".join(sweeps_out))
    if args.out:
        config.save(args.out)
    else:
        sys.stdout.write(config.dumps())
    return EXIT_OK


def _fmt(v):
    return "n/a" if v is None else f"{v:.3f}"


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("--repo", help="git repository path")
    p.add_argument("--commit", help="commit to compare with its parent")
    p.add_argument("--range", help="revision range, e.g. A..B (non-merge commits only)")
    p.add_argument("--before", help="directory holding the old revision")
    p.add_argument("--after", help="directory holding the new revision")
    p.add_argument("--config", help="threshold file (default: $REFDETECT_CONFIG or packaged defaults)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes in --range mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refdetect", description="Detect refactorings between two revisions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="report refactorings")
    _add_input_args(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--timing", action="store_true", help="add per-pair elapsed_ms to each record")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="compare detections with an oracle CSV")
    _add_input_args(p)
    p.add_argument("--oracle", required=True)
    p.add_argument("--found", help="evaluate a saved detect CSV instead of running detection")
    p.add_argument("--lenient-methods", action="store_true", help="ignore method parameter lists")
    p.add_argument("--types", help="comma-separated relationship types to evaluate")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="sweep thresholds against an oracle corpus")
    p.add_argument("--corpus", required=True, help="JSON manifest of revision pairs and oracles")
    p.add_argument("--grid", default=":".join(str(x) for x in (DEFAULT_GRID[0], DEFAULT_GRID[-1], 0.1)))
    p.add_argument("--out", help="write the calibrated threshold file here")
    p.add_argument("--types", help="comma-separated subset of types to calibrate")
    p.add_argument("--base", help="threshold file for types not being calibrated")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, repo_io.RepoError, OSError, ValueError) as exc:
        print(f"refdetect: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
