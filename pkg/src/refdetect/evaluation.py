"""Oracle comparison, precision/recall/F1 and threshold calibration."""
from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .pipeline import prepare
from .relationships import Relationship
from .thresholds import REPORTED_TYPES, RelationshipType, ThresholdConfig

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


class MalformedOracle(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"oracle line {line}: {reason}")
        self.line = line


class UncoveredType(ValueError):
    def __init__(self, rel_type: RelationshipType):
        super().__init__(f"oracle has no entry of type {rel_type}")
        self.type = rel_type


# -- descriptors --------------------------------------------------------------

def _simple_param(p: str) -> str:
    p = p.replace("...", "[]")
    dims = p.count("[]")
    base = p.replace("[]", "")
    while "<" in base:
        base = re.sub(r"<[^<>]*>", "", base)
    base = re.sub(r"^(final|@\w+)+", "", base)
    return base.rpartition(".")[2] + "[]" * dims


def canonical_descriptor(text: str, lenient: bool = False) -> str:
    """Whitespace-free descriptor with simple parameter type names.

    With ``lenient`` the parameter list of a method descriptor is dropped.
    """
    text = re.sub(r"\s+", "", text)
    head, paren, rest = text.partition("(")
    if not paren:
        return text
    if lenient:
        return head
    inner = rest.rsplit(")", 1)[0]
    params, depth, cur = [], 0, ""
    for ch in inner:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "," and depth == 0:
            params.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        params.append(cur)
    return f"{head}({','.join(_simple_param(p) for p in params)})"


@dataclass(frozen=True)
class OracleEntry:
    type: RelationshipType
    before: str
    after: str
    label: str = ""

    def key(self, lenient: bool = False) -> tuple:
        return (
            self.label,
            self.type,
            canonical_descriptor(self.before, lenient),
            canonical_descriptor(self.after, lenient),
        )

    @classmethod
    def from_relationship(cls, rel: Relationship, label: str = "") -> "OracleEntry":
        return cls(rel.type, rel.before.descriptor(), rel.after.descriptor(), label)


def read_oracle(source, label: str | None = None) -> list[OracleEntry]:
    """Read an oracle CSV with header ``type,before,after``.

    An optional ``label`` column assigns entries to revision pairs; the
    ``label`` argument, when given, overrides it. Extra columns are ignored,
    so detector CSV output can be read back as an oracle.
    """
    text = source.read() if hasattr(source, "read") else open(source, encoding="utf-8").read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return []
    missing = {"type", "before", "after"} - {f.strip() for f in reader.fieldnames}
    if missing:
        raise MalformedOracle(1, f"missing column(s): {', '.join(sorted(missing))}")
    entries = []
    for row in reader:
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        lineno = reader.line_num
        if not any(row.values()):
            continue
        try:
            rel_type = RelationshipType.parse(row["type"])
        except ValueError as exc:
            raise MalformedOracle(lineno, str(exc)) from None
        if not row["before"] or not row["after"]:
            raise MalformedOracle(lineno, "empty descriptor")
        entries.append(OracleEntry(rel_type, row["before"], row["after"], label if label is not None else row.get("label", "")))
    return entries


def write_oracle(entries: Iterable[OracleEntry], with_label: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["type", "before", "after"] + (["label"] if with_label else []))
    for e in entries:
        w.writerow([e.type.label, e.before, e.after] + ([e.label] if with_label else []))
    return buf.getvalue()


# -- metrics ------------------------------------------------------------------

def f1(precision: float | None, recall: float | None) -> float:
    p = precision or 0.0
    r = recall or 0.0
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float | None:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self) -> float | None:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    @property
    def f1(self) -> float:
        return f1(self.precision, self.recall)

    def __iadd__(self, other: "Counts"):
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass
class EvalReport:
    per_type: dict = field(default_factory=dict)
    overall: Counts = field(default_factory=Counts)

    def table(self, oracle_sizes: dict | None = None) -> str:
        rows = [("type", "#", "TP", "FP", "FN", "precision", "recall")]
        for t, c in sorted(self.per_type.items(), key=lambda kv: kv[0].order):
            n = (oracle_sizes or {}).get(t, c.tp + c.fn)
            rows.append((t.label, str(n), str(c.tp), str(c.fp), str(c.fn), _fmt(c.precision), _fmt(c.recall)))
        c = self.overall
        n = sum((oracle_sizes or {}).values()) if oracle_sizes else c.tp + c.fn
        rows.append(("Overall", str(n), str(c.tp), str(c.fp), str(c.fn), _fmt(c.precision), _fmt(c.recall)))
        widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
        return "".join(
            "  ".join(cell.ljust(w) if k == 0 else cell.rjust(w) for k, (cell, w) in enumerate(zip(r, widths))).rstrip() + "\n"
            for r in rows
        )


def _fmt(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.3f}"


def precision_recall(
    found: Iterable[OracleEntry],
    oracle: Iterable[OracleEntry],
    supported_types: Iterable[RelationshipType] = REPORTED_TYPES,
    lenient: bool = False,
) -> EvalReport:
    """Compare detections with an oracle, per type and overall.

    Entries whose type is not in ``supported_types`` are ignored on both
    sides, so unsupported oracle entries never count as false negatives.
    """
    supported = set(supported_types)
    f_keys = {e.key(lenient) for e in found if e.type in supported}
    o_keys = {e.key(lenient) for e in oracle if e.type in supported}
    report = EvalReport({t: Counts() for t in sorted(supported, key=lambda t: t.order)})
    for k in f_keys:
        c = report.per_type[k[1]]
        if k in o_keys:
            c.tp += 1
        else:
            c.fp += 1
    for k in o_keys - f_keys:
        report.per_type[k[1]].fn += 1
    for c in report.per_type.values():
        report.overall += c
    return report


# -- calibration --------------------------------------------------------------

def _found_entries(prepared, config: ThresholdConfig) -> list[OracleEntry]:
    out = []
    for p in prepared:
        out.extend(OracleEntry.from_relationship(r, p.label) for r in p.refactorings(config))
    return out


def sweep_thresholds(
    corpus: Sequence,
    oracle: Iterable[OracleEntry],
    rel_type: RelationshipType,
    grid: Sequence[float] = DEFAULT_GRID,
    fixed: ThresholdConfig | None = None,
) -> list[tuple[float, EvalReport]]:
    """Detection metrics for ``rel_type`` at each threshold in ``grid``.

    Only ``rel_type``'s threshold varies; the others come from ``fixed``.
    """
    fixed = fixed or ThresholdConfig()
    oracle = list(oracle)
    prepared = []
    for pair in corpus:
        try:
            prepared.append(prepare(pair))
        except Exception as exc:  # one bad pair must not abort the sweep
            log.error("skipping %s: %s", getattr(pair, "label", pair), exc)
    results = []
    for tau in grid:
        cfg = fixed.with_value(rel_type, tau)
        results.append((tau, precision_recall(_found_entries(prepared, cfg), oracle, [rel_type])))
    return results


def best_threshold(sweep: Sequence[tuple[float, EvalReport]]) -> tuple[float, EvalReport]:
    """Highest F1; equal F1 goes to the lowest threshold."""
    return min(sweep, key=lambda item: (-round(item[1].overall.f1, 12), item[0]))


def calibrate_all(
    corpus: Sequence,
    oracle: Iterable[OracleEntry],
    grid: Sequence[float] = DEFAULT_GRID,
    types: Iterable[RelationshipType] | None = None,
    base: ThresholdConfig | None = None,
    on_sweep: Callable | None = None,
) -> ThresholdConfig:
    """Calibrate thresholds one type at a time, in detection order.

    Each type's threshold is fixed at its F1-maximizing grid value before
    the next type is swept.
    """
    oracle = list(oracle)
    types = sorted(types or REPORTED_TYPES, key=lambda t: t.order)
    covered = {e.type for e in oracle}
    for t in types:
        if t not in covered:
            raise UncoveredType(t)
    prepared = [prepare(p) for p in corpus]
    config = ThresholdConfig(base or {})
    for t in types:
        sweep = sweep_thresholds(prepared, oracle, t, sorted(grid), config)
        tau, report = best_threshold(sweep)
        config[t] = tau
        if on_sweep is not None:
            on_sweep(t, sweep, tau)
    return config


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {text!r}")
        n = int(round((stop - start) / step)) + 1
        return [round(start + k * step, 6) for k in range(n)]
    return sorted(float(x) for x in text.split(","))
