"""Parse, index and analyze one revision pair."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

from .model import CodeModel, ParseError
from .relationships import Detector, Relationship, refactorings
from .repo_io import RevisionPair
from .similarity import WeightIndex
from .thresholds import ThresholdConfig

log = logging.getLogger(__name__)


@dataclass
class PreparedPair:
    """Parsed models and weight index of a revision pair; reusable across thresholds."""

    label: str
    before: CodeModel
    after: CodeModel
    index: WeightIndex | None
    prepare_seconds: float = 0.0

    @classmethod
    def from_pair(cls, pair: RevisionPair) -> "PreparedPair":
        # Local import keeps the parser off the import path of light users.
        from .source_model import parse_source_set

        t0 = time.perf_counter()
        before = parse_source_set(pair.before_files, f"{pair.label}^")
        after = parse_source_set(pair.after_files, pair.label)
        corpus = list(before) + list(after)
        index = WeightIndex(corpus) if corpus else None
        for err in before.errors + after.errors:
            log.warning("%s: %s", pair.label, err)
        return cls(pair.label, before, after, index, time.perf_counter() - t0)

    @property
    def errors(self) -> list[ParseError]:
        return self.before.errors + self.after.errors

    def relationships(self, config: ThresholdConfig) -> list[Relationship]:
        return Detector(self.before, self.after, self.index).run(config)

    def refactorings(self, config: ThresholdConfig) -> list[Relationship]:
        return refactorings(self.relationships(config))


def prepare(pair) -> PreparedPair:
    return pair if isinstance(pair, PreparedPair) else PreparedPair.from_pair(pair)
