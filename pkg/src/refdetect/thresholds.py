"""Relationship types and per-type similarity thresholds."""
from __future__ import annotations

import enum
import os
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .model import Kind

CONFIG_ENV = "REFDETECT_CONFIG"
DEFAULT_TAU = 0.5


class RelationshipType(enum.Enum):
    # Definition order is detection and calibration order.
    SameType = ("SameType", Kind.TYPE, True)
    MoveType = ("MoveType", Kind.TYPE, True)
    RenameType = ("RenameType", Kind.TYPE, True)
    MoveAndRenameType = ("MoveAndRenameType", Kind.TYPE, True)
    ExtractSupertype = ("ExtractSupertype", Kind.TYPE, False)
    SameMethod = ("SameMethod", Kind.METHOD, True)
    PullUpMethod = ("PullUpMethod", Kind.METHOD, True)
    PushDownMethod = ("PushDownMethod", Kind.METHOD, True)
    RenameMethod = ("RenameMethod", Kind.METHOD, True)
    MoveMethod = ("MoveMethod", Kind.METHOD, True)
    ExtractMethod = ("ExtractMethod", Kind.METHOD, False)
    InlineMethod = ("InlineMethod", Kind.METHOD, False)
    SameField = ("SameField", Kind.FIELD, True)
    PullUpField = ("PullUpField", Kind.FIELD, True)
    PushDownField = ("PushDownField", Kind.FIELD, True)
    MoveField = ("MoveField", Kind.FIELD, True)

    def __init__(self, label: str, kind: Kind, matching: bool):
        self.label = label
        self.entity_kind = kind
        self.matching = matching

    def __str__(self):
        return self.label

    @property
    def is_same(self) -> bool:
        return self.label.startswith("Same")

    @property
    def reported(self) -> bool:
        return not self.is_same

    @property
    def order(self) -> int:
        return _ORDER[self]

    @classmethod
    def parse(cls, name: str) -> "RelationshipType":
        try:
            return cls[name.strip()]
        except KeyError:
            raise ValueError(f"unknown relationship type {name!r}") from None


_ORDER = {t: k for k, t in enumerate(RelationshipType)}
REPORTED_TYPES = tuple(t for t in RelationshipType if t.reported)


class ThresholdConfig(dict):
    """Mapping from reported relationship type to its threshold tau.

    Candidates must score strictly above tau. Types without an explicit
    entry use :data:`DEFAULT_TAU`.
    """

    def __init__(self, values: Mapping | None = None, **kw):
        super().__init__()
        for t in REPORTED_TYPES:
            self[t] = DEFAULT_TAU
        for k, v in dict(values or {}, **kw).items():
            self[k] = v

    def __setitem__(self, key, value):
        if isinstance(key, str):
            key = RelationshipType.parse(key)
        if key.is_same:
            raise ValueError(f"{key} does not take a threshold")
        value = float(value)
        if not 0.0 < value <= 1.0:
            raise ValueError(f"threshold for {key} must be in (0, 1], got {value}")
        super().__setitem__(key, value)

    def __getitem__(self, key):
        if isinstance(key, str):
            key = RelationshipType.parse(key)
        return super().__getitem__(key)

    def with_value(self, key, value) -> "ThresholdConfig":
        out = ThresholdConfig(self)
        out[key] = value
        return out

    def dumps(self) -> str:
        return "".join(f"{t.label}={self[t]:.3f}\n" for t in REPORTED_TYPES)

    def save(self, path: str | os.PathLike):
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, source: str = "<config>") -> "ThresholdConfig":
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{source}:{lineno}: expected key=value")
            try:
                cfg[key.strip()] = value.strip()
            except ValueError as exc:
                raise ValueError(f"{source}:{lineno}: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ThresholdConfig":
        return cls.loads(Path(path).read_text(encoding="utf-8"), str(path))

    @classmethod
    def packaged(cls) -> "ThresholdConfig":
        text = resources.files("refdetect").joinpath("data/default_thresholds.txt").read_text("utf-8")
        return cls.loads(text, "default_thresholds.txt")

    @classmethod
    def resolve(cls, path: str | os.PathLike | None = None) -> "ThresholdConfig":
        """Explicit path, else ``$REFDETECT_CONFIG``, else the packaged defaults."""
        path = path or os.environ.get(CONFIG_ENV)
        return cls.load(path) if path else cls.packaged()


def parse_types(names: Iterable[str]) -> list[RelationshipType]:
    return [RelationshipType.parse(n) for n in names]
