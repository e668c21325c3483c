"""Code entities extracted from one revision."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

from .lexer import TokenMultiset


class Kind(str, enum.Enum):
    TYPE = "Type"
    METHOD = "Method"
    FIELD = "Field"


class ParseError(Exception):
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason


@dataclass(frozen=True, order=True)
class EntityId:
    kind: Kind
    qualified_name: str
    signature: str

    def __post_init__(self):
        if not self.qualified_name:
            raise ValueError("qualified name must be non-empty")

    @property
    def container_name(self) -> str:
        """Qualified name of the enclosing type (members) or package path (types)."""
        return self.qualified_name.rpartition(".")[0]

    @property
    def simple_name(self) -> str:
        if self.kind is Kind.METHOD:
            return self.signature.partition("(")[0]
        return self.signature

    def descriptor(self) -> str:
        """Canonical text form: ``pkg.Type``, ``pkg.Type#field``, ``pkg.Type#m(A,B)``."""
        if self.kind is Kind.TYPE:
            return self.qualified_name
        return f"{self.container_name}#{self.signature}"


@dataclass(frozen=True)
class Call:
    name: str
    arg_count: int


@dataclass(frozen=True)
class Statement:
    """One statement of a method body, with the names it touches.

    ``bare`` holds unqualified identifiers not shadowed by a parameter or
    local, ``this_members`` names used as ``this.x`` and ``members`` names
    used as ``expr.x`` with any other receiver. Calls are not included.
    """

    tokens: TokenMultiset
    bare: frozenset = frozenset()
    this_members: frozenset = frozenset()
    members: frozenset = frozenset()


@dataclass(frozen=True, eq=False)
class CodeEntity:
    id: EntityId
    container: EntityId | None
    tokens: TokenMultiset
    source_file: str
    calls: frozenset = frozenset()
    field_accesses: frozenset = frozenset()
    supertypes: tuple = ()
    statements: tuple = ()
    is_constructor: bool = False
    param_types: tuple = ()

    @property
    def kind(self) -> Kind:
        return self.id.kind

    @property
    def name(self) -> str:
        return self.id.simple_name

    def calls_method(self, name: str, arg_count: int) -> bool:
        return Call(name, arg_count) in self.calls

    def __repr__(self):
        return f"CodeEntity({self.id.kind.value} {self.id.descriptor()})"


@dataclass
class CodeModel:
    """Entities of one revision, keyed by id. Not mutated once built."""

    entities: list[CodeEntity]
    revision_label: str = ""
    errors: list[ParseError] = field(default_factory=list)
    skipped_chars: int = 0

    def __post_init__(self):
        self._by_id = {e.id: e for e in self.entities}
        if len(self._by_id) != len(self.entities):
            raise ValueError("duplicate entity ids in model")
        self._types_by_simple: dict[str, list[CodeEntity]] = {}
        for e in self.entities:
            if e.kind is Kind.TYPE:
                self._types_by_simple.setdefault(e.name, []).append(e)

    def __iter__(self) -> Iterator[CodeEntity]:
        return iter(self.entities)

    def __len__(self):
        return len(self.entities)

    def __contains__(self, entity_id: EntityId) -> bool:
        return entity_id in self._by_id

    def get(self, entity_id: EntityId) -> CodeEntity | None:
        return self._by_id.get(entity_id)

    def of_kind(self, kind: Kind) -> list[CodeEntity]:
        return [e for e in self.entities if e.kind is kind]

    @property
    def types(self) -> list[CodeEntity]:
        return self.of_kind(Kind.TYPE)

    @property
    def methods(self) -> list[CodeEntity]:
        return self.of_kind(Kind.METHOD)

    @property
    def fields(self) -> list[CodeEntity]:
        return self.of_kind(Kind.FIELD)

    def types_named(self, simple_name: str) -> list[CodeEntity]:
        return self._types_by_simple.get(simple_name, [])

    def supertypes_of(self, type_id: EntityId) -> set[str]:
        """Simple names of all declared ancestors reachable inside the model."""
        seen: set[str] = set()
        stack = list(self._by_id[type_id].supertypes) if type_id in self._by_id else []
        while stack:
            name = stack.pop()
            if name in seen:
                continue
            seen.add(name)
            for t in self.types_named(name):
                stack.extend(t.supertypes)
        return seen

    def is_subtype(self, sub: EntityId, sup: EntityId) -> bool:
        return sup.signature in self.supertypes_of(sub)
