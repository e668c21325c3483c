"""Relationship analysis between the entity models of two revisions.

Relationship types are processed one at a time in :class:`RelationshipType`
order. Matching types (same/move/rename/pull-up/push-down) pair each entity
with at most one counterpart; when several candidate pairs compete, the one
with the higher similarity wins. Extract/inline/extract-supertype edges do
not consume entities and may share endpoints.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .model import CodeEntity, CodeModel, EntityId, Kind
from .similarity import WeightIndex
from .thresholds import RelationshipType as RT
from .thresholds import ThresholdConfig

_TYPE_MOVES = (RT.MoveType, RT.RenameType, RT.MoveAndRenameType)


@dataclass(frozen=True)
class Relationship:
    type: RT
    before: EntityId
    after: EntityId
    similarity: float

    def key(self) -> tuple:
        return (self.type.order, self.before.descriptor(), self.after.descriptor())


@dataclass(frozen=True)
class CandidateTriple:
    before: EntityId
    after: EntityId
    score: float


@dataclass
class MatchState:
    """Relationships found so far plus the one-to-one matching they imply."""

    b2a: dict = field(default_factory=dict)
    a2b: dict = field(default_factory=dict)
    relationships: list = field(default_factory=list)

    def add(self, rel: Relationship):
        self.relationships.append(rel)
        if rel.type.matching:
            self.b2a[rel.before] = rel.after
            self.a2b[rel.after] = rel.before

    def matched_before(self, eid: EntityId) -> bool:
        return eid in self.b2a

    def matched_after(self, eid: EntityId) -> bool:
        return eid in self.a2b


def resolve_conflicts(
    rel_type: RT,
    candidates: Iterable[CandidateTriple],
    state: MatchState | None = None,
) -> list[Relationship]:
    """Greedy highest-score-first selection of non-conflicting candidates.

    Ties are broken by before descriptor, then after descriptor. Entities
    already matched in ``state`` are unavailable.
    """
    taken_b = set(state.b2a) if state else set()
    taken_a = set(state.a2b) if state else set()
    ordered = sorted(candidates, key=lambda c: (-c.score, c.before.descriptor(), c.after.descriptor()))
    out = []
    for c in ordered:
        if c.before in taken_b or c.after in taken_a:
            continue
        taken_b.add(c.before)
        taken_a.add(c.after)
        out.append(Relationship(rel_type, c.before, c.after, c.score))
    return out


class Detector:
    """Runs relationship analysis for one revision pair."""

    def __init__(self, before: CodeModel, after: CodeModel, index: WeightIndex | None = None):
        self.before = before
        self.after = after
        if index is None:
            corpus = list(before) + list(after)
            index = WeightIndex(corpus) if corpus else None
        self.index = index
        self._after_members = {}
        for e in after:
            if e.kind is not Kind.TYPE:
                self._after_members[(e.container, e.kind, _member_key(e))] = e

    # -- helpers -----------------------------------------------------------
    def _unmatched(self, model: CodeModel, kind: Kind, state: MatchState, side: str) -> list[CodeEntity]:
        taken = state.b2a if side == "b" else state.a2b
        return [e for e in model.of_kind(kind) if e.id not in taken]

    def _scored(self, pairs, tau: float, asymmetric: bool = False) -> list[CandidateTriple]:
        if not pairs or self.index is None:
            return []
        scores = self.index.sims_u(pairs) if asymmetric else self.index.sims(pairs)
        return [
            CandidateTriple(b.id, a.id, float(s))
            for (b, a), s in zip(pairs, scores)
            if s > tau
        ]

    def _pull_up(self, state: MatchState, b: CodeEntity, a: CodeEntity) -> bool:
        moved = state.b2a.get(b.container)
        return moved is not None and moved != a.container and self.after.is_subtype(moved, a.container)

    def _push_down(self, state: MatchState, b: CodeEntity, a: CodeEntity) -> bool:
        moved = state.b2a.get(b.container)
        return moved is not None and moved != a.container and self.after.is_subtype(a.container, moved)

    # -- matching candidates ---------------------------------------------------
    def candidate_pairs(self, rel_type: RT, state: MatchState) -> list[tuple[CodeEntity, CodeEntity]]:
        """Entity pairs meeting the structural conditions of ``rel_type``."""
        kind = rel_type.entity_kind
        bs = self._unmatched(self.before, kind, state, "b")
        as_ = self._unmatched(self.after, kind, state, "a")
        if rel_type is RT.ExtractMethod:
            return self._extract_method_pairs(state)
        if rel_type is RT.InlineMethod:
            return self._inline_method_pairs(state)
        if rel_type is RT.ExtractSupertype:
            return self._extract_supertype_pairs(state)
        if kind is Kind.TYPE:
            cond = _TYPE_CONDITIONS[rel_type]
            return [(b, a) for b in bs for a in as_ if cond(b.id, a.id)]
        if kind is Kind.METHOD:
            bs = [b for b in bs if not b.is_constructor]
            as_ = [a for a in as_ if not a.is_constructor]
        if rel_type is RT.RenameMethod:
            by_container = defaultdict(list)
            for a in as_:
                by_container[a.container].append(a)
            return [
                (b, a)
                for b in bs
                for a in by_container.get(state.b2a.get(b.container), ())
                if a.name != b.name
            ]
        by_sig = defaultdict(list)
        for a in as_:
            by_sig[a.id.signature].append(a)
        pairs = []
        for b in bs:
            for a in by_sig.get(b.id.signature, ()):
                if rel_type in (RT.PullUpMethod, RT.PullUpField):
                    ok = self._pull_up(state, b, a)
                elif rel_type in (RT.PushDownMethod, RT.PushDownField):
                    ok = self._push_down(state, b, a)
                else:  # MoveMethod / MoveField
                    ok = (
                        state.b2a.get(b.container) != a.container
                        and not self._pull_up(state, b, a)
                        and not self._push_down(state, b, a)
                    )
                if ok:
                    pairs.append((b, a))
        return pairs

    def _same_candidates(self, rel_type: RT, state: MatchState) -> list[CandidateTriple]:
        kind = rel_type.entity_kind
        out = []
        for b in self._unmatched(self.before, kind, state, "b"):
            if kind is Kind.TYPE:
                a = self.after.get(b.id)
            else:
                ca = state.b2a.get(b.container)
                a = self._after_members.get((ca, kind, _member_key(b))) if ca else None
            if a is not None and not state.matched_after(a.id):
                out.append(CandidateTriple(b.id, a.id, 1.0))
        return out

    def find_matching_candidates(self, rel_type: RT, state: MatchState, tau: float) -> list[CandidateTriple]:
        if rel_type.is_same:
            return self._same_candidates(rel_type, state)
        return self._scored(self.candidate_pairs(rel_type, state), tau)

    # -- non-matching ----------------------------------------------------------
    def _extract_method_pairs(self, state: MatchState):
        # (m2 after, m1 before): m2 added, m1 survives as y, y calls m2.
        callers = [(y, self.before.get(state.a2b[y.id])) for y in self.after.methods if y.id in state.a2b]
        pairs = []
        for m2 in self._unmatched(self.after, Kind.METHOD, state, "a"):
            if m2.is_constructor or not m2.tokens:
                continue
            argc = len(m2.param_types)
            for y, m1 in callers:
                if y is not m2 and m1 is not None and y.calls_method(m2.name, argc):
                    pairs.append((m2, m1))
        return pairs

    def _inline_method_pairs(self, state: MatchState):
        # (m1 before, m2 after): m1 removed, x ~ m2, x called m1.
        callers = [(x, self.after.get(state.b2a[x.id])) for x in self.before.methods if x.id in state.b2a]
        pairs = []
        for m1 in self._unmatched(self.before, Kind.METHOD, state, "b"):
            if m1.is_constructor or not m1.tokens:
                continue
            argc = len(m1.param_types)
            for x, m2 in callers:
                if x is not m1 and m2 is not None and x.calls_method(m1.name, argc):
                    pairs.append((m1, m2))
        return pairs

    def _extract_supertype_pairs(self, state: MatchState):
        # (t2 after, t1 before): t2 added, t1 ~ t1', t1' declares t2 as supertype.
        survivors = [(self.after.get(state.b2a[t.id]), t) for t in self.before.types if t.id in state.b2a]
        pairs = []
        for t2 in self._unmatched(self.after, Kind.TYPE, state, "a"):
            if not t2.tokens:
                continue
            for t1_after, t1 in survivors:
                if t1_after is not None and t2.name in t1_after.supertypes:
                    pairs.append((t2, t1))
        return pairs

    def find_non_matching(self, rel_type: RT, state: MatchState, tau: float) -> list[Relationship]:
        pairs = self.candidate_pairs(rel_type, state)
        found = self._scored(pairs, tau, asymmetric=True)
        if rel_type is RT.InlineMethod:
            return [Relationship(rel_type, c.before, c.after, c.score) for c in found]
        # Scored as (added entity, origin); reported as origin -> added.
        return [Relationship(rel_type, c.after, c.before, c.score) for c in found]

    # -- driver ----------------------------------------------------------------
    def run(self, config: ThresholdConfig) -> list[Relationship]:
        state = MatchState()
        for rel_type in RT:
            tau = 1.0 if rel_type.is_same else config[rel_type]
            if rel_type.matching:
                cands = self.find_matching_candidates(rel_type, state, tau)
                for rel in resolve_conflicts(rel_type, cands, state):
                    state.add(rel)
                if rel_type is RT.MoveAndRenameType:
                    _relabel_nested_types(state)
            else:
                for rel in self.find_non_matching(rel_type, state, tau):
                    state.add(rel)
        return sorted(state.relationships, key=Relationship.key)


def _member_key(e: CodeEntity):
    if e.is_constructor:
        return ("<init>", e.param_types)
    return e.id.signature


def _parent(eid: EntityId) -> str:
    return eid.container_name


_TYPE_CONDITIONS: dict[RT, Callable[[EntityId, EntityId], bool]] = {
    RT.MoveType: lambda b, a: b.signature == a.signature and _parent(b) != _parent(a),
    RT.RenameType: lambda b, a: b.signature != a.signature and _parent(b) == _parent(a),
    RT.MoveAndRenameType: lambda b, a: b.signature != a.signature and _parent(b) != _parent(a),
}


def _type_id(qualified_name: str) -> EntityId | None:
    if not qualified_name:
        return None
    return EntityId(Kind.TYPE, qualified_name, qualified_name.rpartition(".")[2])


def _relabel_nested_types(state: MatchState):
    """A nested type carried along by its moved or renamed outer type is not itself moved."""
    rels = state.relationships
    for k, rel in enumerate(rels):
        if rel.type not in _TYPE_MOVES:
            continue
        outer_b = _type_id(_parent(rel.before))
        outer_a = _type_id(_parent(rel.after))
        if outer_b is None or outer_a is None or state.b2a.get(outer_b) != outer_a:
            continue
        new_type = RT.SameType if rel.before.signature == rel.after.signature else RT.RenameType
        rels[k] = Relationship(new_type, rel.before, rel.after, rel.similarity)


def detect(before: CodeModel, after: CodeModel, config: ThresholdConfig | None = None,
           index: WeightIndex | None = None) -> list[Relationship]:
    """All relationships between two revisions, Same* ones included.

    Sorted by type order, then before descriptor, then after descriptor.
    """
    return Detector(before, after, index).run(config or ThresholdConfig())


def refactorings(relationships: Iterable[Relationship]) -> list[Relationship]:
    return sorted((r for r in relationships if r.type.reported), key=Relationship.key)
