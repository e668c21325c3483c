"""Parse Java source files of one revision into a :class:`CodeModel`.

Only a declaration-level subset of Java is understood: package, imports,
classes and interfaces (nested too), fields, methods and constructors.
Statement bodies are handled as token streams split at ``;`` and braces.
Enums, records and annotation types are skipped as opaque blocks.
"""
from __future__ import annotations

import dataclasses
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lexer import (
    IDENT,
    KEYWORD,
    PRIMITIVES,
    Token,
    TokenMultiset,
    lex,
    multiset_of,
)
from .model import Call, CodeEntity, CodeModel, EntityId, Kind, ParseError, Statement

MODIFIERS = frozenset(
    "public private protected static final abstract native synchronized "
    "transient volatile strictfp default sealed".split()
)


@dataclass
class _Raw:
    kind: Kind
    qualified_name: str
    signature: str
    container: str | None
    line: int
    body: tuple[int, int] | None = None
    supertypes: tuple = ()
    params: tuple = ()  # (type, name) pairs
    is_constructor: bool = False
    initializer: tuple[int, int] | None = None


class _FileParser:
    def __init__(self, path: str, tokens: list[Token]):
        self.path = path
        self.toks = tokens
        self.n = len(tokens)
        self.raws: list[_Raw] = []

    # -- token helpers -------------------------------------------------
    def text(self, i: int) -> str:
        return self.toks[i].text if i < self.n else ""

    def line(self, i: int) -> int:
        if not self.toks:
            return 1
        return self.toks[min(i, self.n - 1)].line

    def fail(self, i: int, reason: str):
        raise ParseError(self.path, self.line(i), reason)

    def expect(self, i: int, text: str) -> int:
        if self.text(i) != text:
            got = self.text(i) or "end of file"
            self.fail(i, f"expected '{text}', found '{got}'")
        return i + 1

    def ident(self, i: int) -> str:
        if i >= self.n or self.toks[i].kind != IDENT:
            got = self.text(i) or "end of file"
            self.fail(i, f"expected identifier, found '{got}'")
        return self.toks[i].text

    def match_close(self, i: int) -> int:
        """Index of the bracket closing the one at ``i``."""
        open_ = self.text(i)
        close = {"{": "}", "(": ")", "[": "]"}[open_]
        depth = 0
        for j in range(i, self.n):
            t = self.toks[j].text
            if t == open_:
                depth += 1
            elif t == close:
                depth -= 1
                if depth == 0:
                    return j
        self.fail(i, f"unbalanced '{open_}'")

    def skip_generics(self, i: int) -> int:
        """Skip a ``<...>`` group starting at ``i``; returns index after it."""
        depth = 0
        j = i
        while j < self.n:
            t = self.toks[j].text
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif t == ">>":
                depth -= 2
            elif t == ">>>":
                depth -= 3
            elif t in ("{", "}", ";"):
                self.fail(j, "unterminated type arguments")
            j += 1
            if depth <= 0:
                return j
        self.fail(i, "unterminated type arguments")

    def skip_annotation(self, i: int) -> int:
        i += 1  # '@'
        self.ident(i)
        i += 1
        while self.text(i) == "." and i + 1 < self.n and self.toks[i + 1].kind == IDENT:
            i += 2
        if self.text(i) == "(":
            i = self.match_close(i) + 1
        return i

    def opaque_decl(self, i: int) -> bool:
        """An enum, record or annotation type declaration starts at ``i``."""
        t = self.text(i)
        if t == "enum":
            return True
        if t == "@":
            return self.text(i + 1) == "interface"
        return t == "record" and i + 1 < self.n and self.toks[i + 1].kind == IDENT and self.text(i + 2) in ("(", "<")

    def skip_modifiers(self, i: int) -> int:
        while i < self.n:
            t = self.text(i)
            if t == "@" and self.text(i + 1) != "interface":
                i = self.skip_annotation(i)
            elif t in MODIFIERS:
                i += 1
            elif t == "non" and self.text(i + 1) == "-" and self.text(i + 2) == "sealed":
                i += 3
            else:
                return i
        return i

    def parse_type_ref(self, i: int) -> tuple[int, str]:
        """Parse a type reference; returns (next index, simple display name)."""
        tok = self.toks[i] if i < self.n else None
        if tok is None:
            self.fail(i, "expected type")
        while self.text(i) == "@":
            i = self.skip_annotation(i)
            tok = self.toks[i] if i < self.n else None
            if tok is None:
                self.fail(i, "expected type")
        if tok.kind == KEYWORD and (tok.text in PRIMITIVES or tok.text == "void"):
            name = tok.text
            i += 1
        elif tok.kind == IDENT:
            name = tok.text
            i += 1
            while True:
                if self.text(i) == "<":
                    i = self.skip_generics(i)
                elif self.text(i) == "." and i + 1 < self.n and self.toks[i + 1].kind == IDENT:
                    name = self.toks[i + 1].text
                    i += 2
                else:
                    break
        elif tok.text == "?":
            i += 1
            name = "?"
            if self.text(i) in ("extends", "super"):
                i, name = self.parse_type_ref(i + 1)
        else:
            self.fail(i, f"expected type, found '{tok.text}'")
        while self.text(i) == "[" and self.text(i + 1) == "]":
            name += "[]"
            i += 2
        return i, name

    def parse_type_list(self, i: int) -> tuple[int, list[str]]:
        names = []
        while True:
            i, name = self.parse_type_ref(i)
            names.append(name)
            if self.text(i) != ",":
                return i, names
            i += 1

    # -- declarations --------------------------------------------------
    def parse(self) -> list[_Raw]:
        i = 0
        package = ""
        j = self.skip_modifiers(0)
        if self.text(j) == "package":
            i = j + 1
            parts = [self.ident(i)]
            i += 1
            while self.text(i) == ".":
                parts.append(self.ident(i + 1))
                i += 2
            i = self.expect(i, ";")
            package = ".".join(parts)
        while i < self.n:
            t = self.text(i)
            if t == "import":
                while i < self.n and self.text(i) != ";":
                    i += 1
                i = self.expect(i, ";")
            elif t == ";":
                i += 1
            else:
                i = self.parse_type_decl(i, package, None)
        return self.raws

    def parse_type_decl(self, i: int, prefix: str, container: str | None) -> int:
        start = i
        i = self.skip_modifiers(i)
        t = self.text(i)
        if self.opaque_decl(i):
            while i < self.n and self.text(i) != "{":
                if self.text(i) in (";", "}"):
                    self.fail(i, f"malformed {t} declaration")
                i += 1
            if i >= self.n:
                self.fail(start, f"malformed {t} declaration")
            return self.match_close(i) + 1
        if t not in ("class", "interface"):
            self.fail(i, f"expected type declaration, found '{t or 'end of file'}'")
        name = self.ident(i + 1)
        line = self.line(i)
        i += 2
        if self.text(i) == "<":
            i = self.skip_generics(i)
        supertypes: list[str] = []
        while self.text(i) != "{":
            kw = self.text(i)
            if kw in ("extends", "implements"):
                i, names = self.parse_type_list(i + 1)
                supertypes.extend(names)
            elif kw == "permits":
                i, _ = self.parse_type_list(i + 1)
            else:
                self.fail(i, f"unexpected '{kw or 'end of file'}' in type header")
        close = self.match_close(i)
        qname = f"{prefix}.{name}" if prefix else name
        self.raws.append(
            _Raw(Kind.TYPE, qname, name, container, line, body=(i + 1, close), supertypes=tuple(supertypes))
        )
        self.parse_members(i + 1, close, qname, name)
        return close + 1

    def parse_members(self, i: int, end: int, type_qn: str, type_name: str):
        seen: set[tuple[Kind, str]] = set()
        while i < end:
            t = self.text(i)
            if t == ";":
                i += 1
                continue
            if t == "{":
                i = self.match_close(i) + 1
                continue
            if t == "static" and self.text(i + 1) == "{":
                i = self.match_close(i + 1) + 1
                continue
            j = self.skip_modifiers(i)
            t = self.text(j)
            if t in ("class", "interface") or self.opaque_decl(j):
                i = self.parse_type_decl(i, type_qn, type_qn)
                continue
            if t == "<":
                j = self.skip_generics(j)
            if j >= end:
                self.fail(j, "unexpected end of type body")
            if self.toks[j].kind == IDENT and self.text(j + 1) == "(":
                raw, i = self.parse_method(j, type_qn, constructor=True)
            else:
                j, _ = self.parse_type_ref(j)
                self.ident(j)
                if self.text(j + 1) == "(":
                    raw, i = self.parse_method(j, type_qn, constructor=False)
                else:
                    i = self.parse_fields(j, end, type_qn, seen)
                    continue
            key = (raw.kind, raw.signature)
            if key in seen:
                self.fail(j, f"duplicate member {raw.signature} in {type_qn}")
            seen.add(key)
            self.raws.append(raw)

    def parse_method(self, i: int, type_qn: str, constructor: bool) -> tuple[_Raw, int]:
        name = self.ident(i)
        line = self.line(i)
        open_ = i + 1
        close = self.match_close(open_)
        params = self.parse_params(open_ + 1, close)
        i = close + 1
        while self.text(i) == "[" and self.text(i + 1) == "]":
            i += 2
        if self.text(i) == "throws":
            i, _ = self.parse_type_list(i + 1)
        body = None
        if self.text(i) == "{":
            end = self.match_close(i)
            body = (i + 1, end)
            i = end + 1
        elif self.text(i) == ";":
            i += 1
        elif self.text(i) == "default":
            while i < self.n and self.text(i) != ";":
                i += 1
            i = self.expect(i, ";")
        else:
            self.fail(i, f"expected method body, found '{self.text(i) or 'end of file'}'")
        sig = f"{name}({','.join(p[0] for p in params)})"
        raw = _Raw(
            Kind.METHOD, f"{type_qn}.{name}", sig, type_qn, line, body=body,
            params=tuple(params), is_constructor=constructor,
        )
        return raw, i

    def parse_params(self, i: int, end: int) -> list[tuple[str, str]]:
        params = []
        while i < end:
            while self.text(i) == "@" or self.text(i) == "final":
                i = self.skip_annotation(i) if self.text(i) == "@" else i + 1
            i, type_name = self.parse_type_ref(i)
            if self.text(i) == "...":
                type_name += "[]"
                i += 1
            if self.text(i) == "this":  # receiver parameter
                i += 1
                name = "this"
            else:
                name = self.ident(i)
                i += 1
            while self.text(i) == "[" and self.text(i + 1) == "]":
                type_name += "[]"
                i += 2
            if name != "this":
                params.append((type_name, name))
            if i < end:
                i = self.expect(i, ",")
        return params

    def parse_fields(self, i: int, end: int, type_qn: str, seen: set) -> int:
        while True:
            name = self.ident(i)
            line = self.line(i)
            i += 1
            while self.text(i) == "[" and self.text(i + 1) == "]":
                i += 2
            init = None
            if self.text(i) == "=":
                start = i + 1
                i = self.skip_expression(start, end)
                init = (start, i)
            if (Kind.FIELD, name) in seen:
                self.fail(i, f"duplicate field {name} in {type_qn}")
            seen.add((Kind.FIELD, name))
            self.raws.append(_Raw(Kind.FIELD, f"{type_qn}.{name}", name, type_qn, line, initializer=init))
            if self.text(i) == ",":
                i += 1
                continue
            return self.expect(i, ";")

    def skip_expression(self, i: int, end: int) -> int:
        """Advance to the ``,`` or ``;`` that ends a field initializer."""
        angle = 0
        while i < end:
            t = self.toks[i]
            if t.text in ("(", "{", "["):
                i = self.match_close(i) + 1
                continue
            if t.text == "<" and i > 0 and self.toks[i - 1].kind == IDENT and self.toks[i - 1].text[:1].isupper():
                angle += 1
            elif t.text == ">" and angle:
                angle -= 1
            elif t.text == ">>" and angle:
                angle = max(0, angle - 2)
            elif t.text in (",", ";") and angle == 0:
                return i
            i += 1
        self.fail(i, "unterminated field initializer")


# -- statement analysis -----------------------------------------------------

def split_statements(tokens: Sequence[Token]) -> list[list[Token]]:
    """Split a body into statements at ``;`` (outside parentheses) and braces."""
    out: list[list[Token]] = []
    cur: list[Token] = []
    depth = 0
    for t in tokens:
        if t.text in ("{", "}"):
            depth = 0
            if cur:
                out.append(cur)
            cur = []
        elif t.text == ";" and depth == 0:
            if cur:
                out.append(cur)
            cur = []
        else:
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth = max(0, depth - 1)
            cur.append(t)
    if cur:
        out.append(cur)
    return out


def _declared_locals(stmt: Sequence[Token]) -> set[str]:
    names = set()
    generic_open = any(
        stmt[k].text == "<" and k > 0 and stmt[k - 1].kind == IDENT and stmt[k - 1].text[:1].isupper()
        for k in range(len(stmt))
    )
    for k in range(1, len(stmt)):
        t = stmt[k]
        if t.kind != IDENT:
            continue
        nxt = stmt[k + 1].text if k + 1 < len(stmt) else ";"
        if nxt not in ("=", ";", ":", ",", ")"):
            continue
        prev = stmt[k - 1]
        if (
            prev.kind == IDENT
            or (prev.kind == KEYWORD and prev.text in PRIMITIVES)
            or prev.text == "]"
            or (prev.text in (">", ">>") and generic_open)
        ):
            names.add(t.text)
    return names


def analyze_statements(body: Sequence[Token], params: Iterable[str]) -> tuple[Statement, ...]:
    shadowed = set(params)
    out = []
    for stmt in split_statements(body):
        shadowed |= _declared_locals(stmt)
        bare, this_m, members = set(), set(), set()
        for k, t in enumerate(stmt):
            if t.kind != IDENT:
                continue
            if k + 1 < len(stmt) and stmt[k + 1].text == "(":
                continue
            if k > 0 and stmt[k - 1].text == ".":
                recv = stmt[k - 2].text if k > 1 else ""
                (this_m if recv in ("this", "super") else members).add(t.text)
            elif t.text not in shadowed:
                bare.add(t.text)
        out.append(Statement(multiset_of(stmt), frozenset(bare), frozenset(this_m), frozenset(members)))
    return tuple(out)


def extract_calls(body: Sequence[Token]) -> frozenset:
    calls = set()
    n = len(body)
    for k, t in enumerate(body):
        if t.kind != IDENT or k + 1 >= n or body[k + 1].text != "(":
            continue
        if k > 0 and body[k - 1].text in ("new", "@"):
            continue
        calls.add(Call(t.text, _arg_count(body, k + 1)))
    return frozenset(calls)


def _arg_count(body: Sequence[Token], open_: int) -> int:
    depth = 0
    angle = 0
    commas = 0
    for k in range(open_, len(body)):
        t = body[k].text
        if t in ("(", "[", "{"):
            depth += 1
        elif t in (")", "]", "}"):
            depth -= 1
            if depth == 0:
                return 0 if k == open_ + 1 else commas + 1
        elif depth == 1:
            if t == "<" and body[k - 1].kind == IDENT and body[k - 1].text[:1].isupper():
                angle += 1
            elif t == ">" and angle:
                angle -= 1
            elif t == "," and angle == 0:
                commas += 1
    return commas + 1


# -- model construction ------------------------------------------------------

def parse_file(path: str, text: str) -> tuple[list[_Raw], list[Token], int]:
    result = lex(text.replace("\r\n", "\n").replace("\r", "\n"))
    parser = _FileParser(path, result.tokens)
    return parser.parse(), result.tokens, result.skipped


def _nested_in(qn: str, outer: str) -> bool:
    return qn.startswith(outer + ".")


@dataclass
class FieldAccessIndex:
    """Inverted index from a simple name to statements that mention it."""

    bare: dict = field(default_factory=lambda: defaultdict(list))
    member: dict = field(default_factory=lambda: defaultdict(list))

    @classmethod
    def build(cls, model: CodeModel) -> "FieldAccessIndex":
        idx = cls()
        for m in model.methods:
            for stmt in m.statements:
                for name in stmt.bare | stmt.this_members:
                    idx.bare[name].append((m, stmt))
                for name in stmt.members:
                    idx.member[name].append((m, stmt))
        return idx


def _owns_access(model: CodeModel, method: CodeEntity, owner: EntityId) -> bool:
    c = method.container
    if c == owner or _nested_in(c.qualified_name, owner.qualified_name):
        return True
    return owner.signature in model.supertypes_of(c)


def build_field_virtual_body(
    field_entity: CodeEntity, model: CodeModel, index: FieldAccessIndex | None = None
) -> TokenMultiset:
    """Multiset sum of every statement in ``model`` that reads or writes the field.

    A statement counts when it uses the name bare (unshadowed) or as
    ``this.name`` inside a method of the owning type, its nested types or
    parsed subtypes, or as ``expr.name`` anywhere.
    """
    if field_entity.kind is not Kind.FIELD:
        raise ValueError("virtual bodies are defined for fields only")
    name = field_entity.name
    owner = field_entity.container
    body = TokenMultiset()
    if index is None:
        hits = []
        for m in model.methods:
            for stmt in m.statements:
                if name in stmt.members or (
                    (name in stmt.bare or name in stmt.this_members) and _owns_access(model, m, owner)
                ):
                    hits.append(stmt)
    else:
        seen: set[int] = set()
        hits = []
        for m, stmt in index.bare.get(name, ()):
            if id(stmt) not in seen and _owns_access(model, m, owner):
                seen.add(id(stmt))
                hits.append(stmt)
        for _m, stmt in index.member.get(name, ()):
            if id(stmt) not in seen:
                seen.add(id(stmt))
                hits.append(stmt)
    for stmt in hits:
        body.update(stmt.tokens)
    return body


def _method_field_accesses(model: CodeModel, method: CodeEntity, field_owners: dict) -> frozenset:
    names = set()
    container = method.container
    visible = {container.signature} | model.supertypes_of(container)
    outer = container.qualified_name
    for stmt in method.statements:
        for name in stmt.bare | stmt.this_members:
            for owner in field_owners.get(name, ()):
                if owner.signature in visible or _nested_in(outer, owner.qualified_name):
                    names.add(name)
        for name in stmt.members:
            if name in field_owners:
                names.add(name)
    return frozenset(names)


def parse_source_set(files: Iterable[tuple[str, str]], revision_label: str = "") -> CodeModel:
    """Build the entity model of one revision.

    Files that fail to parse are left out and their :class:`ParseError`
    is recorded in ``model.errors``.
    """
    entities: list[CodeEntity] = []
    errors: list[ParseError] = []
    taken: set[EntityId] = set()
    skipped = 0
    for path, text in sorted(files):
        try:
            raws, toks, nskip = parse_file(path, text)
        except ParseError as exc:
            errors.append(exc)
            continue
        built = [_to_entity(raw, toks, path) for raw in raws]
        clash = next((e for e in built if e.id in taken), None)
        if clash is not None:
            errors.append(ParseError(path, 1, f"duplicate declaration of {clash.id.descriptor()}"))
            continue
        skipped += nskip
        taken.update(e.id for e in built)
        entities.extend(built)

    draft = CodeModel(entities, revision_label)
    index = FieldAccessIndex.build(draft)
    field_owners: dict[str, list[EntityId]] = defaultdict(list)
    for f in draft.fields:
        field_owners[f.name].append(f.container)
    final = []
    for e in entities:
        if e.kind is Kind.FIELD:
            e = dataclasses.replace(e, tokens=build_field_virtual_body(e, draft, index))
        elif e.kind is Kind.METHOD:
            e = dataclasses.replace(e, field_accesses=_method_field_accesses(draft, e, field_owners))
        final.append(e)
    return CodeModel(final, revision_label, errors, skipped)


def _to_entity(raw: _Raw, toks: list[Token], path: str) -> CodeEntity:
    container = EntityId(Kind.TYPE, raw.container, raw.container.rpartition(".")[2]) if raw.container else None
    eid = EntityId(raw.kind, raw.qualified_name, raw.signature)
    if raw.kind is Kind.TYPE:
        lo, hi = raw.body
        return CodeEntity(eid, container, multiset_of(toks[lo:hi]), path, supertypes=raw.supertypes)
    if raw.kind is Kind.METHOD:
        body = toks[raw.body[0]:raw.body[1]] if raw.body else []
        return CodeEntity(
            eid, container, multiset_of(body), path,
            calls=extract_calls(body),
            statements=analyze_statements(body, (p[1] for p in raw.params)),
            is_constructor=raw.is_constructor,
            param_types=tuple(p[0] for p in raw.params),
        )
    return CodeEntity(eid, container, TokenMultiset(), path)
