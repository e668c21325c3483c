"""Synthetic revision pairs and repositories.

Two generators live here:

* :func:`planted_corpus` builds revision pairs that each hold exactly one
  candidate relationship, true or decoy, whose similarity is steered into a
  chosen window. With a true instance just above a planted threshold and a
  decoy just below it, the F1-optimal grid threshold of every type is known
  in advance.
* :func:`build_history_repo` writes a git repository of generated classes
  followed by a linear run of refactoring commits, for throughput checks.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import subprocess
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .model import CodeModel, EntityId, Kind
from .source_model import parse_source_set
from .thresholds import REPORTED_TYPES
from .thresholds import RelationshipType as RT

# Planted F1-optimal threshold per type; spread over the grid on purpose.
PLANTED_TAUS: dict[RT, float] = {
    RT.MoveType: 0.3,
    RT.RenameType: 0.5,
    RT.MoveAndRenameType: 0.7,
    RT.ExtractSupertype: 0.4,
    RT.PullUpMethod: 0.6,
    RT.PushDownMethod: 0.2,
    RT.RenameMethod: 0.9,
    RT.MoveMethod: 0.5,
    RT.ExtractMethod: 0.3,
    RT.InlineMethod: 0.6,
    RT.PullUpField: 0.4,
    RT.PushDownField: 0.8,
    RT.MoveField: 0.1,
}

# Keeps planted similarities clear of grid points.
MARGIN = 0.015

ASYMMETRIC = frozenset({RT.ExtractSupertype, RT.ExtractMethod, RT.InlineMethod})


@dataclass
class PlantedPair:
    label: str
    type: RT
    true: bool
    before: EntityId
    after: EntityId
    window: tuple[float, float]
    before_files: dict = field(default_factory=dict)
    after_files: dict = field(default_factory=dict)
    similarity: float = math.nan

    def reported(self) -> tuple[str, str]:
        """(before, after) descriptors as the detector reports the relationship."""
        return self.before.descriptor(), self.after.descriptor()


def brute_similarity(e1_tokens: Counter, e2_tokens: Counter, idf: dict, asymmetric: bool) -> float:
    """Weighted Jaccard (or its containment variant) by direct summation."""
    w1 = {t: m * idf[t] for t, m in e1_tokens.items()}
    w2 = {t: m * idf[t] for t, m in e2_tokens.items()}
    num = sum(min(w1.get(t, 0.0), w2.get(t, 0.0)) for t in w1.keys() | w2.keys())
    den = sum(w1.values()) if asymmetric else sum(max(w1.get(t, 0.0), w2.get(t, 0.0)) for t in w1.keys() | w2.keys())
    return num / den if den else 0.0


def corpus_idf(before: CodeModel, after: CodeModel) -> dict:
    entities = list(before) + list(after)
    df = Counter()
    for e in entities:
        df.update(set(e.tokens))
    return {t: math.log10(1 + len(entities) / n) for t, n in df.items()}


# -- source templates -------------------------------------------------------

def _stmt(ids: tuple[str, str, str], mutated: bool, lead: str | None = None) -> str:
    a, b, c = ids
    if lead is not None:
        return f"{lead} -= {b}x / {c}x;" if mutated else f"{lead} += {b} * {c};"
    return f"int {a}x = {b}x - {c}x;" if mutated else f"long {a} = {b} * {c};"


def _block(ids, mutated: set, indent: str, lead: str | None = None) -> str:
    return "".join(f"{indent}{_stmt(t, k in mutated, lead)}\n" for k, t in enumerate(ids))


def _decls(ids, mutated: set) -> str:
    out = []
    for k, (a, b, c) in enumerate(ids):
        if k in mutated:
            out.append(f"    protected int {a}x = {b}x - {c}x;\n")
        else:
            out.append(f"    static final long {a} = {b} * {c};\n")
    return "".join(out)


def _cls(pkg: str, name: str, body: str = "", extends: str = "") -> str:
    ext = f" extends {extends}" if extends else ""
    return f"package {pkg};\n\npublic class {name}{ext} {{\n{body}}}\n"


def _method(name: str, body: str) -> str:
    return f"    public void {name}() {{\n{body}    }}\n"


def _path(pkg: str, name: str) -> str:
    return pkg.replace(".", "/") + f"/{name}.java"


def _tid(pkg, name):
    return EntityId(Kind.TYPE, f"{pkg}.{name}", name)


def _mid(pkg, cls, name, params=""):
    return EntityId(Kind.METHOD, f"{pkg}.{cls}.{name}", f"{name}({params})")


def _fid(pkg, cls, name):
    return EntityId(Kind.FIELD, f"{pkg}.{cls}.{name}", name)


def _render(rel: RT, pkg: str, ids, mut: set, extra):
    """Before files, after files, before id, after id for one planted candidate."""
    b, a = {}, {}
    blk = _block(ids, set(), "        ")
    blk_m = _block(ids, mut, "        ")
    if rel in (RT.MoveType, RT.RenameType, RT.MoveAndRenameType):
        sub_b = pkg + ".old" if rel is not RT.RenameType else pkg
        sub_a = pkg + ".fresh" if rel is not RT.RenameType else pkg
        name_a = "Widget" if rel is RT.MoveType else "Gadget"
        b[_path(sub_b, "Widget")] = _cls(sub_b, "Widget", _decls(ids, set()))
        a[_path(sub_a, name_a)] = _cls(sub_a, name_a, _decls(ids, mut))
        return b, a, _tid(sub_b, "Widget"), _tid(sub_a, name_a)
    if rel is RT.ExtractSupertype:
        b[_path(pkg, "Leaf")] = _cls(pkg, "Leaf", _decls(ids, set()))
        a[_path(pkg, "Leaf")] = _cls(pkg, "Leaf", _decls(ids, set()), extends="Base")
        a[_path(pkg, "Base")] = _cls(pkg, "Base", _decls(ids, mut))
        return b, a, _tid(pkg, "Leaf"), _tid(pkg, "Base")
    if rel is RT.RenameMethod:
        b[_path(pkg, "Host")] = _cls(pkg, "Host", _method("alpha", blk))
        a[_path(pkg, "Host")] = _cls(pkg, "Host", _method("omega", blk_m))
        return b, a, _mid(pkg, "Host", "alpha"), _mid(pkg, "Host", "omega")
    if rel is RT.MoveMethod:
        b[_path(pkg, "Source")] = _cls(pkg, "Source", _method("work", blk))
        b[_path(pkg, "Target")] = _cls(pkg, "Target")
        a[_path(pkg, "Source")] = _cls(pkg, "Source")
        a[_path(pkg, "Target")] = _cls(pkg, "Target", _method("work", blk_m))
        return b, a, _mid(pkg, "Source", "work"), _mid(pkg, "Target", "work")
    if rel in (RT.PullUpMethod, RT.PushDownMethod):
        up = rel is RT.PullUpMethod
        b[_path(pkg, "Parent")] = _cls(pkg, "Parent", "" if up else _method("work", blk))
        b[_path(pkg, "Child")] = _cls(pkg, "Child", _method("work", blk) if up else "", extends="Parent")
        a[_path(pkg, "Parent")] = _cls(pkg, "Parent", _method("work", blk_m) if up else "")
        a[_path(pkg, "Child")] = _cls(pkg, "Child", "" if up else _method("work", blk_m), extends="Parent")
        src, dst = ("Child", "Parent") if up else ("Parent", "Child")
        return b, a, _mid(pkg, src, "work"), _mid(pkg, dst, "work")
    if rel in (RT.ExtractMethod, RT.InlineMethod):
        keep = _block(extra, set(), "        ")
        whole = _cls(pkg, "Host", _method("run", keep + blk))
        split = _cls(pkg, "Host", _method("run", keep + "        helper();\n") + "\n" + _method("helper", blk_m))
        if rel is RT.ExtractMethod:
            b[_path(pkg, "Host")], a[_path(pkg, "Host")] = whole, split
            return b, a, _mid(pkg, "Host", "run"), _mid(pkg, "Host", "helper")
        # Inline: the helper's original body ends up, rewritten, inside run.
        inlined = _cls(pkg, "Host", _method("run", keep + blk_m))
        b[_path(pkg, "Host")] = _cls(pkg, "Host", _method("run", keep + "        helper();\n") + "\n" + _method("helper", blk))
        a[_path(pkg, "Host")] = inlined
        return b, a, _mid(pkg, "Host", "helper"), _mid(pkg, "Host", "run")
    fld = "counter"
    uses = _block(ids, set(), "        ", lead=fld)
    uses_m = _block(ids, mut, "        ", lead=fld)
    if rel in (RT.PullUpField, RT.PushDownField):
        up = rel is RT.PullUpField
        decl = f"    protected long {fld};\n"
        b[_path(pkg, "Parent")] = _cls(pkg, "Parent", "" if up else decl)
        b[_path(pkg, "Child")] = _cls(pkg, "Child", (decl if up else "") + _method("use", uses), extends="Parent")
        a[_path(pkg, "Parent")] = _cls(pkg, "Parent", decl if up else "")
        a[_path(pkg, "Child")] = _cls(pkg, "Child", ("" if up else decl) + _method("use", uses_m), extends="Parent")
        src, dst = ("Child", "Parent") if up else ("Parent", "Child")
        return b, a, _fid(pkg, src, fld), _fid(pkg, dst, fld)
    if rel is RT.MoveField:
        link = "    Target other = new Target();\n"
        uses_m = _block(ids, mut, "        ", lead=f"other.{fld}")
        b[_path(pkg, "Source")] = _cls(pkg, "Source", link + f"    long {fld};\n" + _method("use", uses))
        b[_path(pkg, "Target")] = _cls(pkg, "Target")
        a[_path(pkg, "Source")] = _cls(pkg, "Source", link + _method("use", uses_m))
        a[_path(pkg, "Target")] = _cls(pkg, "Target", f"    long {fld};\n")
        return b, a, _fid(pkg, "Source", fld), _fid(pkg, "Target", fld)
    raise ValueError(f"no template for {rel}")


def _measure(rel: RT, b_files: dict, a_files: dict, bid: EntityId, aid: EntityId) -> float:
    before = parse_source_set(b_files.items())
    after = parse_source_set(a_files.items())
    if before.errors or after.errors:
        raise AssertionError(f"generated code does not parse: {before.errors + after.errors}")
    idf = corpus_idf(before, after)
    e1, e2 = before.get(bid), after.get(aid)
    if rel in (RT.ExtractMethod, RT.ExtractSupertype):
        e1, e2 = e2, e1  # scored as (added entity, origin)
    return brute_similarity(e1.tokens, e2.tokens, idf, rel in ASYMMETRIC)


def _windows(tau: float) -> list[tuple[bool, float, float]]:
    """(is_true, low, high) windows that make ``tau`` the unique F1 argmax."""
    lo_edge, hi_edge = round(tau - 0.1, 10), round(min(tau + 0.1, 1.0), 10)
    wins = [(True, tau, hi_edge), (True, hi_edge if tau < 0.85 else tau, 1.0)]
    if tau > 0.15:
        wins.append((False, lo_edge, tau))
    if tau > 0.25:
        wins.append((False, 0.0, lo_edge))
    return wins


def _plant(rel: RT, label: str, pkg: str, low: float, high: float, rng: random.Random, is_true: bool):
    for n in (12, 16, 20, 24, 30, 36, 44):
        ids = [(f"{label}a{k}", f"{label}b{k}", f"{label}c{k}") for k in range(n)]
        extra = [(f"{label}p{k}", f"{label}q{k}", f"{label}r{k}") for k in range(n // 2)]
        order = list(range(n))
        rng.shuffle(order)
        for k in range(n + 1):
            mut = set(order[:k])
            b, a, bid, aid = _render(rel, pkg, ids, mut, extra)
            s = _measure(rel, b, a, bid, aid)
            lo_ok = s > low + MARGIN or (low == 0.0 and s > 0)
            hi_ok = s <= high - MARGIN or (high == 1.0 and s <= 1.0)
            if lo_ok and hi_ok:
                return PlantedPair(label, rel, is_true, bid, aid, (low, high), b, a, s)
            if s <= low:
                break
    raise RuntimeError(f"cannot plant {rel} in ({low}, {high}]")


def planted_corpus(taus: dict | None = None, seed: int = 0) -> list[PlantedPair]:
    """One planted pair per (type, window); see :func:`_windows`."""
    rng = random.Random(seed)
    taus = dict(PLANTED_TAUS if taus is None else taus)
    pairs = []
    for rel in REPORTED_TYPES:
        if rel not in taus:
            continue
        for k, (is_true, low, high) in enumerate(_windows(taus[rel])):
            label = f"{rel.label.lower()}{k}"
            pairs.append(_plant(rel, label, f"syn.{label}", low, high, rng, is_true))
    return pairs


def write_planted_corpus(root, pairs: list[PlantedPair]) -> Path:
    """Write before/after directories, oracles and a calibration manifest."""
    root = Path(root)
    items = []
    for p in pairs:
        for side, files in (("before", p.before_files), ("after", p.after_files)):
            for rel_path, text in files.items():
                target = root / p.label / side / rel_path
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(text, encoding="utf-8")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["type", "before", "after"])
        if p.true:
            w.writerow([p.type.label, *p.reported()])
        (root / p.label / "oracle.csv").write_text(buf.getvalue(), encoding="utf-8")
        items.append({"label": p.label, "before": f"{p.label}/before", "after": f"{p.label}/after",
                      "oracle": f"{p.label}/oracle.csv"})
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({"pairs": items}, indent=2), encoding="utf-8")
    return manifest


# -- history repository -----------------------------------------------------

_GIT_ENV = {
    "GIT_AUTHOR_NAME": "synthetic",
    "GIT_AUTHOR_EMAIL": "synthetic@example.invalid",
    "GIT_COMMITTER_NAME": "synthetic",
    "GIT_COMMITTER_EMAIL": "synthetic@example.invalid",
    "GIT_CONFIG_NOSYSTEM": "1",
}


def git(repo, *args: str, when: int | None = None) -> str:
    env = dict(os.environ, **_GIT_ENV)
    env["HOME"] = str(repo)
    if when is not None:
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = f"{when} +0000"
    out = subprocess.run(["git", "-C", str(repo), *args], env=env, check=True,
                         stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    return out.stdout.decode()


@dataclass
class _GenMethod:
    name: str
    params: list
    body: list  # statement strings

    def render(self) -> str:
        ps = ", ".join(f"int {p}" for p in self.params)
        body = "".join(f"        {s}\n" for s in self.body)
        return f"    public int {self.name}({ps}) {{\n{body}    }}\n"


@dataclass
class _GenClass:
    pkg: str
    name: str
    fields: list
    methods: list

    @property
    def path(self) -> str:
        return _path(self.pkg, self.name)

    def render(self) -> str:
        decls = "".join(f"    private int {f} = {k};\n" for k, f in enumerate(self.fields))
        body = decls + "\n" + "\n".join(m.render() for m in self.methods)
        return _cls(self.pkg, self.name, body)


_WORDS = ("count total index offset limit score weight level delta width height depth size rate "
          "price amount balance cursor length margin factor bonus step seed span").split()


class _History:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.serial = 0

    def word(self) -> str:
        self.serial += 1
        return f"{self.rng.choice(_WORDS)}{self.serial}"

    def statement(self, names: list) -> str:
        r = self.rng
        x, y = r.choice(names), r.choice(names)
        kind = r.randrange(4)
        if kind == 0:
            return f"{x} = {y} * {r.randint(2, 9)} + {r.choice(names)};"
        if kind == 1:
            return f"if ({x} > {y}) {{ {x} = {x} - {r.randint(1, 5)}; }}"
        if kind == 2:
            return f"{x} += Math.max({y}, {r.randint(0, 99)});"
        return f"for (int i = 0; i < {y}; i++) {{ {x} ^= i; }}"

    def method(self, fields: list) -> _GenMethod:
        params = [self.word() for _ in range(self.rng.randint(0, 2))]
        local = self.word()
        names = fields + params + [local]
        body = [f"int {local} = {self.rng.randint(0, 50)};"]
        body += [self.statement(names) for _ in range(self.rng.randint(6, 14))]
        body.append(f"return {local};")
        return _GenMethod(self.word(), params, body)

    def klass(self, pkg: str) -> _GenClass:
        fields = [self.word() for _ in range(self.rng.randint(2, 5))]
        methods = [self.method(fields) for _ in range(self.rng.randint(4, 8))]
        return _GenClass(pkg, f"C{self.word().capitalize()}", fields, methods)


def build_history_repo(path, n_classes: int = 52, n_commits: int = 10, seed: int = 7) -> dict:
    """Create a git repo: one initial commit, then ``n_commits`` refactoring commits.

    Returns ``{"loc": lines in the initial snapshot, "commits": [ids...]}``
    where the list holds the refactoring commits in order.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    gen = _History(rng)
    packages = [f"org.synth.mod{k}" for k in range(5)]
    classes = [gen.klass(rng.choice(packages)) for _ in range(n_classes)]

    def write_all():
        for c in classes:
            target = path / c.path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(c.render(), encoding="utf-8")

    git(path, "init", "-q")
    write_all()
    loc = sum(c.render().count("\n") for c in classes)
    git(path, "add", "-A")
    git(path, "commit", "-q", "-m", "Initial import", when=1_600_000_000)

    commits = []
    for k in range(n_commits):
        ops = [_rename_method, _extract_method, _move_method, _edit_method, _rename_class]
        for _ in range(rng.randint(6, 12)):
            rng.choice(ops)(gen, classes, path)
        write_all()
        git(path, "add", "-A")
        git(path, "commit", "-q", "-m", f"Refactoring batch {k + 1}", when=1_600_000_000 + 3600 * (k + 1))
        commits.append(git(path, "rev-parse", "HEAD").strip())
    return {"loc": loc, "commits": commits}


def _rename_method(gen: _History, classes, root):
    c = gen.rng.choice(classes)
    m = gen.rng.choice(c.methods)
    m.name = gen.word()


def _extract_method(gen: _History, classes, root):
    c = gen.rng.choice(classes)
    m = gen.rng.choice(c.methods)
    if len(m.body) < 6 or m.params:
        return
    piece = m.body[2:5]
    helper = _GenMethod(gen.word(), [], piece + ["return 0;"])
    m.body[2:5] = [f"{helper.name}();"]
    c.methods.append(helper)


def _move_method(gen: _History, classes, root):
    src, dst = gen.rng.sample(classes, 2)
    if len(src.methods) < 2:
        return
    m = gen.rng.choice(src.methods)
    if any(x.name == m.name for x in dst.methods):
        return
    src.methods.remove(m)
    dst.methods.append(m)


def _edit_method(gen: _History, classes, root):
    c = gen.rng.choice(classes)
    m = gen.rng.choice(c.methods)
    names = c.fields + m.params
    m.body.insert(len(m.body) - 1, gen.statement(names))


def _rename_class(gen: _History, classes, root):
    c = gen.rng.choice(classes)
    (Path(root) / c.path).unlink()
    c.name = f"C{gen.word().capitalize()}"
