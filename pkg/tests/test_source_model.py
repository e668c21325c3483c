from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refdetect import TokenMultiset, build_field_virtual_body, parse_source_set, tokenize_body
from refdetect.lexer import lex

from oracles import statement_bags_using


def _method(model, name):
    return next(e for e in model.methods if e.name == name)


def _field(model, name):
    return next(e for e in model.fields if e.name == name)


# -- tokenization ---------------------------------------------------------------

def test_tokenize_keeps_words_literals_and_operators():
    bag = tokenize_body('if (x < y) { return "a, b"; } // y y y\n/* x */ z += 1.5f;')
    assert bag == Counter({"if": 1, "x": 1, "<": 1, "y": 1, "return": 1, '"a, b"': 1, "z": 1, "+=": 1, "1.5f": 1})


def test_tokenize_empty_body():
    assert tokenize_body("") == TokenMultiset()
    assert tokenize_body("").size == 0


def test_tokenize_drops_structural_punctuation():
    bag = tokenize_body("a.b(c, d); { }")
    assert set(bag) == {"a", "b", "c", "d"}


def test_unlexable_characters_are_counted():
    diag = Counter()
    bag = tokenize_body("a # b", diagnostics=diag)
    assert bag == Counter({"a": 1, "b": 1})
    assert diag["unlexable"] == 1


def test_contextual_words_are_identifiers():
    model = parse_source_set([("p/Log.java", "package p; class Log { void record(int var) { var++; } }")])
    assert [m.id.signature for m in model.methods] == ["record(int)"]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abxy01+-*/=<>(){};,. \n\"'", max_size=80))
def test_tokenize_is_deterministic_and_bounded(text):
    first = tokenize_body(text)
    assert first == tokenize_body(text)
    assert first.size <= len(lex(text).tokens)
    assert all(v >= 1 for v in first.values())


# -- Calculator ------------------------------------------------------------------

def test_calculator_entities(calculator_text):
    model = parse_source_set([("demo/Calculator.java", calculator_text)], "r1")
    assert [e.id.qualified_name for e in model.types] == ["demo.Calculator"]
    assert sorted(m.id.signature for m in model.methods) == ["min(int,int)", "power(int,int)", "sum(int,int)"]
    for m in model.methods:
        assert m.container == model.types[0].id
    assert model.revision_label == "r1"


def test_calculator_multiplicities(calculator_text):
    model = parse_source_set([("demo/Calculator.java", calculator_text)])
    assert _method(model, "min").tokens["y"] == 2
    assert _method(model, "power").tokens["if"] == 0
    assert "if" not in _method(model, "power").tokens


def test_empty_file_list():
    model = parse_source_set([])
    assert len(model) == 0 and model.errors == []


def test_nested_types_get_nested_names():
    src = "package a; class Outer { class Inner { int v; void f() { v = 1; } } }"
    model = parse_source_set([("a/Outer.java", src)])
    assert {t.id.qualified_name for t in model.types} == {"a.Outer", "a.Outer.Inner"}
    assert _method(model, "f").container.qualified_name == "a.Outer.Inner"


def test_ids_are_unique(calculator_text):
    model = parse_source_set([("demo/Calculator.java", calculator_text)])
    ids = [e.id for e in model]
    assert len(ids) == len(set(ids))


def test_parse_error_excludes_only_failing_file(calculator_text):
    files = [("demo/Calculator.java", calculator_text), ("demo/Broken.java", "class Broken { void f( { }")]
    model = parse_source_set(files)
    assert [e.path for e in model.errors] == ["demo/Broken.java"]
    assert model.errors[0].line >= 1
    assert {e.source_file for e in model} == {"demo/Calculator.java"}


def test_calls_are_recorded():
    src = "class A { void f() { g(1, 2); h(); } void g(int a, int b) {} void h() {} }"
    f = _method(parse_source_set([("A.java", src)]), "f")
    assert f.calls_method("g", 2) and f.calls_method("h", 0)
    assert not f.calls_method("g", 1)


# -- fields ----------------------------------------------------------------------

ACCOUNT = """\
package bank;

class Account {
    private int total;
    private int unused;

    int getTotal() {
        return total;
    }
}
"""


def test_field_access_is_recorded():
    model = parse_source_set([("bank/Account.java", ACCOUNT)])
    assert _method(model, "getTotal").field_accesses == {"total"}
    assert {f.name for f in model.fields} == {"total", "unused"}


def test_virtual_body_of_single_read():
    model = parse_source_set([("bank/Account.java", ACCOUNT)])
    assert _field(model, "total").tokens == Counter({"return": 1, "total": 1})


def test_unused_field_has_empty_virtual_body():
    model = parse_source_set([("bank/Account.java", ACCOUNT)])
    assert _field(model, "unused").tokens == TokenMultiset()


def test_virtual_body_sums_statements():
    src = """\
class P {
    int v;

    void a(int x) {
        v = x + 1;
    }

    void b(int x) {
        int w = 3;
        v += x;
    }
}
"""
    model = parse_source_set([("P.java", src)])
    body = _field(model, "v").tokens
    assert body["x"] == 2
    expected = sum(statement_bags_using(src, "v", tokenize_body), Counter())
    assert body == expected


def test_virtual_body_ignores_shadowing_local():
    src = """\
class Q {
    int n;

    void a() {
        n = 1;
    }

    void b(int n) {
        log(n);
    }
}
"""
    model = parse_source_set([("Q.java", src)])
    assert _field(model, "n").tokens == Counter({"n": 1, "=": 1, "1": 1})


def test_virtual_body_counts_this_and_qualified_access():
    files = [
        ("R.java", "class R { int k; void set(int k) { this.k = k; } }"),
        ("S.java", "class S { void touch(R r) { r.k++; } }"),
    ]
    model = parse_source_set(files)
    assert _field(model, "k").tokens == Counter({"this": 1, "k": 3, "=": 1, "r": 1, "++": 1})


def test_virtual_body_function_matches_model():
    model = parse_source_set([("bank/Account.java", ACCOUNT)])
    f = _field(model, "total")
    assert build_field_virtual_body(f, model) == f.tokens
    with pytest.raises(ValueError):
        build_field_virtual_body(_method(model, "getTotal"), model)


def _random_class(stmts):
    lines = ["class Gen {", "    int f;", "    int g;", ""]
    for k, body in enumerate(stmts):
        lines.append(f"    void m{k}() {{")
        lines.extend(f"        {s};" for s in body)
        lines.append("    }")
        lines.append("")
    lines.append("}")
    return "\n".join(lines) + "\n"


_names = st.sampled_from(["f", "g", "a", "b", "c"])
_stmt = st.builds(lambda l, r, s, op: f"{l} {op} {r} * {s}", _names, _names, _names, st.sampled_from(["=", "+=", "-="]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(_stmt, min_size=1, max_size=4), min_size=1, max_size=4))
def test_virtual_body_matches_statement_scan(stmts):
    src = _random_class(stmts)
    model = parse_source_set([("Gen.java", src)])
    for name in ("f", "g"):
        expected = sum(statement_bags_using(src, name, tokenize_body), Counter())
        assert _field(model, name).tokens == expected
