import math
import os
import random
import subprocess
import sys

import numpy as np
import pytest

from refdetect import CodeEntity, EntityId, Kind, TokenMultiset, parse_source_set
from refdetect import _kernels
from refdetect.similarity import EmptyCorpus, EmptyNumeratorBasis, WeightIndex, sim, sim_u, weight

import oracles


def entity(name, bag):
    eid = EntityId(Kind.METHOD, f"p.C.{name}", f"{name}()")
    return CodeEntity(eid, EntityId(Kind.TYPE, "p.C", "C"), TokenMultiset(bag), "p/C.java")


@pytest.fixture
def calculator_index(calculator_text):
    methods = parse_source_set([("demo/Calculator.java", calculator_text)]).methods
    return WeightIndex(methods), {m.name: m for m in methods}


def test_idf_of_calculator_tokens(calculator_index):
    index, _ = calculator_index
    assert index.idf("y") == pytest.approx(0.398, abs=1e-3)
    assert index.idf("else") == pytest.approx(0.602, abs=1e-3)
    assert index.idf("y") == math.log10(1 + 3 / 2)


def test_token_in_every_entity_has_idf_log2(calculator_index):
    index, _ = calculator_index
    assert index.idf("return") == pytest.approx(math.log10(2))
    big = WeightIndex([entity(f"m{k}", {"t": 1, f"u{k}": 1}) for k in range(11)])
    assert big.idf("t") == pytest.approx(math.log10(2))


def test_weight_examples(calculator_index):
    index, m = calculator_index
    assert weight(m["min"], "y", index) == pytest.approx(0.796, abs=1e-3)
    assert weight(m["power"], "if", index) == 0.0
    corpus = [entity("solo", {"t": 3})] + [entity(f"o{k}", {"o": 1}) for k in range(7)]
    assert weight(corpus[0], "t", WeightIndex(corpus)) == pytest.approx(3 * math.log10(9), abs=1e-3)
    assert 3 * math.log10(9) == pytest.approx(2.863, abs=1e-3)


def test_idf_decreases_with_document_frequency():
    ents = [entity("a", {"r": 1, "c": 1}), entity("b", {"c": 1}), entity("d", {"c": 1, "r": 1, "s": 1})]
    index = WeightIndex(ents)
    assert index.idf("s") > index.idf("r") > index.idf("c")


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        WeightIndex([])


def test_small_worked_pair():
    e1, e2 = entity("a", {"a": 1, "b": 1}), entity("b", {"a": 1, "c": 1})
    index = WeightIndex([e1, e2])
    expected = oracles.sim(e1.tokens, e2.tokens, [e1.tokens, e2.tokens])
    assert sim(e1, e2, index) == pytest.approx(expected, abs=1e-12)


def test_sim_u_asymmetry():
    e1, e2 = entity("a", {"a": 2, "b": 1}), entity("b", {"a": 1})
    corpus = [e1.tokens, e2.tokens]
    index = WeightIndex([e1, e2])
    assert sim_u(e1, e2, index) == pytest.approx(oracles.sim_u(e1.tokens, e2.tokens, corpus), abs=1e-12)
    assert sim_u(e2, e1, index) == 1.0
    assert sim_u(e1, e2, index) != sim_u(e2, e1, index)


def test_trivial_values():
    e1, e2, e3 = entity("a", {"a": 1}), entity("b", {"b": 2}), entity("e", {})
    index = WeightIndex([e1, e2, e3])
    assert sim(e1, e1, index) == 1.0
    assert sim(e1, e2, index) == 0.0
    assert sim_u(e1, e2, index) == 0.0
    assert sim(e3, e3, index) == 0.0
    with pytest.raises(EmptyNumeratorBasis):
        sim_u(e3, e1, index)


def test_entities_outside_index():
    ents = [entity("a", {"a": 1, "b": 2}), entity("b", {"b": 1})]
    index = WeightIndex(ents)
    copy = entity("c", {"a": 1, "b": 2})
    assert not index.has(copy)
    assert sim(copy, ents[1], index) == sim(ents[0], ents[1], index)


def _random_case(rng):
    alphabet = [f"t{k}" for k in range(rng.randint(1, 10))]
    bags = []
    for _ in range(rng.randint(2, 6)):
        bag = {t: rng.randint(1, 5) for t in alphabet if rng.random() < 0.5}
        bags.append(bag)
    if not bags[0]:
        bags[0] = {alphabet[0]: 1}
    return bags


def test_random_pairs_match_brute_force():
    """Randomized oracle equivalence plus the algebraic properties."""
    rng = random.Random(20240501)
    for case in range(1500):
        bags = _random_case(rng)
        ents = [entity(f"m{k}", b) for k, b in enumerate(bags)]
        index = WeightIndex(ents)
        e1, e2 = ents[0], ents[1]
        s12, s21 = sim(e1, e2, index), sim(e2, e1, index)
        assert abs(s12 - oracles.sim(bags[0], bags[1], bags)) <= 1e-12, case
        assert s12 == s21
        assert 0.0 <= s12 <= 1.0
        assert sim(e1, e1, index) == pytest.approx(1.0, abs=1e-15)
        u = sim_u(e1, e2, index)
        assert abs(u - oracles.sim_u(bags[0], bags[1], bags)) <= 1e-12, case
        assert 0.0 <= u <= 1.0 + 1e-15
        subset = all(m <= bags[1].get(t, 0) for t, m in bags[0].items())
        assert (abs(u - 1.0) <= 1e-12) == subset, case


def _random_csr(rng, n_rows=40, vocab=30):
    indptr, ids, w = [0], [], []
    for _ in range(n_rows):
        toks = sorted(rng.sample(range(vocab), rng.randint(0, 12)))
        ids.extend(toks)
        w.extend(rng.uniform(0.05, 4.0) for _ in toks)
        indptr.append(len(ids))
    return np.array(indptr, np.int64), np.array(ids, np.int64), np.array(w)


@pytest.mark.skipif(_kernels.pair_stats_numba is None, reason="numba unavailable")
def test_numba_and_numpy_kernels_bit_identical():
    rng = random.Random(3)
    indptr, ids, w = _random_csr(rng)
    left = np.array([rng.randrange(40) for _ in range(500)], np.int64)
    right = np.array([rng.randrange(40) for _ in range(500)], np.int64)
    a = _kernels.pair_stats_numba(indptr, ids, w, left, right)
    b = _kernels.pair_stats_numpy(indptr, ids, w, left, right)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_env_flag_selects_numpy_backend():
    code = "import refdetect; print(refdetect.BACKEND)"
    env = dict(os.environ, REFDETECT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
