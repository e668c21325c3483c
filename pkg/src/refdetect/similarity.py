"""TF-IDF token weights and weighted-Jaccard similarity between entities."""
from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .model import CodeEntity


class EmptyCorpus(ValueError):
    pass


class EmptyNumeratorBasis(ValueError):
    """Raised by :func:`sim_u` when the first entity has no tokens."""


class WeightIndex:
    """Document frequencies and idf values over a fixed entity corpus.

    ``idf(t) = log10(1 + |E| / n_t)`` where ``n_t`` counts the entities
    whose multiset contains ``t``. Each corpus entity also gets a sparse
    weight row (token ids in ascending token-string order).
    """

    def __init__(self, corpus: Iterable[CodeEntity]):
        entities = list(corpus)
        if not entities:
            raise EmptyCorpus("cannot build a weight index over an empty corpus")
        self.entity_count = len(entities)
        self.doc_frequency: Counter = Counter()
        for e in entities:
            self.doc_frequency.update(e.tokens.keys())
        vocab = sorted(self.doc_frequency)
        self.token_ids = {t: k for k, t in enumerate(vocab)}
        self.idf_cache = {t: math.log10(1.0 + self.entity_count / n) for t, n in self.doc_frequency.items()}
        self._idf = np.array([self.idf_cache[t] for t in vocab], dtype=np.float64)

        self._entities = entities  # keeps ids stable for the row map
        self._rows: dict[int, int] = {}
        indptr = [0]
        id_chunks, w_chunks = [], []
        for e in entities:
            if id(e) in self._rows:
                continue
            ids, w = self._vector(e)
            self._rows[id(e)] = len(indptr) - 1
            id_chunks.append(ids)
            w_chunks.append(w)
            indptr.append(indptr[-1] + len(ids))
        self.indptr = np.array(indptr, dtype=np.int64)
        self.ids = np.concatenate(id_chunks) if id_chunks else np.zeros(0, np.int64)
        self.weights = np.concatenate(w_chunks) if w_chunks else np.zeros(0)

    def __len__(self):
        return self.entity_count

    def idf(self, token: str) -> float:
        return self.idf_cache[token]

    def _vector(self, entity: CodeEntity) -> tuple[np.ndarray, np.ndarray]:
        try:
            pairs = sorted((self.token_ids[t], m) for t, m in entity.tokens.items() if m > 0)
        except KeyError as exc:
            raise KeyError(f"token {exc.args[0]!r} of {entity!r} is not in the index") from None
        ids = np.array([p[0] for p in pairs], dtype=np.int64)
        counts = np.array([p[1] for p in pairs], dtype=np.float64)
        return ids, counts * self._idf[ids]

    def has(self, entity: CodeEntity) -> bool:
        return id(entity) in self._rows

    def pair_stats(self, pairs: Sequence[tuple[CodeEntity, CodeEntity]]):
        """(sum of mins, sum of maxes, sum of left weights) for each pair."""
        if not pairs:
            empty = np.zeros(0)
            return empty, empty, empty
        if all(id(a) in self._rows and id(b) in self._rows for a, b in pairs):
            left = np.fromiter((self._rows[id(a)] for a, _ in pairs), np.int64, len(pairs))
            right = np.fromiter((self._rows[id(b)] for _, b in pairs), np.int64, len(pairs))
            return _kernels.pair_stats(self.indptr, self.ids, self.weights, left, right)
        # Entities outside the corpus: build a throwaway CSR for just these pairs.
        indptr, id_chunks, w_chunks = [0], [], []
        for a, b in pairs:
            for e in (a, b):
                ids, w = self._vector(e)
                id_chunks.append(ids)
                w_chunks.append(w)
                indptr.append(indptr[-1] + len(ids))
        n = len(pairs)
        return _kernels.pair_stats(
            np.array(indptr, dtype=np.int64),
            np.concatenate(id_chunks),
            np.concatenate(w_chunks),
            np.arange(0, 2 * n, 2),
            np.arange(1, 2 * n, 2),
        )

    def sims(self, pairs: Sequence[tuple[CodeEntity, CodeEntity]]) -> np.ndarray:
        mins, maxs, _ = self.pair_stats(pairs)
        out = np.zeros(len(mins))
        nz = maxs > 0
        out[nz] = mins[nz] / maxs[nz]
        return out

    def sims_u(self, pairs: Sequence[tuple[CodeEntity, CodeEntity]]) -> np.ndarray:
        mins, _, lsum = self.pair_stats(pairs)
        if np.any(lsum <= 0):
            bad = next(a for (a, _), s in zip(pairs, lsum) if s <= 0)
            raise EmptyNumeratorBasis(f"{bad!r} has an empty token multiset")
        return mins / lsum


def build_weight_index(corpus: Iterable[CodeEntity]) -> WeightIndex:
    return WeightIndex(corpus)


def weight(entity: CodeEntity, token: str, index: WeightIndex) -> float:
    m = entity.tokens.get(token, 0)
    if m == 0:
        return 0.0
    return m * index.idf(token)


def sim(e1: CodeEntity, e2: CodeEntity, index: WeightIndex) -> float:
    """Weighted Jaccard: sum of min weights over sum of max weights.

    Two empty entities score 0.
    """
    return float(index.sims([(e1, e2)])[0])


def sim_u(e1: CodeEntity, e2: CodeEntity, index: WeightIndex) -> float:
    """Share of ``e1``'s weight also present in ``e2``; 1 when e1 is a sub-multiset."""
    return float(index.sims_u([(e1, e2)])[0])
