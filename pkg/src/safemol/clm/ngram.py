"""Interpolated absolute-discount n-gram language model over tokens.

For a context ``h`` of length ``m-1``::

    P_m(w | h) = max(c(h, w) - D, 0) / c(h) + D * N1+(h) / c(h) * P_{m-1}(w | h[1:])

where ``N1+(h)`` is the number of distinct tokens seen after ``h``. Unseen
contexts defer to the next lower order, and the recursion bottoms out in a
uniform distribution over every token except ``<bos>``. Sequences are
wrapped as ``<bos> tokens <eos>``.
"""
from __future__ import annotations

import gzip
import json
import math
from collections import Counter, OrderedDict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from safemol.clm.tokenizer import Vocabulary

FORMAT = "safemol-ngram"
VERSION = 1
_OFFSET = 32  # token id -> chr(id + _OFFSET) when keying contexts


class EmptyCorpus(ValueError):
    pass


def _key(ids: Sequence[int]) -> str:
    return "".join(chr(i + _OFFSET) for i in ids)


class NGramModel:
    """Count tables for orders ``1..order`` plus the smoothing parameters.

    ``tables[m]`` maps a context key (``m`` - 1 tokens) to a pair of arrays
    ``(next_ids, counts)``. A trained model is read-only.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        order: int,
        discount: float,
        tables: dict[int, dict[str, tuple[np.ndarray, np.ndarray]]],
        cache_size: int = 100_000,
    ) -> None:
        if order < 2:
            raise ValueError("order must be at least 2")
        if not 0.0 < discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        self.vocab = vocab
        self.order = order
        self.discount = discount
        self.tables = tables
        self._summary = {
            m: {ctx: (int(c.sum()), len(c)) for ctx, (_, c) in tab.items()} for m, tab in tables.items()
        }
        self._cache: OrderedDict[str, np.ndarray] = OrderedDict()
        self._cache_size = cache_size
        base = np.full(len(vocab), 1.0 / (len(vocab) - 1))
        base[vocab.bos] = 0.0
        self._base = base

    def __repr__(self) -> str:
        return f"NGramModel(order={self.order}, discount={self.discount}, vocab={len(self.vocab)})"

    # ------------------------------------------------------------------ probabilities

    def _context_ids(self, history: Sequence[int]) -> list[int]:
        return list(history[-(self.order - 1):]) if self.order > 1 else []

    def distribution(self, history: Sequence[int]) -> np.ndarray:
        """Next-token distribution over the whole vocabulary (``<bos>`` has mass 0)."""
        ctx = self._context_ids(history)
        key = _key(ctx)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        p = self._base
        d = self.discount
        for m in range(1, len(ctx) + 2):
            sub = key[len(key) - (m - 1):] if m > 1 else ""
            entry = self.tables[m].get(sub)
            if entry is None:
                continue
            ids, counts = entry
            total, distinct = self._summary[m][sub]
            q = p * (d * distinct / total)
            q[ids] += np.maximum(counts - d, 0.0) / total
            p = q
        p = p.copy() if p is self._base else p
        p.setflags(write=False)
        self._cache[key] = p
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return p

    def prob(self, history: Sequence[int], token: int) -> float:
        """Scalar version of :meth:`distribution`, without caching."""
        ctx = self._context_ids(history)
        key = _key(ctx)
        p = 0.0 if token == self.vocab.bos else 1.0 / (len(self.vocab) - 1)
        d = self.discount
        for m in range(1, len(ctx) + 2):
            sub = key[len(key) - (m - 1):] if m > 1 else ""
            entry = self.tables[m].get(sub)
            if entry is None:
                continue
            ids, counts = entry
            total, distinct = self._summary[m][sub]
            hit = np.searchsorted(ids, token)
            c = float(counts[hit]) if hit < len(ids) and ids[hit] == token else 0.0
            p = max(c - d, 0.0) / total + d * distinct / total * p
        return p

    def logprob(self, tokens: Sequence[str]) -> tuple[float, int]:
        """Natural-log probability of ``<bos> tokens <eos>`` and the number of scored tokens."""
        ids = [self.vocab.bos] + self.vocab.encode(tokens) + [self.vocab.eos]
        total = 0.0
        for t in range(1, len(ids)):
            total += math.log(self.prob(ids[:t], ids[t]))
        return total, len(ids) - 1

    def perplexity(self, corpus: Iterable[Sequence[str]]) -> float:
        lp = 0.0
        n = 0
        for seq in corpus:
            a, b = self.logprob(seq)
            lp += a
            n += b
        if n == 0:
            raise EmptyCorpus("no tokens to score")
        return math.exp(-lp / n)

    # ------------------------------------------------------------------ persistence

    def to_dict(self) -> dict:
        counts = {}
        for m in sorted(self.tables):
            rows = {}
            for ctx in sorted(self.tables[m]):
                ids, c = self.tables[m][ctx]
                rows[" ".join(str(ord(ch) - _OFFSET) for ch in ctx)] = [ids.tolist(), c.tolist()]
            counts[str(m)] = rows
        return {
            "format": FORMAT,
            "version": VERSION,
            "order": self.order,
            "discount": self.discount,
            "vocabulary": list(self.vocab.tokens),
            "counts": counts,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NGramModel":
        if data.get("format") != FORMAT:
            raise ValueError("not a safemol n-gram model file")
        if data.get("version") != VERSION:
            raise ValueError(f"unsupported model version {data.get('version')}")
        tables: dict[int, dict[str, tuple[np.ndarray, np.ndarray]]] = {}
        for m, rows in data["counts"].items():
            tab = {}
            for ctx, (ids, c) in rows.items():
                key = _key([int(x) for x in ctx.split()]) if ctx else ""
                tab[key] = (np.asarray(ids, dtype=np.int64), np.asarray(c, dtype=np.float64))
            tables[int(m)] = tab
        return cls(Vocabulary(data["vocabulary"]), int(data["order"]), float(data["discount"]), tables)

    def save(self, path: str | Path) -> None:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        path = Path(path)
        if path.suffix == ".gz":
            # mtime=0 keeps the file byte-identical across runs
            with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as fh:
                fh.write(text.encode("utf-8"))
        else:
            path.write_text(text, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        path = Path(path)
        if path.suffix == ".gz":
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def train_ngram(
    corpus: Iterable[Sequence[str]],
    order: int = 6,
    discount: float = 0.75,
    vocab: Vocabulary | None = None,
) -> NGramModel:
    """Count n-grams of every order up to ``order`` over tokenized sequences.

    Raises:
        EmptyCorpus: No sequences were given.
    """
    seqs = [list(s) for s in corpus]
    if not seqs:
        raise EmptyCorpus("training corpus is empty")
    if vocab is None:
        vocab = Vocabulary.from_corpus(seqs)
    if len(vocab) >= 0x10FFFF - _OFFSET:
        raise ValueError("vocabulary too large")
    counters = {m: Counter() for m in range(1, order + 1)}
    bos, eos = vocab.bos, vocab.eos
    for seq in seqs:
        s = _key([bos] + vocab.encode(seq) + [eos])
        n = len(s)
        for m in range(1, order + 1):
            # every window whose last char sits after the leading bos
            start = 1 if m == 1 else 0
            counters[m].update(s[j : j + m] for j in range(start, n - m + 1))
    tables: dict[int, dict[str, tuple[np.ndarray, np.ndarray]]] = {}
    for m, counter in counters.items():
        grouped: dict[str, dict[int, int]] = {}
        for gram, c in counter.items():
            grouped.setdefault(gram[:-1], {})[ord(gram[-1]) - _OFFSET] = c
        tab = {}
        for ctx, nxt in grouped.items():
            ids = sorted(nxt)
            tab[ctx] = (np.asarray(ids, dtype=np.int64), np.asarray([nxt[i] for i in ids], dtype=np.float64))
        tables[m] = tab
    return NGramModel(vocab, order, discount, tables)
