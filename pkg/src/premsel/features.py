"""Sparse formula features, corpus statistics and similarity.

Features are interned strings such as ``sym:mul``, ``trm:mul(X1,X1)``,
``mod:7`` or ``lsa:13``.  A :data:`FeatureSet` is a plain ``dict`` from
feature id to a positive count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .tptp import And, Atom, Fn, Formula, Iff, Implies, Not, Or, Quant, Var

FeatureSet = dict  # FeatureId (int) -> count

SYMBOL, TERM, GENERIC_TERM, MODEL, LSA = "symbol", "term", "generic_term", "model", "lsa"
FEATURE_KINDS = (SYMBOL, TERM, GENERIC_TERM, MODEL, LSA)


class Interner:
    """Bijective map between feature strings and small integer handles."""

    def __init__(self):
        self._ids: dict = {}
        self._names: list = []

    def __len__(self):
        return len(self._names)

    def id(self, name: str) -> int:
        fid = self._ids.get(name)
        if fid is None:
            fid = self._ids[name] = len(self._names)
            self._names.append(name)
        return fid

    def lookup(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, fid: int) -> str:
        return self._names[fid]


class TermBank:
    """Hash-consed store of terms and atoms: one serial number per distinct term.

    With ``generic_vars`` set every variable is replaced by ``*`` before
    interning, so terms differing only in variables share a serial.
    """

    def __init__(self, generic_vars: bool = False):
        self.generic_vars = generic_vars
        self.frozen = False
        self._serial: dict = {}
        self._printed: list = []

    def __len__(self):
        return len(self._printed)

    def _store(self, key, printed: str) -> int:
        serial = self._serial.get(key)
        if serial is None:
            if self.frozen:
                raise RuntimeError("term bank is frozen")
            serial = self._serial[key] = len(self._printed)
            self._printed.append(printed)
        return serial

    def intern_term(self, t) -> int:
        return self._intern(t)[0]

    def _intern(self, t) -> tuple:
        if isinstance(t, Var):
            name = "*" if self.generic_vars else t.name
            return self._store(("v", name), name), name
        subs = [self._intern(a) for a in t.args]
        printed = t.functor if not subs else f"{t.functor}({','.join(p for _, p in subs)})"
        return self._store(("f", t.functor, tuple(s for s, _ in subs)), printed), printed

    def intern_atom(self, a: Atom) -> tuple:
        subs = [self._intern(x) for x in a.args]
        printed = a.pred if not subs else f"{a.pred}({','.join(p for _, p in subs)})"
        return self._store(("p", a.pred, tuple(s for s, _ in subs)), printed), printed

    def printed(self, serial: int) -> str:
        return self._printed[serial]

    def freeze(self):
        self.frozen = True


def _atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from _atoms(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _atoms(a)
    elif isinstance(f, (Implies, Iff)):
        yield from _atoms(f.left)
        yield from _atoms(f.right)
    elif isinstance(f, Quant):
        yield from _atoms(f.body)


def _count_symbols(t, counts: dict):
    if isinstance(t, Fn):
        counts[t.functor] = counts.get(t.functor, 0) + 1
        for a in t.args:
            _count_symbols(a, counts)


def extract_symbol_features(f: Formula, interner: Interner) -> FeatureSet:
    """Non-variable symbols of ``f`` with multiplicity (``=`` included)."""
    counts: dict = {}
    for atom in _atoms(f):
        counts[atom.pred] = counts.get(atom.pred, 0) + 1
        for arg in atom.args:
            _count_symbols(arg, counts)
    return {interner.id(f"sym:{s}"): c for s, c in counts.items()}


def extract_term_features(f: Formula, bank: TermBank, interner: Interner) -> FeatureSet:
    """All compound subterms and atoms of ``f`` plus its symbol features.

    Constants are covered by their ``sym:`` feature; bare variables are not
    features.
    """
    out = extract_symbol_features(f, interner)

    def visit(t):
        if isinstance(t, Var):
            return
        if t.args:
            _, printed = bank._intern(t)
            fid = interner.id(f"trm:{printed}")
            out[fid] = out.get(fid, 0) + 1
            for a in t.args:
                visit(a)

    for atom in _atoms(f):
        if atom.args:
            _, printed = bank.intern_atom(atom)
            fid = interner.id(f"trm:{printed}")
            out[fid] = out.get(fid, 0) + 1
        for arg in atom.args:
            visit(arg)
    return out


def jaccard(a: Mapping, b: Mapping) -> float:
    if not a and not b:
        return 1.0
    inter = sum(1 for k in a if k in b)
    return inter / (len(a) + len(b) - inter)


@dataclass
class FeatureStats:
    df: dict
    n: int

    def idf(self, fid: int) -> float:
        d = self.df.get(fid)
        if not d:
            return 0.0
        return math.log(self.n / d)

    def idf_map(self) -> dict:
        n = self.n
        return {f: math.log(n / d) for f, d in self.df.items()}


def compute_stats(corpus_features: Sequence[Mapping]) -> FeatureStats:
    if not corpus_features:
        raise ValueError("cannot compute feature statistics of an empty corpus")
    df: dict = {}
    for fs in corpus_features:
        for k in fs:
            df[k] = df.get(k, 0) + 1
    return FeatureStats(df, len(corpus_features))


# ---------------------------------------------------------------------------
# Latent semantic analysis
# ---------------------------------------------------------------------------

@dataclass
class TopicModel:
    rank: int
    components: np.ndarray        # r x F, orthonormal rows (right singular vectors)
    singular_values: np.ndarray   # length r, descending
    vectors: np.ndarray           # N x r topic vectors of the training rows

    def transform(self, rows) -> np.ndarray:
        """Project (IDF-weighted) feature rows onto the topic directions."""
        if sp.issparse(rows):
            return np.asarray(rows @ self.components.T)
        return np.asarray(rows, dtype=float) @ self.components.T


def feature_matrix(feature_sets: Sequence[Mapping], idf: Mapping | None = None,
                   n_features: int | None = None) -> sp.csr_matrix:
    """CSR matrix of counts (times IDF when given), one row per feature set."""
    rows, cols, vals = [], [], []
    width = 0
    for i, fs in enumerate(feature_sets):
        for k, c in fs.items():
            rows.append(i)
            cols.append(k)
            vals.append(c * (idf.get(k, 0.0) if idf is not None else 1.0))
            width = max(width, k + 1)
    shape = (len(feature_sets), n_features if n_features is not None else width)
    return sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=float)


def lsa_project(matrix, r: int, seed: int = 0) -> TopicModel:
    """Rank-``r`` truncated SVD of ``matrix`` (rows = formulas).

    ARPACK is used when ``r`` is strictly below the smaller matrix dimension;
    otherwise (and for tiny matrices) a dense SVD.  Singular vector signs are
    fixed so the largest-magnitude entry of each right singular vector is
    positive, making the result independent of the solver's start vector.
    """
    n, m = matrix.shape
    if r < 1 or r > min(n, m):
        raise ValueError(f"LSA rank {r} out of range 1..{min(n, m)}")
    if r < min(n, m) - 1 and min(n, m) > 20:
        rng = np.random.default_rng(seed)
        a = sp.csr_matrix(matrix, dtype=float)
        v0 = rng.uniform(-1.0, 1.0, size=min(n, m))
        _, s, vt = svds(a, k=r, v0=v0, solver="arpack")
        order = np.argsort(-s)
        s, vt = s[order], vt[order]
    else:
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
        _, s, vt = np.linalg.svd(dense, full_matrices=False)
        s, vt = s[:r], vt[:r]
    for i in range(r):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
    model = TopicModel(r, vt, s, np.zeros((n, r)))
    model.vectors = model.transform(matrix)
    return model


# ---------------------------------------------------------------------------
# Corpus-wide feature table
# ---------------------------------------------------------------------------

@dataclass
class FeatureTable:
    """Per-formula features of every kind over one corpus.

    ``sparse[kind][name]`` holds the FeatureSet of a formula; LSA topic vectors
    live in ``topics``.  Statistics are recomputed wholesale by
    :meth:`refresh_stats` and replaced, never mutated in place.
    """

    interner: Interner = field(default_factory=Interner)
    bank: TermBank = field(default_factory=TermBank)
    generic_bank: TermBank = field(default_factory=lambda: TermBank(generic_vars=True))
    sparse: dict = field(default_factory=lambda: {k: {} for k in (SYMBOL, TERM, GENERIC_TERM, MODEL)})
    stats: FeatureStats | None = None
    topics: dict = field(default_factory=dict)
    topic_model: TopicModel | None = None

    def add_formula(self, name: str, f: Formula):
        if name in self.sparse[SYMBOL]:
            return
        self.sparse[SYMBOL][name] = extract_symbol_features(f, self.interner)
        self.sparse[TERM][name] = extract_term_features(f, self.bank, self.interner)
        self.sparse[GENERIC_TERM][name] = extract_term_features(f, self.generic_bank, self.interner)
        self.sparse[MODEL].setdefault(name, {})

    def set_model_features(self, name: str, fs: Mapping):
        self.sparse[MODEL][name] = dict(fs)

    def names(self) -> list:
        return list(self.sparse[SYMBOL])

    def combined(self, name: str, kinds: Iterable[str]) -> FeatureSet:
        out: dict = {}
        for kind in kinds:
            if kind == LSA:
                continue
            out.update(self.sparse[kind].get(name, {}))
        return out

    def refresh_stats(self):
        names = self.names()
        merged = [self.combined(n, (TERM, GENERIC_TERM, MODEL)) for n in names]
        self.stats = compute_stats(merged) if merged else FeatureStats({}, 0)

    def fit_topics(self, rank: int, seed: int = 0, kinds=(TERM,)):
        if self.stats is None:
            self.refresh_stats()
        names = self.names()
        idf = self.stats.idf_map()
        mat = feature_matrix([self.combined(n, kinds) for n in names], idf, len(self.interner))
        rank = min(rank, *mat.shape)
        self.topic_model = lsa_project(mat, rank, seed)
        self.topics = {n: self.topic_model.vectors[i] for i, n in enumerate(names)}


def dump_features(table: FeatureTable, kinds: Iterable[str], names: Iterable[str] | None = None) -> str:
    """One line per formula: ``name feature:count ...`` sorted by feature string."""
    kinds = tuple(kinds)
    lines = []
    for name in (names if names is not None else table.names()):
        fs = table.combined(name, kinds)
        items = sorted((table.interner.name(k), c) for k, c in fs.items())
        lines.append(" ".join([name] + [f"{s}:{c}" for s, c in items]))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_feature_dump(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        name, *items = line.split(" ")
        fs = {}
        for item in items:
            feat, count = item.rsplit(":", 1)
            fs[feat] = int(count)
        out[name] = fs
    return out
