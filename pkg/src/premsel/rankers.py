"""Premise rankers: distance-weighted k-NN family, naive Bayes, SInE and combinations.

All rankers are pure functions of a :class:`RankContext` snapshot.  Scores are
summed with :func:`math.fsum` so results do not depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .features import GENERIC_TERM, LSA, MODEL, SYMBOL, TERM, FeatureTable, jaccard
from .tptp import NamedFormula, Problem, symbols_of

DEFAULT_K_VALUES = (1, 2, 4, 8, 16, 32, 64, 128)
DEFAULT_SLICES = (8, 16, 32, 64, 128)
DEFAULT_KINDS = (SYMBOL, TERM)
NB_SIGMA = 0.05
_SINE_IGNORED = {"=", "$true", "$false"}


@dataclass(frozen=True)
class Ranking:
    conjecture: str
    entries: tuple  # ((premise, score), ...) best first

    @property
    def names(self) -> list:
        return [p for p, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def score(self, name: str) -> float:
        for p, s in self.entries:
            if p == name:
                return s
        raise KeyError(name)

    def check(self):
        """Raise ValueError unless the ordering and tie-break laws hold."""
        seen = set()
        for i, (p, s) in enumerate(self.entries):
            if p in seen:
                raise ValueError(f"duplicate premise {p!r}")
            seen.add(p)
            if i:
                q, t = self.entries[i - 1]
                if t < s or (t == s and q > p):
                    raise ValueError(f"ordering violated at index {i}")

    def dumps(self) -> str:
        return "".join(f"{self.conjecture} {p} {s!r}\n" for p, s in self.entries)


def make_ranking(conjecture: str, scores: Mapping) -> Ranking:
    items = sorted(scores.items(), key=lambda ps: (-ps[1], ps[0]))
    return Ranking(conjecture, tuple(items))


@dataclass(frozen=True)
class KnnSpec:
    k: int
    use_idf: bool = True
    normalize: bool = True
    feature_kinds: tuple = DEFAULT_KINDS
    binarize: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not self.feature_kinds:
            raise ValueError("feature_kinds must be nonempty")


@dataclass(frozen=True)
class FamilySpec:
    k_values: tuple = DEFAULT_K_VALUES
    feature_kinds: tuple = DEFAULT_KINDS
    binarize: bool = False

    def subfamilies(self) -> list:
        return [(idf, norm) for idf in (False, True) for norm in (False, True)]

    def specs(self) -> list:
        return [KnnSpec(k, idf, norm, self.feature_kinds, self.binarize)
                for idf, norm in self.subfamilies() for k in self.k_values]


@dataclass(frozen=True)
class SineSpec:
    tolerance: float = 1.5
    depth: int | None = None
    generality: int | None = None

    def __post_init__(self):
        if self.tolerance < 1:
            raise ValueError("SInE tolerance must be >= 1")


@dataclass(frozen=True)
class NBayesSpec:
    feature_kinds: tuple = DEFAULT_KINDS
    sigma: float = NB_SIGMA


@dataclass(frozen=True)
class CombinedSpec:
    first: "RankerSpec"
    second: "RankerSpec"
    weight: float = 0.5


RankerSpec = Union[KnnSpec, NBayesSpec, SineSpec, CombinedSpec]


@dataclass
class RankContext:
    """Everything a learner sees when ranking premises for one conjecture."""

    conjecture: str
    query: dict                      # conjecture FeatureSet
    features: Mapping                # name -> FeatureSet (candidates and KB conjectures)
    kb: Mapping                      # solved conjecture -> frozenset of premises
    candidates: Sequence             # premise names available to the conjecture
    idf: Mapping = field(default_factory=dict)
    fallback: Ranking | None = None  # tail order for unscored premises
    query_topic: np.ndarray | None = None
    topics: Mapping | None = None


# ---------------------------------------------------------------------------
# k-NN
# ---------------------------------------------------------------------------

def _norm(fs: Mapping, idf: Mapping, use_idf: bool, binarize: bool) -> float:
    if use_idf:
        return math.sqrt(math.fsum((idf.get(f, 0.0) * (1 if binarize else c)) ** 2
                                   for f, c in fs.items()))
    return math.sqrt(math.fsum((1 if binarize else c) ** 2 for c in fs.values()))


def similarity(c: Mapping, e: Mapping, idf: Mapping, use_idf: bool, normalize: bool,
               binarize: bool, c_norm: float | None = None) -> float:
    small, large = (c, e) if len(c) <= len(e) else (e, c)
    terms = []
    for f, x in small.items():
        y = large.get(f)
        if y is None:
            continue
        v = 1 if binarize else min(x, y)
        terms.append(idf.get(f, 0.0) * v if use_idf else float(v))
    s = math.fsum(terms)
    if normalize and s:
        if c_norm is None:
            c_norm = _norm(c, idf, use_idf, binarize)
        denom = c_norm * _norm(e, idf, use_idf, binarize)
        s = s / denom if denom else 0.0
    return s


def _topic_sim(a: np.ndarray, b: np.ndarray, normalize: bool) -> float:
    s = math.fsum(float(x) * float(y) for x, y in zip(a, b))
    if normalize and s:
        na = math.sqrt(math.fsum(float(x) ** 2 for x in a))
        nb = math.sqrt(math.fsum(float(x) ** 2 for x in b))
        s = s / (na * nb) if na and nb else 0.0
    return s


def _neighbors(ctx: RankContext, use_idf: bool, normalize: bool, binarize: bool,
               with_topics: bool) -> list:
    """KB conjectures sorted by decreasing similarity (name breaks ties)."""
    c_norm = _norm(ctx.query, ctx.idf, use_idf, binarize) if normalize else None
    sims = []
    for e in ctx.kb:
        if e == ctx.conjecture or e not in ctx.features:
            continue
        s = similarity(ctx.query, ctx.features[e], ctx.idf, use_idf, normalize, binarize, c_norm)
        if with_topics and ctx.topics is not None and e in ctx.topics:
            s = math.fsum([s, _topic_sim(ctx.query_topic, ctx.topics[e], normalize)])
        sims.append((s, e))
    sims.sort(key=lambda se: (-se[0], se[1]))
    return sims


def _vote(ctx: RankContext, neighbors: Sequence, k: int) -> Ranking:
    cands = set(ctx.candidates)
    votes: dict = {}
    for s, e in neighbors[:k]:
        if s <= 0:
            continue
        deps = ctx.kb[e]
        share = s / math.log(len(deps) + 1)
        for p in deps:
            if p in cands:
                votes.setdefault(p, []).append(share)
        if e in cands:
            votes.setdefault(e, []).append(s)
    scores = {p: math.fsum(v) for p, v in votes.items()}
    scores = {p: s for p, s in scores.items() if s > 0}
    return _with_tail(ctx, scores, cands)


def _with_tail(ctx: RankContext, scores: dict, cands: set) -> Ranking:
    head = make_ranking(ctx.conjecture, scores)
    rest = cands - scores.keys()
    tail = []
    if ctx.fallback is not None:
        for p, s in ctx.fallback.entries:
            if p in rest:
                tail.append((p, s))
                rest.discard(p)
    floor = min((s for _, s in tail), default=0.0)
    tail.extend((p, floor - 1.0) for p in sorted(rest))
    return Ranking(ctx.conjecture, head.entries + tuple(tail))


def knn_rank(ctx: RankContext, spec: KnnSpec) -> Ranking:
    """Distance-weighted k-NN vote over solved conjectures.

    Each of the ``k`` most similar solved conjectures ``e`` adds
    ``sim / ln(|deps(e)| + 1)`` to every premise of its best proof and
    ``sim`` to ``e`` itself; unscored premises follow in fallback order.
    """
    neigh = _neighbors(ctx, spec.use_idf, spec.normalize, spec.binarize, LSA in spec.feature_kinds)
    return _vote(ctx, neigh, spec.k)


def knn_family(ctx: RankContext, fam: FamilySpec = FamilySpec()) -> list:
    """All ``4 x len(k_values)`` rankings; similarities computed once per subfamily."""
    out = []
    with_topics = LSA in fam.feature_kinds
    for use_idf, normalize in fam.subfamilies():
        neigh = _neighbors(ctx, use_idf, normalize, fam.binarize, with_topics)
        out.extend(_vote(ctx, neigh, k) for k in fam.k_values)
    return out


# ---------------------------------------------------------------------------
# Naive Bayes
# ---------------------------------------------------------------------------

def nbayes_rank(ctx: RankContext, sigma: float = NB_SIGMA) -> Ranking:
    """IDF-weighted naive Bayes over the KB's best proofs.

    Never-used premises are ranked below all used ones by Jaccard similarity
    of their own features to the conjecture.
    """
    cands = set(ctx.candidates)
    uses: dict = {}
    for e, deps in ctx.kb.items():
        if e == ctx.conjecture:
            continue
        efeat = ctx.features.get(e, {})
        for p in deps:
            if p in cands:
                uses.setdefault(p, []).append(efeat)
    ln_sigma = math.log(sigma)
    scores = {}
    for p, feats in uses.items():
        cnt = len(feats)
        terms = [math.log(1 + cnt)]
        for f in ctx.query:
            w = ctx.idf.get(f, 0.0)
            cf = sum(1 for fs in feats if f in fs)
            terms.append(w * math.log(cf / cnt + sigma) if cf else w * ln_sigma)
        scores[p] = math.fsum(terms)
    base = (min(scores.values()) if scores else 0.0) - 1.0
    for p in cands - scores.keys():
        scores[p] = base - (1.0 - jaccard(ctx.features.get(p, {}), ctx.query))
    return make_ranking(ctx.conjecture, scores)


# ---------------------------------------------------------------------------
# SInE
# ---------------------------------------------------------------------------

def sine_symbols(f) -> frozenset:
    return frozenset(s for s in symbols_of(f) if s not in _SINE_IGNORED)


def sine_levels(conj_symbols: Iterable[str], premise_symbols: Mapping, spec: SineSpec) -> dict:
    """BFS trigger levels (1-based) of the premises reachable from the conjecture."""
    occ: dict = {}
    for syms in premise_symbols.values():
        for s in syms:
            occ[s] = occ.get(s, 0) + 1
    triggers: dict = {}  # symbol -> premises it triggers
    for a, syms in premise_symbols.items():
        if not syms:
            continue
        least = min(occ[s] for s in syms)
        for s in syms:
            if occ[s] <= spec.tolerance * least or (
                    spec.generality is not None and occ[s] <= spec.generality):
                triggers.setdefault(s, []).append(a)
    levels: dict = {}
    seen = set(conj_symbols)
    frontier = set(conj_symbols)
    level = 1
    while frontier and (spec.depth is None or level <= spec.depth):
        new = set()
        for s in frontier:
            for a in triggers.get(s, ()):
                if a not in levels:
                    levels[a] = level
                    new.add(a)
        frontier = set()
        for a in new:
            frontier |= premise_symbols[a] - seen
        seen |= frontier
        level += 1
    return levels


def sine_rank_symbols(conjecture: str, conj_symbols: Iterable[str], premise_symbols: Mapping,
                      spec: SineSpec = SineSpec()) -> Ranking:
    levels = sine_levels(conj_symbols, premise_symbols, spec)
    occ: dict = {}
    for syms in premise_symbols.values():
        for s in syms:
            occ[s] = occ.get(s, 0) + 1
    occ_sum = {a: sum(occ[s] for s in syms) for a, syms in premise_symbols.items()}
    scale = 1 + max(occ_sum.values(), default=0)
    untriggered = max(levels.values(), default=0) + 1
    scores = {a: -(levels.get(a, untriggered) + occ_sum[a] / scale) for a in premise_symbols}
    return make_ranking(conjecture, scores)


def sine_rank(c: NamedFormula, premises: Sequence[NamedFormula], spec: SineSpec = SineSpec()) -> Ranking:
    """Symbol-trigger relevance: score is minus the BFS level (rarer symbols first within a level)."""
    return sine_rank_symbols(c.name, sine_symbols(c.formula),
                             {p.name: sine_symbols(p.formula) for p in premises}, spec)


# ---------------------------------------------------------------------------
# Combination and slicing
# ---------------------------------------------------------------------------

def combine_rankings(r1: Ranking, r2: Ranking, w: float) -> Ranking:
    """Linear combination of rank positions: key = w*pos1 + (1-w)*pos2, lower first."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("combination weight must lie in [0, 1]")
    pos1 = {p: i for i, p in enumerate(r1.names)}
    pos2 = {p: i for i, p in enumerate(r2.names)}
    universe = pos1.keys() | pos2.keys()
    missing = len(universe)
    keys = {p: w * pos1.get(p, missing) + (1 - w) * pos2.get(p, missing) for p in universe}
    items = sorted(keys.items(), key=lambda pk: (pk[1], pk[0]))
    return Ranking(r1.conjecture, tuple((p, -k) for p, k in items))


def slice_ranking(r: Ranking, n: int) -> list:
    if n <= 0:
        raise ValueError("slice size must be positive")
    return r.names[:n]


def premise_selections(rankings: Sequence[Ranking], sizes: Sequence[int] = DEFAULT_SLICES) -> list:
    """Every (ranking, slice size) selection, in ranking-major order."""
    return [slice_ranking(r, n) for r in rankings for n in sizes]


def parse_ranking_dump(text: str) -> list:
    return [(c, p, float(s)) for c, p, s in (line.split() for line in text.splitlines() if line.strip())]


# ---------------------------------------------------------------------------
# Predictor: builds contexts from a feature table and a KB snapshot
# ---------------------------------------------------------------------------

class Predictor:
    """Ranks the premises of problems against one immutable KB snapshot."""

    def __init__(self, table: FeatureTable, kb: Mapping, sine: SineSpec = SineSpec()):
        self.table = table
        self.kb = dict(kb)
        self.sine_spec = sine
        self.idf = table.stats.idf_map() if table.stats is not None else {}
        self._combined: dict = {}
        self._sine_cache: dict = {}

    def _features(self, kinds: tuple) -> dict:
        sparse_kinds = tuple(k for k in kinds if k != LSA) or (SYMBOL,)
        cached = self._combined.get(sparse_kinds)
        if cached is None:
            cached = {n: self.table.combined(n, sparse_kinds) for n in self.table.names()}
            self._combined[sparse_kinds] = cached
        return cached

    def sine(self, problem: Problem, spec: SineSpec | None = None) -> Ranking:
        spec = spec or self.sine_spec
        key = (problem.conjecture_name, problem.premise_names, spec)
        r = self._sine_cache.get(key)
        if r is None:
            r = self._sine_cache[key] = sine_rank(problem.conjecture, problem.premises, spec)
        return r

    def context(self, problem: Problem, kinds: tuple) -> RankContext:
        feats = self._features(kinds)
        conj = problem.conjecture_name
        ctx = RankContext(conj, feats.get(conj, {}), feats, self.kb, problem.premise_names,
                          self.idf, self.sine(problem))
        if LSA in kinds and self.table.topics:
            ctx.query_topic = self.table.topics.get(conj)
            ctx.topics = self.table.topics
        return ctx

    def rank(self, problem: Problem, spec: RankerSpec) -> Ranking:
        if isinstance(spec, KnnSpec):
            return knn_rank(self.context(problem, spec.feature_kinds), spec)
        if isinstance(spec, NBayesSpec):
            return nbayes_rank(self.context(problem, spec.feature_kinds), spec.sigma)
        if isinstance(spec, SineSpec):
            return self.sine(problem, spec)
        if isinstance(spec, CombinedSpec):
            return combine_rankings(self.rank(problem, spec.first),
                                    self.rank(problem, spec.second), spec.weight)
        raise TypeError(f"unknown ranker spec {spec!r}")

    def family(self, problem: Problem, fam: FamilySpec = FamilySpec()) -> list:
        return knn_family(self.context(problem, fam.feature_kinds), fam)


def describe_spec(spec: RankerSpec) -> str:
    """Short stable text form, e.g. ``knn(k=16,idf=1,norm=1,feat=symbol+term)``."""
    if isinstance(spec, KnnSpec):
        return (f"knn(k={spec.k},idf={int(spec.use_idf)},norm={int(spec.normalize)},"
                f"bin={int(spec.binarize)},feat={'+'.join(spec.feature_kinds)})")
    if isinstance(spec, NBayesSpec):
        return f"nb(feat={'+'.join(spec.feature_kinds)})"
    if isinstance(spec, SineSpec):
        return f"sine(t={spec.tolerance:g})"
    return f"comb({describe_spec(spec.first)},{describe_spec(spec.second)},w={spec.weight:g})"


ALL_KINDS = (SYMBOL, TERM, GENERIC_TERM, MODEL, LSA)
