"""Brute-force reference implementations used as test oracles.

They favour the obvious formulation over speed: dense vectors over the whole
feature universe, exact rational summation, fixpoint iteration instead of
BFS, exhaustive enumeration instead of search.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from premsel.tptp import And, Atom, Fn, Iff, Implies, Not, Or, Quant, Var


def exact_sum(values) -> float:
    # a correctly rounded sum, whatever the order of the terms
    return float(sum((Fraction(v) for v in values), Fraction(0)))


# ---------------------------------------------------------------------------
# k-NN
# ---------------------------------------------------------------------------

def knn_similarity(c: dict, e: dict, idf: dict, use_idf: bool, normalize: bool, binarize: bool,
                   universe) -> float:
    parts = []
    for f in universe:
        x, y = c.get(f, 0), e.get(f, 0)
        if x and y:
            v = 1 if binarize else min(x, y)
            parts.append(idf.get(f, 0.0) * v if use_idf else float(v))
    s = exact_sum(parts)
    if not normalize or s == 0:
        return s

    def norm(vec):
        sq = []
        for f in universe:
            if vec.get(f, 0):
                w = 1 if binarize else vec[f]
                sq.append((idf.get(f, 0.0) * w) ** 2 if use_idf else w ** 2)
        return math.sqrt(exact_sum(sq))

    d = norm(c) * norm(e)
    return s / d if d else 0.0


def ranking_with_tail(scored: dict, candidates, fallback):
    head = sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))
    rest = [p for p in candidates if p not in scored]
    tail = []
    if fallback is not None:
        for p, s in fallback:
            if p in rest and all(p != q for q, _ in tail):
                tail.append((p, s))
    floor = min([s for _, s in tail], default=0.0)
    tail += [(p, floor - 1.0) for p in sorted(set(rest) - {q for q, _ in tail})]
    return head + tail


def knn_oracle(conj, query, features, kb, candidates, idf, k, use_idf, normalize, binarize,
               fallback=None):
    universe = sorted(set(query) | {f for fs in features.values() for f in fs})
    sims = []
    for e in sorted(kb):
        if e == conj or e not in features:
            continue
        sims.append((knn_similarity(query, features[e], idf, use_idf, normalize, binarize,
                                    universe), e))
    sims.sort(key=lambda se: (-se[0], se[1]))
    contributions = {p: [] for p in candidates}
    for s, e in sims[:k]:
        if s <= 0:
            continue
        share = s / math.log(len(kb[e]) + 1)
        for p in kb[e]:
            if p in contributions:
                contributions[p].append(share)
        if e in contributions:
            contributions[e].append(s)
    scored = {}
    for p, vals in contributions.items():
        if vals:
            total = exact_sum(vals)
            if total > 0:
                scored[p] = total
    return ranking_with_tail(scored, candidates, fallback)


# ---------------------------------------------------------------------------
# Naive Bayes
# ---------------------------------------------------------------------------

def jaccard_oracle(a, b) -> float:
    sa, sb = set(a), set(b)
    if not sa | sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def nbayes_oracle(conj, query, features, kb, candidates, idf, sigma):
    scored = {}
    for p in candidates:
        users = [e for e in kb if e != conj and p in kb[e]]
        if not users:
            continue
        cnt = len(users)
        parts = [math.log(1 + cnt)]
        for f in query:
            w = idf.get(f, 0.0)
            cf = len([e for e in users if f in features.get(e, {})])
            parts.append(w * math.log(cf / cnt + sigma) if cf > 0 else w * math.log(sigma))
        scored[p] = exact_sum(parts)
    base = (min(scored.values()) if scored else 0.0) - 1.0
    for p in candidates:
        if p not in scored:
            scored[p] = base - (1.0 - jaccard_oracle(features.get(p, {}), query))
    return sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))


# ---------------------------------------------------------------------------
# SInE
# ---------------------------------------------------------------------------

def formula_symbols(f) -> set:
    """Non-logical symbols, skipping equality and the truth constants."""
    out = set()

    def term(t):
        if isinstance(t, Fn):
            out.add(t.functor)
            for a in t.args:
                term(a)

    def walk(g):
        if isinstance(g, Atom):
            if g.pred not in ("=", "$true", "$false"):
                out.add(g.pred)
            for a in g.args:
                term(a)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Quant):
            walk(g.body)

    walk(f)
    return out


def sine_oracle(conj_syms, premise_syms: dict, tolerance: float):
    occ = {}
    for syms in premise_syms.values():
        for s in syms:
            occ[s] = occ.get(s, 0) + 1

    def triggers(s, a):
        syms = premise_syms[a]
        return s in syms and occ[s] <= tolerance * min(occ[t] for t in syms)

    # distances by relaxation until nothing changes
    dist = {s: 0 for s in conj_syms}
    level = {}
    changed = True
    while changed:
        changed = False
        for a, syms in premise_syms.items():
            reach = [dist[s] + 1 for s in syms if s in dist and triggers(s, a)]
            if reach and min(reach) < level.get(a, math.inf):
                level[a] = min(reach)
                changed = True
        for a, lv in level.items():
            for s in premise_syms[a]:
                if lv < dist.get(s, math.inf):
                    dist[s] = lv
                    changed = True
    occ_sum = {a: sum(occ[s] for s in syms) for a, syms in premise_syms.items()}
    scale = 1 + max(occ_sum.values(), default=0)
    missing = max(level.values(), default=0) + 1
    scores = {a: -(level.get(a, missing) + occ_sum[a] / scale) for a in premise_syms}
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


# ---------------------------------------------------------------------------
# Finite model evaluation
# ---------------------------------------------------------------------------

def _value(m, t, env):
    if isinstance(t, Var):
        return env[t.name]
    args = [_value(m, a, env) for a in t.args]
    arity, table = m.functions[t.functor]
    pos = 0
    for i, v in enumerate(args):
        pos += v * m.n ** (arity - 1 - i)
    return table[pos]


def holds(m, f, env=None) -> bool:
    """Tarski semantics by direct recursion over an environment dict."""
    env = env or {}
    if isinstance(f, Atom):
        if f.pred == "$true":
            return True
        if f.pred == "$false":
            return False
        vals = [_value(m, a, env) for a in f.args]
        if f.pred == "=":
            return vals[0] == vals[1]
        arity, table = m.predicates[f.pred]
        tuples = list(itertools.product(range(m.n), repeat=arity))
        return bool(table[tuples.index(tuple(vals))])
    if isinstance(f, Not):
        return not holds(m, f.arg, env)
    if isinstance(f, And):
        return all([holds(m, a, env) for a in f.args])
    if isinstance(f, Or):
        return any([holds(m, a, env) for a in f.args])
    if isinstance(f, Implies):
        return (not holds(m, f.left, env)) or holds(m, f.right, env)
    if isinstance(f, Iff):
        return holds(m, f.left, env) == holds(m, f.right, env)
    results = []
    for values in itertools.product(range(m.n), repeat=len(f.vars)):
        inner = dict(env)
        inner.update(zip(f.vars, values))
        results.append(holds(m, f.body, inner))
    return all(results) if f.kind == "!" else any(results)


# ---------------------------------------------------------------------------
# Set cover
# ---------------------------------------------------------------------------

def best_cover(solved: dict, size: int) -> int:
    """Largest number of problems covered by any ``size`` members."""
    ids = sorted(solved)
    best = 0
    for combo in itertools.combinations(ids, min(size, len(ids))):
        best = max(best, len(set().union(*(set(solved[i]) for i in combo))))
    return best
