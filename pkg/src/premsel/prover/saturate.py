"""Given-clause saturation with binary resolution, factoring and subsumption."""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from ..tptp import Problem
from .clausify import EQUALITY_ORIGIN, ClauseSet, clausify
from .terms import (canonical, clause_max_var, is_tautology, shift, subsumes,
                    substitute, term_size, unify)
from .types import (COUNTER_SATISFIABLE, RESOURCE_OUT, SATISFIABLE, THEOREM,
                    ProverResult, StrategySpec)


@dataclass(frozen=True)
class ProofStep:
    """One line of a refutation.  ``parents`` index earlier steps."""

    lits: tuple
    rule: str                 # "input", "resolve" or "factor"
    parents: tuple = ()
    source: str = ""          # origin formula name for input steps


class _Clause:
    __slots__ = ("id", "lits", "weight", "rule", "parents", "source", "alive", "selected", "keys")

    def __init__(self, cid, lits, weight, rule, parents, source):
        self.id = cid
        self.lits = lits
        self.weight = weight
        self.rule = rule
        self.parents = parents
        self.source = source
        self.alive = True
        self.selected = False
        self.keys = frozenset((s, a[0]) for s, a in lits)


def resolvents(c1: tuple, c2: tuple):
    """All binary resolvents of two clauses (variables renamed apart)."""
    off = clause_max_var(c1) + 1
    c2s = tuple((s, shift(a, off)) for s, a in c2)
    for i, (s1, a1) in enumerate(c1):
        for j, (s2, a2) in enumerate(c2s):
            if s1 == s2 or a1[0] != a2[0] or len(a1) != len(a2):
                continue
            mgu = unify(a1, a2)
            if mgu is None:
                continue
            rest = [(s, substitute(a, mgu)) for k, (s, a) in enumerate(c1) if k != i]
            rest += [(s, substitute(a, mgu)) for k, (s, a) in enumerate(c2s) if k != j]
            yield canonical(rest)


def factors(c: tuple):
    for i in range(len(c)):
        si, ai = c[i]
        for j in range(i + 1, len(c)):
            sj, aj = c[j]
            if si != sj or ai[0] != aj[0]:
                continue
            mgu = unify(ai, aj)
            if mgu is None:
                continue
            yield canonical([(s, substitute(a, mgu)) for k, (s, a) in enumerate(c) if k != j])


def _weight(lits, sym_weight: int) -> int:
    return sum(term_size(a, sym_weight) for _, a in lits)


class _Budget(Exception):
    pass


def saturate(cs: ClauseSet, s: StrategySpec = StrategySpec(), limit_millis: int = 1000) -> ProverResult:
    """Run the given-clause loop on ``cs``.

    Clause selection takes ``age_ratio`` oldest clauses per ``weight_ratio``
    lightest ones.  The time limit is turned into a deterministic budget of
    given clauses (``given_rate`` per second); ``max_seconds`` is a wall-clock
    backstop.
    """
    if s.kind != "builtin":
        raise ValueError("saturate needs a builtin strategy")
    start = time.perf_counter()
    max_given = max(1, int(limit_millis * s.given_rate / 1000))
    wall = s.max_seconds if s.max_seconds is not None else max(2.0, 4 * limit_millis / 1000)
    store: list = []
    seen: set = set()
    age_heap: list = []
    weight_heap: list = []
    active: list = []
    index: dict = {}   # (sign, pred) -> active clauses containing such a literal

    def elapsed_ms() -> int:
        return int((time.perf_counter() - start) * 1000)

    def add(lits, rule, parents, source):
        if lits in seen:
            return None
        seen.add(lits)
        c = _Clause(len(store), lits, _weight(lits, s.symbol_weight), rule, parents, source)
        store.append(c)
        heapq.heappush(age_heap, c.id)
        heapq.heappush(weight_heap, (c.weight, c.id))
        return c

    def forward_subsumed(lits) -> bool:
        keys = {(sg, a[0]) for sg, a in lits}
        for key in keys:
            for d in index.get(key, ()):
                if d.alive and d.keys <= keys and subsumes(d.lits, lits):
                    return True
        return False

    def finish(empty: _Clause) -> ProverResult:
        proof = _extract(store, empty)
        used = {st.source for st in proof if st.rule == "input"}
        used -= {EQUALITY_ORIGIN}
        conj = {c.origin for c in cs.clauses if c.role == "negated_conjecture"}
        steps = sum(1 for st in proof if st.rule != "input")
        return ProverResult(THEOREM, frozenset(used - conj), elapsed_ms(), steps, proof)

    for ic in cs.clauses:
        c = add(ic.lits, "input", (), ic.origin)
        if c is not None and not c.lits:
            return finish(c)

    given_count = 0
    picks = 0
    try:
        while True:
            if given_count >= max_given or len(store) > s.max_clauses:
                raise _Budget
            if given_count % 64 == 0 and time.perf_counter() - start > wall:
                raise _Budget
            given = None
            while given is None and (age_heap or weight_heap):
                by_age = picks % (s.age_ratio + s.weight_ratio) < s.age_ratio
                if by_age and age_heap:
                    cid = heapq.heappop(age_heap)
                elif weight_heap:
                    cid = heapq.heappop(weight_heap)[1]
                else:
                    cid = heapq.heappop(age_heap)
                cand = store[cid]
                if cand.alive and not cand.selected:
                    given = cand
            if given is None:
                break
            picks += 1
            given_count += 1
            given.selected = True
            if forward_subsumed(given.lits):
                given.alive = False
                continue
            # backward subsumption
            for key in given.keys:
                for d in index.get(key, ()):
                    if d.alive and given.keys <= d.keys and subsumes(given.lits, d.lits):
                        d.alive = False
            active.append(given)
            for key in given.keys:
                index.setdefault(key, []).append(given)
            new = [(lits, "factor", (given.id,)) for lits in factors(given.lits)]
            partners = set()
            for sg, a in given.lits:
                for d in index.get((not sg, a[0]), ()):
                    if d.alive and d.id not in partners:
                        partners.add(d.id)
            for did in sorted(partners):
                d = store[did]
                for lits in resolvents(given.lits, d.lits):
                    new.append((lits, "resolve", (given.id, d.id)))
            for lits, rule, parents in new:
                if not lits:
                    c = add(lits, rule, parents, "")
                    if c is None:
                        continue
                    return finish(c)
                if is_tautology(lits) or lits in seen or forward_subsumed(lits):
                    continue
                add(lits, rule, parents, "")
    except _Budget:
        return ProverResult(RESOURCE_OUT, frozenset(), elapsed_ms(), 0)
    status = COUNTER_SATISFIABLE if cs.has_negated_conjecture else SATISFIABLE
    return ProverResult(status, frozenset(), elapsed_ms(), 0)


def _extract(store: list, empty: _Clause) -> list:
    needed = set()
    stack = [empty.id]
    while stack:
        cid = stack.pop()
        if cid in needed:
            continue
        needed.add(cid)
        stack.extend(store[cid].parents)
    order = sorted(needed)
    pos = {cid: i for i, cid in enumerate(order)}
    return [ProofStep(store[cid].lits, store[cid].rule, tuple(pos[p] for p in store[cid].parents),
                      store[cid].source) for cid in order]


def prove(problem: Problem, s: StrategySpec = StrategySpec(), limit_millis: int = 1000) -> ProverResult:
    """Clausify and saturate ``problem`` with a builtin strategy."""
    cs = clausify(problem, with_equality=s.equality_axioms)
    return saturate(cs, s, limit_millis)
