"""Independent replay of refutations produced by :mod:`saturate`.

Deliberately shares no inference code with the prover: unification, renaming
and clause comparison are reimplemented here in the plainest form.
"""

from __future__ import annotations

from .clausify import ClauseSet


def _vars(t, acc):
    if isinstance(t, int):
        acc.add(t)
    else:
        for a in t[1:]:
            _vars(a, acc)


def _resolve_var(t, s):
    while isinstance(t, int) and t in s:
        t = s[t]
    return t


def _occurs(v, t, s):
    t = _resolve_var(t, s)
    if isinstance(t, int):
        return v == t
    return any(_occurs(v, a, s) for a in t[1:])


def _unify(x, y, s):
    x, y = _resolve_var(x, s), _resolve_var(y, s)
    if x == y:
        return s
    if isinstance(x, int):
        return None if _occurs(x, y, s) else {**s, x: y}
    if isinstance(y, int):
        return None if _occurs(y, x, s) else {**s, y: x}
    if x[0] != y[0] or len(x) != len(y):
        return None
    for a, b in zip(x[1:], y[1:]):
        s = _unify(a, b, s)
        if s is None:
            return None
    return s


def _apply(t, s):
    t = _resolve_var(t, s)
    if isinstance(t, int):
        return t
    return (t[0],) + tuple(_apply(a, s) for a in t[1:])


def _offset(t, k):
    if isinstance(t, int):
        return t + k
    return (t[0],) + tuple(_offset(a, k) for a in t[1:])


def _one_step_resolvents(c1, c2):
    vs: set = set()
    for _, a in c1:
        _vars(a, vs)
    k = max(vs, default=-1) + 1
    c2 = [(sg, _offset(a, k)) for sg, a in c2]
    for i, (s1, a1) in enumerate(c1):
        for j, (s2, a2) in enumerate(c2):
            if s1 == s2:
                continue
            mgu = _unify(a1, a2, {})
            if mgu is None:
                continue
            lits = {(sg, _apply(a, mgu)) for n, (sg, a) in enumerate(c1) if n != i}
            lits |= {(sg, _apply(a, mgu)) for n, (sg, a) in enumerate(c2) if n != j}
            yield lits


def _one_step_factors(c):
    for i in range(len(c)):
        for j in range(len(c)):
            if i == j or c[i][0] != c[j][0]:
                continue
            mgu = _unify(c[i][1], c[j][1], {})
            if mgu is None:
                continue
            yield {(sg, _apply(a, mgu)) for n, (sg, a) in enumerate(c) if n != j}


def _match(p, t, s):
    if isinstance(p, int):
        if p in s:
            return s if s[p] == t else None
        return {**s, p: t}
    if isinstance(t, int) or p[0] != t[0] or len(p) != len(t):
        return None
    for a, b in zip(p[1:], t[1:]):
        s = _match(a, b, s)
        if s is None:
            return None
    return s


def _instance_of(general, specific) -> bool:
    """Some substitution maps every literal of ``general`` onto a literal of ``specific``."""
    general, specific = list(general), list(specific)

    def go(i, s):
        if i == len(general):
            return True
        sg, a = general[i]
        for sg2, b in specific:
            if sg2 == sg:
                s2 = _match(a, b, s)
                if s2 is not None and go(i + 1, s2):
                    return True
        return False

    return go(0, {})


def _same_up_to_renaming(a, b) -> bool:
    a, b = set(a), set(b)
    return len(a) == len(b) and _instance_of(a, b) and _instance_of(b, a)


def first_invalid_step(cs: ClauseSet, proof) -> int | None:
    """Index of the first step that does not replay, ``len(proof)`` if the
    proof does not end in the empty clause, or None when the proof is valid."""
    inputs = [ic.lits for ic in cs.clauses]
    for i, step in enumerate(proof):
        if step.rule == "input":
            if not any(_same_up_to_renaming(step.lits, c) for c in inputs):
                return i
            continue
        if any(p >= i or p < 0 for p in step.parents):
            return i
        if step.rule == "resolve" and len(step.parents) == 2:
            a, b = (proof[p].lits for p in step.parents)
            candidates = _one_step_resolvents(a, b)
        elif step.rule == "factor" and len(step.parents) == 1:
            candidates = _one_step_factors(proof[step.parents[0]].lits)
        else:
            return i
        if not any(_same_up_to_renaming(c, step.lits) for c in candidates):
            return i
    if not proof or proof[-1].lits:
        return len(proof)
    return None


def verify_refutation(cs: ClauseSet, proof) -> bool:
    return first_invalid_step(cs, proof) is None
