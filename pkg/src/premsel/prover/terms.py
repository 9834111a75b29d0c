"""Clause-level term representation used by the saturation prover.

Variables are ``int``; applications are tuples ``(functor, *args)``.  A
literal is ``(positive, atom)`` with ``atom = (pred, *args)``.  A clause is a
sorted tuple of distinct literals whose variables are numbered ``0..k`` in
order of first occurrence.
"""

from __future__ import annotations


def is_var(t) -> bool:
    return type(t) is int


def walk(t, s: dict):
    while type(t) is int and t in s:
        t = s[t]
    return t


def occurs(v: int, t, s: dict) -> bool:
    t = walk(t, s)
    if type(t) is int:
        return t == v
    return any(occurs(v, a, s) for a in t[1:])


def unify(a, b, s: dict | None = None):
    """Most general unifier extending ``s`` (triangular form), or None."""
    s = {} if s is None else dict(s)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = walk(x, s), walk(y, s)
        if x == y:
            continue
        if type(x) is int:
            if occurs(x, y, s):
                return None
            s[x] = y
        elif type(y) is int:
            if occurs(y, x, s):
                return None
            s[y] = x
        elif x[0] != y[0] or len(x) != len(y):
            return None
        else:
            stack.extend(zip(x[1:], y[1:]))
    return s


def substitute(t, s: dict):
    t = walk(t, s)
    if type(t) is int:
        return t
    if len(t) == 1:
        return t
    return (t[0],) + tuple(substitute(a, s) for a in t[1:])


def match(pattern, target, s: dict):
    """One-way matching: bind only variables of ``pattern``.  Mutates ``s``; returns success."""
    if type(pattern) is int:
        bound = s.get(pattern)
        if bound is None:
            s[pattern] = target
            return True
        return bound == target
    if type(target) is int or pattern[0] != target[0] or len(pattern) != len(target):
        return False
    for p, t in zip(pattern[1:], target[1:]):
        if not match(p, t, s):
            return False
    return True


def shift(t, offset: int):
    if type(t) is int:
        return t + offset
    if len(t) == 1:
        return t
    return (t[0],) + tuple(shift(a, offset) for a in t[1:])


def max_var(t) -> int:
    if type(t) is int:
        return t
    return max((max_var(a) for a in t[1:]), default=-1)


def clause_max_var(lits) -> int:
    return max((max_var(a) for _, a in lits), default=-1)


def _shape(t):
    if type(t) is int:
        return "_"
    if len(t) == 1:
        return t[0]
    return (t[0],) + tuple(_shape(a) for a in t[1:])


def _lit_shape_key(lit):
    return (not lit[0], repr(_shape(lit[1])))


def _rename(t, m: dict):
    if type(t) is int:
        v = m.get(t)
        if v is None:
            v = m[t] = len(m)
        return v
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_rename(a, m) for a in t[1:])


def _lit_key(lit):
    return (not lit[0], repr(lit[1]))


def canonical(lits) -> tuple:
    """Deduplicate, sort and renumber variables of a literal collection."""
    uniq = list(dict.fromkeys(lits))
    uniq.sort(key=_lit_shape_key)
    m: dict = {}
    renamed = [(sign, _rename(atom, m)) for sign, atom in uniq]
    renamed = list(dict.fromkeys(renamed))
    renamed.sort(key=_lit_key)
    return tuple(renamed)


def is_tautology(lits) -> bool:
    pos = {a for s, a in lits if s}
    return any(not s and a in pos for s, a in lits)


def term_size(t, sym_weight: int) -> int:
    if type(t) is int:
        return 1
    return sym_weight + sum(term_size(a, sym_weight) for a in t[1:])


def subsumes(c, d) -> bool:
    """True if some substitution maps every literal of ``c`` into ``d``."""
    if len(c) > len(d):
        return False
    order = sorted(c, key=lambda l: -len(repr(l)))

    def search(i, s):
        if i == len(order):
            return True
        sign, atom = order[i]
        for dsign, datom in d:
            if dsign != sign or datom[0] != atom[0]:
                continue
            s2 = dict(s)
            if match(atom, datom, s2) and search(i + 1, s2):
                return True
        return False

    return search(0, {})


def fmt_term(t) -> str:
    if type(t) is int:
        return f"X{t}"
    if len(t) == 1:
        return t[0]
    return f"{t[0]}({','.join(fmt_term(a) for a in t[1:])})"


def fmt_clause(lits) -> str:
    if not lits:
        return "$false"
    parts = []
    for sign, atom in lits:
        if atom[0] == "=" and len(atom) == 3:
            s = f"{fmt_term(atom[1])} {'=' if sign else '!='} {fmt_term(atom[2])}"
        else:
            s = ("" if sign else "~") + fmt_term(atom)
        parts.append(s)
    return " | ".join(parts)
