"""FOF to clause normal form.

Pipeline per formula: negate the conjecture, negation normal form (with
``<=>`` expanded by polarity), renaming bound variables apart, miniscoping,
Skolemization (``sk1, sk2, ...`` in traversal order) and CNF.  CNF uses plain
distribution unless that would produce more than four times as many literals
as the NNF has, in which case disjunctions over conjunctions are named with
fresh ``dfN`` predicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..tptp import (And, Atom, Fn, Formula, Iff, Implies, Not, Or, Problem, Quant, Var,
                    signature_of, free_vars)
from .terms import canonical, is_tautology

EQUALITY_ORIGIN = "$equality"


class ClausificationError(Exception):
    pass


@dataclass(frozen=True)
class InputClause:
    lits: tuple
    origin: str   # source formula name
    role: str


@dataclass
class ClauseSet:
    clauses: list = field(default_factory=list)
    has_negated_conjecture: bool = False
    skolems: dict = field(default_factory=dict)   # skolem functor -> arity

    def __len__(self):
        return len(self.clauses)

    def origins(self) -> set:
        return {c.origin for c in self.clauses}


# NNF nodes: ("lit", positive, atom) | ("and", [..]) | ("or", [..])
#            | ("all", v, body) | ("ex", v, body) | ("true",) | ("false",)
TRUE, FALSE = ("true",), ("false",)


def _term(t, env: dict):
    if isinstance(t, Var):
        return ("?", env.get(t.name, t.name))
    return (t.functor,) + tuple(_term(a, env) for a in t.args)


def _mk(kind, parts):
    unit, zero = (TRUE, FALSE) if kind == "and" else (FALSE, TRUE)
    flat = []
    for p in parts:
        if p == zero:
            return zero
        if p == unit:
            continue
        if p[0] == kind:
            flat.extend(p[1])
        else:
            flat.append(p)
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return (kind, flat)


class _Namer:
    def __init__(self, taken: set):
        self.taken = taken
        self.var = 0
        self.sk = 0
        self.df = 0

    def fresh_var(self) -> str:
        self.var += 1
        return f"V{self.var}"

    def fresh(self, prefix: str) -> str:
        while True:
            if prefix == "sk":
                self.sk += 1
                name = f"sk{self.sk}"
            else:
                self.df += 1
                name = f"df{self.df}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _nnf(f: Formula, pos: bool, env: dict, namer: _Namer):
    if isinstance(f, Atom):
        if f.pred == "$true":
            return TRUE if pos else FALSE
        if f.pred == "$false":
            return FALSE if pos else TRUE
        return ("lit", pos, (f.pred,) + tuple(_term(a, env) for a in f.args))
    if isinstance(f, Not):
        return _nnf(f.arg, not pos, env, namer)
    if isinstance(f, (And, Or)):
        kind = "and" if isinstance(f, And) == pos else "or"
        return _mk(kind, [_nnf(a, pos, env, namer) for a in f.args])
    if isinstance(f, Implies):
        if pos:
            return _mk("or", [_nnf(f.left, False, env, namer), _nnf(f.right, True, env, namer)])
        return _mk("and", [_nnf(f.left, True, env, namer), _nnf(f.right, False, env, namer)])
    if isinstance(f, Iff):
        a, b = f.left, f.right
        if pos:
            return _mk("and", [_mk("or", [_nnf(a, False, env, namer), _nnf(b, True, env, namer)]),
                               _mk("or", [_nnf(a, True, env, namer), _nnf(b, False, env, namer)])])
        return _mk("or", [_mk("and", [_nnf(a, True, env, namer), _nnf(b, False, env, namer)]),
                          _mk("and", [_nnf(a, False, env, namer), _nnf(b, True, env, namer)])])
    universal = (f.kind == "!") == pos
    inner = dict(env)
    names = []
    for v in f.vars:
        inner[v] = namer.fresh_var()
        names.append(inner[v])
    body = _nnf(f.body, pos, inner, namer)
    for v in reversed(names):
        body = _quant("all" if universal else "ex", v, body)
    return body


def _free(node) -> set:
    kind = node[0]
    if kind == "lit":
        out: set = set()
        _term_vars(node[2], out)
        return out
    if kind in ("and", "or"):
        out = set()
        for p in node[1]:
            out |= _free(p)
        return out
    if kind in ("all", "ex"):
        return _free(node[2]) - {node[1]}
    return set()


def _term_vars(t, out: set):
    if t[0] == "?":
        out.add(t[1])
    else:
        for a in t[1:]:
            _term_vars(a, out)


def _quant(kind: str, v: str, body):
    """Build a quantifier node, pushing it inward as far as possible (miniscoping)."""
    if v not in _free(body):
        return body
    if body[0] in ("and", "or"):
        distributes = (kind == "all") == (body[0] == "and")
        if distributes:
            return _mk(body[0], [_quant(kind, v, p) for p in body[1]])
        with_v = [p for p in body[1] if v in _free(p)]
        without = [p for p in body[1] if v not in _free(p)]
        if without:
            return _mk(body[0], [_quant(kind, v, _mk(body[0], with_v))] + without)
    return (kind, v, body)


def _subst(t, env: dict):
    if t[0] == "?":
        return env.get(t[1], t)
    return (t[0],) + tuple(_subst(a, env) for a in t[1:])


def _skolemize(node, universals: list, env: dict, namer: _Namer, skolems: dict):
    kind = node[0]
    if kind == "lit":
        return ("lit", node[1], _subst(node[2], env))
    if kind in ("and", "or"):
        return (kind, [_skolemize(p, universals, env, namer, skolems) for p in node[1]])
    if kind == "all":
        return _skolemize(node[2], universals + [node[1]], env, namer, skolems)
    if kind == "ex":
        free = _free(node)
        deps = [u for u in universals if u in free]
        name = namer.fresh("sk")
        skolems[name] = len(deps)
        inner = dict(env)
        inner[node[1]] = (name,) + tuple(("?", u) for u in deps)
        return _skolemize(node[2], universals, inner, namer, skolems)
    return node


def _size(node) -> int:
    if node[0] == "lit":
        return 1
    if node[0] in ("and", "or"):
        return sum(_size(p) for p in node[1])
    return 0


def _cnf_size(node) -> tuple:
    """(clauses, literals) produced by naive distribution."""
    if node[0] == "lit":
        return 1, 1
    if node[0] == "and":
        sizes = [_cnf_size(p) for p in node[1]]
        return sum(c for c, _ in sizes), sum(l for _, l in sizes)
    if node[0] == "or":
        sizes = [_cnf_size(p) for p in node[1]]
        clauses = math.prod(c for c, _ in sizes)
        lits = sum(l * clauses // c for c, l in sizes)
        return clauses, lits
    return (0, 0) if node == TRUE else (1, 0)


def _distribute(node) -> list:
    if node == TRUE:
        return []
    if node == FALSE:
        return [[]]
    if node[0] == "lit":
        return [[(node[1], node[2])]]
    if node[0] == "and":
        out = []
        for p in node[1]:
            out.extend(_distribute(p))
        return out
    acc = [[]]
    for p in node[1]:
        acc = [a + b for a in acc for b in _distribute(p)]
    return acc


def _definitional(node, namer: _Namer, defs: list, top: bool):
    """Name conjunctions nested inside disjunctions; returns a node free of and-under-or."""
    if node[0] == "and":
        return ("and", [_definitional(p, namer, defs, top) for p in node[1]])
    if node[0] == "or":
        parts = []
        for p in node[1]:
            p = _definitional(p, namer, defs, False)
            if p[0] == "and":
                fv = sorted(_free(p))
                name = namer.fresh("df")
                atom = (name,) + tuple(("?", v) for v in fv)
                for conj in p[1]:
                    defs.append(_mk("or", [("lit", False, atom), conj]))
                p = ("lit", True, atom)
            parts.append(p)
        return _mk("or", parts)
    return node


def _to_clause(lits) -> tuple:
    vmap: dict = {}

    def conv(t):
        if t[0] == "?":
            v = vmap.get(t[1])
            if v is None:
                v = vmap[t[1]] = len(vmap)
            return v
        return (t[0],) + tuple(conv(a) for a in t[1:])

    return canonical([(sign, conv(atom)) for sign, atom in lits])


def _closed(f: Formula) -> Formula:
    fv = free_vars(f)
    return Quant("!", tuple(fv), f) if fv else f


def clausify_formula(f: Formula, namer: _Namer, skolems: dict, max_clauses: int = 10_000) -> list:
    node = _nnf(f, True, {}, namer)
    node = _skolemize(node, [], {}, namer, skolems)
    n_clauses, n_lits = _cnf_size(node)
    if n_lits > 4 * max(_size(node), 1):
        defs: list = []
        node = _mk("and", [_definitional(node, namer, defs, True)] + defs)
        n_clauses, _ = _cnf_size(node)
    if n_clauses > max_clauses:
        raise ClausificationError(f"clausification would produce {n_clauses} clauses")
    out = []
    for lits in _distribute(node):
        clause = _to_clause(lits)
        if not is_tautology(clause):
            out.append(clause)
    return out


def equality_axioms(functions: dict, predicates: dict) -> list:
    """Reflexivity, symmetry, transitivity and congruence clauses for ``=``."""
    eq = "="
    out = [((True, (eq, 0, 0)),),
           canonical([(False, (eq, 0, 1)), (True, (eq, 1, 0))]),
           canonical([(False, (eq, 0, 1)), (False, (eq, 1, 2)), (True, (eq, 0, 2))])]
    for name, arity in sorted(functions.items()):
        for i in range(arity):
            xs = list(range(2, arity + 2))
            ys = list(xs)
            xs[i], ys[i] = 0, 1
            out.append(canonical([(False, (eq, 0, 1)),
                                  (True, (eq, (name,) + tuple(xs), (name,) + tuple(ys)))]))
    for name, arity in sorted(predicates.items()):
        for i in range(arity):
            xs = list(range(2, arity + 2))
            ys = list(xs)
            xs[i], ys[i] = 0, 1
            out.append(canonical([(False, (eq, 0, 1)), (False, (name,) + tuple(xs)),
                                  (True, (name,) + tuple(ys))]))
    return out


def clausify(p: Problem, max_clauses: int = 10_000, with_equality: bool = True) -> ClauseSet:
    """Clause set of ``p``: the negated conjecture first, then the premises in order."""
    formulas = [nf.formula for nf in p.formulas]
    funcs, preds = signature_of(formulas)
    namer = _Namer(set(funcs) | set(preds))
    cs = ClauseSet()
    conj = p.conjecture
    for lits in clausify_formula(Not(_closed(conj.formula)), namer, cs.skolems, max_clauses):
        cs.clauses.append(InputClause(lits, conj.name, "negated_conjecture"))
    cs.has_negated_conjecture = True
    for nf in p.premises:
        for lits in clausify_formula(_closed(nf.formula), namer, cs.skolems, max_clauses):
            cs.clauses.append(InputClause(lits, nf.name, nf.role))
    uses_eq = any(a[0] == "=" for c in cs.clauses for _, a in c.lits)
    if with_equality and uses_eq:
        all_funcs = dict(funcs)
        all_funcs.update(cs.skolems)
        for lits in equality_axioms(all_funcs, preds):
            cs.clauses.append(InputClause(lits, EQUALITY_ORIGIN, "axiom"))
    return cs


def clause_formula(lits) -> Formula:
    """Universally closed FOF rendering of a clause (for model checks)."""
    def term(t):
        if type(t) is int:
            return Var(f"X{t}")
        return Fn(t[0], tuple(term(a) for a in t[1:]))

    parts = []
    for sign, atom in lits:
        a = Atom(atom[0], tuple(term(x) for x in atom[1:]))
        parts.append(a if sign else Not(a))
    if not parts:
        return Atom("$false")
    body = parts[0] if len(parts) == 1 else Or(tuple(parts))
    fv = free_vars(body)
    return Quant("!", tuple(fv), body) if fv else body
