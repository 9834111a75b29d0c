"""Finite models: evaluation, counter-model search and semantic features."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .features import FeatureSet, Interner
from .tptp import (And, Atom, Fn, Formula, Iff, Implies, Not, Or, Quant, Var,
                   free_vars, signature_of, symbols_of)


class ModelError(Exception):
    pass


class UninterpretedSymbol(ModelError):
    pass


class ModelBudgetExceeded(ModelError):
    """The enumeration budget ran out before the search space was exhausted."""


@dataclass
class FiniteModel:
    """Interpretation over the domain ``0..n-1``.

    ``functions`` maps a functor to ``(arity, table)`` and ``predicates`` a
    predicate to ``(arity, table)``; tables are row-major tuples over all
    argument tuples (values for functions, booleans for predicates).
    """

    n: int
    functions: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    id: int = -1

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("domain size must be at least 1")

    def relation(self, pred: str) -> set:
        arity, table = self.predicates[pred]
        tuples = itertools.product(range(self.n), repeat=arity)
        return {t for t, v in zip(tuples, table) if v}

    def key(self) -> tuple:
        return (self.n,
                tuple(sorted((k, a, tuple(t)) for k, (a, t) in self.functions.items())),
                tuple(sorted((k, a, tuple(t)) for k, (a, t) in self.predicates.items())))

    def extended(self, functions: dict, predicates: dict) -> "FiniteModel":
        """Copy interpreting every missing symbol by a default (0 / false)."""
        funcs = dict(self.functions)
        preds = dict(self.predicates)
        for name, arity in functions.items():
            funcs.setdefault(name, (arity, (0,) * self.n ** arity))
        for name, arity in predicates.items():
            preds.setdefault(name, (arity, (False,) * self.n ** arity))
        return FiniteModel(self.n, funcs, preds, self.id)

    # -- serialization ------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"model {self.id} size {self.n}"]
        for name in sorted(self.functions):
            arity, table = self.functions[name]
            lines.append(f"fun {name}/{arity} : {' '.join(map(str, table))}".rstrip())
        for name in sorted(self.predicates):
            arity = self.predicates[name][0]
            tuples = sorted(self.relation(name))
            body = " ".join("(" + ",".join(map(str, t)) + ")" for t in tuples)
            lines.append(f"pred {name}/{arity} : {body}".rstrip())
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FiniteModel":
        return next(iter(load_models(text)))


def load_models(text: str) -> list:
    out = []
    model = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "model":
            mid, _, size = rest.split()
            model = FiniteModel(int(size), id=int(mid))
        elif head == "end":
            out.append(model)
            model = None
        elif head in ("fun", "pred"):
            sym, _, body = rest.partition(" : ") if " : " in rest else (rest.rstrip(" :"), "", "")
            name, arity = sym.rsplit("/", 1)
            arity = int(arity)
            if head == "fun":
                model.functions[name] = (arity, tuple(int(x) for x in body.split()))
            else:
                true = set()
                for tok in body.split():
                    inner = tok.strip("()")
                    true.add(tuple(int(x) for x in inner.split(",")) if inner else ())
                table = tuple(t in true for t in itertools.product(range(model.n), repeat=arity))
                model.predicates[name] = (arity, table)
        else:
            raise ModelError(f"bad model line: {raw!r}")
    return out


# ---------------------------------------------------------------------------
# Evaluation (formulas compiled to closures over a variable-slot array)
# ---------------------------------------------------------------------------

def _index(args, n):
    i = 0
    for a in args:
        i = i * n + a
    return i


def _compile_term(t, slots: dict):
    if isinstance(t, Var):
        if t.name not in slots:
            raise ModelError(f"free variable {t.name} in evaluated formula")
        s = slots[t.name]
        return lambda m, env: env[s]
    name = t.functor
    if not t.args:
        return lambda m, env: m.functions[name][1][0]
    subs = [_compile_term(a, slots) for a in t.args]
    if len(subs) == 1:
        s0 = subs[0]
        return lambda m, env: m.functions[name][1][s0(m, env)]
    if len(subs) == 2:
        s0, s1 = subs
        return lambda m, env: m.functions[name][1][s0(m, env) * m.n + s1(m, env)]
    return lambda m, env: m.functions[name][1][_index([s(m, env) for s in subs], m.n)]


def _compile(f: Formula, slots: dict, depth: list):
    if isinstance(f, Atom):
        if f.pred == "$true":
            return lambda m, env: True
        if f.pred == "$false":
            return lambda m, env: False
        subs = [_compile_term(a, slots) for a in f.args]
        if f.pred == "=":
            l, r = subs
            return lambda m, env: l(m, env) == r(m, env)
        name = f.pred
        if not subs:
            return lambda m, env: m.predicates[name][1][0]
        if len(subs) == 1:
            s0 = subs[0]
            return lambda m, env: m.predicates[name][1][s0(m, env)]
        if len(subs) == 2:
            s0, s1 = subs
            return lambda m, env: m.predicates[name][1][s0(m, env) * m.n + s1(m, env)]
        return lambda m, env: m.predicates[name][1][_index([s(m, env) for s in subs], m.n)]
    if isinstance(f, Not):
        g = _compile(f.arg, slots, depth)
        return lambda m, env: not g(m, env)
    if isinstance(f, And):
        gs = [_compile(a, slots, depth) for a in f.args]
        return lambda m, env: all(g(m, env) for g in gs)
    if isinstance(f, Or):
        gs = [_compile(a, slots, depth) for a in f.args]
        return lambda m, env: any(g(m, env) for g in gs)
    if isinstance(f, Implies):
        l, r = _compile(f.left, slots, depth), _compile(f.right, slots, depth)
        return lambda m, env: (not l(m, env)) or r(m, env)
    if isinstance(f, Iff):
        l, r = _compile(f.left, slots, depth), _compile(f.right, slots, depth)
        return lambda m, env: l(m, env) == r(m, env)
    inner = dict(slots)
    idx = []
    for v in f.vars:
        inner[v] = depth[0]
        idx.append(depth[0])
        depth[0] += 1
    body = _compile(f.body, inner, depth)
    universal = f.kind == "!"

    def quant(m, env, k=0):
        s = idx[k]
        last = k == len(idx) - 1
        for d in range(m.n):
            env[s] = d
            val = body(m, env) if last else quant(m, env, k + 1)
            if val != universal:
                return not universal
        return universal

    return quant


class CompiledFormula:
    def __init__(self, f: Formula):
        if free_vars(f):
            raise ModelError("only closed formulas can be evaluated")
        depth = [0]
        self.formula = f
        self.fn = _compile(f, {}, depth)
        self.nslots = depth[0]
        funcs, preds = signature_of([f])
        self.functions = funcs
        self.predicates = preds

    def __call__(self, m: FiniteModel) -> bool:
        return self.fn(m, [0] * self.nslots)


def _check_interpreted(m: FiniteModel, funcs: dict, preds: dict):
    for name, arity in funcs.items():
        if name not in m.functions or m.functions[name][0] != arity:
            raise UninterpretedSymbol(f"function {name}/{arity} is not interpreted")
    for name, arity in preds.items():
        if name not in m.predicates or m.predicates[name][0] != arity:
            raise UninterpretedSymbol(f"predicate {name}/{arity} is not interpreted")


def eval_formula(m: FiniteModel, f: Formula) -> bool:
    """Truth value of the closed formula ``f`` in ``m``."""
    cf = CompiledFormula(f)
    _check_interpreted(m, cf.functions, cf.predicates)
    return cf(m)


# ---------------------------------------------------------------------------
# Counter-model search
# ---------------------------------------------------------------------------

DEFAULT_MAX_N = 3
DEFAULT_BUDGET = 200_000


def find_countermodel(axioms: Sequence[Formula], conjecture: Formula,
                      max_n: int = DEFAULT_MAX_N, budget: int = DEFAULT_BUDGET):
    """Smallest model of ``axioms`` falsifying ``conjecture``, or ``None``.

    Domain sizes are tried in ascending order and symbol tables in
    lexicographic order, so the result is deterministic.  Each formula is
    checked as soon as all its symbols have tables.  Raises
    :class:`ModelBudgetExceeded` once ``budget`` candidate tables have been
    visited without a verdict.
    """
    return find_model([(a, True) for a in axioms] + [(conjecture, False)],
                      max_n=max_n, budget=budget)


def find_model(targets: Sequence[tuple], max_n: int = DEFAULT_MAX_N,
               budget: int = DEFAULT_BUDGET):
    """First model in which each ``(formula, wanted_truth)`` pair holds."""
    compiled = [(CompiledFormula(f), want) for f, want in targets]
    funcs, preds = signature_of(f for f, _ in targets)
    # symbols ordered so formulas over few symbols are decided first
    order: list = []
    for cf, _ in sorted(compiled, key=lambda cw: len(symbols_of(cw[0].formula))):
        for s in sorted(set(cf.functions) | set(cf.predicates)):
            if s not in order:
                order.append(s)
    position = {s: i for i, s in enumerate(order)}
    checks: list = [[] for _ in range(len(order) + 1)]
    for cf, want in compiled:
        syms = set(cf.functions) | set(cf.predicates)
        last = max((position[s] + 1 for s in syms), default=0)
        checks[last].append((cf, want))
    visited = [0]

    for n in range(1, max_n + 1):
        model = FiniteModel(n)
        if not all(cf(model) == want for cf, want in checks[0]):
            continue

        def search(i):
            if i == len(order):
                return True
            sym = order[i]
            if sym in funcs:
                arity = funcs[sym]
                values, store = range(n), model.functions
            else:
                arity = preds[sym]
                values, store = (False, True), model.predicates
            for table in itertools.product(values, repeat=n ** arity):
                # every candidate table counts, including rejected ones
                visited[0] += 1
                if visited[0] > budget:
                    raise ModelBudgetExceeded(
                        f"counter-model search exceeded {budget} nodes at domain size {n}")
                store[sym] = (arity, table)
                if all(cf(model) == want for cf, want in checks[i + 1]) and search(i + 1):
                    return True
            del store[sym]
            return False

        if search(0):
            return model
    return None


# ---------------------------------------------------------------------------
# Model pool and semantic features
# ---------------------------------------------------------------------------

class ModelPool:
    """Append-only list of models with a lazily filled (formula x model) truth cache."""

    def __init__(self):
        self.models: list = []
        self._keys: dict = {}
        self._cache: dict = {}
        self._compiled: dict = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def add(self, model: FiniteModel) -> tuple:
        """Add ``model``; returns ``(id, is_new)``.  Duplicates keep their old id."""
        key = model.key()
        with self._lock:
            if key in self._keys:
                return self._keys[key], False
            mid = len(self.models)
            stored = FiniteModel(model.n, dict(model.functions), dict(model.predicates), mid)
            self.models.append(stored)
            self._keys[key] = mid
            return mid, True

    def truth(self, f: Formula, mid: int) -> bool:
        with self._lock:
            row = self._cache.get(f)
            if row is not None and mid in row:
                return row[mid]
            cf = self._compiled.get(f)
            if cf is None:
                cf = self._compiled[f] = CompiledFormula(f)
            model = self.models[mid]
        _check_interpreted(model, cf.functions, cf.predicates)
        val = cf(model)
        with self._lock:
            self._cache.setdefault(f, {})[mid] = val
        return val

    def dumps(self) -> str:
        return "".join(m.dumps() for m in self.models)


def model_features(f: Formula, pool: ModelPool, interner: Interner) -> FeatureSet:
    """``mod:i`` (count 1) for every pool model ``i`` in which ``f`` is true."""
    return {interner.id(f"mod:{m.id}"): 1 for m in pool.models if pool.truth(f, m.id)}
