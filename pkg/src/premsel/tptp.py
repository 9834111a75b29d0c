"""TPTP FOF abstract syntax, parser, printer and canonicalization.

Only the first-order ``fof`` fragment is handled.  Formulas are immutable
trees of frozen dataclasses so they can be hashed, compared structurally and
shared between threads without copying.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "Var", "Fn", "Atom", "Not", "And", "Or", "Implies", "Iff", "Quant",
    "NamedFormula", "Problem", "Corpus", "TptpError", "TptpSyntaxError",
    "ArityError", "ConjectureError", "parse_formulas", "parse_problem",
    "parse_file", "print_formula", "print_term", "print_tptp",
    "normalize_formula", "build_corpus", "merge_duplicates", "symbols_of",
    "free_vars", "signature_of", "check_arities", "ROLES",
]

ROLES = ("axiom", "conjecture", "negated_conjecture", "hypothesis", "definition")
# Roles found in MPTP/TPTP exports that behave like axioms for selection.
_ROLE_ALIASES = {"lemma": "axiom", "theorem": "axiom", "assumption": "axiom"}


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Fn:
    functor: str
    args: tuple = ()


Term = Union[Var, Fn]


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    args: tuple


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Quant:
    kind: str  # "!" (forall) or "?" (exists)
    vars: tuple
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Iff, Quant]


@dataclass(frozen=True)
class NamedFormula:
    name: str
    role: str
    formula: Formula


@dataclass(frozen=True)
class Problem:
    formulas: tuple
    conjecture_name: str
    name: str = ""

    @property
    def conjecture(self) -> NamedFormula:
        for nf in self.formulas:
            if nf.name == self.conjecture_name and nf.role == "conjecture":
                return nf
        raise KeyError(self.conjecture_name)

    @property
    def premises(self) -> tuple:
        return tuple(nf for nf in self.formulas if nf.role != "conjecture")

    @property
    def premise_names(self) -> tuple:
        return tuple(nf.name for nf in self.premises)

    def restrict(self, names: Iterable[str]) -> "Problem":
        """Copy of the problem keeping only the given premises (in source order)."""
        keep = set(names)
        kept = tuple(nf for nf in self.formulas
                     if nf.role == "conjecture" or nf.name in keep)
        return replace(self, formulas=kept)

    def with_premises(self, premises: Sequence[NamedFormula]) -> "Problem":
        return replace(self, formulas=tuple(premises) + (self.conjecture,))


@dataclass
class Corpus:
    formulas: dict = field(default_factory=dict)      # name -> NamedFormula
    alias_map: dict = field(default_factory=dict)     # merged name -> canonical
    problems: list = field(default_factory=list)

    def canonical(self, name: str) -> str:
        return self.alias_map.get(name, name)

    @property
    def conjecture_names(self) -> set:
        return {p.conjecture_name for p in self.problems}


class TptpError(Exception):
    pass


class TptpSyntaxError(TptpError):
    def __init__(self, message: str, filename: str = "<string>", line: int = 0, col: int = 0):
        super().__init__(f"{filename}:{line}:{col}: {message}")
        self.filename, self.line, self.col = filename, line, col


class ArityError(TptpError):
    pass


class ConjectureError(TptpError):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<op><~>|<=>|=>|<=|~\||~&|!=|[()\[\],.:!?~&|=])
  | (?P<squote>'(?:[^'\\]|\\.)*')
  | (?P<dquote>"(?:[^"\\]|\\.)*")
  | (?P<dollar>\$\$?[a-z][A-Za-z0-9_]*)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<number>[+-]?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?(?:/[0-9]+)?)
""", re.VERBOSE | re.DOTALL)


@dataclass(slots=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, filename: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TptpSyntaxError(f"unexpected character {text[pos]!r}",
                                  filename, line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_BINARY = {"<=>", "=>", "<=", "<~>", "~|", "~&"}


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.toks = _tokenize(text, filename)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise TptpSyntaxError(msg, self.filename, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind not in ("op",):
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    # -- statements ---------------------------------------------------------

    def statements(self) -> Iterator[tuple]:
        while self.peek().kind != "eof":
            tok = self.next()
            if tok.kind != "lower":
                self.error(f"expected fof or include, found {tok.text!r}", tok)
            if tok.text == "include":
                self.expect("(")
                path = self.next()
                if path.kind != "squote":
                    self.error("include expects a quoted file name", path)
                selection = None
                if self.at(","):
                    self.next()
                    self.expect("[")
                    selection = []
                    while not self.at("]"):
                        selection.append(self.name())
                        if not self.at("]"):
                            self.expect(",")
                    self.expect("]")
                self.expect(")")
                self.expect(".")
                yield ("include", path.text[1:-1], selection, tok)
            elif tok.text == "fof":
                self.expect("(")
                name = self.name()
                self.expect(",")
                role_tok = self.next()
                role = _ROLE_ALIASES.get(role_tok.text, role_tok.text)
                if role not in ROLES:
                    self.error(f"unsupported role {role_tok.text!r}", role_tok)
                self.expect(",")
                formula = self.formula()
                if self.at(","):
                    # annotations (source, useful info) are skipped
                    self.skip_balanced()
                self.expect(")")
                self.expect(".")
                yield ("fof", NamedFormula(name, role, formula), tok)
            else:
                self.error(f"unsupported statement {tok.text!r} (only fof and include)", tok)

    def skip_balanced(self):
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                self.error("unterminated annotation")
            if tok.kind == "op" and tok.text in "([":
                depth += 1
            elif tok.kind == "op" and tok.text in ")]":
                if depth == 0:
                    return
                depth -= 1
            self.next()

    def name(self) -> str:
        tok = self.next()
        if tok.kind in ("lower", "squote", "number"):
            return tok.text
        self.error(f"expected a name, found {tok.text!r}", tok)

    # -- formulas -----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.unit()
        tok = self.peek()
        if tok.kind == "op" and tok.text in _BINARY:
            self.next()
            right = self.unit()
            op = tok.text
            if op == "=>":
                return Implies(left, right)
            if op == "<=":
                return Implies(right, left)
            if op == "<=>":
                return Iff(left, right)
            if op == "<~>":
                return Not(Iff(left, right))
            if op == "~|":
                return Not(Or((left, right)))
            return Not(And((left, right)))
        if tok.kind == "op" and tok.text in ("&", "|"):
            op = tok.text
            args = [left]
            while self.at(op):
                self.next()
                args.append(self.unit())
            nxt = self.peek()
            if nxt.kind == "op" and (nxt.text in _BINARY or nxt.text in ("&", "|")):
                self.error(f"mixing {op!r} with {nxt.text!r} requires parentheses", nxt)
            return And(tuple(args)) if op == "&" else Or(tuple(args))
        return left

    def unit(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op":
            if tok.text == "~":
                self.next()
                return Not(self.unit())
            if tok.text in ("!", "?"):
                self.next()
                self.expect("[")
                names = []
                while True:
                    v = self.next()
                    if v.kind != "upper":
                        self.error(f"expected a variable, found {v.text!r}", v)
                    names.append(v.text)
                    if self.at(","):
                        self.next()
                        continue
                    break
                self.expect("]")
                self.expect(":")
                return Quant(tok.text, tuple(names), self.unit())
            if tok.text == "(":
                self.next()
                f = self.formula()
                self.expect(")")
                return f
        start = tok
        lhs = self.term()
        if self.at("=") or self.at("!="):
            op = self.next().text
            rhs = self.term()
            atom = Atom("=", (lhs, rhs))
            return atom if op == "=" else Not(atom)
        if isinstance(lhs, Var):
            self.error("a variable cannot be used as a formula", start)
        return Atom(lhs.functor, lhs.args)

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "upper":
            return Var(tok.text)
        if tok.kind in ("lower", "squote", "dollar", "dquote", "number"):
            if self.at("("):
                self.next()
                args = [self.term()]
                while self.at(","):
                    self.next()
                    args.append(self.term())
                self.expect(")")
                return Fn(tok.text, tuple(args))
            return Fn(tok.text)
        self.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)


def parse_formulas(text: str, *, include_dir: str | None = None,
                   filename: str = "<string>", _seen: frozenset = frozenset()) -> list:
    """Parse every ``fof`` statement of ``text``, expanding ``include`` directives.

    Include paths resolve against ``include_dir`` (the axiom directory), or the
    current directory when it is not given.
    """
    out = []
    parser = _Parser(text, filename)
    for stmt in parser.statements():
        if stmt[0] == "fof":
            out.append(stmt[1])
            continue
        _, rel, selection, tok = stmt
        path = os.path.join(include_dir or ".", rel)
        if path in _seen:
            raise TptpSyntaxError(f"cyclic include of {rel!r}", filename, tok.line, tok.col)
        try:
            with open(path, encoding="utf-8") as fh:
                sub = fh.read()
        except OSError as exc:
            raise TptpSyntaxError(f"cannot include {rel!r}: {exc.strerror}",
                                  filename, tok.line, tok.col) from None
        included = parse_formulas(sub, include_dir=include_dir, filename=path,
                                  _seen=_seen | {path})
        if selection is not None:
            wanted = set(selection)
            included = [nf for nf in included if nf.name in wanted]
        out.extend(included)
    return out


def parse_problem(text: str, *, include_dir: str | None = None,
                  filename: str = "<string>", name: str = "") -> Problem:
    formulas = parse_formulas(text, include_dir=include_dir, filename=filename)
    conjectures = [nf.name for nf in formulas if nf.role == "conjecture"]
    if len(conjectures) != 1:
        raise ConjectureError(
            f"{filename}: expected exactly one conjecture, found {len(conjectures)}")
    check_arities(nf.formula for nf in formulas)
    return Problem(tuple(formulas), conjectures[0], name)


def parse_file(path: str, include_dir: str | None = None) -> Problem:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stem = os.path.splitext(os.path.basename(path))[0]
    return parse_problem(text, include_dir=include_dir, filename=path, name=stem)


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------

def iter_atoms(f: Formula) -> Iterator[Atom]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield g
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, (Implies, Iff)):
            stack.append(g.right)
            stack.append(g.left)
        else:
            stack.append(g.body)


def iter_subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Fn):
        for a in t.args:
            yield from iter_subterms(a)


def signature_of(formulas: Iterable[Formula]) -> tuple:
    """Return ``(functions, predicates)`` as name -> arity maps.

    The builtins ``=``, ``$true`` and ``$false`` are not part of the signature.
    """
    funcs: dict = {}
    preds: dict = {}
    for f in formulas:
        for atom in iter_atoms(f):
            if atom.pred not in ("=", "$true", "$false"):
                preds.setdefault(atom.pred, len(atom.args))
            for arg in atom.args:
                for t in iter_subterms(arg):
                    if isinstance(t, Fn):
                        funcs.setdefault(t.functor, len(t.args))
    return funcs, preds


def check_arities(formulas: Iterable[Formula], table: dict | None = None) -> dict:
    """Raise ArityError if any symbol is used with two arities; returns the table."""
    table = {} if table is None else table

    def note(sym, arity):
        seen = table.setdefault(sym, arity)
        if seen != arity:
            raise ArityError(f"arity clash on {sym!r}: used with {seen} and {arity} arguments")

    for f in formulas:
        for atom in iter_atoms(f):
            if atom.pred != "=":
                note(atom.pred, len(atom.args))
            for arg in atom.args:
                for t in iter_subterms(arg):
                    if isinstance(t, Fn):
                        note(t.functor, len(t.args))
    return table


def symbols_of(f: Formula) -> set:
    """Non-variable symbols of ``f`` (predicates, functions, constants, ``=``)."""
    out = set()
    for atom in iter_atoms(f):
        out.add(atom.pred)
        for arg in atom.args:
            for t in iter_subterms(arg):
                if isinstance(t, Fn):
                    out.add(t.functor)
    return out


def _term_vars(t: Term, out: list):
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    else:
        for a in t.args:
            _term_vars(a, out)


def free_vars(f: Formula, bound: frozenset = frozenset()) -> list:
    """Free variables of ``f`` in order of first occurrence."""
    out: list = []

    def walk(g, bound):
        if isinstance(g, Atom):
            tmp: list = []
            for a in g.args:
                _term_vars(a, tmp)
            for v in tmp:
                if v not in bound and v not in out:
                    out.append(v)
        elif isinstance(g, Not):
            walk(g.arg, bound)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a, bound)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left, bound)
            walk(g.right, bound)
        else:
            walk(g.body, bound | set(g.vars))

    walk(f, bound)
    return out


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(print_term(a) for a in t.args)})"


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.pred == "=":
            return f"{print_term(f.args[0])} = {print_term(f.args[1])}"
        if not f.args:
            return f.pred
        return f"{f.pred}({','.join(print_term(a) for a in f.args)})"
    if isinstance(f, Not):
        inner = print_formula(f.arg)
        if isinstance(f.arg, Atom) and f.arg.pred == "=":
            inner = f"({inner})"
        return f"~ {inner}"
    if isinstance(f, And):
        return "(" + " & ".join(print_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(print_formula(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"({print_formula(f.left)} => {print_formula(f.right)})"
    if isinstance(f, Iff):
        return f"({print_formula(f.left)} <=> {print_formula(f.right)})"
    body = print_formula(f.body)
    if isinstance(f.body, Atom) and f.body.pred == "=":
        body = f"({body})"
    return f"{f.kind} [{','.join(f.vars)}] : {body}"


def print_tptp(p: Problem) -> str:
    """Render ``p`` as TPTP FOF text, one statement per line in source order."""
    return "".join(f"fof({nf.name}, {nf.role}, {print_formula(nf.formula)}).\n"
                   for nf in p.formulas)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _simplify(f: Formula) -> Formula:
    """Collapse double negations and flatten nested conjunctions/disjunctions."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        inner = _simplify(f.arg)
        if isinstance(inner, Not):
            return inner.arg
        return Not(inner)
    if isinstance(f, (And, Or)):
        cls = type(f)
        flat = []
        for a in f.args:
            a = _simplify(a)
            if isinstance(a, cls):
                flat.extend(a.args)
            else:
                flat.append(a)
        return cls(tuple(flat))
    if isinstance(f, Implies):
        return Implies(_simplify(f.left), _simplify(f.right))
    if isinstance(f, Iff):
        return Iff(_simplify(f.left), _simplify(f.right))
    return Quant(f.kind, f.vars, _simplify(f.body))


def _key_term(t: Term, env: dict, depth: int) -> str:
    if isinstance(t, Var):
        # de Bruijn-style distance to the binder: invariant under alpha-renaming
        return f"#{depth - env[t.name]}" if t.name in env else t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(_key_term(a, env, depth) for a in t.args)})"


def _sort_ops(f: Formula, env: dict, depth: int) -> tuple:
    """Sort And/Or operands by an alpha-invariant printed key.

    Returns ``(formula, key)``.
    """
    if isinstance(f, Atom):
        args = ",".join(_key_term(a, env, depth) for a in f.args)
        return f, (f"{f.pred}({args})" if f.args else f.pred)
    if isinstance(f, Not):
        g, k = _sort_ops(f.arg, env, depth)
        return Not(g), f"~{k}"
    if isinstance(f, (And, Or)):
        parts = [_sort_ops(a, env, depth) for a in f.args]
        parts.sort(key=lambda gk: gk[1])
        op = "&" if isinstance(f, And) else "|"
        return type(f)(tuple(g for g, _ in parts)), "(" + op.join(k for _, k in parts) + ")"
    if isinstance(f, (Implies, Iff)):
        lg, lk = _sort_ops(f.left, env, depth)
        rg, rk = _sort_ops(f.right, env, depth)
        op = "=>" if isinstance(f, Implies) else "<=>"
        return type(f)(lg, rg), f"({lk}{op}{rk})"
    inner = dict(env)
    d = depth
    for v in f.vars:
        d += 1
        inner[v] = d
    g, k = _sort_ops(f.body, inner, d)
    return Quant(f.kind, f.vars, g), f"{f.kind}{len(f.vars)}:{k}"


def _rename_term(t: Term, env: dict) -> Term:
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if not t.args:
        return t
    return Fn(t.functor, tuple(_rename_term(a, env) for a in t.args))


def _rename(f: Formula, env: dict, counter: list) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_rename_term(a, env) for a in f.args))
    if isinstance(f, Not):
        return Not(_rename(f.arg, env, counter))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename(a, env, counter) for a in f.args))
    if isinstance(f, (Implies, Iff)):
        left = _rename(f.left, env, counter)
        return type(f)(left, _rename(f.right, env, counter))
    inner = dict(env)
    names = []
    for v in f.vars:
        counter[0] += 1
        inner[v] = f"X{counter[0]}"
        names.append(inner[v])
    return Quant(f.kind, tuple(names), _rename(f.body, inner, counter))


def normalize_formula(f: Formula) -> Formula:
    """Canonical form used for duplicate detection and featurization.

    Free variables are universally closed, ``~~p`` becomes ``p``, nested
    conjunctions/disjunctions are flattened with operands sorted by an
    alpha-invariant printed key, and bound variables are renamed ``X1, X2, ...``
    in traversal order.  Implications and equivalences are kept as they are.
    """
    fv = free_vars(f)
    if fv:
        f = Quant("!", tuple(fv), f)
    f = _simplify(f)
    f, _ = _sort_ops(f, {}, 0)
    return _rename(f, {}, [0])


# ---------------------------------------------------------------------------
# Corpus construction and duplicate merging
# ---------------------------------------------------------------------------

def build_corpus(problems: Iterable[Problem]) -> Corpus:
    """Normalize all problems and index their formulas by name.

    A name used for two different (normalized) formulas is an error, as is a
    symbol used with two arities anywhere in the corpus.
    """
    corpus = Corpus()
    arities: dict = {}
    for p in problems:
        formulas = []
        for nf in p.formulas:
            norm = NamedFormula(nf.name, nf.role, normalize_formula(nf.formula))
            check_arities([norm.formula], arities)
            seen = corpus.formulas.get(nf.name)
            if seen is None:
                corpus.formulas[nf.name] = norm
            elif seen.formula != norm.formula:
                raise TptpError(f"formula name {nf.name!r} is used for two different formulas")
            formulas.append(norm)
        corpus.problems.append(replace(p, formulas=tuple(formulas)))
    return corpus


def merge_duplicates(c: Corpus) -> Corpus:
    """Give syntactically identical formulas one (lexicographically smallest) name.

    Names that are the conjecture of some problem keep their identity: they
    name learning targets rather than premises.
    """
    protected = c.conjecture_names
    groups: dict = {}
    for name, nf in c.formulas.items():
        if name not in protected:
            groups.setdefault(nf.formula, []).append(name)
    alias = dict(c.alias_map)
    for names in groups.values():
        if len(names) > 1:
            canon = min(names)
            for n in names:
                if n != canon:
                    alias[n] = canon
    # collapse chains so every alias resolves in one step
    for k in list(alias):
        v = alias[k]
        while v in alias:
            v = alias[v]
        alias[k] = v
    formulas = {n: nf for n, nf in c.formulas.items() if n not in alias}
    problems = []
    for p in c.problems:
        seen = set()
        out = []
        for nf in p.formulas:
            canon = alias.get(nf.name, nf.name)
            if canon in seen:
                continue
            seen.add(canon)
            out.append(nf if canon == nf.name else NamedFormula(canon, nf.role, nf.formula))
        problems.append(replace(p, formulas=tuple(out)))
    return Corpus(formulas, alias, problems)
