import os
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randgen import random_formula, random_renaming, rename_vars

from premsel import data_path
from premsel.tptp import (And, ArityError, Atom, ConjectureError, Fn, Not, Or, Quant,
                          TptpError, TptpSyntaxError, Var, build_corpus, free_vars,
                          merge_duplicates, normalize_formula, parse_file, parse_formulas,
                          parse_problem, print_formula, print_tptp)


def bundled_files():
    out = [data_path("trivial.p")]
    for sub in ("suite", "chain"):
        d = data_path(sub)
        out += sorted(os.path.join(d, f) for f in os.listdir(d) if f.endswith(".p"))
    return out


def test_minimal_problem():
    p = parse_problem("fof(a1,axiom,p(c)). fof(c1,conjecture,p(c)).")
    assert len(p.formulas) == 2
    assert p.conjecture_name == "c1"
    assert p.premise_names == ("a1",)


def test_arity_clash_names_symbol():
    with pytest.raises(ArityError, match="p"):
        parse_problem("fof(a1,axiom,p(c,d)). fof(c1,conjecture,p(c)).")


@pytest.mark.parametrize("text, count", [
    ("fof(a1,axiom,p).", 0),
    ("fof(a1,conjecture,p). fof(a2,conjecture,q).", 2),
])
def test_conjecture_count(text, count):
    with pytest.raises(ConjectureError, match=str(count)):
        parse_problem(text)


def test_syntax_error_position():
    with pytest.raises(TptpSyntaxError) as err:
        parse_problem("fof(a1,axiom,p(c)).\nfof(c1,conjecture,p(c) & ).", filename="x.p")
    assert err.value.line == 2
    assert str(err.value).startswith("x.p:2:")


def test_role_aliases():
    p = parse_problem("fof(l,lemma,p). fof(t,theorem,q). fof(g,conjecture,p & q).")
    assert [nf.role for nf in p.formulas] == ["axiom", "axiom", "conjecture"]


def test_unknown_role_rejected():
    with pytest.raises(TptpError):
        parse_problem("fof(x,plain,p). fof(g,conjecture,p).")


def test_binary_connective_variants():
    (f,) = parse_formulas("fof(a,axiom,(p <= q) & (p <~> q) & (p ~| q) & (p ~& q)).")
    assert isinstance(f.formula, And)


def test_quoted_names_and_comments():
    p = parse_problem("% comment\nfof('odd name',axiom,p). /* block */ fof(g,conjecture,p).")
    # quoted names keep their quotes so they print back verbatim
    assert p.premise_names == ("'odd name'",)


def test_include_resolution(tmp_path):
    (tmp_path / "Axioms").mkdir()
    (tmp_path / "Axioms" / "base.ax").write_text("fof(b1,axiom,p(c)).\nfof(b2,axiom,q(c)).\n")
    text = "include('Axioms/base.ax',[b1]).\nfof(g,conjecture,p(c))."
    p = parse_problem(text, include_dir=str(tmp_path))
    assert p.premise_names == ("b1",)
    p = parse_problem("include('Axioms/base.ax').\nfof(g,conjecture,p(c)).", include_dir=str(tmp_path))
    assert p.premise_names == ("b1", "b2")


def test_missing_include(tmp_path):
    with pytest.raises(TptpSyntaxError, match="cannot include"):
        parse_problem("include('nope.ax').\nfof(g,conjecture,p).", include_dir=str(tmp_path))


@pytest.mark.parametrize("path", bundled_files(), ids=os.path.basename)
def test_round_trip_bundled(path):
    p = parse_file(path)
    text = print_tptp(p)
    again = parse_problem(text, name=p.name)
    assert again == p
    assert print_tptp(again) == text


def test_print_empty_problem():
    from premsel.tptp import Problem
    assert print_tptp(Problem((), "")) == ""


def test_print_source_order():
    p = parse_problem("fof(z,axiom,p). fof(a,conjecture,p).")
    lines = print_tptp(p).splitlines()
    assert len(lines) == 2 and lines[0].startswith("fof(z") and lines[1].startswith("fof(a")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_random(seed):
    f = random_formula(random.Random(seed), 4)
    (nf,) = parse_formulas(f"fof(x, axiom, {print_formula(f)}).")
    assert nf.formula == f


def test_normalize_examples():
    (a, b, c, d) = parse_formulas(
        "fof(a,axiom,~~p(c)). fof(b,axiom,q & p). fof(c,axiom,![Y]:p(Y)). fof(d,axiom,![Z]:p(Z)).")
    assert normalize_formula(a.formula) == Atom("p", (Fn("c"),))
    assert normalize_formula(b.formula) == And((Atom("p"), Atom("q")))
    assert normalize_formula(c.formula) == normalize_formula(d.formula) \
        == Quant("!", ("X1",), Atom("p", (Var("X1"),)))


def test_normalize_flattens_and_keeps_implications():
    (f,) = parse_formulas("fof(a,axiom,(r | (q | p)) => s).")
    g = normalize_formula(f.formula)
    assert g.left == Or((Atom("p"), Atom("q"), Atom("r")))


def test_normalize_closes_free_variables():
    g = normalize_formula(Atom("p", (Var("X"),)))
    assert isinstance(g, Quant) and not free_vars(g)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_normalize_idempotent_and_alpha_invariant(seed):
    rng = random.Random(seed)
    f = random_formula(rng, 4)
    n = normalize_formula(f)
    assert normalize_formula(n) == n
    assert normalize_formula(rename_vars(f, random_renaming(rng))) == n
    assert not free_vars(n)


def test_not_not_inside_quantifier():
    (f,) = parse_formulas("fof(a,axiom,![X]: ~ ~ p(X)).")
    assert normalize_formula(f.formula) == Quant("!", ("X1",), Atom("p", (Var("X1"),)))
    assert normalize_formula(Not(Not(Not(Atom("p"))))) == Not(Atom("p"))


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

def two_problems():
    p1 = parse_problem("fof(a1,axiom,p(c)). fof(a2,axiom,p(c)). fof(g1,conjecture,q(c)).", name="one")
    p2 = parse_problem("fof(b7,axiom,p(c)). fof(a3,axiom,r). fof(g2,conjecture,q(c)).", name="two")
    return p1, p2


def test_merge_duplicates_smallest_name():
    c = merge_duplicates(build_corpus(two_problems()))
    assert c.alias_map == {"a2": "a1", "b7": "a1"}
    assert c.problems[0].premise_names == ("a1",)
    assert c.problems[1].premise_names == ("a1", "a3")
    assert c.canonical("b7") == "a1"


def test_merge_keeps_conjecture_names():
    c = merge_duplicates(build_corpus(two_problems()))
    assert {"g1", "g2"} <= set(c.formulas)


def test_merge_identity_without_duplicates():
    p = parse_problem("fof(a,axiom,p). fof(g,conjecture,q).")
    c = build_corpus([p])
    m = merge_duplicates(c)
    assert m.alias_map == {} and m.formulas == c.formulas and m.problems == c.problems


def test_merge_preserves_distinct_formulas():
    c = build_corpus(two_problems())
    m = merge_duplicates(c)
    distinct = {nf.formula for nf in c.formulas.values()}
    assert {nf.formula for nf in m.formulas.values()} == distinct
    non_conj = [nf.formula for n, nf in m.formulas.items() if n not in m.conjecture_names]
    assert len(non_conj) == len(set(non_conj))
    assert all(v not in m.alias_map for v in m.alias_map.values())


def test_corpus_name_clash():
    p1 = parse_problem("fof(a,axiom,p). fof(g,conjecture,p).")
    p2 = parse_problem("fof(a,axiom,q). fof(h,conjecture,q).")
    with pytest.raises(TptpError, match="two different"):
        build_corpus([p1, p2])


def test_corpus_arity_clash():
    p1 = parse_problem("fof(a,axiom,p(c)). fof(g,conjecture,p(c)).")
    p2 = parse_problem("fof(b,axiom,p(c,c)). fof(h,conjecture,p(c,c)).")
    with pytest.raises(ArityError):
        build_corpus([p1, p2])
