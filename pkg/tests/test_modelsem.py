import os
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import holds
from randgen import random_formula, random_model, random_renaming, rename_vars

from premsel.features import Interner
from premsel.modelsem import (FiniteModel, ModelBudgetExceeded, ModelError, ModelPool,
                              UninterpretedSymbol, eval_formula, find_countermodel, load_models,
                              model_features)
from premsel.tptp import And, Atom, Not, Var, parse_file, parse_formulas, signature_of


def fs(*texts):
    return [nf.formula for nf in parse_formulas(
        " ".join(f"fof(x{i}, axiom, {t})." for i, t in enumerate(texts)))]


def test_singleton_domain():
    m = FiniteModel(1, predicates={"p": (1, (True,))})
    (f,) = fs("![X]: p(X)")
    assert eval_formula(m, f)


def test_contradiction_false_everywhere():
    rng = random.Random(3)
    (f,) = fs("q(a)")
    for n in (1, 2, 3):
        assert not eval_formula(random_model(rng, n), And((f, Not(f))))


def test_uninterpreted_symbol():
    (f,) = fs("zz(a)")
    with pytest.raises(UninterpretedSymbol):
        eval_formula(FiniteModel(2, functions={"a": (0, (0,))}), f)


def test_free_variable_rejected():
    with pytest.raises(ModelError):
        eval_formula(FiniteModel(1), Atom("p", (Var("X"),)))


def test_domain_size_positive():
    with pytest.raises(ModelError):
        FiniteModel(0)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_evaluation_laws(seed):
    rng = random.Random(seed)
    m = random_model(rng, rng.randint(1, 3))
    f, g = random_formula(rng, 3), random_formula(rng, 3)
    assert eval_formula(m, Not(f)) == (not eval_formula(m, f))
    assert eval_formula(m, And((f, g))) == (eval_formula(m, f) and eval_formula(m, g))
    assert eval_formula(m, rename_vars(f, random_renaming(rng))) == eval_formula(m, f)
    assert eval_formula(m, f) == holds(m, f)


# ---------------------------------------------------------------------------
# counter-models
# ---------------------------------------------------------------------------

def test_smallest_refutation():
    (c,) = fs("p(c)")
    m = find_countermodel([], c)
    assert m.n == 1 and m.predicates["p"] == (1, (False,))


def test_entailed_has_no_countermodel():
    ax, c = fs("![X]: p(X)", "p(c)")
    assert find_countermodel([ax], c, max_n=3) is None


def test_existential_countermodel():
    ax, c = fs("?[X]: ~q(X)", "![X]: q(X)")
    m = find_countermodel([ax], c)
    assert m.n == 1 and eval_formula(m, ax) and not eval_formula(m, c)


def test_needs_two_elements():
    ax, c = fs("p(a) & ~p(b)", "a = b")
    m = find_countermodel([ax], c)
    assert m.n == 2


def test_budget_exceeded_is_distinct():
    ax, c = fs("![X, Y]: r(X, Y)", "r(a, f(a))")
    with pytest.raises(ModelBudgetExceeded):
        find_countermodel([ax], c, max_n=3, budget=3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_countermodels_deterministic_and_valid(seed):
    rng = random.Random(seed)
    preds, funcs = {"p": 0, "q": 1}, {"a": 0, "f": 1}
    axioms = [random_formula(rng, 2, predicates=preds, functions=funcs) for _ in range(2)]
    conj = random_formula(rng, 2, predicates=preds, functions=funcs)
    try:
        m1 = find_countermodel(axioms, conj, 3, 20_000)
    except ModelBudgetExceeded:
        return
    m2 = find_countermodel(axioms, conj, 3, 20_000)
    assert (m1 is None) == (m2 is None)
    if m1 is not None:
        assert m1.key() == m2.key()
        assert all(holds(m1, a) for a in axioms) and not holds(m1, conj)


# ---------------------------------------------------------------------------
# pool, features and serialization
# ---------------------------------------------------------------------------

def test_pool_ids_sequential_and_deduplicated():
    rng = random.Random(1)
    pool = ModelPool()
    m = random_model(rng, 2)
    assert pool.add(m) == (0, True)
    assert pool.add(random_model(rng, 3)) == (1, True)
    assert pool.add(m) == (0, False)
    assert [x.id for x in pool] == [0, 1]


def test_empty_pool_features():
    (f,) = fs("p")
    assert model_features(f, ModelPool(), Interner()) == {}


def test_model_features_match_brute_force(chain_dir):
    problems = [parse_file(os.path.join(chain_dir, f"p{i:02d}.p")) for i in (1, 2)]
    formulas = [nf.formula for p in problems for nf in p.formulas]
    funcs, preds = signature_of(formulas)
    rng = random.Random(8)
    pool = ModelPool()
    for _ in range(8):
        pool.add(random_model(rng, rng.randint(1, 3), preds, funcs))
    interner = Interner()
    for f in formulas[:60]:
        got = {interner.name(k) for k in model_features(f, pool, interner)}
        assert got == {f"mod:{m.id}" for m in pool if holds(m, f)}


def test_model_text_round_trip():
    rng = random.Random(2)
    m = random_model(rng, 3)
    m.id = 4
    text = m.dumps()
    back = load_models(text + text)
    assert len(back) == 2 and back[0].key() == m.key() and back[0].id == 4
    assert FiniteModel.loads(text).dumps() == text


def test_bad_model_text():
    with pytest.raises(ModelError):
        load_models("model 0 size 2\nbogus line\nend\n")


def test_extended_interprets_missing_symbols():
    m = FiniteModel(2, predicates={"p": (0, (True,))})
    e = m.extended({"c": 0}, {"p": 0, "q": 1})
    assert e.predicates["p"] == (0, (True,))
    assert e.predicates["q"] == (1, (False, False))
    assert e.functions["c"] == (0, (0,))
