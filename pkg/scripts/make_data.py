"""Regenerate the bundled problem sets under src/premsel/data.

The chain corpus: problem i asks for  s_i -> r  from
    a_i : s_i -> m          (problem specific)
    b1  : m -> n            (shared bridge)
    b2  : n -> r            (shared bridge)
Easy problems carry a couple of extras.  Hard problems add links d_i_j into a
pool of predicates u_1..u_10, a generator e_i : s_i(X) -> s_i(succ(X)) that
keeps a prover busy, and 150 noise formulas (u_a & r & m) -> u_b(succ), so
that symbol-trigger selection reaches all the noise but never the bridges,
whose only rare symbol n it cannot get to.  Once some proofs are known, the
bridges are what similar conjectures used.
"""

from __future__ import annotations

import os
import random
import sys

ROOT = os.path.join(os.path.dirname(__file__), "..", "src", "premsel", "data")
N_PROBLEMS = 30
N_NOISE = 150
N_U = 10


def fof(name, role, body):
    return f"fof({name}, {role}, {body}).\n"


def noise_formulas(rng):
    """90 formulas over ordered pairs of u's and 60 with two u antecedents;
    every u ends up with the same number of occurrences."""
    bodies = [f"![X] : ((u{a}(X) & r(X) & m(X)) => u{b}(succ(X)))"
              for a in range(1, N_U + 1) for b in range(1, N_U + 1) if a != b]
    for k in range(60):
        a = k % N_U + 1
        a2 = a % N_U + 1
        b = (a + 2 + k // N_U) % N_U + 1
        bodies.append(f"![X] : ((u{a}(X) & u{a2}(X) & r(X) & m(X)) => u{b}(succ(X)))")
    assert len(bodies) == N_NOISE
    out = [(f"n{k + 1:03d}", body) for k, body in enumerate(bodies)]
    rng.shuffle(out)
    return out


def is_easy(i):
    return i % 2 == 1


def chain_problem(i, noise):
    s = f"s{i:02d}"
    lines = [f"% chain problem {i} ({'easy' if is_easy(i) else 'hard'})\n"]
    if is_easy(i):
        lines.append(fof(f"d{i:02d}_1", "axiom", f"![X] : ({s}(X) => u1(X))"))
        lines.append(fof(f"a{i:02d}", "axiom", f"![X] : ({s}(X) => m(X))"))
        lines.append(fof("b1", "axiom", "![X] : (m(X) => n(X))"))
        lines.append(fof("b2", "axiom", "![X] : (n(X) => r(X))"))
        lines.append(fof(noise[i][0], "axiom", noise[i][1]))
    else:
        lines.append(fof("b1", "axiom", "![X] : (m(X) => n(X))"))
        lines.append(fof("b2", "axiom", "![X] : (n(X) => r(X))"))
        for j in (1, 4, 7):
            lines.append(fof(f"d{i:02d}_{j}", "axiom", f"![X] : ({s}(X) => u{j}(X))"))
        lines.append(fof(f"a{i:02d}", "axiom", f"![X] : ({s}(X) => m(X))"))
        lines.append(fof(f"e{i:02d}", "axiom", f"![X] : ({s}(X) => {s}(succ(X)))"))
        for name, body in noise:
            lines.append(fof(name, "axiom", body))
    lines.append(fof(f"c{i:02d}", "conjecture", f"![X] : ({s}(X) => r(X))"))
    return "".join(lines)


def training_log(noise):
    rows = []
    for i in range(1, 16):
        a, c = f"a{i:02d}", f"c{i:02d}"
        rows.append((c, [a, "b1", "b2"], 6))
        extra = f"d{i:02d}_1" if is_easy(i) else f"d{i:02d}_4"
        rows.append((c, [a, "b1", "b2", extra], 8))
    for i in range(1, 11):
        rows.append((f"c{i:02d}", [f"a{i:02d}", "b1", "b2", noise[i][0]], 9))
    lines = ["# conjecture\tpremises\tstrategy\tstatus\tmillis\tsteps\tsource\n"]
    for c, prem, steps in rows:
        lines.append(f"{c}\t{','.join(sorted(prem))}\tdefault\tTheorem\t{10 * steps}\t{steps}\ttraining\n")
    assert len(rows) == 40
    return "".join(lines)


SUITE = {
    "syllogism": """
fof(all_men_mortal, axiom, ![X] : (man(X) => mortal(X))).
fof(socrates_man, axiom, man(socrates)).
fof(socrates_mortal, conjecture, mortal(socrates)).
""",
    "transitive_chain": """
fof(trans, axiom, ![X, Y, Z] : ((lt(X, Y) & lt(Y, Z)) => lt(X, Z))).
fof(ab, axiom, lt(a, b)).
fof(bc, axiom, lt(b, c)).
fof(cd, axiom, lt(c, d)).
fof(ad, conjecture, lt(a, d)).
""",
    "group_left_identity": """
fof(right_identity, axiom, ![X] : product(X, e, X)).
fof(commutative, axiom, ![X, Y, Z] : (product(X, Y, Z) => product(Y, X, Z))).
fof(left_identity, conjecture, product(e, a, a)).
""",
    "subset_transitive": """
fof(subset_def, axiom, ![A, B] : (subset(A, B) <=> ![X] : (member(X, A) => member(X, B)))).
fof(subset_trans, conjecture, ![A, B, C] : ((subset(A, B) & subset(B, C)) => subset(A, C))).
""",
    "ancestor": """
fof(parent_anc, axiom, ![X, Y] : (parent(X, Y) => ancestor(X, Y))).
fof(anc_trans, axiom, ![X, Y, Z] : ((ancestor(X, Y) & ancestor(Y, Z)) => ancestor(X, Z))).
fof(p1, axiom, parent(ann, bob)).
fof(p2, axiom, parent(bob, cid)).
fof(p3, axiom, parent(cid, dan)).
fof(ann_dan, conjecture, ancestor(ann, dan)).
""",
    "equality_substitution": """
fof(a_is_b, axiom, a = b).
fof(p_a, axiom, p(a)).
fof(p_b, conjecture, p(b)).
""",
    "modus_tollens": """
fof(rain_wet, axiom, rain => wet).
fof(not_wet, axiom, ~ wet).
fof(no_rain, conjecture, ~ rain).
""",
    "existential_witness": """
fof(likes_cheese, axiom, likes(wallace, cheese)).
fof(someone_likes, conjecture, ?[X] : likes(X, cheese)).
""",
    "drinker_style": """
fof(everyone_has_parent, axiom, ![X] : ?[Y] : parent_of(Y, X)).
fof(parents_older, axiom, ![X, Y] : (parent_of(Y, X) => older(Y, X))).
fof(someone_older, conjecture, ![X] : ?[Y] : older(Y, X)).
""",
    "case_split": """
fof(cases, axiom, p | q).
fof(p_r, axiom, p => r).
fof(q_r, axiom, q => r).
fof(r, conjecture, r).
""",
    "function_chain": """
fof(succ_pos, axiom, ![X] : (pos(X) => pos(s(X)))).
fof(one_pos, axiom, pos(one)).
fof(three_pos, conjecture, pos(s(s(one)))).
""",
    "symmetric_relation": """
fof(sym, axiom, ![X, Y] : (friend(X, Y) => friend(Y, X))).
fof(ab, axiom, friend(alice, bob)).
fof(ba, conjecture, friend(bob, alice)).
""",
    "iff_unfold": """
fof(even_def, axiom, ![X] : (even(X) <=> ~ odd(X))).
fof(two_not_odd, axiom, ~ odd(two)).
fof(two_even, conjecture, even(two)).
""",
    "equality_chain": """
fof(ab, axiom, a = b).
fof(bc, axiom, b = c).
fof(f_a, axiom, q(f(a))).
fof(f_c, conjecture, q(f(c))).
""",
    "universal_instance": """
fof(all_red, axiom, ![X] : (apple(X) => red(X))).
fof(all_apples, axiom, ![X] : apple(X)).
fof(some_red, conjecture, red(k)).
""",
    "disjunctive_goal": """
fof(p_a, axiom, p(a)).
fof(goal, conjecture, p(a) | q(b)).
""",
    "two_step_implication": """
fof(bird_flies, axiom, ![X] : ((bird(X) & ~ penguin(X)) => flies(X))).
fof(tweety_bird, axiom, bird(tweety)).
fof(tweety_not_penguin, axiom, ~ penguin(tweety)).
fof(tweety_flies, conjecture, flies(tweety)).
""",
    "set_union_member": """
fof(union_def, axiom, ![X, A, B] : (member(X, union(A, B)) <=> (member(X, A) | member(X, B)))).
fof(x_in_a, axiom, member(x, sa)).
fof(x_in_union, conjecture, member(x, union(sa, sb))).
""",
    "conjunction_split": """
fof(both, axiom, p & q).
fof(q_s, axiom, q => s).
fof(goal, conjecture, s & p).
""",
    "skolem_relation": """
fof(serial, axiom, ![X] : ?[Y] : r(X, Y)).
fof(r_implies_s, axiom, ![X, Y] : (r(X, Y) => s(Y))).
fof(some_s, conjecture, ?[Z] : s(Z)).
""",
}


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def main(root=ROOT):
    rng = random.Random(20131)
    noise = noise_formulas(rng)
    chain = os.path.join(root, "chain")
    for i in range(1, N_PROBLEMS + 1):
        write(os.path.join(chain, f"p{i:02d}.p"), chain_problem(i, noise))
    write(os.path.join(chain, "train_proofs.log"), training_log(noise))
    batch = ["# ordered batch: learn from the first half, then solve the second\n",
             "budget 600s\n", "problem_budget 4s\n", "training_proofs train_proofs.log\n"]
    batch += [f"training_problem p{i:02d}.p\n" for i in range(1, 16)]
    batch += [f"problem p{i:02d}.p\n" for i in range(16, N_PROBLEMS + 1)]
    write(os.path.join(chain, "batch.txt"), "".join(batch))
    write(os.path.join(chain, "ensemble.cfg"),
          "# id, ranker, premise slice, strategy, time\n"
          "knn16 ranker=knn k=16 idf=1 norm=1 features=symbol,term premises=8 strategy=default time=1000\n"
          "mix16 ranker=knn+sine w=0.5 k=16 features=symbol,term premises=16 strategy=default time=1000\n"
          "nb32 ranker=nb features=symbol,term premises=32 strategy=default time=1000\n"
          "sine128 ranker=sine tolerance=1.5 premises=128 strategy=default time=1000\n")
    write(os.path.join(chain, "sine_baseline.cfg"),
          "sine8 ranker=sine premises=8 time=1000\n"
          "sine16 ranker=sine premises=16 time=1000\n"
          "sine32 ranker=sine premises=32 time=1000\n"
          "sine128 ranker=sine premises=128 time=1000\n")
    for name, text in SUITE.items():
        write(os.path.join(root, "suite", f"{name}.p"), text.lstrip())
    write(os.path.join(root, "trivial.p"), SUITE["syllogism"].lstrip())
    write(os.path.join(root, "portfolio.txt"),
          "# id key=value ...\n"
          "default age_ratio=1 weight_ratio=5\n"
          "breadth age_ratio=1 weight_ratio=1\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
