"""Proof pseudo-minimization by re-proving from the used premises."""

from __future__ import annotations

from typing import Callable

from ..prover.types import THEOREM, ProverResult
from ..tptp import Problem
from .kb import ProofRecord


def pseudo_minimize(problem: Problem, result: ProverResult,
                    prove_fn: Callable[[Problem], ProverResult], budget: int = 3,
                    strategy: str = "", trace: list | None = None) -> ProofRecord:
    """Re-prove ``problem`` restricted to the premises of the last proof.

    Stops at a fixpoint, after ``budget`` re-proofs, or when a re-proof fails;
    the record of the last successful proof is returned.  Each successful
    iteration's premise set is a subset of the previous one because the
    prover only ever sees the previous set.  ``trace`` (if given) collects the
    successive used sets, starting with the initial one.
    """
    if result.status != THEOREM:
        raise ValueError("pseudo_minimize needs a Theorem result")
    used = frozenset(result.used_premises)
    best = result
    source = "run"
    if trace is not None:
        trace.append(used)
    for _ in range(max(0, budget)):
        res = prove_fn(problem.restrict(used))
        if res.status != THEOREM:
            break
        new = frozenset(res.used_premises) & used
        if not new:
            # a conjecture provable from no premises is kept at the old set
            break
        source = "minimized"
        changed = new != used
        best = ProverResult(THEOREM, new, res.cpu_millis, res.proof_steps, res.proof)
        used = new
        if trace is not None:
            trace.append(used)
        if not changed:
            break
    return ProofRecord(problem.conjecture_name, used, strategy, best.cpu_millis,
                       best.proof_steps, source)
