"""Deciding problems: clausification, builtin saturation and external ATPs."""

from .checker import first_invalid_step, verify_refutation
from .clausify import ClausificationError, ClauseSet, InputClause, clausify
from .external import ProverSpawnError, external_prove, parse_szs_output
from .saturate import ProofStep, prove, saturate
from .types import (COUNTER_SATISFIABLE, DEFINITIVE, ERROR, GAVE_UP, RESOURCE_OUT,
                    SATISFIABLE, STATUSES, THEOREM, ProverResult, StrategySpec,
                    load_portfolio)


def run_strategy(problem, strategy: StrategySpec, limit_millis: int) -> ProverResult:
    """Prove ``problem`` with either kind of strategy."""
    if strategy.kind == "external":
        return external_prove(problem, strategy, limit_millis)
    try:
        return prove(problem, strategy, limit_millis)
    except ClausificationError as exc:
        return ProverResult(GAVE_UP, output=str(exc))


__all__ = [
    "ClauseSet", "InputClause", "ClausificationError", "clausify", "saturate", "prove",
    "ProofStep", "verify_refutation", "first_invalid_step", "external_prove",
    "parse_szs_output", "ProverSpawnError", "ProverResult", "StrategySpec",
    "load_portfolio", "run_strategy", "THEOREM", "COUNTER_SATISFIABLE", "SATISFIABLE",
    "RESOURCE_OUT", "GAVE_UP", "ERROR", "STATUSES", "DEFINITIVE",
]
