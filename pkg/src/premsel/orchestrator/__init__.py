"""Knowledge base, cache, learning loops and ensemble construction."""

from .cache import SolutionCache, cache_key, canonical_problem_text
from .engine import (BatchSpec, LoopConfig, ProblemOutcome, RunReport, Session,
                     evaluate_members, load_batch_spec, load_problems, parse_duration,
                     problem_id, run_ordered_ltb, run_unordered_loop)
from .ensemble import (DEFAULT_ENSEMBLE_SIZE, EnsembleMember, OutcomeMatrix,
                       default_member_pool, dump_ensemble, greedy_ensemble,
                       load_ensemble, parse_member)
from .kb import KnowledgeBase, ProofRecord, bootstrap_kb, read_records, write_records
from .minimize import pseudo_minimize

__all__ = [
    "SolutionCache", "cache_key", "canonical_problem_text", "BatchSpec", "LoopConfig",
    "ProblemOutcome", "RunReport", "Session", "evaluate_members", "load_batch_spec",
    "load_problems", "parse_duration", "problem_id", "run_ordered_ltb", "run_unordered_loop",
    "DEFAULT_ENSEMBLE_SIZE", "EnsembleMember", "OutcomeMatrix", "default_member_pool",
    "dump_ensemble", "greedy_ensemble", "load_ensemble", "parse_member", "KnowledgeBase",
    "ProofRecord", "bootstrap_kb", "read_records", "write_records", "pseudo_minimize",
]
