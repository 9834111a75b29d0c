"""The coordinator: corpus preparation, cached proving and both loop modes."""

from __future__ import annotations

import concurrent.futures as cf
import logging
import os
import time
from dataclasses import dataclass, field

from ..features import LSA, MODEL, SYMBOL, TERM, FeatureTable
from ..modelsem import (FiniteModel, ModelBudgetExceeded, ModelPool, find_countermodel,
                        load_models)
from ..prover import (COUNTER_SATISFIABLE, THEOREM, ProverResult, StrategySpec,
                      run_strategy)
from ..rankers import KnnSpec, Predictor, RankerSpec, slice_ranking
from ..tptp import Problem, build_corpus, merge_duplicates, parse_file, signature_of
from .cache import SolutionCache, canonical_problem_text
from .kb import KnowledgeBase, ProofRecord, bootstrap_kb
from .ensemble import EnsembleMember, OutcomeMatrix
from .minimize import pseudo_minimize

log = logging.getLogger(__name__)

COUNTERMODEL_KEY = "$countermodel"


def problem_id(p: Problem) -> str:
    return p.name or p.conjecture_name


def _increasing(xs) -> bool:
    return all(a < b for a, b in zip(xs, xs[1:]))


@dataclass
class LoopConfig:
    premise_counts: tuple = (8, 16, 32, 64, 128)
    time_limits: tuple = (1000, 5000, 15000)        # milliseconds
    budget_seconds: float | None = None
    problem_budget_millis: int | None = None          # ordered mode only
    workers: int = 1
    strategy: str = "default"
    ranker: RankerSpec = field(default_factory=lambda: KnnSpec(16, feature_kinds=(SYMBOL, TERM, MODEL)))
    minimize_budget: int = 3
    harvest_models: bool = True
    model_max_n: int = 3
    model_budget: int = 20_000

    def __post_init__(self):
        self.premise_counts = tuple(self.premise_counts)
        self.time_limits = tuple(self.time_limits)
        if not self.premise_counts or not _increasing(self.premise_counts) \
                or self.premise_counts[0] < 1:
            raise ValueError("premise-count schedule must be nonempty, positive and increasing")
        if not self.time_limits or not _increasing(self.time_limits) or self.time_limits[0] < 100:
            raise ValueError("time schedule must be nonempty, increasing and >= 100 ms")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            raise ValueError("budget must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ProblemOutcome:
    problem: str
    conjecture: str
    solved: bool = False
    strategy: str = ""
    member: str = ""
    premises: int = 0
    slice: int = 0
    time_limit: int = 0
    round: int = 0

    def line(self) -> str:
        if not self.solved:
            return f"problem {self.problem} unsolved"
        who = f" member={self.member}" if self.member else ""
        return (f"problem {self.problem} solved{who} strategy={self.strategy} "
                f"slice={self.slice} time={self.time_limit} premises={self.premises} "
                f"round={self.round}")


@dataclass
class RunReport:
    """Per-problem outcomes, the cumulative solved count after each pass,
    and cache statistics.  Contains no wall-clock values."""

    mode: str
    outcomes: list = field(default_factory=list)
    pass_curve: list = field(default_factory=list)
    models: int = 0
    records: list = field(default_factory=list)
    cache_hits: int = 0
    cache_misses: int = 0

    @property
    def solved(self) -> list:
        return [o.problem for o in self.outcomes if o.solved]

    def outcome(self, problem: str) -> ProblemOutcome:
        for o in self.outcomes:
            if o.problem == problem:
                return o
        raise KeyError(problem)

    def dumps(self) -> str:
        lines = [f"mode {self.mode}", f"problems {len(self.outcomes)}",
                 f"solved {len(self.solved)}"]
        lines += [f"pass {i + 1} {n}" for i, n in enumerate(self.pass_curve)]
        lines += [o.line() for o in self.outcomes]
        lines.append(f"models {self.models}")
        lines.append(f"cache hits {self.cache_hits} misses {self.cache_misses}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------

def _run_job(problem: Problem, strategy: StrategySpec, limit: int) -> ProverResult:
    return run_strategy(problem, strategy, limit)


class Session:
    """Owns the corpus, features, KB, model pool, cache and worker pool.

    All KB and pool mutations happen here, in the calling thread, between
    batches; workers only run provers.
    """

    def __init__(self, problems, *, strategies: dict | None = None,
                 cache: SolutionCache | None = None, workers: int = 1,
                 lsa_rank: int = 0, seed: int = 0, extra_problems=()):
        problems = list(problems)
        extra = list(extra_problems)
        self.corpus = merge_duplicates(build_corpus(problems + extra))
        self.problems = self.corpus.problems[:len(problems)]
        self.extra_problems = self.corpus.problems[len(problems):]
        self.strategies = dict(strategies or {"default": StrategySpec()})
        self.cache = cache
        self.workers = workers
        self.seed = seed
        self.table = FeatureTable()
        for name, nf in self.corpus.formulas.items():
            self.table.add_formula(name, nf.formula)
        self.table.refresh_stats()
        if lsa_rank > 0 and len(self.corpus.formulas) > 1:
            self.table.fit_topics(lsa_rank, seed)
        self.functions, self.predicates = signature_of(
            nf.formula for nf in self.corpus.formulas.values())
        self.pool = ModelPool()
        self.kb = KnowledgeBase(self.pool)
        self.audit: list = []
        self._start = time.monotonic()
        self._executor = None
        self.cache_hits = 0
        self.cache_misses = 0

    # -- lifecycle ------------------------------------------------------------

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _pool(self):
        if self._executor is None:
            self._executor = cf.ProcessPoolExecutor(max_workers=self.workers)
        return self._executor

    # -- knowledge --------------------------------------------------------------

    def bootstrap(self, proof_texts) -> int:
        kb, warnings = bootstrap_kb(proof_texts, self.corpus.formulas.keys(),
                                    self.corpus.alias_map, self.pool)
        for rec in kb.all_records():
            self.kb.add(rec)
        return warnings

    def predictor(self) -> Predictor:
        return Predictor(self.table, self.kb.snapshot())

    def add_model(self, model: FiniteModel) -> bool:
        """Add a model (extended to the corpus signature); refresh model features if new."""
        mid, new = self.pool.add(model.extended(self.functions, self.predicates))
        if not new:
            return False
        fid = self.table.interner.id(f"mod:{mid}")
        for name, nf in self.corpus.formulas.items():
            if self.pool.truth(nf.formula, mid):
                fs = dict(self.table.sparse[MODEL].get(name, {}))
                fs[fid] = 1
                self.table.set_model_features(name, fs)
        self.table.refresh_stats()
        return True

    def harvest(self, problem: Problem, max_n: int, budget: int) -> bool:
        """Look for a counter-model of ``problem``; True if the pool gained one."""
        text = None
        key_text = canonical_problem_text(problem)
        if self.cache is not None:
            text = self.cache.get_text(key_text, f"{COUNTERMODEL_KEY}:{max_n}:{budget}")
        if text is None:
            try:
                m = find_countermodel([nf.formula for nf in problem.premises],
                                      problem.conjecture.formula, max_n, budget)
            except ModelBudgetExceeded:
                m = None
            text = m.dumps() if m is not None else "none\n"
            if self.cache is not None:
                self.cache.put_text(key_text, f"{COUNTERMODEL_KEY}:{max_n}:{budget}", text)
        if text.strip() == "none":
            return False
        models = load_models(text)
        return any([self.add_model(m) for m in models])

    # -- proving ----------------------------------------------------------------

    def strategy(self, sid: str) -> StrategySpec:
        try:
            return self.strategies[sid]
        except KeyError:
            raise KeyError(f"unknown strategy {sid!r}") from None

    def _lookup(self, problem: Problem, sid: str, limit: int):
        if self.cache is None:
            return None, None
        text = canonical_problem_text(problem)
        res = self.cache.get(text, sid, limit)
        if res is None:
            self.cache_misses += 1
        else:
            self.cache_hits += 1
        return text, res

    def _store(self, text, sid, limit, res):
        if self.cache is not None and text is not None:
            self.cache.put(text, sid, limit, res)

    def attempt(self, problem: Problem, sid: str, limit: int) -> ProverResult:
        return self.attempt_many([(problem, sid, limit)])[0]

    def attempt_many(self, jobs) -> list:
        """Prove each ``(problem, strategy id, limit)``; cache first, then the pool."""
        results: list = [None] * len(jobs)
        pending = []
        for i, (p, sid, limit) in enumerate(jobs):
            text, res = self._lookup(p, sid, limit)
            if res is None:
                pending.append((i, text))
            else:
                results[i] = res
        if self.workers > 1 and len(pending) > 1:
            futs = [(i, text, self._pool().submit(_run_job, jobs[i][0], self.strategy(jobs[i][1]),
                                                  jobs[i][2])) for i, text in pending]
            for i, text, fut in futs:
                results[i] = fut.result()
                self._store(text, jobs[i][1], jobs[i][2], results[i])
        else:
            for i, text in pending:
                p, sid, limit = jobs[i]
                results[i] = _run_job(p, self.strategy(sid), limit)
                self._store(text, sid, limit, results[i])
        return results

    def first_theorem(self, problem_name: str, jobs) -> tuple:
        """Run member jobs; the lowest-index Theorem wins.

        Returns ``(index, result)`` or ``(None, None)``.  Sequential mode stops
        at the first Theorem; parallel mode abandons jobs after the winner.
        """
        looked = [self._lookup(p, sid, limit) for _, p, sid, limit in jobs]
        if self.workers <= 1:
            for i, (mid, p, sid, limit) in enumerate(jobs):
                self._log("launch", problem_name, mid)
                text, res = looked[i]
                if res is None:
                    res = _run_job(p, self.strategy(sid), limit)
                    self._store(text, sid, limit, res)
                if res.status == THEOREM:
                    return i, res
            return None, None
        futs = []
        for i, (mid, p, sid, limit) in enumerate(jobs):
            self._log("launch", problem_name, mid)
            text, res = looked[i]
            if res is not None:
                futs.append((text, None, res))
            else:
                futs.append((text, self._pool().submit(_run_job, p, self.strategy(sid), limit), None))
        winner = (None, None)
        for i, (text, fut, res) in enumerate(futs):
            if winner[0] is not None:
                if fut is not None:
                    fut.cancel()
                continue
            if fut is not None:
                res = fut.result()
                self._store(text, jobs[i][2], jobs[i][3], res)
            if res.status == THEOREM:
                winner = (i, res)
        return winner

    def _log(self, event: str, problem: str, member: str = ""):
        self.audit.append((len(self.audit), round(time.monotonic() - self._start, 6),
                           event, problem, member))

    def audit_text(self) -> str:
        return "".join(f"{seq}\t{t:.6f}\t{ev}\t{p}\t{m}\n" for seq, t, ev, p, m in self.audit)

    def _report(self, mode: str) -> RunReport:
        r = RunReport(mode)
        r.models = len(self.pool)
        r.records = self.kb.all_records()
        r.cache_hits, r.cache_misses = self.cache_hits, self.cache_misses
        return r

    def _learn(self, problem: Problem, result: ProverResult, sid: str, limit: int,
               minimize_budget: int):
        """Minimize and store a proof; returns the record (None for premise-free proofs)."""
        if not result.used_premises:
            return None
        rec = pseudo_minimize(problem, result, lambda q: self.attempt(q, sid, limit),
                              minimize_budget, sid)
        self.kb.add(rec)
        return rec


# ---------------------------------------------------------------------------
# Unordered (free-order) loop
# ---------------------------------------------------------------------------

def run_unordered_loop(session: Session, problems=None, config: LoopConfig = LoopConfig()) -> RunReport:
    """Alternate proving and learning until nothing new can be learned.

    A pass walks the schedule (time limits outer, premise counts inner) over
    the unsolved problems, ranking each with the current KB.  The first batch
    that yields a proof or a new counter-model ends the pass; the next pass
    re-ranks everything and starts again from the cheapest pair.  The loop
    stops when everything is solved, the budget is spent, or a whole sweep
    brings nothing new.  Identical (problem, slice, limit) attempts are never
    repeated.
    """
    problems = list(session.problems if problems is None else problems)
    report = session._report("unordered")
    outcomes = {problem_id(p): ProblemOutcome(problem_id(p), p.conjecture_name) for p in problems}
    start = time.monotonic()
    attempted: set = set()
    schedule = [(t, n) for t in config.time_limits for n in config.premise_counts]
    sid = config.strategy

    def over_budget() -> bool:
        return config.budget_seconds is not None and time.monotonic() - start >= config.budget_seconds

    rnd = 0
    while problems and not over_budget():
        if all(o.solved for o in outcomes.values()):
            break
        rnd += 1
        predictor = session.predictor()
        rankings: dict = {}
        gained = False
        for t, n in schedule:
            if over_budget():
                break
            batch = []
            for p in problems:
                pid = problem_id(p)
                if outcomes[pid].solved:
                    continue
                if pid not in rankings:
                    rankings[pid] = predictor.rank(p, config.ranker)
                names = slice_ranking(rankings[pid], n)
                akey = (pid, frozenset(names), t, sid)
                if akey in attempted:
                    continue
                attempted.add(akey)
                batch.append((p, p.restrict(names), len(names)))
            if not batch:
                continue
            results = session.attempt_many([(sub, sid, t) for _, sub, _ in batch])
            info = False
            for (p, sub, size), res in zip(batch, results):
                o = outcomes[problem_id(p)]
                if res.status == THEOREM:
                    rec = session._learn(sub, res, sid, t, config.minimize_budget)
                    o.solved, o.strategy, o.slice, o.time_limit, o.round = True, sid, size, t, rnd
                    o.premises = len(rec.used_premises) if rec else 0
                    info = True
                elif res.status == COUNTER_SATISFIABLE and config.harvest_models:
                    if session.harvest(sub, config.model_max_n, config.model_budget):
                        info = True
            if info:
                gained = True
                break
        report.pass_curve.append(sum(o.solved for o in outcomes.values()))
        if not gained:
            break
    report.outcomes = [outcomes[problem_id(p)] for p in problems]
    report.models = len(session.pool)
    report.records = session.kb.all_records()
    report.cache_hits, report.cache_misses = session.cache_hits, session.cache_misses
    return report


# ---------------------------------------------------------------------------
# Ordered (LTB) mode
# ---------------------------------------------------------------------------

def run_ordered_ltb(session: Session, batch, members, config: LoopConfig = LoopConfig()) -> RunReport:
    """Process ``batch`` strictly in order with an ensemble of members.

    For each problem every member ranks its premises against the current KB
    and contributes one sliced prover job; the lowest-index member proving it
    wins.  The proof is minimized and learned before the next problem starts.
    Unsolved problems are never revisited.
    """
    members = list(members)
    if not members:
        raise ValueError("ensemble is empty")
    batch = list(batch)
    report = session._report("ordered")
    start = time.monotonic()
    for p in batch:
        pid = problem_id(p)
        o = ProblemOutcome(pid, p.conjecture_name)
        report.outcomes.append(o)
        if config.budget_seconds is not None and time.monotonic() - start >= config.budget_seconds:
            session._log("skip", pid)
            session._log("final", pid)
            continue
        predictor = session.predictor()
        rankings = _member_rankings(predictor, p, members, config.workers)
        jobs = []
        allowance = (None if config.problem_budget_millis is None
                     else config.problem_budget_millis * max(1, config.workers))
        for m, r in zip(members, rankings):
            limit = m.time_millis
            if allowance is not None:
                limit = min(limit, allowance)
                if limit < 100:
                    break
                allowance -= limit
            names = slice_ranking(r, m.premise_count)
            jobs.append((m, p.restrict(names), m.strategy, limit, len(names)))
        idx, res = session.first_theorem(pid, [(m.id, sub, sid, lim) for m, sub, sid, lim, _ in jobs])
        if idx is not None:
            m, sub, sid, lim, size = jobs[idx]
            rec = session._learn(sub, res, sid, lim, config.minimize_budget)
            o.solved, o.member, o.strategy, o.slice, o.time_limit = True, m.id, sid, size, lim
            o.premises = len(rec.used_premises) if rec else 0
            o.round = 1
            session._log("solution", pid, m.id)
        session._log("final", pid)
    report.models = len(session.pool)
    report.records = session.kb.all_records()
    report.cache_hits, report.cache_misses = session.cache_hits, session.cache_misses
    return report


def _member_rankings(predictor: Predictor, p: Problem, members, workers: int) -> list:
    # identical ranker specs share one ranking
    uniq: dict = {}
    for m in members:
        uniq.setdefault(m.ranker, None)
    specs = list(uniq)
    if workers > 1 and len(specs) > 1:
        with cf.ThreadPoolExecutor(max_workers=workers) as ex:
            ranked = list(ex.map(lambda s: predictor.rank(p, s), specs))
    else:
        ranked = [predictor.rank(p, s) for s in specs]
    by_spec = dict(zip(specs, ranked))
    return [by_spec[m.ranker] for m in members]


def evaluate_members(session: Session, problems, members) -> OutcomeMatrix:
    """Run every member once on every problem against the current (fixed) KB."""
    matrix = OutcomeMatrix()
    predictor = session.predictor()
    jobs, owners = [], []
    for m in members:
        matrix.ensure(m.id, m)
    for p in problems:
        rankings = _member_rankings(predictor, p, members, session.workers)
        for m, r in zip(members, rankings):
            jobs.append((p.restrict(slice_ranking(r, m.premise_count)), m.strategy, m.time_millis))
            owners.append((m, problem_id(p)))
    for (m, pid), res in zip(owners, session.attempt_many(jobs)):
        if res.status == THEOREM:
            matrix.add(m.id, pid, res.cpu_millis, m)
    return matrix


# ---------------------------------------------------------------------------
# Batch specification files
# ---------------------------------------------------------------------------

@dataclass
class BatchSpec:
    problems: list = field(default_factory=list)            # paths, in order
    training_problems: list = field(default_factory=list)   # paths
    training_proofs: list = field(default_factory=list)     # paths
    axioms_dir: str | None = None
    budget_seconds: float | None = None
    problem_budget_millis: int | None = None


def parse_duration(text: str) -> float:
    """``10s``, ``500ms``, ``2m``, ``1h`` or plain seconds -> seconds."""
    t = text.strip()
    for suffix, scale in (("ms", 0.001), ("s", 1.0), ("m", 60.0), ("h", 3600.0)):
        if t.endswith(suffix):
            num = t[: -len(suffix)]
            break
    else:
        num, scale = t, 1.0
    try:
        value = float(num) * scale
    except ValueError:
        raise ValueError(f"bad duration {text!r}") from None
    return value


def load_batch_spec(path: str) -> BatchSpec:
    """Line-oriented batch spec; paths are relative to the spec file.

    Keys: ``budget <dur>``, ``problem_budget <dur>``, ``axioms <dir>``,
    ``training_problems <dir>``, ``training_problem <file>``,
    ``training_proofs <file>``, ``problem <file>``.
    """
    base = os.path.dirname(os.path.abspath(path))
    spec = BatchSpec()

    def rel(x):
        return x if os.path.isabs(x) else os.path.join(base, x)

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition(" ")
            value = value.strip()
            if key == "problem":
                spec.problems.append(rel(value))
            elif key == "budget":
                spec.budget_seconds = parse_duration(value)
            elif key == "problem_budget":
                spec.problem_budget_millis = int(round(parse_duration(value) * 1000))
            elif key == "axioms":
                spec.axioms_dir = rel(value)
            elif key == "training_problems":
                d = rel(value)
                spec.training_problems += sorted(os.path.join(d, f) for f in os.listdir(d)
                                                 if f.endswith(".p"))
            elif key == "training_problem":
                spec.training_problems.append(rel(value))
            elif key == "training_proofs":
                spec.training_proofs.append(rel(value))
            else:
                raise ValueError(f"{path}:{lineno}: unknown batch key {key!r}")
    return spec


def load_problems(paths, include_dir=None) -> list:
    return [parse_file(p, include_dir) for p in paths]
