"""Command-line entry point: ``premsel <command> [options]``.

Every option may also come from a ``--config`` file of ``key = value`` lines
(keys are option names without the leading dashes, ``-`` or ``_`` both
accepted); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .features import FEATURE_KINDS, SYMBOL, TERM, FeatureTable, dump_features
from .orchestrator import (LoopConfig, Session, SolutionCache, dump_ensemble,
                           evaluate_members, greedy_ensemble, load_batch_spec, load_ensemble,
                           load_problems, parse_duration, run_ordered_ltb, run_unordered_loop,
                           write_records)
from .orchestrator.cache import ENV_VAR
from .orchestrator.ensemble import default_member_pool
from .prover import StrategySpec, load_portfolio, run_strategy
from .rankers import KnnSpec, NBayesSpec, SineSpec
from .tptp import TptpError, build_corpus, merge_duplicates, parse_file, print_tptp

log = logging.getLogger("premsel")

COMMANDS = ("parse", "features", "rank", "prove", "loop", "ltb", "ensemble", "cache-stats")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Option types
# ---------------------------------------------------------------------------

def duration(text: str) -> float:
    try:
        value = parse_duration(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"duration must be positive, got {text!r}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def int_list(text: str) -> tuple:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(f"schedule must be positive and increasing: {text!r}")
    return values


def duration_list(text: str) -> tuple:
    values = tuple(int(round(duration(x) * 1000)) for x in text.split(",") if x.strip())
    if not values or any(v < 100 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(f"time schedule must be >= 100ms and increasing: {text!r}")
    return values


def kinds_list(text: str) -> tuple:
    kinds = tuple(k for k in text.split(",") if k)
    bad = [k for k in kinds if k not in FEATURE_KINDS]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"unknown feature kinds {bad or text!r}; "
                                         f"choose from {','.join(FEATURE_KINDS)}")
    return kinds


def flag01(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected 0/1, got {text!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="seed for every stochastic component")
    g.add_argument("--workers", type=positive_int, default=1, help="worker pool size")
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("--out", default="premsel-out", help="output directory for reports")
    g.add_argument("--cache-dir", help=f"solution cache directory (env {ENV_VAR}; default <out>/cache)")
    g.add_argument("--no-cache", action="store_true", help="disable the solution cache")
    g.add_argument("--portfolio", help="strategy portfolio file (id key=value ... per line)")
    g.add_argument("--include-dir", help="directory that include() paths resolve against")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _ranker_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("ranker")
    g.add_argument("--ranker", choices=("knn", "nb", "sine"), default="knn")
    g.add_argument("--k", type=positive_int, default=16)
    g.add_argument("--idf", type=flag01, default=True)
    g.add_argument("--normalize", type=flag01, default=True)
    g.add_argument("--kinds", type=kinds_list, default=(SYMBOL, TERM))
    g.add_argument("--tolerance", type=float, default=1.5)
    g.add_argument("--lsa-rank", type=int, default=0, help="LSA topic count (0: off)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="premsel", description="Premise selection and proving "
                                     "for large first-order theories.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("parse", parents=[common], help="parse and print normalized TPTP")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("features", parents=[common], help="dump formula features")
    p.add_argument("--corpus", nargs="+", required=True, help="problem files or directories")
    p.add_argument("--kinds", type=kinds_list, default=(SYMBOL, TERM))
    p.add_argument("--lsa-rank", type=int, default=0)

    p = sub.add_parser("rank", parents=[common], help="rank the premises of one conjecture")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--conjecture", required=True)
    p.add_argument("--proofs", nargs="*", default=[], help="proof-record logs to learn from")
    p.add_argument("--top", type=int, default=0, help="print only the best N premises")
    _ranker_options(p)

    p = sub.add_parser("prove", parents=[common], help="run one strategy on one problem")
    p.add_argument("file")
    p.add_argument("--time", type=duration, default=5.0)
    p.add_argument("--strategy", default="default")

    p = sub.add_parser("loop", parents=[common], help="free-order learn/prove loop")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--proofs", nargs="*", default=[])
    p.add_argument("--budget", type=duration, default=None)
    p.add_argument("--premises", type=int_list, default=(8, 16, 32, 64, 128))
    p.add_argument("--times", type=duration_list, default=(1000, 5000, 15000))
    p.add_argument("--strategy", default="default")
    p.add_argument("--harvest", type=flag01, default=True, help="search counter-models")
    _ranker_options(p)
    p.set_defaults(kinds=(SYMBOL, TERM, "model"))

    p = sub.add_parser("ltb", parents=[common], help="ordered batch mode with an ensemble")
    p.add_argument("--batch", required=True)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--budget", type=duration, default=None)
    p.add_argument("--problem-budget", type=duration, default=None)

    p = sub.add_parser("ensemble", parents=[common], help="build an ensemble by greedy cover")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--proofs", nargs="*", default=[])
    p.add_argument("--candidates", help="candidate member file (default: built-in grid)")
    p.add_argument("--size", type=positive_int, default=40)
    p.add_argument("--time", type=duration, default=1.0, help="time per candidate run")

    sub.add_parser("cache-stats", parents=[common], help="report solution cache statistics")
    return parser


def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_args(argv) -> argparse.Namespace:
    """Parse and validate; raises SystemExit(2) on any usage error."""
    argv = list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = _read_config(args.config)
        except UsageError as exc:
            parser.error(str(exc))
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"--config: unknown keys {', '.join(unknown)}")
        list_keys = {a.dest for a in sub._actions if a.nargs in ("+", "*")}
        for key in list(cfg):
            if key in list_keys:
                cfg[key] = cfg[key].split()
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    _validate(parser, args)
    return args


def _validate(parser, args):
    for name in ("batch", "ensemble", "file", "portfolio", "candidates"):
        path = getattr(args, name, None)
        if path and not os.path.exists(path):
            parser.error(f"--{name}: no such file {path!r}")
    for name in ("corpus", "files", "proofs"):
        for path in getattr(args, name, None) or []:
            if not os.path.exists(path):
                parser.error(f"--{name}: no such file or directory {path!r}")
    if getattr(args, "lsa_rank", 0) < 0:
        parser.error("--lsa-rank must be >= 0")
    tol = getattr(args, "tolerance", None)
    if tol is not None and tol < 1:
        parser.error("--tolerance must be >= 1")


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _problem_files(paths) -> list:
    out = []
    for p in paths:
        if os.path.isdir(p):
            out += sorted(os.path.join(p, f) for f in os.listdir(p) if f.endswith(".p"))
        else:
            out.append(p)
    return out


def _cache(args):
    if args.no_cache:
        return None
    root = args.cache_dir or os.environ.get(ENV_VAR) or os.path.join(args.out, "cache")
    return SolutionCache(root)


def _strategies(args) -> dict:
    strategies = {"default": StrategySpec()}
    if args.portfolio:
        with open(args.portfolio, encoding="utf-8") as fh:
            strategies.update(load_portfolio(fh.read()))
    return strategies


def _read_all(paths) -> list:
    texts = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            texts.append(fh.read())
    return texts


def _ranker(args):
    if args.ranker == "sine":
        return SineSpec(args.tolerance)
    kinds = tuple(args.kinds)
    if args.lsa_rank > 0 and "lsa" not in kinds:
        kinds += ("lsa",)
    if args.ranker == "nb":
        return NBayesSpec(kinds)
    return KnnSpec(args.k, args.idf, args.normalize, kinds)


def _write(args, name: str, text: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def cmd_parse(args) -> int:
    for path in args.files:
        p = parse_file(path, args.include_dir)
        corpus = build_corpus([p])
        sys.stdout.write(print_tptp(corpus.problems[0]))
    return 0


def cmd_features(args) -> int:
    problems = load_problems(_problem_files(args.corpus), args.include_dir)
    corpus = merge_duplicates(build_corpus(problems))
    table = FeatureTable()
    for name, nf in corpus.formulas.items():
        table.add_formula(name, nf.formula)
    table.refresh_stats()
    kinds = tuple(args.kinds)
    if args.lsa_rank > 0:
        table.fit_topics(args.lsa_rank, args.seed)
    path = _write(args, "features.txt", dump_features(table, [k for k in kinds if k != "lsa"]))
    if args.lsa_rank > 0:
        lines = [f"{n} " + " ".join(f"{x:.12g}" for x in table.topics[n]) for n in table.names()]
        _write(args, "topics.txt", "\n".join(lines) + "\n")
    print(path)
    return 0


def cmd_rank(args) -> int:
    problems = load_problems(_problem_files(args.corpus), args.include_dir)
    with Session(problems, lsa_rank=args.lsa_rank, seed=args.seed, cache=None) as s:
        s.bootstrap(_read_all(args.proofs))
        target = s.corpus.canonical(args.conjecture)
        matches = [p for p in s.problems if p.conjecture_name == target]
        if not matches:
            raise UsageError(f"--conjecture: no problem has conjecture {args.conjecture!r}")
        ranking = s.predictor().rank(matches[0], _ranker(args))
        entries = ranking.entries[: args.top] if args.top > 0 else ranking.entries
        for name, score in entries:
            print(f"{ranking.conjecture} {name} {score!r}")
    return 0


def cmd_prove(args) -> int:
    p = parse_file(args.file, args.include_dir)
    strategies = _strategies(args)
    if args.strategy not in strategies:
        raise UsageError(f"--strategy: unknown strategy {args.strategy!r}")
    problem = build_corpus([p]).problems[0]
    res = run_strategy(problem, strategies[args.strategy], int(args.time * 1000))
    print(f"% SZS status {res.status} for {p.name or p.conjecture_name}")
    if res.used_premises:
        print("% used premises: " + " ".join(sorted(res.used_premises)))
    return 0


def cmd_loop(args) -> int:
    problems = load_problems(_problem_files(args.corpus), args.include_dir)
    cfg = LoopConfig(premise_counts=args.premises, time_limits=args.times,
                     budget_seconds=args.budget, workers=args.workers,
                     strategy=args.strategy, ranker=_ranker(args), harvest_models=args.harvest)
    with Session(problems, strategies=_strategies(args), cache=_cache(args),
                 workers=args.workers, lsa_rank=args.lsa_rank, seed=args.seed) as s:
        if cfg.strategy not in s.strategies:
            raise UsageError(f"--strategy: unknown strategy {cfg.strategy!r}")
        s.bootstrap(_read_all(args.proofs))
        report = run_unordered_loop(s, config=cfg)
        _write(args, "proofs.log", write_records(s.kb.all_records()))
        _write(args, "models.txt", s.pool.dumps())
    path = _write(args, "report.txt", report.dumps())
    print(f"solved {len(report.solved)}/{len(report.outcomes)}; report in {path}")
    return 0


def cmd_ltb(args) -> int:
    spec = load_batch_spec(args.batch)
    include = args.include_dir or spec.axioms_dir
    with open(args.ensemble, encoding="utf-8") as fh:
        members = load_ensemble(fh.read())
    batch = load_problems(spec.problems, include)
    training = load_problems(spec.training_problems, include)
    budget = args.budget if args.budget is not None else spec.budget_seconds
    pbudget = (int(args.problem_budget * 1000) if args.problem_budget is not None
               else spec.problem_budget_millis)
    cfg = LoopConfig(budget_seconds=budget, problem_budget_millis=pbudget, workers=args.workers)
    with Session(batch, extra_problems=training, strategies=_strategies(args),
                 cache=_cache(args), workers=args.workers, seed=args.seed) as s:
        unknown = sorted({m.strategy for m in members} - set(s.strategies))
        if unknown:
            raise UsageError(f"--ensemble: unknown strategies {', '.join(unknown)}")
        warnings = s.bootstrap(_read_all(spec.training_proofs))
        if warnings:
            log.warning("%d unknown names in training proofs", warnings)
        report = run_ordered_ltb(s, s.problems, members, cfg)
        _write(args, "audit.log", s.audit_text())
        _write(args, "proofs.log", write_records(s.kb.all_records()))
    sols = "".join(f"{o.problem}\t{o.member}\n" for o in report.outcomes if o.solved)
    _write(args, "solutions.txt", sols)
    path = _write(args, "report.txt", report.dumps())
    print(f"solved {len(report.solved)}/{len(report.outcomes)}; report in {path}")
    return 0


def cmd_ensemble(args) -> int:
    problems = load_problems(_problem_files(args.corpus), args.include_dir)
    if args.candidates:
        with open(args.candidates, encoding="utf-8") as fh:
            members = load_ensemble(fh.read())
    else:
        members = default_member_pool(times=(int(args.time * 1000),))
    with Session(problems, strategies=_strategies(args), cache=_cache(args),
                 workers=args.workers, seed=args.seed) as s:
        s.bootstrap(_read_all(args.proofs))
        solved = s.kb.solved()
        targets = [p for p in s.problems if p.conjecture_name not in solved] or s.problems
        matrix = evaluate_members(s, targets, members)
    chosen = greedy_ensemble(matrix, args.size)
    by_id = {m.id: m for m in members}
    lines = [f"{mid}\t{','.join(sorted(matrix.solved[mid]))}" for mid in sorted(matrix.solved)]
    _write(args, "outcomes.txt", "\n".join(lines) + "\n")
    path = _write(args, "ensemble.cfg", dump_ensemble(by_id[m] for m in chosen))
    covered = matrix.coverage(chosen)
    print(f"{len(chosen)} members cover {len(covered)}/{len(targets)} problems; written to {path}")
    return 0


def cmd_cache_stats(args) -> int:
    cache = _cache(args)
    if cache is None:
        raise UsageError("cache-stats needs a cache (drop --no-cache)")
    st = cache.stats()
    print(f"cache {cache.root}")
    print(f"entries {st['entries']}")
    return 0


HANDLERS = {
    "parse": cmd_parse, "features": cmd_features, "rank": cmd_rank, "prove": cmd_prove,
    "loop": cmd_loop, "ltb": cmd_ltb, "ensemble": cmd_ensemble, "cache-stats": cmd_cache_stats,
}


def execute(args) -> int:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"premsel {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (TptpError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"premsel {args.command}: {msg}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    args = parse_args(sys.argv[1:] if argv is None else argv)
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
