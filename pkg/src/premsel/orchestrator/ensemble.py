"""Ensemble members, outcome matrices and greedy ensemble construction."""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field

from ..features import FEATURE_KINDS
from ..rankers import (DEFAULT_KINDS, CombinedSpec, KnnSpec, NBayesSpec, RankerSpec,
                       SineSpec, describe_spec)

DEFAULT_ENSEMBLE_SIZE = 40


@dataclass(frozen=True)
class EnsembleMember:
    id: str
    ranker: RankerSpec
    premise_count: int
    strategy: str = "default"
    time_millis: int = 1000

    def __post_init__(self):
        if self.premise_count < 1:
            raise ValueError(f"member {self.id}: premise_count must be >= 1")
        if self.time_millis < 100:
            raise ValueError(f"member {self.id}: time_millis must be >= 100")

    @property
    def feature_kinds(self) -> tuple:
        return _kinds_of(self.ranker)

    def to_line(self) -> str:
        return f"{self.id} {_spec_fields(self.ranker)} premises={self.premise_count} " \
               f"strategy={self.strategy} time={self.time_millis}"


def _kinds_of(spec) -> tuple:
    if isinstance(spec, (KnnSpec, NBayesSpec)):
        return spec.feature_kinds
    if isinstance(spec, CombinedSpec):
        out = list(_kinds_of(spec.first))
        out += [k for k in _kinds_of(spec.second) if k not in out]
        return tuple(out)
    return ()


def _spec_fields(spec) -> str:
    if isinstance(spec, KnnSpec):
        return (f"ranker=knn k={spec.k} idf={int(spec.use_idf)} norm={int(spec.normalize)} "
                f"bin={int(spec.binarize)} features={','.join(spec.feature_kinds)}")
    if isinstance(spec, NBayesSpec):
        return f"ranker=nb features={','.join(spec.feature_kinds)}"
    if isinstance(spec, SineSpec):
        return f"ranker=sine tolerance={spec.tolerance:g}"
    if isinstance(spec, CombinedSpec) and isinstance(spec.second, SineSpec) \
            and isinstance(spec.first, (KnnSpec, NBayesSpec)):
        head, *rest = _spec_fields(spec.first).split()
        return (f"ranker={head.split('=')[1]}+sine w={spec.weight:g} "
                f"tolerance={spec.second.tolerance:g} " + " ".join(rest))
    raise ValueError(f"cannot serialize ranker {describe_spec(spec)}")


def _flag(v: str) -> bool:
    if v not in ("0", "1", "true", "false"):
        raise ValueError(f"expected 0/1, got {v!r}")
    return v in ("1", "true")


def _kinds(v: str) -> tuple:
    kinds = tuple(k for k in v.split(",") if k)
    bad = [k for k in kinds if k not in FEATURE_KINDS]
    if bad or not kinds:
        raise ValueError(f"unknown feature kinds {v!r}")
    return kinds


def _base_spec(kind: str, kv: dict):
    feats = _kinds(kv["features"]) if "features" in kv else DEFAULT_KINDS
    if kind == "knn":
        return KnnSpec(int(kv.get("k", 16)), _flag(kv.get("idf", "1")), _flag(kv.get("norm", "1")),
                       feats, _flag(kv.get("bin", "0")))
    if kind == "nb":
        return NBayesSpec(feats)
    if kind == "sine":
        return SineSpec(float(kv.get("tolerance", 1.5)))
    raise ValueError(f"unknown ranker {kind!r}")


def parse_member(line: str) -> EnsembleMember:
    """``id ranker=knn k=16 idf=1 norm=1 features=symbol,term premises=32 strategy=s time=1000``.

    ``ranker`` is one of knn, nb, sine, knn+sine, nb+sine (the last two
    combine with SInE using weight ``w``).
    """
    mid, *pairs = shlex.split(line)
    kv = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"member {mid}: expected key=value, got {pair!r}")
        kv[key] = value
    known = {"ranker", "k", "idf", "norm", "bin", "features", "tolerance", "w",
             "premises", "strategy", "time"}
    extra = set(kv) - known
    if extra:
        raise ValueError(f"member {mid}: unknown keys {sorted(extra)}")
    ranker = kv.get("ranker", "knn")
    if ranker.endswith("+sine"):
        spec = CombinedSpec(_base_spec(ranker[:-5], kv), _base_spec("sine", kv),
                            float(kv.get("w", 0.5)))
    else:
        spec = _base_spec(ranker, kv)
    return EnsembleMember(mid, spec, int(kv.get("premises", 32)), kv.get("strategy", "default"),
                          int(kv.get("time", 1000)))


def load_ensemble(text: str) -> list:
    members = [parse_member(line.split("#", 1)[0]) for line in text.splitlines()
               if line.split("#", 1)[0].strip()]
    ids = [m.id for m in members]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate member ids in ensemble")
    return members


def dump_ensemble(members) -> str:
    return "".join(m.to_line() + "\n" for m in members)


def default_member_pool(strategies=("default",), times=(1000,),
                        slices=(8, 16, 32, 64, 128), k_values=(4, 16, 64)) -> list:
    """A grid of candidate members for ensemble search."""
    specs = []
    for idf in (False, True):
        for norm in (False, True):
            for k in k_values:
                specs.append(KnnSpec(k, idf, norm))
    specs += [NBayesSpec(), SineSpec(), CombinedSpec(KnnSpec(16), SineSpec())]
    out = []
    for spec in specs:
        for n in slices:
            for s in strategies:
                for t in times:
                    out.append(EnsembleMember(f"m{len(out):03d}", spec, n, s, t))
    return out


# ---------------------------------------------------------------------------
# Outcome matrices and greedy cover
# ---------------------------------------------------------------------------

@dataclass
class OutcomeMatrix:
    """``solved[member_id] = {problem: cpu_millis}`` for recorded evaluation runs."""

    members: dict = field(default_factory=dict)   # id -> EnsembleMember (optional)
    solved: dict = field(default_factory=dict)    # id -> {problem: millis}

    def add(self, member_id: str, problem: str, millis: int, member=None):
        self.solved.setdefault(member_id, {})[problem] = millis
        if member is not None:
            self.members[member_id] = member

    def ensure(self, member_id: str, member=None):
        self.solved.setdefault(member_id, {})
        if member is not None:
            self.members[member_id] = member

    def coverage(self, ids) -> set:
        out: set = set()
        for i in ids:
            out |= set(self.solved.get(i, {}))
        return out


def greedy_ensemble(matrix: OutcomeMatrix, size: int) -> list:
    """Member ids chosen by greedy set cover.

    Each step takes the member solving most still-uncovered problems, ties
    going to the smaller total CPU over its solved problems, then the smaller
    id.  Stops at ``size`` members or when nobody adds coverage.
    """
    if not matrix.solved:
        raise ValueError("empty outcome matrix")
    if size < 0:
        raise ValueError("size must be non-negative")
    covered: set = set()
    chosen: list = []
    remaining = sorted(matrix.solved)
    while len(chosen) < size and remaining:
        def key(mid):
            gain = len(set(matrix.solved[mid]) - covered)
            return (-gain, sum(matrix.solved[mid].values()), mid)

        best = min(remaining, key=key)
        if not set(matrix.solved[best]) - covered:
            break
        chosen.append(best)
        covered |= set(matrix.solved[best])
        remaining.remove(best)
    return chosen
