"""Proof records and the knowledge base the learners read."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Iterable

from ..modelsem import ModelPool

log = logging.getLogger(__name__)

SOURCES = ("training", "run", "minimized")


@dataclass(frozen=True)
class ProofRecord:
    conjecture: str
    used_premises: frozenset
    strategy: str = ""
    cpu_millis: int = 0
    proof_steps: int = 0
    source: str = "run"
    status: str = "Theorem"

    def __post_init__(self):
        object.__setattr__(self, "used_premises", frozenset(self.used_premises))
        if not self.used_premises:
            raise ValueError(f"proof record for {self.conjecture!r} uses no premises")
        if self.conjecture in self.used_premises:
            raise ValueError(f"{self.conjecture!r} cannot be a premise of its own proof")
        if self.source not in SOURCES:
            raise ValueError(f"unknown record source {self.source!r}")

    @property
    def size_key(self) -> tuple:
        return (len(self.used_premises), self.proof_steps, self.cpu_millis)

    def to_line(self) -> str:
        """Tab-separated: conjecture, premises, strategy, status, millis, steps, source."""
        return "\t".join([self.conjecture, ",".join(sorted(self.used_premises)), self.strategy,
                          self.status, str(self.cpu_millis), str(self.proof_steps), self.source])

    @classmethod
    def from_line(cls, line: str) -> "ProofRecord":
        parts = line.rstrip("\n").split("\t")
        if len(parts) not in (5, 7):
            raise ValueError(f"bad proof record line: {line!r}")
        conj, prem, strategy, status, millis = parts[:5]
        steps, source = (int(parts[5]), parts[6]) if len(parts) == 7 else (0, "training")
        return cls(conj, frozenset(p for p in prem.split(",") if p), strategy,
                   int(millis), steps, source, status)


def read_records(text: str) -> list:
    return [ProofRecord.from_line(line) for line in text.splitlines()
            if line.strip() and not line.startswith("#")]


def write_records(records: Iterable[ProofRecord]) -> str:
    return "".join(r.to_line() + "\n" for r in records)


class KnowledgeBase:
    """All proof records per conjecture plus the designated shortest one.

    "Shortest" means fewest premises, then fewest inference steps, then least
    CPU time.  The solved set and the model pool only grow.
    """

    def __init__(self, pool: ModelPool | None = None):
        self.records: dict = {}
        self.best: dict = {}
        self.pool = pool if pool is not None else ModelPool()
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.best)

    def __contains__(self, conjecture):
        return conjecture in self.best

    def add(self, record: ProofRecord) -> bool:
        """Store ``record``; True when it solved a new conjecture or improved the best proof."""
        with self._lock:
            self.records.setdefault(record.conjecture, []).append(record)
            cur = self.best.get(record.conjecture)
            if cur is None or record.size_key < cur.size_key:
                self.best[record.conjecture] = record
                return True
            return False

    def solved(self) -> set:
        return set(self.best)

    def snapshot(self) -> dict:
        """Immutable view for rankers: conjecture -> premises of the best proof."""
        with self._lock:
            return {c: r.used_premises for c, r in sorted(self.best.items())}

    def all_records(self) -> list:
        return [r for c in sorted(self.records) for r in self.records[c]]


def bootstrap_kb(proof_texts: Iterable[str], known_names=None, alias_map=None,
                 pool: ModelPool | None = None) -> tuple:
    """Load proof-record logs into a fresh KB.

    Names are resolved through ``alias_map``.  Unknown premise names are
    dropped; records whose conjecture is unknown or that lose all premises are
    skipped.  Returns ``(kb, warnings)``.
    """
    kb = KnowledgeBase(pool)
    alias_map = alias_map or {}
    known = None if known_names is None else set(known_names)
    warnings = 0
    for text in proof_texts:
        for rec in read_records(text):
            conj = alias_map.get(rec.conjecture, rec.conjecture)
            prem = {alias_map.get(p, p) for p in rec.used_premises}
            if known is not None:
                unknown = {p for p in prem if p not in known}
                if conj not in known:
                    unknown.add(conj)
                if unknown:
                    warnings += len(unknown)
                    log.warning("proof of %s mentions unknown names: %s", conj, sorted(unknown))
                    if conj not in known:
                        continue
                    prem -= unknown
            prem.discard(conj)
            if not prem:
                continue
            kb.add(ProofRecord(conj, frozenset(prem), rec.strategy, rec.cpu_millis,
                               rec.proof_steps, "training", rec.status))
    return kb, warnings
