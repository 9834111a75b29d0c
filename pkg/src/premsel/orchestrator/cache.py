"""Content-indexed, file-based cache of prover results."""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
import threading

from ..prover.types import DEFINITIVE, ProverResult
from ..tptp import Problem, print_formula

log = logging.getLogger(__name__)

ANY_TIME = "any"
ENV_VAR = "PREMSEL_CACHE_DIR"


def canonical_problem_text(p: Problem) -> str:
    """Premises sorted by name, conjecture last; formulas in printed form."""
    lines = [f"fof({nf.name},{nf.role},{print_formula(nf.formula)})."
             for nf in sorted(p.premises, key=lambda nf: nf.name)]
    c = p.conjecture
    lines.append(f"fof({c.name},conjecture,{print_formula(c.formula)}).")
    return "\n".join(lines)


def cache_key(problem_text: str, strategy_id: str, time_class) -> str:
    h = hashlib.sha256()
    for part in (problem_text, strategy_id, str(time_class)):
        h.update(part.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


class SolutionCache:
    """Two-level hex fan-out directory of ``<sha256>.json`` result files.

    Results are keyed by (canonical problem text, strategy id, time class).
    Time-independent outcomes (Theorem, CounterSatisfiable, Satisfiable) are
    also filed under the ``any`` class, so they answer requests for every
    limit, while e.g. a ResourceOut only answers its own limit.  Writes go
    through a temporary file and an atomic rename.
    """

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def _path(self, key: str) -> str:
        return os.path.join(self.root, key[:2], key[2:4], key + ".json")

    def _read(self, key: str):
        path = self._path(key)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            return None
        try:
            return ProverResult.from_json(text)
        except (ValueError, KeyError, TypeError):
            self._quarantine(path)
            return None

    def _quarantine(self, path: str):
        log.warning("corrupt cache entry %s quarantined", path)
        try:
            os.replace(path, path + ".corrupt")
        except OSError:
            pass

    def _write(self, key: str, result: ProverResult):
        path = self._path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
        os.replace(tmp, path)

    def get(self, problem_text: str, strategy_id: str, time_class):
        res = self._read(cache_key(problem_text, strategy_id, time_class))
        if res is None:
            res = self._read(cache_key(problem_text, strategy_id, ANY_TIME))
        with self._lock:
            if res is None:
                self.misses += 1
            else:
                self.hits += 1
        return res

    def put(self, problem_text: str, strategy_id: str, time_class, result: ProverResult):
        self._write(cache_key(problem_text, strategy_id, time_class), result)
        if result.status in DEFINITIVE:
            self._write(cache_key(problem_text, strategy_id, ANY_TIME), result)

    def get_text(self, problem_text: str, tag: str):
        """Raw text stored under ``(problem_text, tag)``, e.g. a model search result."""
        path = self._path(cache_key(problem_text, tag, ANY_TIME)).replace(".json", ".txt")
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except FileNotFoundError:
            return None

    def put_text(self, problem_text: str, tag: str, text: str):
        path = self._path(cache_key(problem_text, tag, ANY_TIME)).replace(".json", ".txt")
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)

    def entries(self) -> int:
        n = 0
        for _, _, files in os.walk(self.root):
            n += sum(1 for f in files if f.endswith(".json"))
        return n

    def stats(self) -> dict:
        return {"entries": self.entries(), "hits": self.hits, "misses": self.misses}
