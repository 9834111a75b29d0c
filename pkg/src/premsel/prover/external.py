"""Running an external ATP through the SZS output conventions."""

from __future__ import annotations

import logging
import os
import re
import shlex
import signal
import subprocess
import tempfile
import time

from ..tptp import Problem, print_tptp
from .types import (COUNTER_SATISFIABLE, ERROR, GAVE_UP, RESOURCE_OUT, SATISFIABLE,
                    THEOREM, ProverResult, StrategySpec)

log = logging.getLogger(__name__)

GRACE_MILLIS = 500

_STATUS_RE = re.compile(r"SZS status\s+(\w+)")
_FILE_RE = re.compile(r"file\(\s*(?:'[^']*'|[^,()]+)\s*,\s*('[^']*'|[A-Za-z0-9_$]+)\s*\)")
_FOF_RE = re.compile(r"\b(?:fof|cnf)\(\s*('[^']*'|[A-Za-z0-9_]+)\s*,\s*"
                     r"(axiom|hypothesis|definition|lemma|theorem|assumption)\b")
_SZS_MAP = {
    "Theorem": THEOREM, "Unsatisfiable": THEOREM, "ContradictoryAxioms": THEOREM,
    "CounterSatisfiable": COUNTER_SATISFIABLE, "Satisfiable": SATISFIABLE,
    "ResourceOut": RESOURCE_OUT, "Timeout": RESOURCE_OUT, "MemoryOut": RESOURCE_OUT,
    "GaveUp": GAVE_UP, "Unknown": GAVE_UP, "Inappropriate": GAVE_UP,
    "Error": ERROR, "OSError": ERROR, "InputError": ERROR, "SyntaxError": ERROR,
}


class ProverSpawnError(OSError):
    pass


def parse_szs_output(output: str, premise_names) -> tuple:
    """Return ``(status, used_premises)`` recovered from prover output.

    Used premises are the problem premises mentioned as ``file(_, name)``
    sources or as input ``fof(name, axiom, ...)`` lines.  A Theorem with no
    recognizable premise mention conservatively uses all premises.
    """
    statuses = _STATUS_RE.findall(output)
    if not statuses:
        return ERROR, frozenset()
    status = _SZS_MAP.get(statuses[-1])
    if status is None:
        return ERROR, frozenset()
    if status != THEOREM:
        return status, frozenset()
    names = set(premise_names)
    mentioned = set()
    for m in _FILE_RE.finditer(output):
        mentioned.add(m.group(1))
    for m in _FOF_RE.finditer(output):
        mentioned.add(m.group(1))
    used = frozenset(mentioned & names)
    return THEOREM, used or frozenset(names)


def _kill_group(proc: subprocess.Popen):
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass


def external_prove(p: Problem, s: StrategySpec, limit_millis: int) -> ProverResult:
    """Write ``p`` to a temporary TPTP file and run the strategy's command on it.

    The process runs in its own session; the whole process group is killed
    when the wall clock passes the limit plus a grace period.
    """
    if s.kind != "external":
        raise ValueError("external_prove needs an external strategy")
    fd, path = tempfile.mkstemp(suffix=".p", prefix="premsel-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(print_tptp(p))
        seconds = max(1, (limit_millis + 999) // 1000)
        argv = [a.replace("{file}", path).replace("{time}", str(seconds))
                for a in shlex.split(s.command)]
        start = time.perf_counter()
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                                    stdin=subprocess.DEVNULL, start_new_session=True, text=True)
        except OSError as exc:
            raise ProverSpawnError(f"cannot start {argv[0]!r}: {exc.strerror}") from exc
        try:
            out, _ = proc.communicate(timeout=(limit_millis + GRACE_MILLIS) / 1000)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            out, _ = proc.communicate()
            millis = int((time.perf_counter() - start) * 1000)
            return ProverResult(RESOURCE_OUT, frozenset(), millis, 0, output=out or "")
        finally:
            # children that outlived the leader still belong to its group
            _kill_group(proc)
        millis = int((time.perf_counter() - start) * 1000)
        status, used = parse_szs_output(out, p.premise_names)
        if status == ERROR:
            log.warning("prover %s produced unusable output (exit %s)", s.id, proc.returncode)
        return ProverResult(status, used, millis, 0, output=out)
    finally:
        os.unlink(path)
