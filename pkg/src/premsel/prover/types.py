from __future__ import annotations

import json
from dataclasses import dataclass, field

THEOREM = "Theorem"
COUNTER_SATISFIABLE = "CounterSatisfiable"
SATISFIABLE = "Satisfiable"
RESOURCE_OUT = "ResourceOut"
GAVE_UP = "GaveUp"
ERROR = "Error"
STATUSES = (THEOREM, COUNTER_SATISFIABLE, SATISFIABLE, RESOURCE_OUT, GAVE_UP, ERROR)
# statuses that do not depend on the time limit of the attempt
DEFINITIVE = (THEOREM, COUNTER_SATISFIABLE, SATISFIABLE)


@dataclass
class ProverResult:
    status: str
    used_premises: frozenset = frozenset()
    cpu_millis: int = 0
    proof_steps: int = 0
    proof: list | None = field(default=None, compare=False, repr=False)
    output: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown SZS status {self.status!r}")
        self.used_premises = frozenset(self.used_premises)

    def to_json(self) -> str:
        return json.dumps({"status": self.status, "used_premises": sorted(self.used_premises),
                           "cpu_millis": self.cpu_millis, "proof_steps": self.proof_steps},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProverResult":
        d = json.loads(text)
        return cls(d["status"], frozenset(d["used_premises"]), int(d["cpu_millis"]),
                   int(d["proof_steps"]))


@dataclass(frozen=True)
class StrategySpec:
    """A named prover configuration.

    Builtin strategies tune the given-clause loop; external ones carry a
    command template with ``{file}`` and ``{time}`` (seconds) placeholders.
    ``given_rate`` converts a time limit into a deterministic budget of
    given-clause iterations, so results do not depend on machine load.
    """

    id: str = "default"
    kind: str = "builtin"
    age_ratio: int = 1
    weight_ratio: int = 5
    symbol_weight: int = 2
    max_clauses: int = 50_000
    max_seconds: float | None = None
    given_rate: int = 300
    equality_axioms: bool = True
    command: str = ""

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ValueError(f"strategy kind must be builtin or external, not {self.kind!r}")
        if self.kind == "external" and not self.command:
            raise ValueError(f"external strategy {self.id!r} needs a command")


def load_portfolio(text: str) -> dict:
    """Parse a strategy portfolio: one ``id key=value ...`` line per strategy."""
    import shlex

    out = {}
    ints = {"age_ratio", "weight_ratio", "symbol_weight", "max_clauses", "given_rate"}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sid, *pairs = shlex.split(line)
        kwargs: dict = {"id": sid}
        for pair in pairs:
            key, _, value = pair.partition("=")
            if key in ints:
                kwargs[key] = int(value)
            elif key == "max_seconds":
                kwargs[key] = float(value)
            elif key == "equality_axioms":
                kwargs[key] = value.lower() in ("1", "true", "yes")
            elif key in ("kind", "command"):
                kwargs[key] = value
            else:
                raise ValueError(f"unknown strategy option {key!r} for {sid!r}")
        if sid in out:
            raise ValueError(f"duplicate strategy id {sid!r}")
        out[sid] = StrategySpec(**kwargs)
    return out
