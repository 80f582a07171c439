"""Attack strategies.

Each strategy spends through the simulation's RB backend like any other
requester and is metered against an optional total budget. Strategies read
the table freely before acting: the adversary knows the full configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .accounting import BAD
from .simulation import Simulation
from .table import RequestOutcome, Status, directed_key

STRATEGIES = ("single_list_flood", "even_spread", "mtf_depth_pump", "spurious_probe", "scripted")


class ScriptError(ValueError):
    pass


@dataclass
class AttackPlan:
    strategy: str
    budget: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")


@dataclass
class ActionReport:
    strategy: str
    requests: int = 0
    spend: int = 0
    placed: int = 0
    shortfall: int = 0
    costs: list[int] = field(default_factory=list)

    def merge(self, other: "ActionReport") -> "ActionReport":
        self.requests += other.requests
        self.spend += other.spend
        self.placed += other.placed
        self.shortfall += other.shortfall
        self.costs.extend(other.costs)
        return self


class Adversary:
    def __init__(self, sim: Simulation, budget: int | None = None):
        self.sim = sim
        self.budget = budget
        self.spent = 0
        self._serial = 0
        self.keys: set[bytes] = set()

    @property
    def remaining(self) -> int | None:
        return None if self.budget is None else self.budget - self.spent

    def _cap(self, local: int | None) -> int | None:
        rem = self.remaining
        if rem is None:
            return local
        return rem if local is None else min(rem, local)

    def new_key(self, index: int) -> bytes:
        self._serial += 1
        return directed_key(index, self._serial)

    def _act(self, op: str, key: bytes, index: int | None, report: ActionReport,
             local_cap: int | None = None) -> RequestOutcome | None:
        cap = self._cap(local_cap)
        out = self.sim.request(BAD, op, key, index, max_hardness=cap)
        if out is None:
            return None
        self.spent += out.rb_charged
        report.requests += 1
        report.spend += out.rb_charged
        report.costs.append(out.rb_charged)
        if out.kind is Status.INSERTED:
            self.keys.add(key)
            report.placed += 1
        elif out.kind is Status.DELETED:
            self.keys.discard(key)
        return out

    # single actions

    def bad_insert(self, index: int) -> RequestOutcome | None:
        return self._act("insert", self.new_key(index), index, ActionReport("insert"))

    def bad_query(self, key: bytes) -> RequestOutcome | None:
        return self._act("query", key, None, ActionReport("query"))

    def bad_delete(self, key: bytes) -> RequestOutcome | None:
        if self.sim.is_good(key):
            raise ScriptError("the adversary may not delete good objects")
        return self._act("delete", key, None, ActionReport("delete"))

    # strategies

    def single_list_flood(self, index: int, budget: int | None = None) -> ActionReport:
        """Insert bad objects at ``index`` until the next quote is unaffordable."""
        report = ActionReport("single_list_flood")
        if self.budget is None and budget is None:
            raise ValueError("an unbounded flood needs a budget")
        while True:
            local = None if budget is None else budget - report.spend
            if self._act("insert", self.new_key(index), index, report, local) is None:
                break
        return report

    def even_spread(self, indices: Iterable[int], b: int) -> ActionReport:
        """Place ``b`` bad objects round-robin over ``indices``."""
        indices = list(dict.fromkeys(indices))
        s = len(indices)
        if s < 1 or b < s:
            raise ValueError(f"even_spread needs b >= s >= 1, got b={b}, s={s}")
        report = ActionReport("even_spread")
        for k in range(b):
            index = indices[k % s]
            if self._act("insert", self.new_key(index), index, report) is None:
                report.shortfall = b - k
                break
        return report

    def pump_target(self, index: int) -> bytes | None:
        """The shallowest good object at ``index``."""
        good = self.sim.good_keys
        for k in self.sim.table.bucket_keys(index):
            if k in good:
                return k
        return None

    def mtf_depth_pump(self, index: int, d: int, target: bytes | None = None) -> ActionReport:
        """Push one good object ``d`` levels deeper with ``d`` bad queries.

        Each query hits the shallowest bad object below the target, the
        cheapest move that still displaces it.
        """
        report = ActionReport("mtf_depth_pump")
        if d <= 0:
            return report
        if target is None:
            target = self.pump_target(index)
        if target is None:
            report.shortfall = d
            return report
        good = self.sim.good_keys
        for done in range(d):
            keys = self.sim.table.bucket_keys(index)
            try:
                pos = keys.index(target)
            except ValueError:
                report.shortfall = d - done
                break
            victim = next((k for k in keys[pos + 1:] if k not in good), None)
            if victim is None or self._act("query", victim, None, report) is None:
                report.shortfall = d - done
                break
        return report

    def spurious_probe(self, index: int, budget: int | None = None, key: bytes | None = None,
                       max_probes: int | None = None) -> ActionReport:
        """Repeated misses at ``index``; each costs the bucket length.

        On an empty bucket a miss needs no challenge, so a single free probe
        is made and the strategy stops.
        """
        report = ActionReport("spurious_probe")
        if key is None:
            key = self.new_key(index)
        if key in self.sim.table:
            raise ValueError("probe key must be absent")
        if self.budget is None and budget is None and max_probes is None:
            raise ValueError("an unbounded probe needs a budget or max_probes")
        while max_probes is None or report.requests < max_probes:
            local = None if budget is None else budget - report.spend
            out = self._act("query", key, None, report, local)
            if out is None or out.rb_charged == 0:
                break
        return report

    def scripted(self, actions: list[dict]) -> ActionReport:
        """Replay an explicit interleaving of adversary and client requests.

        Objects are referred to by ``name``. Good objects are created by
        ``good_insert`` steps; a ``delete`` naming one is rejected before any
        step runs.
        """
        validate_script(actions, self.sim.good_keys)
        names: dict[str, bytes] = {}
        report = ActionReport("scripted")
        sim = self.sim
        for step in actions:
            op = step["op"]
            if op == "insert":
                index = step["index"]
                key = self.new_key(index)
                if self._act("insert", key, index, report) is not None and "name" in step:
                    names[step["name"]] = key
            elif op in ("query", "delete"):
                key = names[step["name"]] if "name" in step else step["key"]
                self._act(op, key, None, report)
            elif op == "flood":
                report.merge(self.single_list_flood(step["index"], step.get("budget")))
            elif op == "even_spread":
                report.merge(self.even_spread(step["indices"], step["b"]))
            elif op == "pump":
                target = names.get(step["target"]) if "target" in step else None
                report.merge(self.mtf_depth_pump(step["index"], step["depth"], target))
            elif op == "probe":
                report.merge(self.spurious_probe(step["index"], step.get("budget"),
                                                 max_probes=step.get("max_probes")))
            elif op == "good_insert":
                if "index" in step:
                    sim.good_insert_at(step["index"])
                    key = sim.good_by_index[step["index"]][-1]
                else:
                    key = sim.fresh_good_key()
                    sim.good_insert(key)
                names[step["name"]] = key
            elif op == "good_query":
                sim.good_query(names[step["name"]])
            elif op == "good_delete":
                sim.good_delete(names[step["name"]])
        return report

    def run(self, plan: AttackPlan) -> ActionReport:
        p = plan.params
        if plan.strategy == "single_list_flood":
            return self.single_list_flood(p.get("index", 0), p.get("budget"))
        if plan.strategy == "even_spread":
            return self.even_spread(p["indices"], p["b"])
        if plan.strategy == "mtf_depth_pump":
            return self.mtf_depth_pump(p.get("index", 0), p["depth"])
        if plan.strategy == "spurious_probe":
            return self.spurious_probe(p.get("index", 0), p.get("budget"), max_probes=p.get("max_probes"))
        return self.scripted(p["actions"])


_SCRIPT_OPS = {
    "insert": ("index",),
    "query": (),
    "delete": (),
    "flood": ("index",),
    "even_spread": ("indices", "b"),
    "pump": ("index", "depth"),
    "probe": ("index",),
    "good_insert": ("name",),
    "good_query": ("name",),
    "good_delete": ("name",),
}


def validate_script(actions: list[dict], good_keys: set[bytes] = frozenset()) -> None:
    good_names: set[str] = set()
    bad_names: set[str] = set()
    for n, step in enumerate(actions):
        op = step.get("op")
        if op not in _SCRIPT_OPS:
            raise ScriptError(f"step {n}: unknown op {op!r}")
        for f in _SCRIPT_OPS[op]:
            if f not in step:
                raise ScriptError(f"step {n}: {op} needs field {f!r}")
        if op == "insert" and "name" in step:
            bad_names.add(step["name"])
        elif op == "good_insert":
            good_names.add(step["name"])
        elif op in ("query", "delete"):
            if "name" not in step and "key" not in step:
                raise ScriptError(f"step {n}: {op} needs 'name' or 'key'")
            name = step.get("name")
            if name is not None and name not in good_names | bad_names:
                raise ScriptError(f"step {n}: unknown object {name!r}")
            if op == "delete" and (name in good_names or step.get("key") in good_keys):
                raise ScriptError(f"step {n}: the adversary may not delete good objects")
        elif op in ("good_query", "good_delete") and step["name"] not in good_names:
            raise ScriptError(f"step {n}: unknown good object {step['name']!r}")
        elif op == "pump" and "target" in step and step["target"] not in good_names:
            raise ScriptError(f"step {n}: pump target must be a good object")


__all__ = [
    "AttackPlan",
    "ActionReport",
    "Adversary",
    "ScriptError",
    "STRATEGIES",
    "validate_script",
]
