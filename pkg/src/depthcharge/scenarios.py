"""Declarative scenarios: load, validate, run, check bounds, serialise.

A scenario file is YAML (see ``docs/scenario_format.md``)::

    name: mtf-pump-repeat
    table: {index_count: 16, hash_seed: 0}
    rb_backend: {kind: ledger}
    attack: {strategy: single_list_flood, params: {index: 0, budget: 528}}
    schedule:
      - attack
      - good_insert: {count: 1, index: 0}
      - rounds: {index: 0, count: 100, pump: {kind: constant, depth: 32}}
    checks: [per_list, global, chain_length]

Runs are deterministic for a given (scenario, seed): identical inputs give
byte-identical summaries.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .accounting import BAD, GOOD, BoundCheck, bound_report
from .adversary import ActionReport, Adversary, AttackPlan, ScriptError, validate_script
from .simulation import TRACE_FIELDS, Simulation, TraceRow
from .table import Status, TableConfig
from .workload import Workload, WorkloadSpec, gen_delete, pick_uar_object

SCHEMA_VERSION = 1

CHECKS = (
    "chain_length",
    "single_insert",
    "single_lookup",
    "adversary_lower",
    "insertion_upper",
    "insertion_total",
    "per_list",
    "global",
    "uar_query_mean",
    "pump_asymmetry",
)
ALWAYS_CHECKED = ("budget", "ledger_exact")
PHASES = ("attack", "adversary", "good_insert", "good_query", "good_delete", "rounds")
PUMP_SCHEDULES = ("constant", "geometric", "front_loaded")


class ScenarioError(ValueError):
    """A scenario failed validation; the message names the offending field."""


@dataclass
class Scenario:
    name: str
    table: TableConfig
    rb_backend: dict[str, Any] = field(default_factory=lambda: {"kind": "ledger"})
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    attack: AttackPlan | None = None
    schedule: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    oracle: bool = False

    @property
    def budget(self) -> int | None:
        return None if self.attack is None else self.attack.budget

    def variant(self, **table_changes) -> "Scenario":
        """Copy with some table settings replaced (e.g. ``move_to_front=False``)."""
        other = copy.deepcopy(self)
        fields = {**self.table.__dict__, **table_changes}
        other.table = TableConfig(**fields)
        return other


# -- loading and validation ---------------------------------------------------


def _require(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise ScenarioError(f"{where}: {msg}")


def _int(value, where: str, minimum: int | None = 0) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), where, f"expected an integer, got {value!r}")
    if minimum is not None:
        _require(value >= minimum, where, f"must be >= {minimum}, got {value}")
    return value


def _index(value, where: str, t: int) -> int:
    _int(value, where)
    _require(value < t, where, f"index {value} out of range [0, {t})")
    return value


def _phase(raw) -> tuple[str, dict]:
    if isinstance(raw, str):
        return raw, {}
    if isinstance(raw, dict) and len(raw) == 1:
        (name, body), = raw.items()
        return name, dict(body or {})
    raise ScenarioError(f"schedule entry {raw!r}: expected a phase name or a one-key mapping")


def _check(raw) -> tuple[str, dict]:
    if isinstance(raw, str):
        return raw, {}
    if isinstance(raw, dict) and len(raw) == 1:
        (name, body), = raw.items()
        return name, dict(body or {})
    raise ScenarioError(f"checks entry {raw!r}: expected a name or a one-key mapping")


def _validate_attack_params(strategy: str, p: dict, where: str, t: int) -> None:
    if strategy in ("single_list_flood", "mtf_depth_pump", "spurious_probe"):
        _index(p.get("index", 0), f"{where}.index", t)
    if "budget" in p and p["budget"] is not None:
        _int(p["budget"], f"{where}.budget")
    if strategy == "even_spread":
        _require("indices" in p and "b" in p, where, "even_spread needs 'indices' and 'b'")
        for k, i in enumerate(p["indices"]):
            _index(i, f"{where}.indices[{k}]", t)
        _int(p["b"], f"{where}.b", minimum=len(set(p["indices"])) or 1)
    if strategy == "mtf_depth_pump":
        _int(p.get("depth"), f"{where}.depth")
    if strategy == "scripted":
        _require(isinstance(p.get("actions"), list), where, "scripted needs an 'actions' list")
        for k, step in enumerate(p["actions"]):
            for fld in ("index",):
                if fld in step:
                    _index(step[fld], f"{where}.actions[{k}].{fld}", t)
        try:
            validate_script(p["actions"])
        except ScriptError as e:
            raise ScenarioError(f"{where}.actions: {e}") from None


def scenario_from_dict(data: dict) -> Scenario:
    _require(isinstance(data, dict), "scenario", "expected a mapping")
    name = data.get("name")
    _require(isinstance(name, str) and name, "name", "a non-empty string is required")
    tdata = data.get("table") or {}
    _require(isinstance(tdata, dict), "table", "expected a mapping")
    t = _int(tdata.get("index_count"), "table.index_count", minimum=1)
    seed = _int(tdata.get("hash_seed", 0), "table.hash_seed")
    _require(seed < 1 << 64, "table.hash_seed", "must fit in 64 bits")
    unknown = set(tdata) - {"index_count", "hash_seed", "move_to_front", "allow_directed"}
    _require(not unknown, "table", f"unknown fields {sorted(unknown)}")
    table = TableConfig(t, seed, bool(tdata.get("allow_directed", True)), bool(tdata.get("move_to_front", True)))

    rbd = dict(data.get("rb_backend") or {"kind": "ledger"})
    _require(rbd.get("kind") in ("ledger", "pow"), "rb_backend.kind", f"expected 'ledger' or 'pow', got {rbd.get('kind')!r}")
    if "unit_work" in rbd:
        _int(rbd["unit_work"], "rb_backend.unit_work", minimum=1)

    wd = dict(data.get("workload") or {})
    for k in ("good_inserts", "queries", "deletes", "rng_seed"):
        if k in wd:
            _int(wd[k], f"workload.{k}")
    try:
        workload = WorkloadSpec(**wd)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"workload: {e}") from None

    attack = None
    if data.get("attack") is not None:
        ad = dict(data["attack"])
        if ad.get("budget") is not None:
            _int(ad["budget"], "attack.budget")
        try:
            attack = AttackPlan(ad.get("strategy"), ad.get("budget"), dict(ad.get("params") or {}))
        except ValueError as e:
            raise ScenarioError(f"attack.strategy: {e}") from None
        _validate_attack_params(attack.strategy, attack.params, "attack.params", t)

    schedule = data.get("schedule")
    if schedule is None:
        schedule = (["attack"] if attack is not None else []) + ["good_insert", "good_query", "good_delete"]
    schedule = list(schedule)
    for k, raw in enumerate(schedule):
        where = f"schedule[{k}]"
        name_, body = _phase(raw)
        _require(name_ in PHASES, where, f"unknown phase {name_!r}; expected one of {PHASES}")
        if "index" in body:
            _index(body["index"], f"{where}.{name_}.index", t)
        if "count" in body and body["count"] not in (None, "auto"):
            _int(body["count"], f"{where}.{name_}.count")
        if name_ == "attack":
            _require(attack is not None, where, "schedule runs 'attack' but no attack plan is given")
        if name_ == "adversary":
            strategy = body.get("strategy")
            try:
                AttackPlan(strategy)
            except ValueError as e:
                raise ScenarioError(f"{where}.adversary.strategy: {e}") from None
            _validate_attack_params(strategy, dict(body.get("params") or {}), f"{where}.adversary.params", t)
        if name_ == "good_query":
            mode = body.get("mode", workload.query_mode)
            _require(mode in ("uar_index", "scripted"), f"{where}.good_query.mode", f"unknown mode {mode!r}")
            if mode == "scripted":
                _require("index" in body, f"{where}.good_query", "scripted queries need an 'index'")
            if "adversary_every" in body:
                _int(body["adversary_every"], f"{where}.good_query.adversary_every", minimum=1)
                _require("adversary" in body, f"{where}.good_query", "'adversary_every' needs an 'adversary' step")
        if name_ == "rounds":
            _require("index" in body, f"{where}.rounds", "needs 'index'")
            _int(body.get("count"), f"{where}.rounds.count")
            pump = body.get("pump") or {}
            _require(pump.get("kind", "constant") in PUMP_SCHEDULES, f"{where}.rounds.pump.kind",
                     f"expected one of {PUMP_SCHEDULES}")
            _int(pump.get("depth"), f"{where}.rounds.pump.depth")

    checks = list(data.get("checks") or [])
    for k, raw in enumerate(checks):
        cname, body = _check(raw)
        _require(cname in CHECKS, f"checks[{k}]", f"unknown check {cname!r}; expected one of {CHECKS}")
        if cname == "uar_query_mean":
            f = body.get("factor")
            _require(isinstance(f, (int, float)) and f > 0, f"checks[{k}].uar_query_mean.factor", "a positive number is required")

    return Scenario(name, table, rbd, workload, attack, schedule, checks, bool(data.get("oracle", False)))


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ScenarioError(f"{path}: not valid YAML ({e})") from None
    return scenario_from_dict(data)


# -- running -------------------------------------------------------------------


def pump_depths(kind: str, depth: int, rounds: int) -> list[int]:
    """Per-round pump depths ``d_r``.

    ``constant``: ``depth`` every round. ``geometric``: 1, 2, 4, ... capped at
    ``depth``. ``front_loaded``: ``depth`` for the first tenth of the rounds
    (at least one), nothing afterwards.
    """
    if kind == "constant":
        return [depth] * rounds
    if kind == "geometric":
        return [min(depth, 1 << min(r, 62)) for r in range(rounds)]
    if kind == "front_loaded":
        k = max(1, rounds // 10)
        return [depth if r < k else 0 for r in range(rounds)]
    raise ValueError(f"unknown pump schedule {kind!r}")


@dataclass
class RunSummary:
    scenario: str
    seed: int
    backend: str
    table: TableConfig
    ledger: Any
    stats: Any
    ops: dict
    adversary: dict
    checks: list[dict]
    wallet: dict | None = None
    trace: list[TraceRow] | None = None

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def check(self, name: str) -> dict:
        for c in self.checks:
            if c["name"] == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        led = self.ledger
        st = self.stats

        def per_index(d) -> dict:
            return {str(i): d[i] for i in sorted(d) if d[i]}

        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "backend": self.backend,
            "passed": self.passed,
            "table": {
                "index_count": self.table.index_count,
                "hash_seed": self.table.hash_seed,
                "move_to_front": self.table.move_to_front,
            },
            "ledger": {
                "algorithm_rb": led.algorithm_rb,
                "algorithm_latency": led.algorithm_latency,
                "algorithm_rb_existing": led.algorithm_rb_existing,
                "adversary_rb": led.adversary_rb,
                "adversary_latency": led.adversary_latency,
                "counts": {
                    "good_inserts": led.good_inserts,
                    "good_queries": led.good_queries,
                    "good_deletes": led.good_deletes,
                    "good_not_found": led.good_not_found,
                    "bad_inserts": led.bad_inserts,
                    "bad_queries": led.bad_queries,
                    "bad_deletes": led.bad_deletes,
                    "bad_not_found": led.bad_not_found,
                    "free_probes": led.free_probes,
                    "settled": led.settled,
                },
                "per_index_adversary_rb": per_index(led.per_index_adversary_rb),
                "per_index_good_insert_rb": per_index(led.per_index_good_insert_rb),
                "per_index_good_lookup_rb": per_index(led.per_index_good_lookup_rb),
                "per_index_good_queries": per_index(led.per_index_good_queries),
            },
            "stats": {
                "ell_max": st.ell_max,
                "ell_ave": st.ell_ave,
                "ell_cumulative_max": st.ell_cumulative_max,
                "targeted_indices": len(st.targeted()),
            },
            "ops": self.ops,
            "adversary": self.adversary,
            "wallet": self.wallet,
            "checks": self.checks,
        }


class _Runner:
    def __init__(self, scenario: Scenario, seed: int, backend: str | None, trace: bool):
        self.sc = scenario
        kind = backend or scenario.rb_backend.get("kind", "ledger")
        self.backend_kind = kind
        self.seed = seed
        self.sim = Simulation(
            scenario.table,
            backend=kind,
            seed=seed,
            oracle=scenario.oracle,
            trace=trace,
            unit_work=scenario.rb_backend.get("unit_work", 256),
        )
        self.adv = Adversary(self.sim, scenario.budget)
        self.work = Workload(self.sim, scenario.workload)
        self.reports: list[ActionReport] = []
        self.uar_cost = 0
        self.uar_count = 0
        self.pumps: list[dict] = []
        self._pending_pump: dict | None = None

    def _good_query(self, key: bytes, uar: bool = False):
        out = self.sim.good_query(key)
        if uar and out.kind is Status.FOUND:
            self.uar_cost += out.rb_charged
            self.uar_count += 1
        if self._pending_pump is not None and out.kind is Status.FOUND:
            self._pending_pump["next_query_cost"] = out.rb_charged
            self.pumps.append(self._pending_pump)
            self._pending_pump = None
        return out

    def _adversary_step(self, strategy: str, params: dict) -> ActionReport:
        if strategy == "mtf_depth_pump":
            index = params.get("index", 0)
            target = self.adv.pump_target(index)
            start = None
            if target is not None:
                start = self.sim.table.bucket_keys(index).index(target) + 1
            rep = self.adv.mtf_depth_pump(index, params["depth"], target)
            if target is not None:
                self._pending_pump = {"depth": params["depth"] - rep.shortfall, "start_depth": start,
                                      "spend": rep.spend, "target": target}
        else:
            rep = self.adv.run(AttackPlan(strategy, None, params))
        self.reports.append(rep)
        return rep

    def _query_count(self, body: dict) -> int:
        count = body.get("count")
        if count is None:
            return self.sc.workload.queries
        if count == "auto":
            # enough queries for the random-index regime: Q >= l_M^2 B, capped
            b = self.sc.budget or 0
            return max(10_000, min(self.sim.stats.ell_max ** 2 * b, 1_000_000))
        return count

    def _pick_scripted(self, index: int, pick: str) -> bytes:
        keys = [k for k in self.sim.table.bucket_keys(index) if k in self.sim.good_keys]
        if not keys:
            raise ScenarioError(f"no good object at index {index} to query")
        if pick == "shallowest":
            return keys[0]
        if pick == "deepest":
            return keys[-1]
        return self.sim.good_by_index[index][-1]

    def phase(self, name: str, body: dict) -> None:
        sim = self.sim
        if name == "attack":
            plan = self.sc.attack
            params = {**plan.params, **body}
            self._adversary_step(plan.strategy, params)
        elif name == "adversary":
            self._adversary_step(body["strategy"], dict(body.get("params") or {}))
        elif name == "good_insert":
            count = body.get("count")
            self.work.inserts(None if count is None else count, body.get("index"))
        elif name == "good_query":
            mode = body.get("mode", self.sc.workload.query_mode)
            n = self._query_count(body)
            every = body.get("adversary_every")
            for k in range(n):
                if every and k % every == 0 and (self.adv.remaining is None or self.adv.remaining > 0):
                    step = body["adversary"]
                    self._adversary_step(step["strategy"], dict(step.get("params") or {}))
                if mode == "uar_index":
                    self._good_query(pick_uar_object(sim), uar=True)
                else:
                    self._good_query(self._pick_scripted(body["index"], body.get("pick", "deepest")))
        elif name == "good_delete":
            count = body.get("count")
            n = self.sc.workload.deletes if count is None else count
            for _ in range(n):
                gen_delete(sim)
        elif name == "rounds":
            index = body["index"]
            pump = body.get("pump") or {}
            for d_r in pump_depths(pump.get("kind", "constant"), pump["depth"], body["count"]):
                target = self.adv.pump_target(index)
                if target is None:
                    raise ScenarioError(f"rounds: no good object at index {index}")
                self._adversary_step("mtf_depth_pump", {"index": index, "depth": d_r})
                self._good_query(target)

    def run(self) -> RunSummary:
        for raw in self.sc.schedule:
            name, body = _phase(raw)
            self.phase(name, body)
        return self.summarise()

    def summarise(self) -> RunSummary:
        sim = self.sim
        led = sim.ledger
        checks: list[dict] = []
        report = bound_report(led, sim.stats, sim.max_bucket_length)

        def add(c: BoundCheck) -> None:
            checks.append({
                "name": c.name,
                "bound": c.bound,
                "measured": c.measured,
                "applicable": c.applicable,
                "pass": c.satisfied,
                "detail": c.detail,
            })

        budget = self.sc.budget
        add(BoundCheck("budget", math.inf if budget is None else budget, self.adv.spent, applicable=budget is not None))
        spent = sim.rb.spent
        exact = (spent[GOOD] == led.algorithm_rb and spent[BAD] == led.adversary_rb == self.adv.spent)
        add(BoundCheck("ledger_exact", 0, 0 if exact else 1,
                       detail=f"backend good={spent[GOOD]} bad={spent[BAD]}; ledger good={led.algorithm_rb} bad={led.adversary_rb}"))
        for raw in self.sc.checks:
            cname, body = _check(raw)
            if cname in report:
                add(report[cname])
            elif cname == "uar_query_mean":
                mean = self.uar_cost / self.uar_count if self.uar_count else 0.0
                factor = body["factor"]
                q_ok = self.uar_count >= sim.stats.ell_max ** 2 * led.adversary_rb
                add(BoundCheck("uar_query_mean", factor * sim.stats.ell_ave, mean, applicable=self.uar_count > 0,
                               detail=f"Q={self.uar_count} factor={factor} Q>=l_M^2*B: {q_ok}"))
            elif cname == "pump_asymmetry":
                ok = bool(self.pumps)
                worst = ""
                for p in self.pumps:
                    d, s0 = p["depth"], p["start_depth"]
                    want_spend = d * s0 + d * (d + 1) // 2
                    if p["spend"] != want_spend or p.get("next_query_cost") != s0 + d:
                        ok = False
                        worst = f"d={d} spend={p['spend']} expected {want_spend}"
                add(BoundCheck("pump_asymmetry", 0, 0 if ok else 1, applicable=True,
                               detail=worst or f"{len(self.pumps)} pumps match d*s0 + d(d+1)/2"))
        ops = sim.table.ops
        wallet = None
        if sim.oracle is not None:
            wallet = {"checks": sim.oracle.checks, "violations": len(sim.oracle.violations),
                      "deposited": sim.oracle.deposited}
        return RunSummary(
            scenario=self.sc.name,
            seed=self.seed,
            backend=self.backend_kind,
            table=self.sc.table,
            ledger=led,
            stats=sim.stats,
            ops={
                "quotes": ops.quotes,
                "quote_traversal": ops.quote_traversal,
                "free_probes": ops.free_probes,
                "rejected": ops.rejected,
                "abandoned_quotes": sim.abandoned_quotes,
                "redraws": sim.redraws,
                "max_bucket_length": sim.max_bucket_length,
                "challenges_issued": sim.rb.issued,
                "challenges_rejected": sim.rb.rejected,
                "pow_hash_evaluations": dict(sorted(getattr(sim.rb, "work", {}).items())),
                "pow_verify_evaluations": getattr(sim.rb, "verify_evaluations", 0),
            },
            adversary={
                "budget": budget,
                "spent": self.adv.spent,
                "actions": [
                    {"strategy": r.strategy, "requests": r.requests, "spend": r.spend,
                     "placed": r.placed, "shortfall": r.shortfall}
                    for r in self.reports
                ],
            },
            checks=checks,
            wallet=wallet,
            trace=sim.trace,
        )


def run(scenario: Scenario, seed: int | None = None, backend: str | None = None, trace: bool = False) -> RunSummary:
    """Execute ``scenario`` and evaluate its checks."""
    if seed is None:
        seed = scenario.workload.rng_seed
    return _Runner(scenario, seed, backend, trace).run()


# -- serialisation -------------------------------------------------------------


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list):
        for k, v in enumerate(value):
            _flatten(f"{prefix}[{k}]", v, rows)
    else:
        rows.append((prefix, "" if value is None else value))


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def report(summary: RunSummary, format: str = "structured") -> str:
    """Serialise a summary; ``structured`` is JSON, ``csv`` is key,value rows."""
    data = _finite(summary.to_dict())
    if format == "structured":
        return json.dumps(data, indent=2) + "\n"
    if format == "csv":
        rows: list = []
        _flatten("", data, rows)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("field", "value"))
        w.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


def trace_csv(summary: RunSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    for row in summary.trace or ():
        w.writerow(["" if v is None else v for v in row.as_tuple()])
    return buf.getvalue()


def write_report(summary: RunSummary, path: str | Path, format: str = "structured") -> None:
    Path(path).write_text(report(summary, format))


# -- builtins ------------------------------------------------------------------


def _flood_cost(b: int, start: int = 0) -> int:
    return sum(start + j for j in range(1, b + 1))


BUILTINS: dict[str, dict] = {
    "single-list-flood": {
        "name": "single-list-flood",
        "table": {"index_count": 1024},
        "attack": {"strategy": "single_list_flood", "budget": 1_000_000, "params": {"index": 0}},
        "schedule": [
            "attack",
            {"good_insert": {"count": 1, "index": 0}},
            {"good_query": {"count": 1, "mode": "scripted", "index": 0}},
        ],
        "checks": ["chain_length", "single_insert", "single_lookup", "insertion_total", "per_list", "global"],
    },
    "no-attack": {
        "name": "no-attack",
        "table": {"index_count": 256},
        "workload": {"good_inserts": 256, "queries": 2560, "query_mode": "uar_index"},
        "schedule": ["good_insert", "good_query"],
        "checks": [{"uar_query_mean": {"factor": 3}}, "chain_length", "insertion_total", "per_list", "global"],
    },
    "mtf-pump-repeat": {
        "name": "mtf-pump-repeat",
        "table": {"index_count": 16},
        "attack": {"strategy": "single_list_flood", "params": {"index": 0, "budget": _flood_cost(32)}},
        "schedule": [
            "attack",
            {"good_insert": {"count": 1, "index": 0}},
            {"rounds": {"index": 0, "count": 100, "pump": {"kind": "constant", "depth": 32}}},
        ],
        "checks": ["per_list", "global", "chain_length", "single_lookup"],
    },
    "even-spread": {
        "name": "even-spread",
        "table": {"index_count": 64},
        "attack": {"strategy": "even_spread", "params": {"indices": list(range(8)), "b": 64}},
        "schedule": ["attack"] + [{"good_insert": {"count": 4, "index": i}} for i in range(8)],
        "checks": ["adversary_lower", "insertion_upper", "insertion_total", "chain_length", "global"],
    },
    "depth-pump": {
        "name": "depth-pump",
        "table": {"index_count": 8},
        "attack": {"strategy": "single_list_flood", "params": {"index": 0, "budget": _flood_cost(64, 1)}},
        "schedule": [
            {"good_insert": {"count": 1, "index": 0}},
            "attack",
            {"adversary": {"strategy": "mtf_depth_pump", "params": {"index": 0, "depth": 64}}},
            {"good_query": {"count": 1, "mode": "scripted", "index": 0}},
        ],
        "checks": ["pump_asymmetry", "per_list", "chain_length", "global"],
    },
    "random-queries": {
        "name": "random-queries",
        "table": {"index_count": 256},
        "workload": {"good_inserts": 256, "query_mode": "uar_index"},
        "attack": {"strategy": "single_list_flood", "budget": 1000, "params": {"index": 0, "budget": 500}},
        "schedule": [
            "attack",
            "good_insert",
            {"good_query": {"count": "auto", "mode": "uar_index", "adversary_every": 50,
                            "adversary": {"strategy": "mtf_depth_pump", "params": {"index": 0, "depth": 4}}}},
        ],
        "checks": [{"uar_query_mean": {"factor": 3}}, "chain_length", "per_list", "global"],
    },
    "spurious-probe": {
        "name": "spurious-probe",
        "table": {"index_count": 16},
        "attack": {"strategy": "scripted", "params": {"actions": [
            {"op": "flood", "index": 3, "budget": 10},
            {"op": "probe", "index": 3, "budget": 12},
            {"op": "probe", "index": 5, "max_probes": 4},
        ]}},
        "workload": {"good_inserts": 64, "queries": 256},
        "schedule": ["good_insert", "attack", "good_query"],
        "checks": ["chain_length", "single_lookup", "per_list", "global"],
    },
}


def builtin(name: str) -> Scenario:
    try:
        data = BUILTINS[name]
    except KeyError:
        raise ScenarioError(f"unknown builtin scenario {name!r}; available: {sorted(BUILTINS)}") from None
    return scenario_from_dict(copy.deepcopy(data))


def resolve(ref: str) -> Scenario:
    """A builtin name or a path to a scenario file."""
    if ref in BUILTINS:
        return builtin(ref)
    p = Path(ref)
    if p.exists():
        return load_scenario(p)
    raise ScenarioError(f"{ref!r} is neither a builtin scenario nor an existing file")
