"""The ten acceptance criteria, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line (also collected into the
terminal summary).
"""
from __future__ import annotations

import contextlib
import copy
import itertools
import math
import random
import time

import numpy as np
import pytest
from scipy import stats as sstats

import conftest
from campaign import run_sequence, sequence_length
from depthcharge import scenarios
from depthcharge.accounting import BAD, GOOD, adversary_lower_bound, max_flood_objects
from depthcharge.adversary import Adversary
from depthcharge.rb import PowBackend
from depthcharge.simulation import Simulation
from depthcharge.table import DepthChargeTable, RequestRejected, TableConfig, directed_key
from oracles import (
    RefTable,
    greedy_flood_count,
    min_placement_cost,
    mtf_query_mean,
    placement_costs,
)


@contextlib.contextmanager
def criterion(n: int, title: str):
    start = time.perf_counter()
    info: dict = {}
    try:
        yield info
    except BaseException as e:
        line = f"FAIL criterion {n}: {title} ({type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''})"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    took = time.perf_counter() - start
    extra = f"; {info['detail']}" if "detail" in info else ""
    line = f"PASS criterion {n}: {title} [{took:.2f}s{extra}]"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_chain_length():
    with criterion(1, "single-list flood: b(b+1)/2 <= B and b < sqrt(2B)") as info:
        start = time.perf_counter()
        got = {}
        for budget in (10**2, 10**4, 10**6):
            sim = Simulation(TableConfig(16))
            rep = Adversary(sim, budget).single_list_flood(3)
            b = sim.table.length(3)
            assert b == rep.placed == greedy_flood_count(budget)
            assert b * (b + 1) // 2 <= budget
            assert b < math.sqrt(2 * budget)
            assert sim.ledger.adversary_rb == b * (b + 1) // 2
            got[budget] = b
        assert got[10**6] == 1413
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"
        info["detail"] = f"b={got}"


def test_criterion_2_adversary_lower_bound():
    with criterion(2, "exhaustive placements: min cost >= b^2/(8s), even spread attains it"):
        start = time.perf_counter()
        for s in range(1, 4):
            for b in range(s, 9):
                best = min_placement_cost(b, s)
                assert best >= adversary_lower_bound(b, s)
                sim = Simulation(TableConfig(s))
                rep = Adversary(sim).even_spread(range(s), b)
                assert rep.spend == sim.ledger.adversary_rb == best, (b, s, rep.spend, best)
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_3_insertion_upper_bound():
    grid = [(1, 1, 1), (1, 64, 8), (2, 7, 3), (4, 100, 2), (8, 512, 8), (16, 16, 4), (32, 1000, 5), (64, 4096, 8)]
    with criterion(3, "even_spread + l_M good inserts: targeted insert cost <= s*l^2 + b*l") as info:
        start = time.perf_counter()
        worst = 0.0
        for seed in range(20):
            for s, b, ell in grid:
                sim = Simulation(TableConfig(s), seed=seed)
                Adversary(sim).even_spread(range(s), b)
                for i in range(s):
                    for _ in range(ell):
                        sim.good_insert_at(i)
                assert sim.stats.ell_max == ell
                chk = scenarios.bound_report(sim.ledger, sim.stats, sim.max_bucket_length)["insertion_upper"]
                assert chk.applicable and chk.satisfied, chk
                assert chk.bound == s * ell * ell + b * ell
                worst = max(worst, chk.measured / chk.bound)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"
        info["detail"] = f"max measured/bound={worst:.3f}"


def test_criterion_4_wallet_invariant():
    with criterion(4, "10^4 mixed sequences: zero wallet < depth violations") as info:
        start = time.perf_counter()
        sequences = requests = checks = violations = 0
        for seed in range(100):
            rng = random.Random(seed)
            for k in range(100):
                length = 1000 if k == 0 else sequence_length(rng)
                sim = run_sequence(seed * 1000 + k, length)
                sequences += 1
                requests += sim.ledger.settled
                checks += sim.oracle.checks
                violations += len(sim.oracle.violations)
        elapsed = time.perf_counter() - start
        assert sequences == 10**4
        assert violations == 0
        assert checks == requests
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
        info["detail"] = f"{requests} requests checked"


def _pump_variant(q: int, kind: str, mtf: bool = True) -> scenarios.Scenario:
    data = copy.deepcopy(scenarios.BUILTINS["mtf-pump-repeat"])
    data["schedule"][2]["rounds"].update(count=q, pump={"kind": kind, "depth": 32})
    data["table"]["move_to_front"] = mtf
    return scenarios.scenario_from_dict(data)


def test_criterion_5_per_list_bound():
    with criterion(5, "mtf-pump-repeat per-list bound; MTF-disabled control fails") as info:
        for q in (10, 100):
            for kind in scenarios.PUMP_SCHEDULES:
                summary = scenarios.run(_pump_variant(q, kind), seed=0)
                c = summary.check("per_list")
                led = summary.ledger
                # exact-constant form recomputed here from the raw ledger
                a_ins = led.per_index_good_insert_rb[0]
                b0 = led.per_index_adversary_rb[0]
                bound = a_ins + 1 * (q + math.sqrt(2 * q * b0))
                assert summary.stats.ell(0) == 1
                assert led.per_index_good_queries[0] == q
                assert c["pass"] and math.isclose(c["bound"], bound)
                assert led.per_index_good_lookup_rb[0] <= bound
        control = scenarios.run(_pump_variant(100, "constant", mtf=False), seed=0)
        c = control.check("per_list")
        assert not c["pass"], "the check must fail with move-to-front disabled"
        info["detail"] = f"control measured={c['measured']} > bound={c['bound']:.1f}"


def test_criterion_6_depth_pump_asymmetry():
    with criterion(6, "depth pump: spend d(d+3)/2, next good query d+1, d in 1..64"):
        for d in range(1, 65):
            sim = Simulation(TableConfig(1))
            sim.good_insert()
            g = next(iter(sim.good_keys))
            adv = Adversary(sim)
            for _ in range(d):
                adv.bad_insert(0)
            rep = adv.mtf_depth_pump(0, d, g)
            assert rep.shortfall == 0
            assert rep.spend == d * (d + 3) // 2
            assert sim.ledger.adversary_rb == sum(range(2, d + 2)) + rep.spend
            out = sim.good_query(g)
            assert out.rb_charged == out.latency == d + 1


def _uar_run(seed: int, budget: int):
    t = 256
    data = {
        "name": "uar",
        "table": {"index_count": t, "hash_seed": seed},
        "workload": {"good_inserts": t, "query_mode": "uar_index"},
        "schedule": ["good_insert", {"good_query": {"count": "auto", "mode": "uar_index"}}],
        "checks": [{"uar_query_mean": {"factor": 3}}],
    }
    if budget:
        data["attack"] = {"strategy": "single_list_flood", "budget": budget, "params": {"index": 0, "budget": budget // 2}}
        data["schedule"] = [
            "attack",
            "good_insert",
            {"good_query": {"count": "auto", "mode": "uar_index", "adversary_every": 50,
                            "adversary": {"strategy": "mtf_depth_pump", "params": {"index": 0, "depth": 4}}}},
        ]
    return scenarios.run(scenarios.scenario_from_dict(data), seed=seed)


def test_criterion_7_random_query_regime():
    with criterion(7, "u.a.r. queries: mean <= 1.25 x independent MTF Monte-Carlo mean") as info:
        worst = 0.0
        for budget in (0, 1000):
            for seed in range(20):
                summary = _uar_run(seed, budget)
                led = summary.ledger
                ell_m = summary.stats.ell_max
                q_expected = max(10_000, min(ell_m**2 * budget, 10**6))
                assert led.good_queries == q_expected
                counts = [summary.stats.ell(i) for i in range(256)]
                oracle = mtf_query_mean(counts, q_expected, seed=10_000 + seed)
                k = oracle / summary.stats.ell_ave
                measured = summary.check("uar_query_mean")["measured"]
                assert measured <= 1.25 * k * summary.stats.ell_ave, (budget, seed, measured, oracle)
                worst = max(worst, measured / oracle)
        info["detail"] = f"max measured/oracle={worst:.3f}"


def test_criterion_8_pow_linearity():
    with criterion(8, "PoW: slope of mean work vs hardness within 20% of 256") as info:
        start = time.perf_counter()
        xs = (1, 4, 16, 64)
        means = []
        for x in xs:
            rb = PowBackend(unit_work=256, seed=x)
            for _ in range(1000):
                rb.solve(rb.issue(x, ("calibrate",)), "p")
            means.append(rb.work["p"] / 1000)
        fit = sstats.linregress(xs, means)
        elapsed = time.perf_counter() - start
        assert abs(fit.slope - 256) <= 0.2 * 256, fit
        assert elapsed < 30.0, f"took {elapsed:.1f}s"
        info["detail"] = f"slope={fit.slope:.1f} means={[round(m, 1) for m in means]}"


# -- criterion 9 --------------------------------------------------------------

_KEYS = (b"k0", b"k1", b"k2")
_OPS = ("insert", "query", "delete")


def _key_layouts():
    """(t, keys): t=1; t=2 with every directed 3-key layout; t=2 hashed keys."""
    yield 1, _KEYS
    for layout in itertools.product(range(2), repeat=3):
        yield 2, tuple(directed_key(i, k) for i, k in zip(layout, _KEYS))
    yield 2, _KEYS


def _step(table: DepthChargeTable, ref: RefTable, op: str, key: bytes):
    """Apply one request to both; returns (impl, ref) outcome tuples."""
    if op == "insert":
        want = ref.insert(key)
        try:
            ch = table.request_insert(key)
        except RequestRejected:
            return None, want
        out = table.insert(key, table.index_of(key), table.rb.solve(ch, GOOD))
    else:
        ch = table.request_query(key, op)
        proof = table.rb.solve(ch, GOOD) if ch is not None else None
        out = table.execute_query(key, proof) if op == "query" else table.execute_delete(key, proof)
        want = ref.query(key) if op == "query" else ref.delete(key)
    return (out.kind.value, out.latency, out.rb_charged, out.depth_before), want


def _replay(t, path):
    """Fresh implementation and reference with ``path`` applied to both."""
    table, ref = DepthChargeTable(TableConfig(t)), RefTable(t)
    for op, k in path:
        _step(table, ref, op, k)
    return table, ref


def _compare(t, keys, max_len, prune):
    """DFS over request sequences, each replayed from an empty table.

    With ``prune`` a prefix is not extended again when the same joint state
    (full link structure of the implementation plus the reference lists) was
    already reached with at least as many requests left: both sides are
    deterministic, so every continuation would repeat an explored one.
    """
    alphabet = [(op, k) for op in _OPS for k in keys]
    seen: dict = {}
    stats = {"nodes": 0, "divergences": []}

    def walk(path):
        table, ref = _replay(t, path)
        stats["nodes"] += 1
        if ref.state() != tuple(tuple(table.bucket_keys(i)) for i in range(t)):
            stats["divergences"].append(path)
            return
        if len(path) == max_len:
            return
        if prune:
            fp = (table.structure_fingerprint(), ref.state())
            if seen.get(fp, -1) >= max_len - len(path):
                return
            seen[fp] = max_len - len(path)
        for op, k in alphabet:
            t2, r2 = _replay(t, path)
            got, want = _step(t2, r2, op, k)
            if got != want:
                stats["divergences"].append(path + [(op, k, got, want)])
                continue
            walk(path + [(op, k)])

    walk([])
    return stats


def test_criterion_9_bruteforce_equivalence():
    with criterion(9, "all sequences <= 8 over <= 3 keys, t <= 2 match the reference") as info:
        nodes = 0
        for t, keys in _key_layouts():
            # literal enumeration of short sequences, no pruning
            st = _compare(t, keys, 4, prune=False)
            assert not st["divergences"], st["divergences"][:3]
            nodes += st["nodes"]
            # full length with pruning on identical joint state
            st = _compare(t, keys, 8, prune=True)
            assert not st["divergences"], st["divergences"][:3]
            nodes += st["nodes"]
        info["detail"] = f"{nodes} states compared"


def test_criterion_10_determinism():
    with criterion(10, "builtin re-runs with the same seed are byte-identical"):
        for name in sorted(scenarios.BUILTINS):
            for seed in (0, 7):
                a = scenarios.report(scenarios.run(scenarios.builtin(name), seed=seed, trace=True))
                b = scenarios.report(scenarios.run(scenarios.builtin(name), seed=seed, trace=True))
                assert a == b, name
                assert scenarios.report(scenarios.run(scenarios.builtin(name), seed=seed), "csv") == \
                    scenarios.report(scenarios.run(scenarios.builtin(name), seed=seed), "csv")
