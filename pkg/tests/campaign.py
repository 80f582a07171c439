"""Randomised mixed request sequences over every adversary strategy."""
from __future__ import annotations

import math
import random

from depthcharge.adversary import Adversary
from depthcharge.simulation import Simulation
from depthcharge.table import TableConfig

ACTIONS = (
    "good_insert", "good_query", "good_delete", "good_miss",
    "bad_insert", "bad_query", "bad_delete",
    "flood", "even_spread", "pump", "probe",
)


def sequence_length(rng: random.Random, cap: int = 1000) -> int:
    """Log-uniform on [1, cap]."""
    return min(cap, int(math.exp(rng.uniform(0, math.log(cap + 1)))))


def run_sequence(seed: int, length: int, t: int | None = None) -> Simulation:
    """Drive ``length`` settled requests of random mixed traffic with the wallet oracle on."""
    rng = random.Random(seed)
    if t is None:
        t = rng.choice((1, 2, 3, 4, 8))
    sim = Simulation(TableConfig(t, hash_seed=rng.getrandbits(64)), seed=seed, oracle=True)
    adv = Adversary(sim)
    led = sim.ledger

    while led.settled < length:
        left = length - led.settled
        act = rng.choice(ACTIONS)
        i = rng.randrange(t)
        if act == "good_insert":
            sim.good_insert()
        elif act == "good_query" and sim.good_by_index.get(i):
            sim.good_query(rng.choice(sim.good_by_index[i]))
        elif act == "good_delete" and sim.good_by_index.get(i):
            sim.good_delete(rng.choice(sim.good_by_index[i]))
        elif act == "good_miss":
            sim.good_query(sim.fresh_good_key())
        elif act == "bad_insert":
            adv.bad_insert(i)
        elif act == "bad_query" and sim.bad_by_index.get(i):
            adv.bad_query(rng.choice(sim.bad_by_index[i]))
        elif act == "bad_delete" and sim.bad_by_index.get(i):
            adv.bad_delete(rng.choice(sim.bad_by_index[i]))
        elif act == "flood":
            n = sim.table.length(i)
            adv.single_list_flood(i, budget=sum(n + j for j in range(1, min(left, rng.randint(1, 6)) + 1)))
        elif act == "even_spread":
            s = rng.randint(1, t)
            idx = rng.sample(range(t), s)
            adv.even_spread(idx, min(left, rng.randint(s, 3 * s)) if left >= s else s)
        elif act == "pump":
            adv.mtf_depth_pump(i, min(left, rng.randint(1, 6)))
        elif act == "probe":
            adv.spurious_probe(i, max_probes=min(left, rng.randint(1, 3)))
    return sim
