"""Good-client request generation.

Good objects always get fresh random keys, so their index is whatever the
hash says: uniform across the table. Queries are either scripted or drawn by
picking an index uniformly at random and then one of its good objects.
"""
from __future__ import annotations

from dataclasses import dataclass

from .simulation import Simulation
from .table import RequestOutcome

QUERY_MODES = ("uar_index", "scripted")


@dataclass
class WorkloadSpec:
    good_inserts: int = 0
    query_mode: str = "uar_index"
    queries: int = 0
    deletes: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if self.query_mode not in QUERY_MODES:
            raise ValueError(f"query mode must be one of {QUERY_MODES}, got {self.query_mode!r}")
        for name in ("good_inserts", "queries", "deletes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def gen_good_insert(sim: Simulation, index: int | None = None) -> RequestOutcome:
    """Insert one fresh good object (optionally waiting for one that hashes to ``index``)."""
    if index is None:
        return sim.good_insert()
    return sim.good_insert_at(index)


def pick_uar_object(sim: Simulation) -> bytes:
    if not sim.good_keys:
        raise ValueError("no good objects to query")
    rng = sim.rng
    t = sim.config.index_count
    by_index = sim.good_by_index
    while True:
        bucket = by_index.get(rng.randrange(t))
        if bucket:
            return bucket[rng.randrange(len(bucket))]
        sim.redraws += 1


def gen_uar_query(sim: Simulation) -> RequestOutcome:
    """Query a good object in an index drawn uniformly at random.

    Indices without good objects are redrawn (counted in ``sim.redraws``), so
    every counted query hits an existing object.
    """
    return sim.good_query(pick_uar_object(sim))


def gen_delete(sim: Simulation, key: bytes | None = None) -> RequestOutcome:
    """Delete ``key``, or a good object chosen uniformly at random."""
    if key is None:
        if not sim.good_keys:
            raise ValueError("no good objects to delete")
        key = sim.rng.choice(sorted(sim.good_keys))
    return sim.good_delete(key)


class Workload:
    def __init__(self, sim: Simulation, spec: WorkloadSpec):
        self.sim = sim
        self.spec = spec

    def inserts(self, count: int | None = None, index: int | None = None) -> list[RequestOutcome]:
        n = self.spec.good_inserts if count is None else count
        return [gen_good_insert(self.sim, index) for _ in range(n)]

    def queries(self, count: int | None = None, keys: list[bytes] | None = None) -> list[RequestOutcome]:
        n = self.spec.queries if count is None else count
        if keys is not None or self.spec.query_mode == "scripted":
            if keys is None:
                raise ValueError("scripted queries need explicit keys")
            return [self.sim.good_query(keys[k % len(keys)]) for k in range(n)]
        return [gen_uar_query(self.sim) for _ in range(n)]

    def deletes(self, count: int | None = None) -> list[RequestOutcome]:
        n = self.spec.deletes if count is None else count
        return [gen_delete(self.sim) for _ in range(n)]
