"""Single-threaded harness that drives requests through the full lifecycle.

Every request is quoted, its challenge solved by the requesting principal,
settled against the table, and then recorded. The harness is the only place
that knows which objects are good: the table never sees labels.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import rb as rb_mod
from .accounting import BAD, GOOD, CostLedger, GoodObjectStats, WalletOracle
from .table import DepthChargeTable, RequestOutcome, RequestRejected, Status, TableConfig

TRACE_FIELDS = (
    "seq",
    "principal",
    "op",
    "key",
    "index",
    "status",
    "latency",
    "rb_charged",
    "depth_before",
    "length_after",
)


@dataclass(frozen=True)
class TraceRow:
    seq: int
    principal: str
    op: str
    key: str
    index: int
    status: str
    latency: int
    rb_charged: int
    depth_before: int | None
    length_after: int

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in TRACE_FIELDS)


class Simulation:
    def __init__(
        self,
        config: TableConfig,
        backend: str | object = "ledger",
        seed: int = 0,
        oracle: bool = False,
        trace: bool = False,
        unit_work: int = 256,
    ):
        if isinstance(backend, str):
            backend = rb_mod.make_backend(backend, seed=seed, unit_work=unit_work)
        self.rb = backend
        self.table = DepthChargeTable(config, backend)
        self.ledger = CostLedger()
        self.stats = GoodObjectStats(config.index_count)
        self.oracle = WalletOracle() if oracle else None
        self.trace: list[TraceRow] | None = [] if trace else None
        self.rng = random.Random(seed)
        self.good_keys: set[bytes] = set()
        self.good_by_index: dict[int, list[bytes]] = {}
        self.bad_by_index: dict[int, list[bytes]] = {}
        self.max_bucket_length = 0
        self.abandoned_quotes = 0
        self.redraws = 0
        self._seq = 0

    @property
    def config(self) -> TableConfig:
        return self.table.config

    def fresh_good_key(self) -> bytes:
        return self.rng.randbytes(16)

    def is_good(self, key: bytes) -> bool:
        return key in self.good_keys

    def good_depths(self, index: int) -> dict[bytes, int]:
        present = self.good_by_index.get(index)
        if not present:
            return {}
        return self.table.depths_in(index, self.good_keys, len(present))

    def request(
        self,
        principal: str,
        op: str,
        key: bytes,
        index: int | None = None,
        max_hardness: int | None = None,
    ) -> RequestOutcome | None:
        """Run one request end to end.

        Returns None if the quote exceeds ``max_hardness``; the challenge is
        then left unsolved and counted in ``abandoned_quotes``.
        """
        table = self.table
        if op == "insert":
            if index is None:
                index = table.index_of(key)
        else:
            index = table.index_of(key)
            if op == "delete" and principal == BAD and key in self.good_keys:
                raise RequestRejected("the adversary may not delete good objects")
        oracle = self.oracle
        # only a found query moves good objects before the touched one
        pre = self.good_depths(index) if oracle is not None and op == "query" else None

        if op == "insert":
            ch = table.request_insert(key, index)
        elif op in ("query", "delete"):
            ch = table.request_query(key, op)
        else:
            raise ValueError(f"unknown op {op!r}")
        if ch is not None and max_hardness is not None and ch.hardness > max_hardness:
            self.abandoned_quotes += 1
            return None
        proof = self.rb.solve(ch, principal) if ch is not None else None
        if op == "insert":
            out = table.insert(key, index, proof)
        elif op == "query":
            out = table.execute_query(key, proof)
        else:
            out = table.execute_delete(key, proof)

        self.ledger.record(out, principal, index)
        good = principal == GOOD
        kind = out.kind
        if kind is Status.INSERTED:
            self._added(key, index, good)
            length = table.length(index)
            if length > self.max_bucket_length:
                self.max_bucket_length = length
        elif kind is Status.DELETED:
            self._removed(key, index)
        if oracle is not None:
            oracle.observe(out, key, good, pre, self.good_depths(index))
        if self.trace is not None:
            self._seq += 1
            self.trace.append(
                TraceRow(
                    self._seq, principal, op, key.hex(), index, kind.value,
                    out.latency, out.rb_charged, out.depth_before, table.length(index),
                )
            )
        return out

    def _added(self, key: bytes, index: int, good: bool) -> None:
        if good:
            self.good_keys.add(key)
            self.good_by_index.setdefault(index, []).append(key)
            self.stats.good_added(index)
        else:
            self.bad_by_index.setdefault(index, []).append(key)
            self.stats.bad_added(index)

    def _removed(self, key: bytes, index: int) -> None:
        if key in self.good_keys:
            self.good_keys.discard(key)
            self.good_by_index[index].remove(key)
            self.stats.good_removed(index)
        else:
            self.bad_by_index[index].remove(key)
            self.stats.bad_removed(index)

    # client-side shorthands

    def good_insert(self, key: bytes | None = None) -> RequestOutcome:
        if key is None:
            key = self.fresh_good_key()
        return self.request(GOOD, "insert", key)

    def good_insert_at(self, index: int, max_tries: int = 1 << 20) -> RequestOutcome:
        """Insert a fresh good key, drawing keys until one hashes to ``index``.

        Placement stays honest (keys go through the hash); only the choice of
        which fresh object arrives next is adversarial.
        """
        for _ in range(max_tries):
            key = self.fresh_good_key()
            if self.table.index_of(key) == index:
                return self.request(GOOD, "insert", key)
        raise RuntimeError(f"no key found for index {index}")

    def good_query(self, key: bytes) -> RequestOutcome:
        return self.request(GOOD, "query", key)

    def good_delete(self, key: bytes) -> RequestOutcome:
        return self.request(GOOD, "delete", key)

    def check_conservation(self) -> None:
        snap = self.table.snapshot()
        if snap.live_count != len(self.table):
            raise AssertionError("bucket lengths do not sum to live objects")
        if not all(snap.tail_valid):
            raise AssertionError("invalid tail reference")
