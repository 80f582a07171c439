"""The defended chained hash table.

Every request is priced by depth: an insert at index ``i`` costs ``L_i + 1``
(the new object's depth), a query or delete of an object at depth ``d`` costs
``d``, and a lookup that misses costs the full bucket length. A successful
query moves the object to the head of its list.

Requests are two-phase. ``request_*`` quotes the price and issues a challenge
bound to that request; ``insert`` / ``execute_query`` / ``execute_delete``
settle it against a solution. The hardness charged is the one fixed at quote
time, even if the bucket changed in between.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .rb import Challenge, LedgerBackend, Solution

__all__ = [
    "TableConfig",
    "Status",
    "RequestOutcome",
    "Bucket",
    "TableSnapshot",
    "DepthChargeTable",
    "RequestRejected",
    "hash_index",
    "directed_key",
]

_DIRECTED_TAG = b"\xffDC@"


class RequestRejected(Exception):
    """A request failed validation or its proof did not verify."""


@dataclass(frozen=True)
class TableConfig:
    index_count: int
    hash_seed: int = 0
    # harness-only switches
    allow_directed: bool = True
    move_to_front: bool = True

    def __post_init__(self):
        if self.index_count < 1:
            raise ValueError(f"index_count must be >= 1, got {self.index_count}")
        if not 0 <= self.hash_seed < 1 << 64:
            raise ValueError("hash_seed must be a 64-bit unsigned value")


def hash_index(key: bytes, cfg: TableConfig) -> int:
    """Keyed hash of ``key`` into ``[0, index_count)``."""
    if cfg.index_count == 1:
        return 0
    digest = hashlib.blake2b(key, digest_size=8, key=cfg.hash_seed.to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little") % cfg.index_count


def directed_key(index: int, serial: int | bytes) -> bytes:
    """A key that lands on ``index`` in tables that allow directed placement.

    Stands in for the attacker's ability to mint colliding keys without
    simulating hash inversion.
    """
    tail = serial if isinstance(serial, bytes) else serial.to_bytes(8, "big")
    return _DIRECTED_TAG + index.to_bytes(4, "big") + tail


class Status(str, enum.Enum):
    INSERTED = "inserted"
    FOUND = "found"
    NOT_FOUND = "not_found"
    DELETED = "deleted"


class RequestOutcome(NamedTuple):
    kind: Status
    latency: int
    rb_charged: int
    depth_before: int | None
    index: int


class _Node:
    __slots__ = ("key", "prev", "next")

    def __init__(self, key: bytes):
        self.key = key
        self.prev: _Node | None = None
        self.next: _Node | None = None


class Bucket:
    """Doubly-linked chain with head and tail references.

    Depth is implicit: the head is at depth 1 and each link adds one.
    """

    __slots__ = ("head", "tail", "length")

    def __init__(self):
        self.head: _Node | None = None
        self.tail: _Node | None = None
        self.length = 0

    def append(self, node: _Node) -> None:
        node.next = None
        node.prev = self.tail
        if self.tail is None:
            self.head = node
        else:
            self.tail.next = node
        self.tail = node
        self.length += 1

    def unlink(self, node: _Node) -> None:
        if node.prev is None:
            self.head = node.next
        else:
            node.prev.next = node.next
        if node.next is None:
            self.tail = node.prev
        else:
            node.next.prev = node.prev
        node.prev = node.next = None
        self.length -= 1

    def push_front(self, node: _Node) -> None:
        node.prev = None
        node.next = self.head
        if self.head is None:
            self.tail = node
        else:
            self.head.prev = node
        self.head = node
        self.length += 1

    def find(self, key: bytes) -> tuple[_Node | None, int]:
        """Walk from the head. Returns (node, depth) or (None, nodes visited)."""
        node = self.head
        depth = 0
        while node is not None:
            depth += 1
            if node.key == key:
                return node, depth
            node = node.next
        return None, depth

    def keys(self) -> list[bytes]:
        out = []
        node = self.head
        while node is not None:
            out.append(node.key)
            node = node.next
        return out

    def depths_in(self, members, expect: int | None = None) -> dict[bytes, int]:
        """Depths of the keys that are in ``members``.

        With ``expect`` the walk stops once that many have been found.
        """
        out = {}
        node = self.head
        depth = 0
        while node is not None:
            depth += 1
            if node.key in members:
                out[node.key] = depth
                if len(out) == expect:
                    break
            node = node.next
        return out

    def __iter__(self) -> Iterator[bytes]:
        return iter(self.keys())

    def __len__(self) -> int:
        return self.length

    def tail_valid(self) -> bool:
        if self.length == 0:
            return self.head is None and self.tail is None
        return self.tail is not None and self.tail.next is None and (self.head is not None and self.head.prev is None)


@dataclass(frozen=True)
class TableSnapshot:
    lengths: tuple[int, ...]
    buckets: tuple[tuple[bytes, ...], ...]
    tail_valid: tuple[bool, ...]

    def depth_of(self, key: bytes) -> tuple[int, int] | None:
        for i, b in enumerate(self.buckets):
            if key in b:
                return i, b.index(key) + 1
        return None

    @property
    def live_count(self) -> int:
        return sum(self.lengths)


@dataclass
class OpsMetrics:
    """Server-side work that the per-request latency does not count."""

    quotes: int = 0
    quote_traversal: int = 0
    free_probes: int = 0
    rejected: int = 0


class DepthChargeTable:
    """Fixed-size chained hash table that prices every request by depth.

    ``rb`` is the challenge store used to verify solutions; it defaults to an
    exact :class:`~depthcharge.rb.LedgerBackend`.
    """

    def __init__(self, config: TableConfig, rb=None):
        self.config = config
        self.rb = rb if rb is not None else LedgerBackend()
        self._buckets = [Bucket() for _ in range(config.index_count)]
        self._live: set[bytes] = set()
        self._hash_key = config.hash_seed.to_bytes(8, "little")
        self.ops = OpsMetrics()

    def __len__(self) -> int:
        return len(self._live)

    def __contains__(self, key: bytes) -> bool:
        return key in self._live

    @property
    def index_count(self) -> int:
        return self.config.index_count

    def index_of(self, key: bytes) -> int:
        cfg = self.config
        if cfg.allow_directed and key[:4] == _DIRECTED_TAG and len(key) >= 8:
            idx = int.from_bytes(key[4:8], "big")
            if idx < cfg.index_count:
                return idx
        if cfg.index_count == 1:
            return 0
        digest = hashlib.blake2b(key, digest_size=8, key=self._hash_key).digest()
        return int.from_bytes(digest, "little") % cfg.index_count

    def _bucket(self, index: int) -> Bucket:
        if not 0 <= index < self.config.index_count:
            raise IndexError(f"index {index} out of range [0, {self.config.index_count})")
        return self._buckets[index]

    def length(self, index: int) -> int:
        return self._bucket(index).length

    def bucket_keys(self, index: int) -> list[bytes]:
        return self._bucket(index).keys()

    def depths_in(self, index: int, members, expect: int | None = None) -> dict[bytes, int]:
        return self._bucket(index).depths_in(members, expect)

    # -- inserts -----------------------------------------------------------

    def quote_insert(self, index: int) -> int:
        return self._bucket(index).length + 1

    def request_insert(self, key: bytes, index: int | None = None) -> Challenge:
        """Quote an insert of ``key`` and issue the matching challenge."""
        if index is None:
            index = self.index_of(key)
        self._check_insert(key, index)
        self.ops.quotes += 1
        return self.rb.issue(self.quote_insert(index), ("insert", key, index))

    def _check_insert(self, key: bytes, index: int) -> None:
        if key in self._live:
            raise RequestRejected(f"duplicate key {key!r}")
        if index != self.index_of(key):
            raise RequestRejected(f"key {key!r} does not map to index {index}")

    def insert(self, key: bytes, index: int, proof: Solution | None) -> RequestOutcome:
        bucket = self._bucket(index)
        self._check_insert(key, index)
        ch = self.rb.verify(proof, ("insert", key, index))
        if ch is None:
            self.ops.rejected += 1
            raise RequestRejected("insert proof rejected")
        bucket.append(_Node(key))
        self._live.add(key)
        return RequestOutcome(Status.INSERTED, 1, ch.hardness, None, index)

    # -- queries and deletes -----------------------------------------------

    def quote_query(self, key: bytes) -> tuple[int, bool]:
        bucket = self._buckets[self.index_of(key)]
        node, depth = bucket.find(key)
        self.ops.quote_traversal += depth
        return depth, node is not None

    def request_query(self, key: bytes, op: str = "query") -> Challenge | None:
        """Quote a query (or delete) and issue its challenge.

        Returns None for a miss on an empty bucket: a zero-hard request needs
        no challenge and is settled with ``proof=None``.
        """
        if op not in ("query", "delete"):
            raise ValueError(f"unknown op {op!r}")
        self.ops.quotes += 1
        hardness, _ = self.quote_query(key)
        if hardness == 0:
            return None
        return self.rb.issue(hardness, (op, key))

    def request_delete(self, key: bytes) -> Challenge | None:
        return self.request_query(key, "delete")

    def _settle_lookup(self, key: bytes, proof: Solution | None, op: str):
        index = self.index_of(key)
        bucket = self._buckets[index]
        if proof is None:
            if bucket.length == 0:
                self.ops.free_probes += 1
                return index, bucket, None, 0, None
            self.ops.rejected += 1
            raise RequestRejected(f"{op} on a non-empty bucket needs a proof")
        ch = self.rb.verify(proof, (op, key))
        if ch is None:
            self.ops.rejected += 1
            raise RequestRejected(f"{op} proof rejected")
        node, depth = bucket.find(key)
        return index, bucket, node, depth, ch

    def execute_query(self, key: bytes, proof: Solution | None) -> RequestOutcome:
        index, bucket, node, depth, ch = self._settle_lookup(key, proof, "query")
        charged = ch.hardness if ch is not None else 0
        if node is None:
            return RequestOutcome(Status.NOT_FOUND, depth, charged, None, index)
        if depth > 1 and self.config.move_to_front:
            bucket.unlink(node)
            bucket.push_front(node)
        return RequestOutcome(Status.FOUND, depth, charged, depth, index)

    def execute_delete(self, key: bytes, proof: Solution | None) -> RequestOutcome:
        index, bucket, node, depth, ch = self._settle_lookup(key, proof, "delete")
        charged = ch.hardness if ch is not None else 0
        if node is None:
            return RequestOutcome(Status.NOT_FOUND, depth, charged, None, index)
        bucket.unlink(node)
        self._live.discard(key)
        return RequestOutcome(Status.DELETED, depth, charged, depth, index)

    # -- observability -----------------------------------------------------

    def snapshot(self) -> TableSnapshot:
        bs = self._buckets
        return TableSnapshot(
            tuple(b.length for b in bs),
            tuple(tuple(b.keys()) for b in bs),
            tuple(b.tail_valid() for b in bs),
        )

    def structure_fingerprint(self) -> tuple:
        """Full link structure: forward and backward walks of every bucket.

        Two tables with equal fingerprints behave identically on every future
        request sequence.
        """
        out = []
        for b in self._buckets:
            fwd = b.keys()
            back = []
            node = b.tail
            while node is not None:
                back.append(node.key)
                node = node.prev
            out.append((b.length, tuple(fwd), tuple(back)))
        return tuple(out), frozenset(self._live)
