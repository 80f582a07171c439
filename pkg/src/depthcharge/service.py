"""Network endpoint for the defended table, and a scripted client.

Each frame is a 4-byte big-endian length followed by a UTF-8 JSON object
(layout in ``docs/wire_protocol.md``). A request takes two round trips::

    client                       server
    Request{op, key}      ->
                          <-     ChallengeMsg{challenge_id, hardness, ...}
    SolutionMsg{...}      ->
                          <-     Result{status, latency, rb_charged}

A miss on an empty bucket is zero-hard and gets its Result straight away.

Every table access happens under one lock, so mutations from concurrent
connections are serialised. Hardness is fixed when the challenge is issued;
if the bucket changes before the solution arrives the quoted hardness is
still what is charged, while ``latency`` reports the traversal at settlement.
"""
from __future__ import annotations

import asyncio
import json
import logging
import os
import struct
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

from .rb import PowBackend, Solution, make_backend, solve_units, threshold_bytes
from .table import DepthChargeTable, RequestRejected, TableConfig, directed_key

log = logging.getLogger(__name__)

WIRE_VERSION = 1
MAX_FRAME = 1 << 20
SIMULATION_ENV = "DEPTHCHARGE_SIMULATION"
DEFAULT_TTL = 300.0

_LEN = struct.Struct(">I")


class ProtocolError(Exception):
    """Malformed frame or message."""


# -- framing -------------------------------------------------------------------


def encode(msg: dict) -> bytes:
    body = json.dumps({"v": WIRE_VERSION, **msg}, separators=(",", ":"), sort_keys=True).encode()
    if len(body) > MAX_FRAME:
        raise ProtocolError(f"frame of {len(body)} bytes exceeds {MAX_FRAME}")
    return _LEN.pack(len(body)) + body


def decode(body: bytes) -> dict:
    try:
        msg = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(f"body is not JSON: {e}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("body must be a JSON object")
    if msg.get("v") != WIRE_VERSION:
        raise ProtocolError(f"unsupported wire version {msg.get('v')!r}")
    if not isinstance(msg.get("type"), str):
        raise ProtocolError("missing message type")
    return msg


async def read_frame(reader: asyncio.StreamReader) -> dict:
    head = await reader.readexactly(_LEN.size)
    (n,) = _LEN.unpack(head)
    if n > MAX_FRAME:
        raise ProtocolError(f"declared frame length {n} exceeds {MAX_FRAME}")
    return decode(await reader.readexactly(n))


async def write_frame(writer: asyncio.StreamWriter, msg: dict) -> None:
    writer.write(encode(msg))
    await writer.drain()


# -- server --------------------------------------------------------------------


@dataclass
class EndpointConfig:
    host: str = "127.0.0.1"
    port: int = 0
    # accept declared_index on requests (attack simulation only)
    simulation: bool = False
    ttl: float = DEFAULT_TTL

    @classmethod
    def from_env(cls, **kw) -> "EndpointConfig":
        flag = os.environ.get(SIMULATION_ENV, "").strip().lower() in ("1", "true", "yes", "on")
        return cls(simulation=flag, **kw)


class DepthChargeService:
    """One table behind a TCP endpoint."""

    def __init__(self, table: DepthChargeTable, config: EndpointConfig):
        self.table = table
        self.rb = table.rb
        self.config = config
        self._lock = asyncio.Lock()
        self._server: asyncio.AbstractServer | None = None
        # simulation mode: client key -> stored key carrying the declared index
        self._placed: dict[bytes, bytes] = {}
        self.connections = 0

    @property
    def port(self) -> int:
        assert self._server is not None
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> "DepthChargeService":
        self._server = await asyncio.start_server(self._handle, self.config.host, self.config.port)
        return self

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    def _stored_key(self, key: bytes, declared: Any) -> bytes:
        if not self.config.simulation:
            return key
        if key in self._placed:
            return self._placed[key]
        if declared is None:
            return key
        if not isinstance(declared, int) or not 0 <= declared < self.table.index_count:
            raise ProtocolError(f"declared_index {declared!r} out of range")
        return directed_key(declared, key)

    def _challenge_msg(self, ch) -> dict:
        msg = {
            "type": "challenge",
            "challenge_id": format(ch.challenge_id, "032x"),
            "hardness": ch.hardness,
            "nonce_salt": ch.nonce_salt.hex(),
            "expires_in": self.config.ttl,
        }
        if isinstance(self.rb, PowBackend):
            msg["unit_work"] = self.rb.unit_work
        return msg

    @staticmethod
    def _result(out=None, status: str | None = None, message: str = "") -> dict:
        if out is None:
            return {"type": "result", "status": status or "rejected", "latency": 0, "rb_charged": 0, "message": message}
        return {"type": "result", "status": out.kind.value, "latency": out.latency, "rb_charged": out.rb_charged}

    async def _quote(self, msg: dict) -> dict:
        op = msg.get("op")
        if op not in ("insert", "query", "delete"):
            raise ProtocolError(f"unknown op {op!r}")
        try:
            key = bytes.fromhex(msg["key"])
        except (KeyError, TypeError, ValueError):
            raise ProtocolError("key must be a hex string") from None
        table = self.table
        async with self._lock:
            stored = self._stored_key(key, msg.get("declared_index"))
            try:
                if op == "insert":
                    ch = table.request_insert(stored)
                else:
                    ch = table.request_query(stored, op)
            except RequestRejected as e:
                return self._result(message=str(e))
            if ch is None:
                # zero-hard miss: settle now
                out = table.execute_query(stored, None) if op == "query" else table.execute_delete(stored, None)
                return self._result(out)
            if op == "insert" and stored != key:
                self._placed[key] = stored
            return self._challenge_msg(ch)

    async def _settle(self, msg: dict) -> dict:
        try:
            cid = int(msg["challenge_id"], 16)
            proofs = tuple(int(p) for p in msg.get("proofs", ()))
        except (KeyError, TypeError, ValueError):
            raise ProtocolError("solution needs a hex challenge_id and integer proofs") from None
        table = self.table
        async with self._lock:
            ch = self.rb.outstanding(cid)
            if ch is None:
                self.rb.rejected += 1
                table.ops.rejected += 1
                return self._result(message="unknown or already used challenge")
            op, key = ch.binding[0], ch.binding[1]
            sol = Solution(cid, proofs)
            try:
                if op == "insert":
                    out = table.insert(key, ch.binding[2], sol)
                elif op == "query":
                    out = table.execute_query(key, sol)
                else:
                    out = table.execute_delete(key, sol)
            except RequestRejected as e:
                if op == "insert":
                    self._forget(key)
                return self._result(message=str(e))
            if op == "delete" and out.kind.value == "deleted":
                self._forget(key)
            return self._result(out)

    def _forget(self, stored: bytes) -> None:
        for k, v in list(self._placed.items()):
            if v == stored and stored not in self.table:
                del self._placed[k]

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self.connections += 1
        try:
            while True:
                try:
                    (n,) = _LEN.unpack(await reader.readexactly(_LEN.size))
                except asyncio.IncompleteReadError:
                    break
                if n > MAX_FRAME:
                    # the stream cannot be resynchronised after a bad length
                    await write_frame(writer, {"type": "error", "message": f"frame length {n} exceeds {MAX_FRAME}"})
                    break
                body = await reader.readexactly(n)
                try:
                    msg = decode(body)
                    if msg["type"] == "request":
                        reply = await self._quote(msg)
                    elif msg["type"] == "solution":
                        reply = await self._settle(msg)
                    else:
                        raise ProtocolError(f"unexpected message type {msg['type']!r}")
                except ProtocolError as e:
                    reply = {"type": "error", "message": str(e)}
                await write_frame(writer, reply)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass


async def serve(table: DepthChargeTable, config: EndpointConfig | None = None) -> DepthChargeService:
    """Start an endpoint for ``table``; its RB backend is ``table.rb``."""
    return await DepthChargeService(table, config or EndpointConfig()).start()


def make_table(
    index_count: int,
    backend: str = "ledger",
    *,
    hash_seed: int = 0,
    unit_work: int = 256,
    seed: int | None = None,
    ttl: float = DEFAULT_TTL,
    simulation: bool = False,
) -> DepthChargeTable:
    """A table whose backend expires challenges on wall-clock time."""
    rb = make_backend(backend, seed=seed, unit_work=unit_work, ttl=ttl, clock=time.monotonic)
    return DepthChargeTable(TableConfig(index_count, hash_seed, allow_directed=simulation), rb)


# -- client --------------------------------------------------------------------


@dataclass
class DriveReport:
    results: list[dict] = field(default_factory=list)
    # hash evaluations spent on PoW, or hardness units on a ledger endpoint
    work: int = 0
    hardness: int = 0
    challenges: int = 0
    retries: int = 0


def solve_challenge(msg: dict) -> tuple[tuple[int, ...], int]:
    """Solve a ChallengeMsg; returns (proofs, work)."""
    unit_work = msg.get("unit_work")
    if unit_work is None:
        return (), msg["hardness"]
    return solve_units(bytes.fromhex(msg["nonce_salt"]), int(msg["challenge_id"], 16), msg["hardness"],
                       threshold_bytes(unit_work))


def _request_msg(step: dict) -> dict:
    key = step["key"]
    msg = {"type": "request", "op": step["op"], "key": key.hex() if isinstance(key, bytes) else key}
    if step.get("declared_index") is not None:
        msg["declared_index"] = step["declared_index"]
    return msg


async def client_drive(
    script: Iterable[dict],
    host: str,
    port: int,
    retries: int = 3,
    delay: float = 0.0,
) -> DriveReport:
    """Replay ``script`` (dicts with ``op``, ``key``, optional ``declared_index``).

    Challenges are solved locally. If the connection drops mid-request the
    request is re-sent from the start on a new connection, so a challenge is
    never reused. ``delay`` sleeps between receiving a challenge and
    answering it.
    """
    report = DriveReport()
    conn: tuple[asyncio.StreamReader, asyncio.StreamWriter] | None = None

    async def connect():
        return await asyncio.open_connection(host, port)

    try:
        for step in script:
            attempt = 0
            while True:
                try:
                    if conn is None:
                        conn = await connect()
                    reader, writer = conn
                    await write_frame(writer, _request_msg(step))
                    reply = await read_frame(reader)
                    if reply["type"] == "challenge":
                        proofs, work = solve_challenge(reply)
                        report.work += work
                        report.hardness += reply["hardness"]
                        report.challenges += 1
                        if delay:
                            await asyncio.sleep(delay)
                        await write_frame(writer, {"type": "solution", "challenge_id": reply["challenge_id"],
                                                   "proofs": list(proofs)})
                        reply = await read_frame(reader)
                    if reply["type"] == "error":
                        raise ProtocolError(reply.get("message", ""))
                    report.results.append(reply)
                    break
                except (ConnectionError, asyncio.IncompleteReadError):
                    if conn is not None:
                        conn[1].close()
                    conn = None
                    attempt += 1
                    report.retries += 1
                    if attempt > retries:
                        raise
    finally:
        if conn is not None:
            conn[1].close()
            try:
                await conn[1].wait_closed()
            except ConnectionError:
                pass
    return report


def drive(script: Iterable[dict], host: str, port: int, **kw) -> DriveReport:
    return asyncio.run(client_drive(script, host, port, **kw))


async def run_endpoint(index_count: int, host: str, port: int, backend: str = "ledger",
                       unit_work: int = 256, ttl: float = DEFAULT_TTL, hash_seed: int = 0) -> None:
    cfg = EndpointConfig.from_env(host=host, port=port, ttl=ttl)
    table = make_table(index_count, backend, hash_seed=hash_seed, unit_work=unit_work, ttl=ttl,
                       simulation=cfg.simulation)
    svc = await serve(table, cfg)
    log.info("listening on %s:%d (simulation=%s, backend=%s)", host, svc.port, cfg.simulation, backend)
    print(f"listening on {host}:{svc.port}", flush=True)
    await svc.serve_forever()
