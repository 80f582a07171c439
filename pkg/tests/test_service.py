import asyncio
import random
import struct

import pytest

from depthcharge.accounting import GOOD
from depthcharge.service import (
    EndpointConfig,
    ProtocolError,
    client_drive,
    decode,
    encode,
    make_table,
    read_frame,
    serve,
    write_frame,
)
from depthcharge.table import DepthChargeTable, TableConfig


def run(coro):
    return asyncio.run(coro)


async def started(t=8, backend="ledger", simulation=True, ttl=300.0, unit_work=16):
    table = make_table(t, backend, unit_work=unit_work, seed=1, ttl=ttl, simulation=simulation)
    return await serve(table, EndpointConfig(port=0, simulation=simulation, ttl=ttl))


async def raw(svc):
    return await asyncio.open_connection("127.0.0.1", svc.port)


def test_frame_roundtrip():
    data = encode({"type": "request", "op": "insert", "key": "00"})
    (n,) = struct.unpack(">I", data[:4])
    assert n == len(data) - 4
    assert decode(data[4:]) == {"v": 1, "type": "request", "op": "insert", "key": "00"}
    with pytest.raises(ProtocolError):
        decode(b"not json")
    with pytest.raises(ProtocolError):
        decode(b'{"v": 99, "type": "request"}')
    with pytest.raises(ProtocolError):
        decode(b"[1, 2]")


def test_insert_into_empty_table():
    async def go():
        svc = await started()
        r, w = await raw(svc)
        await write_frame(w, {"type": "request", "op": "insert", "key": "aa"})
        ch = await read_frame(r)
        assert ch["type"] == "challenge" and ch["hardness"] == 1
        await write_frame(w, {"type": "solution", "challenge_id": ch["challenge_id"], "proofs": []})
        res = await read_frame(r)
        w.close()
        await svc.close()
        return res

    res = run(go())
    assert (res["status"], res["latency"], res["rb_charged"]) == ("inserted", 1, 1)


def test_replayed_solution_rejected():
    async def go():
        svc = await started()
        r, w = await raw(svc)
        await write_frame(w, {"type": "request", "op": "insert", "key": "aa"})
        ch = await read_frame(r)
        sol = {"type": "solution", "challenge_id": ch["challenge_id"], "proofs": []}
        await write_frame(w, sol)
        first = await read_frame(r)
        await write_frame(w, sol)
        second = await read_frame(r)
        w.close()
        await svc.close()
        return first, second, len(svc.table)

    first, second, n = run(go())
    assert first["status"] == "inserted" and second["status"] == "rejected" and n == 1


def test_three_inserts_same_index():
    async def go():
        svc = await started()
        rep = await client_drive([{"op": "insert", "key": bytes([k]), "declared_index": 3} for k in range(3)],
                                 "127.0.0.1", svc.port)
        await svc.close()
        return rep, svc

    rep, svc = run(go())
    assert [r["rb_charged"] for r in rep.results] == [1, 2, 3]
    assert svc.table.length(3) == 3


def test_pumped_object_query_costs_depth():
    async def go():
        svc = await started()
        host, port = "127.0.0.1", svc.port
        await client_drive([{"op": "insert", "key": b"g", "declared_index": 0}], host, port)
        bads = [b"x%d" % k for k in range(5)]
        # second client: fill the list behind g, then pump g three levels down
        await client_drive([{"op": "insert", "key": k, "declared_index": 0} for k in bads]
                           + [{"op": "query", "key": k} for k in bads[:3]], host, port)
        rep = await client_drive([{"op": "query", "key": b"g"}], host, port)
        await svc.close()
        return rep

    rep = run(go())
    assert rep.results[0]["status"] == "found" and rep.results[0]["rb_charged"] == 4 == rep.results[0]["latency"]


def test_empty_script_no_traffic():
    async def go():
        svc = await started()
        rep = await client_drive([], "127.0.0.1", svc.port)
        await svc.close()
        return rep, svc

    rep, svc = run(go())
    assert rep.results == [] and rep.work == 0 and svc.connections == 0 and svc.rb.issued == 0


def test_expired_solution_never_mutates():
    async def go():
        svc = await started(ttl=0.05)
        rep = await client_drive([{"op": "insert", "key": b"late"}], "127.0.0.1", svc.port, delay=0.15)
        await svc.close()
        return rep, svc

    rep, svc = run(go())
    assert rep.results[0]["status"] == "rejected"
    assert len(svc.table) == 0


def test_malformed_frames():
    async def go():
        svc = await started()
        r, w = await raw(svc)
        body = b"{broken"
        w.write(struct.pack(">I", len(body)) + body)
        err = await read_frame(r)
        # the connection survives a bad body
        await write_frame(w, {"type": "request", "op": "query", "key": "zz"})
        err2 = await read_frame(r)
        await write_frame(w, {"type": "hello"})
        err3 = await read_frame(r)
        # an oversized length prefix ends the connection
        w.write(struct.pack(">I", 1 << 30))
        err4 = await read_frame(r)
        eof = await r.read()
        w.close()
        await svc.close()
        return err, err2, err3, err4, eof

    err, err2, err3, err4, eof = run(go())
    assert err["type"] == err2["type"] == err3["type"] == err4["type"] == "error"
    assert eof == b""


def test_production_mode_ignores_declared_index():
    async def go():
        svc = await started(t=64, simulation=False)
        await client_drive([{"op": "insert", "key": b"k", "declared_index": 5}], "127.0.0.1", svc.port)
        await svc.close()
        return svc.table

    table = run(go())
    assert table.bucket_keys(table.index_of(b"k")) == [b"k"]
    assert table.index_of(b"k") == DepthChargeTable(TableConfig(64)).index_of(b"k")


def test_simulation_flag_from_env(monkeypatch):
    monkeypatch.setenv("DEPTHCHARGE_SIMULATION", "1")
    assert EndpointConfig.from_env().simulation
    monkeypatch.setenv("DEPTHCHARGE_SIMULATION", "0")
    assert not EndpointConfig.from_env().simulation


def test_quote_fixed_while_bucket_moves():
    async def go():
        svc = await started()
        host, port = "127.0.0.1", svc.port
        await client_drive([{"op": "insert", "key": k, "declared_index": 0} for k in (b"a", b"b")], host, port)
        r, w = await raw(svc)
        await write_frame(w, {"type": "request", "op": "query", "key": b"b".hex()})
        ch = await read_frame(r)
        # another client pushes b deeper before the solution arrives
        await client_drive([{"op": "insert", "key": b"c", "declared_index": 0}, {"op": "query", "key": b"c"}],
                           host, port)
        await write_frame(w, {"type": "solution", "challenge_id": ch["challenge_id"], "proofs": []})
        res = await read_frame(r)
        w.close()
        await svc.close()
        return ch, res

    ch, res = run(go())
    assert ch["hardness"] == 2 and res["rb_charged"] == 2 and res["latency"] == 3


def test_wire_matches_library():
    rng = random.Random(5)
    keys = [bytes([k]) for k in range(6)]
    script = [{"op": rng.choice(["insert", "query", "delete"]), "key": rng.choice(keys)} for _ in range(150)]

    async def go():
        svc = await started(t=2, simulation=False)
        rep = await client_drive(script, "127.0.0.1", svc.port)
        await svc.close()
        return rep

    rep = run(go())
    lib = DepthChargeTable(TableConfig(2, allow_directed=False))
    expected = []
    for step in script:
        k = step["key"]
        if step["op"] == "insert":
            if k in lib:
                expected.append(("rejected", 0, 0))
                continue
            ch = lib.request_insert(k)
            out = lib.insert(k, lib.index_of(k), lib.rb.solve(ch, GOOD))
        else:
            ch = lib.request_query(k, step["op"])
            proof = lib.rb.solve(ch, GOOD) if ch else None
            out = lib.execute_query(k, proof) if step["op"] == "query" else lib.execute_delete(k, proof)
        expected.append((out.kind.value, out.latency, out.rb_charged))
    got = [(r["status"], r["latency"], r["rb_charged"]) for r in rep.results]
    assert got == expected


def test_pow_flood_work_superlinear_verify_linear():
    async def flood(b):
        svc = await started(t=1, backend="pow", unit_work=16)
        rep = await client_drive([{"op": "insert", "key": b"x%d" % k} for k in range(b)], "127.0.0.1", svc.port)
        await svc.close()
        return rep, svc.rb.verify_evaluations

    small, v_small = run(flood(20))
    big, v_big = run(flood(40))
    assert small.hardness == 210 and big.hardness == 820
    # server verification is exactly one hash per unit of hardness charged
    assert v_small == small.hardness and v_big == big.hardness
    # client work grows faster than the number of objects placed
    assert big.work / small.work > 2 * 1.5
    assert big.work / 40 > small.work / 20


def test_retry_after_connection_loss_uses_fresh_challenge():
    async def go():
        svc = await started()
        drops = {"left": 1}

        async def proxy(cr, cw):
            sr, sw = await asyncio.open_connection("127.0.0.1", svc.port)
            try:
                req = await read_frame(cr)
                await write_frame(sw, req)
                ch = await read_frame(sr)
                if drops["left"]:
                    drops["left"] -= 1
                    return  # challenge issued but never delivered
                await write_frame(cw, ch)
                while True:
                    await write_frame(sw, await read_frame(cr))
                    await write_frame(cw, await read_frame(sr))
            except (asyncio.IncompleteReadError, ConnectionError):
                pass
            finally:
                cw.close()
                sw.close()

        px = await asyncio.start_server(proxy, "127.0.0.1", 0)
        port = px.sockets[0].getsockname()[1]
        rep = await client_drive([{"op": "insert", "key": b"k"}], "127.0.0.1", port)
        px.close()
        await svc.close()
        return rep, svc

    rep, svc = run(go())
    assert rep.retries == 1 and rep.results[0]["status"] == "inserted"
    assert svc.rb.issued == 2 and svc.rb.accepted == 1
