"""The two-round handshake over TCP, with hash puzzles as the burned resource.

An in-process endpoint runs in simulation mode so the client can pick
indices. Flooding one index with ``b`` objects costs the client about
``unit_work * b(b+1)/2`` hash evaluations; the server verifies with one
evaluation per unit.
"""
import asyncio
import time

from depthcharge.service import EndpointConfig, client_drive, make_table, serve

UNIT_WORK = 64


async def main():
    table = make_table(16, "pow", unit_work=UNIT_WORK, seed=3, simulation=True)
    svc = await serve(table, EndpointConfig(simulation=True))
    print(f"endpoint on port {svc.port}")
    try:
        print(f"{'bad objs':>8} {'hardness':>9} {'client evals':>13} {'server verifies':>16} {'client s':>9}")
        for b in (8, 16, 32, 64):
            before = table.rb.verify_evaluations
            script = [{"op": "insert", "key": f"bad-{b}-{k}".encode(), "declared_index": 0}
                      for k in range(b)]
            t0 = time.perf_counter()
            rep = await client_drive(script, "127.0.0.1", svc.port)
            dt = time.perf_counter() - t0
            print(f"{b:>8} {rep.hardness:>9} {rep.work:>13} {table.rb.verify_evaluations - before:>16} {dt:>9.3f}")
            # empty the list again so each row starts from zero
            await client_drive([{"op": "delete", "key": s["key"]} for s in reversed(script)],
                               "127.0.0.1", svc.port)

        # a good client pays only for where its key actually sits
        rep = await client_drive([{"op": "insert", "key": b"good"}, {"op": "query", "key": b"good"}],
                                 "127.0.0.1", svc.port)
        print("\ngood insert then query:", [(r["status"], r["rb_charged"]) for r in rep.results])
    finally:
        await svc.close()


asyncio.run(main())
