"""Pushing a good object deeper is expensive for the attacker.

Bad queries on objects below a good one move them in front of it. To push it
from depth ``s0`` down by ``d`` the attacker pays ``d s0 + d(d+1)/2``. The
victim pays ``s0 + d`` once, after which move-to-front brings it back to the
head.
"""
from depthcharge import scenarios

DEPTH = 32
ROUNDS = 100

for mtf in (True, False):
    sc = scenarios.builtin("mtf-pump-repeat").variant(move_to_front=mtf)
    summary = scenarios.run(sc, seed=0)
    led = summary.ledger
    print(f"move_to_front={mtf}")
    print(f"  attacker spent {led.adversary_rb:>8}   good queries cost {led.per_index_good_lookup_rb[0]:>6}")
    for c in summary.checks:
        if c["name"] in ("per_list", "pump_asymmetry"):
            print(f"  {c['name']:<15} bound {c['bound']:>10.1f}  measured {c['measured']:>8}  pass={c['pass']}")

# Without move-to-front the object never comes back up, so each pump leaves it
# deeper and the victim pays the full depth every round while the attacker
# pays nothing extra. That is the failure the per-list bound catches.

print("\npump schedules, 100 rounds each")
base = scenarios.builtin("mtf-pump-repeat")
for kind in scenarios.PUMP_SCHEDULES:
    sc = base.variant()
    sc.schedule[-1] = {"rounds": {"index": 0, "count": ROUNDS, "pump": {"kind": kind, "depth": DEPTH}}}
    s = scenarios.run(sc, seed=0)
    ratio = s.ledger.adversary_rb / max(1, s.ledger.algorithm_rb)
    print(f"  {kind:<13} attacker {s.ledger.adversary_rb:>7}  victim {s.ledger.algorithm_rb:>6}  ratio {ratio:6.1f}")
