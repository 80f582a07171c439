"""How far can a budget push one chain?

Every bad insert pays the chain's new length, so ``b`` objects in one list
cost ``b(b+1)/2``. Chain length grows like the square root of the budget,
and so does the price any good client pays there.
"""
import math

from depthcharge.adversary import Adversary
from depthcharge.simulation import Simulation
from depthcharge.table import TableConfig

print(f"{'budget':>10} {'bad objs':>9} {'sqrt(2B)':>9} {'good insert':>12} {'good query':>11}")
for budget in (10, 100, 1_000, 10_000, 100_000):
    sim = Simulation(TableConfig(64), seed=1)
    adv = Adversary(sim, budget)
    rep = adv.single_list_flood(index=0)
    ins = sim.good_insert_at(0)
    key = sim.good_by_index[0][-1]
    q = sim.good_query(key)
    print(f"{budget:>10} {rep.placed:>9} {math.sqrt(2 * budget):>9.1f} {ins.rb_charged:>12} {q.rb_charged:>11}")

# The good object lands at the tail, so its first query pays the whole chain.
# Move-to-front makes the second one cheap.
q2 = sim.good_query(key)
print(f"\nsecond query of the same object costs {q2.rb_charged}")

# Spreading the same budget over many lists buys many more objects but
# keeps each chain short.
sim = Simulation(TableConfig(64), seed=1)
adv = Adversary(sim, 100_000)
rep = adv.even_spread(range(64), 2_000)
lengths = [sim.table.length(i) for i in range(64)]
print(f"even spread: {rep.placed} objects for {rep.spend} units, longest chain {max(lengths)}")
