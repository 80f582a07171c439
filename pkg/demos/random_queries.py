"""Clients that query uniformly at random barely notice a flood.

A flood concentrates cost in a few lists. A query that picks its index at
random rarely lands there, and when it does the object moves to the front
and stays cheap. Four good objects are placed behind the flooded chain: each
pays the chain once, yet the mean stays near the average number of good
objects per list.
"""
import math

from depthcharge.adversary import Adversary
from depthcharge.simulation import Simulation
from depthcharge.table import TableConfig
from depthcharge.workload import Workload, WorkloadSpec

T = 256
QUERIES = 20_000

for budget in (0, 10_000, 200_000):
    sim = Simulation(TableConfig(T), seed=7)
    work = Workload(sim, WorkloadSpec(good_inserts=T, queries=QUERIES))
    # flood first so good objects that hash to index 0 land behind the chain
    if budget:
        Adversary(sim, budget).single_list_flood(index=0)
    work.inserts()
    for _ in range(4):
        sim.good_insert_at(0)
    outs = work.queries()
    mean = sum(o.rb_charged for o in outs) / len(outs)
    worst = max(o.rb_charged for o in outs)
    print(f"B={budget:>7}  chain 0 length {sim.table.length(0):>4}  "
          f"mean query cost {mean:5.2f}  worst {worst:>4}  l_ave {sim.stats.ell_ave:.2f}  "
          f"sqrt(2B) {math.sqrt(2 * budget):6.1f}")
