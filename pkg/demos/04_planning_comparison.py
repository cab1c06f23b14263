"""Why planning toward one IK solution fails in a split joint space.

The bifurcated planar world confines the first joint to disjoint bands, so
the target's two elbow branches live in different components of free
space. A single-goal planner pointed at the wrong branch can never
succeed; growing a tree per branch makes the choice irrelevant.
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import manyplan as mp
from manyplan.bench import bifurcated_instance, grid_oracle_2dof
from manyplan.many import ManyConfig, plan_many
from manyplan.tree import PlannerConfig

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

inst = bifurcated_instance()
print("grid-oracle connectivity from the start configuration:")
for name, q in (("elbow-up  ", inst.q_reachable),
                ("elbow-down", inst.q_unreachable)):
    cost = grid_oracle_2dof(inst.chain, inst.world, inst.q_start, [q], 0.02)
    print(f"  {name}: {'unreachable' if np.isinf(cost) else f'cost {cost:.3f}'}")

config = PlannerConfig(step=0.1, max_iterations=3000, max_runtime_ms=3000,
                       nodes_max=3000, seed=0)

wrong = mp.plan_rrt_star(inst.chain, inst.world, inst.q_start,
                         inst.q_unreachable, config)
print(f"\nsingle-goal planner at the wrong branch: success={wrong.success} "
      f"after {wrong.iterations} iterations")

db = mp.build_seed_database(inst.chain, inst.world, 100_000, seed=0)
many = plan_many(inst.chain, inst.world, inst.q_start, inst.target, db,
                 ManyConfig(base=config, k=10), ik_settings=inst.ik_settings)
print(f"multi-goal planner with K=10       : success={many.success}, "
      f"cost {many.cost:.4f}, first solution at iteration "
      f"{many.first_iteration}")

fig, ax = plt.subplots(figsize=(5.2, 4))
costs = [(i, c) for i, _, c in many.trace if np.isfinite(c)]
ax.plot([i for i, _ in costs], [c for _, c in costs], label="multi-goal")
ax.axhline(np.linalg.norm(inst.q_reachable - inst.q_start), ls="--",
           color="gray", label="straight-line distance")
ax.set_xlabel("iteration"), ax.set_ylabel("best cost")
ax.legend(), ax.set_title("incumbent cost, bifurcated world")
fig.savefig(OUT / "04_incumbent.png", dpi=120)
print(f"figure written to {OUT / '04_incumbent.png'}")
