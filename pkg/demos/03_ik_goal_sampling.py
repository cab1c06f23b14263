"""Sampling many IK solutions for one task-space target.

Builds a seed database for the planar arm, asks for goal configurations of
a reachable pose, and shows that both elbow branches come back. The same
machinery drives the goal trees of the multi-goal planner.
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import manyplan as mp
from manyplan.bench import planar_two_link_ik
from manyplan.ik import position_only_settings

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

chain = mp.planar_2dof()
world = mp.empty_world()

print("building a 100k seed database (one-time cost per chain + world)...")
db = mp.build_seed_database(chain, world, 100_000, seed=0)
print(f"{len(db)} entries, chain id {db.chain_id}")

target_xy = (1.1, 0.7)
target = mp.Pose([*target_xy, 0.0], [1, 0, 0, 0])
settings = position_only_settings()

goals = mp.sample_goal_set(chain, world, db, target, k=10, settings=settings)
print(f"\n{len(goals)} distinct goal configurations for tip {target_xy}:")
for g in goals.configs:
    tip = mp.forward_kinematics(chain, g).position
    print(f"  q={np.round(g, 4)}  tip error "
          f"{np.linalg.norm(tip - target.position):.2e}")

print("\nclosed-form branches for comparison:")
for sol in planar_two_link_ik(target_xy):
    print(f"  q={np.round(sol, 4)}")

fig, ax = plt.subplots(figsize=(5, 5))
for g in goals.configs:
    _, origins, tip = mp.link_frames(chain, g)
    ax.plot([0, origins[1][0], tip[0]], [0, origins[1][1], tip[1]],
            "-o", markersize=4)
ax.plot(*target_xy, "r*", markersize=14)
ax.set_aspect("equal")
ax.set_title("every sampled preimage of one target")
fig.savefig(OUT / "03_ik_branches.png", dpi=120)
print(f"\nfigure written to {OUT / '03_ik_branches.png'}")

# the two numeric solvers: seeded least squares and pseudoinverse steps
seed = np.array([0.2, 1.2])
sqp = mp.solve_ik_sqp(chain, target, seed, settings)
newton = mp.solve_ik_newton(chain, target, seed, settings)
print(f"\nseeded solve : q={np.round(sqp.config, 4)} residual {sqp.residual:.1e}")
print(f"pseudoinverse: q={np.round(newton.config, 4)} residual {newton.residual:.1e}")
