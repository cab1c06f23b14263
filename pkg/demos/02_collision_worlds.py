"""The four benchmark environments and the sphere collision model.

Renders each world's obstacle spheres, shows the robot sphere model, and
exercises configuration and edge collision queries.
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import manyplan as mp

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

chain = mp.generic_6dof()
model = mp.default_sphere_model(chain)
print(f"robot model: {len(model.radii)} spheres over {chain.dof} links")

fig = plt.figure(figsize=(12, 3.2))
for i, kind in enumerate(("table", "wall", "passage", "random")):
    world = mp.make_environment(kind, chain.reach, seed=7)
    ax = fig.add_subplot(1, 4, i + 1, projection="3d")
    ax.scatter(world.centers[:, 0], world.centers[:, 1], world.centers[:, 2],
               s=(world.radii * 40) ** 2, alpha=0.35)
    ax.set_title(f"{kind} ({world.n_obstacles} spheres)")
    ax.set_xlim(-1.4, 1.4), ax.set_ylim(-1.4, 1.4), ax.set_zlim(-0.2, 1.4)
fig.tight_layout()
fig.savefig(OUT / "02_environments.png", dpi=120)
print(f"figure written to {OUT / '02_environments.png'}")

world = mp.make_environment("random", chain.reach, seed=7)
checker = mp.CollisionChecker(chain, model, world)
rng = np.random.default_rng(0)
free = sum(checker.is_free(mp.random_config(chain, rng)) for _ in range(1000))
print(f"random world: {free}/1000 uniform configurations are collision-free")

q_a = chain.straight_config()
q_b = q_a + np.array([1.2, 0.8, -0.5, 0.3, 0.0, 0.0])
print(f"edge check straight->bent: {checker.edge_free(q_a, q_b, 0.05)}")
print(f"same edge, reversed      : {checker.edge_free(q_b, q_a, 0.05)}")

# world files round-trip as plain YAML sphere lists
path = OUT / "random_world.yaml"
mp.save_world(world, path)
print(f"world saved to {path} and reloads with "
      f"{mp.load_world(path).n_obstacles} spheres")
