"""Forward kinematics, Jacobians, and joint limits on the bundled arms.

Walks through the three reference chains, checks the straightened reach,
and visualizes the planar arm sweeping its elbow.
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import manyplan as mp

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

print("== reference chains ==")
for name in ("planar2", "generic6", "generic7"):
    chain = mp.resolve_chain(name)
    tip = mp.forward_kinematics(chain, chain.straight_config()).position
    print(f"{name}: {chain.dof} joints, reach {chain.reach} m, "
          f"straightened tip {np.round(tip, 3)}")

chain = mp.planar_2dof()
print("\n== planar poses ==")
for q in ([0.0, 0.0], [np.pi / 2, 0.0], [np.pi / 4, -np.pi / 2]):
    pose = mp.forward_kinematics(chain, np.array(q))
    print(f"q={np.round(q, 3)} -> tip {np.round(pose.position[:2], 3)}")

q = np.array([0.6, 0.8])
jac = mp.jacobian(chain, q)
print("\nplanar Jacobian at q=(0.6, 0.8):")
print(np.round(jac[:2], 3), "(x/y rows)")

# sweep the elbow and trace the tip
fig, ax = plt.subplots(figsize=(5, 5))
for q2 in np.linspace(-2.5, 2.5, 11):
    cfg = np.array([0.7, q2])
    _, origins, tip = mp.link_frames(chain, cfg)
    xs = [origins[0][0], origins[1][0], tip[0]]
    ys = [origins[0][1], origins[1][1], tip[1]]
    ax.plot(xs, ys, "-o", alpha=0.4, color="tab:blue", markersize=3)
ax.set_aspect("equal")
ax.set_title("planar arm, elbow sweep")
fig.savefig(OUT / "01_elbow_sweep.png", dpi=120)
print(f"\nfigure written to {OUT / '01_elbow_sweep.png'}")

# joint-limit clamping is an idempotent box projection
wild = np.array([9.0, -9.0])
clamped = mp.clamp_to_limits(chain, wild)
print(f"clamp {wild} -> {clamped} (again -> {mp.clamp_to_limits(chain, clamped)})")
