"""Rooted tree structure and RRT* primitives (nearest/near, extend, rewire).

Nodes live in preallocated arrays so nearest/near queries are single
vectorized scans; that keeps them exact (no approximate index) and
deterministic, with ties always resolved to the lowest node index.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionChecker, RobotSphereModel, World
from .kinematics import JointConfig, SerialChain


@dataclass
class PlannerConfig:
    """Shared knobs for the RRT-family planners.

    ``step`` is the extension magnitude (radians). ``rewire_radius_scale``
    scales the shrinking-ball neighborhood radius
    ``min(scale * (log n / n)^(1/m), 4 * step)``; leave it None to use a
    volume-based constant for the chain's joint box.
    """

    step: float = 0.15
    max_iterations: int = 3000
    max_runtime_ms: float = 3000.0
    nodes_max: int = 3000
    goal_bias: float = 0.05
    rewire_radius_scale: float | None = None
    rewire_radius_cap: float | None = None
    edge_resolution: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.step <= 0 or self.edge_resolution <= 0:
            raise ValueError("step and edge_resolution must be positive")
        if self.max_iterations <= 0 or self.nodes_max <= 0 or self.max_runtime_ms <= 0:
            raise ValueError("budgets must be positive")
        if not 0 <= self.goal_bias <= 1:
            raise ValueError("goal_bias must lie in [0, 1]")


def default_rewire_scale(chain: SerialChain) -> float:
    """Shrinking-ball constant sized to the joint-box volume.

    Uses the usual unit-ball ratio so the (log n / n)^(1/m) ball keeps a
    nonvanishing expected neighbor count in any dimension.
    """
    m = chain.dof
    volume = float(np.prod(chain.upper - chain.lower))
    unit_ball = np.pi ** (m / 2) / math.gamma(m / 2 + 1)
    return 2.0 * (1.0 + 1.0 / m) ** (1.0 / m) * (volume / unit_ball) ** (1.0 / m)


class PlanContext:
    """Chain + collision checker + config bundle shared by planner loops."""

    def __init__(self, chain: SerialChain, world: World,
                 config: PlannerConfig, model: RobotSphereModel | None = None):
        self.chain = chain
        self.world = world
        self.config = config
        self.checker = CollisionChecker(chain, model, world)
        self.rewire_scale = (config.rewire_radius_scale
                             if config.rewire_radius_scale is not None
                             else default_rewire_scale(chain))
        self.rewire_cap = (config.rewire_radius_cap
                           if config.rewire_radius_cap is not None
                           else 4.0 * config.step)

    def near_radius(self, n_total: int) -> float:
        m = self.chain.dof
        if n_total <= 1:
            return 0.0
        ball = (np.log(n_total) / n_total) ** (1.0 / m)
        return min(self.rewire_scale * ball, self.rewire_cap)

    def edge_free(self, q_a, q_b) -> bool:
        return self.checker.edge_free(q_a, q_b, self.config.edge_resolution)


class ExtendStatus(enum.Enum):
    TRAPPED = "trapped"
    ADVANCED = "advanced"
    REACHED = "reached"


class Tree:
    """Rooted directed tree over joint configurations with cost-to-root."""

    def __init__(self, root: JointConfig, capacity: int = 512):
        root = np.asarray(root, dtype=float)
        self.dof = len(root)
        capacity = max(capacity, 4)
        self._configs = np.empty((capacity, self.dof))
        self._parents = np.full(capacity, -1, dtype=np.int64)
        self._costs = np.zeros(capacity)
        self._children: list[list[int]] = [[]]
        self.n = 1
        self._configs[0] = root

    # -- storage ------------------------------------------------------------

    def _grow(self) -> None:
        cap = len(self._costs) * 2
        configs = np.empty((cap, self.dof))
        configs[:self.n] = self._configs[:self.n]
        parents = np.full(cap, -1, dtype=np.int64)
        parents[:self.n] = self._parents[:self.n]
        costs = np.zeros(cap)
        costs[:self.n] = self._costs[:self.n]
        self._configs, self._parents, self._costs = configs, parents, costs

    def add(self, config: JointConfig, parent: int, edge_length: float) -> int:
        if self.n == len(self._costs):
            self._grow()
        idx = self.n
        self._configs[idx] = config
        self._parents[idx] = parent
        self._costs[idx] = self._costs[parent] + edge_length
        self._children.append([])
        self._children[parent].append(idx)
        self.n = idx + 1
        return idx

    # -- queries ------------------------------------------------------------

    @property
    def configs(self) -> np.ndarray:
        return self._configs[:self.n]

    @property
    def costs(self) -> np.ndarray:
        return self._costs[:self.n]

    def config(self, idx: int) -> np.ndarray:
        return self._configs[idx].copy()

    def parent(self, idx: int) -> int:
        return int(self._parents[idx])

    def cost(self, idx: int) -> float:
        return float(self._costs[idx])

    def nearest(self, q: JointConfig) -> int:
        """Index of the node nearest q; ties go to the lowest index."""
        diff = self._configs[:self.n] - q
        return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))

    def near(self, q: JointConfig, radius: float) -> np.ndarray:
        """Indices of all nodes within radius of q, ascending."""
        diff = self._configs[:self.n] - q
        d2 = np.einsum("ij,ij->i", diff, diff)
        return np.nonzero(d2 <= radius * radius)[0]

    def path_to_root(self, idx: int) -> list[int]:
        """Node indices from the root down to idx."""
        chain = [idx]
        while self._parents[chain[-1]] >= 0:
            chain.append(int(self._parents[chain[-1]]))
        chain.reverse()
        return chain

    def waypoints_from_root(self, idx: int) -> np.ndarray:
        return self._configs[self.path_to_root(idx)].copy()

    def is_ancestor(self, candidate: int, node: int) -> bool:
        while node >= 0:
            if node == candidate:
                return True
            node = int(self._parents[node])
        return False

    def reparent(self, idx: int, new_parent: int, edge_length: float) -> None:
        old = int(self._parents[idx])
        self._children[old].remove(idx)
        self._parents[idx] = new_parent
        self._children[new_parent].append(idx)
        delta = self._costs[new_parent] + edge_length - self._costs[idx]
        stack = [idx]
        while stack:
            node = stack.pop()
            self._costs[node] += delta
            stack.extend(self._children[node])


def extend(tree: Tree, target: JointConfig, ctx: PlanContext):
    """One RRT* extension of the tree toward target.

    Steps from the nearest node by at most ``step``; when the edge is
    free the new node is attached to the cost-minimizing parent among its
    neighborhood. Returns (status, new_index), with new_index None when
    trapped.
    """
    target = np.asarray(target, dtype=float)
    near_idx = tree.nearest(target)
    q_near = tree._configs[near_idx]
    dist = float(np.linalg.norm(target - q_near))
    if dist == 0.0:
        # target already in the tree; report it instead of duplicating
        return ExtendStatus.REACHED, near_idx
    if dist <= ctx.config.step:
        q_new = target.copy()
        status = ExtendStatus.REACHED
    else:
        q_new = q_near + (ctx.config.step / dist) * (target - q_near)
        status = ExtendStatus.ADVANCED
    if not ctx.edge_free(q_near, q_new):
        return ExtendStatus.TRAPPED, None

    # best-parent selection over the shrinking neighborhood
    neighbors = tree.near(q_new, ctx.near_radius(tree.n))
    best_parent = near_idx
    best_edge = float(np.linalg.norm(q_new - q_near))
    best_cost = tree._costs[near_idx] + best_edge
    if len(neighbors):
        diffs = tree._configs[neighbors] - q_new
        edges = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        totals = tree._costs[neighbors] + edges
        for pos in np.argsort(totals, kind="stable"):
            cand, edge, total = int(neighbors[pos]), float(edges[pos]), float(totals[pos])
            if total >= best_cost - 1e-12:
                break
            if ctx.edge_free(tree._configs[cand], q_new):
                best_parent, best_edge, best_cost = cand, edge, total
                break
    new_idx = tree.add(q_new, best_parent, best_edge)
    return status, new_idx


def rewire(tree: Tree, new_idx: int, ctx: PlanContext) -> None:
    """Reparent neighbors through the new node wherever that lowers cost.

    Cost updates propagate through the affected subtrees; no node's
    cost-to-root ever increases.
    """
    q_new = tree._configs[new_idx]
    cost_new = tree._costs[new_idx]
    neighbors = tree.near(q_new, ctx.near_radius(tree.n))
    if not len(neighbors):
        return
    parent = tree.parent(new_idx)
    diffs = tree._configs[neighbors] - q_new
    edges = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    improvable = cost_new + edges < tree._costs[neighbors] - 1e-12
    for pos in np.nonzero(improvable)[0]:
        idx = int(neighbors[pos])
        if idx == new_idx or idx == parent:
            continue
        edge = float(edges[pos])
        # costs may have dropped while reparenting earlier neighbors
        if cost_new + edge >= tree._costs[idx] - 1e-12:
            continue
        if tree.is_ancestor(idx, new_idx):
            continue
        if ctx.edge_free(q_new, tree._configs[idx]):
            tree.reparent(idx, new_idx, edge)


@dataclass
class Path:
    """Piecewise-linear joint-space plan; cost is its Euclidean arc length."""

    waypoints: np.ndarray    # (n_waypoints, dof)
    cost: float = field(init=False)

    def __post_init__(self):
        self.waypoints = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        self.cost = float(np.sum(np.linalg.norm(np.diff(self.waypoints, axis=0),
                                                axis=1)))

    def __len__(self) -> int:
        return len(self.waypoints)


def assemble_path(*segments: np.ndarray) -> Path:
    """Concatenate waypoint runs, dropping coincident joins."""
    rows = []
    for seg in segments:
        for wp in np.atleast_2d(seg):
            if rows and np.linalg.norm(rows[-1] - wp) < 1e-15:
                continue
            rows.append(np.asarray(wp, dtype=float))
    return Path(np.array(rows))


def save_path(path: Path, fh) -> None:
    """Structured-text dump: a cost header then one waypoint per line."""
    fh.write(f"# cost {path.cost:.12f}\n")
    for wp in path.waypoints:
        fh.write(" ".join(f"{v:.12f}" for v in wp) + "\n")


def load_path(fh) -> Path:
    waypoints = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        waypoints.append([float(v) for v in line.split()])
    return Path(np.array(waypoints))


def validate_tree(tree: Tree, atol: float = 1e-9) -> None:
    """Assert the structural invariants: single rooted acyclic tree with
    consistent costs. Raises AssertionError with a description otherwise."""
    assert tree.parent(0) == -1, "root must have no parent"
    assert abs(tree.cost(0)) <= atol, "root cost must be zero"
    for idx in range(1, tree.n):
        parent = tree.parent(idx)
        assert 0 <= parent < tree.n, f"node {idx} has invalid parent {parent}"
        edge = np.linalg.norm(tree._configs[idx] - tree._configs[parent])
        assert abs(tree.cost(idx) - tree.cost(parent) - edge) <= atol, \
            f"cost inconsistency at node {idx}"
        # every node must reach the root without cycling
        seen = set()
        node = idx
        while node != 0:
            assert node not in seen, f"cycle through node {node}"
            seen.add(node)
            node = tree.parent(node)


def validate_path(path: Path, ctx: PlanContext, atol: float = 1e-9) -> None:
    """Re-verify a path independently: cost arithmetic and every edge."""
    total = 0.0
    for a, b in zip(path.waypoints[:-1], path.waypoints[1:]):
        total += float(np.linalg.norm(b - a))
        assert ctx.edge_free(a, b), "path edge is not collision-free"
    assert abs(total - path.cost) <= atol, "path cost does not match waypoints"
