"""Baseline planners: single-tree RRT* and bidirectional RRT*-Connect.

Both are anytime: after the first solution they keep growing and rewiring
until the iteration, node, or wall-clock budget runs out, recording the
incumbent best cost at every iteration. Timing spans the growth loop only;
data-structure setup (and jit warmup) happens before the clock starts.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .collision import RobotSphereModel, World
from .kinematics import JointConfig, SerialChain
from .tree import (ExtendStatus, Path, PlanContext, PlannerConfig, Tree,
                   assemble_path, extend, rewire)

_now = time.perf_counter  # indirection so tests can fake the clock


@dataclass
class PlanResult:
    """Outcome of one planner run plus its per-iteration incumbent trace."""

    success: bool
    path: Path | None
    trace: list[tuple[int, float, float]]   # (iteration, wall_ms, best_cost)
    iterations: int
    nodes: int
    node_counts: list[int]
    first_iteration: int | None = None
    first_ms: float | None = None
    first_cost: float | None = None
    final_cost: float | None = None
    final_ms: float | None = None
    setup_ms: float = 0.0
    plan_ms: float = 0.0
    goal_tree: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return self.path.cost if self.path is not None else float("inf")


class _Incumbent:
    """Tracks the best cost seen so far and the trace bookkeeping."""

    def __init__(self):
        self.best = float("inf")
        self.first_iteration = None
        self.first_ms = None
        self.first_cost = None
        self.final_ms = None
        self.final_iteration = None

    def offer(self, cost: float, iteration: int, ms: float) -> bool:
        if cost >= self.best:
            return False
        self.best = cost
        if self.first_iteration is None:
            self.first_iteration = iteration
            self.first_ms = ms
            self.first_cost = cost
        self.final_ms = ms
        self.final_iteration = iteration
        return True

    def fill(self, result: PlanResult) -> None:
        result.first_iteration = self.first_iteration
        result.first_ms = self.first_ms
        result.first_cost = self.first_cost
        if self.best < float("inf"):
            result.final_cost = self.best
            result.final_ms = self.final_ms


def _trivial_result(q_start: np.ndarray, setup_ms: float) -> PlanResult:
    path = Path(np.array([q_start]))
    result = PlanResult(True, path, [(0, 0.0, 0.0)], 0, 1, [1],
                        first_iteration=0, first_ms=0.0, first_cost=0.0,
                        final_cost=0.0, final_ms=0.0, setup_ms=setup_ms)
    return result


def _connect_config(tree: Tree, target: np.ndarray, ctx: PlanContext):
    """Insert ``target`` as a node with best-parent selection, or None."""
    neighbors = tree.near(target, max(ctx.near_radius(tree.n), ctx.config.step))
    if not len(neighbors):
        return None
    diffs = tree.configs[neighbors] - target
    edges = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    totals = tree.costs[neighbors] + edges
    for pos in np.argsort(totals, kind="stable"):
        cand, edge = int(neighbors[pos]), float(edges[pos])
        if edge == 0.0:
            return cand
        if ctx.edge_free(tree.configs[cand], target):
            return tree.add(target.copy(), cand, edge)
    return None


def plan_rrt_star(chain: SerialChain, world: World, q_start: JointConfig,
                  q_goal: JointConfig, config: PlannerConfig | None = None,
                  model: RobotSphereModel | None = None) -> PlanResult:
    """Single-tree RRT* toward one goal configuration.

    Samples the goal with probability ``goal_bias``; when a new node lands
    within ``step`` of the goal and the bridging edge is free, the goal
    joins the tree and subsequent rewiring keeps improving its cost.
    """
    config = config or PlannerConfig()
    setup_start = _now()
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    ctx = PlanContext(chain, world, config, model)
    ctx.checker.warmup()
    rng = np.random.default_rng(config.seed)
    setup_ms = (_now() - setup_start) * 1000.0
    if np.linalg.norm(q_goal - q_start) < 1e-12:
        return _trivial_result(q_start, setup_ms)

    tree = Tree(q_start)
    goal_idx: int | None = None
    inc = _Incumbent()
    trace: list[tuple[int, float, float]] = []
    t0 = _now()
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        ms = (_now() - t0) * 1000.0
        if ms > config.max_runtime_ms or tree.n >= config.nodes_max:
            iteration -= 1
            break
        if rng.uniform() < config.goal_bias:
            target = q_goal
        else:
            target = rng.uniform(chain.lower, chain.upper)
        status, new_idx = extend(tree, target, ctx)
        if new_idx is not None:
            rewire(tree, new_idx, ctx)
            if goal_idx is None:
                gap = float(np.linalg.norm(tree.configs[new_idx] - q_goal))
                if gap == 0.0:
                    goal_idx = new_idx
                elif gap <= config.step and ctx.edge_free(tree.configs[new_idx], q_goal):
                    goal_idx = _connect_config(tree, q_goal, ctx)
                    if goal_idx is not None:
                        rewire(tree, goal_idx, ctx)
        ms = (_now() - t0) * 1000.0
        if goal_idx is not None:
            inc.offer(tree.cost(goal_idx), iteration, ms)
        trace.append((iteration, ms, inc.best))

    plan_ms = (_now() - t0) * 1000.0
    path = None
    if goal_idx is not None:
        path = assemble_path(tree.waypoints_from_root(goal_idx))
    result = PlanResult(path is not None, path, trace, iteration, tree.n,
                        [tree.n], setup_ms=setup_ms, plan_ms=plan_ms)
    inc.fill(result)
    return result


class _BridgeSet:
    """Verified connections between two trees, re-costed as trees rewire."""

    def __init__(self):
        self._seen: set[tuple[int, int]] = set()
        self.a_idx: list[int] = []
        self.b_idx: list[int] = []
        self.length: list[float] = []

    def seen(self, ia: int, ib: int) -> bool:
        return (ia, ib) in self._seen

    def add(self, ia: int, ib: int, length: float) -> bool:
        key = (ia, ib)
        if key in self._seen:
            return False
        self._seen.add(key)
        self.a_idx.append(ia)
        self.b_idx.append(ib)
        self.length.append(length)
        return True

    def best(self, costs_a: np.ndarray, costs_b: np.ndarray):
        """(cost, pair position) of the cheapest bridge, or (inf, None)."""
        if not self.a_idx:
            return float("inf"), None
        totals = (costs_a[self.a_idx] + np.asarray(self.length)
                  + costs_b[self.b_idx])
        pos = int(np.argmin(totals))
        return float(totals[pos]), pos


def _bidirectional_path(tree_start: Tree, tree_goal: Tree, ia: int, ib: int) -> Path:
    return assemble_path(tree_start.waypoints_from_root(ia),
                         tree_goal.waypoints_from_root(ib)[::-1])


def plan_rrt_star_connect(chain: SerialChain, world: World,
                          q_start: JointConfig, q_goal: JointConfig,
                          config: PlannerConfig | None = None,
                          model: RobotSphereModel | None = None) -> PlanResult:
    """Bidirectional RRT*: a start-rooted and a goal-rooted tree grown
    alternately, each with RRT* extension and rewiring, joined by free
    bridging edges whenever their frontiers come within ``step``."""
    config = config or PlannerConfig()
    setup_start = _now()
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    ctx = PlanContext(chain, world, config, model)
    ctx.checker.warmup()
    rng = np.random.default_rng(config.seed)
    setup_ms = (_now() - setup_start) * 1000.0
    if np.linalg.norm(q_goal - q_start) < 1e-12:
        return _trivial_result(q_start, setup_ms)

    trees = [Tree(q_start), Tree(q_goal)]
    bridges = _BridgeSet()
    inc = _Incumbent()
    trace: list[tuple[int, float, float]] = []
    t0 = _now()
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        ms = (_now() - t0) * 1000.0
        if ms > config.max_runtime_ms or trees[0].n + trees[1].n >= config.nodes_max:
            iteration -= 1
            break
        side = (iteration - 1) % 2
        active, other = trees[side], trees[1 - side]
        if rng.uniform() < config.goal_bias:
            target = other.configs[0]
        else:
            target = rng.uniform(chain.lower, chain.upper)
        status, new_idx = extend(active, target, ctx)
        if new_idx is not None:
            rewire(active, new_idx, ctx)
            q_new = active.configs[new_idx]
            nb = other.nearest(q_new)
            gap = float(np.linalg.norm(other.configs[nb] - q_new))
            if gap <= config.step and (gap == 0.0 or ctx.edge_free(q_new, other.configs[nb])):
                ia, ib = (new_idx, nb) if side == 0 else (nb, new_idx)
                bridges.add(ia, ib, gap)
        ms = (_now() - t0) * 1000.0
        best, _ = bridges.best(trees[0].costs, trees[1].costs)
        inc.offer(best, iteration, ms)
        trace.append((iteration, ms, inc.best))

    plan_ms = (_now() - t0) * 1000.0
    best, pos = bridges.best(trees[0].costs, trees[1].costs)
    path = None
    if pos is not None:
        path = _bidirectional_path(trees[0], trees[1],
                                   bridges.a_idx[pos], bridges.b_idx[pos])
    result = PlanResult(path is not None, path, trace, iteration,
                        trees[0].n + trees[1].n, [trees[0].n, trees[1].n],
                        setup_ms=setup_ms, plan_ms=plan_ms)
    inc.fill(result)
    return result
