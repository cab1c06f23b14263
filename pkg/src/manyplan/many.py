"""Parallel many-goal RRT*: one tree per IK solution plus a start tree.

Goal-rooted trees grow independently (uniform sampling, lightly biased
toward the start). The start tree alternates between exploring the joint
box and exploiting the goal trees' frontiers; whenever it lands near a
goal-tree node a bridging edge is verified and the incumbent solution
updated. With a single goal configuration the scheme reduces to the
bidirectional baseline.

The default scheduler is a deterministic single-worker round robin; pass
``workers > 1`` to grow goal trees on their own threads (the collision
kernels release the GIL).
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .collision import RobotSphereModel, World
from .ik import (GoalSet, IkSettings, SeedDatabase, sample_goal_set,
                 solve_ik_restarts)
from .kinematics import JointConfig, Pose, SerialChain
from .planners import PlanResult, _BridgeSet, _Incumbent, _trivial_result
from .tree import (PlanContext, PlannerConfig, Tree, assemble_path, extend,
                   rewire)

_now = time.perf_counter


@dataclass
class ManyConfig:
    """Knobs specific to many-goal planning.

    ``gamma0`` is the probability that a start-tree iteration exploits the
    goal side (goal configurations and freshly added goal-tree nodes)
    instead of sampling the joint box uniformly. ``goal_tree_bias`` is the
    goal trees' probability of aiming at the start configuration; it is
    kept near zero so those trees mostly explore. ``connect_tolerance``
    defaults to the extension step.
    """

    base: PlannerConfig = field(default_factory=PlannerConfig)
    k: int = 10
    gamma0: float = 0.2
    goal_tree_bias: float = 0.02
    connect_tolerance: float | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma0 < 1.0:
            raise ValueError("gamma0 must lie strictly between 0 and 1")
        if not 0.0 <= self.goal_tree_bias <= 1.0:
            raise ValueError("goal_tree_bias must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def tolerance(self) -> float:
        return self.connect_tolerance if self.connect_tolerance is not None \
            else self.base.step


@dataclass
class SolutionRecord:
    """Incumbent solution across all goal trees; cost is non-increasing."""

    best_cost: float = float("inf")
    path: object = None            # Path, materialized at termination
    goal_tree: int | None = None
    start_node: int | None = None
    goal_node: int | None = None
    first_iteration: int | None = None
    first_ms: float | None = None
    latest_iteration: int | None = None
    latest_ms: float | None = None

    def offer(self, cost: float, tree_idx: int, start_node: int,
              goal_node: int, iteration: int, ms: float) -> bool:
        """Accept the candidate iff it strictly beats the incumbent."""
        if cost >= self.best_cost:
            return False
        self.best_cost = cost
        self.goal_tree = tree_idx
        self.start_node = start_node
        self.goal_node = goal_node
        if self.first_iteration is None:
            self.first_iteration = iteration
            self.first_ms = ms
        self.latest_iteration = iteration
        self.latest_ms = ms
        return True


def iteration_count(node_counts, n: int) -> int:
    """Iteration index from per-tree node counts: the average growth of the
    n+1 goal trees and the start tree, on a two-nodes-per-iteration scale."""
    node_counts = list(node_counts)
    if len(node_counts) != n + 2:
        raise ValueError(f"expected {n + 2} node counts, got {len(node_counts)}")
    return int(2 * sum(node_counts) // (n + 1))


def node_budget(nodes_max: int, n: int) -> int:
    """Total node allowance: nodes_max/2 per tree pair, n+1 pairs."""
    if nodes_max % 2 != 0:
        raise ValueError("nodes_max must be even")
    return (nodes_max // 2) * (n + 1)


def sample_vertex(goal_trees, goal_configs, rng: np.random.Generator,
                  gamma0: float, lower: np.ndarray, upper: np.ndarray,
                  new_nodes=None) -> np.ndarray:
    """Mixed start-tree sampler.

    With probability 1 - gamma0 the sample is uniform over the joint box
    (exploration). Otherwise it is drawn uniformly from the goal
    configurations plus the goal-tree nodes added since the previous
    start-tree iteration; if no nodes were added, from all goal-tree nodes.
    """
    if rng.uniform() > gamma0:
        return rng.uniform(lower, upper)
    if new_nodes:
        pool = list(goal_configs) + list(new_nodes)
        return np.array(pool[rng.integers(len(pool))], dtype=float, copy=True)
    counts = [t.n for t in goal_trees]
    pick = int(rng.integers(sum(counts)))
    for tree, count in zip(goal_trees, counts):
        if pick < count:
            return tree.config(pick)
        pick -= count
    raise AssertionError("unreachable")


def conn_tree(start_tree: Tree, goal_trees, start_idx: int, ctx: PlanContext,
              tolerance: float, record: SolutionRecord,
              registry=None, iteration: int = 0, ms: float = 0.0) -> SolutionRecord:
    """Try to bridge a just-added start-tree node into every goal tree.

    For each goal tree with nodes within ``tolerance`` of the new node,
    the bridging edge is collision-checked; surviving candidates are
    offered to the record (candidate cost = start-side cost + bridge +
    goal-side cost). ``registry`` optionally collects the verified pairs
    so their costs can be re-evaluated as the trees rewire.
    """
    q_new = start_tree.configs[start_idx]
    cost_start = start_tree.cost(start_idx)
    for j, gt in enumerate(goal_trees):
        hits = gt.near(q_new, tolerance)
        for nb in hits:
            nb = int(nb)
            gap = float(np.linalg.norm(gt.configs[nb] - q_new))
            if registry is not None and registry[j].seen(start_idx, nb):
                continue
            if gap > 0.0 and not ctx.edge_free(q_new, gt.configs[nb]):
                continue
            if registry is not None:
                registry[j].add(start_idx, nb, gap)
            record.offer(cost_start + gap + gt.cost(nb), j, start_idx, nb,
                         iteration, ms)
    return record


def _conn_from_goal(start_tree: Tree, goal_tree: Tree, tree_idx: int,
                    goal_idx: int, ctx: PlanContext, tolerance: float,
                    record: SolutionRecord, registry,
                    iteration: int, ms: float) -> None:
    """The symmetric half of connection checking: a just-added goal-tree
    node is bridged to nearby start-tree nodes, so bridges are found at
    the same rate the trees grow on either side."""
    q_new = goal_tree.configs[goal_idx]
    cost_goal = goal_tree.cost(goal_idx)
    for nb in start_tree.near(q_new, tolerance):
        nb = int(nb)
        if registry[tree_idx].seen(nb, goal_idx):
            continue
        gap = float(np.linalg.norm(start_tree.configs[nb] - q_new))
        if gap > 0.0 and not ctx.edge_free(q_new, start_tree.configs[nb]):
            continue
        registry[tree_idx].add(nb, goal_idx, gap)
        record.offer(start_tree.cost(nb) + gap + cost_goal, tree_idx, nb,
                     goal_idx, iteration, ms)


def _materialize(record: SolutionRecord, start_tree: Tree, goal_trees) -> None:
    if record.goal_tree is None:
        return
    gt = goal_trees[record.goal_tree]
    record.path = assemble_path(
        start_tree.waypoints_from_root(record.start_node),
        gt.waypoints_from_root(record.goal_node)[::-1])


def _result_from_record(record: SolutionRecord, start_tree: Tree, goal_trees,
                        trace, iterations: int, setup_ms: float,
                        plan_ms: float) -> PlanResult:
    _materialize(record, start_tree, goal_trees)
    counts = [t.n for t in goal_trees] + [start_tree.n]
    result = PlanResult(record.path is not None, record.path, trace,
                        iterations, sum(counts), counts,
                        first_iteration=record.first_iteration,
                        first_ms=record.first_ms,
                        setup_ms=setup_ms, plan_ms=plan_ms,
                        goal_tree=record.goal_tree,
                        extra={"record": record})
    if record.best_cost < float("inf"):
        result.final_cost = record.best_cost
        result.final_ms = record.latest_ms
    return result


def plan_many_from_goals(chain: SerialChain, world: World,
                         q_start: JointConfig, goal_configs,
                         config: ManyConfig | None = None,
                         model: RobotSphereModel | None = None,
                         workers: int = 1) -> PlanResult:
    """Grow one goal-rooted tree per goal configuration plus a start tree.

    Terminates at the iteration budget (per the node-count iteration
    formula), the total node budget, or the wall-clock limit, whichever
    comes first, and returns the incumbent best path across all goal
    trees together with the per-iteration trace.
    """
    config = config or ManyConfig()
    setup_start = _now()
    q_start = np.asarray(q_start, dtype=float)
    goal_configs = [np.asarray(g, dtype=float) for g in goal_configs]
    if not goal_configs:
        raise ValueError("need at least one goal configuration")
    ctx = PlanContext(chain, world, config.base, model)
    ctx.checker.warmup()
    setup_ms = (_now() - setup_start) * 1000.0
    for j, g in enumerate(goal_configs):
        if np.linalg.norm(g - q_start) < 1e-12:
            result = _trivial_result(q_start, setup_ms)
            result.goal_tree = j
            return result
    if workers > 1:
        return _plan_many_threaded(chain, q_start, goal_configs, config, ctx,
                                   setup_ms, workers)
    return _plan_many_roundrobin(chain, q_start, goal_configs, config, ctx,
                                 setup_ms)


def _plan_many_roundrobin(chain, q_start, goal_configs, config: ManyConfig,
                          ctx: PlanContext, setup_ms: float) -> PlanResult:
    base = config.base
    n = len(goal_configs) - 1
    budget = node_budget(base.nodes_max, n)
    tol = config.tolerance
    rng = np.random.default_rng(base.seed)
    goal_trees = [Tree(g) for g in goal_configs]
    start_tree = Tree(q_start)
    registry = [_BridgeSet() for _ in goal_trees]
    record = SolutionRecord()
    inc = _Incumbent()
    trace: list[tuple[int, float, float]] = []

    def counts():
        return [t.n for t in goal_trees] + [start_tree.n]

    t0 = _now()
    it = iteration_count(counts(), n)
    # goals already within connect tolerance of the start are a solution
    conn_tree(start_tree, goal_trees, 0, ctx, tol, record, registry, it, 0.0)
    if record.best_cost < float("inf"):
        inc.offer(record.best_cost, it, 0.0)
        trace.append((it, 0.0, record.best_cost))
    while True:
        ms = (_now() - t0) * 1000.0
        total = sum(counts())
        if it >= base.max_iterations or ms > base.max_runtime_ms or total >= budget:
            break

        new_feed = []
        for j, gt in enumerate(goal_trees):
            if total >= budget:
                break
            if rng.uniform() < config.goal_tree_bias:
                target = q_start
            else:
                target = rng.uniform(chain.lower, chain.upper)
            grew = gt.n
            status, idx = extend(gt, target, ctx)
            if idx is not None and gt.n > grew:
                rewire(gt, idx, ctx)
                new_feed.append(gt.config(idx))
                total += 1
                _conn_from_goal(start_tree, gt, j, idx, ctx, tol, record,
                                registry, it, (_now() - t0) * 1000.0)

        if total < budget:
            v = sample_vertex(goal_trees, goal_configs, rng, config.gamma0,
                              chain.lower, chain.upper, new_feed)
            status, idx = extend(start_tree, v, ctx)
            if idx is not None:
                ms = (_now() - t0) * 1000.0
                it = iteration_count(counts(), n)
                conn_tree(start_tree, goal_trees, idx, ctx, tol, record,
                          registry, it, ms)
                rewire(start_tree, idx, ctx)

        # re-evaluate verified bridges: rewiring keeps lowering their costs
        it = iteration_count(counts(), n)
        ms = (_now() - t0) * 1000.0
        for j, (gt, reg) in enumerate(zip(goal_trees, registry)):
            cost, pos = reg.best(start_tree.costs, gt.costs)
            if pos is not None and cost < record.best_cost:
                record.offer(cost, j, reg.a_idx[pos], reg.b_idx[pos], it, ms)
        if record.best_cost < float("inf"):
            inc.offer(record.best_cost, it, ms)
        trace.append((it, ms, record.best_cost))

    plan_ms = (_now() - t0) * 1000.0
    result = _result_from_record(record, start_tree, goal_trees, trace,
                                 it, setup_ms, plan_ms)
    result.first_cost = inc.first_cost
    return result


def _plan_many_threaded(chain, q_start, goal_configs, config: ManyConfig,
                        ctx: PlanContext, setup_ms: float,
                        workers: int) -> PlanResult:
    """Goal trees grow on worker threads; the start tree polls their
    append-only feeds. Valid but not deterministic."""
    base = config.base
    n = len(goal_configs) - 1
    budget = node_budget(base.nodes_max, n)
    tol = config.tolerance
    root_rng = np.random.default_rng(base.seed)
    tree_rngs = root_rng.spawn(len(goal_configs) + 1)
    goal_trees = [Tree(g) for g in goal_configs]
    start_tree = Tree(q_start)
    feeds: list[list[np.ndarray]] = [[] for _ in goal_trees]
    seen = [0 for _ in goal_trees]
    stop = threading.Event()
    lock = threading.Lock()
    registry = [_BridgeSet() for _ in goal_trees]
    record = SolutionRecord()
    inc = _Incumbent()
    trace: list[tuple[int, float, float]] = []

    def grow(j: int):
        gt = goal_trees[j]
        rng = tree_rngs[j]
        while not stop.is_set():
            if sum(t.n for t in goal_trees) + start_tree.n >= budget:
                break
            if rng.uniform() < config.goal_tree_bias:
                target = q_start
            else:
                target = rng.uniform(chain.lower, chain.upper)
            grew = gt.n
            status, idx = extend(gt, target, ctx)
            if idx is not None and gt.n > grew:
                rewire(gt, idx, ctx)
                feeds[j].append(gt.config(idx))
                with lock:
                    _conn_from_goal(start_tree, gt, j, idx, ctx, tol,
                                    record, registry, 0,
                                    (_now() - t0) * 1000.0)

    threads = [threading.Thread(target=grow, args=(j,), daemon=True)
               for j in range(len(goal_trees))]
    t0 = _now()
    conn_tree(start_tree, goal_trees, 0, ctx, tol, record, registry, 0, 0.0)
    for th in threads:
        th.start()
    rng = tree_rngs[-1]
    it = 0
    try:
        while True:
            ms = (_now() - t0) * 1000.0
            counts = [t.n for t in goal_trees] + [start_tree.n]
            it = iteration_count(counts, n)
            if it >= base.max_iterations or ms > base.max_runtime_ms \
                    or sum(counts) >= budget:
                break
            new_nodes = []
            for j, feed in enumerate(feeds):
                upto = len(feed)
                new_nodes.extend(feed[seen[j]:upto])
                seen[j] = upto
            v = sample_vertex(goal_trees, goal_configs, rng, config.gamma0,
                              chain.lower, chain.upper, new_nodes)
            status, idx = extend(start_tree, v, ctx)
            if idx is not None:
                ms = (_now() - t0) * 1000.0
                with lock:
                    conn_tree(start_tree, goal_trees, idx, ctx, tol, record,
                              registry, it, ms)
                rewire(start_tree, idx, ctx)
            ms = (_now() - t0) * 1000.0
            with lock:
                for j, (gt, reg) in enumerate(zip(goal_trees, registry)):
                    cost, pos = reg.best(start_tree.costs, gt.costs)
                    if pos is not None and cost < record.best_cost:
                        record.offer(cost, j, reg.a_idx[pos], reg.b_idx[pos],
                                     it, ms)
                if record.best_cost < float("inf"):
                    inc.offer(record.best_cost, it, ms)
                trace.append((it, ms, record.best_cost))
    finally:
        stop.set()
        for th in threads:
            th.join()
    plan_ms = (_now() - t0) * 1000.0
    result = _result_from_record(record, start_tree, goal_trees, trace,
                                 it, setup_ms, plan_ms)
    result.first_cost = inc.first_cost
    return result


def plan_many(chain: SerialChain, world: World, q_start: JointConfig,
              target: Pose, db: SeedDatabase,
              config: ManyConfig | None = None,
              model: RobotSphereModel | None = None,
              ik_settings: IkSettings | None = None,
              dedup_eps: float = 1e-4, workers: int = 1) -> PlanResult:
    """Plan from a start configuration to a task-space target pose.

    Samples up to ``config.k`` goal configurations from the target's
    preimage (seed database + seeded IK + deduplication), then runs the
    many-goal planner over them. Raises NoReachableGoalError when the IK
    stage produces nothing; budget exhaustion returns an unsuccessful
    result instead.
    """
    config = config or ManyConfig()
    ik_start = _now()
    # one start-seeded solution joins the candidate pool, so the goal set
    # covers at least the branch a single-solution planner would target
    naive = solve_ik_restarts(chain, target, q_start, ik_settings,
                              seed=config.base.seed)
    extras = [naive.config] if naive.success else []
    goals = sample_goal_set(chain, world, db, target, config.k,
                            ik_settings, dedup_eps, model,
                            extra_seeds=extras)
    ik_ms = (_now() - ik_start) * 1000.0
    result = plan_many_from_goals(chain, world, q_start, list(goals.configs),
                                  config, model, workers)
    result.setup_ms += ik_ms
    result.extra["goal_set"] = goals
    return result
