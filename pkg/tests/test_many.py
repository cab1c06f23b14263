import numpy as np
import pytest

import manyplan as mp
from manyplan.bench import bifurcated_instance
from manyplan.many import (ManyConfig, SolutionRecord, conn_tree,
                           iteration_count, node_budget, plan_many,
                           plan_many_from_goals, sample_vertex)
from manyplan.planners import _BridgeSet
from manyplan.tree import PlanContext, PlannerConfig, Tree, validate_path, validate_tree


def small_config(**kwargs):
    defaults = dict(step=0.1, max_iterations=1000, max_runtime_ms=30_000,
                    nodes_max=2000, seed=0)
    defaults.update(kwargs)
    return ManyConfig(base=PlannerConfig(**defaults))


# ---------------------------------------------------------------------------
# iteration / budget formulas
# ---------------------------------------------------------------------------

def test_iteration_count_examples():
    assert iteration_count([0, 0], 0) == 0
    assert iteration_count([5, 5], 0) == 20
    assert iteration_count([100] * 12, 10) == 218
    with pytest.raises(ValueError):
        iteration_count([1, 2, 3], 0)


def test_node_budget_examples():
    assert node_budget(3000, 10) == 16500
    assert node_budget(3000, 0) == 1500
    assert node_budget(4, 1) == 4
    with pytest.raises(ValueError):
        node_budget(3, 0)


# ---------------------------------------------------------------------------
# the mixed sampler
# ---------------------------------------------------------------------------

def test_sampler_explore_limit(planar):
    rng = np.random.default_rng(0)
    goals = [np.array([1.0, 1.0])]
    trees = [Tree(goals[0])]
    draws = np.array([sample_vertex(trees, goals, rng, 1e-9, planar.lower,
                                    planar.upper) for _ in range(10_000)])
    width = planar.upper - planar.lower
    sigma_mean = (width / np.sqrt(12)) / np.sqrt(len(draws))
    center = (planar.upper + planar.lower) / 2
    assert np.all(np.abs(draws.mean(axis=0) - center) <= 3 * sigma_mean)


def test_sampler_exploit_limit(planar):
    rng = np.random.default_rng(1)
    goal = np.array([0.5, -0.5])
    trees = [Tree(goal)]
    for _ in range(200):
        v = sample_vertex(trees, [goal], rng, 1.0 - 1e-12, planar.lower,
                          planar.upper, new_nodes=[])
        np.testing.assert_array_equal(v, goal)


def test_sampler_exploit_fraction_matches_gamma(planar):
    rng = np.random.default_rng(2)
    gamma0 = 0.3
    goals = [np.array([1.0, 1.0]), np.array([-1.0, 1.0])]
    trees = [Tree(g) for g in goals]
    n = 100_000
    exploit = 0
    for _ in range(n):
        v = sample_vertex(trees, goals, rng, gamma0, planar.lower,
                          planar.upper, new_nodes=[])
        if any(np.array_equal(v, g) for g in goals):
            exploit += 1
    sigma = np.sqrt(gamma0 * (1 - gamma0) / n)
    assert abs(exploit / n - gamma0) <= 3 * sigma


def test_sampler_prefers_fresh_nodes(planar):
    rng = np.random.default_rng(3)
    goals = [np.array([1.0, 1.0])]
    trees = [Tree(goals[0])]
    fresh = [np.array([0.25, 0.25])]
    seen_fresh = 0
    for _ in range(2000):
        v = sample_vertex(trees, goals, rng, 1.0 - 1e-12, planar.lower,
                          planar.upper, new_nodes=fresh)
        assert any(np.array_equal(v, c) for c in (goals[0], fresh[0]))
        seen_fresh += np.array_equal(v, fresh[0])
    assert 800 <= seen_fresh <= 1200  # uniform over the two-element pool


# ---------------------------------------------------------------------------
# conn_tree
# ---------------------------------------------------------------------------

def _ctx(chain, world=None, **kwargs):
    kwargs.setdefault("step", 0.1)
    return PlanContext(chain, world or mp.empty_world(), PlannerConfig(**kwargs))


def test_conn_tree_coincident_root(planar):
    ctx = _ctx(planar)
    start = Tree(np.zeros(2))
    i = start.add(np.array([0.5, 0.0]), 0, 0.5)
    goal = Tree(np.array([0.5, 0.0]))
    record = conn_tree(start, [goal], i, ctx, 0.1, SolutionRecord())
    assert record.best_cost == pytest.approx(0.5)
    assert record.goal_tree == 0


def test_conn_tree_blocked_bridge_leaves_record():
    inst = bifurcated_instance()
    ctx = _ctx(inst.chain, inst.world)
    # nodes on opposite sides of the blocked first-joint band at 100 deg
    start = Tree(np.deg2rad([85.0, 45.0]))
    goal = Tree(np.deg2rad([113.0, 45.0]))
    record = conn_tree(start, [goal], 0, ctx, tolerance=1.0,
                       record=SolutionRecord())
    assert record.best_cost == np.inf
    assert record.goal_tree is None


def test_conn_tree_matches_pair_enumeration(planar, rng):
    ctx = _ctx(planar, rewire_radius_scale=1e-9)  # keep trees as built
    tol = 0.35
    start = Tree(rng.uniform(-1, 1, 2))
    for _ in range(30):
        parent = int(rng.integers(start.n))
        cfg = start.config(parent) + rng.uniform(-0.3, 0.3, 2)
        start.add(cfg, parent, float(np.linalg.norm(cfg - start.config(parent))))
    goal_trees = []
    for g in range(3):
        gt = Tree(rng.uniform(-1, 1, 2))
        for _ in range(20):
            parent = int(rng.integers(gt.n))
            cfg = gt.config(parent) + rng.uniform(-0.3, 0.3, 2)
            gt.add(cfg, parent, float(np.linalg.norm(cfg - gt.config(parent))))
        goal_trees.append(gt)

    record = SolutionRecord()
    registry = [_BridgeSet() for _ in goal_trees]
    for i in range(start.n):
        conn_tree(start, goal_trees, i, ctx, tol, record, registry)

    # oracle: enumerate every (start node, goal node) pair within tolerance
    best = np.inf
    for i in range(start.n):
        for gt in goal_trees:
            for k in range(gt.n):
                gap = np.linalg.norm(start.config(i) - gt.config(k))
                if gap <= tol:
                    best = min(best, start.cost(i) + gap + gt.cost(k))
    assert record.best_cost == pytest.approx(best)


def test_record_updates_only_on_strict_improvement():
    record = SolutionRecord()
    assert record.offer(5.0, 0, 1, 2, 10, 100.0)
    assert not record.offer(5.0, 1, 3, 4, 11, 110.0)
    assert not record.offer(6.0, 1, 3, 4, 11, 110.0)
    assert record.offer(4.0, 1, 3, 4, 12, 120.0)
    assert record.first_iteration == 10 and record.latest_iteration == 12
    assert record.goal_tree == 1


# ---------------------------------------------------------------------------
# plan_many
# ---------------------------------------------------------------------------

def test_single_goal_contract_matches_connect(planar):
    # with one goal the scheme is the bidirectional baseline's two-tree
    # arrangement: same instances succeed and fail
    inst = bifurcated_instance()
    for seed, goal, expected in [(0, inst.q_reachable, True),
                                 (1, inst.q_reachable, True),
                                 (0, inst.q_unreachable, False),
                                 (1, inst.q_unreachable, False)]:
        cfg = PlannerConfig(step=0.1, max_iterations=1200,
                            max_runtime_ms=10_000, nodes_max=2400, seed=seed)
        many = plan_many_from_goals(inst.chain, inst.world, inst.q_start,
                                    [goal], ManyConfig(base=cfg))
        connect = mp.plan_rrt_star_connect(inst.chain, inst.world,
                                           inst.q_start, goal, cfg)
        assert many.success == connect.success == expected


def test_bifurcated_world_reaches_the_viable_branch():
    inst = bifurcated_instance()
    db = mp.build_seed_database(inst.chain, inst.world, 100_000, seed=0)
    cfg = small_config(max_iterations=3000, nodes_max=3000, seed=4)
    result = plan_many(inst.chain, inst.world, inst.q_start, inst.target, db,
                       cfg, ik_settings=inst.ik_settings)
    assert result.success
    # terminal waypoint lies on the reachable elbow branch
    terminal = result.path.waypoints[-1]
    assert np.linalg.norm(terminal - inst.q_reachable) < 0.1
    tip = mp.forward_kinematics(inst.chain, terminal).position
    assert np.linalg.norm(tip - inst.target.position) <= 1e-4
    ctx = PlanContext(inst.chain, inst.world, cfg.base)
    validate_path(result.path, ctx)


def test_converges_to_nearer_of_two_goals(planar):
    q0 = np.array([0.0, 0.0])
    near_goal = np.array([0.9, 0.0])
    far_goal = np.array([-2.45, 0.8])   # about 3x the distance
    cfg = ManyConfig(base=PlannerConfig(step=0.1, max_iterations=10_000,
                                        max_runtime_ms=60_000,
                                        nodes_max=10_000, seed=6))
    result = plan_many_from_goals(planar, mp.empty_world(), q0,
                                  [far_goal, near_goal], cfg)
    assert result.success
    assert result.goal_tree == 1
    d = np.linalg.norm(near_goal - q0)
    assert result.path.cost <= 1.05 * d


def test_deterministic_single_worker():
    inst = bifurcated_instance()
    goals = [inst.q_reachable, inst.q_unreachable]
    cfg = small_config(seed=9, max_iterations=600)
    a = plan_many_from_goals(inst.chain, inst.world, inst.q_start, goals, cfg)
    b = plan_many_from_goals(inst.chain, inst.world, inst.q_start, goals, cfg)
    assert [(i, c) for i, _, c in a.trace] == [(i, c) for i, _, c in b.trace]
    assert a.node_counts == b.node_counts
    if a.success:
        np.testing.assert_array_equal(a.path.waypoints, b.path.waypoints)


def test_trace_iterations_and_costs_monotone():
    inst = bifurcated_instance()
    goals = [inst.q_reachable, inst.q_unreachable]
    result = plan_many_from_goals(inst.chain, inst.world, inst.q_start, goals,
                                  small_config(seed=3))
    iters = [i for i, _, _ in result.trace]
    costs = [c for _, _, c in result.trace]
    assert iters == sorted(iters)
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_all_trees_valid_at_termination(monkeypatch):
    inst = bifurcated_instance()
    goals = [inst.q_reachable, inst.q_unreachable]
    seen = {}
    from manyplan.many import _result_from_record as real

    def capture(record, start_tree, goal_trees, *args, **kwargs):
        seen["trees"] = [start_tree] + list(goal_trees)
        return real(record, start_tree, goal_trees, *args, **kwargs)

    monkeypatch.setattr("manyplan.many._result_from_record", capture)
    plan_many_from_goals(inst.chain, inst.world, inst.q_start, goals,
                         small_config(seed=5, max_iterations=500))
    assert len(seen["trees"]) == 3
    for tree in seen["trees"]:
        validate_tree(tree)


def test_node_budget_enforced():
    inst = bifurcated_instance()
    goals = [inst.q_reachable, inst.q_unreachable]
    cfg = ManyConfig(base=PlannerConfig(step=0.1, max_iterations=100_000,
                                        max_runtime_ms=60_000, nodes_max=100,
                                        seed=0))
    result = plan_many_from_goals(inst.chain, inst.world, inst.q_start,
                                  goals, cfg)
    assert result.nodes <= node_budget(100, 1) + 3  # one in-flight cycle


def test_exact_start_goal_coincidence(planar):
    q = np.array([0.4, 0.4])
    result = plan_many_from_goals(planar, mp.empty_world(), q,
                                  [np.array([1.0, 1.0]), q.copy()],
                                  small_config())
    assert result.success and result.path.cost == 0.0
    assert result.goal_tree == 1


def test_goal_within_tolerance_of_start(planar):
    q = np.zeros(2)
    goal = np.array([0.05, 0.0])
    result = plan_many_from_goals(planar, mp.empty_world(), q, [goal],
                                  small_config(max_iterations=50))
    assert result.success
    assert result.path.cost <= 0.1


def test_threaded_mode_produces_valid_result(planar):
    inst = bifurcated_instance()
    goals = [inst.q_reachable, inst.q_unreachable]
    cfg = small_config(seed=12, max_iterations=1500, nodes_max=3000)
    result = plan_many_from_goals(inst.chain, inst.world, inst.q_start, goals,
                                  cfg, workers=3)
    if result.success:
        ctx = PlanContext(inst.chain, inst.world, cfg.base)
        validate_path(result.path, ctx)
        costs = [c for _, _, c in result.trace]
        assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_multi_goal_dominance_statistical():
    # solving with the full goal set dominates the singleton subset
    inst = bifurcated_instance()
    db = mp.build_seed_database(inst.chain, inst.world, 100_000, seed=0)
    trials = 100
    wins = {1: 0, 10: 0}
    for seed in range(trials):
        for k in (1, 10):
            cfg = ManyConfig(base=PlannerConfig(
                step=0.1, max_iterations=800, max_runtime_ms=2000,
                nodes_max=1600, seed=seed), k=k)
            try:
                r = plan_many(inst.chain, inst.world, inst.q_start,
                              inst.target, db, cfg,
                              ik_settings=inst.ik_settings)
                wins[k] += r.success
            except mp.NoReachableGoalError:
                pass
    assert wins[10] >= wins[1]
    assert wins[10] >= int(0.9 * trials)


def test_config_validation():
    with pytest.raises(ValueError):
        ManyConfig(gamma0=0.0)
    with pytest.raises(ValueError):
        ManyConfig(gamma0=1.0)
    with pytest.raises(ValueError):
        ManyConfig(k=0)
    cfg = ManyConfig(base=PlannerConfig(step=0.2))
    assert cfg.tolerance == 0.2
    assert ManyConfig(connect_tolerance=0.05).tolerance == 0.05
