import numpy as np
import pytest

import manyplan as mp
from manyplan import planners
from manyplan.bench import bifurcated_instance
from manyplan.tree import PlanContext, PlannerConfig, validate_path


def finite_trace_costs(result):
    return [(it, cost) for it, _, cost in result.trace]


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_trivial_start_equals_goal(planar, plan):
    q = np.array([0.2, -0.4])
    result = plan(planar, mp.empty_world(), q, q.copy())
    assert result.success
    assert result.path.cost == 0.0
    assert result.first_iteration == 0


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_empty_world_converges_to_straight_line(planar, plan):
    q0 = np.array([-2.0, -1.2])
    qg = np.array([1.6, 1.1])
    config = PlannerConfig(step=0.1, max_iterations=10_000,
                           max_runtime_ms=60_000, nodes_max=12_000, seed=3)
    result = plan(planar, mp.empty_world(), q0, qg, config)
    straight = np.linalg.norm(qg - q0)
    assert result.success
    assert result.path.cost <= 1.05 * straight
    np.testing.assert_allclose(result.path.waypoints[0], q0)
    np.testing.assert_allclose(result.path.waypoints[-1], qg)


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_bifurcated_unreachable_goal_fails(plan):
    inst = bifurcated_instance()
    config = PlannerConfig(step=0.1, max_iterations=1500,
                           max_runtime_ms=10_000, nodes_max=3000, seed=5)
    result = plan(inst.chain, inst.world, inst.q_start, inst.q_unreachable,
                  config)
    assert not result.success
    assert result.path is None
    assert result.final_cost is None


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_bifurcated_reachable_goal_succeeds(plan):
    inst = bifurcated_instance()
    config = PlannerConfig(step=0.1, max_iterations=3000,
                           max_runtime_ms=10_000, nodes_max=3000, seed=5)
    result = plan(inst.chain, inst.world, inst.q_start, inst.q_reachable,
                  config)
    assert result.success
    ctx = PlanContext(inst.chain, inst.world, config)
    validate_path(result.path, ctx)


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_deterministic_given_seed(planar, plan):
    inst = bifurcated_instance()
    config = PlannerConfig(step=0.1, max_iterations=400, max_runtime_ms=60_000,
                           nodes_max=2000, seed=11)
    a = plan(inst.chain, inst.world, inst.q_start, inst.q_reachable, config)
    b = plan(inst.chain, inst.world, inst.q_start, inst.q_reachable, config)
    assert finite_trace_costs(a) == finite_trace_costs(b)
    assert a.success == b.success
    assert a.nodes == b.nodes
    if a.success:
        np.testing.assert_array_equal(a.path.waypoints, b.path.waypoints)


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_trace_is_monotone_and_aligned(planar, plan, rng):
    q0 = np.array([-1.5, 0.5])
    qg = np.array([1.5, -0.5])
    config = PlannerConfig(step=0.1, max_iterations=2000, max_runtime_ms=30_000,
                           nodes_max=4000, seed=2)
    result = plan(planar, mp.empty_world(), q0, qg, config)
    costs = [c for _, _, c in result.trace]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    iters = [i for i, _, _ in result.trace]
    assert iters == sorted(iters)
    assert result.success
    # first/final bookkeeping agrees with the trace
    finite = [(i, c) for i, _, c in result.trace if np.isfinite(c)]
    assert finite[0][0] == result.first_iteration
    assert finite[0][1] == pytest.approx(result.first_cost)
    assert finite[-1][1] == pytest.approx(result.final_cost)
    assert result.first_cost >= result.final_cost


@pytest.mark.parametrize("plan", [mp.plan_rrt_star, mp.plan_rrt_star_connect])
def test_returned_path_revalidates(plan, rng):
    six = mp.generic_6dof()
    world = mp.make_environment("random", six.reach, seed=13, n_obstacles=10)
    checker = mp.CollisionChecker(six, None, world)
    while True:
        q0 = mp.random_config(six, rng)
        if checker.is_free(q0):
            break
    while True:
        qg = mp.random_config(six, rng)
        if checker.is_free(qg):
            break
    config = PlannerConfig(step=0.15, max_iterations=2500,
                           max_runtime_ms=20_000, nodes_max=3000, seed=1)
    result = plan(six, world, q0, qg, config)
    if result.success:
        ctx = PlanContext(six, world, config)
        validate_path(result.path, ctx)
        np.testing.assert_allclose(result.path.waypoints[0], q0)
        np.testing.assert_allclose(result.path.waypoints[-1], qg)


def test_node_budget_respected(planar):
    config = PlannerConfig(step=0.1, max_iterations=100_000,
                           max_runtime_ms=60_000, nodes_max=200, seed=0)
    result = mp.plan_rrt_star(planar, mp.empty_world(),
                              np.array([-2.0, -2.0]), np.array([2.0, 2.0]),
                              config)
    assert result.nodes <= 200
    result = mp.plan_rrt_star_connect(planar, mp.empty_world(),
                                      np.array([-2.0, -2.0]),
                                      np.array([2.0, 2.0]), config)
    assert result.nodes <= 201  # both trees jointly capped


def test_timer_excludes_setup(planar, monkeypatch):
    # make setup visibly slow; the measured span must not include it
    real_warmup = mp.CollisionChecker.warmup
    ticks = {"n": 0}

    def slow_warmup(self):
        import time
        time.sleep(0.08)
        real_warmup(self)

    monkeypatch.setattr(mp.CollisionChecker, "warmup", slow_warmup)
    config = PlannerConfig(step=0.1, max_iterations=50, max_runtime_ms=10_000,
                           nodes_max=500, seed=0)
    result = mp.plan_rrt_star(planar, mp.empty_world(),
                              np.array([0.0, 0.0]), np.array([1.0, 1.0]),
                              config)
    assert result.setup_ms >= 80.0
    assert result.plan_ms < 80.0
    assert all(ms < 80.0 for _, ms, _ in result.trace)
