import csv
import json

import numpy as np
import pytest

import manyplan as mp
from manyplan.bench import (TrialResult, TrialSpec, bifurcated_instance,
                            grid_oracle_2dof, load_suite, make_suite,
                            nearest_rank, planar_two_link_ik, run_suite,
                            run_trial, save_suite, summarize, summary_markdown)


def make_result(planner="many", success=True, first_iteration=10,
                first_cost=5.0, final_cost=4.0, trial_id="t0", **kwargs):
    defaults = dict(chain="planar2", env="random", env_seed=0, seed=0,
                    first_ms=1.0, final_ms=2.0, total_ms=3.0, setup_ms=0.5,
                    iterations=100, max_iterations=100, nodes=50)
    defaults.update(kwargs)
    return TrialResult(trial_id=trial_id, planner=planner, success=success,
                       first_iteration=first_iteration, first_cost=first_cost,
                       final_cost=final_cost, **defaults)


# ---------------------------------------------------------------------------
# closed-form planar IK oracle
# ---------------------------------------------------------------------------

def test_planar_ik_branches_verified_by_fk(planar, rng):
    for _ in range(50):
        q = mp.random_config(planar, rng)
        tip = mp.forward_kinematics(planar, q).position
        solutions = planar_two_link_ik(tip[:2])
        if abs(abs(q[1]) - np.pi) < 0.2 or abs(q[1]) < 0.2:
            continue  # near-degenerate: branches merge
        assert len(solutions) == 2
        for sol in solutions:
            sol_tip = mp.forward_kinematics(planar, np.asarray(sol)).position
            assert np.linalg.norm(sol_tip - tip) <= 1e-9
    assert planar_two_link_ik((5.0, 0.0)) == []


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------

def test_oracle_free_space_close_to_straight(planar):
    q0 = np.array([-1.0, -1.0])
    qg = np.array([1.0, 0.5])
    res = 0.02
    cost = grid_oracle_2dof(planar, mp.empty_world(), q0, [qg], res)
    straight = np.linalg.norm(qg - q0)
    octile_bound = 1.0824 * straight
    assert straight - 2 * res <= cost <= octile_bound + 4 * res


def test_oracle_walled_off_goal_is_inf():
    inst = bifurcated_instance()
    cost = grid_oracle_2dof(inst.chain, inst.world, inst.q_start,
                            [inst.q_unreachable], 0.02)
    assert cost == np.inf


def test_oracle_bifurcated_reaches_only_viable_branch():
    inst = bifurcated_instance()
    cost = grid_oracle_2dof(inst.chain, inst.world, inst.q_start,
                            [inst.q_unreachable, inst.q_reachable], 0.02)
    only_up = grid_oracle_2dof(inst.chain, inst.world, inst.q_start,
                               [inst.q_reachable], 0.02)
    assert np.isfinite(cost)
    assert cost == pytest.approx(only_up)


def test_oracle_validates_inputs(planar, six):
    with pytest.raises(ValueError):
        grid_oracle_2dof(six, mp.empty_world(), np.zeros(6), [np.zeros(6)], 0.1)
    with pytest.raises(ValueError):
        grid_oracle_2dof(planar, mp.empty_world(), np.zeros(2),
                         [np.zeros(2)], 0.017)  # does not divide 6.28


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------

def test_nearest_rank_by_hand():
    values = [12, 5, 7, 88, 3, 41, 2, 19, 1, 60]
    # sorted: 1 2 3 5 7 12 19 41 60 88; ranks ceil(p/100*10)
    assert nearest_rank(values, 10) == 1
    assert nearest_rank(values, 50) == 7
    assert nearest_rank(values, 90) == 60
    assert nearest_rank([4.0], 50) == 4.0


def test_summarize_by_hand_percentiles():
    iters = [12, 5, 7, 88, 3, 41, 2, 19, 1, 60]
    results = [make_result(trial_id=f"t{i}", first_iteration=it,
                           first_cost=10.0 + i, final_cost=float(i))
               for i, it in enumerate(iters)]
    (group,) = summarize(results)
    assert group["iter_p10"] == 1
    assert group["iter_p50"] == 7
    assert group["iter_p90"] == 60
    assert group["success_rate"] == 1.0
    # lower medians of 10..19 and 0..9
    assert group["median_first_cost"] == 14.0
    assert group["median_final_cost"] == 4.0


def test_summarize_all_failures_render_infinity():
    results = [make_result(trial_id=f"t{i}", success=False,
                           first_iteration=None, first_cost=None,
                           final_cost=None, max_iterations=3000)
               for i in range(4)]
    (group,) = summarize(results)
    assert group["success_rate"] == 0.0
    assert group["iter_p50"] == ">3000"
    assert group["median_final_cost"] == "inf"
    assert group["mean_first_ms"] is None
    md = summary_markdown([group])
    assert ">3000" in md and "inf" in md


def test_summarize_single_success():
    results = [make_result(final_cost=5.0, first_cost=5.0)]
    (group,) = summarize(results)
    assert group["median_final_cost"] == 5.0


def test_summarize_order_independent():
    results = [make_result(trial_id=f"t{i}", first_iteration=i + 1,
                           final_cost=float(i)) for i in range(9)]
    import random
    shuffled = results[:]
    random.Random(3).shuffle(shuffled)
    assert summarize(results) == summarize(shuffled)


def test_summary_markdown_headers_only_when_empty():
    md = summary_markdown([])
    lines = md.strip().splitlines()
    assert len(lines) == 2
    assert "Succ. Rate" in lines[0]


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def trivial_spec(planar, tmp_path, planner="many", trial_id="t0", seed=0):
    q = np.array([0.35, 0.9])
    target = mp.forward_kinematics(planar, q)
    return TrialSpec(
        trial_id=trial_id, chain="planar2", env="random", env_seed=1,
        n_obstacles=4, planner=planner,
        goal_pose=[float(v) for v in target.as_array()],
        start=[float(v) for v in q], seed=seed,
        planner_config={"step": 0.1, "max_iterations": 300,
                        "max_runtime_ms": 5000, "nodes_max": 1000},
        many={"k": 4}, ik={"position_only": True})


def test_trivial_trial_costs_near_zero(planar, tmp_path):
    result = run_trial(trivial_spec(planar, tmp_path))
    assert result.success
    assert result.final_cost <= 0.1
    assert result.error is None


def test_run_suite_streams_outputs(planar, tmp_path):
    specs = [trivial_spec(planar, tmp_path, planner=p, trial_id=f"x_{p}")
             for p in ("many", "rrtstar", "connect")]
    out = tmp_path / "out"
    results = run_suite(specs, out_dir=out)
    assert len(results) == 3
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert {r["planner"] for r in rows} == {"many", "rrtstar", "connect"}
    for row in rows:
        trace = out / row["trace_file"]
        assert trace.exists()
        with open(trace) as fh:
            header = fh.readline().strip()
        assert header == "iteration,wall_ms,best_cost"
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["groups"]) == 3


def test_run_suite_records_errors_without_aborting(planar, tmp_path):
    bad = trivial_spec(planar, tmp_path, trial_id="bad")
    bad.planner = "nonsense"
    good = trivial_spec(planar, tmp_path, trial_id="good")
    results = run_suite([bad, good])
    assert len(results) == 2
    assert results[0].error is not None and not results[0].success
    assert results[1].success


def test_suite_round_trip(planar, tmp_path):
    specs = [trivial_spec(planar, tmp_path, trial_id=f"t{i}", seed=i)
             for i in range(3)]
    path = tmp_path / "suite.json"
    save_suite(specs, path)
    loaded = load_suite(path)
    assert [s.to_dict() for s in loaded] == [s.to_dict() for s in specs]


def test_suite_determinism_single_worker(planar, tmp_path):
    specs = [trivial_spec(planar, tmp_path, trial_id=f"t{i}", seed=i)
             for i in range(2)]
    a = run_suite(specs)
    b = run_suite(specs)
    for ra, rb in zip(a, b):
        assert ra.success == rb.success
        assert ra.first_iteration == rb.first_iteration
        assert ra.first_cost == rb.first_cost
        assert ra.final_cost == rb.final_cost
        assert ra.nodes == rb.nodes  # wall-clock fields may differ


def test_bifurcated_suite_many_beats_single_goal(tmp_path):
    # 12 instances with random starts; all three planners get identical
    # instances. The multi-goal planner must solve strictly more of them.
    inst = bifurcated_instance()
    world_file = tmp_path / "bifurcated.yaml"
    mp.save_world(inst.world, world_file)
    rng = np.random.default_rng(5)
    checker = mp.CollisionChecker(inst.chain, None, inst.world)
    specs = []
    for i in range(12):
        while True:
            q0 = mp.random_config(inst.chain, rng)
            if checker.is_free(q0):
                break
        for planner in ("rrtstar", "many"):
            specs.append(TrialSpec(
                trial_id=f"b{i:02d}", chain="planar2", env=str(world_file),
                planner=planner,
                goal_pose=[float(v) for v in inst.target.as_array()],
                start=[float(v) for v in q0], seed=100 + i,
                planner_config={"step": 0.1, "max_iterations": 1200,
                                "max_runtime_ms": 2000, "nodes_max": 2400},
                many={"k": 10}, ik={"position_only": True}))
    results = run_suite(specs)
    wins = {"rrtstar": 0, "many": 0}
    for r in results:
        wins[r.planner] += r.success
    assert wins["many"] > wins["rrtstar"]


def test_make_suite_generates_certified_instances(tmp_path):
    specs = make_suite("planar2", "random", 2, planners=("many",),
                       env_seed=3, n_obstacles=5, seed=7,
                       planner_config={"step": 0.1, "max_iterations": 800,
                                       "max_runtime_ms": 2000,
                                       "nodes_max": 1600},
                       many={"k": 6}, ik={"position_only": True},
                       certify=True)
    assert len(specs) == 2
    results = run_suite(specs)
    assert all(r.error is None for r in results)
    assert sum(r.success for r in results) >= 1
