"""A miniature benchmark suite end to end.

Generates certified instances, runs all three planners on identical
(start, goal) pairs, and prints the summary table. The plotting front end
(frontend/) consumes the same output directory.
"""
import pathlib

from manyplan.bench import make_suite, run_suite, summarize, summary_markdown

OUT = pathlib.Path(__file__).parent / "output" / "mini_bench"

specs = make_suite(
    "planar2", "random", n_instances=4, env_seed=12, n_obstacles=6, seed=42,
    planner_config={"step": 0.1, "max_iterations": 1500,
                    "max_runtime_ms": 2000, "nodes_max": 3000},
    many={"k": 8}, ik={"position_only": True}, certify=True)
print(f"{len(specs)} trials over {len(specs) // 3} certified instances")

results = run_suite(specs, out_dir=OUT,
                    progress=lambda r: print(
                        f"  {r.trial_id} {r.planner:8s} success={r.success}"))

print(f"\noutputs in {OUT} (results.csv, traces/, summary.json)\n")
print(summary_markdown(summarize(results)))
