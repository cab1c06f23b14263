"""Motion planning for serial manipulators with many IK goals in parallel.

The package plans joint-space paths to task-space targets by growing one
RRT* tree per inverse-kinematics solution alongside a start-rooted tree,
so effort is never committed to a single (possibly unreachable) goal
configuration. Single-goal RRT* and bidirectional RRT*-Connect baselines
and a benchmark harness are included.
"""

from .kinematics import (JointConfig, Link, Pose, SerialChain, batch_fk,
                         chain_hash, clamp_to_limits, forward_kinematics,
                         generic_6dof, generic_7dof, jacobian, link_frames,
                         load_chain, planar_2dof, pose_error, random_config,
                         resolve_chain, save_chain, within_limits)
from .collision import (CollisionChecker, RobotSphereModel, World,
                        default_sphere_model, edge_free, empty_world,
                        is_free, load_world, make_environment, save_world,
                        world_hash)
from .ik import (GoalSet, IkResult, IkSettings, InfeasibleWorldError,
                 NoReachableGoalError, SeedDatabase, build_seed_database,
                 downsample, load_seed_database, position_only_settings,
                 query_seeds, sample_goal_set, save_seed_database,
                 solve_ik_newton, solve_ik_sqp)
from .tree import (ExtendStatus, Path, PlannerConfig, PlanContext, Tree,
                   extend, rewire, validate_path, validate_tree)
from .planners import PlanResult, plan_rrt_star, plan_rrt_star_connect
from .many import (ManyConfig, SolutionRecord, iteration_count, node_budget,
                   plan_many, plan_many_from_goals, sample_vertex)

__version__ = "0.1.0"
