"""Multi-solution inverse kinematics.

Generates many distinct joint-space solutions for one task-space target:
a precomputed seed database maps task positions back to nearby joint
configurations, K seeds are refined independently by a seeded least-squares
solver, and near-duplicate solutions are removed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .collision import CollisionChecker, RobotSphereModel, World, world_hash
from .kinematics import (JointConfig, Pose, SerialChain, batch_fk, chain_hash,
                         clamp_to_limits, forward_kinematics, jacobian,
                         pose_error)


class InfeasibleWorldError(RuntimeError):
    """Rejection sampling cannot find free configurations in this world."""


class NoReachableGoalError(RuntimeError):
    """No IK solution for the target survived collision and tolerance checks."""


@dataclass
class IkSettings:
    """Solver weights and stopping rules.

    ``task_weight`` is the diagonal of the 6x6 task-space metric (position
    rows in meters, orientation rows in radians). Entries must be
    nonnegative; a zero entry drops that error row entirely, which is how
    position-only targets are expressed. ``seed_weight`` pulls the iterate
    toward its seed configuration. ``step_tol`` is the squared step size
    below which the pseudoinverse iteration stops.
    """

    task_weight: np.ndarray = field(default_factory=lambda: np.ones(6))
    seed_weight: float = 1e-6
    max_iters: int = 200
    residual_tol: float = 1e-4
    step: float = 0.5
    step_tol: float = 1e-12
    damping: float = 1e-6

    def __post_init__(self):
        self.task_weight = np.asarray(self.task_weight, dtype=float)
        if self.task_weight.shape != (6,):
            raise ValueError("task_weight must be the 6-vector diagonal")
        if np.any(self.task_weight < 0) or not np.any(self.task_weight > 0):
            raise ValueError("task_weight entries must be >= 0 with at least one > 0")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.step <= 1:
            raise ValueError("step must lie in (0, 1]")
        if self.seed_weight < 0:
            raise ValueError("seed_weight must be nonnegative")

    @property
    def active_rows(self) -> np.ndarray:
        return self.task_weight > 0


def position_only_settings(**kwargs) -> IkSettings:
    """Settings that ignore orientation error (planar / point-reach tasks)."""
    return IkSettings(task_weight=np.array([1.0, 1, 1, 0, 0, 0]), **kwargs)


@dataclass
class IkResult:
    config: JointConfig
    success: bool
    iterations: int
    residual: float


@dataclass
class GoalSet:
    """Pairwise-distinct joint configurations all mapping to one target pose."""

    configs: np.ndarray     # (n_goals, dof)
    target: Pose

    def __post_init__(self):
        self.configs = np.asarray(self.configs, dtype=float)
        if self.configs.ndim != 2 or len(self.configs) == 0:
            raise ValueError("goal set must contain at least one configuration")

    def __len__(self) -> int:
        return len(self.configs)


def _residual(err: np.ndarray, active: np.ndarray) -> float:
    return float(np.linalg.norm(err[active]))


def _objective(err: np.ndarray, w: np.ndarray, lam: float,
               q: np.ndarray, seed: np.ndarray) -> float:
    return 0.5 * float(err @ (w * err)) + 0.5 * lam * float(np.sum((q - seed) ** 2))


def solve_ik_sqp(chain: SerialChain, target: Pose, seed: JointConfig,
                 settings: IkSettings | None = None,
                 history: list | None = None) -> IkResult:
    """Seeded least-squares IK.

    Minimizes 0.5*||f(q) - x||^2_W + 0.5*lam*||q - q'||^2 over the
    joint-limit box by damped Gauss-Newton steps with a backtracking line
    search, so the objective never increases across accepted steps.
    Success means the task residual (over active rows) dropped below
    ``residual_tol``. Pass a list as ``history`` to collect the accepted
    (iterate, objective) pairs.
    """
    st = settings or IkSettings()
    active = st.active_rows
    w = st.task_weight
    lam = st.seed_weight
    seed = clamp_to_limits(chain, np.asarray(seed, dtype=float))
    q = seed.copy()

    err = pose_error(forward_kinematics(chain, q), target)
    best = _objective(err, w, lam, q, seed)
    if history is not None:
        history.append((q.copy(), best))
    iterations = 0
    mu = st.damping
    for iterations in range(1, st.max_iters + 1):
        res = _residual(err, active)
        if res <= st.residual_tol:
            return IkResult(q, True, iterations - 1, res)

        jac = jacobian(chain, q)
        jw = jac[active] * w[active, None]
        hess = jw.T @ jac[active]
        grad = jw.T @ err[active] - lam * (q - seed)

        # adaptive damping keeps the objective strictly non-increasing:
        # a rejected step raises mu (shorter, more gradient-like steps),
        # an accepted one relaxes it again
        improved = False
        while mu < 1e8:
            lhs = hess.copy()
            lhs[np.diag_indices_from(lhs)] += lam + mu
            try:
                dq = np.linalg.solve(lhs, grad)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            cand = clamp_to_limits(chain, q + st.step * dq)
            cand_err = pose_error(forward_kinematics(chain, cand), target)
            cand_obj = _objective(cand_err, w, lam, cand, seed)
            if cand_obj <= best and np.any(cand != q):
                q, err, best = cand, cand_err, cand_obj
                mu = max(mu * 0.25, st.damping)
                improved = True
                if history is not None:
                    history.append((q.copy(), best))
                break
            mu *= 10.0
        if not improved:
            break  # stalled at a local minimum or box face

    res = _residual(err, active)
    return IkResult(q, res <= st.residual_tol, iterations, res)


def solve_ik_restarts(chain: SerialChain, target: Pose, q_seed: JointConfig,
                      settings: IkSettings | None = None, seed: int = 0,
                      max_restarts: int = 25) -> IkResult:
    """Seeded solve with perturbation restarts.

    The first attempt starts exactly at ``q_seed``; each later attempt
    perturbs it a little more. The first success wins, so the returned
    branch is biased toward the seed configuration.
    """
    rng = np.random.default_rng(seed)
    q_seed = np.asarray(q_seed, dtype=float)
    span = chain.upper - chain.lower
    result = solve_ik_sqp(chain, target, q_seed, settings)
    for attempt in range(1, max_restarts + 1):
        if result.success:
            return result
        scale = min(1.0, 0.08 * attempt)
        jittered = np.clip(q_seed + rng.normal(0.0, scale * span / 2),
                           chain.lower, chain.upper)
        result = solve_ik_sqp(chain, target, jittered, settings)
    return result


def solve_ik_newton(chain: SerialChain, target: Pose, q0: JointConfig,
                    settings: IkSettings | None = None) -> IkResult:
    """Pseudoinverse iteration q <- clamp(q + step * pinv(J) * error).

    The pseudoinverse is damped so the update stays finite at
    singularities. Stops when the squared step drops below ``step_tol``
    or the iteration budget runs out.
    """
    st = settings or IkSettings()
    active = st.active_rows
    q = clamp_to_limits(chain, np.asarray(q0, dtype=float))

    res = np.inf
    for iterations in range(st.max_iters + 1):
        err = pose_error(forward_kinematics(chain, q), target)
        res = _residual(err, active)
        if res <= st.residual_tol:
            return IkResult(q, True, iterations, res)
        if iterations == st.max_iters:
            break
        jac = jacobian(chain, q)[active]
        gram = jac @ jac.T
        gram[np.diag_indices_from(gram)] += st.damping
        dq = jac.T @ np.linalg.solve(gram, err[active])
        q_next = clamp_to_limits(chain, q + st.step * dq)
        step_sq = float(np.sum((q_next - q) ** 2))
        q = q_next
        if step_sq <= st.step_tol:
            err = pose_error(forward_kinematics(chain, q), target)
            res = _residual(err, active)
            break

    return IkResult(q, res <= st.residual_tol, min(iterations + 1, st.max_iters), res)


def downsample(solutions, dedup_eps: float):
    """Greedy duplicate filter, preserving input order.

    A solution is kept iff its Euclidean distance to every already-kept
    solution exceeds ``dedup_eps``.
    """
    if dedup_eps <= 0:
        raise ValueError("dedup_eps must be positive")
    kept: list[np.ndarray] = []
    for q in solutions:
        q = np.asarray(q, dtype=float)
        if all(np.linalg.norm(q - k) > dedup_eps for k in kept):
            kept.append(q)
    return kept


# ---------------------------------------------------------------------------
# seed database
# ---------------------------------------------------------------------------

_WINDOW = 50_000          # rejection attempts per acceptance-rate check
_MIN_ACCEPT_RATE = 1e-4


@dataclass
class SeedDatabase:
    """Free configurations with their task poses, indexed for position lookup."""

    configs: np.ndarray      # (n, dof)
    positions: np.ndarray    # (n, 3)
    quaternions: np.ndarray  # (n, 4) w x y z
    chain_id: str
    world_id: str
    index: cKDTree = field(init=False, repr=False)

    def __post_init__(self):
        self.index = cKDTree(self.positions)

    def __len__(self) -> int:
        return len(self.configs)


def build_seed_database(chain: SerialChain, world: World, sample_count: int,
                        model: RobotSphereModel | None = None,
                        seed: int = 0, batch: int = 4096) -> SeedDatabase:
    """Rejection-sample ``sample_count`` free configurations and index them.

    Samples are uniform over the joint-limit box; configurations colliding
    in ``world`` are discarded. Aborts with InfeasibleWorldError when the
    acceptance rate over a window of attempts falls below 1e-4.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    checker = CollisionChecker(chain, model, world)
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    n_accepted = 0
    window_attempts = 0
    window_accepts = 0
    while n_accepted < sample_count:
        draws = rng.uniform(chain.lower, chain.upper, size=(batch, chain.dof))
        free = checker.configs_free(draws)
        good = draws[free]
        accepted.append(good)
        n_accepted += len(good)
        window_attempts += batch
        window_accepts += len(good)
        if window_attempts >= _WINDOW:
            if window_accepts / window_attempts < _MIN_ACCEPT_RATE:
                raise InfeasibleWorldError(
                    f"acceptance rate {window_accepts / window_attempts:.2e} "
                    f"below {_MIN_ACCEPT_RATE:.0e} over {window_attempts} attempts")
            window_attempts = 0
            window_accepts = 0
    configs = np.concatenate(accepted)[:sample_count]
    positions, quaternions = batch_fk(chain, configs)
    return SeedDatabase(configs, positions, quaternions,
                        chain_id=chain_hash(chain), world_id=world_hash(world))


def save_seed_database(db: SeedDatabase, path) -> None:
    np.savez_compressed(path, configs=db.configs, positions=db.positions,
                        quaternions=db.quaternions,
                        chain_id=np.str_(db.chain_id),
                        world_id=np.str_(db.world_id))


def load_seed_database(path) -> SeedDatabase:
    data = np.load(path, allow_pickle=False)
    return SeedDatabase(data["configs"], data["positions"], data["quaternions"],
                        chain_id=str(data["chain_id"]),
                        world_id=str(data["world_id"]))


def query_seeds(db: SeedDatabase, target: Pose, k: int) -> list[np.ndarray]:
    """The k stored configurations whose positions are nearest the target.

    Asking for more seeds than the database holds returns everything,
    sorted by distance.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(db) == 0:
        raise ValueError("empty seed database")
    k = min(k, len(db))
    dists, idx = db.index.query(np.asarray(target.position, dtype=float), k=k)
    dists = np.atleast_1d(dists)
    idx = np.atleast_1d(idx)
    order = np.lexsort((idx, dists))  # ties broken by insertion order
    return [db.configs[i].copy() for i in idx[order]]


SEED_POOL_FACTOR = 40     # nearest seeds examined per requested seed
SEED_SEPARATION = 1.2     # joint-space spacing enforced between seeds, rad


def diversify_seeds(candidates, k: int, separation: float = SEED_SEPARATION,
                    keep_nearest: int = 3) -> list[np.ndarray]:
    """Pick k seeds from a nearest-first candidate list: the first few
    unconditionally, the rest spaced at least ``separation`` apart.

    The nearest seeds to one target position tend to pile into a single
    preimage branch, and near-duplicate seeds converge to near-duplicate
    solutions; spacing the later picks reaches the other branches the
    pool exposes while the unconditional head keeps the most reliable
    local seeds. Leftover slots fall back to the nearest skipped ones.
    """
    chosen: list[np.ndarray] = []
    skipped: list[np.ndarray] = []
    for cand in candidates:
        if len(chosen) == k:
            break
        if len(chosen) < keep_nearest or all(
                np.linalg.norm(cand - c) > separation for c in chosen):
            chosen.append(cand)
        else:
            skipped.append(cand)
    for cand in skipped:
        if len(chosen) == k:
            break
        chosen.append(cand)
    return chosen


def sample_goal_set(chain: SerialChain, world: World, db: SeedDatabase,
                    target: Pose, k: int, settings: IkSettings | None = None,
                    dedup_eps: float = 1e-4,
                    model: RobotSphereModel | None = None,
                    extra_seeds=()) -> GoalSet:
    """Sample distinct goal configurations for a task-space target.

    Gathers the nearest stored seeds around the target position, keeps k
    spaced ones so several preimage branches are represented, refines each
    with the seeded solver, drops failures and colliding solutions, and
    deduplicates the survivors. ``extra_seeds`` are solved first; the
    planner passes the start configuration here so the goal set always
    covers at least the branch a start-seeded solve would find. Raises
    NoReachableGoalError when nothing survives.
    """
    st = settings or IkSettings()
    if db.chain_id != chain_hash(chain):
        raise ValueError("seed database was built for a different chain")
    checker = CollisionChecker(chain, model, world)
    pool = query_seeds(db, target, SEED_POOL_FACTOR * k)
    seeds = [np.asarray(s, dtype=float) for s in extra_seeds]
    seeds += diversify_seeds(pool, k)
    survivors = []
    for q_seed in seeds:
        result = solve_ik_sqp(chain, target, q_seed, st)
        if result.success and checker.is_free(result.config):
            survivors.append(result.config)
    kept = downsample(survivors, dedup_eps)
    if not kept:
        raise NoReachableGoalError(
            f"no IK solution for target {np.round(target.position, 4)} "
            f"survived collision and tolerance checks")
    return GoalSet(np.array(kept), target)
