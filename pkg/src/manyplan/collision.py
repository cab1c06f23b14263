"""Sphere-based collision world and robot model.

The free configuration space is defined by sphere-vs-sphere tests between a
per-link robot sphere model (placed by forward kinematics) and a set of
world obstacle spheres, plus the joint-limit box.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import _kernels
from .kinematics import JointConfig, SerialChain


@dataclass
class World:
    """Obstacle spheres plus an axis-aligned workspace box."""

    centers: np.ndarray        # (n_obstacles, 3)
    radii: np.ndarray          # (n_obstacles,)
    bounds: np.ndarray         # (2, 3): min corner, max corner

    def __post_init__(self):
        self.centers = np.ascontiguousarray(self.centers, dtype=float).reshape(-1, 3)
        self.radii = np.ascontiguousarray(self.radii, dtype=float).reshape(-1)
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(2, 3)
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii length mismatch")
        if np.any(self.radii <= 0):
            raise ValueError("all obstacle radii must be positive")

    @property
    def n_obstacles(self) -> int:
        return len(self.radii)


def empty_world(extent: float = 2.0) -> World:
    return World(np.zeros((0, 3)), np.zeros(0),
                 [[-extent, -extent, -extent], [extent, extent, extent]])


def world_hash(world: World) -> str:
    h = hashlib.sha256()
    h.update(np.round(world.centers, 12).tobytes())
    h.update(np.round(world.radii, 12).tobytes())
    return h.hexdigest()[:16]


@dataclass
class RobotSphereModel:
    """Per-link collision spheres, in link-local frames.

    Sphere ``i`` belongs to link ``link_index[i]`` and sits at
    ``fraction[i]`` of the way along that link's offset vector, with radius
    ``radii[i]``. The chain of spheres on each link overlaps: consecutive
    centers are closer than the sum of their radii, so the swept segment is
    covered.
    """

    link_index: np.ndarray     # (n_spheres,) int
    fraction: np.ndarray       # (n_spheres,) position along the link offset
    radii: np.ndarray          # (n_spheres,)

    def __post_init__(self):
        self.link_index = np.ascontiguousarray(self.link_index, dtype=np.int64)
        self.fraction = np.ascontiguousarray(self.fraction, dtype=float)
        self.radii = np.ascontiguousarray(self.radii, dtype=float)


def default_sphere_model(chain: SerialChain, radius_scale: float = 0.05,
                         spacing_factor: float = 1.8) -> RobotSphereModel:
    """Cover every link with equal spheres of radius radius_scale * length.

    Sphere count per link is chosen so consecutive centers are closer than
    a radius sum (spacing <= spacing_factor * r < 2r), which keeps the
    chain overlapping end to end.
    """
    link_index, fraction, radii = [], [], []
    for j, length in enumerate(chain.link_lengths()):
        if length < 1e-12:
            link_index.append(j)
            fraction.append(0.0)
            radii.append(0.02 * chain.reach)
            continue
        r = radius_scale * length
        n = max(2, int(np.ceil(length / (spacing_factor * r))) + 1)
        for f in np.linspace(0.0, 1.0, n):
            link_index.append(j)
            fraction.append(float(f))
            radii.append(r)
    return RobotSphereModel(np.array(link_index), np.array(fraction),
                            np.array(radii))


class CollisionChecker:
    """Packed chain + model + world, reused across many queries.

    The module-level ``is_free`` / ``edge_free`` wrappers build a checker
    per call; planners hold one instance for the whole run.
    """

    def __init__(self, chain: SerialChain, model: RobotSphereModel | None,
                 world: World):
        self.chain = chain
        self.model = model if model is not None else default_sphere_model(chain)
        self.world = world
        m = chain.dof
        order = np.argsort(self.model.link_index, kind="stable")
        link_idx = self.model.link_index[order]
        self._sphere_frac = np.ascontiguousarray(self.model.fraction[order])
        self._sphere_rad = np.ascontiguousarray(self.model.radii[order])
        self._link_start = np.zeros(m + 1, dtype=np.int64)
        for j in range(m):
            self._link_start[j + 1] = self._link_start[j] + int(np.sum(link_idx == j))
        if self._link_start[-1] != len(link_idx):
            raise ValueError("sphere model references links outside the chain")
        lengths = chain.link_lengths()
        link_pad = np.zeros(m)
        for j in range(m):
            lo, hi = self._link_start[j], self._link_start[j + 1]
            if hi > lo:
                link_pad[j] = float(np.max(self._sphere_rad[lo:hi]))
        self._args = (
            chain.axes, chain.offsets, chain.lower, chain.upper,
            self._link_start, self._sphere_frac, self._sphere_rad,
            np.ascontiguousarray(0.5 * lengths), np.ascontiguousarray(link_pad),
            world.centers, world.radii,
        )

    def warmup(self) -> None:
        _kernels.warmup(self._args)

    def is_free(self, q: JointConfig) -> bool:
        q = np.ascontiguousarray(q, dtype=float)
        if q.shape != (self.chain.dof,):
            raise ValueError("configuration/chain dimension mismatch")
        return bool(_kernels._config_free(*self._args, q))

    def configs_free(self, configs: np.ndarray) -> np.ndarray:
        configs = np.ascontiguousarray(configs, dtype=float)
        out = np.empty(len(configs), dtype=np.bool_)
        _kernels._configs_free(*self._args, configs, out)
        return out

    def edge_free(self, q_a: JointConfig, q_b: JointConfig,
                  resolution: float) -> bool:
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        q_a = np.ascontiguousarray(q_a, dtype=float)
        q_b = np.ascontiguousarray(q_b, dtype=float)
        return bool(_kernels._edge_free(*self._args, q_a, q_b, resolution))

    def sphere_centers(self, q: JointConfig) -> tuple[np.ndarray, np.ndarray]:
        """World-frame robot sphere centers and radii at q (for inspection)."""
        from .kinematics import link_frames

        rotations, origins, _ = link_frames(self.chain, q)
        centers = np.empty((len(self._sphere_rad), 3))
        for j in range(self.chain.dof):
            lo, hi = self._link_start[j], self._link_start[j + 1]
            local = self._sphere_frac[lo:hi, None] * self.chain.offsets[j]
            centers[lo:hi] = origins[j] + local @ rotations[j].T
        return centers, self._sphere_rad.copy()


def is_free(chain: SerialChain, model: RobotSphereModel | None, world: World,
            q: JointConfig) -> bool:
    """True iff q respects joint limits and no robot sphere hits an obstacle."""
    return CollisionChecker(chain, model, world).is_free(q)


def edge_free(chain: SerialChain, model: RobotSphereModel | None, world: World,
              q_a: JointConfig, q_b: JointConfig, resolution: float) -> bool:
    """Check the straight joint-space segment between q_a and q_b.

    Configurations are sampled every ``resolution`` radians along the
    segment (both endpoints included). Symmetric in its endpoints.
    """
    return CollisionChecker(chain, model, world).edge_free(q_a, q_b, resolution)


# ---------------------------------------------------------------------------
# benchmark environments
# ---------------------------------------------------------------------------

ENVIRONMENT_KINDS = ("table", "wall", "passage", "random")

# all dimensions scale with the arm reach l
_TABLE_RADIUS = 0.08          # table sphere radius / l
_TABLE_SPACING = 1.4          # grid spacing / sphere radius
_TABLE_EXTENT = 1.05          # table disc radius / l
_MOUNT_HOLE = 0.18            # clear radius around the base / l
# the walls keep a generous clearance around the base so the proximal
# links always have room; they obstruct the distal links and the tip
_WALL_CLEAR = 0.75            # in-plane clearance around the base / l
_WALL_HEIGHT = 0.95           # wall top (wall env) / l
_WALL_WIDTH = 0.95            # wall half-width (wall env) / l
_PASSAGE_CLEAR = 0.45         # passage wall sits closer to the base / l
_PASSAGE_HEIGHT = 0.90        # wall top (passage env) / l
_PASSAGE_WIDTH = 1.05         # wall half-width (passage env) / l
_PASSAGE_RADIUS = 0.05        # thinner spheres: a threadable window / l
_PASSAGE_SIDE = 0.30          # opening side / l
_PASSAGE_CENTER = (0.30, 0.40)  # opening center (y, z) / l
_RANDOM_SHELL = (0.25, 0.90)  # obstacle center distance range / l
_RANDOM_RADII = (0.05, 0.12)  # obstacle radius range / l
_RANDOM_BASE = 0.18           # base ball kept clear of random obstacles / l
DEFAULT_RANDOM_OBSTACLES = 20


def _table_spheres(l: float) -> tuple[list, list]:
    r = _TABLE_RADIUS * l
    step = _TABLE_SPACING * r
    ticks = np.arange(-_TABLE_EXTENT * l, _TABLE_EXTENT * l + 0.5 * step, step)
    centers, radii = [], []
    for x in ticks:
        for y in ticks:
            rho = np.hypot(x, y)
            # sphere bodies must not encroach into the mount hole
            if rho > _TABLE_EXTENT * l or rho < _MOUNT_HOLE * l + r:
                continue
            centers.append((x, y, 0.0))
            radii.append(r)
    return centers, radii


def _wall_spheres(l: float, height: float, width: float, clear: float,
                  opening=None, radius: float = _TABLE_RADIUS) -> tuple[list, list]:
    r = radius * l
    step = _TABLE_SPACING * r
    ys = np.arange(-width * l, width * l + 0.5 * step, step)
    zs = np.arange(0.0, height * l + 0.5 * step, step)
    centers, radii = [], []
    for y in ys:
        for z in zs:
            # apertures are carved with a sphere-radius margin so their
            # effective clear size matches the nominal dimension
            if np.hypot(y, z) < clear * l + r:
                continue
            if opening is not None:
                oy, oz, half = opening
                if abs(y - oy) <= half + r and abs(z - oz) <= half + r:
                    continue
            centers.append((0.0, y, z))
            radii.append(r)
    return centers, radii


def make_environment(kind: str, reach: float, seed: int = 0,
                     n_obstacles: int = DEFAULT_RANDOM_OBSTACLES) -> World:
    """Construct one of the four benchmark worlds, scaled to the arm reach.

    table    horizontal plane of spheres at z=0 spanning the workspace disc
             (with a mount hole around the base).
    wall     table plus a partial vertical sphere plane at x=0; crossing
             means reaching over the top or around the ends.
    passage  table plus a wide, tall wall with a square opening of side
             0.3*reach; the opening is the only comfortable way across.
    random   n_obstacles spheres in the shell [0.25, 0.9]*reach around the
             base, radii in [0.05, 0.12]*reach, kept off the base ball.

    Deterministic given (kind, reach, seed, n_obstacles).
    """
    if reach <= 0:
        raise ValueError("reach must be positive")
    kind = kind.lower()
    l = reach
    ext = 1.15 * l
    bounds = [[-ext, -ext, -0.2 * l], [ext, ext, ext]]
    if kind == "table":
        centers, radii = _table_spheres(l)
    elif kind == "wall":
        centers, radii = _table_spheres(l)
        wc, wr = _wall_spheres(l, _WALL_HEIGHT, _WALL_WIDTH, _WALL_CLEAR)
        centers += wc
        radii += wr
    elif kind == "passage":
        centers, radii = _table_spheres(l)
        oy, oz = _PASSAGE_CENTER
        wc, wr = _wall_spheres(l, _PASSAGE_HEIGHT, _PASSAGE_WIDTH,
                               _PASSAGE_CLEAR,
                               opening=(oy * l, oz * l, 0.5 * _PASSAGE_SIDE * l),
                               radius=_PASSAGE_RADIUS)
        centers += wc
        radii += wr
    elif kind == "random":
        rng = np.random.default_rng(seed)
        centers, radii = [], []
        while len(centers) < n_obstacles:
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            rho = rng.uniform(_RANDOM_SHELL[0] * l, _RANDOM_SHELL[1] * l)
            r = rng.uniform(_RANDOM_RADII[0] * l, _RANDOM_RADII[1] * l)
            center = rho * direction
            if np.linalg.norm(center) < _RANDOM_BASE * l + r:
                continue  # would intersect the robot base
            centers.append(tuple(center))
            radii.append(r)
    else:
        raise ValueError(f"unknown environment kind {kind!r}; "
                         f"expected one of {ENVIRONMENT_KINDS}")
    return World(np.array(centers, dtype=float).reshape(-1, 3),
                 np.array(radii, dtype=float), bounds)


# ---------------------------------------------------------------------------
# world files: a YAML list of spheres
# ---------------------------------------------------------------------------

def save_world(world: World, path) -> None:
    doc = {
        "bounds": {"min": [float(v) for v in world.bounds[0]],
                   "max": [float(v) for v in world.bounds[1]]},
        "spheres": [
            {"center": [float(v) for v in c], "radius": float(r)}
            for c, r in zip(world.centers, world.radii)
        ],
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_world(path) -> World:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    try:
        spheres = doc.get("spheres", [])
        centers = np.array([s["center"] for s in spheres], dtype=float).reshape(-1, 3)
        radii = np.array([s["radius"] for s in spheres], dtype=float)
        bounds = [doc["bounds"]["min"], doc["bounds"]["max"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed world file {path}: {exc}") from exc
    return World(centers, radii, bounds)
