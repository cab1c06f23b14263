"""Serial-chain kinematics: forward kinematics, geometric Jacobians, joint limits.

A chain is a sequence of revolute joints. Joint ``j`` rotates about a unit
axis fixed in the frame of link ``j-1``, then translates by a fixed offset
expressed in the rotated frame. The end-effector frame is the frame after
the last link's offset. All angles are radians, all lengths meters.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.spatial.transform import Rotation

JointConfig = np.ndarray  # shape (dof,), radians


class KinematicsError(ValueError):
    """Invalid chain description or mismatched configuration."""


@dataclass
class Link:
    axis: np.ndarray      # unit rotation axis, parent-link frame
    offset: np.ndarray    # fixed translation after the rotation, meters
    lower: float          # joint limit, radians
    upper: float

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.offset = np.asarray(self.offset, dtype=float)
        norm = np.linalg.norm(self.axis)
        if norm < 1e-12:
            raise KinematicsError("joint axis must be a nonzero vector")
        self.axis = self.axis / norm
        if not self.lower < self.upper:
            raise KinematicsError(
                f"joint limits must satisfy lower < upper, got [{self.lower}, {self.upper}]")


@dataclass
class SerialChain:
    """Kinematic description of an m-DoF revolute serial manipulator."""

    name: str
    links: list[Link]
    reach: float

    # packed copies of the link data, used by the numeric kernels
    axes: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)
    lower: np.ndarray = field(init=False, repr=False)
    upper: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.links:
            raise KinematicsError("chain needs at least one link")
        if self.reach <= 0:
            raise KinematicsError("reach must be positive")
        self.axes = np.ascontiguousarray([ln.axis for ln in self.links])
        self.offsets = np.ascontiguousarray([ln.offset for ln in self.links])
        self.lower = np.array([ln.lower for ln in self.links])
        self.upper = np.array([ln.upper for ln in self.links])
        straight = self.straight_config()
        extension = np.linalg.norm(forward_kinematics(self, straight).position)
        if abs(extension - self.reach) > 1e-9:
            raise KinematicsError(
                f"declared reach {self.reach} does not match straightened "
                f"extension {extension:.12f}")

    @property
    def dof(self) -> int:
        return len(self.links)

    def straight_config(self) -> JointConfig:
        """The straightened configuration: zero angles clamped into limits."""
        return np.clip(np.zeros(self.dof), self.lower, self.upper)

    def link_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.offsets, axis=1)


@dataclass
class Pose:
    """Task-space element: position plus unit quaternion (w, x, y, z)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.quaternion = np.asarray(self.quaternion, dtype=float)
        if self.position.shape != (3,) or self.quaternion.shape != (4,):
            raise KinematicsError("pose needs a 3-vector position and 4-vector quaternion")
        if abs(np.linalg.norm(self.quaternion) - 1.0) > 1e-9:
            raise KinematicsError("quaternion must have unit norm")

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.quaternion
        return Rotation.from_quat([x, y, z, w]).as_matrix()

    def as_array(self) -> np.ndarray:
        """Flat (7,) array: x y z qw qx qy qz."""
        return np.concatenate([self.position, self.quaternion])

    @staticmethod
    def from_array(values) -> "Pose":
        values = np.asarray(values, dtype=float)
        if values.shape != (7,):
            raise KinematicsError("pose array must have 7 entries: x y z qw qx qy qz")
        quat = values[3:]
        norm = np.linalg.norm(quat)
        if norm < 1e-12:
            raise KinematicsError("zero quaternion")
        return Pose(values[:3], quat / norm)


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    t = 1.0 - c
    return np.array([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ])


def _quat_from_matrix(rot: np.ndarray) -> np.ndarray:
    xyzw = Rotation.from_matrix(rot).as_quat()
    wxyz = np.array([xyzw[3], xyzw[0], xyzw[1], xyzw[2]])
    if wxyz[0] < 0:  # canonical sign, keeps FK deterministic
        wxyz = -wxyz
    return wxyz


def _check_config(chain: SerialChain, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (chain.dof,):
        raise KinematicsError(
            f"configuration has shape {q.shape}, chain has {chain.dof} joints")
    return q


def link_frames(chain: SerialChain, q: JointConfig):
    """Per-link world frames at configuration q.

    Returns (rotations, origins, tip): rotations[j] is the world orientation
    of link j's frame, origins[j] the world position of joint j (the start
    of link j's segment), tip the end-effector position.
    """
    q = _check_config(chain, q)
    rotations = np.empty((chain.dof, 3, 3))
    origins = np.empty((chain.dof, 3))
    rot = np.eye(3)
    pos = np.zeros(3)
    for j in range(chain.dof):
        origins[j] = pos
        rot = rot @ rotation_about_axis(chain.axes[j], q[j])
        rotations[j] = rot
        pos = pos + rot @ chain.offsets[j]
    return rotations, origins, pos


def forward_kinematics(chain: SerialChain, q: JointConfig) -> Pose:
    """End-effector pose x = f(q)."""
    rotations, _, tip = link_frames(chain, q)
    return Pose(tip, _quat_from_matrix(rotations[-1]))


def jacobian(chain: SerialChain, q: JointConfig) -> np.ndarray:
    """Geometric Jacobian, shape (6, dof).

    Rows 0:3 map joint velocity to end-effector linear velocity, rows 3:6
    to angular velocity, both in the world frame.
    """
    q = _check_config(chain, q)
    rotations, origins, tip = link_frames(chain, q)
    jac = np.empty((6, chain.dof))
    for j in range(chain.dof):
        # the joint's own rotation leaves its axis unchanged
        ax, ay, az = rotations[j] @ chain.axes[j]
        rx, ry, rz = tip - origins[j]
        jac[0, j] = ay * rz - az * ry
        jac[1, j] = az * rx - ax * rz
        jac[2, j] = ax * ry - ay * rx
        jac[3, j] = ax
        jac[4, j] = ay
        jac[5, j] = az
    return jac


def batch_fk(chain: SerialChain, configs: np.ndarray):
    """Vectorized forward kinematics over a batch of configurations.

    Returns (positions, quaternions) with shapes (n, 3) and (n, 4); the
    quaternions are scalar-first with canonical (w >= 0) sign.
    """
    configs = np.asarray(configs, dtype=float)
    if configs.ndim != 2 or configs.shape[1] != chain.dof:
        raise KinematicsError("batch must have shape (n, dof)")
    n = len(configs)
    eye = np.eye(3)
    rot = np.broadcast_to(eye, (n, 3, 3)).copy()
    pos = np.zeros((n, 3))
    for j in range(chain.dof):
        a = chain.axes[j]
        skew = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
        outer = np.outer(a, a)
        c = np.cos(configs[:, j])[:, None, None]
        s = np.sin(configs[:, j])[:, None, None]
        step = c * eye + s * skew + (1.0 - c) * outer
        rot = rot @ step
        pos += np.einsum("nij,j->ni", rot, chain.offsets[j])
    xyzw = Rotation.from_matrix(rot).as_quat().reshape(n, 4)
    wxyz = np.column_stack([xyzw[:, 3], xyzw[:, 0], xyzw[:, 1], xyzw[:, 2]])
    flip = wxyz[:, 0] < 0
    wxyz[flip] = -wxyz[flip]
    return pos, wxyz


def clamp_to_limits(chain: SerialChain, q: JointConfig) -> JointConfig:
    """Componentwise projection onto the joint-limit box. Idempotent."""
    q = _check_config(chain, q)
    return np.clip(q, chain.lower, chain.upper)


def within_limits(chain: SerialChain, q: JointConfig) -> bool:
    q = _check_config(chain, q)
    return bool(np.all(q >= chain.lower) and np.all(q <= chain.upper))


def random_config(chain: SerialChain, rng: np.random.Generator) -> JointConfig:
    """Uniform sample over the joint-limit box."""
    return rng.uniform(chain.lower, chain.upper)


def pose_error(current: Pose, target: Pose) -> np.ndarray:
    """6-vector task-space error taking `current` to `target`.

    Rows 0:3 are the position difference; rows 3:6 the log-map of the
    relative rotation, expressed as a world-frame rotation vector.
    """
    dp = target.position - current.position
    rel = target.rotation_matrix() @ current.rotation_matrix().T
    drot = Rotation.from_matrix(rel).as_rotvec()
    return np.concatenate([dp, drot])


def chain_hash(chain: SerialChain) -> str:
    """Stable fingerprint of the chain geometry (not its name)."""
    h = hashlib.sha256()
    for arr in (chain.axes, chain.offsets, chain.lower, chain.upper):
        h.update(np.round(arr, 12).tobytes())
    h.update(np.float64(chain.reach).tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# reference chains
# ---------------------------------------------------------------------------

def planar_2dof() -> SerialChain:
    """Two z-revolute unit links moving in the z=0 plane, reach 2.0.

    Limits are +/-3.14 (not pi) so the joint box divides evenly by the
    grid resolutions used in validation.
    """
    links = [
        Link(axis=[0, 0, 1], offset=[1.0, 0, 0], lower=-3.14, upper=3.14),
        Link(axis=[0, 0, 1], offset=[1.0, 0, 0], lower=-3.14, upper=3.14),
    ]
    return SerialChain("planar2", links, reach=2.0)


def generic_6dof() -> SerialChain:
    """Generic 6-DoF arm, reach 1.3 m, vertical at the straight config."""
    lengths = [0.26, 0.39, 0.325, 0.13, 0.13, 0.065]
    axes = [[0, 0, 1], [0, 1, 0], [0, 1, 0], [0, 0, 1], [0, 1, 0], [0, 0, 1]]
    links = [Link(axis=a, offset=[0, 0, ln], lower=-2.9, upper=2.9)
             for a, ln in zip(axes, lengths)]
    return SerialChain("generic6", links, reach=1.3)


def generic_7dof() -> SerialChain:
    """Generic 7-DoF arm, reach 0.85 m, alternating yaw/pitch axes."""
    lengths = [0.16, 0.13, 0.14, 0.12, 0.11, 0.10, 0.09]
    axes = [[0, 0, 1], [0, 1, 0], [0, 0, 1], [0, 1, 0],
            [0, 0, 1], [0, 1, 0], [0, 0, 1]]
    links = [Link(axis=a, offset=[0, 0, ln], lower=-2.8, upper=2.8)
             for a, ln in zip(axes, lengths)]
    return SerialChain("generic7", links, reach=0.85)


REFERENCE_CHAINS = {
    "planar2": planar_2dof,
    "generic6": generic_6dof,
    "generic7": generic_7dof,
}


# ---------------------------------------------------------------------------
# chain files
# ---------------------------------------------------------------------------
# YAML layout, one link per record:
#   name: my-arm
#   reach: 1.3
#   links:
#     - {axis: [0, 0, 1], offset: [0, 0, 0.26], limits: [-2.9, 2.9]}

def save_chain(chain: SerialChain, path) -> None:
    doc = {
        "name": chain.name,
        "reach": float(chain.reach),
        "links": [
            {
                "axis": [float(v) for v in ln.axis],
                "offset": [float(v) for v in ln.offset],
                "limits": [float(ln.lower), float(ln.upper)],
            }
            for ln in chain.links
        ],
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_chain(path) -> SerialChain:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    try:
        links = [
            Link(axis=rec["axis"], offset=rec["offset"],
                 lower=float(rec["limits"][0]), upper=float(rec["limits"][1]))
            for rec in doc["links"]
        ]
        return SerialChain(str(doc["name"]), links, float(doc["reach"]))
    except (KeyError, TypeError, IndexError) as exc:
        raise KinematicsError(f"malformed chain file {path}: {exc}") from exc


def resolve_chain(spec: str) -> SerialChain:
    """Accept a reference-chain name or a path to a chain file."""
    if spec in REFERENCE_CHAINS:
        return REFERENCE_CHAINS[spec]()
    return load_chain(spec)
