"""Compiled inner loops for collision checking.

Everything here operates on packed plain arrays so the hot path carries no
Python objects. With numba present the functions are jitted (nogil, cached);
set MANYPLAN_NO_NUMBA=1 to force the interpreted fallback (slow, same
semantics).
"""
from __future__ import annotations

import os

import numpy as np

HAVE_NUMBA = False
if not os.environ.get("MANYPLAN_NO_NUMBA"):
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        pass

if not HAVE_NUMBA:  # pragma: no cover
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True, nogil=True)
def _config_free(axes, offsets, lower, upper, link_start, sphere_frac,
                 sphere_rad, link_half, link_pad, obs_c, obs_r, q):
    m = axes.shape[0]
    for j in range(m):
        if q[j] < lower[j] or q[j] > upper[j]:
            return False
    n_obs = obs_c.shape[0]
    if n_obs == 0:
        return True

    # running world rotation and link origin
    r00, r01, r02 = 1.0, 0.0, 0.0
    r10, r11, r12 = 0.0, 1.0, 0.0
    r20, r21, r22 = 0.0, 0.0, 1.0
    px, py, pz = 0.0, 0.0, 0.0

    for j in range(m):
        ax, ay, az = axes[j, 0], axes[j, 1], axes[j, 2]
        c = np.cos(q[j])
        s = np.sin(q[j])
        t = 1.0 - c
        a00 = t * ax * ax + c
        a01 = t * ax * ay - s * az
        a02 = t * ax * az + s * ay
        a10 = t * ax * ay + s * az
        a11 = t * ay * ay + c
        a12 = t * ay * az - s * ax
        a20 = t * ax * az - s * ay
        a21 = t * ay * az + s * ax
        a22 = t * az * az + c

        n00 = r00 * a00 + r01 * a10 + r02 * a20
        n01 = r00 * a01 + r01 * a11 + r02 * a21
        n02 = r00 * a02 + r01 * a12 + r02 * a22
        n10 = r10 * a00 + r11 * a10 + r12 * a20
        n11 = r10 * a01 + r11 * a11 + r12 * a21
        n12 = r10 * a02 + r11 * a12 + r12 * a22
        n20 = r20 * a00 + r21 * a10 + r22 * a20
        n21 = r20 * a01 + r21 * a11 + r22 * a21
        n22 = r20 * a02 + r21 * a12 + r22 * a22
        r00, r01, r02 = n00, n01, n02
        r10, r11, r12 = n10, n11, n12
        r20, r21, r22 = n20, n21, n22

        ox, oy, oz = offsets[j, 0], offsets[j, 1], offsets[j, 2]
        wx = r00 * ox + r01 * oy + r02 * oz
        wy = r10 * ox + r11 * oy + r12 * oz
        wz = r20 * ox + r21 * oy + r22 * oz
        qx, qy, qz = px + wx, py + wy, pz + wz

        # broad phase: a ball around the whole link segment
        bx = px + 0.5 * wx
        by = py + 0.5 * wy
        bz = pz + 0.5 * wz
        br = link_half[j] + link_pad[j]
        for o in range(n_obs):
            dx = bx - obs_c[o, 0]
            dy = by - obs_c[o, 1]
            dz = bz - obs_c[o, 2]
            rr = br + obs_r[o]
            if dx * dx + dy * dy + dz * dz > rr * rr:
                continue
            for si in range(link_start[j], link_start[j + 1]):
                f = sphere_frac[si]
                cx = px + f * wx
                cy = py + f * wy
                cz = pz + f * wz
                dx = cx - obs_c[o, 0]
                dy = cy - obs_c[o, 1]
                dz = cz - obs_c[o, 2]
                rs = sphere_rad[si] + obs_r[o]
                if dx * dx + dy * dy + dz * dz <= rs * rs:
                    return False
        px, py, pz = qx, qy, qz
    return True


@njit(cache=True, nogil=True)
def _configs_free(axes, offsets, lower, upper, link_start, sphere_frac,
                  sphere_rad, link_half, link_pad, obs_c, obs_r, configs, out):
    for b in range(configs.shape[0]):
        out[b] = _config_free(axes, offsets, lower, upper, link_start,
                              sphere_frac, sphere_rad, link_half, link_pad,
                              obs_c, obs_r, configs[b])


@njit(cache=True, nogil=True)
def _edge_free(axes, offsets, lower, upper, link_start, sphere_frac,
               sphere_rad, link_half, link_pad, obs_c, obs_r,
               qa, qb, resolution):
    m = qa.shape[0]
    # sample from the lexicographically smaller endpoint so the checked set
    # is identical in either direction
    flip = False
    for j in range(m):
        if qa[j] < qb[j]:
            break
        if qa[j] > qb[j]:
            flip = True
            break
    if flip:
        qa, qb = qb, qa

    dist = 0.0
    for j in range(m):
        d = qb[j] - qa[j]
        dist += d * d
    dist = np.sqrt(dist)

    q = np.empty(m)
    if dist < 1e-15:
        for j in range(m):
            q[j] = qa[j]
        return _config_free(axes, offsets, lower, upper, link_start,
                            sphere_frac, sphere_rad, link_half, link_pad,
                            obs_c, obs_r, q)

    delta = resolution / dist
    n = int(np.floor(1.0 / delta + 1e-12))
    for k in range(n + 1):
        t = k * delta
        if t > 1.0:
            break
        for j in range(m):
            q[j] = qa[j] + t * (qb[j] - qa[j])
        if not _config_free(axes, offsets, lower, upper, link_start,
                            sphere_frac, sphere_rad, link_half, link_pad,
                            obs_c, obs_r, q):
            return False
    # terminal configuration is always checked
    for j in range(m):
        q[j] = qb[j]
    return _config_free(axes, offsets, lower, upper, link_start, sphere_frac,
                        sphere_rad, link_half, link_pad, obs_c, obs_r, q)


def warmup(args) -> None:
    """Trigger jit compilation outside any timed region."""
    q = np.zeros(args[0].shape[0], dtype=float)
    _config_free(*args, q)
    out = np.empty(1, dtype=np.bool_)
    _configs_free(*args, q.reshape(1, -1), out)
    _edge_free(*args, q, q, 0.05)
