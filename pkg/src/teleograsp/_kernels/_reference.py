"""Pure NumPy kinematics kernels: FK, geometric Jacobian, damped-least-squares IK.

Fallback lane. The compiled lane (_fast.pyx) implements the same contracts
with the same algorithm and branch structure; keep the two in lockstep.

Conventions shared by both lanes:
  * params: float64 (n, 4) rows of [a, alpha, d, theta_offset] (standard
    Denavit-Hartenberg; joint transform RotZ(theta + offset) . TransZ(d)
    . TransX(a) . RotX(alpha)).
  * base, tool: 4x4 homogeneous transforms applied before joint 1 and after
    joint n.
  * Quaternions are (w, x, y, z).
"""

from __future__ import annotations

import math

import numpy as np


def _dh_transform(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, a * ct],
            [st, ct * ca, -ct * sa, a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _frames(params: np.ndarray, theta: np.ndarray, base: np.ndarray) -> np.ndarray:
    """Cumulative frames: frames[0] = base, frames[i] = base . T_1 ... T_i."""
    n = params.shape[0]
    frames = np.empty((n + 1, 4, 4))
    frames[0] = base
    T = np.array(base)
    for i in range(n):
        a, alpha, d, off = params[i]
        T = T @ _dh_transform(a, alpha, d, theta[i] + off)
        frames[i + 1] = T
    return frames


def fk_pose(params, theta, base, tool) -> np.ndarray:
    """End-effector frame as a 4x4 homogeneous transform."""
    return _frames(params, theta, base)[-1] @ tool


def jacobian(params, theta, base, tool) -> np.ndarray:
    """Geometric Jacobian (6, n) at the tool point, world frame.

    Column i is [z_{i-1} x (p_ee - o_{i-1}); z_{i-1}] for revolute joint i,
    where frame i-1 is the one the joint rotates about.
    """
    n = params.shape[0]
    frames = _frames(params, theta, base)
    p_ee = (frames[-1] @ tool)[:3, 3]
    J = np.empty((6, n))
    for i in range(n):
        z = frames[i][:3, 2]
        o = frames[i][:3, 3]
        J[:3, i] = np.cross(z, p_ee - o)
        J[3:, i] = z
    return J


def _quat_from_matrix(R: np.ndarray) -> tuple:
    # Shepperd's branch selection; sign is canonicalized by the caller.
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = 2.0 * math.sqrt(tr + 1.0)
        return 0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s
    if R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        return (R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s
    if R[1, 1] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        return (R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s
    s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
    return (R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s


def _orientation_error(target_q: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Rotation vector taking the current orientation onto the target."""
    cw, cx, cy, cz = _quat_from_matrix(R)
    tw, tx, ty, tz = target_q
    # q_err = target (x) conjugate(current), Hamilton convention.
    w = tw * cw + tx * cx + ty * cy + tz * cz
    x = -tw * cx + tx * cw - ty * cz + tz * cy
    y = -tw * cy + tx * cz + ty * cw - tz * cx
    z = -tw * cz - tx * cy + ty * cx + tz * cw
    flip = w < 0.0
    if w == 0.0:
        for c in (x, y, z):
            if c != 0.0:
                flip = c < 0.0
                break
    if flip:
        w, x, y, z = -w, -x, -y, -z
    vn = math.sqrt(x * x + y * y + z * z)
    if vn < 1e-12:
        return np.zeros(3)
    s = 2.0 * math.atan2(vn, w) / vn
    return np.array([x * s, y * s, z * s])


def ik_dls(
    params,
    base,
    tool,
    limits_min,
    limits_max,
    task_rows,
    theta0,
    target_p,
    target_q,
    lam,
    step_clamp,
    pos_tol,
    ang_tol,
    max_iters,
):
    """Damped-least-squares IK.

    Iterates theta += clamp(J_selᵀ (J_sel J_selᵀ + lam² I)⁻¹ e_sel), clipping
    to joint limits each step (the seed is clipped too). Convergence requires
    the norm of the selected position-error rows within pos_tol and of the
    selected angular rows within ang_tol. Returns (theta, converged,
    iterations) where iterations counts update steps taken.
    """
    theta = np.clip(np.asarray(theta0, dtype=float), limits_min, limits_max)
    rows = np.asarray(task_rows, dtype=int)
    pos_rows = rows[rows < 3]
    ang_rows = rows[rows >= 3]
    m = rows.shape[0]
    damping = lam * lam * np.eye(m)
    e = np.empty(6)
    it = 0
    converged = False
    for it in range(max_iters + 1):
        T = fk_pose(params, theta, base, tool)
        e[:3] = target_p - T[:3, 3]
        e[3:] = _orientation_error(target_q, T[:3, :3])
        pe = math.sqrt(float(np.sum(e[pos_rows] ** 2))) if pos_rows.size else 0.0
        ae = math.sqrt(float(np.sum(e[ang_rows] ** 2))) if ang_rows.size else 0.0
        if pe <= pos_tol and ae <= ang_tol:
            converged = True
            break
        if it == max_iters:
            break
        J_sel = jacobian(params, theta, base, tool)[rows, :]
        y = np.linalg.solve(J_sel @ J_sel.T + damping, e[rows])
        step = np.clip(J_sel.T @ y, -step_clamp, step_clamp)
        theta = np.clip(theta + step, limits_min, limits_max)
    return theta, converged, it
