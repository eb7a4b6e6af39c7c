# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kinematics kernels.

Same contracts, algorithm, and branch structure as _reference.py; keep the
two in lockstep. Buffers are flat row-major doubles sized for MAXJ joints.
"""

from libc.math cimport atan2, cos, sin, sqrt

import numpy as np

cdef enum:
    MAXJ = 32
    MAXF3 = (MAXJ + 1) * 3


cdef void _mat4_mul(double* A, double* B, double* out) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(4):
        for j in range(4):
            s = 0.0
            for k in range(4):
                s += A[4 * i + k] * B[4 * k + j]
            out[4 * i + j] = s


cdef void _chain(const double* par, int n, const double* base, const double* tool,
                 const double* theta, double* o, double* zax, double* Tee) noexcept nogil:
    # Fills frame origins o[(n+1)*3], frame z axes zax[(n+1)*3] (index 0 is the
    # base frame), and the tool frame Tee[16].
    cdef double T[16]
    cdef double Tj[16]
    cdef double Tmp[16]
    cdef double a, al, d, th, ct, st, ca, sa
    cdef int i, r
    for i in range(16):
        T[i] = base[i]
    o[0] = T[3]; o[1] = T[7]; o[2] = T[11]
    zax[0] = T[2]; zax[1] = T[6]; zax[2] = T[10]
    for i in range(n):
        a = par[4 * i]
        al = par[4 * i + 1]
        d = par[4 * i + 2]
        th = theta[i] + par[4 * i + 3]
        ct = cos(th); st = sin(th); ca = cos(al); sa = sin(al)
        Tj[0] = ct; Tj[1] = -st * ca; Tj[2] = st * sa; Tj[3] = a * ct
        Tj[4] = st; Tj[5] = ct * ca; Tj[6] = -ct * sa; Tj[7] = a * st
        Tj[8] = 0.0; Tj[9] = sa; Tj[10] = ca; Tj[11] = d
        Tj[12] = 0.0; Tj[13] = 0.0; Tj[14] = 0.0; Tj[15] = 1.0
        _mat4_mul(T, Tj, Tmp)
        for r in range(16):
            T[r] = Tmp[r]
        o[3 * (i + 1)] = T[3]; o[3 * (i + 1) + 1] = T[7]; o[3 * (i + 1) + 2] = T[11]
        zax[3 * (i + 1)] = T[2]; zax[3 * (i + 1) + 1] = T[6]; zax[3 * (i + 1) + 2] = T[10]
    _mat4_mul(T, tool, Tee)


cdef void _jac(const double* o, const double* zax, const double* Tee, int n,
               double* J) noexcept nogil:
    # J is row-major (6, n): rows 0-2 linear, rows 3-5 angular.
    cdef double px = Tee[3], py = Tee[7], pz = Tee[11]
    cdef double zx, zy, zz, rx, ry, rz
    cdef int i
    for i in range(n):
        zx = zax[3 * i]; zy = zax[3 * i + 1]; zz = zax[3 * i + 2]
        rx = px - o[3 * i]; ry = py - o[3 * i + 1]; rz = pz - o[3 * i + 2]
        J[0 * n + i] = zy * rz - zz * ry
        J[1 * n + i] = zz * rx - zx * rz
        J[2 * n + i] = zx * ry - zy * rx
        J[3 * n + i] = zx
        J[4 * n + i] = zy
        J[5 * n + i] = zz


cdef void _quat_from_T(const double* T, double* q) noexcept nogil:
    # Shepperd's branch selection on the rotation block of a row-major 4x4.
    cdef double r00 = T[0], r01 = T[1], r02 = T[2]
    cdef double r10 = T[4], r11 = T[5], r12 = T[6]
    cdef double r20 = T[8], r21 = T[9], r22 = T[10]
    cdef double tr = r00 + r11 + r22
    cdef double s
    if tr > 0.0:
        s = 2.0 * sqrt(tr + 1.0)
        q[0] = 0.25 * s; q[1] = (r21 - r12) / s; q[2] = (r02 - r20) / s; q[3] = (r10 - r01) / s
    elif r00 >= r11 and r00 >= r22:
        s = 2.0 * sqrt(1.0 + r00 - r11 - r22)
        q[0] = (r21 - r12) / s; q[1] = 0.25 * s; q[2] = (r01 + r10) / s; q[3] = (r02 + r20) / s
    elif r11 >= r22:
        s = 2.0 * sqrt(1.0 + r11 - r00 - r22)
        q[0] = (r02 - r20) / s; q[1] = (r01 + r10) / s; q[2] = 0.25 * s; q[3] = (r12 + r21) / s
    else:
        s = 2.0 * sqrt(1.0 + r22 - r00 - r11)
        q[0] = (r10 - r01) / s; q[1] = (r02 + r20) / s; q[2] = (r12 + r21) / s; q[3] = 0.25 * s


cdef void _orient_err(double tw, double tx, double ty, double tz,
                      const double* T, double* e) noexcept nogil:
    # Rotation vector of q_err = target (x) conjugate(current), canonical sign.
    cdef double q[4]
    cdef double cw, cx, cy, cz, w, x, y, z, vn, s
    cdef bint flip
    _quat_from_T(T, q)
    cw = q[0]; cx = q[1]; cy = q[2]; cz = q[3]
    w = tw * cw + tx * cx + ty * cy + tz * cz
    x = -tw * cx + tx * cw - ty * cz + tz * cy
    y = -tw * cy + tx * cz + ty * cw - tz * cx
    z = -tw * cz - tx * cy + ty * cx + tz * cw
    flip = w < 0.0
    if w == 0.0:
        if x != 0.0:
            flip = x < 0.0
        elif y != 0.0:
            flip = y < 0.0
        elif z != 0.0:
            flip = z < 0.0
    if flip:
        w = -w; x = -x; y = -y; z = -z
    vn = sqrt(x * x + y * y + z * z)
    if vn < 1e-12:
        e[0] = 0.0; e[1] = 0.0; e[2] = 0.0
    else:
        s = 2.0 * atan2(vn, w) / vn
        e[0] = x * s; e[1] = y * s; e[2] = z * s


cdef bint _chol_solve(double* A, const double* b, int m, double* y) noexcept nogil:
    # Solves A y = b for SPD A stored row-major with fixed stride 6; A is
    # overwritten with its Cholesky factor.
    cdef int i, j, k
    cdef double s
    for j in range(m):
        s = A[6 * j + j]
        for k in range(j):
            s -= A[6 * j + k] * A[6 * j + k]
        if s <= 0.0:
            return 0
        A[6 * j + j] = sqrt(s)
        for i in range(j + 1, m):
            s = A[6 * i + j]
            for k in range(j):
                s -= A[6 * i + k] * A[6 * j + k]
            A[6 * i + j] = s / A[6 * j + j]
    for i in range(m):
        s = b[i]
        for k in range(i):
            s -= A[6 * i + k] * y[k]
        y[i] = s / A[6 * i + i]
    for i in range(m - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, m):
            s -= A[6 * k + i] * y[k]
        y[i] = s / A[6 * i + i]
    return 1


cdef int _check_n(Py_ssize_t n) except -1:
    if n < 1 or n > MAXJ:
        raise ValueError(f"joint count {n} outside supported range 1..{MAXJ}")
    return 0


def fk_pose(params, theta, base, tool):
    """End-effector frame as a 4x4 homogeneous transform."""
    cdef double[:, ::1] par = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef double[:, ::1] tl = np.ascontiguousarray(tool, dtype=np.float64)
    cdef int n = <int> par.shape[0]
    _check_n(n)
    cdef double o[MAXF3]
    cdef double zax[MAXF3]
    out = np.empty((4, 4))
    cdef double[:, ::1] mv = out
    _chain(&par[0, 0], n, &b[0, 0], &tl[0, 0], &th[0], o, zax, &mv[0, 0])
    return out


def jacobian(params, theta, base, tool):
    """Geometric Jacobian (6, n) at the tool point, world frame."""
    cdef double[:, ::1] par = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef double[:, ::1] tl = np.ascontiguousarray(tool, dtype=np.float64)
    cdef int n = <int> par.shape[0]
    _check_n(n)
    cdef double o[MAXF3]
    cdef double zax[MAXF3]
    cdef double Tee[16]
    _chain(&par[0, 0], n, &b[0, 0], &tl[0, 0], &th[0], o, zax, Tee)
    out = np.empty((6, n))
    cdef double[:, ::1] mv = out
    _jac(o, zax, Tee, n, &mv[0, 0])
    return out


def ik_dls(params, base, tool, limits_min, limits_max, task_rows, theta0,
           target_p, target_q, double lam, double step_clamp, double pos_tol,
           double ang_tol, int max_iters):
    """Damped-least-squares IK; see the reference lane for the contract."""
    cdef double[:, ::1] par = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef double[:, ::1] tl = np.ascontiguousarray(tool, dtype=np.float64)
    cdef double[::1] lmin = np.ascontiguousarray(limits_min, dtype=np.float64)
    cdef double[::1] lmax = np.ascontiguousarray(limits_max, dtype=np.float64)
    cdef long[::1] rows = np.ascontiguousarray(task_rows, dtype=np.int64)
    cdef double[::1] th0 = np.ascontiguousarray(theta0, dtype=np.float64)
    cdef double[::1] tp = np.ascontiguousarray(target_p, dtype=np.float64)
    cdef double[::1] tq = np.ascontiguousarray(target_q, dtype=np.float64)
    cdef int n = <int> par.shape[0]
    cdef int m = <int> rows.shape[0]
    _check_n(n)
    if m < 1 or m > 6:
        raise ValueError(f"task row count {m} outside supported range 1..6")

    cdef double th[MAXJ]
    cdef double o[MAXF3]
    cdef double zax[MAXF3]
    cdef double Tee[16]
    cdef double J[6 * MAXJ]
    cdef double A[36]
    cdef double e[6]
    cdef double bsel[6]
    cdef double ysel[6]
    cdef int i, c, k, r, it
    cdef double s, pe, ae
    cdef bint converged = 0

    for i in range(n):
        th[i] = th0[i]
        if th[i] < lmin[i]:
            th[i] = lmin[i]
        elif th[i] > lmax[i]:
            th[i] = lmax[i]

    it = 0
    for it in range(max_iters + 1):
        _chain(&par[0, 0], n, &b[0, 0], &tl[0, 0], th, o, zax, Tee)
        e[0] = tp[0] - Tee[3]
        e[1] = tp[1] - Tee[7]
        e[2] = tp[2] - Tee[11]
        _orient_err(tq[0], tq[1], tq[2], tq[3], Tee, &e[3])
        pe = 0.0
        ae = 0.0
        for i in range(m):
            r = <int> rows[i]
            if r < 3:
                pe += e[r] * e[r]
            else:
                ae += e[r] * e[r]
        if sqrt(pe) <= pos_tol and sqrt(ae) <= ang_tol:
            converged = 1
            break
        if it == max_iters:
            break
        _jac(o, zax, Tee, n, J)
        for i in range(m):
            for c in range(i + 1):
                s = 0.0
                for k in range(n):
                    s += J[rows[i] * n + k] * J[rows[c] * n + k]
                A[6 * i + c] = s
                A[6 * c + i] = s
            A[6 * i + i] += lam * lam
        for i in range(m):
            bsel[i] = e[rows[i]]
        if not _chol_solve(A, bsel, m, ysel):
            break
        for c in range(n):
            s = 0.0
            for i in range(m):
                s += J[rows[i] * n + c] * ysel[i]
            if s > step_clamp:
                s = step_clamp
            elif s < -step_clamp:
                s = -step_clamp
            th[c] += s
            if th[c] < lmin[c]:
                th[c] = lmin[c]
            elif th[c] > lmax[c]:
                th[c] = lmax[c]

    theta_out = np.empty(n)
    cdef double[::1] mv = theta_out
    for i in range(n):
        mv[i] = th[i]
    return theta_out, bool(converged), it
