"""Numeric inner loops: Pfaffians and the Nahm RK4 flow.

Every kernel is plain numpy-compatible Python, compiled with numba unless
``BIHILB_NO_NUMBA`` is set.
"""
import numpy as np

from ._accel import njit


@njit
def pfaffian_numeric(a):
    """Pfaffian of a complex antisymmetric matrix (Parlett-Reid elimination
    with partial pivoting). ``pf([[0, 1], [-1, 0]]) == 1``."""
    m = a.copy()
    n = m.shape[0]
    if n % 2 == 1:
        return 0.0 + 0.0j
    pf = 1.0 + 0.0j
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = abs(m[k, k + 1])
        for j in range(k + 2, n):
            if abs(m[k, j]) > best:
                best = abs(m[k, j])
                kp = j
        if kp != k + 1:
            for r in range(n):
                tmp = m[r, k + 1]
                m[r, k + 1] = m[r, kp]
                m[r, kp] = tmp
            for c in range(n):
                tmp = m[k + 1, c]
                m[k + 1, c] = m[kp, c]
                m[kp, c] = tmp
            pf = -pf
        piv = m[k, k + 1]
        if piv == 0:
            return 0.0 + 0.0j
        pf *= piv
        if k + 2 < n:
            for i in range(k + 2, n):
                ti = m[k, i] / piv
                for j in range(k + 2, n):
                    tj = m[k, j] / piv
                    m[i, j] += ti * m[j, k + 1] - m[i, k + 1] * tj
    return pf


@njit
def _comm(x, y):
    return x @ y - y @ x


@njit
def nahm_rhs(T):
    """Right-hand side of the Nahm system with ``T[0]`` held fixed (gauge
    field frozen): dT_a/dt = [T_a, T_0] + [T_b, T_c] for (a, b, c) cyclic."""
    out = np.zeros_like(T)
    out[1] = _comm(T[1], T[0]) + _comm(T[2], T[3])
    out[2] = _comm(T[2], T[0]) + _comm(T[3], T[1])
    out[3] = _comm(T[3], T[0]) + _comm(T[1], T[2])
    return out


@njit
def nahm_rk4(T_init, h, nsteps, substeps):
    """Classical RK4 for the Nahm flow.

    Returns the samples at the ``nsteps + 1`` grid nodes spaced ``h`` apart;
    each grid interval is covered with ``substeps`` internal RK4 steps.
    """
    k = T_init.shape[1]
    out = np.empty((nsteps + 1, 4, k, k), dtype=np.complex128)
    T = T_init.copy()
    out[0] = T
    dt = h / substeps
    for n in range(nsteps):
        for _ in range(substeps):
            k1 = nahm_rhs(T)
            k2 = nahm_rhs(T + 0.5 * dt * k1)
            k3 = nahm_rhs(T + 0.5 * dt * k2)
            k4 = nahm_rhs(T + dt * k3)
            T = T + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[n + 1] = T
    return out


@njit
def euler_top_rk4(f_init, h, nsteps):
    """RK4 for the reduced system f1' = f2 f3 (cyclic); returns all nodes."""
    out = np.empty((nsteps + 1, 3))
    f = f_init.copy()
    out[0] = f
    for n in range(nsteps):
        a1 = np.array([f[1] * f[2], f[2] * f[0], f[0] * f[1]])
        g = f + 0.5 * h * a1
        a2 = np.array([g[1] * g[2], g[2] * g[0], g[0] * g[1]])
        g = f + 0.5 * h * a2
        a3 = np.array([g[1] * g[2], g[2] * g[0], g[0] * g[1]])
        g = f + h * a3
        a4 = np.array([g[1] * g[2], g[2] * g[0], g[0] * g[1]])
        f = f + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        out[n + 1] = f
    return out
