"""Nahm's equations on (0, 2): pole series, flow integration, tangent vectors
and the geometric quantities of the monopole moduli space.

Data are quadruples (T0, T1, T2, T3) of anti-Hermitian k x k matrices with

    dT1/dt = [T1, T0] + [T2, T3]   (and cyclically in 1, 2, 3).

Time samples live on an interior grid [delta, 2 - delta]; the ends are covered
by Laurent series at the poles t = 0, 2.  Integrals over (0, 2) combine
composite Simpson on the grid with Gauss-Legendre quadrature of the
series-evaluated integrand on the two tails.

Tangent vectors are quadruples of matrix functions, stored the same way.  The
complex structures are right multiplication by i, j, k on
t0 + t1 i + t2 j + t3 k (so IJ = -K), the metric is -int tr sum t_a^2 and
omega_a(u, v) = g(I_a u, v).  With these conventions omega_2 + i omega_3 is
of type (2,0) when (1,0)-vectors are the -i eigenvectors of I.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .kernels import euler_top_rk4, nahm_rk4

DEFAULT_DELTA = 0.05
DEFAULT_STEP = 1e-3
DEFAULT_SUBSTEPS = 8
SERIES_ORDER = 8
STENCIL_HALF_WIDTH = 6  # 12th-order centred derivative
TAIL_NODES = 24
ESCAPE_NORM = 1e8

# Pi = PI_NORMALIZATION * (mu_1 omega_1^{-1} + mu_2 omega_2^{-1} + mu_3 omega_3^{-1}),
# with i(X_Pi) omega_a = d mu_a and X_Pi = (i, 0, 0, 0).  Fixed once by the k = 1
# closed-form evaluation of the integral formula (see tests/test_nahm.py).
PI_NORMALIZATION = 0.25


class NahmError(ValueError):
    pass


class SeriesInconsistent(NahmError):
    pass


class Escaped(NahmError):
    pass


class LeavesSolutionSpace(NahmError):
    pass


class GridMismatch(NahmError):
    pass


class TailDivergence(NahmError):
    pass


def _comm(x, y):
    return x @ y - y @ x


def _tr(x):
    return np.trace(x, axis1=-2, axis2=-1)


# -- su(2) residues and pole series ----------------------------------------


def su2_irrep(k: int) -> np.ndarray:
    """Residues R_1, R_2, R_3 of the irreducible k-dimensional representation,
    normalized by the pole balance -R_1 = [R_2, R_3] (cyclic)."""
    s = (k - 1) / 2.0
    m = s - np.arange(k)
    jp = np.zeros((k, k), dtype=complex)
    for a in range(1, k):
        jp[a - 1, a] = np.sqrt(s * (s + 1) - m[a] * (m[a] + 1))
    jx = 0.5 * (jp + jp.T)
    jy = -0.5j * (jp - jp.T)
    jz = np.diag(m).astype(complex)
    return 1j * np.array([jx, jy, jz])


def euler_basis() -> np.ndarray:
    """e_a = -(i/2) sigma_a, with [e_1, e_2] = e_3 (cyclic)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return -0.5j * np.array([sx, sy, sz])


@dataclass(frozen=True)
class PoleSeries:
    """T(t) = residues / s + sum_{j=0}^{m} coeffs[j] s^j with s = t - pole.

    Arrays carry all four components (index 0 is T0)."""

    pole: float
    residues: np.ndarray  # (4, k, k)
    coeffs: np.ndarray  # (m + 1, 4, k, k)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = t - self.pole
        out = self.residues[None] / s[:, None, None, None]
        for j, c in enumerate(self.coeffs):
            out = out + c[None] * (s ** j)[:, None, None, None]
        return out

    def derivative(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = t - self.pole
        out = -self.residues[None] / (s ** 2)[:, None, None, None]
        for j, c in enumerate(self.coeffs[1:], start=1):
            out = out + j * c[None] * (s ** (j - 1))[:, None, None, None]
        return out

    def shifted(self, const: np.ndarray) -> "PoleSeries":
        c = self.coeffs.copy()
        c[0] = c[0] + const
        return PoleSeries(self.pole, self.residues, c)

    def to_json(self):
        return {"pole": self.pole, "residues": _mat_json(self.residues), "coeffs": _mat_json(self.coeffs)}

    @classmethod
    def from_json(cls, d):
        return cls(float(d["pole"]), _mat_load(d["residues"]), _mat_load(d["coeffs"]))


def _series_operator(R: np.ndarray, j: int) -> np.ndarray:
    """Matrix of C -> (j C_a - [R_b, C_c] - [C_b, R_c])_a on gl(k)^3 (flattened)."""
    k = R.shape[-1]
    n = 3 * k * k
    M = np.zeros((n, n), dtype=complex)
    for col in range(n):
        e = np.zeros(n, dtype=complex)
        e[col] = 1.0
        C = e.reshape(3, k, k)
        out = np.empty_like(C)
        for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            out[a] = j * C[a] - _comm(R[b], C[c]) - _comm(C[b], R[c])
        M[:, col] = out.ravel()
    return M


def pole_series(k: int, side: int = 0, order: int = 4, free=None, residues=None, tol: float = 1e-9) -> PoleSeries:
    """Laurent series of a Nahm solution (gauge T0 = 0) at the pole t = side.

    Order-by-order the coefficients solve a linear system whose kernel holds
    the free parameters of the solution; ``free`` maps an order j to a
    (3, k, k) array whose projection onto that kernel is added.  A right-hand
    side outside the range raises :class:`SeriesInconsistent`.
    """
    if k < 2:
        raise ValueError("poles need k >= 2; for k = 1 the solutions are constant")
    if not 0 <= order <= SERIES_ORDER:
        raise ValueError(f"order must lie in 0..{SERIES_ORDER}")
    if side not in (0, 2):
        raise ValueError("side must be 0 or 2")
    R = su2_irrep(k) if residues is None else np.asarray(residues, dtype=complex)
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        if np.abs(_comm(R[b], R[c]) + R[a]).max() > tol:
            raise SeriesInconsistent("residues violate -R_a = [R_b, R_c]")
    free = free or {}
    C = []
    for j in range(order + 1):
        rhs = np.zeros((3, k, k), dtype=complex)
        for i in range(j):
            l = j - 1 - i
            for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                rhs[a] += _comm(C[i][b], C[l][c])
        M = _series_operator(R, j)
        sol, *_ = np.linalg.lstsq(M, rhs.ravel(), rcond=None)
        if np.abs(M @ sol - rhs.ravel()).max() > tol * max(1.0, np.abs(rhs).max()):
            raise SeriesInconsistent(f"no coefficient at order {j}")
        if j in free:
            U, s, Vh = np.linalg.svd(M)
            ker = Vh[s <= 1e-10 * max(1.0, s[0])].conj().T if len(s) else np.eye(M.shape[1])
            f = np.asarray(free[j], dtype=complex).ravel()
            sol = sol + ker @ (ker.conj().T @ f)
        C.append(sol.reshape(3, k, k))
    res4 = np.zeros((4, k, k), dtype=complex)
    res4[1:] = R
    co4 = np.zeros((order + 1, 4, k, k), dtype=complex)
    co4[:, 1:] = np.array(C)
    return PoleSeries(float(side), res4, co4)


def series_residual(ps: PoleSeries, t: float) -> float:
    """Nahm residual of the truncated series at time t."""
    T = ps(t)[0]
    dT = ps.derivative(t)[0]
    return float(np.abs(dT - _rhs(T)).max())


def _rhs(T):
    out = np.zeros_like(T)
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        out[..., a, :, :] = _comm(T[..., a, :, :], T[..., 0, :, :]) + _comm(T[..., b, :, :], T[..., c, :, :])
    return out


def counterterm_coefficient(k: int) -> float:
    """The s^{-2} coefficient of tr sum T_a^2 at a pole: tr sum R_a^2."""
    R = su2_irrep(k)
    return float(np.real(sum(np.trace(r @ r) for r in R)))


# -- Euler-top reduction (k = 2) ----------------------------------------


def euler_series(rho, a: float, b: float, order: int = SERIES_ORDER) -> np.ndarray:
    """Scalar series f_a = rho_a / s + sum_{j>=1} d_{a,j} s^j of f1' = f2 f3
    (cyclic) with conserved f2^2 - f1^2 = a, f3^2 - f1^2 = b.

    Returns d with shape (order + 1, 3); d[0] = 0 (no constant term)."""
    rho = np.asarray(rho, dtype=float)
    d = np.zeros((order + 1, 3))
    # order 1: kernel condition plus the two conserved quantities
    A = np.array(
        [
            [1.0, -rho[2], -rho[1]],
            [-2 * rho[0], 2 * rho[1], 0.0],
            [-2 * rho[0], 0.0, 2 * rho[2]],
        ]
    )
    if order >= 1:
        d[1] = np.linalg.solve(A, [0.0, a, b])
    for j in range(2, order + 1):
        M = np.array(
            [
                [j, -rho[2], -rho[1]],
                [-rho[2], j, -rho[0]],
                [-rho[1], -rho[0], j],
            ]
        )
        rhs = np.zeros(3)
        for i in range(1, j - 1):
            l = j - 1 - i
            rhs += [d[i, 1] * d[l, 2], d[i, 2] * d[l, 0], d[i, 0] * d[l, 1]]
        d[j] = np.linalg.solve(M, rhs)
    return d


def euler_eval(rho, d, s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.asarray(rho, dtype=float)[None, :] / s[:, None]
    for j in range(1, len(d)):
        out = out + d[j][None, :] * (s ** j)[:, None]
    return out


def _euler_to_series(pole: float, rho, d) -> PoleSeries:
    e = euler_basis()
    res = np.zeros((4, 2, 2), dtype=complex)
    co = np.zeros((len(d), 4, 2, 2), dtype=complex)
    for a in range(3):
        res[a + 1] = rho[a] * e[a]
        co[:, a + 1] = d[:, a, None, None] * e[a][None]
    return PoleSeries(pole, res, co)


LEFT_SIGNS = (-1.0, -1.0, -1.0)
RIGHT_SIGNS = (-1.0, 1.0, 1.0)


@dataclass
class ShootingReport:
    a: float
    b: float
    pole_estimate: float
    iterations: int
    conservation_drift: float

    def as_dict(self):
        return dict(self.__dict__)


def _euler_pole_time(a, b, delta, h, substeps):
    d = euler_series(LEFT_SIGNS, a, b)
    f0 = euler_eval(LEFT_SIGNS, d, delta)[0]
    n = int(round((2 - 2 * delta) / h))
    # trial values past the root blow up through a pole; that is detected below
    with np.errstate(over="ignore", invalid="ignore"):
        traj = euler_top_rk4(f0, h / substeps, n * substeps)
    fe = traj[-1]
    # on [delta, 2 - delta] a solution whose next pole is beyond 2 - delta / 10
    # stays below 10 / delta plus its regular part; anything larger crossed a pole
    bound = 10.0 / delta + 10.0 * np.sqrt(abs(a) + abs(b))
    if not np.all(np.isfinite(traj)) or np.abs(traj).max() > bound:
        return -np.inf, traj
    # invert the right-pole series of f3, starting from the leading term f3 ~ 1/s
    dr = euler_series(RIGHT_SIGNS, a, b)
    if fe[2] >= 0:
        return np.inf, traj
    s = RIGHT_SIGNS[2] / fe[2]
    for _ in range(50):
        g = euler_eval(RIGHT_SIGNS, dr, s)[0, 2] - fe[2]
        dg = -RIGHT_SIGNS[2] / s**2 + sum(j * dr[j, 2] * s ** (j - 1) for j in range(1, len(dr)))
        step = g / dg
        s -= step
        if abs(step) < 1e-15 or not s < 0:
            break
    if not s < 0:
        return -np.inf, traj
    return (2 - delta) - s, traj


def euler_two_pole(
    shape: float = 0.5, delta: float = DEFAULT_DELTA, h: float = DEFAULT_STEP, substeps: int = DEFAULT_SUBSTEPS
):
    """Conserved quantities (a, b) with a = (1 - shape) b for which the
    Euler-top solution with a pole at t = 0 has its next pole at t = 2.

    Shooting: the flow is integrated from the left series at t = delta and the
    pole is located by inverting the right series; b is bisected."""
    if not 0 < shape < 1:
        raise ValueError("shape must lie in (0, 1)")
    ratio = 1 - shape

    def pole(b):
        return _euler_pole_time(ratio * b, b, delta, h, substeps)[0]

    lo, hi = 1.0, 1.0
    while pole(lo) < 2:
        lo /= 2
    while pole(hi) > 2:
        hi *= 2
    it = 0
    while hi - lo > 1e-14 * hi and it < 200:
        mid = 0.5 * (lo + hi)
        if pole(mid) > 2:
            lo = mid
        else:
            hi = mid
        it += 1
    b = 0.5 * (lo + hi)
    t_p, traj = _euler_pole_time(ratio * b, b, delta, h, substeps)
    f = traj
    drift = max(
        np.abs((f[:, 1] ** 2 - f[:, 0] ** 2) - ratio * b).max(),
        np.abs((f[:, 2] ** 2 - f[:, 0] ** 2) - b).max(),
    )
    return ShootingReport(ratio * b, b, float(t_p), it, float(drift))


# -- NahmData --------------------------------------------------------------


@dataclass(frozen=True)
class NahmData:
    k: int
    grid: np.ndarray
    samples: np.ndarray  # (N, 4, k, k)
    left: PoleSeries | None = None
    right: PoleSeries | None = None
    meta: dict = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return float(self.grid[0])

    def translate(self, x) -> "NahmData":
        """T_a -> T_a + i x_a Id (a = 0..3): again a solution."""
        shift = 1j * np.asarray(x, dtype=float)[:, None, None] * np.eye(self.k)[None]
        return NahmData(
            self.k,
            self.grid,
            self.samples + shift[None],
            self.left.shifted(shift) if self.left else None,
            self.right.shifted(shift) if self.right else None,
            dict(self.meta, translation=list(np.asarray(x, dtype=float) + self.meta.get("translation", np.zeros(4)))),
        )

    def antihermitian_defect(self) -> float:
        return float(np.abs(self.samples + np.conj(np.swapaxes(self.samples, -1, -2))).max())

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "grid": self.grid.tolist(),
            "samples": _mat_json(self.samples),
            "left": self.left.to_json() if self.left else None,
            "right": self.right.to_json() if self.right else None,
            "meta": _plain(self.meta),
        }

    @classmethod
    def from_json(cls, d) -> "NahmData":
        return cls(
            int(d["k"]),
            np.asarray(d["grid"], dtype=float),
            _mat_load(d["samples"]),
            PoleSeries.from_json(d["left"]) if d.get("left") else None,
            PoleSeries.from_json(d["right"]) if d.get("right") else None,
            d.get("meta", {}),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "NahmData":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _mat_json(a):
    a = np.asarray(a, dtype=complex)
    return {"shape": list(a.shape), "data": np.stack([a.real, a.imag], axis=-1).ravel().tolist()}


def _mat_load(d):
    flat = np.asarray(d["data"], dtype=float).reshape(list(d["shape"]) + [2])
    return flat[..., 0] + 1j * flat[..., 1]


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in np.asarray(x).tolist()] if isinstance(x, np.ndarray) else [_plain(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def constant_solution(x, step: float = DEFAULT_STEP) -> NahmData:
    """k = 1: the constant solution (i x0, i x1, i x2, i x3) on [0, 2]."""
    n = int(round(2 / step))
    grid = np.linspace(0.0, 2.0, n + 1)
    T = 1j * np.asarray(x, dtype=float).reshape(4, 1, 1)
    return NahmData(1, grid, np.repeat(T[None], n + 1, axis=0), meta={"kind": "constant"})


def integrate(
    initial: np.ndarray, t0: float, t1: float, step: float = DEFAULT_STEP, substeps: int = DEFAULT_SUBSTEPS
) -> tuple:
    """RK4 from T(t0) = initial to t1 on a uniform grid; returns (grid, samples)."""
    n = int(round((t1 - t0) / step))
    if n < 1 or abs(t0 + n * step - t1) > 1e-9:
        raise ValueError("interval must be a multiple of the step")
    samples = nahm_rk4(np.asarray(initial, dtype=np.complex128), step, n, substeps)
    if not np.all(np.isfinite(samples)) or np.abs(samples).max() > ESCAPE_NORM:
        raise Escaped("escaped: solution blew up before reaching the matching point")
    return np.linspace(t0, t1, n + 1), samples


def two_pole_k2(
    shape: float = 0.5, delta: float = DEFAULT_DELTA, step: float = DEFAULT_STEP, substeps: int = DEFAULT_SUBSTEPS
) -> NahmData:
    """Charge-2 solution with simple poles at t = 0, 2 (Euler-top reduction)."""
    if abs(round((2 - 2 * delta) / step) * step - (2 - 2 * delta)) > 1e-9:
        raise ValueError("2 - 2 delta must be a multiple of the step")
    rep = euler_two_pole(shape, delta, step, substeps)
    left = _euler_to_series(0.0, LEFT_SIGNS, euler_series(LEFT_SIGNS, rep.a, rep.b))
    right = _euler_to_series(2.0, RIGHT_SIGNS, euler_series(RIGHT_SIGNS, rep.a, rep.b))
    grid, samples = integrate(left(delta)[0], delta, 2 - delta, step, substeps)
    mismatch = float(np.abs(samples[-1] - right(2 - delta)[0]).max())
    meta = {
        "kind": "euler-top",
        "shape": shape,
        "conserved": [rep.a, rep.b],
        "pole_estimate": rep.pole_estimate,
        "bisection_steps": rep.iterations,
        "conservation_drift": rep.conservation_drift,
        "matching_mismatch": mismatch,
        "step": step,
        "substeps": substeps,
    }
    return NahmData(2, grid, samples, left, right, meta)


# -- residuals ---------------------------------------------------------------


def fornberg_weights(offsets, order: int = 1) -> np.ndarray:
    """Finite-difference weights for the given derivative order at 0."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[i, m] = c1 * (m * c[i - 1, m - 1] - c5 * c[i - 1, m]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[j, m] = (c4 * c[j, m] - m * c[j, m - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def centred_derivative(samples: np.ndarray, h: float, half: int = STENCIL_HALF_WIDTH) -> np.ndarray:
    """Derivative at nodes half..N-half-1 by the centred stencil of width 2 half + 1."""
    w = fornberg_weights(np.arange(-half, half + 1)) / h
    n = samples.shape[0]
    out = np.zeros((n - 2 * half,) + samples.shape[1:], dtype=samples.dtype)
    for i, wi in enumerate(w):
        out += wi * samples[i : n - 2 * half + i]
    return out


def _step(d: NahmData) -> float:
    h = np.diff(d.grid)
    if np.abs(h - h[0]).max() > 1e-9 * h[0]:
        raise GridMismatch("grid must be uniform")
    return float(h[0])


def residual(d: NahmData) -> float:
    """max over grid nodes of |dT_a/dt - [T_a, T_0] - [T_b, T_c]|.

    The derivative uses a 12th-order centred stencil, so the six nodes at
    either end of the grid are not tested."""
    half = STENCIL_HALF_WIDTH
    if len(d.grid) <= 2 * half:
        raise GridMismatch("grid too short for the residual stencil")
    dT = centred_derivative(d.samples, _step(d), half)
    rhs = _rhs(d.samples[half:-half])
    return float(np.abs(dT[:, 1:] - rhs[:, 1:]).max())


# -- Lax pencil ------------------------------------------------------------


@dataclass(frozen=True)
class LaxPolynomial:
    """L(zeta) = (T2 + i T3) + 2i T1 zeta + (T2 - i T3) zeta^2 at one time.

    This is the pencil whose spectrum the Nahm flow preserves for every
    zeta.  ``quadratic_sign=-1`` gives the same shape with the quadratic
    coefficient negated, as in the pencil of a Hermitian triple; along Nahm
    flows only its zeta = 0 value beta = T2 + i T3 is isospectral.
    """

    L0: np.ndarray
    L1: np.ndarray
    L2: np.ndarray

    @classmethod
    def from_T(cls, T, quadratic_sign: float = 1.0) -> "LaxPolynomial":
        return cls(T[2] + 1j * T[3], 2j * T[1], quadratic_sign * (T[2] - 1j * T[3]))

    def __call__(self, zeta):
        return self.L0 + zeta * self.L1 + zeta * zeta * self.L2

    @property
    def beta(self):
        return self.L0


def lax_isospectral(d: NahmData, zetas, stride: int = 10, quadratic_sign: float = 1.0) -> dict:
    """Largest variation along the grid of each characteristic-polynomial
    coefficient of L(zeta), per zeta sample, plus the beta spectrum drift."""
    idx = np.arange(0, len(d.grid), stride)
    report = {"zeta": [], "drift": [], "max_drift": 0.0}
    for z in zetas:
        coeffs = np.array([np.poly(LaxPolynomial.from_T(d.samples[i], quadratic_sign)(z)) for i in idx])
        drift = np.abs(coeffs - coeffs[0]).max(axis=0)
        report["zeta"].append([float(np.real(z)), float(np.imag(z))])
        report["drift"].append(drift[1:].tolist())
        report["max_drift"] = max(report["max_drift"], float(drift.max()))
    eig = np.array([np.sort_complex(np.linalg.eigvals(d.samples[i, 2] + 1j * d.samples[i, 3])) for i in idx])
    report["beta_spectrum_drift"] = float(np.abs(eig - eig[0]).max())
    return report


# -- tangents -----------------------------------------------------------------


@dataclass(frozen=True)
class NahmTangent:
    """Samples on the data grid plus Taylor coefficients at the poles
    (tail[j] multiplies s^j, s = t - pole)."""

    samples: np.ndarray  # (N, 4, k, k)
    left: np.ndarray | None = None  # (m + 1, 4, k, k)
    right: np.ndarray | None = None
    label: str = ""

    def map(self, fn, label=None) -> "NahmTangent":
        return NahmTangent(
            fn(self.samples),
            None if self.left is None else fn(self.left),
            None if self.right is None else fn(self.right),
            label or self.label,
        )

    def __add__(self, o):
        return _combine(self, o, lambda a, b: a + b)

    def __sub__(self, o):
        return _combine(self, o, lambda a, b: a - b)

    def __mul__(self, c):
        return self.map(lambda a: c * a)

    __rmul__ = __mul__

    def tail_eval(self, side: str, s) -> np.ndarray:
        co = self.left if side == "left" else self.right
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros((len(s),) + co.shape[1:], dtype=complex)
        for j, c in enumerate(co):
            out += c[None] * (s ** j)[:, None, None, None]
        return out


def _combine(u, v, op):
    def tail(a, b):
        if a is None or b is None:
            return None
        m = max(len(a), len(b))
        pa = np.zeros((m,) + a.shape[1:], dtype=complex)
        pb = np.zeros_like(pa)
        pa[: len(a)] = a
        pb[: len(b)] = b
        return op(pa, pb)

    if u.samples.shape != v.samples.shape:
        raise GridMismatch("tangents live on different grids")
    return NahmTangent(op(u.samples, v.samples), tail(u.left, v.left), tail(u.right, v.right))


def quat_right(u: NahmTangent, unit: int) -> NahmTangent:
    """Right multiplication of t0 + t1 i + t2 j + t3 k by i, j or k."""
    perm = {
        1: ((1, -1), (0, 1), (3, 1), (2, -1)),
        2: ((2, -1), (3, -1), (0, 1), (1, 1)),
        3: ((3, -1), (2, 1), (1, -1), (0, 1)),
    }[unit]

    def fn(a):
        return np.stack([sgn * a[..., src, :, :] for src, sgn in perm], axis=-3)

    return u.map(fn)


def linearized_rhs(T, t):
    """Right-hand side of the linearized Nahm system at data T for tangent t."""
    out = np.zeros_like(t)
    c = _comm
    out[..., 0, :, :] = sum(c(t[..., a, :, :], T[..., a, :, :]) for a in range(4))
    for a, b, cc in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        out[..., a, :, :] = (
            c(T[..., a, :, :], t[..., 0, :, :])
            + c(t[..., a, :, :], T[..., 0, :, :])
            + c(T[..., b, :, :], t[..., cc, :, :])
            + c(t[..., b, :, :], T[..., cc, :, :])
        )
    return out


def linearized_residual(d: NahmData, u: NahmTangent) -> float:
    half = STENCIL_HALF_WIDTH
    du = centred_derivative(u.samples, _step(d), half)
    return float(np.abs(du - linearized_rhs(d.samples[half:-half], u.samples[half:-half])).max())


FAMILIES = ("phase", "translation1", "translation2", "translation3")


def _family_vector(seed):
    if isinstance(seed, str):
        if seed not in FAMILIES:
            raise ValueError(f"unknown tangent family {seed!r}")
        v = np.zeros(4)
        v[FAMILIES.index(seed)] = 1.0
        return v
    return np.asarray(seed, dtype=float)


def tangent_solve(d: NahmData, seed, eps: float = 1e-3, tol: float = 1e-5) -> NahmTangent:
    """Tangent to a family of solutions by a central difference quotient.

    ``seed`` is 'phase', 'translationN' or, for k = 1, any real 4-vector c
    (the family T -> T + i s c Id).  The quotient is checked against the
    linearized equations."""
    c = _family_vector(seed)
    plus, minus = d.translate(eps * c), d.translate(-eps * c)
    samples = (plus.samples - minus.samples) / (2 * eps)
    left = right = None
    if d.left is not None:
        left = (plus.left.coeffs - minus.left.coeffs) / (2 * eps)
        right = (plus.right.coeffs - minus.right.coeffs) / (2 * eps)
    u = NahmTangent(samples, left, right, label=seed if isinstance(seed, str) else "constant")
    r = linearized_residual(d, u)
    if r > tol:
        raise LeavesSolutionSpace(f"family leaves the solution space (residual {r:.2e})")
    return u


# -- integration over (0, 2) -------------------------------------------------


def _tail_nodes(delta):
    x, w = np.polynomial.legendre.leggauss(TAIL_NODES)
    return 0.5 * delta * (x + 1), 0.5 * delta * w


def integrate_over(d: NahmData, integrand, *tangents: NahmTangent, tail_tol: float = 1e-6) -> complex:
    """int_0^2 integrand(t, T, *U) dt; integrand is vectorized over axis 0."""
    for u in tangents:
        if u.samples.shape != d.samples.shape:
            raise GridMismatch("tangent does not live on the data grid")
    vals = integrand(d.grid, d.samples, *(u.samples for u in tangents))
    total = simpson(vals, x=d.grid)
    if d.left is None:
        if d.grid[0] > 0 or d.grid[-1] < 2:
            raise GridMismatch("data without pole series must cover [0, 2]")
        return complex(total)
    delta = d.delta
    s, w = _tail_nodes(delta)
    for side, ps, sgn in (("left", d.left, 1.0), ("right", d.right, -1.0)):
        t = ps.pole + sgn * s
        T = ps(t)
        Us = [u.tail_eval(side, t - ps.pole) for u in tangents]
        total += np.dot(w, integrand(t, T, *Us))
        # non-integrable behaviour shows up as a non-vanishing s * integrand
        probe = ps.pole + sgn * np.array([1e-7, 1e-8]) * delta
        pv = integrand(probe, ps(probe), *(u.tail_eval(side, probe - ps.pole) for u in tangents))
        if np.abs(pv * np.array([1e-7, 1e-8]) * delta).max() > tail_tol:
            raise TailDivergence(f"integrand not integrable at t = {ps.pole:g}")
    return complex(total)


# -- metric and Kahler forms ------------------------------------------------


def _g_integrand(t, T, U, V):
    return -_tr(np.einsum("naij,najk->nik", U, V))


def metric_eval(d: NahmData, u: NahmTangent, v: NahmTangent) -> float:
    return float(np.real(integrate_over(d, _g_integrand, u, v)))


def metric_eval_complex(d, u, v) -> complex:
    """Complex-bilinear extension of the metric."""
    return integrate_over(d, _g_integrand, u, v)


def kahler_forms_eval(d: NahmData, u: NahmTangent, v: NahmTangent) -> tuple:
    """(omega_1, omega_2, omega_3)(u, v) with omega_a(u, v) = g(I_a u, v)."""
    return tuple(metric_eval(d, quat_right(u, a), v) for a in (1, 2, 3))


def _wedge(x, y, p, q):
    """(dT_p ^ dT_q)(x, y) as matrices: x_p y_q - y_p x_q."""
    return x[:, p] @ y[:, q] - y[:, p] @ x[:, q]


def kahler_forms_explicit(d: NahmData, u, v) -> tuple:
    """omega_2 = -int tr(dT0^dT2 + dT1^dT3), omega_3 = -int tr(dT0^dT3 + dT2^dT1)."""

    def w2(t, T, U, V):
        return -_tr(_wedge(U, V, 0, 2) + _wedge(U, V, 1, 3))

    def w3(t, T, U, V):
        return -_tr(_wedge(U, V, 0, 3) + _wedge(U, V, 2, 1))

    return tuple(float(np.real(integrate_over(d, f, u, v))) for f in (w2, w3))


def holomorphic_form_eval(d: NahmData, u, v) -> complex:
    """(omega_2 + i omega_3)(u, v) as -int tr d(T0 - i T1) ^ d(T2 + i T3)."""

    def f(t, T, U, V):
        a_u, a_v = U[:, 0] - 1j * U[:, 1], V[:, 0] - 1j * V[:, 1]
        b_u, b_v = U[:, 2] + 1j * U[:, 3], V[:, 2] + 1j * V[:, 3]
        return -_tr(a_u @ b_v - a_v @ b_u)

    return integrate_over(d, f, u, v)


# -- the hyper-Poisson 2-form ---------------------------------------------


def _phi_integrand(t, T, U, V):
    acc = 0
    for a in (1, 2, 3):
        acc = acc + T[:, a] @ (U[:, a] @ V[:, 0] - V[:, a] @ U[:, 0] - U[:, 0] @ V[:, a] + V[:, 0] @ U[:, a])
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        acc = acc + T[:, a] @ (_wedge(U, V, b, c) - _wedge(U, V, c, b))
    return -0.25j * _tr(acc)


def hyper_poisson_2form(d: NahmData, u: NahmTangent, v: NahmTangent) -> complex:
    """(#_g^{-1} Pi)(u, v) from the integral formula; complex-bilinear."""
    return integrate_over(d, _phi_integrand, u, v)


def _Phi(U, V):
    P2 = _wedge(U, V, 2, 0) - _wedge(U, V, 0, 2) + _wedge(U, V, 3, 1) - _wedge(U, V, 1, 3)
    P3 = _wedge(U, V, 3, 0) - _wedge(U, V, 0, 3) + _wedge(U, V, 1, 2) - _wedge(U, V, 2, 1)
    return P2, P3


def _summand_02(t, T, U, V):
    P2, P3 = _Phi(U, V)
    return -0.125j * _tr((T[:, 2] + 1j * T[:, 3]) @ (P2 - 1j * P3))


def _summand_11(t, T, U, V):
    m = _wedge(U, V, 1, 0) - _wedge(U, V, 0, 1) + _wedge(U, V, 2, 3) - _wedge(U, V, 3, 2)
    return -0.125j * _tr(2 * T[:, 1] @ m)


def _summand_20(t, T, U, V):
    P2, P3 = _Phi(U, V)
    return -0.125j * _tr((T[:, 2] - 1j * T[:, 3]) @ (P2 + 1j * P3))


def type_summands(d: NahmData, u, v) -> dict:
    """The three summands of the rewritten integrand, which are of I-type
    (0,2), (1,1) and (2,0)."""
    return {
        "02": integrate_over(d, _summand_02, u, v),
        "11": integrate_over(d, _summand_11, u, v),
        "20": integrate_over(d, _summand_20, u, v),
    }


def type_projection(form, u: NahmTangent, v: NahmTangent, part: str) -> complex:
    """(p,q)-part of a 2-form w.r.t. I, with (1,0)-vectors the -i eigenvectors
    of right multiplication by i: u^{1,0} = (u + i I u) / 2."""
    Iu, Iv = quat_right(u, 1), quat_right(v, 1)
    sgn = {"20": 1j, "02": -1j}
    if part in sgn:
        s = sgn[part]
        return 0.25 * (form(u, v) + s * form(Iu, v) + s * form(u, Iv) - form(Iu, Iv))
    if part == "11":
        return 0.5 * (form(u, v) + form(Iu, Iv))
    raise ValueError(part)


def jk_lift(u: NahmTangent) -> NahmTangent:
    """J u + i K u."""
    return quat_right(u, 2) + 1j * quat_right(u, 3)


def twozero_via_key(d: NahmData, u, v) -> complex:
    """(#_Omega^{-1} Pi^{2,0})(u, v) = (#_g^{-1} Pi)(Ju + iKu, Jv + iKv)."""
    return hyper_poisson_2form(d, jk_lift(u), jk_lift(v))


def twozero_via_split(d: NahmData, u, v) -> complex:
    """The (0,2)-summand integral evaluated on (Ju + iKu, Jv + iKv)."""
    return integrate_over(d, _summand_02, jk_lift(u), jk_lift(v))


def twozero_via_beta(d: NahmData, u, v) -> complex:
    """(#_Omega^{-1} Pi^{2,0})(u, v) = -(i/2) int tr d(beta^2) ^ d alpha with
    beta = T2 + i T3 and alpha = T0 - i T1."""

    def f(t, T, U, V):
        beta = T[:, 2] + 1j * T[:, 3]
        bu, bv = U[:, 2] + 1j * U[:, 3], V[:, 2] + 1j * V[:, 3]
        au, av = U[:, 0] - 1j * U[:, 1], V[:, 0] - 1j * V[:, 1]
        dbu = beta @ bu + bu @ beta
        dbv = beta @ bv + bv @ beta
        return -0.5j * _tr(dbu @ av - dbv @ au)

    return integrate_over(d, f, u, v)


# -- Hitchin's potential ------------------------------------------------------


def potential_F(d: NahmData) -> float:
    """int_0^2 tr sum T_a^2 + k(k^2 - 1)/4 (s^{-2} + (s - 2)^{-2}) ds."""
    c = d.k * (d.k**2 - 1) / 4.0
    if d.left is not None:
        ct = counterterm_coefficient(d.k)
        if abs(ct + c) > 1e-12:
            raise TailDivergence("counterterm does not cancel the pole of tr sum T_a^2")

    def f(t, T):
        sq = _tr(np.einsum("naij,najk->nik", T[:, 1:], T[:, 1:]))
        return sq + c * (1.0 / t**2 + 1.0 / (t - 2) ** 2) if c else sq

    return float(np.real(integrate_over(d, f)))


def phase_tangent(d: NahmData) -> NahmTangent:
    """X_Pi = (i Id, 0, 0, 0)."""
    return tangent_solve(d, "phase")


def contraction_check(d: NahmData, direction: int, eps: float = 1e-4) -> dict:
    """i(X_Pi) #_g^{-1} Pi (v) against -dF(v)/4 for the translation v in
    direction 1, 2 or 3; dF(v) by central differences over translated data."""
    v = tangent_solve(d, f"translation{direction}")
    lhs = hyper_poisson_2form(d, phase_tangent(d), v)
    e = np.zeros(4)
    e[direction] = 1.0
    dF = (potential_F(d.translate(eps * e)) - potential_F(d.translate(-eps * e))) / (2 * eps)
    return {
        "lhs": complex(lhs),
        "minus_quarter_dF": -0.25 * dF,
        "residual": float(abs(lhs + 0.25 * dF)),
    }
