"""Quaternionic linear algebra of linear hyper-Poisson bivectors.

Quaternion matrices are real arrays of shape (n, n, 4) holding (a, b, c, d)
for a + bi + cj + dk.  Conventions:

* complex embedding ``psi(a + bi + cj + dk) = [[a + bi, c + di], [-c + di, a - bi]]``
  entrywise, so ``psi(m)`` is 2n x 2n;
* R^{4n} = H^n with real coordinates ordered (v_0, v_i, v_j, v_k) per
  quaternion slot; quaternion-linear maps act by left multiplication and the
  complex structures I_1, I_2, I_3 are right multiplication by -i, -j, -k,
  which gives I_1 I_2 = I_3;
* metric g = Id, Kahler forms omega_a(u, v) = g(I_a u, v), dual bivectors
  omega^{-1} = inv(omega^T).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import pfaffian_numeric

# -- quaternions -------------------------------------------------------------


def qmul(x, y):
    """Hamilton product on the last axis."""
    a1, b1, c1, d1 = np.moveaxis(np.asarray(x, dtype=float), -1, 0)
    a2, b2, c2, d2 = np.moveaxis(np.asarray(y, dtype=float), -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def qconj(x):
    x = np.asarray(x, dtype=float)
    return x * np.array([1.0, -1.0, -1.0, -1.0])


def qmatmul(A, B):
    """Product of quaternion matrices (n, m, 4) @ (m, p, 4)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.zeros((A.shape[0], B.shape[1], 4))
    for k in range(A.shape[1]):
        out += qmul(A[:, k, None, :], B[None, k, :, :])
    return out


def qadjoint(A):
    """Quaternionic adjoint: conjugate transpose."""
    return qconj(np.swapaxes(np.asarray(A, dtype=float), 0, 1))


def is_quat_hermitian(A, tol=1e-12) -> bool:
    return bool(np.max(np.abs(qadjoint(A) - A), initial=0.0) <= tol)


def quat_embed(A) -> np.ndarray:
    """psi: gl(n, H) -> gl(2n, C)."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, None, :]
    a, b, c, d = np.moveaxis(A, -1, 0)
    n, m = a.shape
    out = np.empty((2 * n, 2 * m), dtype=complex)
    out[0::2, 0::2] = a + 1j * b
    out[0::2, 1::2] = c + 1j * d
    out[1::2, 0::2] = -c + 1j * d
    out[1::2, 1::2] = a - 1j * b
    return out


def omega_E(n: int) -> np.ndarray:
    """Standard complex symplectic form on C^{2n} preserved by psi(gl(n, H))."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]])).astype(complex)


def real_rep(A) -> np.ndarray:
    """4n x 4n real matrix of left multiplication by the quaternion matrix A."""
    A = np.asarray(A, dtype=float)
    n, m = A.shape[:2]
    # block (r, s) is left multiplication by A[r, s]: column c is A[r, s] * e_c
    blocks = qmul(A[:, :, None, :], np.eye(4)[None, None, :, :])  # (n, m, c, row)
    return np.transpose(blocks, (0, 3, 1, 2)).reshape(4 * n, 4 * m)


def right_mult(n: int, unit: int, sign: float = 1.0) -> np.ndarray:
    """Matrix of v -> v * (sign e_unit) on H^n (unit = 1, 2, 3 for i, j, k)."""
    e = np.zeros(4)
    e[unit] = sign
    blk = np.zeros((4, 4))
    for c in range(4):
        blk[:, c] = qmul(np.eye(4)[c], e)
    return np.kron(np.eye(n), blk)


def complex_structures(n: int):
    return [right_mult(n, a, -1.0) for a in (1, 2, 3)]


def kahler_forms(n: int):
    """omega_a matrices with omega_a[i, j] = g(I_a e_i, e_j) = (I_a)[j, i]."""
    return [I.T.copy() for I in complex_structures(n)]


def dual_bivector(omega: np.ndarray) -> np.ndarray:
    """Bivector omega^{-1}: the inverse of #_omega as a map T* -> T."""
    return np.linalg.inv(omega.T)


# -- Hermitian triples and the quadratic pencil -------------------------------


class NotHermitian(ValueError):
    pass


class NotOnCurve(ValueError):
    pass


@dataclass(frozen=True)
class HermQuatTriple:
    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray

    def __post_init__(self):
        mats = [np.asarray(a, dtype=float) for a in (self.A1, self.A2, self.A3)]
        if any(m.shape != mats[0].shape or m.ndim != 3 or m.shape[0] != m.shape[1] for m in mats):
            raise ValueError("triple entries must be n x n quaternion matrices")
        for name, m in zip(("A1", "A2", "A3"), mats):
            if not is_quat_hermitian(m, 1e-10 * max(1.0, float(np.max(np.abs(m), initial=0)))):
                raise NotHermitian(f"{name} is not quaternion-Hermitian")
        object.__setattr__(self, "A1", mats[0])
        object.__setattr__(self, "A2", mats[1])
        object.__setattr__(self, "A3", mats[2])

    @property
    def n(self) -> int:
        return self.A1.shape[0]

    def mats(self):
        return (self.A1, self.A2, self.A3)

    @classmethod
    def zero(cls, n: int) -> "HermQuatTriple":
        z = np.zeros((n, n, 4))
        return cls(z, z, z)

    @classmethod
    def random(cls, rng, n: int, scale: float = 1.0) -> "HermQuatTriple":
        return cls(*(random_hermitian(rng, n, scale) for _ in range(3)))

    def to_json(self):
        return {k: getattr(self, k).tolist() for k in ("A1", "A2", "A3")}

    @classmethod
    def from_json(cls, d):
        return cls(*(np.asarray(d[k], dtype=float) for k in ("A1", "A2", "A3")))


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    X = rng.normal(size=(n, n, 4)) * scale
    return 0.5 * (X + qadjoint(X))


@dataclass(frozen=True)
class QuadPencil:
    """A(zeta) = B0 + B1 zeta + B2 zeta^2 acting on E = C^{2n}."""

    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray

    @property
    def n(self) -> int:
        return self.B0.shape[0] // 2

    def __call__(self, zeta) -> np.ndarray:
        return self.B0 + zeta * self.B1 + zeta * zeta * self.B2

    def symmetry_residual(self, zetas=None) -> float:
        """max |omega_E A(zeta) + (omega_E A(zeta))^T| over sample zetas."""
        W = omega_E(self.n)
        if zetas is None:
            zetas = [0.0, 1.0, -0.5 + 0.3j, 2.0j, 0.7 - 1.1j]
        return max(float(np.max(np.abs(W @ self(z) + (W @ self(z)).T), initial=0.0)) for z in zetas)


def pencil_build(t: HermQuatTriple) -> QuadPencil:
    """A(zeta) = (A2 + i A3) + 2i A1 zeta - (A2 - i A3) zeta^2 on E."""
    p1, p2, p3 = (quat_embed(a) for a in t.mats())
    return QuadPencil(p2 + 1j * p3, 2j * p1, -p2 + 1j * p3)


# -- spectral curve ------------------------------------------------------------


@dataclass(frozen=True)
class SpectralCurvePoly:
    """p(zeta, eta) = eta^n + p_1(zeta) eta^(n-1) + ... + p_n(zeta).

    ``coeffs[i][m]`` is the coefficient of zeta^m in p_i (i = 0..n, p_0 = 1),
    with m = 0..2i.  ``degree_excess`` records the largest interpolated
    coefficient above zeta^{2i} that was discarded.
    """

    coeffs: tuple
    degree_excess: float = 0.0

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def p_i(self, i: int, zeta):
        c = np.asarray(self.coeffs[i])
        return np.polyval(c[::-1], zeta)

    def __call__(self, zeta, eta):
        return sum(self.p_i(i, zeta) * eta ** (self.n - i) for i in range(self.n + 1))

    def reality_residual(self, zetas, antipode: float = 1.0) -> float:
        """max relative |p_i(zeta) - (-1)^i zeta^{2i} conj(p_i(s / conj(zeta)))|.

        The pencil built by :func:`pencil_build` (linear term 2i A_1 zeta) is
        real for s = +1; the other sign is kept for curves written in the
        convention with a real linear coefficient.
        """
        worst = 0.0
        for z in zetas:
            for i in range(1, self.n + 1):
                lhs = self.p_i(i, z)
                rhs = (-1) ** i * z ** (2 * i) * np.conj(self.p_i(i, antipode / np.conj(z)))
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        return worst

    def to_json(self):
        return {
            "p": {
                str(i): {str(m): [float(np.real(c)), float(np.imag(c))] for m, c in enumerate(cs)}
                for i, cs in enumerate(self.coeffs)
            }
        }


def pfaffian_eta_coeffs(M0: np.ndarray) -> np.ndarray:
    """Coefficients (descending in eta) of Pf(omega_E (eta - M0)), monic."""
    n = M0.shape[0] // 2
    W = omega_E(n)
    scale = max(1.0, float(np.linalg.norm(M0, 2)))
    m = n + 1
    nodes = scale * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    vals = np.array([pfaffian_numeric(W @ (x * np.eye(2 * n) - M0)) for x in nodes])
    # vals_j = sum_k c_k s^k w^{k(j+1/2)}: undo the half-step phase, then DFT
    asc = np.fft.fft(vals) / m
    asc = asc * np.exp(-1j * np.pi * np.arange(m) / m) / scale ** np.arange(m)
    out = asc[::-1].copy()
    out[0] = 1.0
    return out


def spectral_curve(pencil: QuadPencil, degree_tol: float = 1e-8) -> SpectralCurvePoly:
    """p(zeta, eta) = Pf(omega_E (eta - A(zeta))), interpolated in zeta at the
    2n + 1 roots of unity."""
    n = pencil.n
    N = 2 * n + 1
    nodes = np.exp(2j * np.pi * np.arange(N) / N)
    table = np.array([pfaffian_eta_coeffs(pencil(z)) for z in nodes])  # (N, n+1)
    coeffs = []
    excess = 0.0
    for i in range(n + 1):
        asc = np.fft.fft(table[:, i]) / N  # zeta^m coefficients, m = 0..2n
        scale = max(1.0, float(np.max(np.abs(asc))))
        if 2 * i + 1 < N:
            excess = max(excess, float(np.max(np.abs(asc[2 * i + 1:]))) / scale)
        coeffs.append(tuple(asc[: 2 * i + 1]))
    curve = SpectralCurvePoly(tuple(coeffs), excess)
    if excess > degree_tol:
        raise ArithmeticError(f"interpolated p_i exceed degree 2i (excess {excess:.2e})")
    return curve


def char_vs_square_residual(pencil: QuadPencil, curve: SpectralCurvePoly, samples) -> float:
    """max relative |det(eta - A(zeta)) - p(zeta, eta)^2|."""
    worst = 0.0
    I = np.eye(2 * pencil.n)
    for z, e in samples:
        d = np.linalg.det(e * I - pencil(z))
        p2 = curve(z, e) ** 2
        worst = max(worst, abs(d - p2) / max(1.0, abs(d), abs(p2)))
    return worst


def cone_intersection_check(t: HermQuatTriple, samples, curve: SpectralCurvePoly | None = None) -> float:
    """Residual of det(z0 - x1 A1 - x2 A2 - x3 A3) = p(zeta, z0)^2 on the cone
    x1 = 2i zeta, x2 = 1 - zeta^2, x3 = i (1 + zeta^2)."""
    if curve is None:
        curve = spectral_curve(pencil_build(t))
    p1, p2, p3 = (quat_embed(a) for a in t.mats())
    I = np.eye(2 * t.n)
    worst = 0.0
    for z, z0 in samples:
        x1, x2, x3 = 2j * z, 1 - z * z, 1j * (1 + z * z)
        d = np.linalg.det(z0 * I - x1 * p1 - x2 * p2 - x3 * p3)
        p = curve(z, z0) ** 2
        worst = max(worst, abs(d - p) / max(1.0, abs(d), abs(p)))
    return worst


def sample_grid(rng, count: int = 25, radius: float = 1.5):
    zs = radius * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    es = radius * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
    return list(zip(zs, es))


def kernel_dim_on_curve(pencil: QuadPencil, zeta0, eta0, tol: float = 1e-8) -> int:
    M = eta0 * np.eye(2 * pencil.n) - pencil(zeta0)
    W = omega_E(pencil.n)
    p = pfaffian_numeric(W @ M)
    scale = max(1.0, float(np.linalg.norm(M, 2))) ** pencil.n
    if abs(p) > tol * scale:
        raise NotOnCurve(f"(zeta, eta) not on the spectral curve (|p| = {abs(p):.2e})")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return M.shape[0]
    return int(np.sum(s <= 1e-7 * s[0]))


def curve_points(pencil: QuadPencil, zeta0):
    """The n eta-roots of p(zeta0, .)."""
    return np.roots(pfaffian_eta_coeffs(pencil(zeta0)))


# -- Moore determinant ------------------------------------------------------


def quat_eigenvalues(A) -> np.ndarray:
    """Real eigenvalues of a quaternion-Hermitian matrix (each once)."""
    if not is_quat_hermitian(A, 1e-10 * max(1.0, float(np.max(np.abs(A), initial=0)))):
        raise NotHermitian("matrix is not quaternion-Hermitian")
    w = np.linalg.eigvalsh(quat_embed(A))  # ascending, each value twice
    return 0.5 * (w[0::2] + w[1::2])


def moore_det(A) -> float:
    """Product of the quaternionic eigenvalues; squares to det(psi(A))."""
    return float(np.prod(quat_eigenvalues(A)))


# -- aquaternionic endomorphisms and linear hyper-Poisson bivectors ----------


def aquaternionic_assemble(t: HermQuatTriple) -> np.ndarray:
    """A = I_1 A_1 + I_2 A_2 + I_3 A_3 on R^{4n}."""
    Is = complex_structures(t.n)
    return sum(I @ real_rep(a) for I, a in zip(Is, t.mats()))


def sandwich_sum(B: np.ndarray) -> np.ndarray:
    """sum_a I_a B I_a for an endomorphism B of R^{4n}."""
    n = B.shape[0] // 4
    return sum(I @ B @ I for I in complex_structures(n))


def bivector_sandwich(P: np.ndarray) -> np.ndarray:
    """(sum_a I_a (x) I_a) acting on a bivector: sum_a I_a P I_a^T."""
    n = P.shape[0] // 4
    return sum(I @ P @ I.T for I in complex_structures(n))


@dataclass(frozen=True)
class LinearHyperPoisson:
    triple: HermQuatTriple
    matrix: np.ndarray  # real antisymmetric 4n x 4n

    def twozero(self, direction=(1.0, 0.0, 0.0)) -> np.ndarray:
        """(2,0)-part w.r.t. the complex structure sum_a d_a I_a (|d| = 1)."""
        return twozero_part(self.matrix, structure_from_direction(self.triple.n, direction))


def structure_from_direction(n: int, direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return sum(c * I for c, I in zip(d, complex_structures(n)))


def twozero_part(P: np.ndarray, I: np.ndarray) -> np.ndarray:
    """(2,0)-part of a bivector: project both slots onto the +i eigenspace."""
    proj = 0.5 * (np.eye(I.shape[0]) - 1j * I)
    return proj @ P @ proj.T


def linear_hyper_poisson(t: HermQuatTriple) -> LinearHyperPoisson:
    """Pi(alpha, .) = sum_a A_a omega_a^{-1}(alpha, .) on R^{4n}."""
    sharp = sum(
        real_rep(a) @ dual_bivector(w).T for a, w in zip(t.mats(), kahler_forms(t.n))
    )  # #_Pi = Pi^T
    return LinearHyperPoisson(t, sharp.T.copy())


def holomorphic_inverse(n: int, axis: int = 0) -> np.ndarray:
    """(omega_b + i omega_c)^{-1} = (omega_b^{-1} - i omega_c^{-1}) / 4 for
    (a, b, c) cyclic starting at ``axis``; a bivector of I_a-type (2,0)."""
    w = kahler_forms(n)
    b, c = (axis + 1) % 3, (axis + 2) % 3
    return 0.25 * (dual_bivector(w[b]) - 1j * dual_bivector(w[c]))


def twozero_formula(t: HermQuatTriple, axis: int = 0) -> np.ndarray:
    """Closed form 2 (A_b + i A_c)(omega_b + i omega_c)^{-1} of the I_a-(2,0)
    part, (a, b, c) cyclic starting at ``axis``."""
    mats = t.mats()
    b, c = (axis + 1) % 3, (axis + 2) % 3
    A = real_rep(mats[b]) + 1j * real_rep(mats[c])
    return 2.0 * (A @ holomorphic_inverse(t.n, axis).T).T


# -- real spectral surface ----------------------------------------------------


def real_surface_value(t: HermQuatTriple, x) -> float:
    """det_H(x0 - x1 A1 - x2 A2 - x3 A3) at a real point x."""
    x0, x1, x2, x3 = x
    n = t.n
    ident = np.zeros((n, n, 4))
    ident[np.arange(n), np.arange(n), 0] = 1.0
    M = x0 * ident - x1 * t.A1 - x2 * t.A2 - x3 * t.A3
    return moore_det(M)


def real_surface_slice(t: HermQuatTriple, plane=(1, 2), fixed=(1.0, 0.0), extent=2.0, res=81):
    """Grid of det_H values over a coordinate plane (x0 = 1 affine chart).

    ``plane`` picks which two of x1, x2, x3 vary; the remaining one is fixed
    to ``fixed[1]`` while x0 = ``fixed[0]``.
    """
    xs = np.linspace(-extent, extent, res)
    vals = np.empty((res, res))
    other = ({1, 2, 3} - set(plane)).pop()
    for a, u in enumerate(xs):
        for b, v in enumerate(xs):
            x = [fixed[0], 0.0, 0.0, 0.0]
            x[plane[0]] = u
            x[plane[1]] = v
            x[other] = fixed[1]
            vals[b, a] = real_surface_value(t, x)
    return xs, vals
