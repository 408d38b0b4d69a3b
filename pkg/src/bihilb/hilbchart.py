"""Charts on the transverse Hilbert scheme of n points of a symplectic surface.

Two surface models are built in:

* ``"plane"``: C^2 with omega = dz ^ du, pi(z, u) = z;
* ``"cstar"``: C x C^* with omega = dz ^ dp / p, pi(z, p) = z (the surface
  behind the monopole moduli spaces).

A point is stored either as a pair of polynomials (q, p) with q monic of
degree n and deg p < n, or through the roots z_i of q and the values
u_i = p(z_i).  Root-chart coordinates are interleaved: (z1, u1, z2, u2, ...).
The coefficient chart lists q-coefficients (descending, leading 1 dropped)
followed by p-coefficients (descending).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bipoisson import Chart, PolyBivector, pencil_rank
from .kernels import pfaffian_numeric
from .symcore import MultiPoly

COLLISION_RTOL = 1e-7


class ChartBoundary(ValueError):
    pass


@dataclass(frozen=True)
class TransversePoint:
    q: np.ndarray  # descending, q[0] == 1, length n + 1
    p: np.ndarray  # descending, length n

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=complex))
        p = np.atleast_1d(np.asarray(self.p, dtype=complex))
        if len(q) < 2 or q[0] != 1:
            raise ValueError("q must be monic of degree >= 1")
        n = len(q) - 1
        if len(p) > n:
            if np.any(p[: len(p) - n] != 0):
                raise ValueError("deg p must be < deg q")
            p = p[len(p) - n:]
        p = np.concatenate([np.zeros(n - len(p), dtype=complex), p])
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.q) - 1

    def coords(self) -> np.ndarray:
        """Coefficient-chart coordinates (q_1..q_n, p_{n-1}..p_0)."""
        return np.concatenate([self.q[1:], self.p])

    @classmethod
    def from_coords(cls, x) -> "TransversePoint":
        x = np.asarray(x, dtype=complex)
        n = len(x) // 2
        return cls(np.concatenate([[1.0], x[:n]]), x[n:])

    def to_json(self):
        return {"q": _cjson(self.q), "p": _cjson(self.p)}


@dataclass(frozen=True)
class RootChartPoint:
    roots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.roots, dtype=complex))
        v = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if r.shape != v.shape:
            raise ValueError("roots and values must have equal length")
        object.__setattr__(self, "roots", r)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.roots)

    def coords(self) -> np.ndarray:
        """Interleaved root-chart coordinates (z1, u1, z2, u2, ...)."""
        out = np.empty(2 * self.n, dtype=complex)
        out[0::2] = self.roots
        out[1::2] = self.values
        return out

    def to_json(self):
        return {"roots": _cjson(self.roots), "values": _cjson(self.values)}


def _cjson(a):
    return [[float(x.real), float(x.imag)] if x.imag else float(x.real) for x in np.asarray(a, dtype=complex)]


def _check_separated(z):
    scale = max(1.0, float(np.max(np.abs(z)))) if len(z) else 1.0
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if abs(z[i] - z[j]) <= COLLISION_RTOL * scale:
                raise ChartBoundary("chart boundary: roots collide")


def roots_to_coeffs(r: RootChartPoint) -> TransversePoint:
    z = r.roots
    _check_separated(z)
    q = np.poly(z).astype(complex)
    V = np.vander(z, r.n)  # descending powers
    p = np.linalg.solve(V, r.values)
    return TransversePoint(q, p)


def coeffs_to_roots(t: TransversePoint) -> RootChartPoint:
    # np.roots: eigenvalues of the companion matrix
    z = np.roots(t.q) if t.n > 1 else np.array([-t.q[1]])
    z = np.sort_complex(np.asarray(z, dtype=complex))
    _check_separated(z)
    return RootChartPoint(z, np.polyval(t.p, z))


def root_chart(n: int, surface: str = "plane") -> Chart:
    second = {"plane": "u", "cstar": "p"}[surface]
    names = []
    for i in range(1, n + 1):
        names += [f"z{i}", f"{second}{i}"]
    return Chart(tuple(names))


def chart_bivectors(n: int, surface: str = "plane"):
    """(Pi_1, Pi_2) on the root chart.

    plane: Pi_1 = sum d/dz_i ^ d/du_i, Pi_2 = sum z_i d/dz_i ^ d/du_i.
    cstar: Pi_1 = sum p_i d/dz_i ^ d/dp_i, Pi_2 = sum z_i p_i d/dz_i ^ d/dp_i.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    chart = root_chart(n, surface)
    e1, e2 = [], []
    for i in range(n):
        z = MultiPoly.var(chart.coords[2 * i])
        w = MultiPoly.var(chart.coords[2 * i + 1])
        base = MultiPoly.const(1) if surface == "plane" else w
        e1.append((2 * i, 2 * i + 1, base))
        e2.append((2 * i, 2 * i + 1, z * base))
    return PolyBivector.from_entries(chart, e1), PolyBivector.from_entries(chart, e2)


def root_bivectors_numeric(r: RootChartPoint, surface: str = "plane"):
    n = r.n
    p1 = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        w = 1.0 if surface == "plane" else r.values[i]
        p1[2 * i, 2 * i + 1] = w
        p1[2 * i + 1, 2 * i] = -w
    R = np.repeat(r.roots, 2)
    return p1, R[:, None] * p1


def chart_jacobian(r: RootChartPoint) -> np.ndarray:
    """d(coefficient coords) / d(root coords), root coords interleaved."""
    z, n = r.roots, r.n
    t = roots_to_coeffs(r)
    dp = np.polyder(t.p) if n > 1 else np.zeros(1)
    J = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        others = np.delete(z, i)
        li = np.atleast_1d(np.poly(others)).astype(complex)  # prod_{j != i} (x - z_j), degree n-1
        # d q / d z_i = -prod_{j != i}(x - z_j); q-coefficients are q[1:]
        J[:n, 2 * i] = -li
        # Lagrange basis L_i = li / li(z_i); d p / d u_i = L_i, d p / d z_i = -p'(z_i) L_i
        Li = li / np.polyval(li, z[i])
        J[n:, 2 * i + 1] = Li
        J[n:, 2 * i] = -np.polyval(dp, z[i]) * Li
    return J


def pushforward_bivectors_qp(t: TransversePoint, surface: str = "plane"):
    """Pi_1, Pi_2 at t in coefficient coordinates: J Pi J^T."""
    r = coeffs_to_roots(t)
    J = chart_jacobian(r)
    p1, p2 = root_bivectors_numeric(r, surface)
    return J @ p1 @ J.T, J @ p2 @ J.T


def bivectors_qp_at(x, surface: str = "plane"):
    return pushforward_bivectors_qp(TransversePoint.from_coords(x), surface)


def canonical_map(t: TransversePoint) -> np.ndarray:
    return np.array(t.q[1:])


def pfaffian_polynomial_numeric(p1: np.ndarray, p2: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Monic mu(lam) = Pf(lam p1 - p2) / Pf(p1), descending coefficients.

    Sampled at n + 1 scaled roots of unity and recovered by inverse DFT.
    """
    n = p1.shape[0] // 2
    pf1 = pfaffian_numeric(np.asarray(p1, dtype=complex))
    if pf1 == 0:
        raise ValueError("first bivector is degenerate")
    if scale is None:
        R = p2 @ np.linalg.inv(p1)
        scale = max(1.0, float(np.max(np.abs(np.linalg.eigvals(R)))))
    m = n + 1
    nodes = scale * np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.array([pfaffian_numeric(np.asarray(x * p1 - p2, dtype=complex)) / pf1 for x in nodes])
    asc = np.fft.fft(vals) / m  # c_k scale^k, ascending
    asc = asc / scale ** np.arange(m)
    out = asc[::-1].copy()
    out[0] = 1.0  # exact by construction
    return out


def degeneracy_rank_qp(t: TransversePoint, lam0, surface: str = "plane", tol: float = 1e-8) -> int:
    p1, p2 = pushforward_bivectors_qp(t, surface)
    return pencil_rank(p1, p2, lam0, tol)


def random_root_point(rng, n: int, spread: float = 1.0, min_sep: float = 0.3) -> RootChartPoint:
    while True:
        z = spread * (rng.normal(size=n) + 1j * rng.normal(size=n))
        if n == 1 or min(abs(a - b) for i, a in enumerate(z) for b in z[i + 1:]) > min_sep:
            break
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    return RootChartPoint(z, u)


def twisted_chart_bivectors(n: int = 2):
    """The plane root-chart pair after two polynomial symplectic shears
    u -> u - grad S(z), then z -> z - grad T(u).

    Pi_1 stays canonical while Pi_2 and the recursion operator become
    non-diagonal and depend on every coordinate: a non-trivial bi-Poisson
    pencil with exactly known Pfaffian polynomial.
    """
    from .bipoisson import pushforward

    P, Q = chart_bivectors(n, "plane")
    cs = P.chart.coords
    z = [MultiPoly.var(c) for c in cs[0::2]]
    u = [MultiPoly.var(c) for c in cs[1::2]]
    S = sum((z[i] ** 3 * z[(i + 1) % n] ** 2 for i in range(n)), MultiPoly.zero()) if n > 1 else z[0] ** 4
    T = sum((u[i] ** 2 * u[(i + 1) % n] for i in range(n)), MultiPoly.zero()) if n > 1 else u[0] ** 3
    for gen, moved, fixed in ((S, u, z), (T, z, u)):
        fw, inv = {}, {}
        for a, b in zip(moved, fixed):
            g = gen.diff(b.vars[0]) if b.vars[0] in gen.vars else MultiPoly.zero()
            fw[a.vars[0]] = a - g
            inv[a.vars[0]] = a + g
        for b in fixed:
            fw[b.vars[0]] = b
            inv[b.vars[0]] = b
        P, Q = pushforward(P, fw, inv, P.chart), pushforward(Q, fw, inv, P.chart)
    return P, Q
