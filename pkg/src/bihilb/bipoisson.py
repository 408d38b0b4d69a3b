"""Polynomial bivector fields on coordinate charts.

Schouten brackets and Poisson verdicts are exact (``symcore``); the
recursion operator, minimal polynomial, Nijenhuis tensor and degeneracy rank
are pointwise numerical.

Matrix conventions: a bivector P has components ``P[i][j] = P(dx_i, dx_j)``
and ``#_P(alpha) = P(alpha, .)``, so the recursion operator of a pair (P, Q)
is the matrix ``R = Q @ inv(P)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .kernels import pfaffian_numeric
from .symcore import (
    GaussRational,
    MultiPoly,
    PolyMatrix,
    SymbolicError,
    adjugate,
    det,
    pfaffian,
)

RANK_RTOL = 1e-8


class ChartMismatch(ValueError):
    pass


class NotSymplecticHere(ValueError):
    pass


class DegeneratePencil(ValueError):
    pass


class LeavesPolynomialClass(ValueError):
    pass


class NotOnLocus(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) % 2 or not self.coords:
            raise ValueError("chart dimension must be even and positive")
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def point(self, values) -> dict:
        """Normalise a point given as a mapping or a sequence in chart order."""
        if isinstance(values, dict):
            missing = set(self.coords) - set(values)
            if missing:
                raise ValueError(f"point misses coordinates {sorted(missing)}")
            return {c: values[c] for c in self.coords}
        values = list(values)
        if len(values) != self.dim:
            raise ValueError("point has the wrong dimension")
        return dict(zip(self.coords, values))


@dataclass(frozen=True)
class PolyBivector:
    chart: Chart
    comp: PolyMatrix

    def __post_init__(self):
        if self.comp.shape != (self.chart.dim, self.chart.dim):
            raise ValueError("component matrix does not match chart dimension")
        if not self.comp.is_antisymmetric():
            raise ValueError("bivector components must be antisymmetric")
        stray = set(self.comp.vars) - set(self.chart.coords)
        if stray:
            raise ValueError(f"entries use non-chart variables {sorted(stray)}")
        # every entry lives over the full chart context
        object.__setattr__(self, "comp", self.comp.map(lambda p: p.extend(self.chart.coords)))

    @classmethod
    def from_entries(cls, chart: Chart, entries) -> "PolyBivector":
        """Build from ``(row, col, poly)`` triples; the (col, row) entry is
        filled in by antisymmetry."""
        n = chart.dim
        grid = [[MultiPoly.zero(chart.coords) for _ in range(n)] for _ in range(n)]
        for i, j, p in entries:
            if i == j:
                raise ValueError("diagonal entries of a bivector vanish")
            if not isinstance(p, MultiPoly):
                p = MultiPoly.const(p)
            grid[i][j] = grid[i][j] + p
            grid[j][i] = grid[j][i] - p
        return cls(chart, PolyMatrix(grid))

    @classmethod
    def zero(cls, chart: Chart) -> "PolyBivector":
        return cls.from_entries(chart, [])

    def __getitem__(self, ij) -> MultiPoly:
        return self.comp[ij]

    def __add__(self, o: "PolyBivector") -> "PolyBivector":
        _same_chart(self, o)
        return PolyBivector(self.chart, self.comp + o.comp)

    def __sub__(self, o: "PolyBivector") -> "PolyBivector":
        _same_chart(self, o)
        return PolyBivector(self.chart, self.comp - o.comp)

    def scale(self, s) -> "PolyBivector":
        return PolyBivector(self.chart, self.comp.scale(s))

    def at(self, point) -> np.ndarray:
        return self.comp.eval(self.chart.point(point))

    def __eq__(self, o):
        return isinstance(o, PolyBivector) and self.chart == o.chart and self.comp == o.comp

    __hash__ = None


def _same_chart(P, Q):
    if P.chart != Q.chart:
        raise ChartMismatch(f"charts differ: {P.chart.coords} vs {Q.chart.coords}")


class Trivector:
    """Fully antisymmetric rank-3 array of polynomials."""

    def __init__(self, chart: Chart, comp):
        self.chart = chart
        self.comp = comp  # nested lists [i][j][k]

    def __getitem__(self, ijk) -> MultiPoly:
        i, j, k = ijk
        return self.comp[i][j][k]

    def is_zero(self) -> bool:
        n = self.chart.dim
        return all(self.comp[i][j][k].is_zero() for i in range(n) for j in range(n) for k in range(n))

    def nonzero(self):
        n = self.chart.dim
        return [
            (i, j, k, self.comp[i][j][k])
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(j + 1, n)
            if not self.comp[i][j][k].is_zero()
        ]


def schouten_bracket(P: PolyBivector, Q: PolyBivector) -> Trivector:
    """[P, Q]^{ijk} = sum_l P^{li} d_l Q^{jk} + Q^{li} d_l P^{jk} + cyclic(ijk)."""
    _same_chart(P, Q)
    chart = P.chart
    n = chart.dim
    dP = [[[P[j, k].diff(x) for x in chart.coords] for k in range(n)] for j in range(n)]
    dQ = [[[Q[j, k].diff(x) for x in chart.coords] for k in range(n)] for j in range(n)]
    zero = MultiPoly.zero(chart.coords)

    def half(i, j, k):
        acc = zero
        for l in range(n):
            if P[l, i].terms and dQ[j][k][l].terms:
                acc = acc + P[l, i] * dQ[j][k][l]
            if Q[l, i].terms and dP[j][k][l].terms:
                acc = acc + Q[l, i] * dP[j][k][l]
        return acc

    comp = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                v = half(i, j, k) + half(j, k, i) + half(k, i, j)
                for perm, sign in _PERM3:
                    a, b, c = (i, j, k)[perm[0]], (i, j, k)[perm[1]], (i, j, k)[perm[2]]
                    comp[a][b][c] = v if sign > 0 else -v
    return Trivector(chart, comp)


def _perm_sign(p):
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


_PERM3 = [(p, _perm_sign(p)) for p in permutations(range(3))]


@dataclass(frozen=True)
class PoissonVerdict:
    poisson_P: bool
    poisson_Q: bool
    compatible: bool

    @property
    def all(self) -> bool:
        return self.poisson_P and self.poisson_Q and self.compatible

    def as_dict(self):
        return {"poisson_P": self.poisson_P, "poisson_Q": self.poisson_Q, "compatible": self.compatible}


def is_poisson_pair(P: PolyBivector, Q: PolyBivector) -> PoissonVerdict:
    _same_chart(P, Q)
    return PoissonVerdict(
        schouten_bracket(P, P).is_zero(),
        schouten_bracket(Q, Q).is_zero(),
        schouten_bracket(P, Q).is_zero(),
    )


def poisson_bracket(P: PolyBivector, f: MultiPoly, g: MultiPoly) -> MultiPoly:
    """{f, g} = P(df, dg), exact."""
    cs = P.chart.coords
    f = f.extend(cs)
    g = g.extend(cs)
    df = [f.diff(x) for x in cs]
    dg = [g.diff(x) for x in cs]
    acc = MultiPoly.zero(cs)
    for i in range(len(cs)):
        for j in range(len(cs)):
            if P[i, j].terms and df[i].terms and dg[j].terms:
                acc = acc + P[i, j] * df[i] * dg[j]
    return acc


def pushforward(P: PolyBivector, forward: dict, inverse: dict, new_chart: Chart) -> PolyBivector:
    """Express P in new coordinates.

    ``forward`` maps each new coordinate to a polynomial in the old ones,
    ``inverse`` maps each old coordinate to a polynomial in the new ones (the
    change of chart must be polynomial both ways).
    """
    old = P.chart.coords
    jac = [[_poly(forward[a]).extend(old).diff(x) for x in old] for a in new_chart.coords]
    rows = []
    for a in range(new_chart.dim):
        row = []
        for b in range(new_chart.dim):
            acc = MultiPoly.zero(old)
            for i in range(len(old)):
                if not jac[a][i].terms:
                    continue
                for j in range(len(old)):
                    if jac[b][j].terms and P[i, j].terms:
                        acc = acc + jac[a][i] * P[i, j] * jac[b][j]
            row.append(acc.subs(inverse).extend(new_chart.coords))
        rows.append(row)
    return PolyBivector(new_chart, PolyMatrix(rows))


def _poly(x) -> MultiPoly:
    return x if isinstance(x, MultiPoly) else MultiPoly.const(x)


# -- recursion operator ----------------------------------------------------


@dataclass(frozen=True)
class RecursionOperatorSample:
    point: dict
    matrix: np.ndarray

    def eigenvalues(self):
        return np.linalg.eigvals(self.matrix)


def _numeric_pair(P, Q, point):
    pt = P.chart.point(point)
    return P.comp.eval(pt), Q.comp.eval(pt)


def _symplectic_or_raise(p: np.ndarray):
    s = np.linalg.svd(p, compute_uv=False)
    if s[-1] <= RANK_RTOL * max(s[0], 1.0):
        raise NotSymplecticHere("not symplectic here: first bivector is degenerate at the point")


def recursion_operator_at(P: PolyBivector, Q: PolyBivector, point) -> RecursionOperatorSample:
    _same_chart(P, Q)
    p, q = _numeric_pair(P, Q, point)
    _symplectic_or_raise(p)
    return RecursionOperatorSample(P.chart.point(point), q @ np.linalg.inv(p))


def recursion_operator_matrix(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    _symplectic_or_raise(p)
    return q @ np.linalg.inv(p)


@dataclass(frozen=True)
class PfaffPoly:
    """mu(lam) = lam^n + c_1 lam^(n-1) + ... + c_n with polynomial c_i."""

    lam: str
    poly: MultiPoly
    coeffs: tuple  # descending: (1, c_1, ..., c_n)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def at(self, point: dict) -> np.ndarray:
        return np.array([complex(c.eval(point)) if c.vars else complex(c.constant_value()) for c in self.coeffs])


def pfaffian_polynomial(P: PolyBivector, Q: PolyBivector, lam: str = "lam") -> PfaffPoly:
    """mu_R(lam) = Pf(lam P - Q) / Pf(P), exact and monic of degree n."""
    _same_chart(P, Q)
    if lam in P.chart.coords:
        raise ValueError(f"{lam!r} clashes with a chart coordinate")
    pfP = pfaffian(P.comp)
    if pfP.is_zero():
        raise DegeneratePencil("degenerate pencil: Pf(P) vanishes identically")
    L = MultiPoly.var(lam)
    pencil = PolyMatrix(
        [[P[i, j] * L - Q[i, j] for j in range(P.chart.dim)] for i in range(P.chart.dim)]
    )
    num = pfaffian(pencil)
    try:
        mu = num.divexact(pfP)
    except SymbolicError as exc:
        raise LeavesPolynomialClass("Pfaffian polynomial has non-polynomial coefficients") from exc
    mu = mu.extend(P.chart.coords + (lam,))
    cs = mu.coeffs_in(lam)[::-1]
    cs = [c.extend(P.chart.coords) for c in cs]
    return PfaffPoly(lam, mu, tuple(cs))


def recursion_operator_symbolic(P: PolyBivector, Q: PolyBivector):
    """Return (numerator, denominator) with R = numerator / denominator,
    numerator = Q adj(P), denominator = det(P)."""
    _same_chart(P, Q)
    d = det(P.comp)
    if d.is_zero():
        raise DegeneratePencil("degenerate pencil: det(P) vanishes identically")
    return Q.comp @ adjugate(P.comp), d


def charpoly_recursion(P: PolyBivector, Q: PolyBivector, lam: str = "lam") -> MultiPoly:
    """chi_R(lam) = det(lam - R), exact (raises if not polynomial)."""
    num, d = recursion_operator_symbolic(P, Q)
    n = P.chart.dim
    L = MultiPoly.var(lam)
    m = PolyMatrix(
        [[(d * L if i == j else MultiPoly.zero(P.chart.coords)) - num[i, j] for j in range(n)] for i in range(n)]
    )
    try:
        return det(m).divexact(d ** n)
    except SymbolicError as exc:
        raise LeavesPolynomialClass("characteristic polynomial is not polynomial") from exc


def minimal_polynomial_check(R, mu, tol: float = 1e-8, root_tol: float = 1e-6) -> bool:
    """True iff the monic polynomial ``mu`` (descending coefficients)
    annihilates R and no proper monic divisor of it does."""
    m = R.matrix if isinstance(R, RecursionOperatorSample) else np.asarray(R)
    mu = np.asarray(mu, dtype=complex)
    if abs(mu[0] - 1) > 1e-12:
        raise ValueError("mu must be monic")
    scale = max(1.0, np.linalg.norm(m, 2)) ** (len(mu) - 1)
    if np.linalg.norm(_polyval_matrix(mu, m), 2) > tol * scale:
        return False
    roots = np.roots(mu)
    distinct = []
    for r in roots:
        if all(abs(r - s) > root_tol * max(1.0, abs(s)) for s in distinct):
            distinct.append(r)
    for r in distinct:
        # maximal proper divisors: drop one copy of a root
        div = np.polydiv(mu, np.array([1.0, -r]))[0]
        if len(div) == 0:
            div = np.array([1.0 + 0j])
        if np.linalg.norm(_polyval_matrix(div, m), 2) <= tol * scale:
            return False
    return True


def _polyval_matrix(coeffs, m):
    out = np.zeros_like(m, dtype=complex)
    ident = np.eye(m.shape[0])
    for c in coeffs:
        out = out @ m + c * ident
    return out


def nijenhuis_tensor(P: PolyBivector, Q: PolyBivector, point, step: float = 1e-3) -> np.ndarray:
    """N[i, a, b]: i-th component of N(d_a, d_b), with the derivatives of R
    by central differences along each coordinate axis."""
    _same_chart(P, Q)
    chart = P.chart
    pt = chart.point(point)
    base = np.array([complex(pt[c]) for c in chart.coords])

    def R_at(x):
        p, q = _numeric_pair(P, Q, dict(zip(chart.coords, x)))
        return recursion_operator_matrix(p, q)

    R = R_at(base)
    n = chart.dim
    dR = np.empty((n, n, n), dtype=complex)  # dR[l] = d_l R
    for l in range(n):
        e = np.zeros(n)
        e[l] = step
        dR[l] = (R_at(base + e) - R_at(base - e)) / (2 * step)
    # N^i_ab = R_ja d_j R_ib - R_jb d_j R_ia - R_ij d_a R_jb + R_ij d_b R_ja
    t1 = np.einsum("ja,jib->iab", R, dR)
    t2 = np.einsum("jb,jia->iab", R, dR)
    t3 = np.einsum("ij,ajb->iab", R, dR)
    t4 = np.einsum("ij,bja->iab", R, dR)
    return t1 - t2 - t3 + t4


def _as_rho(rho):
    """Coefficient list (ascending) of a univariate polynomial."""
    if isinstance(rho, MultiPoly):
        r = rho.trimmed()
        if len(r.vars) > 1:
            raise ValueError("rho must be univariate")
        if not r.vars:
            return [r.constant_value()]
        return [c.constant_value() for c in r.coeffs_in(r.vars[0])]
    return [GaussRational.coerce(c) for c in rho]


def magri_rho(P: PolyBivector, Q: PolyBivector, rho) -> PolyBivector:
    """Pi_rho with #Pi_rho = rho(R) #P, i.e. Pi_rho = rho(R) P."""
    _same_chart(P, Q)
    cs = _as_rho(rho)
    deg = len(cs) - 1
    num, d = recursion_operator_symbolic(P, Q)
    n = P.chart.dim
    acc = PolyMatrix.zeros(n, n, P.chart.coords)
    power = P.comp  # (Q adj P)^k P
    for k, c in enumerate(cs):
        if c:
            acc = acc + power.scale(d ** (deg - k)).scale(c)
        if k < deg:
            power = num @ power
    denom = d ** deg
    try:
        out = acc.map(lambda p: p.divexact(denom).extend(P.chart.coords) if p.terms else p)
    except SymbolicError as exc:
        raise LeavesPolynomialClass("rho(R) P leaves polynomial class") from exc
    return PolyBivector(P.chart, out)


def degeneracy_rank(P: PolyBivector, Q: PolyBivector, lam0, point, tol: float = 1e-8) -> int:
    """Numeric rank of Q - lam0 P at a point of the degeneracy locus."""
    _same_chart(P, Q)
    p, q = _numeric_pair(P, Q, point)
    return pencil_rank(p, q, lam0, tol)


def pencil_rank(p: np.ndarray, q: np.ndarray, lam0, tol: float = 1e-8) -> int:
    m = q - lam0 * p
    pf_p = pfaffian_numeric(np.asarray(p, dtype=complex))
    if pf_p == 0:
        raise NotSymplecticHere("not symplectic here")
    mu = pfaffian_numeric(np.asarray(lam0 * p - q, dtype=complex)) / pf_p
    scale = max(1.0, np.linalg.norm(q, 2), abs(lam0) * np.linalg.norm(p, 2)) ** (p.shape[0] // 2)
    if abs(mu) > tol * scale:
        raise NotOnLocus(f"point not on degeneracy locus (|mu| = {abs(mu):.3e})")
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
