"""Four-dimensional hyperkahler models with a tri-Hamiltonian circle action.

Models come from the Gibbons-Hawking ansatz in coordinates x = (tau, x1, x2, x3):

    g = V^{-1} (dtau + theta)^2 + V |dx|^2,
    omega_a = (dtau + theta) ^ dx_a + V dx_b ^ dx_c      ((a, b, c) cyclic),

with V harmonic and theta the monopole connection that makes every omega_a
closed.  The Killing field is d/dtau and its
hyperkahler moment maps are mu_a = x_a.  Complex structures are defined by
omega_a(u, v) = g(I_a u, v).  For V = 1 the identification
tau - x1 i - x2 j - x3 k with H reproduces the flat conventions of
:mod:`bihilb.quatlin` (I_a = right multiplication by -i, -j, -k).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

FD_STEP = 1e-4
FD_TOL = 1e-6
# below this the central-difference error is dominated by rounding and the
# step-halving ratio carries no information
ROUNDOFF_FLOOR = 1e-9
HALVING_MIN_RATIO = 3.0

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


class ModelDomainError(ValueError):
    pass


class DegenerateBivector(ValueError):
    pass


@dataclass(frozen=True)
class HKModel4:
    name: str
    mass: float = 0.0

    # -- potential and connection --------------------------------------
    def V(self, x) -> float:
        if self.name == "flat":
            return 1.0
        r = float(np.linalg.norm(x[1:]))
        v = 1.0 + self.mass / (2.0 * r) if r > 0 else np.inf
        if not v > 0 or not np.isfinite(v):
            raise ModelDomainError(f"V = {v} is not positive at {list(x)}")
        return v

    def theta(self, x) -> np.ndarray:
        """Components (theta_tau, theta_1, theta_2, theta_3); theta_tau = 0."""
        out = np.zeros(4)
        if self.name == "flat" or self.mass == 0:
            return out
        x1, x2, x3 = x[1:]
        r = float(np.linalg.norm(x[1:]))
        if r + x3 <= 1e-12 * max(r, 1.0):
            raise ModelDomainError("connection chart singular on the negative x3-axis")
        c = 0.5 * self.mass / (r * (r + x3))
        out[1] = -c * x2
        out[2] = c * x1
        return out

    # -- tensors --------------------------------------------------------
    def coframe(self, x) -> np.ndarray:
        """Rows: e0 = V^{-1/2}(dtau + theta), e_a = V^{1/2} dx_a."""
        V = self.V(x)
        E = np.zeros((4, 4))
        E[0] = (np.eye(4)[0] + self.theta(x)) / np.sqrt(V)
        E[1:, 1:] = np.sqrt(V) * np.eye(3)
        return E

    def metric(self, x) -> np.ndarray:
        E = self.coframe(x)
        return E.T @ E

    def kahler_forms(self, x) -> list:
        E = self.coframe(x)
        out = []
        for a, b, c in _CYCLIC:
            w = np.outer(E[0], E[a + 1]) + np.outer(E[b + 1], E[c + 1])
            out.append(w - w.T)
        return out

    def complex_structures(self, x) -> list:
        # omega(u, v) = g(I u, v) means omega = I^T g
        ginv = np.linalg.inv(self.metric(x))
        return [ginv @ w.T for w in self.kahler_forms(x)]

    def moment_maps(self, x) -> np.ndarray:
        return np.asarray(x[1:], dtype=float).copy()

    def killing(self, x) -> np.ndarray:
        return np.eye(4)[0]

    def to_json(self):
        return {"V": self.name, "mass": self.mass}


def model_gibbons_hawking(V: str = "flat", mass: float = 1.0) -> HKModel4:
    if V == "flat":
        return HKModel4("flat", 0.0)
    if V == "taubnut":
        return HKModel4("taubnut", float(mass))
    raise ValueError(f"unknown harmonic function {V!r}")


def model_from_spec(spec: dict) -> HKModel4:
    return model_gibbons_hawking(spec.get("V", "flat"), spec.get("mass", 1.0))


def random_points(rng, count: int, radius: tuple = (0.5, 2.0)) -> np.ndarray:
    """Points with |x| in the given shell, away from the negative x3-axis."""
    pts = []
    while len(pts) < count:
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        if d[2] < -0.8:
            continue
        r = rng.uniform(*radius)
        pts.append(np.concatenate([[rng.uniform(-np.pi, np.pi)], r * d]))
    return np.array(pts)


# -- finite differences ---------------------------------------------------


def fd_gradient(f: Callable, x, h: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a (possibly array-valued) function;
    the derivative index is the leading axis of the result."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.array(cols)


@dataclass
class HalvingResult:
    """Residual at step h and h/2 and the rule applied to accept them."""

    residual_h: float
    residual_h2: float

    @property
    def ratio(self) -> float:
        return self.residual_h / self.residual_h2 if self.residual_h2 > 0 else np.inf

    def converging(self) -> bool:
        if self.residual_h <= ROUNDOFF_FLOOR:
            return True
        return self.ratio >= HALVING_MIN_RATIO

    def ok(self, tol: float = FD_TOL) -> bool:
        return self.residual_h2 <= tol and self.converging()


def halving(residual: Callable[[float], float], h: float = FD_STEP) -> HalvingResult:
    return HalvingResult(float(residual(h)), float(residual(h / 2)))


def invariant_residuals(m: HKModel4, x, h: float = FD_STEP) -> dict:
    """Algebraic identities exactly, differential ones by central differences."""
    x = np.asarray(x, dtype=float)
    g = m.metric(x)
    Is = m.complex_structures(x)
    ws = m.kahler_forms(x)
    Id = np.eye(4)
    out = {
        "square": max(np.abs(I @ I + Id).max() for I in Is),
        "quaternion": np.abs(Is[0] @ Is[1] - Is[2]).max(),
        "compatible": max(np.abs(w - I.T @ g).max() for w, I in zip(ws, Is)),
        "orthogonal": max(np.abs(I.T @ g @ I - g).max() for I in Is),
    }

    def d_omega(step):
        dw = fd_gradient(lambda y: np.array(m.kahler_forms(y)), x, step)  # (i, a, j, k)
        res = dw + np.transpose(dw, (2, 1, 3, 0)) + np.transpose(dw, (3, 1, 0, 2))
        return np.abs(res).max()

    def moment(step):
        dmu = fd_gradient(m.moment_maps, x, step)  # (i, a)
        X = m.killing(x)
        return max(np.abs(X @ w - dmu[:, a]).max() for a, w in enumerate(m.kahler_forms(x)))

    out["closed"] = halving(d_omega, h)
    out["moment"] = halving(moment, h)
    return out


# -- hyper-Poisson triples ------------------------------------------------


@dataclass
class HPTriple4:
    f1: Callable
    f2: Callable
    f3: Callable
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.array([self.f1(x), self.f2(x), self.f3(x)], dtype=float)

    @classmethod
    def moment(cls, m: HKModel4) -> "HPTriple4":
        return cls(*(lambda x, a=a: m.moment_maps(x)[a] for a in range(3)), label="moment")

    @classmethod
    def constant(cls, c) -> "HPTriple4":
        return cls(*(lambda x, v=v: float(v) for v in c), label=f"const{tuple(c)}")


@dataclass
class HPVerdict:
    passed: bool
    residuals: list = field(default_factory=list)
    halving: list = field(default_factory=list)

    def as_dict(self):
        return {
            "passed": self.passed,
            "max_residual": max(self.residuals, default=0.0),
            "residuals": self.residuals,
            "halving_ratios": [h.ratio if np.isfinite(h.ratio) else None for h in self.halving],
        }


def _i_df(m: HKModel4, f: HPTriple4, x, h):
    """The three covectors I_a df_a, where (I alpha)(v) = alpha(I v)."""
    df = fd_gradient(f, x, h)  # (i, a)
    return [I.T @ df[:, a] for a, I in enumerate(m.complex_structures(x))]


def hyper_poisson_residual(m: HKModel4, f: HPTriple4, x, h: float = FD_STEP) -> float:
    c1, c2, c3 = _i_df(m, f, x, h)
    return float(np.linalg.norm(c1 - c2) + np.linalg.norm(c2 - c3))


def check_hyper_poisson(
    m: HKModel4, f: HPTriple4, points: Sequence, tol: float = FD_TOL, h: float = FD_STEP
) -> HPVerdict:
    """True iff I_1 df_1 = I_2 df_2 = I_3 df_3 at every point within tol.

    At each point the residual is taken at steps h and h/2; a residual above
    the rounding floor must shrink by at least ``HALVING_MIN_RATIO``.
    """
    res, halves = [], []
    for x in points:
        hr = halving(lambda s: hyper_poisson_residual(m, f, x, s), h)
        halves.append(hr)
        res.append(hr.residual_h2)
    passed = all(r <= tol for r in res) and all(hr.converging() for hr in halves)
    return HPVerdict(bool(passed), res, halves)


def dual_bivector(omega: np.ndarray) -> np.ndarray:
    return np.linalg.inv(omega.T)


def assemble_bivector(m: HKModel4, f: HPTriple4) -> Callable:
    """x -> f_1 omega_1^{-1} + f_2 omega_2^{-1} + f_3 omega_3^{-1}."""

    def Pi(x):
        vals = f(x)
        return sum(v * dual_bivector(w) for v, w in zip(vals, m.kahler_forms(x)))

    return Pi


def twozero_part(P: np.ndarray, I: np.ndarray) -> np.ndarray:
    proj = 0.5 * (np.eye(I.shape[0]) - 1j * I)
    return proj @ P @ proj.T


def twozero_formula(m: HKModel4, f: HPTriple4, x) -> np.ndarray:
    """2 (f_2 + i f_3)(omega_2 + i omega_3)^{-1} with
    (omega_2 + i omega_3)^{-1} = (omega_2^{-1} - i omega_3^{-1}) / 4."""
    _, w2, w3 = m.kahler_forms(x)
    _, f2, f3 = f(x)
    return 0.5 * (f2 + 1j * f3) * (dual_bivector(w2) - 1j * dual_bivector(w3))


def bracket_eval(Pi: Callable, f: Callable, g: Callable, x, h: float = FD_STEP):
    """{f, g} = Pi(df, dg) with central-difference gradients."""
    return fd_gradient(f, x, h) @ Pi(x) @ fd_gradient(g, x, h)


def jacobiator(Pi: Callable, x, h: float = FD_STEP) -> np.ndarray:
    """[Pi, Pi]/2 on coordinate triples: sum_l Pi^{li} d_l Pi^{jk} + cyclic."""
    P = Pi(x)
    dP = fd_gradient(Pi, x, h)  # (l, j, k)
    t = np.einsum("li,ljk->ijk", P, dP)
    return t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))


def canonical_killing(m: HKModel4, Pi: Callable, x, h: float = FD_STEP) -> np.ndarray:
    """X_Pi: the field with i(X) omega_a = d f_a, where f_a are the
    coefficients of Pi in the basis omega_a^{-1} (averaged over a)."""

    def coeffs(y):
        basis = np.array([dual_bivector(w).ravel() for w in m.kahler_forms(y)]).T
        sol, *_ = np.linalg.lstsq(basis, Pi(y).ravel(), rcond=None)
        return sol

    if np.abs(Pi(x)).max() == 0:
        raise DegenerateBivector("bivector vanishes at the point")
    df = fd_gradient(coeffs, x, h)  # (i, a)
    # i(X) omega = omega^T X
    Xs = [np.linalg.solve(w.T, df[:, a]) for a, w in enumerate(m.kahler_forms(x))]
    return np.mean(Xs, axis=0)
