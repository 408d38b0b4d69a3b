"""Check campaigns per module, shared by the CLI and the acceptance tests.

Every builder takes a parameter dict and returns a list of :class:`Check`;
each check receives its own RNG and returns (residual, passed, inputs, detail).
"""
from __future__ import annotations

import numpy as np

from . import bipoisson as bp
from . import hilbchart as hc
from . import hk4
from . import nahm
from . import quatlin as ql
from .report import Check


def _rel(a, b, floor=1e-12):
    a, b = complex(a), complex(b)
    return abs(a - b) / max(abs(a), abs(b), floor)


def _cpoint(rng, dim, scale=1.0):
    return scale * (rng.normal(size=dim) + 1j * rng.normal(size=dim))


# -- bipoisson ---------------------------------------------------------------


def bipoisson_checks(params: dict) -> list:
    n = int(params.get("n", 2))
    surface = params.get("surface", "plane")
    points = int(params.get("points", 10))
    tol = float(params.get("tol", 1e-8))
    P, Q = hc.chart_bivectors(n, surface)
    inputs = {"n": n, "surface": surface}

    def schouten(_rng):
        v = bp.is_poisson_pair(P, Q)
        bad = sum(not x for x in v.as_dict().values())
        return bad, bad == 0, inputs, str(v.as_dict())

    def magri(deg):
        def run(_rng):
            rho = [0] * deg + [1]
            Pr = bp.magri_rho(P, Q, rho)
            v = bp.is_poisson_pair(Pr, P)
            bad = sum(not x for x in v.as_dict().values()) + (not bp.is_poisson_pair(Pr, Q).compatible)
            return bad, bad == 0, dict(inputs, rho=rho), ""

        return run

    pf = bp.pfaffian_polynomial(P, Q) if surface == "plane" else None

    def pfaff_square(rng):
        worst = 0.0
        for _ in range(points):
            pt = P.chart.point(_cpoint(rng, P.chart.dim))
            R = bp.recursion_operator_at(P, Q, pt).matrix
            mu = pf.at(pt)
            chi = np.poly(R)
            worst = max(worst, np.abs(np.polymul(mu, mu) - chi).max() / max(1.0, np.abs(chi).max()))
        return worst, worst <= tol, dict(inputs, points=points), "mu^2 vs det(lam - R)"

    def minimal(rng):
        fails = 0
        for _ in range(points):
            pt = P.chart.point(_cpoint(rng, P.chart.dim))
            if not bp.minimal_polynomial_check(bp.recursion_operator_at(P, Q, pt), pf.at(pt)):
                fails += 1
        return fails, fails == 0, dict(inputs, points=points), "failing points"

    checks = [Check("schouten_identities", schouten, 0)]
    checks += [Check(f"magri_rho_z{d}", magri(d), 0) for d in range(min(n, 3) + 1)]
    if pf is not None:
        checks += [Check("pfaffian_square", pfaff_square, tol), Check("minimal_polynomial", minimal, 0)]
    if n <= 2 and surface == "plane":
        checks += twisted_checks({"n": n, "points": max(2, points // 3)})
    return checks


def twisted_checks(params: dict) -> list:
    n = int(params.get("n", 2))
    points = int(params.get("points", 3))
    P, Q = hc.twisted_chart_bivectors(n)
    inputs = {"n": n, "pencil": "twisted"}

    def schouten(_rng):
        v = bp.is_poisson_pair(P, Q)
        bad = sum(not x for x in v.as_dict().values())
        return bad, bad == 0, inputs, str(v.as_dict())

    def nijenhuis(rng):
        # central differences leave an O(h^2) error; if the tensor vanishes the
        # Richardson combination is O(h^4), tiny next to the raw value, and the
        # raw values shrink 4x per halving
        worst, ratio = 0.0, np.inf
        for _ in range(points):
            x = _cpoint(rng, P.chart.dim, 0.5)
            a = bp.nijenhuis_tensor(P, Q, x, 2e-3)
            b = bp.nijenhuis_tensor(P, Q, x, 1e-3)
            raw = np.abs(a).max()
            worst = max(worst, np.abs((4 * b - a) / 3).max() / max(raw, 1e-12))
            if raw > 1e-9:
                ratio = min(ratio, raw / np.abs(b).max())
        ok = worst <= 1e-4 and ratio >= 3.0
        return worst, ok, dict(inputs, points=points), f"extrapolated / raw; halving ratio {ratio:.2f}"

    return [Check("twisted_schouten", schouten, 0), Check("twisted_nijenhuis", nijenhuis, 1e-4)]


# -- hilbchart ---------------------------------------------------------------


def hilbchart_checks(params: dict) -> list:
    n = int(params.get("n", 2))
    surface = params.get("surface", "plane")
    points = int(params.get("points", 20))
    tol = float(params.get("tol", 1e-8))
    inputs = {"n": n, "surface": surface, "points": points}

    def samples(rng):
        return [hc.random_root_point(rng, n) for _ in range(points)]

    def roundtrip(rng):
        worst = 0.0
        for r in samples(rng):
            back = hc.coeffs_to_roots(hc.roots_to_coeffs(r))
            order = [int(np.argmin(np.abs(back.roots - z))) for z in r.roots]
            worst = max(worst, np.abs(back.roots[order] - r.roots).max(), np.abs(back.values[order] - r.values).max())
        return worst, worst <= tol, inputs, "roots -> coefficients -> roots"

    def pfaffian_q(rng):
        worst = 0.0
        for r in samples(rng):
            t = hc.roots_to_coeffs(r)
            p1, p2 = hc.pushforward_bivectors_qp(t, surface)
            mu = hc.pfaffian_polynomial_numeric(p1, p2)
            worst = max(worst, np.abs(mu - t.q).max() / max(1.0, np.abs(t.q).max()))
        return worst, worst <= tol, inputs, "Pfaffian polynomial vs q"

    def rank(rng):
        bad = 0
        for r in samples(rng):
            t = hc.roots_to_coeffs(r)
            if hc.degeneracy_rank_qp(t, r.roots[0], surface) != 2 * n - 2:
                bad += 1
        return bad, bad == 0, inputs, f"rank(Pi_2 - z_1 Pi_1) == {2 * n - 2}"

    def jacobian(rng):
        worst, h = 0.0, 1e-6
        for r in samples(rng):
            J = hc.chart_jacobian(r)
            x = r.coords()
            fd = np.empty_like(J)
            for j in range(2 * n):
                e = np.zeros(2 * n)
                e[j] = h
                cp = hc.roots_to_coeffs(hc.RootChartPoint((x + e)[0::2], (x + e)[1::2])).coords()
                cm = hc.roots_to_coeffs(hc.RootChartPoint((x - e)[0::2], (x - e)[1::2])).coords()
                fd[:, j] = (cp - cm) / (2 * h)
            worst = max(worst, np.abs(J - fd).max() / max(1.0, np.abs(J).max()))
        return worst, worst <= 1e-6, inputs, "analytic vs central-difference Jacobian"

    def equivariance(rng):
        worst = 0.0
        for r in samples(rng):
            J = hc.chart_jacobian(r)
            p1, p2 = hc.pushforward_bivectors_qp(hc.roots_to_coeffs(r), surface)
            R_qp = bp.recursion_operator_matrix(p1, p2)
            R_root = np.diag(np.repeat(r.roots, 2))
            conj = J @ R_root @ np.linalg.inv(J)
            worst = max(worst, np.abs(R_qp - conj).max() / max(1.0, np.abs(conj).max()))
        return worst, worst <= tol, inputs, "R in (q, p) vs J R J^-1"

    return [
        Check("chart_roundtrip", roundtrip, tol),
        Check("pfaffian_polynomial_is_q", pfaffian_q, tol),
        Check("degeneracy_rank", rank, 0),
        Check("chart_jacobian_fd", jacobian, 1e-6),
        Check("recursion_equivariance", equivariance, tol),
    ]


# -- quatlin -----------------------------------------------------------------


def quat_checks(params: dict) -> list:
    n = int(params.get("n", 3))
    triples = int(params.get("triples", 10))
    count = int(params.get("samples", 25))
    tol = float(params.get("tol", 1e-8))
    inputs = {"n": n, "triples": triples, "samples": count}

    def per_triple(fn):
        def run(rng):
            worst = 0.0
            for _ in range(triples):
                worst = max(worst, float(fn(rng, ql.HermQuatTriple.random(rng, n))))
            return worst

        return run

    def symmetry(rng, t):
        return ql.pencil_build(t).symmetry_residual()

    def det_square(rng, t):
        pen = ql.pencil_build(t)
        return ql.char_vs_square_residual(pen, ql.spectral_curve(pen), ql.sample_grid(rng, count))

    def cone(rng, t):
        return ql.cone_intersection_check(t, ql.sample_grid(rng, count))

    def moore(rng, t):
        c = rng.normal(size=4)
        M = c[1] * t.A1 + c[2] * t.A2 + c[3] * t.A3
        M[np.arange(n), np.arange(n), 0] += c[0]
        worst = 0.0
        for A in (t.A1, t.A2, t.A3, M):
            d = np.linalg.det(ql.quat_embed(A)).real
            worst = max(worst, abs(ql.moore_det(A) ** 2 - d) / max(1.0, abs(d)))
        return worst

    def reality(rng, t):
        zs = _cpoint(rng, count)
        return ql.spectral_curve(ql.pencil_build(t)).reality_residual(zs, antipode=1.0)

    def aquat(rng, t):
        A = ql.aquaternionic_assemble(t)
        return np.abs(ql.sandwich_sum(A) - A).max()

    def linear(rng, t):
        B = ql.real_rep(rng.normal(size=(n, n, 4)))
        return np.abs(ql.sandwich_sum(B) + 3 * B).max()

    def bivector(rng, t):
        P = ql.linear_hyper_poisson(t).matrix
        return np.abs(ql.bivector_sandwich(P) + P).max()

    def twozero(rng, t):
        lhp = ql.linear_hyper_poisson(t)
        e = np.eye(3)
        return max(np.abs(lhp.twozero(e[a]) - ql.twozero_formula(t, a)).max() for a in range(3))

    def kernel(rng, t):
        pen = ql.pencil_build(t)
        z = complex(_cpoint(rng, 1)[0])
        eta = ql.curve_points(pen, z)[0]
        return abs(ql.kernel_dim_on_curve(pen, z, eta, tol=1e-6) - 2)

    checks = [
        Check("pencil_symmetry", per_triple(symmetry), 1e-12),
        Check("det_equals_p_squared", per_triple(det_square), tol),
        Check("cone_intersection", per_triple(cone), tol),
        Check("moore_det_square", per_triple(moore), 1e-9),
        Check("reality", per_triple(reality), tol),
        Check("aquaternionic_eigen", per_triple(aquat), 1e-12),
        Check("quaternion_linear_eigen", per_triple(linear), 1e-12),
        Check("bivector_eigen", per_triple(bivector), 1e-12),
        Check("twozero_formula", per_triple(twozero), 1e-12),
        Check("kernel_dim_two", per_triple(kernel), 0),
    ]
    out = []
    for c in checks:
        fn = c.fn

        def wrapped(rng, fn=fn, tol=c.tolerance):
            r = fn(rng)
            return r, r <= tol, inputs, ""

        out.append(Check(c.name, wrapped, c.tolerance))
    return out


# -- hk4 ---------------------------------------------------------------------


def hk4_checks(params: dict) -> list:
    models = params.get("models", [{"V": "flat"}, {"V": "taubnut", "mass": 1.0}])
    points = int(params.get("points", 100))
    tol = float(params.get("tol", hk4.FD_TOL))
    checks = []
    for spec in models:
        m = hk4.model_from_spec(spec)
        tag = m.name
        inputs = {"model": m.to_json(), "points": points}

        def invariants(rng, m=m, inputs=inputs):
            worst, ok = 0.0, True
            for x in hk4.random_points(rng, max(5, points // 10)):
                for key, v in hk4.invariant_residuals(m, x).items():
                    if isinstance(v, hk4.HalvingResult):
                        ok &= v.ok()
                        worst = max(worst, v.residual_h2)
                    else:
                        worst = max(worst, float(v))
            return worst, ok and worst <= tol, inputs, ""

        def moment(rng, m=m, inputs=inputs):
            v = hk4.check_hyper_poisson(m, hk4.HPTriple4.moment(m), hk4.random_points(rng, points), tol)
            d = v.as_dict()
            return d["max_residual"], v.passed, inputs, ""

        def constant(rng, m=m, inputs=inputs):
            c = rng.normal(size=3)
            v = hk4.check_hyper_poisson(m, hk4.HPTriple4.constant(c), hk4.random_points(rng, 10), tol)
            return v.as_dict()["max_residual"], v.passed, dict(inputs, c=c), ""

        def corrupted(rng, m=m, inputs=inputs):
            mu = hk4.HPTriple4.moment(m)
            bad = hk4.HPTriple4(mu.f1, lambda x: 1.5 * m.moment_maps(x)[1], mu.f3, "corrupted")
            v = hk4.check_hyper_poisson(m, bad, hk4.random_points(rng, 10), tol)
            r = v.as_dict()["max_residual"]
            return r, not v.passed, inputs, "passes iff the corrupted triple is rejected"

        def twozero(rng, m=m, inputs=inputs):
            f = hk4.HPTriple4.moment(m)
            Pi = hk4.assemble_bivector(m, f)
            worst = 0.0
            for x in hk4.random_points(rng, 20):
                I1 = m.complex_structures(x)[0]
                worst = max(worst, np.abs(hk4.twozero_part(Pi(x), I1) - hk4.twozero_formula(m, f, x)).max())
            return worst, worst <= 1e-12, inputs, ""

        def killing(rng, m=m, inputs=inputs):
            Pi = hk4.assemble_bivector(m, hk4.HPTriple4.moment(m))
            worst = 0.0
            for x in hk4.random_points(rng, 10):
                worst = max(worst, np.abs(hk4.canonical_killing(m, Pi, x) - m.killing(x)).max())
            return worst, worst <= tol, inputs, "X_Pi vs d/dtau"

        checks += [
            Check(f"{tag}_invariants", invariants, tol),
            Check(f"{tag}_moment_triple", moment, tol),
            Check(f"{tag}_constant_triple", constant, tol),
            Check(f"{tag}_corrupted_rejected", corrupted, tol),
            Check(f"{tag}_twozero_formula", twozero, 1e-12),
            Check(f"{tag}_canonical_killing", killing, tol),
        ]
    return checks


# -- nahm --------------------------------------------------------------------

ZETA_SAMPLES = (0.3 + 0.1j, -0.7 + 0.4j, 1.1 - 0.2j, 0.05 - 0.9j, -1.3 - 0.6j)


def build_nahm(params: dict) -> nahm.NahmData:
    k = int(params.get("charge", 2))
    step = float(params.get("step", nahm.DEFAULT_STEP))
    delta = float(params.get("delta", nahm.DEFAULT_DELTA))
    if k == 1:
        return nahm.constant_solution(params.get("translation", [0.3, 1.0, -2.0, 0.5]), step)
    if k == 2:
        d = nahm.two_pole_k2(float(params.get("shape", 0.5)), delta, step, int(params.get("substeps", 8)))
        # the untranslated Euler-top solution is traceless and pairs trivially with symmetry tangents
        x = params.get("translation")
        return d.translate(x) if x is not None else d
    raise ValueError("only charges 1 and 2 are supported")


def nahm_run_checks(d: nahm.NahmData, params: dict) -> list:
    tol = float(params.get("tol", 1e-6))
    inputs = {"k": d.k, "meta": d.meta}

    def res(_rng):
        r = nahm.residual(d)
        return r, r <= tol, inputs, "max centred-difference residual"

    def iso(_rng):
        rep = nahm.lax_isospectral(d, ZETA_SAMPLES)
        return rep["max_drift"], rep["max_drift"] <= tol, inputs, f"beta spectrum drift {rep['beta_spectrum_drift']:.2e}"

    def counter(_rng):
        c = nahm.counterterm_coefficient(d.k)
        exact = -d.k * (d.k**2 - 1) / 4
        return abs(c - exact), c == exact, inputs, f"tr sum R^2 = {c}"

    def herm(_rng):
        r = d.antihermitian_defect()
        return r, r <= 1e-12, inputs, ""

    checks = [Check("nahm_residual", res, tol), Check("isospectral_drift", iso, tol), Check("antihermitian", herm, 1e-12)]
    if d.k > 1:
        checks.append(Check("counterterm", counter, 0))
    return checks


def parse_pairs(spec: str) -> list:
    """'phase:translation1,translation2:translation3' or 'all'."""
    if spec == "all":
        fam = nahm.FAMILIES
        return [(fam[i], fam[j]) for i in range(len(fam)) for j in range(i + 1, len(fam))]
    pairs = []
    for item in spec.split(","):
        a, sep, b = item.strip().partition(":")
        if not sep or a not in nahm.FAMILIES or b not in nahm.FAMILIES:
            raise ValueError(f"bad pair {item!r}; use family:family with families {nahm.FAMILIES}")
        pairs.append((a, b))
    return pairs


def nahm_bivector_checks(d: nahm.NahmData, pairs, params: dict) -> list:
    tol = float(params.get("tol", 1e-6))
    cache = {}

    def tangent(name):
        if name not in cache:
            cache[name] = nahm.tangent_solve(d, name)
        return cache[name]

    for a, b in pairs:
        tangent(a), tangent(b)
    checks = []
    for a, b in pairs:
        inputs = {"k": d.k, "pair": [a, b]}

        def routes(_rng, a=a, b=b, inputs=inputs):
            u, v = cache[a], cache[b]
            vals = {
                "direct": nahm.twozero_via_split(d, u, v),
                "key": nahm.twozero_via_key(d, u, v),
                "beta": nahm.twozero_via_beta(d, u, v),
            }
            names = list(vals)
            worst = max(_rel(vals[x], vals[y]) for i, x in enumerate(names) for y in names[i + 1:])
            return worst, worst <= tol, inputs, f"key = {vals['key']:.6g}"

        def real_anti(_rng, a=a, b=b, inputs=inputs):
            u, v = cache[a], cache[b]
            uv, vu = nahm.hyper_poisson_2form(d, u, v), nahm.hyper_poisson_2form(d, v, u)
            r = max(abs(uv.imag), abs(uv + vu))
            return r, r <= 1e-8, inputs, f"form = {uv.real:.6g}"

        checks += [Check(f"routes_{a}_{b}", routes, tol), Check(f"real_antisymmetric_{a}_{b}", real_anti, 1e-8)]
    return checks


def nahm_potential_checks(d: nahm.NahmData, params: dict) -> list:
    tol = float(params.get("tol", 1e-4))
    checks = []
    for direction in (1, 2, 3):
        inputs = {"k": d.k, "direction": direction}

        def run(_rng, direction=direction, inputs=inputs):
            rep = nahm.contraction_check(d, direction)
            detail = f"lhs {rep['lhs'].real:.8g}, -dF/4 {rep['minus_quarter_dF']:.8g}"
            return rep["residual"], rep["residual"] <= tol, inputs, detail

        checks.append(Check(f"contraction_translation{direction}", run, tol))
    return checks
