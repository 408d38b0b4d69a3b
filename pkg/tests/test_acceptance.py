"""The ten acceptance criteria at their stated tolerances.

Each test records a one-line verdict that is printed in the terminal summary.
"""
import time

import numpy as np
import pytest
import sympy

from bihilb import bipoisson as bp
from bihilb import hilbchart as hc
from bihilb import hk4, nahm
from bihilb import quatlin as ql
from bihilb.report import check_rng

SEED = 20240611


def _rng(stream):
    return check_rng(SEED, stream)


@pytest.fixture(scope="module")
def k2_data():
    t0 = time.perf_counter()
    d = nahm.two_pole_k2(0.5)
    return d, time.perf_counter() - t0


def test_criterion_01_symbolic_bipoisson(acceptance):
    t0 = time.perf_counter()
    bad = []
    for surface in ("plane", "cstar"):
        for n in (1, 2, 3, 4):
            P, Q = hc.chart_bivectors(n, surface)
            for name, (A, B) in {"P1P1": (P, P), "P2P2": (Q, Q), "P1P2": (P, Q)}.items():
                if not bp.schouten_bracket(A, B).is_zero():
                    bad.append((surface, n, name))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5.0
    acceptance(1, ok, f"24 Schouten brackets, nonzero: {bad or 'none'}; {dt:.2f} s (< 5 s)")
    assert ok


def test_criterion_02_pfaffian_polynomial(acceptance):
    rng = _rng(2)
    worst, minimal_fail = 0.0, 0
    for i in range(50):
        n = 1 + i % 4
        t = hc.roots_to_coeffs(hc.random_root_point(rng, n))
        p1, p2 = hc.pushforward_bivectors_qp(t)
        mu = hc.pfaffian_polynomial_numeric(p1, p2)
        worst = max(worst, np.abs(mu - t.q).max() / max(1.0, np.abs(t.q).max()))
        R = bp.recursion_operator_matrix(p1, p2)
        minimal_fail += not bp.minimal_polynomial_check(R, mu)
    ok = worst <= 1e-8 and minimal_fail == 0
    acceptance(2, ok, f"max |mu - q| = {worst:.2e} (<= 1e-8); minimal-polynomial failures {minimal_fail}/50")
    assert ok


def test_criterion_03_degeneracy_rank(acceptance):
    rng = _rng(3)
    mismatches = 0
    for i in range(50):
        n = 1 + i % 4
        r = hc.random_root_point(rng, n)
        t = hc.roots_to_coeffs(r)
        lam0 = r.roots[rng.integers(n)]
        mismatches += hc.degeneracy_rank_qp(t, lam0, tol=1e-8) != 2 * n - 2
    acceptance(3, mismatches == 0, f"rank 2n-2 at 50 simple-root points, mismatches {mismatches}")
    assert mismatches == 0


def test_criterion_04_magri_morosi(acceptance):
    bad = []
    for n in (1, 2, 3):
        P, Q = hc.chart_bivectors(n)
        for deg in range(4):
            Pr = bp.magri_rho(P, Q, [0] * deg + [1])
            v = bp.is_poisson_pair(Pr, P)
            if not (v.all and bp.is_poisson_pair(Pr, Q).compatible):
                bad.append((n, deg))
    acceptance(4, not bad, f"rho in 1, z, z^2, z^3 on n = 1..3, failures {bad or 'none'}")
    assert not bad


def test_criterion_05_doubling(acceptance):
    t0 = time.perf_counter()
    rng = _rng(5)
    det_res = moore_res = cone_res = excess = 0.0
    for i in range(50):
        n = 1 + i % 4
        t = ql.HermQuatTriple.random(rng, n)
        pen = ql.pencil_build(t)
        curve = ql.spectral_curve(pen)  # raises if some p_i exceeds degree 2i
        excess = max(excess, curve.degree_excess)
        samples = ql.sample_grid(rng, 25)
        det_res = max(det_res, ql.char_vs_square_residual(pen, curve, samples))
        cone_res = max(cone_res, ql.cone_intersection_check(t, samples, curve))
        for A in t.mats():
            d = np.linalg.det(ql.quat_embed(A))
            moore_res = max(moore_res, abs(ql.moore_det(A) ** 2 - d) / max(1.0, abs(d)))
    dt = time.perf_counter() - t0
    ok = det_res <= 1e-8 and moore_res <= 1e-9 and cone_res <= 1e-8 and excess <= 1e-8 and dt < 10
    acceptance(
        5,
        ok,
        f"det = p^2 {det_res:.1e}, Moore {moore_res:.1e}, cone {cone_res:.1e}, "
        f"degree excess {excess:.1e}; {dt:.2f} s (< 10 s)",
    )
    assert ok


def test_criterion_06_aquaternionic(acceptance):
    rng = _rng(6)
    plus = minus = 0.0
    for i in range(20):
        n = 1 + i % 3
        A = ql.aquaternionic_assemble(ql.HermQuatTriple.random(rng, n))
        B = ql.real_rep(rng.normal(size=(n, n, 4)))
        plus = max(plus, np.linalg.norm(ql.sandwich_sum(A) - A, 2))
        minus = max(minus, np.linalg.norm(ql.sandwich_sum(B) + 3 * B, 2))
    ok = plus <= 1e-12 and minus <= 1e-12
    acceptance(6, ok, f"|sum IAI - A| = {plus:.1e}, |sum IBI + 3B| = {minus:.1e} (<= 1e-12)")
    assert ok


def test_criterion_07_hyper_poisson_test(acceptance):
    rng = _rng(7)
    parts = []
    ok = True
    for m in (hk4.model_gibbons_hawking("flat"), hk4.model_gibbons_hawking("taubnut", 1.0)):
        pts = hk4.random_points(rng, 100)
        v = hk4.check_hyper_poisson(m, hk4.HPTriple4.moment(m), pts, tol=1e-6)
        mu = hk4.HPTriple4.moment(m)
        bad = hk4.HPTriple4(mu.f1, lambda x, m=m: 1.5 * m.moment_maps(x)[1], mu.f3)
        rejected = not hk4.check_hyper_poisson(m, bad, pts[:10], tol=1e-6).passed
        ratios = [h.ratio for h in v.halving if h.residual_h > hk4.ROUNDOFF_FLOOR]
        ok &= v.passed and rejected
        halving = f"min halving ratio {min(ratios):.2f}" if ratios else "all below rounding floor"
        parts.append(f"{m.name}: max {max(v.residuals):.1e}, {halving}, corrupted rejected {rejected}")
    acceptance(7, ok, "; ".join(parts))
    assert ok


def test_criterion_08_nahm_pipeline(acceptance, k2_data):
    d, build_time = k2_data
    t0 = time.perf_counter()
    res = nahm.residual(d)
    iso = nahm.lax_isospectral(d, (0.3 + 0.1j, -0.7 + 0.4j, 1.1 - 0.2j, 0.05 - 0.9j, -1.3 - 0.6j))
    ct = nahm.counterterm_coefficient(2)
    dt = build_time + time.perf_counter() - t0
    ok = res <= 1e-6 and iso["max_drift"] <= 1e-6 and ct == -2 * (4 - 1) / 4 and dt < 60
    acceptance(
        8,
        ok,
        f"residual {res:.1e}, isospectral drift {iso['max_drift']:.1e}, counterterm {ct}; {dt:.2f} s (< 60 s)",
    )
    assert ok


def _sympy_twozero_k1(x, cu, cv):
    """-(i/2) int_0^2 tr d(beta^2) ^ d(alpha) for constant 1x1 data."""
    X = [sympy.Rational(str(v)) for v in x]
    T = [sympy.I * v for v in X]
    U = [sympy.I * sympy.Rational(str(c)) for c in cu]
    V = [sympy.I * sympy.Rational(str(c)) for c in cv]
    beta = T[2] + sympy.I * T[3]
    bu, bv = U[2] + sympy.I * U[3], V[2] + sympy.I * V[3]
    au, av = U[0] - sympy.I * U[1], V[0] - sympy.I * V[1]
    t = sympy.symbols("t")
    val = sympy.integrate(-sympy.I / 2 * (2 * beta * bu * av - 2 * beta * bv * au), (t, 0, 2))
    return complex(sympy.nsimplify(val))


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-12)


def test_criterion_09_twozero_routes(acceptance, k2_data):
    routes = (nahm.twozero_via_split, nahm.twozero_via_key, nahm.twozero_via_beta)
    fams = nahm.FAMILIES
    pairs = [(a, b) for i, a in enumerate(fams) for b in fams[i + 1:]]
    # charge 1 against the exact symbolic value
    x = [0.3, 1.0, -2.0, 0.5]
    d1 = nahm.constant_solution(x)
    exact_err = route_err1 = 0.0
    for a, b in pairs:
        cu, cv = nahm._family_vector(a), nahm._family_vector(b)
        u, v = nahm.tangent_solve(d1, a), nahm.tangent_solve(d1, b)
        ref = _sympy_twozero_k1(x, cu, cv)
        vals = [r(d1, u, v) for r in routes]
        exact_err = max(exact_err, max(abs(val - ref) for val in vals))
        route_err1 = max(route_err1, max(_rel(p, q) for p in vals for q in vals))
    # charge 2 on translated data
    d2 = k2_data[0].translate([0.3, 0.4, -0.2, 0.7])
    ts = {f: nahm.tangent_solve(d2, f) for f in fams}
    route_err2 = real_err = 0.0
    for a, b in pairs:
        vals = [r(d2, ts[a], ts[b]) for r in routes]
        route_err2 = max(route_err2, max(_rel(p, q) for p in vals for q in vals))
    for d, tt in ((d1, {f: nahm.tangent_solve(d1, f) for f in fams}), (d2, ts)):
        for a, b in pairs:
            uv, vu = nahm.hyper_poisson_2form(d, tt[a], tt[b]), nahm.hyper_poisson_2form(d, tt[b], tt[a])
            real_err = max(real_err, abs(uv.imag), abs(uv + vu))
    ok = exact_err <= 1e-10 and route_err1 <= 1e-6 and route_err2 <= 1e-6 and real_err <= 1e-8
    acceptance(
        9,
        ok,
        f"k=1 vs symbolic {exact_err:.1e}, route spread k=1 {route_err1:.1e} k=2 {route_err2:.1e} (<= 1e-6), "
        f"reality/antisymmetry {real_err:.1e} (<= 1e-8)",
    )
    assert ok


def test_criterion_10_contraction(acceptance, k2_data):
    x = [0.0, 0.7, -1.3, 0.2]
    d1 = nahm.constant_solution(x)
    worst1 = exact1 = 0.0
    for a in (1, 2, 3):
        rep = nahm.contraction_check(d1, a)
        worst1 = max(worst1, rep["residual"])
        exact1 = max(exact1, abs(rep["lhs"] - x[a]))
    d2 = k2_data[0].translate([0.3, 0.4, -0.2, 0.7])
    worst2 = max(nahm.contraction_check(d2, a)["residual"] for a in (1, 2, 3))
    ok = worst1 <= 1e-4 and worst2 <= 1e-4 and exact1 <= 1e-10
    acceptance(
        10, ok, f"|i(X)Pi + dF/4|: k=1 {worst1:.1e}, k=2 {worst2:.1e} (<= 1e-4); k=1 vs x_i {exact1:.1e} (<= 1e-10)"
    )
    assert ok
