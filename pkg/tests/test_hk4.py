import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bihilb import hk4
from bihilb import quatlin as ql

MODELS = [hk4.model_gibbons_hawking("flat"), hk4.model_gibbons_hawking("taubnut", 1.0)]
IDS = ["flat", "taubnut"]


def _points(seed, count=10):
    return hk4.random_points(np.random.default_rng(seed), count)


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_model_invariants(m):
    for x in _points(1):
        res = hk4.invariant_residuals(m, x)
        for key in ("square", "quaternion", "compatible", "orthogonal"):
            assert res[key] <= 1e-12, key
        assert res["closed"].ok() and res["moment"].ok()


def test_potential_is_harmonic():
    m = MODELS[1]
    x = np.array([0.0, 0.4, -0.7, 1.1])
    h = 1e-3
    lap = sum((m.V(x + h * e) - 2 * m.V(x) + m.V(x - h * e)) / h**2 for e in np.eye(4)[1:])
    assert abs(lap) <= 1e-5


def test_flat_model_matches_quaternion_conventions():
    # tau - x1 i - x2 j - x3 k identifies the chart with H
    D = np.diag([1.0, -1.0, -1.0, -1.0])
    Is = MODELS[0].complex_structures(np.zeros(4) + 0.5)
    for Ix, Iq in zip(Is, ql.complex_structures(1)):
        assert np.allclose(Ix, D @ Iq @ D)


def test_domain_errors():
    m = MODELS[1]
    with pytest.raises(hk4.ModelDomainError):
        m.theta(np.array([0.0, 0.0, 0.0, -1.0]))
    with pytest.raises(hk4.ModelDomainError):
        m.V(np.zeros(4))
    with pytest.raises(hk4.ModelDomainError):
        hk4.HKModel4("taubnut", -4.0).V(np.array([0, 1.0, 0, 0]))
    with pytest.raises(ValueError):
        hk4.model_gibbons_hawking("eguchi")


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_moment_and_constant_triples_pass(m):
    assert hk4.check_hyper_poisson(m, hk4.HPTriple4.moment(m), _points(2, 20)).passed
    assert hk4.check_hyper_poisson(m, hk4.HPTriple4.constant([0.3, -1.0, 2.0]), _points(3)).passed


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_corrupted_triple_rejected(m):
    mu = hk4.HPTriple4.moment(m)
    bad = hk4.HPTriple4(mu.f1, lambda x: 1.5 * m.moment_maps(x)[1], mu.f3)
    v = hk4.check_hyper_poisson(m, bad, _points(4))
    assert not v.passed
    assert v.as_dict()["max_residual"] > 0.1


def test_halving_rule():
    assert hk4.HalvingResult(4e-6, 1e-6).ok()
    assert not hk4.HalvingResult(2e-6, 1e-6).converging()
    assert hk4.HalvingResult(1e-12, 1e-12).converging()
    assert not hk4.HalvingResult(1e-3, 2.5e-4).ok()


def test_halving_ratio_on_nonlinear_residual():
    # d omega on Taub-NUT is a genuinely nonlinear FD residual: error O(h^2)
    m = MODELS[1]
    for x in _points(8, 3):
        hr = hk4.invariant_residuals(m, x, 1e-2)["closed"]
        assert hr.residual_h > hk4.ROUNDOFF_FLOOR
        assert hr.ratio == pytest.approx(4.0, rel=1e-2)


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_twozero_formula(m):
    f = hk4.HPTriple4.moment(m)
    Pi = hk4.assemble_bivector(m, f)
    for x in _points(5):
        I1 = m.complex_structures(x)[0]
        P20 = hk4.twozero_part(Pi(x), I1)
        assert np.abs(P20 - hk4.twozero_formula(m, f, x)).max() <= 1e-12
        assert np.allclose(I1 @ P20, 1j * P20)


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_holomorphic_part_is_poisson_but_real_part_is_not(m):
    f = hk4.HPTriple4.moment(m)
    Pi = hk4.assemble_bivector(m, f)

    def P20(y):
        return hk4.twozero_part(Pi(y), m.complex_structures(y)[0])

    x = np.array([0.3, 0.5, -0.4, 0.9])
    assert np.abs(hk4.jacobiator(P20, x)).max() <= 1e-6
    assert np.abs(hk4.jacobiator(Pi, x)).max() > 0.1


@pytest.mark.parametrize("m", MODELS, ids=IDS)
def test_canonical_killing_recovers_circle_action(m):
    Pi = hk4.assemble_bivector(m, hk4.HPTriple4.moment(m))
    for x in _points(6, 5):
        assert np.allclose(hk4.canonical_killing(m, Pi, x), m.killing(x), atol=1e-6)
    with pytest.raises(hk4.DegenerateBivector):
        hk4.canonical_killing(m, hk4.assemble_bivector(m, hk4.HPTriple4.constant([0, 0, 0])), _points(6, 1)[0])


def test_bracket_of_moment_maps():
    m = MODELS[0]
    Pi = hk4.assemble_bivector(m, hk4.HPTriple4.moment(m))
    x = np.array([0.1, 0.7, -0.2, 0.4])
    # only omega_1^{-1} pairs dtau with dx1, with coefficient +1
    b = hk4.bracket_eval(Pi, lambda y: y[0], lambda y: y[1], x)
    assert b == pytest.approx(0.7, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 3.0))
def test_taubnut_moment_property(seed, mass):
    m = hk4.model_gibbons_hawking("taubnut", mass)
    pts = hk4.random_points(np.random.default_rng(seed), 3)
    assert hk4.check_hyper_poisson(m, hk4.HPTriple4.moment(m), pts).passed
