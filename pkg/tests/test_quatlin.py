import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bihilb import quatlin as ql


def _rng(seed=0):
    return np.random.default_rng(seed)


def test_hamilton_units():
    i, j, k = np.eye(4)[1:]
    assert np.allclose(ql.qmul(i, j), k)
    assert np.allclose(ql.qmul(j, i), -k)
    assert np.allclose(ql.qmul(k, k), [-1, 0, 0, 0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_embedding_is_homomorphism(n):
    rng = _rng(n)
    A, B = rng.normal(size=(n, n, 4)), rng.normal(size=(n, n, 4))
    assert np.allclose(ql.quat_embed(ql.qmatmul(A, B)), ql.quat_embed(A) @ ql.quat_embed(B))
    assert np.allclose(ql.real_rep(ql.qmatmul(A, B)), ql.real_rep(A) @ ql.real_rep(B))
    # psi(gl(n, H)) preserves the complex symplectic form up to the transpose-conjugate rule
    W = ql.omega_E(n)
    P = ql.quat_embed(A)
    assert np.allclose(W @ P @ np.linalg.inv(W), np.conj(P))


def test_complex_structures_quaternion_relations():
    I1, I2, I3 = ql.complex_structures(2)
    eye = np.eye(8)
    for I in (I1, I2, I3):
        assert np.allclose(I @ I, -eye)
        assert np.allclose(I.T, -I)
    assert np.allclose(I1 @ I2, I3)
    assert np.allclose(I2 @ I3, I1)
    B = ql.real_rep(_rng().normal(size=(2, 2, 4)))
    for I in (I1, I2, I3):
        assert np.allclose(I @ B, B @ I)


def test_moore_det_two_by_two_closed_form():
    rng = _rng(3)
    for _ in range(20):
        a, b = rng.normal(size=2)
        q = rng.normal(size=4)
        A = np.zeros((2, 2, 4))
        A[0, 0, 0], A[1, 1, 0] = a, b
        A[0, 1], A[1, 0] = q, ql.qconj(q)
        assert ql.moore_det(A) == pytest.approx(a * b - q @ q, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_moore_det_squares_to_det(n):
    A = ql.random_hermitian(_rng(n), n)
    d = np.linalg.det(ql.quat_embed(A))
    assert abs(ql.moore_det(A) ** 2 - d) <= 1e-9 * max(1.0, abs(d))


def test_non_hermitian_rejected():
    A = _rng().normal(size=(2, 2, 4))
    with pytest.raises(ql.NotHermitian):
        ql.HermQuatTriple(A, A, A)
    with pytest.raises(ql.NotHermitian):
        ql.moore_det(A)


def test_n1_spectral_curve_closed_form():
    a1, a2, a3 = 0.3, -1.2, 0.7
    mk = lambda x: np.array([[[x, 0, 0, 0]]])  # noqa: E731
    t = ql.HermQuatTriple(mk(a1), mk(a2), mk(a3))
    c = ql.spectral_curve(ql.pencil_build(t))
    assert np.allclose(c.coeffs[1], [-(a2 + 1j * a3), -2j * a1, a2 - 1j * a3])


def test_zero_triple_curve():
    c = ql.spectral_curve(ql.pencil_build(ql.HermQuatTriple.zero(2)))
    assert c(0.4 + 1j, 1.5) == pytest.approx(1.5**2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pencil_and_curve_identities(n):
    rng = _rng(10 + n)
    t = ql.HermQuatTriple.random(rng, n)
    pen = ql.pencil_build(t)
    assert pen.symmetry_residual() <= 1e-12
    curve = ql.spectral_curve(pen)
    samples = ql.sample_grid(rng)
    assert ql.char_vs_square_residual(pen, curve, samples) <= 1e-8
    assert ql.cone_intersection_check(t, samples, curve) <= 1e-8
    zs = [s[0] for s in samples]
    assert curve.reality_residual(zs, antipode=1.0) <= 1e-8
    assert curve.reality_residual(zs, antipode=-1.0) > 1e-3


@pytest.mark.parametrize("n", [2, 3])
def test_kernel_dimension_on_curve(n):
    rng = _rng(20 + n)
    pen = ql.pencil_build(ql.HermQuatTriple.random(rng, n))
    z0 = 0.4 - 0.9j
    for eta in ql.curve_points(pen, z0):
        assert ql.kernel_dim_on_curve(pen, z0, eta) == 2
    with pytest.raises(ql.NotOnCurve):
        ql.kernel_dim_on_curve(pen, z0, ql.curve_points(pen, z0)[0] + 0.5)


@pytest.mark.parametrize("n", [1, 2])
def test_sandwich_eigenvalues(n):
    rng = _rng(30 + n)
    t = ql.HermQuatTriple.random(rng, n)
    A = ql.aquaternionic_assemble(t)
    assert np.allclose(ql.sandwich_sum(A), A, atol=1e-12)
    B = ql.real_rep(rng.normal(size=(n, n, 4)))
    assert np.allclose(ql.sandwich_sum(B), -3 * B, atol=1e-12)
    P = ql.linear_hyper_poisson(t).matrix
    assert np.allclose(P, -P.T)
    assert np.allclose(ql.bivector_sandwich(P), -P, atol=1e-12)


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_twozero_formula_matches_projection(axis):
    t = ql.HermQuatTriple.random(_rng(40 + axis), 2)
    lhp = ql.linear_hyper_poisson(t)
    I = ql.complex_structures(2)[axis]
    proj = ql.twozero_part(lhp.matrix, I)
    assert np.abs(proj - ql.twozero_formula(t, axis)).max() <= 1e-12
    # (2,0) means both slots lie in the +i eigenspace
    assert np.allclose(I @ proj, 1j * proj)
    direction = np.eye(3)[axis]
    assert np.allclose(lhp.twozero(direction), proj)


def test_twozero_parts_sum_back():
    t = ql.HermQuatTriple.random(_rng(50), 1)
    P = ql.linear_hyper_poisson(t).matrix
    I = ql.complex_structures(1)[0]
    lo = 0.5 * (np.eye(4) + 1j * I)
    hi = 0.5 * (np.eye(4) - 1j * I)
    parts = hi @ P @ hi.T + lo @ P @ lo.T + hi @ P @ lo.T + lo @ P @ hi.T
    assert np.allclose(parts, P)


def test_json_roundtrip():
    t = ql.HermQuatTriple.random(_rng(60), 2)
    back = ql.HermQuatTriple.from_json(json.loads(json.dumps(t.to_json())))
    assert all(np.array_equal(a, b) for a, b in zip(t.mats(), back.mats()))
    curve = ql.spectral_curve(ql.pencil_build(t))
    d = curve.to_json()
    assert set(d["p"]) == {"0", "1", "2"} and len(d["p"]["2"]) == 5


def test_real_surface_matches_moore_det():
    t = ql.HermQuatTriple.random(_rng(70), 2)
    xs, vals = ql.real_surface_slice(t, res=5)
    assert vals.shape == (5, 5)
    assert vals[0, 0] == pytest.approx(ql.real_surface_value(t, [1.0, xs[0], xs[0], 0.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_det_equals_p_squared_property(seed, n):
    rng = np.random.default_rng(seed)
    t = ql.HermQuatTriple.random(rng, n)
    pen = ql.pencil_build(t)
    curve = ql.spectral_curve(pen)
    assert ql.char_vs_square_residual(pen, curve, ql.sample_grid(rng, 5)) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_moore_det_multiplicative_on_conjugation(seed):
    rng = np.random.default_rng(seed)
    A = ql.random_hermitian(rng, 2)
    # unit-quaternion diagonal conjugation preserves det_H
    u = rng.normal(size=4)
    u /= np.linalg.norm(u)
    U = np.zeros((2, 2, 4))
    U[0, 0], U[1, 1, 0] = u, 1.0
    B = ql.qmatmul(ql.qmatmul(U, A), ql.qadjoint(U))
    assert ql.moore_det(B) == pytest.approx(ql.moore_det(A), rel=1e-9, abs=1e-12)
