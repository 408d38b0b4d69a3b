from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from bihilb.symcore import (
    GaussRational,
    MultiPoly,
    PolyMatrix,
    SymbolicError,
    adjugate,
    charpoly,
    det,
    parse_gauss,
    parse_poly,
    pfaffian,
    poly_arith,
)

z, u, w = MultiPoly.var("z"), MultiPoly.var("u"), MultiPoly.var("w")


def test_ring_examples():
    assert poly_arith(z + u, z - u, "add") == 2 * z
    assert poly_arith(z + u, z - u, "mul") == z * z - u * u
    half = GaussRational(Fraction(1, 2), Fraction(1, 2))
    assert str(poly_arith(z**2, half, "scale")) == "(1/2+1/2*i)*z^2"


@pytest.mark.parametrize(
    "poly, var, expected",
    [(z * z * u, "z", 2 * z * u), (z * z, "u", MultiPoly.zero()), (z * u + u * u, "z", u)],
)
def test_diff(poly, var, expected):
    assert poly.diff(var) == expected


def test_eval_examples():
    assert (z * z - 3 * z + 2).eval({"z": 1}) == 0
    assert (z * u).eval({"z": 2, "u": 3}) == 6
    assert (z * z).eval({"z": GaussRational(0, 1)}) == GaussRational(-1)
    assert (z * z).eval({"z": 1j}) == pytest.approx(-1)


def test_gauss_normalised():
    g = GaussRational(Fraction(2, -4), Fraction(6, 9))
    assert g.re == Fraction(-1, 2) and g.im == Fraction(2, 3)
    assert g.re.denominator > 0
    assert GaussRational(1, 1) / GaussRational(1, 1) == GaussRational(1)
    with pytest.raises(ZeroDivisionError):
        GaussRational(1) / GaussRational(0)


def test_no_zero_terms_stored():
    p = (z + u) - u
    assert p.trimmed().terms == {(1,): GaussRational(1)}
    assert all(c for c in (z - z).terms.values())
    assert (z - z).is_zero()


def test_serialization_roundtrip():
    p = z**3 * u - GaussRational(Fraction(1, 3), 2) * u * u + 7
    s = str(p)
    assert parse_poly(s, p.vars) == p
    assert parse_gauss("1/2+3/4*i") == GaussRational(Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(SymbolicError):
        parse_gauss("1/2 + i")


def test_graded_lex_order():
    # context (u, z); degree first, then lex on exponent vectors
    assert str(u + z**2 + z * u + 1) == "(1/1+0/1*i)*u*z + (1/1+0/1*i)*z^2 + (1/1+0/1*i)*u + (1/1+0/1*i)"


def test_expression_parser_matches_ring_ops():
    assert parse_poly("(z + u)*(z - u) + i*z") == z * z - u * u + GaussRational(0, 1) * z
    with pytest.raises(SymbolicError):
        parse_poly("1/z")


def test_charpoly_examples():
    lam = MultiPoly.var("lam")
    zero = PolyMatrix.zeros(2, 2)
    assert charpoly(zero) == lam * lam
    assert charpoly(PolyMatrix([[z, 0], [0, u]])) == (lam - z) * (lam - u)
    with pytest.raises(SymbolicError):
        charpoly(PolyMatrix([[z, u]]))


def test_pfaffian_anchor():
    J = PolyMatrix([[0, 1], [-1, 0]])
    assert pfaffian(J) == MultiPoly.const(1)
    blocks = [[0] * 6 for _ in range(6)]
    for k in range(0, 6, 2):
        blocks[k][k + 1], blocks[k + 1][k] = 1, -1
    assert pfaffian(PolyMatrix(blocks)) == MultiPoly.const(1)
    with pytest.raises(SymbolicError):
        pfaffian(PolyMatrix([[0, 1, 0], [-1, 0, 1], [0, -1, 0]]))
    with pytest.raises(SymbolicError):
        pfaffian(PolyMatrix([[0, 1], [1, 0]]))


def _leibniz_det(rows):
    n = len(rows)
    total = Fraction(0)
    for p in permutations(range(n)):
        inv = sum(p[i] > p[j] for i in range(n) for j in range(i + 1, n))
        term = Fraction((-1) ** inv)
        for i in range(n):
            term *= rows[i][p[i]]
        total += term
    return total


def _principal_minor_sums(rows):
    from itertools import combinations

    n = len(rows)
    return [
        sum(_leibniz_det([[rows[i][j] for j in S] for i in S]) for S in combinations(range(n), k))
        for k in range(n + 1)
    ]


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=30, deadline=None)
@given(st.lists(rationals, min_size=9, max_size=9))
def test_det_and_charpoly_vs_minor_oracle(vals):
    rows = [vals[3 * i: 3 * i + 3] for i in range(3)]
    m = PolyMatrix(rows)
    assert det(m).constant_value() == GaussRational(_leibniz_det(rows))
    cp = charpoly(m)
    coeffs = [c.constant_value() for c in cp.coeffs_in("lam")]  # ascending
    sums = _principal_minor_sums(rows)
    for k in range(4):
        assert coeffs[3 - k] == GaussRational((-1) ** k * sums[k])


@settings(max_examples=30, deadline=None)
@given(st.lists(rationals, min_size=6, max_size=15))
def test_pfaffian_squared_is_det(vals):
    size = 4 if len(vals) < 15 else 6
    n_up = size * (size - 1) // 2
    vals = (vals * 3)[:n_up]
    rows = [[Fraction(0)] * size for _ in range(size)]
    it = iter(vals)
    for i in range(size):
        for j in range(i + 1, size):
            rows[i][j] = next(it)
            rows[j][i] = -rows[i][j]
    m = PolyMatrix(rows)
    assert pfaffian(m) * pfaffian(m) == det(m)


def test_symbolic_pfaffian_squared_is_det():
    a, b, c, d, e, f = (MultiPoly.var(x) for x in "abcdef")
    m = PolyMatrix([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
    pf = pfaffian(m)
    assert pf == a * f - b * e + c * d
    assert pf * pf == det(m)


def test_adjugate_identity():
    m = PolyMatrix([[z, u], [w, z * u]])
    lhs = m @ adjugate(m)
    d = det(m)
    assert lhs == PolyMatrix([[d, 0], [0, d]])


polys = st.builds(
    lambda cs: sum(
        (MultiPoly.const(GaussRational(c[0], c[1])) * z ** c[2] * u ** c[3] for c in cs), MultiPoly.zero()
    ),
    st.lists(
        st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 3), st.integers(0, 3)), max_size=4
    ),
)


@settings(max_examples=50, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_product_rule_and_sympy_oracle(a, b):
    assert (a * b).diff("z") == a.diff("z") * b + a * b.diff("z")
    Z, U = sympy.symbols("z u")
    ea = sympy.sympify(str(a).replace("^", "**").replace("*i", "*I")) if a.terms else sympy.Integer(0)
    eb = sympy.sympify(str(b).replace("^", "**").replace("*i", "*I")) if b.terms else sympy.Integer(0)
    prod = sympy.expand(ea * eb)
    pt = {"z": GaussRational(Fraction(1, 3), 2), "u": GaussRational(-1, Fraction(1, 5))}
    exact = complex((a * b).eval(pt)) if (a * b).terms else 0j
    ref = complex(prod.subs({Z: sympy.Rational(1, 3) + 2 * sympy.I, U: -1 + sympy.I / 5}))
    assert exact == pytest.approx(ref, abs=1e-9)


def test_float_eval_path():
    p = z**2 * u - 3 * u + 1
    x = {"z": 0.3 - 1.1j, "u": 2.0 + 0.5j}
    assert p.eval(x) == pytest.approx((0.3 - 1.1j) ** 2 * (2 + 0.5j) - 3 * (2 + 0.5j) + 1)
    assert np.isfinite(complex(p.eval(x)))
