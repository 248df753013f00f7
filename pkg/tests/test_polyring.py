from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from circfactor.errors import DegenerateInput, DegreeOrder, InexactDivision, NotMonic
from circfactor.polyring import (
    MultiPoly,
    bareiss_determinant,
    dense_divide,
    discriminant,
    esym_to_psym,
    exact_div,
    interpolate_on_lattice,
    lagrange_matrix,
    lift_to_field,
    mul_trunc,
    nf_coeff_decompose,
    parse_poly,
    poly_gcd,
    pow_trunc,
    principal_lattice,
    psym_to_esym,
    squarefree_decompose,
    sylvester_resultant,
)
from circfactor.scalars import NumberField


def P(text: str) -> MultiPoly:
    return parse_poly(text)


# ---------------------------------------------------------------- basics


def test_parse_and_print_roundtrip():
    p = P("3/2*x1^2*z - T + 1")
    assert p.to_text() == "3/2*x1^2*z - T + 1"
    assert parse_poly(p.to_text()) == p


def test_canonical_term_order_is_graded_lex():
    p = P("x2 + x1 + x1*x2 + 1")
    assert p.to_text() == "x1*x2 + x1 + x2 + 1"


def test_arithmetic_smoke():
    x, y = P("x1"), P("x2")
    assert (x + y) * (x - y) == x * x - y * y
    assert (x + 1) ** 3 == P("x1^3 + 3*x1^2 + 3*x1 + 1")


def test_degrees():
    p = P("x1^2*x2 + z^5")
    assert p.total_degree() == 5
    assert p.degree_in("x1") == 2
    assert p.degree_in("z") == 5
    assert MultiPoly.zero().total_degree() == -1


def test_evaluate_and_substitute():
    p = P("x1^2 + 2*x1*x2 + 1")
    assert p.evaluate({"x1": 2, "x2": Fraction(1, 2)}) == 7
    q = p.substitute({"x2": P("x1")})
    assert q == P("3*x1^2 + 1")


def test_trunc_and_hom_component():
    p = P("T^3 + T^2*x1 + T + 1")
    assert p.trunc(["T"], 2) == P("T + 1")
    assert p.hom_component(["T"], 2) == P("T^2*x1")
    assert p.trunc(["T", "x1"], 3) == P("T + 1")


def test_mul_trunc_matches_full_product():
    a = P("1 + T + T^2")
    b = P("1 - T + x1*T^3")
    full = (a * b).trunc(["T"], 3)
    assert mul_trunc(a, b, ["T"], 3) == full
    assert pow_trunc(a, 5, ["T"], 4) == (a**5).trunc(["T"], 4)


def test_coeffs_in_roundtrip():
    p = P("z^2*x1 + z*T + 3")
    cs = p.coeffs_in("z")
    assert [c.to_text() for c in cs] == ["3", "T", "x1"]
    assert MultiPoly.from_coeffs_in("z", cs) == p


def test_derivative_is_exact_not_scaled():
    p = P("z^3")
    assert p.derivative("z", 2) == P("6*z")


def test_leading_and_monic():
    p = P("2*x1^2 + x2^2 + x1")
    # graded-lex: x1^2 beats x2^2 (lex on exponent vectors)
    unit, q = p.monic_normalized()
    assert unit == 2
    assert q.leading_coeff() == 1
    assert q == P("x1^2 + 1/2*x2^2 + 1/2*x1")


# ------------------------------------------------- symmetric transforms


def test_newton_identities_on_known_roots():
    # roots {1,2,3}: e = (6,11,6), p = (6,14,36)
    e = [Fraction(6), Fraction(11), Fraction(6)]
    p = esym_to_psym(e)
    assert p == [Fraction(6), Fraction(14), Fraction(36)]
    assert psym_to_esym(p) == e


@settings(max_examples=200)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=1, max_size=9))
def test_esym_psym_roundtrip(e):
    assert psym_to_esym(esym_to_psym(e)) == e


def test_esym_psym_over_polynomial_ring():
    e = [P("T + 1"), P("x1*T")]
    p = esym_to_psym(e)
    assert psym_to_esym(p) == e


# ------------------------------------------------------------ division


def test_exact_div_and_failure():
    a = P("x1^2 - x2^2")
    b = P("x1 - x2")
    assert exact_div(a, b) == P("x1 + x2")
    with pytest.raises(InexactDivision):
        exact_div(P("x1^2 + 1"), b)


def test_dense_divide_monic():
    a = P("z^3 + z*x1 + 2")
    b = P("z^2 + x1")
    q, r = dense_divide(a, b, "z")
    assert q == P("z")
    assert r == P("2")
    assert q * b + r == a


def test_dense_divide_requires_scalar_lead():
    with pytest.raises(NotMonic):
        dense_divide(P("z^2"), P("x1*z + 1"), "z")
    with pytest.raises(DegreeOrder):
        dense_divide(P("z"), P("z^2 + 1"), "z")


# ----------------------------------------------------------------- gcd


def test_gcd_univariate():
    a = P("x1^2 - 1")
    b = P("x1^2 - 2*x1 + 1")
    assert poly_gcd(a, b) == P("x1 - 1")


def test_gcd_multivariate():
    g = P("x1 + x2 + 1")
    a = g * P("x1 - x2")
    b = g * P("x1^2 + x2")
    assert poly_gcd(a, b) == g


def test_gcd_coprime():
    assert poly_gcd(P("x1 + 1"), P("x2 + 1")) == P("1")


def test_gcd_with_content():
    a = P("x2*x1^2 + x2")        # x2*(x1^2+1)
    b = P("x2^2*x1 + x2^2")      # x2^2*(x1+1)
    assert poly_gcd(a, b) == P("x2")


# ---------------------------------------------------------- squarefree


def test_yun_simple_square():
    f = P("x1^2 + 2*x1 + 1")  # (x1+1)^2
    unit, parts = squarefree_decompose(f)
    assert unit == 1
    assert parts == [(P("x1 + 1"), 2)]


def test_yun_mixed_multiplicities():
    f1 = P("x1 + x2")
    f2 = P("x1 - x2 + 1")
    f = f1 * f2 * f2 * 3
    unit, parts = squarefree_decompose(f)
    assert unit == 3
    assert parts == [(f1, 1), (f2, 2)]
    rebuilt = MultiPoly.constant(unit, ())
    for q, m in parts:
        rebuilt = rebuilt * q**m
    assert rebuilt == f


def test_yun_variable_free_factor_structure():
    # factor not involving the main variable must still be split off
    f = P("x2^2*x1^3 + x2^2*x1")  # x2^2 * x1 * (x1^2+1)
    unit, parts = squarefree_decompose(f)
    rebuilt = MultiPoly.constant(unit, ())
    for q, m in parts:
        rebuilt = rebuilt * q**m
    assert rebuilt == f
    mults = sorted(m for _, m in parts)
    assert mults == [1, 2]


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(-3, 3),
    st.integers(-3, 3),
    st.integers(1, 2),
)
def test_yun_reassembles(m1, c1, c2, m2):
    f1 = P("x1") + c1
    f2 = P("x1^2") + P("x2") + c2
    f = f1**m1 * f2**m2
    unit, parts = squarefree_decompose(f)
    rebuilt = MultiPoly.constant(unit, ())
    for q, m in parts:
        rebuilt = rebuilt * q**m
    assert rebuilt == f
    for q, _ in parts:
        assert poly_gcd(q, q.derivative("x1") + q.derivative("x2")) == P("1")


# ---------------------------------------------------------- resultants


def test_resultant_of_linear_pair():
    assert sylvester_resultant(P("z - 2"), P("z - 3"), "z") == P("-1")


def test_discriminant_convention():
    assert discriminant(P("z^2 - 1"), "z") == P("-4")


def test_resultant_detects_common_root():
    a = P("z^2 - 1")
    b = P("z - 1")
    assert sylvester_resultant(a, b, "z").is_zero()


def test_resultant_multivariate():
    # Res_z(z - x1, z - x2) = x2 - x1... with our row convention: x2 - x1
    r = sylvester_resultant(P("z - x1"), P("z - x2"), "z")
    assert r in (P("x2 - x1"), P("x1 - x2"))
    # eliminating z from z=x1, z=x2 leaves the incompatibility x1 != x2
    assert r.substitute({"x1": P("x2")}).is_zero()


def test_bareiss_determinant_matches_cofactor():
    rows = [
        [P("x1"), P("1"), P("0")],
        [P("2"), P("x1 + 1"), P("x2")],
        [P("1"), P("0"), P("x2 - 1")],
    ]

    def cofactor_det(m):
        n = len(m)
        if n == 1:
            return m[0][0]
        acc = MultiPoly.zero()
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for row in m[1:]]
            term = m[0][j] * cofactor_det(minor)
            acc = acc + (term if j % 2 == 0 else -term)
        return acc

    assert bareiss_determinant(rows) == cofactor_det(rows)


# ------------------------------------------------------- number fields


def test_nf_coeff_decompose_roundtrip():
    K = NumberField([-2, 0, 1])
    u = K.gen()
    p = MultiPoly(("T", "x1"), {(1, 0): u, (0, 2): K.from_rational(3), (0, 0): 1 + u})
    comps = nf_coeff_decompose(p)
    assert len(comps) == 2
    assert comps[0] == P("3*x1^2 + 1")
    assert comps[1] == P("T + 1")
    # reassemble: sum_r u^r * comps[r]
    re = lift_to_field(comps[0], K) + lift_to_field(comps[1], K) * u
    assert re == p


def test_mixed_fields_rejected_in_poly_arithmetic():
    K1 = NumberField([-2, 0, 1])
    K2 = NumberField([-3, 0, 1])
    a = MultiPoly(("x1",), {(1,): K1.gen()})
    b = MultiPoly(("x1",), {(1,): K2.gen()})
    with pytest.raises(DegenerateInput):
        _ = a + b


# ------------------------------------------------------- interpolation


def test_lagrange_matrix_recovers_coefficients():
    nodes = [Fraction(j) for j in range(4)]
    beta = lagrange_matrix(nodes)
    # f(y) = 2y^3 - y + 5
    f = lambda y: 2 * y**3 - y + 5
    vals = [f(a) for a in nodes]
    coeffs = [sum(beta[m][j] * vals[j] for j in range(4)) for m in range(4)]
    assert coeffs == [5, -1, 0, 2]


def test_principal_lattice_shape():
    lat = principal_lattice(2, 2)
    assert lat == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_interpolate_on_lattice_exact():
    target = P("x1^2 - 2*x1*x2 + 3")
    got = interpolate_on_lattice(
        ("x1", "x2"), 2, lambda pt: target.evaluate({"x1": pt[0], "x2": pt[1]})
    )
    assert got == target


def test_interpolate_with_shift():
    target = P("x1^2 + x2")
    got = interpolate_on_lattice(
        ("x1", "x2"), 2, lambda pt: target.evaluate({"x1": pt[0], "x2": pt[1]}), shift=(3, 5)
    )
    assert got == target
