"""Engine tests.

Oracle strategy: every factorization is compared against sympy's
factor_list over Q (multiset of monic factors plus unit), and the
minimal-polynomial reconstruction is compared against planted factors
that the tests multiply out themselves.
"""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from circfactor.circuit_ir import (
    dense_from_circuit,
    eval_circuit,
    parse_circuit,
    poly_to_circuit,
    serialize_circuit,
)
from circfactor.errors import (
    DegenerateInput,
    HypothesisViolated,
    NotMonic,
    SingularSystem,
    ZeroDeterminantOnGrid,
)
from circfactor.factor_engine import (
    FALLBACK_LOG,
    FactorizationResult,
    dense_multivariate_factor,
    factor_all,
    factor_squarefree,
    minimal_poly_from_root,
    preprocess,
    squarefree_parts_circuits,
    univariate_factor_Q,
)
from circfactor.kigen import build_ki_map
from circfactor.lift import newton_lift_quadratic
from circfactor.polyring import MultiPoly, lift_to_field, parse_poly
from circfactor.scalars import NumberField


# ---------- sympy oracle helpers ----------


def to_sympy(p: MultiPoly):
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, k in zip(p.variables, e):
            if k:
                term *= sympy.Symbol(v) ** k
        expr += term
    return sympy.expand(expr)


def from_sympy(expr, variables):
    syms = [sympy.Symbol(v) for v in variables]
    poly = sympy.Poly(expr, *syms)
    terms = {}
    for e, c in poly.terms():
        r = sympy.Rational(c)
        terms[tuple(e)] = Fraction(r.p, r.q)
    return MultiPoly(tuple(variables), terms)


def key(p: MultiPoly) -> str:
    return p.drop_vars().to_text()


def sympy_factor_set(p: MultiPoly):
    """(unit, sorted [(monic factor key, mult)]) via sympy."""
    variables = sorted(v for v in p.variables if p.degree_in(v) > 0)
    const, parts = sympy.factor_list(to_sympy(p))
    cr = sympy.Rational(const)
    unit = Fraction(cr.p, cr.q)
    out = []
    for f, m in parts:
        mp = from_sympy(f, variables or list(p.variables)[:1] or ["x1"])
        u, monic = mp.monic_normalized()
        unit *= Fraction(u) ** m
        out.append((key(monic), m))
    return unit, sorted(out)


def engine_factor_set(result: FactorizationResult):
    out = [(key(entry.dense), entry.multiplicity) for entry in result.factors]
    return result.unit, sorted(out)


# ---------- univariate wrapper ----------


def test_univariate_factor_fixed_cases():
    unit, facs = univariate_factor_Q(parse_poly("x1^2 - 1"))
    assert unit == 1
    assert sorted(key(f) for f, m in facs) == sorted(
        [key(parse_poly("x1 - 1")), key(parse_poly("x1 + 1"))]
    )
    unit, facs = univariate_factor_Q(parse_poly("6*x1^2 + x1 - 1"))
    assert unit == 6
    assert all(m == 1 for _, m in facs)
    unit, facs = univariate_factor_Q(parse_poly("x1^4 + 4"))
    assert unit == 1 and len(facs) == 2 and all(f.total_degree() == 2 for f, _ in facs)


def test_univariate_factor_rejects_bad_inputs():
    with pytest.raises(DegenerateInput):
        univariate_factor_Q(parse_poly("x1*x2 + 1"))
    with pytest.raises(DegenerateInput):
        univariate_factor_Q(parse_poly("7"))


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=6))
@settings(max_examples=30, deadline=None)
def test_univariate_factor_matches_sympy(coeffs):
    x = MultiPoly.variable("x1")
    p = MultiPoly.zero(("x1",))
    for i, c in enumerate(coeffs):
        p = p + x ** i * c
    if p.is_zero() or p.is_constant():
        return
    unit, facs = univariate_factor_Q(p)
    got = (unit, sorted((key(f), m) for f, m in facs))
    assert got == sympy_factor_set(p)
    prod = MultiPoly.constant(unit, ())
    for f, m in facs:
        prod = prod * f ** m
    assert prod == p


# ---------- dense multivariate factorization ----------


def test_dense_factor_two_planted():
    f1 = parse_poly("z^2 + x1*z + 1")
    f2 = parse_poly("z + x2")
    got = dense_multivariate_factor(f1 * f2, "z")
    assert sorted(key(g) for g in got) == sorted([key(f1), key(f2)])


def test_dense_factor_three_planted():
    f1 = parse_poly("z - x1")
    f2 = parse_poly("z - x2 - 1")
    f3 = parse_poly("z + x1*x2 + 2")
    got = dense_multivariate_factor(f1 * f2 * f3, "z")
    assert sorted(key(g) for g in got) == sorted([key(f1), key(f2), key(f3)])


def test_dense_factor_irreducible_and_univariate():
    p = parse_poly("z^2 + x1 + 1")
    assert [key(g) for g in dense_multivariate_factor(p, "z")] == [key(p)]
    got = dense_multivariate_factor(parse_poly("z^2 - 1"), "z")
    assert sorted(key(g) for g in got) == sorted([key(parse_poly("z - 1")), key(parse_poly("z + 1"))])


def test_dense_factor_rejects_bad_projection_and_nonmonic():
    with pytest.raises(HypothesisViolated):
        dense_multivariate_factor(parse_poly("z^2 - x1"), "z")
    with pytest.raises(NotMonic):
        dense_multivariate_factor(parse_poly("x1*z + 1"), "z")
    with pytest.raises(NotMonic):
        dense_multivariate_factor(parse_poly("2*z + 1"), "z")


@given(
    st.lists(st.integers(-2, 2), min_size=2, max_size=2),
    st.lists(st.integers(-2, 2), min_size=2, max_size=2),
    st.integers(1, 3),
)
@settings(max_examples=20, deadline=None)
def test_dense_factor_matches_sympy(c1, c2, shift):
    x1, x2, z = (MultiPoly.variable(v) for v in ("x1", "x2", "z"))
    f1 = z + x1 * c1[0] + x2 * c1[1]
    f2 = z + x1 * c2[0] + x2 * c2[1] + shift
    p = f1 * f2
    proj = p.substitute({"x1": 0, "x2": 0})
    dz = proj.derivative("z")
    # keep only instances with a squarefree projection
    if proj.coefficient("z", 0).is_zero() and dz.coefficient("z", 0).is_zero():
        return
    got = dense_multivariate_factor(p, "z")
    prod = MultiPoly.constant(1, ())
    for g in got:
        prod = prod * g
    assert prod == p
    _, oracle = sympy_factor_set(p)
    assert sorted((key(g.monic_normalized()[1]), 1) for g in got) == oracle


def test_dense_factor_deterministic_order():
    p = parse_poly("z + x1") * parse_poly("z + x2 + 1") * parse_poly("z - 2")
    a = [key(g) for g in dense_multivariate_factor(p, "z")]
    b = [key(g) for g in dense_multivariate_factor(p, "z")]
    assert a == b == sorted(a)


# ---------- preprocessing ----------


def _circ(poly_text: str):
    return poly_to_circuit(parse_poly(poly_text))


def test_preprocess_regularizes_and_monicizes():
    circ = _circ("x1^2 + x2^2 + 1")
    ptilde, prep = preprocess(circ)
    dense = dense_from_circuit(circ)
    assert prep.degree == 2
    # the z-shifted, delta-scaled polynomial is monic of degree D in z
    shift = {v: MultiPoly.variable(v) + MultiPoly.variable("z") * a
             for v, a in zip(prep.variables, prep.a)}
    phat = dense.substitute(shift) / prep.delta
    zc = phat.coeffs_in("z")
    assert len(zc) == prep.degree + 1
    assert zc[-1] == MultiPoly.constant(1, ())
    # T-regularization matches the returned circuit and cached dense
    reg = phat.substitute(
        {v: MultiPoly.variable(v) * MultiPoly.variable("T") + b
         for v, b in zip(prep.variables, prep.b)}
    )
    assert reg == prep.regularized_dense
    assert dense_from_circuit(ptilde) == reg
    # base slice is squarefree: sympy discriminant check at b
    zpoly = reg.substitute({v: 0 for v in prep.variables}).substitute({"T": 0})
    sy = to_sympy(zpoly)
    assert sympy.discriminant(sy, sympy.Symbol("z")) != 0
    assert prep.disc_value != 0


def test_preprocess_deterministic():
    circ = _circ("x1*x2 + x1 + 3")
    p1, r1 = preprocess(circ)
    p2, r2 = preprocess(circ)
    assert (r1.a, r1.delta, r1.b) == (r2.a, r2.delta, r2.b)
    assert serialize_circuit(p1) == serialize_circuit(p2)


def test_preprocess_rejects_reserved_and_constant():
    with pytest.raises(DegenerateInput):
        preprocess(parse_circuit("input T\nnode g = mul T T\noutput g"))
    with pytest.raises(DegenerateInput):
        preprocess(_circ("5"))


# ---------- squarefree part circuits ----------


def test_squarefree_parts_circuits():
    p = parse_poly("x1 + 1") * parse_poly("x1") * parse_poly("x1")
    unit, parts = squarefree_parts_circuits(poly_to_circuit(p))
    assert unit == 1
    got = {m: key(dense_from_circuit(c)) for c, m in parts}
    assert got == {1: key(parse_poly("x1 + 1")), 2: key(parse_poly("x1"))}
    q = parse_poly("x1 + x2") * parse_poly("x1 + x2") * parse_poly("x1 - x2")
    unit, parts = squarefree_parts_circuits(poly_to_circuit(q))
    recon = MultiPoly.constant(unit, ())
    for c, m in parts:
        recon = recon * dense_from_circuit(c) ** m
    assert recon == q


# ---------- minimal polynomial reconstruction ----------


def _planted_pair():
    # G1 = z^2 + T*x1*z + (T^2*x1^2 + 1); G2 = z - T*x1 - 3  (T-regular shapes)
    g1 = parse_poly("z^2 + T*x1*z + T^2*x1^2 + 1")
    g2 = parse_poly("z - T*x1 - 3")
    return g1, g2


@pytest.mark.parametrize("pathway", ["symbolic", "circuit", "interp"])
def test_minpoly_recovers_quadratic_factor(pathway):
    g1, g2 = _planted_pair()
    ptilde = g1 * g2
    field = NumberField([1, 0, 1])  # u^2 + 1
    root, _ = newton_lift_quadratic(lift_to_field(ptilde, field), field.gen(), 9)
    mps = minimal_poly_from_root(root, 2, 2, pathway=pathway)
    assert mps.dense == g1
    assert dense_from_circuit(mps.circuit) == g1
    assert all(n[0] in ("in", "const", "add", "mul") for n in mps.circuit.nodes)


@pytest.mark.parametrize("pathway", ["symbolic", "circuit", "interp"])
def test_minpoly_recovers_linear_factor_rational_base(pathway):
    g1, g2 = _planted_pair()
    ptilde = g1 * g2
    root, _ = newton_lift_quadratic(ptilde, Fraction(3), 3)
    mps = minimal_poly_from_root(root, 1, 1, pathway=pathway)
    assert mps.dense == g2


def test_minpoly_too_small_degree_is_refused():
    g1, g2 = _planted_pair()
    ptilde = g1 * g2
    field = NumberField([1, 0, 1])
    root, _ = newton_lift_quadratic(lift_to_field(ptilde, field), field.gen(), 9)
    for pathway in ("symbolic", "interp", "circuit"):
        with pytest.raises((SingularSystem, ZeroDeterminantOnGrid)):
            minimal_poly_from_root(root, 2, 1, pathway=pathway)


def test_minpoly_two_variable_factors():
    g1 = parse_poly("z - T*x1 - 2*T*x2 - 1")
    g2 = parse_poly("z + T^2*x1*x2 + 1")
    ptilde = g1 * g2
    r1, _ = newton_lift_quadratic(ptilde, Fraction(1), 3)
    assert minimal_poly_from_root(r1, 1, 1, pathway="interp").dense == g1
    r2, _ = newton_lift_quadratic(ptilde, Fraction(-1), 5)
    assert minimal_poly_from_root(r2, 2, 1, pathway="interp").dense == g2
    assert minimal_poly_from_root(r2, 2, 1, pathway="symbolic").dense == g2


# ---------- squarefree pipeline ----------


def _factor_set_of_circuits(circuits):
    return sorted(key(dense_from_circuit(c)) for c in circuits)


def test_factor_squarefree_bivariate_product():
    f1 = parse_poly("x1 + x2 + 1")
    f2 = parse_poly("x1 - x2 + 2")
    got = factor_squarefree(poly_to_circuit(f1 * f2))
    assert _factor_set_of_circuits(got) == sorted([key(f1), key(f2)])


def test_factor_squarefree_trivariate_mixed_degrees():
    f1 = parse_poly("x1^2 + x2*x3 + 1")
    f2 = parse_poly("x1 + x3 - 2")
    got = factor_squarefree(poly_to_circuit(f1 * f2))
    assert _factor_set_of_circuits(got) == sorted([key(f1), key(f2)])


def test_factor_squarefree_irreducible_and_univariate():
    p = parse_poly("x1^2 + x2^2 + 1")
    got = factor_squarefree(poly_to_circuit(p))
    assert _factor_set_of_circuits(got) == [key(p)]
    got = factor_squarefree(_circ("x1^2 - 2"))
    assert _factor_set_of_circuits(got) == [key(parse_poly("x1^2 - 2"))]
    got = factor_squarefree(_circ("x1^2 - 1"))
    assert len(got) == 2


# ---------- full factorization ----------


def test_factor_all_units_and_multiplicities():
    p = parse_poly("x1 + 1/2") * parse_poly("x1 + 1/2") * parse_poly("x1 - 1/3") * 6
    res = factor_all(poly_to_circuit(p))
    assert res.unit == 6
    assert engine_factor_set(res)[1] == sorted(
        [(key(parse_poly("x1 - 1/3")), 1), (key(parse_poly("x1 + 1/2")), 2)]
    )


def test_factor_all_multivariate_square():
    p = parse_poly("x1 + x2") * parse_poly("x1 + x2") * parse_poly("x1*x2 + 1")
    res = factor_all(poly_to_circuit(p))
    assert engine_factor_set(res) == sympy_factor_set(p)
    recon = MultiPoly.constant(res.unit, ())
    for entry in res.factors:
        recon = recon * entry.dense ** entry.multiplicity
    assert recon == p


def test_factor_all_rejects_zero_and_handles_constant():
    with pytest.raises(DegenerateInput):
        factor_all(parse_circuit("input x1\nnode g = mul x1 c(0)\noutput g"))
    res = factor_all(_circ("5"))
    assert res.unit == 5 and res.factors == []


def test_factor_all_deterministic():
    p = parse_poly("x1*x2 + 2") * parse_poly("x1 + x2 - 1")
    r1 = factor_all(poly_to_circuit(p))
    r2 = factor_all(poly_to_circuit(p))
    s1 = [serialize_circuit(e.circuit) for e in r1.factors]
    s2 = [serialize_circuit(e.circuit) for e in r2.factors]
    assert s1 == s2 and r1.unit == r2.unit


@given(
    st.lists(st.integers(-2, 2), min_size=3, max_size=3),
    st.lists(st.integers(-2, 2), min_size=3, max_size=3),
)
@settings(max_examples=12, deadline=None)
def test_factor_all_matches_sympy(c1, c2):
    x1, x2 = MultiPoly.variable("x1"), MultiPoly.variable("x2")
    f1 = x1 * c1[0] + x2 * c1[1] + c1[2]
    f2 = x1 * x2 * c2[0] + x1 * c2[1] + c2[2]
    p = f1 * f2
    if p.is_zero() or p.is_constant():
        return
    res = factor_all(poly_to_circuit(p))
    assert engine_factor_set(res) == sympy_factor_set(p)


def test_factor_all_circuit_inputs_share_structure():
    # circuit given as a genuine DAG, not a dense polynomial
    text = """input x1
input x2
node s = add x1 x2
node t = mul s s
node u = add t c(-1)
node g = mul u s
output g
"""
    circ = parse_circuit(text)
    res = factor_all(circ)
    dense = dense_from_circuit(circ)
    assert engine_factor_set(res) == sympy_factor_set(dense)


def test_fallback_log_is_a_list():
    assert isinstance(FALLBACK_LOG, list)
