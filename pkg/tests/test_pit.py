import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from circfactor.circuit_ir import eval_circuit, parse_circuit, poly_to_circuit
from circfactor.errors import CapExceeded, FallbackExhausted
from circfactor.pit import PitVerdict, certified_pit, grid_pit, ki_pit
from circfactor.polyring import MultiPoly, parse_poly


def circ(text):
    return poly_to_circuit(parse_poly(text))


def test_grid_pit_finds_witness():
    v = grid_pit(circ("x1*x2 - x1"), d=2)
    assert not v.is_zero
    assert eval_circuit(circ("x1*x2 - x1"), v.witness) != 0
    assert all(0 <= c <= 2 for c in v.witness.values())


def test_grid_pit_zero():
    c = parse_circuit(
        "input x\nnode m = mul x c(-1)\nnode s = add x m\noutput s\n"
    )
    v = grid_pit(c)
    assert v.is_zero and v.witness is None


def test_grid_pit_lex_first_witness():
    # x1 alone: first nonzero point in lex order over (x1, x2) is (1, 0)
    v = grid_pit(circ("x1"), d=2)
    assert v.witness == {"x1": 1}
    v2 = grid_pit(circ("x2 + 0*x1") if False else circ("x2"), d=2)
    assert v2.witness == {"x2": 1}


def test_grid_pit_cap():
    with pytest.raises(CapExceeded):
        grid_pit(circ("x1*x2*x3*x4*x5"), d=9, grid_cap=10_000)


def test_grid_pit_constant_circuit():
    assert grid_pit(circ("0")).is_zero
    v = grid_pit(circ("7"))
    assert not v.is_zero and v.witness == {}


def test_identity_lemma_zero_count():
    # x1*x2 on {0,1,2}^2 vanishes at exactly 5 points <= d*|S|^(n-1) = 6
    p = parse_poly("x1*x2")
    zeros = sum(
        1
        for a, b in itertools.product(range(3), repeat=2)
        if p.evaluate({"x1": a, "x2": b}) == 0
    )
    assert zeros == 5 <= 2 * 3


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_identity_lemma_bound_random(data):
    # random nonzero polynomial: zeros on S^n never exceed d*|S|^(n-1)
    nvars = data.draw(st.integers(1, 3))
    names = [f"x{i + 1}" for i in range(nvars)]
    nterms = data.draw(st.integers(1, 4))
    p = MultiPoly.zero(names)
    for _ in range(nterms):
        exps = [data.draw(st.integers(0, 2)) for _ in names]
        coeff = data.draw(st.integers(-3, 3))
        p = p + MultiPoly.monomial(names, exps, coeff)
    if p.is_zero():
        return
    d = p.total_degree()
    side = d + 2
    zeros = 0
    for values in itertools.product(range(side), repeat=nvars):
        if p.evaluate(dict(zip(names, values))) == 0:
            zeros += 1
    assert zeros <= d * side ** (nvars - 1)


def test_ki_pit_linear_sum():
    c = circ(" + ".join(f"x{i + 1}" for i in range(8)))
    v = ki_pit(c)
    assert not v.is_zero
    assert eval_circuit(c, v.witness) != 0
    assert set(v.witness) == {f"x{i + 1}" for i in range(8)}


def test_ki_pit_zero_circuit():
    c = parse_circuit(
        "input x\nnode m = mul x c(-1)\nnode s = add x m\noutput s\n"
    )
    assert ki_pit(c).is_zero


def test_ki_pit_matches_grid_on_products():
    # pairwise-difference products, six variables
    terms = []
    for i, j in itertools.combinations(range(1, 5), 2):
        terms.append(f"(x{i} - x{j})")
    p = parse_poly("1")
    for t in [parse_poly(f"x{i} - x{j}") for i, j in itertools.combinations(range(1, 5), 2)]:
        p = p * t
    c = poly_to_circuit(p)
    v_ki = ki_pit(c, grid_cap=5_000_000)
    v_grid = grid_pit(c, grid_cap=5_000_000)
    assert v_ki.is_zero == v_grid.is_zero == False  # noqa: E712
    assert eval_circuit(c, v_ki.witness) != 0


def test_ki_pit_handles_w_named_inputs():
    c = circ("w1*w2 - 1")
    v = ki_pit(c)
    assert not v.is_zero
    assert set(v.witness) == {"w1", "w2"}
    assert eval_circuit(c, v.witness) != 0


def test_ki_pit_constant():
    assert ki_pit(circ("0")).is_zero
    assert not ki_pit(circ("5")).is_zero


def test_certified_pit_zero_needs_agreement():
    c = parse_circuit(
        "input x\nnode m = mul x c(-1)\nnode s = add x m\noutput s\n"
    )
    v = certified_pit(c)
    assert v.is_zero
    assert v.route in ("ki:agreement", "grid")


def test_certified_pit_nonzero():
    c = circ("x1^2 + x2^2 + 1")
    v = certified_pit(c)
    assert not v.is_zero and eval_circuit(c, v.witness) != 0


def test_certified_pit_exhaustion():
    # 12 variables of degree 9: every route blows past a tiny cap
    p = " * ".join(f"x{i + 1}" for i in range(12))
    c = circ(p)
    big = circ(p + " + x1")
    with pytest.raises(FallbackExhausted):
        certified_pit(big, grid_cap=3)
    del c


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_ki_agrees_with_grid_when_both_feasible(data):
    nvars = data.draw(st.integers(1, 3))
    names = [f"x{i + 1}" for i in range(nvars)]
    nterms = data.draw(st.integers(0, 3))
    p = MultiPoly.zero(names)
    for _ in range(nterms):
        exps = [data.draw(st.integers(0, 2)) for _ in names]
        coeff = data.draw(st.integers(-2, 2))
        p = p + MultiPoly.monomial(names, exps, coeff)
    c = poly_to_circuit(p)
    try:
        v_ki = ki_pit(c, grid_cap=500_000)
        v_grid = grid_pit(c, grid_cap=500_000)
    except CapExceeded:
        return
    assert v_ki.is_zero == v_grid.is_zero == p.is_zero()
