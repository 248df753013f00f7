"""Newton iteration for T-adic root lifting.

Starting from a simple root alpha of P(0,0,z), the iterations build a
truncated polynomial phi(T, x) with P(T, x, phi) ≡ 0 mod T^k.  The linear
variant gains one order of T per round and divides by the fixed scalar
beta = dP/dz at the base point; the quadratic variant doubles the order
each round and replaces the division by a running power-series inverse
sigma of dP/dz, so it performs no divisions at all beyond the one scalar
inversion of beta at start-up.  Both produce the same root — it is the
unique truncated non-degenerate approximate root over the given base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from math import comb

from .errors import CapExceeded, DegenerateInput, DegenerateRoot, NotARoot
from .polyring import MultiPoly, mul_trunc
from .scalars import NumberFieldElement, nf_inverse

__all__ = [
    "ApproxRoot",
    "InverseWitness",
    "check_regularized",
    "check_approx_root",
    "newton_lift_linear",
    "newton_lift_quadratic",
]

Scalarish = Union[Fraction, int, NumberFieldElement]


@dataclass(frozen=True, eq=False)
class ApproxRoot:
    """A truncated approximate z-root.

    phi is a polynomial in T and the x-variables with deg_T < order,
    P(T, x, phi) ≡ 0 mod T^order, phi(0, x) = base, and the
    non-degeneracy scalar deriv_at_base is nonzero.
    """

    phi: MultiPoly
    order: int
    base: Scalarish
    deriv_at_base: Scalarish

    def as_circuit(self):
        from .circuit_ir import poly_to_circuit

        return poly_to_circuit(self.phi)


@dataclass(frozen=True, eq=False)
class InverseWitness:
    """Per-stage inverses of dP/dz along the quadratic iteration.

    stages holds (phi_i, sigma_i, 2^i) triples satisfying
    sigma_i * dP/dz(T, x, phi_i) ≡ 1 mod T^(2^i); sigma is the final one.
    """

    sigma: MultiPoly
    stages: List[Tuple[MultiPoly, MultiPoly, int]] = field(default_factory=list)


def check_regularized(p: MultiPoly) -> bool:
    """True iff every monomial with positive x-degree also carries T.

    Setting T = 0 then leaves a univariate polynomial in z alone.
    """
    names = p.variables
    try:
        t_idx: Optional[int] = names.index("T")
    except ValueError:
        t_idx = None
    x_idx = [i for i, v in enumerate(names) if v not in ("T", "z")]
    for e in p.terms:
        if any(e[i] for i in x_idx):
            if t_idx is None or e[t_idx] == 0:
                return False
    return True


def _scalar_inverse(beta: Scalarish):
    if isinstance(beta, NumberFieldElement):
        return nf_inverse(beta)
    return Fraction(1) / Fraction(beta)


def _univariate_in_z(p: MultiPoly) -> MultiPoly:
    """P with T and every x set to zero."""
    point = {v: Fraction(0) for v in p.variables if v != "z" and p.degree_in(v) > 0}
    return p.substitute({v: MultiPoly.constant(0) for v in point})


def _eval_univariate(p: MultiPoly, alpha: Scalarish):
    coeffs = p.coeffs_in("z")
    acc = None
    for c in reversed(coeffs):
        cv = c.constant_value() if not c.is_zero() else Fraction(0)
        acc = cv if acc is None else acc * alpha + cv
    if acc is None:
        return Fraction(0)
    return acc


def _horner_at(p: MultiPoly, phi: MultiPoly, k: int) -> MultiPoly:
    """P(T, x, phi) truncated mod T^k."""
    coeffs = p.coeffs_in("z")
    if not coeffs:
        return MultiPoly.zero(phi.variables)
    acc = coeffs[-1].trunc(["T"], k)
    for c in reversed(coeffs[:-1]):
        acc = mul_trunc(acc, phi, ["T"], k) + c.trunc(["T"], k)
    return acc


def _base_data(p: MultiPoly, alpha: Scalarish):
    """Validate alpha against P(0,0,z); return (alpha, beta)."""
    if isinstance(alpha, int):
        alpha = Fraction(alpha)
    p0 = _univariate_in_z(p)
    if _eval_univariate(p0, alpha) != 0:
        raise NotARoot("base point is not a root of P(0,0,z)")
    beta = _eval_univariate(p0.derivative("z"), alpha)
    if beta == 0:
        raise DegenerateRoot("dP/dz vanishes at the base point")
    return alpha, beta


def _const_poly(value: Scalarish) -> MultiPoly:
    return MultiPoly.constant(value, ())


def newton_lift_linear(p: MultiPoly, alpha: Scalarish, k: int) -> ApproxRoot:
    """Lift alpha to an order-k approximate root, one T-order per step."""
    if k < 1:
        raise DegenerateInput("order must be at least 1")
    if "z" not in p.variables or p.degree_in("z") < 1:
        raise DegenerateInput("polynomial must involve z")
    alpha, beta = _base_data(p, alpha)
    inv_beta = _scalar_inverse(beta)
    phi = _const_poly(alpha)
    for step in range(1, k):
        order = step + 1
        residue = _horner_at(p, phi, order)
        phi = (phi - residue * inv_beta).trunc(["T"], order)
    return ApproxRoot(phi=phi, order=k, base=alpha, deriv_at_base=beta)


def newton_lift_quadratic(
    p: MultiPoly, alpha: Scalarish, k: int, work_cap: Optional[int] = None
) -> Tuple[ApproxRoot, InverseWitness]:
    """Division-free lift: precision doubles each round.

    phi_{i+1} = phi_i − P(phi_i)·sigma_i and
    sigma_{i+1} = 2·sigma_i − sigma_i²·dP/dz(phi_{i+1}),
    everything truncated mod T^(2^(i+1)).

    work_cap, when given, bounds the estimated pair-product count of each
    doubling stage: the current phi/sigma monomial counts and the dense
    monomial bound of the next truncation order (both series are T-regular,
    so x-degree never exceeds T-degree) are multiplied out; a stage
    predicted past the budget raises CapExceeded before any of its work is
    done, so callers with a fallback route can hand over cheaply.  The
    estimate depends only on degrees and term counts, never on timing.
    """
    if k < 1:
        raise DegenerateInput("order must be at least 1")
    if "z" not in p.variables or p.degree_in("z") < 1:
        raise DegenerateInput("polynomial must involve z")
    alpha, beta = _base_data(p, alpha)
    nx = sum(1 for v in p.variables if v not in ("T", "z") and p.degree_in(v) > 0)
    fld = p.field()
    deg_h = fld.degree if fld is not None else 1
    dp = p.derivative("z")
    phi = _const_poly(alpha)
    sigma = _const_poly(_scalar_inverse(beta))
    stages: List[Tuple[MultiPoly, MultiPoly, int]] = [(phi, sigma, 1)]
    reach = 1
    while reach < k:
        target = 2 * reach
        if work_cap is not None:
            predicted = comb(target - 1 + nx, nx) * deg_h
            carried = len(phi.terms) + len(sigma.terms) + predicted
            if carried * predicted > work_cap:
                raise CapExceeded(
                    f"lift stage to order {target} predicts "
                    f"{carried}*{predicted} pair products over the cap"
                )
        residue = _horner_at(p, phi, target)
        phi = (phi - mul_trunc(residue, sigma, ["T"], target)).trunc(["T"], target)
        deriv = _horner_at(dp, phi, target)
        sigma = (
            sigma * 2 - mul_trunc(mul_trunc(sigma, sigma, ["T"], target), deriv, ["T"], target)
        ).trunc(["T"], target)
        reach = target
        stages.append((phi, sigma, reach))
    root = ApproxRoot(
        phi=phi.trunc(["T"], k), order=k, base=alpha, deriv_at_base=beta
    )
    return root, InverseWitness(sigma=sigma, stages=stages)


def check_approx_root(p: MultiPoly, phi: MultiPoly, k: int) -> bool:
    """Does phi satisfy P(T,x,phi) ≡ 0 mod T^k with a sound base point?

    Checks the congruence, the truncation deg_T(phi) < k, and that the
    non-degeneracy scalar at the base point is nonzero.
    """
    if phi.degree_in("T") >= k:
        return False
    alpha = phi.evaluate(
        {v: Fraction(0) for v in phi.variables if phi.degree_in(v) > 0}
    )
    p0 = _univariate_in_z(p)
    if _eval_univariate(p0, alpha) != 0:
        return False
    if _eval_univariate(p0.derivative("z"), alpha) == 0:
        return False
    return _horner_at(p, phi, k).trunc(["T"], k).is_zero()
