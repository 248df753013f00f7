"""Divisibility certificates and factorization verification.

``div_test`` turns monic divisibility over any characteristic-zero
coefficient ring into one exact polynomial identity, with no division:
Newton transforms convert both inputs to power sums of their roots, the
difference gives the power sums of the candidate quotient h-tilde, and
the residual f − h̃·g is the zero polynomial precisely when g divides f.

``irreducibility_certificate`` decides whether a monic, T-regularized,
squarefree polynomial splits over Q[T, x]: the roots of the base slice
P(0, 0, z) are grouped into conjugate classes (one number field per
irreducible base factor), each class is Newton-lifted to order
deg_T(P) + 1, the class products are recovered as rational truncated
polynomials through class-wise symmetric functions, and every proper
union of classes is tested for divisibility.  Any monic factor of P must
be such a union product, so a clean sweep certifies irreducibility.

``verify_factorization`` is the final acceptance gate for pipeline
output: an evaluation round-trip on a deterministic point set plus dense
divisibility spot checks, returning a plain boolean.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from ._unipoly import degree as _u_degree
from ._unipoly import deriv as _u_deriv
from ._unipoly import factor_rational, gcd_q
from .errors import (
    CapExceeded,
    DegenerateInput,
    DegreeOrder,
    HypothesisViolated,
    NotMonic,
)
from .lift import check_regularized, newton_lift_quadratic
from .polyring import (
    MultiPoly,
    esym_to_psym,
    lift_to_field,
    mul_trunc,
    psym_to_esym,
)
from .scalars import NumberField, NumberFieldElement

__all__ = [
    "CertificateVerdict",
    "DEFAULT_DZ_CAP",
    "div_test",
    "divides_monic",
    "irreducibility_certificate",
    "pseudo_quotient",
    "verify_factorization",
]

CoeffLike = Union[MultiPoly, Fraction, int]

DEFAULT_DZ_CAP = 8
_FULL_GRID_CAP = 4_000


# ---------- symmetric-function divisibility test ----------


def _as_ring(c: CoeffLike) -> MultiPoly:
    if isinstance(c, MultiPoly):
        return c
    return MultiPoly.constant(c, ())


def _is_one(c: MultiPoly) -> bool:
    return c.is_constant() and c.constant_value() == 1


def _validated(
    f_coeffs: Sequence[CoeffLike], g_coeffs: Sequence[CoeffLike], var: str
) -> Tuple[List[MultiPoly], List[MultiPoly]]:
    f = [_as_ring(c) for c in f_coeffs]
    g = [_as_ring(c) for c in g_coeffs]
    if len(f) < 2 or len(g) < 2:
        raise DegenerateInput("dividend and divisor need degree at least 1")
    if len(g) - 1 > len(f) - 1:
        raise DegreeOrder(
            f"divisor degree {len(g) - 1} exceeds dividend degree {len(f) - 1}"
        )
    if not _is_one(f[-1]):
        raise NotMonic("dividend is not monic")
    if not _is_one(g[-1]):
        raise NotMonic("divisor is not monic")
    for c in itertools.chain(f, g):
        if var in c.variables and c.degree_in(var) > 0:
            raise DegenerateInput(f"coefficients must not involve {var!r}")
    return f, g


def pseudo_quotient(
    f_coeffs: Sequence[CoeffLike],
    g_coeffs: Sequence[CoeffLike],
    var: str = "z",
) -> List[MultiPoly]:
    """Monic candidate quotient h̃ of degree D−t, low-order first.

    Built purely from the power-sum difference of the two root multisets;
    equals the exact quotient whenever the divisor divides the dividend.
    """
    f, g = _validated(f_coeffs, g_coeffs, var)
    deg_f = len(f) - 1
    deg_g = len(g) - 1
    r = deg_f - deg_g
    one = MultiPoly.constant(1, ())
    if r == 0:
        return [one]
    ef = [f[deg_f - i] if i % 2 == 0 else -f[deg_f - i] for i in range(1, r + 1)]
    eg = [
        (g[deg_g - i] if i % 2 == 0 else -g[deg_g - i]) if i <= deg_g else _as_ring(0)
        for i in range(1, r + 1)
    ]
    pf = esym_to_psym(ef)
    pg = esym_to_psym(eg)
    ph = [a - b for a, b in zip(pf, pg)]
    eh = psym_to_esym(ph)
    h: List[MultiPoly] = [one] * (r + 1)
    for i in range(1, r + 1):
        h[r - i] = _as_ring(eh[i - 1]) if i % 2 == 0 else -_as_ring(eh[i - 1])
    return h


def _all_scalar(coeffs: Sequence[CoeffLike]) -> bool:
    for c in coeffs:
        if not isinstance(c, (int, Fraction)):
            return False
    return True


@lru_cache(maxsize=1 << 18)
def _cached_psums(esyms: Tuple, n: int) -> Tuple:
    """First n power sums of the root multiset with the given leading
    elementary symmetric functions (missing ones are zero)."""
    padded = list(esyms[:n]) + [0] * (n - len(esyms))
    return tuple(esym_to_psym(padded))


_FACT = [1]


def _factorial(n: int) -> int:
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


def _scalar_div_test(f: Sequence, g: Sequence, var: str) -> MultiPoly:
    """div_test on constant coefficients, bypassing the polynomial ring.

    Integer inputs run Newton's identities in the scaled form
    E_k = k!·e_k, which stays in Z throughout; the residual coefficients
    come out as exact fractions over r! and reduce to the same values
    the ring path produces.
    """
    deg_f = len(f) - 1
    deg_g = len(g) - 1
    if deg_f < 1 or deg_g < 1:
        raise DegenerateInput("dividend and divisor need degree at least 1")
    if deg_g > deg_f:
        raise DegreeOrder(f"divisor degree {deg_g} exceeds dividend degree {deg_f}")
    if f[deg_f] != 1:
        raise NotMonic("dividend is not monic")
    if g[deg_g] != 1:
        raise NotMonic("divisor is not monic")
    r = deg_f - deg_g
    if r == 0:
        out0 = {}
        for i in range(deg_f + 1):
            d = f[i] - g[i]
            if d:
                out0[(i,)] = d
        return MultiPoly((var,), out0)
    ef = tuple(f[deg_f - i] if i % 2 == 0 else -f[deg_f - i] for i in range(1, r + 1))
    eg = tuple(
        g[deg_g - i] if i % 2 == 0 else -g[deg_g - i]
        for i in range(1, min(r, deg_g) + 1)
    )
    ph = [a - b for a, b in zip(_cached_psums(ef, r), _cached_psums(eg, r))]
    out = {}
    if all(type(p) is int for p in ph) and all(type(c) is int for c in g):
        ee = [1]
        for k in range(1, r + 1):
            acc = 0
            c = 1
            for i in range(1, k + 1):
                term = c * ee[k - i] * ph[i - 1]
                acc = acc + term if i & 1 else acc - term
                c *= k - i
            ee.append(acc)
        den = _factorial(r)
        hs = [0] * (r + 1)
        hs[r] = den
        for i in range(1, r + 1):
            v = ee[i] * (den // _FACT[i])
            hs[r - i] = v if i % 2 == 0 else -v
        prod = [0] * (deg_f + 1)
        for i, a in enumerate(hs):
            if a:
                for j, b in enumerate(g):
                    prod[i + j] += a * b
        for i in range(deg_f + 1):
            d = den * f[i] - prod[i]
            if d:
                out[(i,)] = Fraction(d, den)
        return MultiPoly((var,), out)
    eh = psym_to_esym(ph)
    h: List = [1] * (r + 1)
    for i in range(1, r + 1):
        h[r - i] = eh[i - 1] if i % 2 == 0 else -eh[i - 1]
    prod = [0] * (deg_f + 1)
    for i, a in enumerate(h):
        if a:
            for j, b in enumerate(g):
                prod[i + j] += a * b
    for i in range(deg_f + 1):
        d = f[i] - prod[i]
        if d:
            out[(i,)] = d
    return MultiPoly((var,), out)


def div_test(
    f_coeffs: Sequence[CoeffLike],
    g_coeffs: Sequence[CoeffLike],
    var: str = "z",
) -> MultiPoly:
    """Residual f − h̃·g; the zero polynomial exactly when g divides f.

    Inputs are full low-order-first coefficient lists of monic
    polynomials of degrees D ≥ t ≥ 1 over a characteristic-zero ring.
    Constant coefficient lists are dispatched to a scalar evaluator with
    cached power sums; the result is identical to the ring path.
    """
    if _all_scalar(f_coeffs) and _all_scalar(g_coeffs):
        return _scalar_div_test(f_coeffs, g_coeffs, var)
    f, g = _validated(f_coeffs, g_coeffs, var)
    h = pseudo_quotient(f, g, var)
    prod: List[MultiPoly] = [_as_ring(0)] * (len(h) + len(g) - 1)
    for i, a in enumerate(h):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            prod[i + j] = prod[i + j] + a * b
    out = MultiPoly.zero((var,))
    for i, c in enumerate(f):
        diff = c - prod[i]
        if not diff.is_zero():
            out = out + diff * MultiPoly.monomial((var,), (i,))
    return out


def divides_monic(q: MultiPoly, p: MultiPoly, var: str = "z") -> bool:
    """Exact divisibility of monic-in-var q into monic-in-var p."""
    qc = q.coeffs_in(var)
    pc = p.coeffs_in(var)
    if not qc or not _is_one(qc[-1]):
        raise NotMonic(f"candidate divisor is not monic in {var}")
    if not pc or not _is_one(pc[-1]):
        raise NotMonic(f"dividend is not monic in {var}")
    if len(qc) > len(pc):
        return False
    if len(qc) == 1:
        return True
    return div_test(pc, qc, var).is_zero()


# ---------- subset irreducibility certificate ----------


@dataclass(frozen=True)
class CertificateVerdict:
    """Outcome of the class-union divisibility sweep.

    status is "irreducible", "reducible", or "infeasible".  For a
    reducible verdict the witness fields carry the first (lexicographic)
    proper class union whose product divides the input, and the product
    itself as an exact polynomial factor.
    """

    status: str
    class_count: int = 0
    witness_classes: Optional[Tuple[int, ...]] = None
    witness_factor: Optional[MultiPoly] = None
    reason: str = ""


def _trace_to_rational(p: MultiPoly, traces: Sequence[Fraction]) -> MultiPoly:
    """Apply the field trace to every coefficient of p."""
    terms = {}
    for e, c in p.terms.items():
        if isinstance(c, NumberFieldElement):
            val = Fraction(0)
            for j, cj in enumerate(c.coeffs):
                if cj:
                    val += Fraction(cj) * traces[j]
        else:
            val = Fraction(c) * traces[0]
        if val:
            terms[e] = val
    return MultiPoly(p.variables, terms)


def _class_product(p: MultiPoly, h: List[Fraction], k: int) -> MultiPoly:
    """Truncated product of (z − root) over the conjugate class of h.

    h is a monic irreducible factor of the base slice; its root lifts to
    a truncated series root of p, and the class product is recovered from
    the coefficientwise traces of the root powers (rational by symmetry).
    """
    d = _u_degree(h)
    zmon = MultiPoly.monomial(("z",), (1,))
    if d == 1:
        alpha = -h[0]
        root, _ = newton_lift_quadratic(p, alpha, k)
        return zmon - root.phi
    field = NumberField(h)
    plift = lift_to_field(p, field)
    root, _ = newton_lift_quadratic(plift, field.gen(), k)
    phi = root.phi
    traces = field.trace_powers(d - 1)
    psums: List[MultiPoly] = []
    power = phi
    for _ in range(d):
        psums.append(_trace_to_rational(power, traces))
        power = mul_trunc(power, phi, ["T"], k)
    esyms = psym_to_esym(psums)
    out = MultiPoly.monomial(("z",), (d,))
    for i in range(1, d + 1):
        coeff = _as_ring(esyms[i - 1]).trunc(["T"], k)
        if i % 2 == 1:
            coeff = -coeff
        if not coeff.is_zero():
            out = out + coeff * MultiPoly.monomial(("z",), (d - i,))
    return out


def irreducibility_certificate(
    p: MultiPoly,
    epsilon: Fraction = Fraction(1, 3),
    dz_cap: int = DEFAULT_DZ_CAP,
) -> CertificateVerdict:
    """Decide irreducibility of a monic, T-regularized, squarefree input.

    Any monic factor restricts, at T = 0 and x = 0, to a product over a
    subset of the base roots with rational coefficients, so it must be a
    union of full conjugate classes; the sweep lifts each class to order
    deg_T(p) + 1 and tests every proper nonempty union for divisibility.
    epsilon is accepted for interface parity with the pipeline; the dense
    certificate itself has no randomness or design parameters to tune.
    """
    if not (0 < epsilon < 1):
        raise DegenerateInput("epsilon must lie in (0, 1)")
    if "z" not in p.variables or p.degree_in("z") < 1:
        raise DegenerateInput("input must have positive degree in z")
    dz = p.degree_in("z")
    lead = p.coeffs_in("z")[-1]
    if not _is_one(lead):
        raise NotMonic("input is not monic in z")
    if not check_regularized(p):
        raise HypothesisViolated("input is not T-regularized")
    if dz > dz_cap:
        return CertificateVerdict(
            "infeasible",
            reason=f"z-degree {dz} exceeds the certificate cap {dz_cap}",
        )
    base_point = {v: Fraction(0) for v in p.variables if v != "z"}
    proj = p.substitute(base_point)
    base = [c.constant_value() for c in proj.coeffs_in("z")]
    if _u_degree(gcd_q(base, _u_deriv(base))) > 0:
        raise HypothesisViolated("base slice P(0, 0, z) is not squarefree")
    _, parts = factor_rational(base)
    classes = [coeffs for coeffs, _ in parts]
    nclasses = len(classes)
    if nclasses == 1:
        return CertificateVerdict("irreducible", class_count=1)
    k = p.degree_in("T") + 1 if "T" in p.variables else 1
    products = [_class_product(p, h, k) for h in classes]
    for size in range(1, nclasses):
        for subset in itertools.combinations(range(nclasses), size):
            q = products[subset[0]]
            for idx in subset[1:]:
                q = mul_trunc(q, products[idx], ["T"], k)
            if divides_monic(q, p, "z"):
                return CertificateVerdict(
                    "reducible",
                    class_count=nclasses,
                    witness_classes=subset,
                    witness_factor=q,
                )
    return CertificateVerdict("irreducible", class_count=nclasses)


# ---------- end-to-end factorization verification ----------


def verify_factorization(circuit, result) -> bool:
    """Boolean gate: does unit · Π factor^mult reproduce the circuit?

    Checks the identity on a deterministic point set larger than the
    degree bound (the full small grid when affordable), then recomposes
    the factor densifications exactly and compares against the dense
    expansion of the input when densification is feasible.  Never raises.
    """
    try:
        from .circuit_ir import (
            degree_bound,
            dense_from_circuit,
            deterministic_points,
            eval_circuit,
        )

        variables = circuit.variables()
        total = degree_bound(circuit).total
        side = total + 1
        if variables and side ** len(variables) <= _FULL_GRID_CAP:
            points = [
                dict(zip(variables, (Fraction(v) for v in tup)))
                for tup in itertools.product(range(side), repeat=len(variables))
            ]
        elif variables:
            points = deterministic_points(list(variables), max(200, side))
        else:
            points = [{}]
        unit = Fraction(result.unit)
        for point in points:
            lhs = eval_circuit(circuit, point)
            rhs = unit
            for entry in result.factors:
                sub = {v: point[v] for v in entry.circuit.variables()}
                rhs *= eval_circuit(entry.circuit, sub) ** entry.multiplicity
            if lhs != rhs:
                return False
        try:
            dense = dense_from_circuit(circuit)
        except CapExceeded:
            return True
        if dense.is_zero() or dense.is_constant():
            return not result.factors
        recon = MultiPoly.constant(unit, ())
        for entry in result.factors:
            fd = entry.dense
            if fd is None:
                try:
                    fd = dense_from_circuit(entry.circuit)
                except CapExceeded:
                    return True
            if fd.is_constant():
                return False
            recon = recon * fd ** entry.multiplicity
        return recon == dense
    except Exception:
        return False
