"""Deterministic factorization of polynomial circuits over Q.

The pipeline: squarefree split (dense Yun), a monic shift in a fresh
variable z, a T-regularization so every original variable is carried by
T, a variable-count reduction through the combinatorial-design
substitution, dense factorization of the reduced polynomial, Newton
lifting of a base root of each reduced factor, and reconstruction of
the matching true factor as the minimal z-polynomial of the lifted
root.  Every candidate factor is verified by exact division and an
exact product identity before it is reported; failed attempts escalate
through alternate hard families, a larger field size, and finally a
direct dense factorization of the regularized polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import _unipoly
from .circuit_ir import (
    DEFAULT_MONOMIAL_CAP,
    Circuit,
    CircuitBuilder,
    coefficient_circuits,
    dense_from_circuit,
    determinant_circuit,
    eval_circuit,
    poly_to_circuit,
    substitute_circuit,
)
from .errors import (
    CapExceeded,
    DegenerateInput,
    DegenerateRoot,
    FallbackExhausted,
    HypothesisViolated,
    InexactDivision,
    NotARoot,
    NotMonic,
    SingularSystem,
    VerificationFailed,
    ZeroDeterminantOnGrid,
    ZeroDivisorAtPoint,
)
from .kigen import KiMap, build_ki_map, family_sequence
from .lift import ApproxRoot, newton_lift_quadratic
from .polyring import (
    MultiPoly,
    bareiss_determinant,
    divides_exactly,
    exact_div,
    interpolate_on_lattice,
    lift_to_field,
    mul_trunc,
    nf_coeff_decompose,
    principal_lattice,
    squarefree_decompose,
    var_sort_key,
)
from .scalars import NumberField

__all__ = [
    "FALLBACK_LOG",
    "FactorEntry",
    "FactorizationResult",
    "MinPolySystem",
    "Preprocessing",
    "dense_multivariate_factor",
    "factor_all",
    "factor_squarefree",
    "minimal_poly_from_root",
    "preprocess",
    "squarefree_parts_circuits",
    "univariate_factor_Q",
]

SEARCH_BUDGET = 200_000
_LATTICE_SHIFTS = 6
_DISC_CIRCUIT_DIM_CAP = 24

# Pair-product budget for each Newton doubling stage inside the reduction
# pipeline.  A root whose truncation is predicted past the budget raises
# CapExceeded, which the escalation chain turns into another family attempt
# and ultimately the logged dense fallback.
LIFT_WORK_CAP = 2_000_000


class _FamilyIndependentCap(CapExceeded):
    """A cap refusal whose size estimate does not depend on the hard family
    (the lift runs in the original variables), so retrying other families
    cannot help and the escalation jumps straight to the dense fallback."""

# Each entry: {"stage": "family" | "densify", "detail": {...}}.  The densify
# entries count uses of the final dense fallback; tests and the CLI read this.
FALLBACK_LOG: List[dict] = []


def _log_fallback(stage: str, detail: dict) -> None:
    FALLBACK_LOG.append({"stage": stage, "detail": detail})


_PIPELINE_ERRORS = (
    SingularSystem,
    ZeroDeterminantOnGrid,
    VerificationFailed,
    InexactDivision,
    NotARoot,
    DegenerateRoot,
    HypothesisViolated,
    CapExceeded,
    FallbackExhausted,
    NotMonic,
    ZeroDivisorAtPoint,
)


# ---------- small helpers ----------


def _poly_from_list(var: str, coeffs: Sequence[Fraction]) -> MultiPoly:
    return MultiPoly.from_coeffs_in(var, [MultiPoly.constant(c, ()) for c in coeffs])


def _poly_key(p: MultiPoly) -> Tuple[int, str]:
    return (p.total_degree(), p.drop_vars().to_text())


def _var_circuit(name: str) -> Circuit:
    b = CircuitBuilder()
    return b.build([b.inp(name)])


def _numeric_det(matrix: List[List[Fraction]]) -> Fraction:
    n = len(matrix)
    a = [row[:] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _numeric_resultant(p: List[Fraction], q: List[Fraction]) -> Fraction:
    dp, dq = len(p) - 1, len(q) - 1
    n = dp + dq
    rows: List[List[Fraction]] = []
    for i in range(dq):
        row = [Fraction(0)] * n
        for j, c in enumerate(reversed(p)):
            row[i + j] = c
        rows.append(row)
    for i in range(dp):
        row = [Fraction(0)] * n
        for j, c in enumerate(reversed(q)):
            row[i + j] = c
        rows.append(row)
    return _numeric_det(rows)


def _solve_linear(a: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    n = len(a)
    m = [row[:] + [rhs[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _value_search(
    value_at: Callable[[Dict[str, Fraction]], Fraction],
    variables: Sequence[str],
    degree_hint: int,
    km: Optional[KiMap],
) -> Tuple[Fraction, ...]:
    """First point (lex order) where value_at is nonzero.

    The reduced grid over the design variables is scanned first, mapping
    each candidate through the substitution images; the direct grid over
    the original variables is the fallback.
    """
    if km is not None:
        wnames = km.w_variables()
        side = max(2, degree_hint * max(1, km.degree) + 1)
        budget = SEARCH_BUDGET
        for wpt in itertools.product(range(side), repeat=len(wnames)):
            if budget <= 0:
                break
            budget -= 1
            wd = {w: Fraction(v) for w, v in zip(wnames, wpt)}
            cand = km.evaluate_images(wd)
            if value_at(cand) != 0:
                return tuple(cand[v] for v in variables)
    side = max(2, degree_hint + 1)
    budget = SEARCH_BUDGET
    for pt in itertools.product(range(side), repeat=len(variables)):
        if budget <= 0:
            break
        budget -= 1
        cand = {v: Fraction(c) for v, c in zip(variables, pt)}
        if value_at(cand) != 0:
            return tuple(cand[v] for v in variables)
    raise FallbackExhausted("no nonzero point found within the search budget")


# ---------- univariate factorization over Q ----------


def univariate_factor_Q(p: MultiPoly) -> Tuple[Fraction, List[Tuple[MultiPoly, int]]]:
    """Factor a univariate rational polynomial into monic irreducibles.

    Returns (unit, [(factor, multiplicity), ...]) with
    p == unit * prod factor^multiplicity and factors sorted by degree
    then text.
    """
    live = [v for v in p.variables if p.degree_in(v) > 0]
    if len(live) != 1:
        raise DegenerateInput("univariate factorization needs exactly one live variable")
    v = live[0]
    coeffs = [Fraction(c.constant_value()) for c in p.coeffs_in(v)]
    unit, raw = _unipoly.factor_rational(coeffs)
    out = [(_poly_from_list(v, lst), m) for lst, m in raw]
    out.sort(key=lambda fm: _poly_key(fm[0]))
    return unit, out


def _inverse_mod(a: List[Fraction], h: List[Fraction]) -> List[Fraction]:
    """Inverse of a modulo h over Q[y] via the extended Euclidean scheme."""
    r0, r1 = _unipoly.trim(list(h)), _unipoly.poly_divmod(a, h)[1]
    s0, s1 = [], [Fraction(1)]
    while _unipoly.degree(r1) > 0:
        q, r = _unipoly.poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _unipoly.sub(s0, _unipoly.mul(q, s1))
    if not r1:
        raise SingularSystem("element is not invertible modulo the factor")
    inv = _unipoly.scale(s1, Fraction(1) / r1[0])
    return _unipoly.poly_divmod(inv, h)[1]


# ---------- dense multivariate factorization ----------


def dense_multivariate_factor(p: MultiPoly, var: str = "z") -> List[MultiPoly]:
    """Factor a squarefree polynomial that is monic in var.

    Requires the base projection (all other variables at 0) to be
    squarefree; lifts its rational factorization degreewise in the
    remaining variables and recombines minimal subsets by exact
    division.  Returns monic irreducible factors in canonical order.
    """
    if p.is_zero() or p.is_constant():
        raise DegenerateInput("nothing to factor")
    if p.degree_in(var) < 1:
        raise DegenerateInput(f"input does not involve {var}")
    lead = p.coeffs_in(var)[-1]
    if not lead.is_constant() or lead.constant_value() != 1:
        raise NotMonic(f"input must be monic in {var}")
    aux = tuple(v for v in p.variables if v != var and p.degree_in(v) > 0)
    proj = p.substitute({v: Fraction(0) for v in aux}) if aux else p
    pcoeffs = [Fraction(c.constant_value()) for c in proj.coeffs_in(var)]
    g = _unipoly.gcd_q(pcoeffs, _unipoly.deriv(pcoeffs))
    if _unipoly.degree(g) > 0:
        raise HypothesisViolated("base projection is not squarefree")
    _, ufacs = _unipoly.factor_rational(pcoeffs)
    hs = sorted((tuple(f) for f, _ in ufacs), key=lambda f: (len(f), f))
    if not aux:
        return sorted((_poly_from_list(var, list(h)) for h in hs), key=_poly_key)
    if len(hs) == 1:
        return [p]

    sigmas = [_inverse_mod(_unipoly.exact_quot(pcoeffs, list(h)), list(h)) for h in hs]
    space = tuple(sorted(set(aux) | {var}, key=var_sort_key))
    ypos = space.index(var)
    auxpos = [space.index(v) for v in aux]
    lifted = [_poly_from_list(var, list(h)) for h in hs]
    m = p.total_degree() + 1

    for s in range(1, m):
        prod = lifted[0]
        for h in lifted[1:]:
            prod = mul_trunc(prod, h, aux, s + 1)
        es = (p.trunc(aux, s + 1) - prod).hom_component(aux, s)
        if es.is_zero():
            continue
        groups: Dict[Tuple[int, ...], List[Fraction]] = {}
        vpos = {v: i for i, v in enumerate(es.variables)}
        for e, c in es.terms.items():
            akey = tuple(e[vpos[v]] if v in vpos else 0 for v in aux)
            yexp = e[vpos[var]] if var in vpos else 0
            lst = groups.setdefault(akey, [])
            while len(lst) <= yexp:
                lst.append(Fraction(0))
            lst[yexp] += Fraction(c)
        for idx, (h, sig) in enumerate(zip(hs, sigmas)):
            inc: Dict[Tuple[int, ...], Fraction] = {}
            for akey, elist in groups.items():
                delta = _unipoly.poly_divmod(_unipoly.mul(elist, sig), list(h))[1]
                for yexp, cc in enumerate(delta):
                    if cc:
                        full = [0] * len(space)
                        for pos, av in zip(auxpos, akey):
                            full[pos] = av
                        full[ypos] = yexp
                        inc[tuple(full)] = cc
            if inc:
                lifted[idx] = lifted[idx] + MultiPoly(space, inc)

    pool = list(range(len(hs)))
    out: List[MultiPoly] = []
    remaining = p
    tried = 0
    size = 1
    while pool:
        if size > len(pool):
            raise VerificationFailed("dense recombination did not terminate")
        progressed = False
        for combo in itertools.combinations(pool, size):
            tried += 1
            if tried > _unipoly.RECOMBINATION_CAP:
                raise CapExceeded("recombination subsets exceeded the cap")
            cand = lifted[combo[0]]
            for i in combo[1:]:
                cand = mul_trunc(cand, lifted[i], aux, m)
            if divides_exactly(remaining, cand):
                out.append(cand)
                remaining = exact_div(remaining, cand)
                pool = [i for i in pool if i not in combo]
                progressed = True
                break
        if not progressed:
            size += 1
    if not (remaining.is_constant() and remaining.constant_value() == 1):
        raise VerificationFailed("dense recombination left a nonunit remainder")
    return sorted(out, key=_poly_key)


# ---------- preprocessing: monic shift and T-regularization ----------


@dataclass(frozen=True)
class Preprocessing:
    """Record of the monic shift and T-regularization.

    a is the direction with top-form value delta != 0; b is the point
    where the z-discriminant of the shifted polynomial is disc_value != 0.
    regularized_dense caches the dense form of the returned circuit.
    """

    variables: Tuple[str, ...]
    a: Tuple[Fraction, ...]
    delta: Fraction
    b: Tuple[Fraction, ...]
    degree: int
    disc_value: Fraction
    regularized_dense: MultiPoly


def _reserved_name(v: str) -> bool:
    if v in ("T", "z", "u"):
        return True
    return v.startswith("w") and v[1:].isdigit()


def preprocess(
    circuit: Circuit,
    epsilon: Fraction = Fraction(1, 3),
    family: Optional[str] = None,
    monomial_cap: int = DEFAULT_MONOMIAL_CAP,
) -> Tuple[Circuit, Preprocessing]:
    """Shift to a z-monic form and scale every variable by T.

    Returns a circuit computing P~(T, x, z) = P((x + b) scaled ...) that
    is monic of degree D in z, has an x-free base slice at T = 0, and a
    nonzero z-discriminant there, together with the search record.
    """
    variables = tuple(sorted(circuit.variables(), key=var_sort_key))
    if not variables:
        raise DegenerateInput("preprocessing needs at least one variable")
    for v in variables:
        if _reserved_name(v):
            raise DegenerateInput(f"variable name {v!r} is reserved by the pipeline")
    dense = dense_from_circuit(circuit, monomial_cap)
    if dense.is_zero():
        raise DegenerateInput("cannot preprocess the zero polynomial")
    deg = dense.total_degree()
    if deg == 0:
        raise DegenerateInput("cannot preprocess a constant")
    hom = dense.hom_component(variables, deg)
    km = build_ki_map(variables, epsilon, family or family_sequence()[0])

    a = _value_search(lambda pt: hom.evaluate(pt), variables, deg, km)
    delta = Fraction(hom.evaluate(dict(zip(variables, a))))

    z = MultiPoly.variable("z")
    phat = dense.substitute(
        {v: MultiPoly.variable(v) + z * av for v, av in zip(variables, a)}
    ) / delta
    zc = phat.coeffs_in("z")
    if len(zc) != deg + 1 or not (zc[-1].is_constant() and zc[-1].constant_value() == 1):
        raise VerificationFailed("monic shift failed its internal check")
    qz = [c * (i + 1) for i, c in enumerate(zc[1:])]

    def disc_at(pt: Dict[str, Fraction]) -> Fraction:
        prow = [Fraction(c.evaluate(pt)) for c in zc]
        qrow = [Fraction(c.evaluate(pt)) for c in qz]
        return _numeric_resultant(prow, qrow)

    coeff_deg = max(c.total_degree() for c in zc)
    disc_deg = max(1, (2 * deg - 1) * max(1, coeff_deg))
    b = _value_search(disc_at, variables, disc_deg, km)
    disc_value = disc_at(dict(zip(variables, b)))

    # circuit realization of the shift, scaling, and regularization
    images_shift: Dict[str, Circuit] = {}
    for v, av in zip(variables, a):
        bb = CircuitBuilder()
        if av == 0:
            continue
        images_shift[v] = bb.build([bb.add([bb.inp(v), bb.mul([bb.const(av), bb.inp("z")])])])
    shifted = substitute_circuit(circuit, images_shift) if images_shift else circuit
    bb = CircuitBuilder()
    phat_circ = bb.build([bb.mul([bb.const(Fraction(1) / delta), bb.splice(shifted)[0]])])

    if 2 * deg - 1 <= _DISC_CIRCUIT_DIM_CAP:
        _disc_circuit_check(phat_circ, deg, dict(zip(variables, b)), disc_value)

    images_reg: Dict[str, Circuit] = {}
    for v, bv in zip(variables, b):
        bb = CircuitBuilder()
        prod = bb.mul([bb.inp("T"), bb.inp(v)])
        out = bb.add([prod, bb.const(bv)]) if bv != 0 else prod
        images_reg[v] = bb.build([out])
    ptilde_circ = substitute_circuit(phat_circ, images_reg)
    regularized = phat.substitute(
        {v: MultiPoly.variable(v) * MultiPoly.variable("T") + bv for v, bv in zip(variables, b)}
    )
    record = Preprocessing(
        variables=variables,
        a=tuple(a),
        delta=delta,
        b=tuple(b),
        degree=deg,
        disc_value=disc_value,
        regularized_dense=regularized,
    )
    return ptilde_circ, record


def _disc_circuit_check(phat_circ: Circuit, deg: int, point: Dict[str, Fraction], expected: Fraction) -> None:
    """Re-derive the discriminant value from a determinant circuit over the
    z-coefficient circuits; mismatches indicate an internal fault."""
    pcs = coefficient_circuits(phat_circ, "z", deg)
    qcs = []
    for i, c in enumerate(pcs[1:]):
        bb = CircuitBuilder()
        qcs.append(bb.build([bb.mul([bb.const(Fraction(i + 1)), bb.splice(c)[0]])]))
    zero = _const_circuit(Fraction(0))
    n = 2 * deg - 1
    mat: List[List[Circuit]] = []
    prow = list(reversed(pcs))
    qrow = list(reversed(qcs))
    for i in range(deg - 1):
        mat.append([zero] * i + prow + [zero] * (n - i - len(prow)))
    for i in range(deg):
        mat.append([zero] * i + qrow + [zero] * (n - i - len(qrow)))
    disc_circ = determinant_circuit(mat)
    got = eval_circuit(disc_circ, {v: point.get(v, Fraction(0)) for v in disc_circ.variables()})
    if got != expected:
        raise VerificationFailed("determinant circuit disagrees with the discriminant value")


def _const_circuit(value: Fraction) -> Circuit:
    b = CircuitBuilder()
    return b.build([b.const(value)])


# ---------- squarefree split as circuits ----------


def squarefree_parts_circuits(
    circuit: Circuit, monomial_cap: int = DEFAULT_MONOMIAL_CAP
) -> Tuple[Fraction, List[Tuple[Circuit, int]]]:
    """Yun split of the circuit's polynomial; one circuit per part with its
    multiplicity, plus the scalar unit."""
    dense = dense_from_circuit(circuit, monomial_cap)
    if dense.is_zero():
        raise DegenerateInput("zero polynomial has no squarefree split")
    unit, parts = squarefree_decompose(dense)
    return Fraction(unit), [(poly_to_circuit(p), m) for p, m in parts]


# ---------- minimal polynomial of an approximate root ----------


@dataclass(frozen=True)
class MinPolySystem:
    """Solved linear system for the factor annihilating a lifted root."""

    pathway: str
    unknowns: int
    rows: int
    dense: MultiPoly
    circuit: Circuit
    gamma: Optional[Tuple[Fraction, ...]] = None


def minimal_poly_from_root(
    root: ApproxRoot,
    deg_T: int,
    deg_z: int,
    ki: Optional[KiMap] = None,
    pathway: str = "interp",
) -> MinPolySystem:
    """Reconstruct the monic z-polynomial of degree deg_z, with T-degree at
    most deg_T, annihilating the lifted root modulo T^(2*deg_T*deg_z + 1).

    Pathways: "symbolic" solves the normal equations by fraction-free
    determinants over Q[x]; "circuit" realizes the determinants as
    division-free circuits and removes the shared denominator by the
    geometric-series transform around a nonzero point of the system
    determinant; "interp" solves numerically on a principal lattice and
    interpolates each coefficient.  All pathways verify the residual of
    the full system and raise SingularSystem when it is nonzero.
    """
    if pathway not in ("symbolic", "circuit", "interp"):
        raise DegenerateInput(f"unknown pathway {pathway!r}")
    if deg_T < 0 or deg_z < 1:
        raise DegenerateInput("need deg_T >= 0 and deg_z >= 1")
    k = 2 * deg_T * deg_z + 1
    if root.order < k:
        raise DegenerateInput(
            f"approximate root order {root.order} is below the required {k}"
        )
    phi = root.phi
    fld = phi.field()
    deg_h = fld.degree if fld is not None else 1
    xvars = tuple(
        v for v in sorted(phi.variables, key=var_sort_key)
        if v not in ("T", "z") and phi.degree_in(v) > 0
    )

    pows = [MultiPoly.constant(1, phi.variables)]
    for _ in range(deg_z):
        pows.append(mul_trunc(pows[-1], phi, ["T"], k))

    def ucomps(q: MultiPoly) -> List[MultiPoly]:
        if deg_h == 1:
            return [q]
        if q.field() is None:
            return [q] + [MultiPoly.zero(q.variables)] * (deg_h - 1)
        return list(nf_coeff_decompose(q))

    tab: List[List[List[MultiPoly]]] = []
    zero = MultiPoly.zero(())
    for i in range(deg_z + 1):
        per_r = []
        for comp in ucomps(pows[i]):
            tc = comp.coeffs_in("T")
            per_r.append([tc[mm] if mm < len(tc) else zero for mm in range(k)])
        tab.append(per_r)

    cols = [(i, j) for i in range(deg_z) for j in range(deg_T + 1)]
    n_unknowns = len(cols)
    rows_data: List[Tuple[List[MultiPoly], MultiPoly]] = []
    for l in range(k):
        for r in range(deg_h):
            entries = [tab[i][r][l - j] if l >= j else zero for (i, j) in cols]
            rhs = -tab[deg_z][r][l]
            if rhs.is_zero() and all(e.is_zero() for e in entries):
                continue
            rows_data.append((entries, rhs))
    if not rows_data:
        raise SingularSystem("the annihilator system is empty")

    def residual_ok(sol: List[MultiPoly]) -> bool:
        for entries, rhs in rows_data:
            acc = zero
            for e, s in zip(entries, sol):
                if not e.is_zero() and not s.is_zero():
                    acc = acc + e * s
            if acc != rhs:
                return False
        return True

    def assemble(sol: List[MultiPoly]) -> MultiPoly:
        out = MultiPoly.monomial(("z",), (deg_z,))
        for (i, j), s in zip(cols, sol):
            if not s.is_zero():
                out = out + s * MultiPoly.monomial(("T", "z"), (j, i))
        return out

    if pathway == "interp":
        nloc = len(xvars)
        lattice = principal_lattice(nloc, deg_T)
        for step in range(_LATTICE_SHIFTS):
            shift = tuple(step for _ in range(nloc))
            nodes = [tuple(e[i] + shift[i] for i in range(nloc)) for e in lattice]
            sols_at: Dict[Tuple[int, ...], List[Fraction]] = {}
            ok = True
            for node in nodes:
                ptd = {v: Fraction(c) for v, c in zip(xvars, node)}
                mnum = []
                rnum = []
                for entries, rhs in rows_data:
                    mnum.append(
                        [Fraction(e.evaluate(ptd)) if not e.is_zero() else Fraction(0) for e in entries]
                    )
                    rnum.append(Fraction(rhs.evaluate(ptd)) if not rhs.is_zero() else Fraction(0))
                a_num = [
                    [sum((mr[i] * mr[j] for mr in mnum), Fraction(0)) for j in range(n_unknowns)]
                    for i in range(n_unknowns)
                ]
                c_num = [sum((mr[i] * rv for mr, rv in zip(mnum, rnum)), Fraction(0)) for i in range(n_unknowns)]
                sol = _solve_linear(a_num, c_num)
                if sol is None:
                    ok = False
                    break
                sols_at[node] = sol
            if not ok:
                continue
            sol_polys: List[MultiPoly] = []
            for t, (i, j) in enumerate(cols):
                vals = {node: sols_at[node][t] for node in nodes}
                sol_polys.append(
                    interpolate_on_lattice(xvars, j, lambda pt: vals[pt], shift)
                )
            if residual_ok(sol_polys):
                dense = assemble(sol_polys)
                return MinPolySystem(
                    pathway, n_unknowns, len(rows_data), dense, poly_to_circuit(dense)
                )
        raise SingularSystem("no lattice shift produced a consistent reconstruction")

    # the symbolic and circuit pathways share the normal equations over Q[x]
    a_sym = [[zero for _ in range(n_unknowns)] for _ in range(n_unknowns)]
    c_sym = [zero for _ in range(n_unknowns)]
    for entries, rhs in rows_data:
        nz = [(t, e) for t, e in enumerate(entries) if not e.is_zero()]
        for ti, ei in nz:
            for tj, ej in nz:
                if tj >= ti:
                    a_sym[ti][tj] = a_sym[ti][tj] + ei * ej
            if not rhs.is_zero():
                c_sym[ti] = c_sym[ti] + ei * rhs
    for i in range(n_unknowns):
        for j in range(i):
            a_sym[i][j] = a_sym[j][i]

    if pathway == "symbolic":
        delta = bareiss_determinant([row[:] for row in a_sym])
        if delta.is_zero():
            raise SingularSystem("normal equations are singular")
        sol_polys = []
        for t in range(n_unknowns):
            at = [row[:] for row in a_sym]
            for rr in range(n_unknowns):
                at[rr][t] = c_sym[rr]
            try:
                sol_polys.append(exact_div(bareiss_determinant(at), delta))
            except InexactDivision as err:
                raise SingularSystem("solution coordinates are not polynomial") from err
        if not residual_ok(sol_polys):
            raise SingularSystem("solved system does not annihilate the root")
        dense = assemble(sol_polys)
        return MinPolySystem(
            pathway, n_unknowns, len(rows_data), dense, poly_to_circuit(dense)
        )

    # circuit pathway
    def det_at(ptd: Dict[str, Fraction]) -> Fraction:
        return _numeric_det([[Fraction(e.evaluate(ptd)) for e in row] for row in a_sym])

    max_entry = max((e.total_degree() for row in a_sym for e in row), default=0)
    hint = max(1, n_unknowns * max(1, max_entry))
    try:
        gamma = _value_search(det_at, xvars, hint, ki)
    except FallbackExhausted as err:
        raise ZeroDeterminantOnGrid(
            "system determinant vanished on the whole search grid"
        ) from err

    if n_unknowns > 64:
        raise CapExceeded("determinant circuits capped at dimension 64")

    # Every Cramer quotient is a polynomial of total degree at most deg_T in
    # the x-variables, so the whole construction is carried out on lists of
    # homogeneous components (degree 0..deg_T around gamma, None marking a
    # structural zero): the characteristic-polynomial determinant recursion,
    # the truncated geometric series that replaces division by the system
    # determinant, and the final numerator-times-inverse products all act
    # componentwise, which keeps the circuit polynomial-size instead of
    # expanding a full interpolation of each determinant.
    ncomp = deg_T + 1
    builder = CircuitBuilder()
    pointd = dict(zip(xvars, gamma))
    yids: Dict[str, int] = {}
    for v in xvars:
        vid = builder.inp(v)
        gv = pointd[v]
        yids[v] = builder.add([vid, builder.const(-gv)]) if gv else vid

    def lay_entry(e: MultiPoly) -> List[Optional[int]]:
        shift = {
            v: MultiPoly.monomial((v,), (1,)) + MultiPoly.constant(pointd[v], (v,))
            for v in e.variables
            if v in pointd and pointd[v]
        }
        shifted = e.substitute(shift) if shift else e
        out: List[Optional[int]] = []
        for d in range(ncomp):
            comp = shifted.hom_component(xvars, d)
            out.append(
                None if comp.is_zero() else builder.splice(poly_to_circuit(comp), yids)[0]
            )
        return out

    neg_one = builder.const(-1)

    def lay_neg(u: List[Optional[int]]) -> List[Optional[int]]:
        return [None if c is None else builder.mul([neg_one, c]) for c in u]

    def lay_sum(vals: List[List[Optional[int]]]) -> List[Optional[int]]:
        out: List[Optional[int]] = []
        for d in range(ncomp):
            parts = [u[d] for u in vals if u[d] is not None]
            out.append(builder.add(parts) if parts else None)
        return out

    def lay_mul(u: List[Optional[int]], v: List[Optional[int]]) -> List[Optional[int]]:
        out: List[Optional[int]] = []
        for d in range(ncomp):
            parts = [
                builder.mul([u[i], v[d - i]])
                for i in range(d + 1)
                if u[i] is not None and v[d - i] is not None
            ]
            out.append(builder.add(parts) if parts else None)
        return out

    def lay_dot(us: List[List[Optional[int]]], vs: List[List[Optional[int]]]) -> List[Optional[int]]:
        return lay_sum([lay_mul(x, y) for x, y in zip(us, vs)])

    lay_one: List[Optional[int]] = [builder.const(1)] + [None] * deg_T

    def lay_berkowitz(a: List[List[List[Optional[int]]]]) -> List[Optional[int]]:
        # the characteristic-polynomial recursion of determinant_circuit,
        # run over component lists instead of single nodes
        nn = len(a)
        p = [lay_one, lay_neg(a[0][0])]
        for r in range(2, nn + 1):
            row = [a[r - 1][j] for j in range(r - 1)]
            col = [a[i][r - 1] for i in range(r - 1)]
            seq = [lay_one, lay_neg(a[r - 1][r - 1])]
            s = col
            for _ in range(r - 1):
                seq.append(lay_neg(lay_dot(row, s)))
                if len(seq) < r + 1:
                    s = [lay_dot(a[i][: r - 1], s) for i in range(r - 1)]
            seq = seq[: r + 1]
            p = [
                lay_sum(
                    [lay_mul(seq[i - j], p[j]) for j in range(max(0, i - r), min(i, r - 1) + 1)]
                )
                for i in range(r + 1)
            ]
        det = p[-1]
        return lay_neg(det) if nn % 2 == 1 else det

    a_lay = [[lay_entry(e) for e in row] for row in a_sym]
    c_lay = [lay_entry(e) for e in c_sym]
    delta_lay = lay_berkowitz(a_lay)
    delta0 = det_at(pointd)  # nonzero by the grid search above

    # 1/delta as a truncated geometric series around gamma: the constant
    # component of (1 - delta/delta0) vanishes there, so powers up to deg_T
    # are exact on every component we keep and no division gate is emitted
    btilde: List[Optional[int]] = [None] + [
        None if c is None else builder.mul([builder.const(Fraction(-1) / delta0), c])
        for c in delta_lay[1:]
    ]
    inv_lay = lay_one
    power = lay_one
    for _ in range(deg_T):
        power = lay_mul(power, btilde)
        inv_lay = lay_sum([inv_lay, power])
    scale = builder.const(Fraction(1) / delta0)
    inv_lay = [None if c is None else builder.mul([scale, c]) for c in inv_lay]

    tpow = [builder.const(1)]
    for _ in range(deg_T):
        tpow.append(builder.mul([tpow[-1], builder.inp("T")]))
    zpow = [builder.const(1)]
    for _ in range(deg_z):
        zpow.append(builder.mul([zpow[-1], builder.inp("z")]))
    parts = [zpow[deg_z]]
    for t, (i, j) in enumerate(cols):
        a_cramer = [
            [c_lay[rr] if cc == t else a_lay[rr][cc] for cc in range(n_unknowns)]
            for rr in range(n_unknowns)
        ]
        quot = lay_mul(lay_berkowitz(a_cramer), inv_lay)
        comps = [c for c in quot if c is not None]
        if not comps:
            continue
        qid = builder.add(comps)
        factors = [qid]
        if j:
            factors.append(tpow[j])
        if i:
            factors.append(zpow[i])
        parts.append(builder.mul(factors) if len(factors) > 1 else qid)
    circ = builder.build([builder.add(parts)])

    dense = dense_from_circuit(circ)
    zz = dense.coeffs_in("z")
    if len(zz) != deg_z + 1 or not (zz[-1].is_constant() and zz[-1].constant_value() == 1):
        raise SingularSystem("circuit reconstruction lost the monic pin")
    sol_polys = []
    for (i, j) in cols:
        ci = zz[i] if i < len(zz) else zero
        tj = ci.coeffs_in("T")
        sol_polys.append(tj[j] if j < len(tj) else zero)
    if not residual_ok(sol_polys):
        raise SingularSystem("circuit reconstruction does not annihilate the root")
    return MinPolySystem(pathway, n_unknowns, len(rows_data), dense, circ, tuple(gamma))


# ---------- the squarefree pipeline ----------


def _ki_attempt(ptilde: MultiPoly, km: KiMap, monomial_cap: int) -> List[MultiPoly]:
    """One reduction attempt: compose, densely factor, lift, reconstruct,
    and verify; raises a pipeline error when any step refuses."""
    comp = ptilde.substitute({v: km.images[v] for v in km.variables})
    if len(comp.terms) > monomial_cap:
        raise CapExceeded("composed polynomial exceeds the monomial cap")
    comp_factors = dense_multivariate_factor(comp, "z")
    if len(comp_factors) == 1:
        return [ptilde]
    cands: List[MultiPoly] = []
    for f in comp_factors:
        dz = f.degree_in("z")
        dt = f.degree_in("T")
        live = [v for v in f.variables if v != "z" and f.degree_in(v) > 0]
        proj = f.substitute({v: Fraction(0) for v in live}) if live else f
        coeffs = [Fraction(c.constant_value()) for c in proj.coeffs_in("z")]
        _, ufacs = _unipoly.factor_rational(coeffs)
        hs = sorted((tuple(h) for h, _ in ufacs), key=lambda h: (len(h), h))
        h = list(hs[0])
        k = 2 * dt * dz + 1
        if len(h) == 2:
            alpha: object = -h[0]
            plift = ptilde
        else:
            fld = NumberField(h)
            alpha = fld.gen()
            plift = lift_to_field(ptilde, fld)
        try:
            root, _ = newton_lift_quadratic(plift, alpha, k, work_cap=LIFT_WORK_CAP)
        except CapExceeded as err:
            raise _FamilyIndependentCap(str(err)) from err
        cands.append(minimal_poly_from_root(root, dt, dz, km, pathway="interp").dense)
    uniq: List[MultiPoly] = []
    for cand in cands:
        if all(cand != seen for seen in uniq):
            uniq.append(cand)
    prod = MultiPoly.constant(1, ())
    for cand in uniq:
        if not divides_exactly(ptilde, cand):
            raise VerificationFailed("reconstructed candidate does not divide")
        prod = prod * cand
    if prod != ptilde:
        raise VerificationFailed("reconstructed factors do not multiply back")
    return uniq


def factor_squarefree(
    circuit: Circuit,
    epsilon: Fraction = Fraction(1, 3),
    family: Optional[str] = None,
    fallback: str = "auto",
    monomial_cap: int = DEFAULT_MONOMIAL_CAP,
) -> List[Circuit]:
    """Factor a squarefree circuit polynomial into monic irreducibles.

    Escalation order on any verification refusal: each hard family in
    sequence, then a larger field size, then (with fallback="auto") a
    direct dense factorization of the regularized polynomial.
    """
    orig = tuple(sorted(circuit.variables(), key=var_sort_key))
    if not orig:
        raise DegenerateInput("constant circuit has no factors")
    names = tuple(f"x{i + 1}" for i in range(len(orig)))
    if orig != names:
        renamed = substitute_circuit(
            circuit, {o: _var_circuit(n) for o, n in zip(orig, names) if o != n}
        )
    else:
        renamed = circuit

    _, prep = preprocess(renamed, epsilon, family, monomial_cap)
    ptilde = prep.regularized_dense
    deg = prep.degree
    if deg == 1:
        dense = dense_from_circuit(renamed, monomial_cap)
        return [_finish_factor(dense.monic_normalized()[1], names, orig)]

    fams = family_sequence(family)
    base_sigma = build_ki_map(list(names), epsilon, fams[0]).design.sigma
    attempts = [(f, 0) for f in fams] + [(fams[0], base_sigma + 1)]
    factors_t: Optional[List[MultiPoly]] = None
    last_err: Optional[Exception] = None
    for fam, min_sigma in attempts:
        try:
            km = build_ki_map(list(names), epsilon, fam, min_sigma=min_sigma)
            factors_t = _ki_attempt(ptilde, km, monomial_cap)
            break
        except _PIPELINE_ERRORS as err:
            last_err = err
            _log_fallback(
                "family",
                {"family": fam, "min_sigma": min_sigma, "error": type(err).__name__},
            )
            if isinstance(err, _FamilyIndependentCap):
                break
            continue
    if factors_t is None:
        if fallback == "off":
            raise FallbackExhausted(
                f"all reduction attempts failed and the dense fallback is disabled ({last_err})"
            )
        _log_fallback("densify", {"error": type(last_err).__name__ if last_err else None})
        factors_t = dense_multivariate_factor(ptilde, "z")

    out: List[MultiPoly] = []
    undo = {
        "T": Fraction(1),
        "z": Fraction(0),
        **{v: MultiPoly.variable(v) - bv for v, bv in zip(names, prep.b)},
    }
    for g in factors_t:
        monic = g.substitute(undo).monic_normalized()[1]
        if all(monic != seen for seen in out):
            out.append(monic)
    out.sort(key=_poly_key)
    return [_finish_factor(m, names, orig) for m in out]


def _finish_factor(monic: MultiPoly, names: Tuple[str, ...], orig: Tuple[str, ...]) -> Circuit:
    back = {n: MultiPoly.variable(o) for n, o in zip(names, orig) if n != o}
    return poly_to_circuit(monic.substitute(back) if back else monic)


# ---------- full factorization ----------


@dataclass(frozen=True)
class FactorEntry:
    circuit: Circuit
    multiplicity: int
    dense: Optional[MultiPoly]


@dataclass(frozen=True)
class FactorizationResult:
    """unit * prod(factor_i ^ multiplicity_i) equals the input polynomial;
    the factors are monic irreducibles in canonical order."""

    unit: Fraction
    factors: List[FactorEntry]

    def as_dict(self) -> dict:
        from .circuit_ir import serialize_circuit

        return {
            "unit": str(self.unit),
            "factors": [
                {
                    "circuit": serialize_circuit(e.circuit),
                    "multiplicity": e.multiplicity,
                    "dense": e.dense.drop_vars().to_text() if e.dense is not None else None,
                }
                for e in self.factors
            ],
        }


def factor_all(
    circuit: Circuit,
    epsilon: Fraction = Fraction(1, 3),
    family: Optional[str] = None,
    fallback: str = "auto",
    monomial_cap: int = DEFAULT_MONOMIAL_CAP,
) -> FactorizationResult:
    """Complete factorization of a nonzero circuit polynomial over Q."""
    dense = dense_from_circuit(circuit, monomial_cap)
    if dense.is_zero():
        raise DegenerateInput("cannot factor the zero polynomial")
    if dense.is_constant():
        return FactorizationResult(Fraction(dense.constant_value()), [])
    unit, parts = squarefree_decompose(dense)
    entries: List[FactorEntry] = []
    for part, mult in parts:
        for fc in factor_squarefree(
            poly_to_circuit(part), epsilon, family, fallback, monomial_cap
        ):
            fd = dense_from_circuit(fc)
            entries.append(FactorEntry(fc, mult, fd))
    entries.sort(
        key=lambda e: (e.multiplicity, e.dense.total_degree(), e.dense.drop_vars().to_text())
    )
    recon = MultiPoly.constant(unit, ())
    for e in entries:
        recon = recon * e.dense ** e.multiplicity
    if recon != dense:
        raise VerificationFailed("factor product does not reproduce the input")
    result = FactorizationResult(Fraction(unit), entries)
    from .certify import verify_factorization

    if not verify_factorization(circuit, result):
        raise VerificationFailed("round-trip verification rejected the factorization")
    return result
