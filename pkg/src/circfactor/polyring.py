"""Sparse exact multivariate polynomials over Q or over a number field.

Representation: a sorted tuple of variable names together with a dict mapping
exponent tuples to nonzero coefficients (Fraction, or NumberFieldElement for
polynomials over Q[u]/(H)).  Rational constants mix freely with number-field
coefficients (Q embeds canonically); elements of two *different* number
fields refuse to combine.

The canonical variable order used everywhere (printing, graded-lex
comparisons, automatic alignment of operands) is: T first, then x1,x2,...,
then z, then w1,w2,..., then u, then y, then anything else alphabetically.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    DegenerateInput,
    DegreeOrder,
    InexactDivision,
    MissingAssignment,
    NotMonic,
)
from .scalars import NumberField, NumberFieldElement

Coeff = Union[Fraction, NumberFieldElement]
ScalarLike = Union[int, Fraction, NumberFieldElement]

_NAME_RE = re.compile(r"^([A-Za-z_]+?)(\d*)$")
_CLASS_RANK = {"T": 0, "x": 1, "z": 2, "w": 3, "u": 4, "y": 5}


def var_sort_key(name: str) -> tuple[int, int, str]:
    m = _NAME_RE.match(name)
    if m:
        base, idx = m.group(1), m.group(2)
        rank = _CLASS_RANK.get(base if idx else name, None)
        if rank is None and idx and base in _CLASS_RANK:
            rank = _CLASS_RANK[base]
        if rank is not None:
            return (rank, int(idx) if idx else 0, name)
    return (6, 0, name)


def _as_coeff(value: ScalarLike) -> Coeff:
    if isinstance(value, int):
        return Fraction(value)
    return value


class MultiPoly:
    """Immutable-by-convention sparse polynomial."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], ScalarLike]):
        vs = tuple(variables)
        if list(vs) != sorted(set(vs), key=var_sort_key):
            raise DegenerateInput(f"variables not in canonical order: {vs}")
        clean: dict[tuple[int, ...], Coeff] = {}
        for exp, c in terms.items():
            if len(exp) != len(vs):
                raise DegenerateInput("exponent arity does not match variable list")
            c = _as_coeff(c)
            if c:
                clean[tuple(exp)] = c
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # ---------- constructors ----------

    @staticmethod
    def zero(variables: Sequence[str] = ()) -> "MultiPoly":
        return MultiPoly(variables, {})

    @staticmethod
    def constant(value: ScalarLike, variables: Sequence[str] = ()) -> "MultiPoly":
        vs = tuple(variables)
        return MultiPoly(vs, {(0,) * len(vs): _as_coeff(value)})

    @staticmethod
    def variable(name: str) -> "MultiPoly":
        return MultiPoly((name,), {(1,): Fraction(1)})

    @staticmethod
    def monomial(variables: Sequence[str], exponents: Sequence[int], coeff: ScalarLike = 1) -> "MultiPoly":
        return MultiPoly(variables, {tuple(exponents): _as_coeff(coeff)})

    # ---------- basic structure ----------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Coeff:
        if not self.terms:
            return Fraction(0)
        for exp, c in self.terms.items():
            if any(exp):
                raise DegenerateInput("polynomial is not constant")
        return next(iter(self.terms.values()))

    def field(self) -> NumberField | None:
        """The number field of the coefficients, or None for Q (and for 0)."""
        for c in self.terms.values():
            if isinstance(c, NumberFieldElement):
                return c.field
        return None

    def total_degree(self) -> int:
        """-1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def weighted_degree(self, vars: Sequence[str]) -> int:
        idx = [self.variables.index(v) for v in vars if v in self.variables]
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, NumberFieldElement)):
            other = MultiPoly.constant(other, ())
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = _align(self, other)
        return a.terms == b.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    # ---------- arithmetic ----------

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, Fraction, NumberFieldElement)):
            other = MultiPoly.constant(other, self.variables)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = _align(self, other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly(a.variables, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiPoly) else -_as_coeff(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, NumberFieldElement)):
            c0 = _as_coeff(other)
            if not c0:
                return MultiPoly.zero(self.variables)
            return MultiPoly(self.variables, {e: c * c0 for e, c in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = _align(self, other)
        out: dict[tuple[int, ...], Coeff] = {}
        bt = list(b.terms.items())
        for ea, ca in a.terms.items():
            for eb, cb in bt:
                e = tuple(i + j for i, j in zip(ea, eb))
                s = out.get(e, 0) + ca * cb
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MultiPoly(a.variables, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, int):
            scalar = Fraction(scalar)
        if isinstance(scalar, (Fraction, NumberFieldElement)):
            if not scalar:
                raise DegenerateInput("division of polynomial by zero scalar")
            if isinstance(scalar, Fraction):
                inv: ScalarLike = 1 / scalar
            else:
                inv = scalar.inverse()
            return self * inv
        return NotImplemented

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise DegenerateInput("negative polynomial power")
        result = MultiPoly.constant(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # ---------- views / extraction ----------

    def coeffs_in(self, var: str) -> list["MultiPoly"]:
        """Dense coefficient list [c_0, ..., c_deg] as polynomials without var."""
        if var not in self.variables:
            return [self] if self.terms else []
        i = self.variables.index(var)
        rest = self.variables[:i] + self.variables[i + 1 :]
        buckets: dict[int, dict[tuple[int, ...], Coeff]] = {}
        for e, c in self.terms.items():
            k = e[i]
            re_ = e[:i] + e[i + 1 :]
            buckets.setdefault(k, {})[re_] = c
        if not buckets:
            return []
        deg = max(buckets)
        return [MultiPoly(rest, buckets.get(k, {})) for k in range(deg + 1)]

    @staticmethod
    def from_coeffs_in(var: str, coeffs: Sequence["MultiPoly"]) -> "MultiPoly":
        acc = MultiPoly.zero((var,))
        vmono = MultiPoly.variable(var)
        for k, c in enumerate(coeffs):
            if isinstance(c, (int, Fraction, NumberFieldElement)):
                c = MultiPoly.constant(c, ())
            if not c.is_zero():
                acc = acc + c * vmono**k
        return acc

    def coefficient(self, var: str, power: int) -> "MultiPoly":
        cs = self.coeffs_in(var)
        if power >= len(cs):
            rest = tuple(v for v in self.variables if v != var)
            return MultiPoly.zero(rest)
        return cs[power]

    def leading_term(self) -> tuple[tuple[int, ...], Coeff]:
        """Graded-lex largest term (total degree, then lex on exponents)."""
        if not self.terms:
            raise DegenerateInput("zero polynomial has no leading term")
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    def leading_coeff(self) -> Coeff:
        return self.leading_term()[1]

    def monic_normalized(self) -> tuple[Coeff, "MultiPoly"]:
        """Return (unit, self/unit) with graded-lex leading coefficient 1."""
        if not self.terms:
            return Fraction(1), self
        _, c = self.leading_term()
        return c, self / c

    # ---------- substitution / evaluation ----------

    def evaluate(self, point: Mapping[str, ScalarLike]):
        """Full evaluation; every variable occurring with positive degree must
        be assigned.  Returns a scalar."""
        powers: list[dict[int, ScalarLike]] = []
        vals: list[ScalarLike | None] = []
        for v in self.variables:
            if v in point:
                vals.append(_as_coeff(point[v]) if isinstance(point[v], int) else point[v])
            else:
                vals.append(None)
            powers.append({0: Fraction(1)})
        acc: ScalarLike = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k == 0:
                    continue
                if vals[i] is None:
                    raise MissingAssignment(f"variable {self.variables[i]!r} unassigned")
                cache = powers[i]
                if k not in cache:
                    p = cache[max(cache)]
                    for _ in range(max(cache), k):
                        p = p * vals[i]
                        cache[max(cache) + 1] = p
                    p = cache[k]
                term = term * cache[k]
            acc = acc + term
        return acc

    def substitute(self, images: Mapping[str, Union["MultiPoly", ScalarLike]]) -> "MultiPoly":
        """Replace variables by polynomials (or scalars); others stay."""
        img: dict[str, MultiPoly] = {}
        for v, im in images.items():
            if not isinstance(im, MultiPoly):
                im = MultiPoly.constant(im, ())
            img[v] = im
        pow_cache: dict[tuple[str, int], MultiPoly] = {}

        def image_power(v: str, k: int) -> MultiPoly:
            key = (v, k)
            if key not in pow_cache:
                pow_cache[key] = img[v] ** k
            return pow_cache[key]

        acc = MultiPoly.zero(())
        for e, c in self.terms.items():
            term = MultiPoly.constant(c, ())
            for i, k in enumerate(e):
                if k == 0:
                    continue
                v = self.variables[i]
                if v in img:
                    term = term * image_power(v, k)
                else:
                    term = term * MultiPoly.monomial((v,), (k,))
            acc = acc + term
        return acc

    def map_coefficients(self, fn: Callable[[Coeff], ScalarLike]) -> "MultiPoly":
        return MultiPoly(self.variables, {e: _as_coeff(fn(c)) for e, c in self.terms.items()})

    def derivative(self, var: str, order: int = 1) -> "MultiPoly":
        """Exact iterated partial derivative (no 1/i! normalization)."""
        p = self
        for _ in range(order):
            if var not in p.variables:
                return MultiPoly.zero(p.variables)
            i = p.variables.index(var)
            out: dict[tuple[int, ...], Coeff] = {}
            for e, c in p.terms.items():
                if e[i] > 0:
                    ne = e[:i] + (e[i] - 1,) + e[i + 1 :]
                    out[ne] = c * e[i]
            p = MultiPoly(p.variables, out)
        return p

    # ---------- truncation / grading ----------

    def trunc(self, vars: Sequence[str], k: int) -> "MultiPoly":
        """Drop every term of weighted degree >= k in the given variables."""
        idx = [self.variables.index(v) for v in vars if v in self.variables]
        out = {e: c for e, c in self.terms.items() if sum(e[i] for i in idx) < k}
        return MultiPoly(self.variables, out)

    def hom_component(self, vars: Sequence[str], degree: int) -> "MultiPoly":
        idx = [self.variables.index(v) for v in vars if v in self.variables]
        out = {e: c for e, c in self.terms.items() if sum(e[i] for i in idx) == degree}
        return MultiPoly(self.variables, out)

    def drop_vars(self) -> "MultiPoly":
        """Remove variables that no term uses (canonical form for printing)."""
        if not self.terms:
            return self
        used = [i for i in range(len(self.variables)) if any(e[i] for e in self.terms)]
        if len(used) == len(self.variables):
            return self
        vs = tuple(self.variables[i] for i in used)
        return MultiPoly(vs, {tuple(e[i] for i in used): c for e, c in self.terms.items()})

    # ---------- text form ----------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Coeff]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def to_text(self) -> str:
        p = self.drop_vars()
        if not p.terms:
            return "0"
        parts: list[str] = []
        for e, c in p.sorted_terms():
            monos = [
                v if k == 1 else f"{v}^{k}"
                for v, k in zip(p.variables, e)
                if k > 0
            ]
            if isinstance(c, NumberFieldElement):
                cs = "(" + ",".join(str(q) for q in c.coeffs) + ")"
                body = "*".join([cs] + monos) if monos else cs
                sign = "+"
            else:
                sign = "-" if c < 0 else "+"
                ac = abs(c)
                if monos and ac == 1:
                    body = "*".join(monos)
                else:
                    body = "*".join([str(ac)] + monos) if monos else str(ac)
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"<MultiPoly {self.to_text()}>"


def _align(a: MultiPoly, b: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    if a.variables == b.variables:
        return a, b
    union = sorted(set(a.variables) | set(b.variables), key=var_sort_key)
    return _remap(a, union), _remap(b, union)


def _remap(p: MultiPoly, variables: Sequence[str]) -> MultiPoly:
    if tuple(variables) == p.variables:
        return p
    pos = {v: i for i, v in enumerate(variables)}
    idx = [pos[v] for v in p.variables]
    out: dict[tuple[int, ...], Coeff] = {}
    for e, c in p.terms.items():
        ne = [0] * len(variables)
        for i, k in zip(idx, e):
            ne[i] = k
        out[tuple(ne)] = c
    return MultiPoly(variables, out)


def align_to(p: MultiPoly, variables: Sequence[str]) -> MultiPoly:
    """Embed p into a larger canonical variable list."""
    union = sorted(set(p.variables) | set(variables), key=var_sort_key)
    return _remap(p, union)


def mul_trunc(a: MultiPoly, b: MultiPoly, vars: Sequence[str], k: int) -> MultiPoly:
    """a*b with every product term of weighted degree >= k dropped eagerly."""
    a, b = _align(a, b)
    idx = [a.variables.index(v) for v in vars if v in a.variables]
    bt = [(e, c, sum(e[i] for i in idx)) for e, c in b.terms.items()]
    bt.sort(key=lambda t: t[2])
    out: dict[tuple[int, ...], Coeff] = {}
    for ea, ca in a.terms.items():
        wa = sum(ea[i] for i in idx)
        if wa >= k:
            continue
        for eb, cb, wb in bt:
            if wa + wb >= k:
                break
            e = tuple(i + j for i, j in zip(ea, eb))
            s = out.get(e, 0) + ca * cb
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return MultiPoly(a.variables, out)


def pow_trunc(a: MultiPoly, n: int, vars: Sequence[str], k: int) -> MultiPoly:
    result = MultiPoly.constant(1, a.variables)
    base = a.trunc(vars, k)
    while n:
        if n & 1:
            result = mul_trunc(result, base, vars, k)
        n >>= 1
        if n:
            base = mul_trunc(base, base, vars, k)
    return result


# ---------- symmetric-function transforms ----------


def esym_to_psym(esyms: Sequence) -> list:
    """Power sums p_1..p_n from elementary symmetric e_1..e_n (Newton)."""
    e = list(esyms)
    n = len(e)
    p: list = []
    for k in range(1, n + 1):
        acc = k * e[k - 1] if k % 2 == 1 else -k * e[k - 1]
        for i in range(1, k):
            term = e[i - 1] * p[k - i - 1]
            acc = acc + term if i % 2 == 1 else acc - term
        p.append(acc)
    return p


def psym_to_esym(psyms: Sequence) -> list:
    """Elementary symmetric e_1..e_n from power sums p_1..p_n (Newton).

    Divides by k at step k, so the ring must admit division by integers.
    """
    p = list(psyms)
    n = len(p)
    e: list = []
    for k in range(1, n + 1):
        acc = p[0] * e[k - 2] if k > 1 else p[0]
        for i in range(2, k):
            term = e[k - i - 1] * p[i - 1]
            acc = acc + term if i % 2 == 1 else acc - term
        if k > 1:
            term = p[k - 1]
            acc = acc + term if k % 2 == 1 else acc - term
        e.append(acc / k if not isinstance(acc, int) else Fraction(acc, k))
    return e


# ---------- exact division / gcd / squarefree ----------


def exact_div(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Exact multivariate division a/b; InexactDivision when b does not divide a."""
    if b.is_zero():
        raise DegenerateInput("division by zero polynomial")
    if b.is_constant():
        return a / b.constant_value()
    if a.is_zero():
        return MultiPoly.zero(a.variables)
    a2, b2 = _align(a, b)
    eb, cb = b2.leading_term()
    if isinstance(cb, NumberFieldElement):
        cb_inv: ScalarLike = cb.inverse()
    else:
        cb_inv = 1 / cb
    quo: dict[tuple[int, ...], Coeff] = {}
    rem = dict(a2.terms)
    while rem:
        er = max(rem, key=lambda t: (sum(t), t))
        cr = rem[er]
        qe = tuple(i - j for i, j in zip(er, eb))
        if any(q < 0 for q in qe):
            raise InexactDivision("leading term not divisible")
        qc = cr * cb_inv
        quo[qe] = qc
        for e2, c2 in b2.terms.items():
            e = tuple(i + j for i, j in zip(qe, e2))
            s = rem.get(e, 0) - qc * c2
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return MultiPoly(a2.variables, quo)


def divides_exactly(a: MultiPoly, b: MultiPoly) -> bool:
    try:
        exact_div(a, b)
        return True
    except InexactDivision:
        return False


def dense_divide(a: MultiPoly, b: MultiPoly, var: str) -> tuple[MultiPoly, MultiPoly]:
    """Long division in var by a divisor whose leading var-coefficient is a
    nonzero scalar.  Returns (quotient, remainder)."""
    bc = b.coeffs_in(var)
    if not bc:
        raise DegenerateInput("division by zero polynomial")
    lead = bc[-1]
    if not lead.is_constant():
        raise NotMonic(f"divisor leading {var}-coefficient is not a scalar")
    lc = lead.constant_value()
    db = len(bc) - 1
    da = a.degree_in(var)
    if a.is_zero():
        return MultiPoly.zero(a.variables), MultiPoly.zero(a.variables)
    if da < db:
        raise DegreeOrder(f"dividend degree {da} < divisor degree {db} in {var}")
    if isinstance(lc, NumberFieldElement):
        lc_inv: ScalarLike = lc.inverse()
    else:
        lc_inv = 1 / lc
    ac = a.coeffs_in(var)
    quo: list[MultiPoly] = [MultiPoly.zero(()) for _ in range(da - db + 1)]
    work = list(ac)
    for k in range(da - db, -1, -1):
        top = work[k + db]
        if top.is_zero():
            continue
        q = top * lc_inv
        quo[k] = q
        for i, bci in enumerate(bc):
            work[k + i] = work[k + i] - q * bci
    rem_coeffs = work[:db]
    quotient = MultiPoly.from_coeffs_in(var, quo)
    remainder = MultiPoly.from_coeffs_in(var, rem_coeffs)
    return quotient, remainder


def _content_and_pp(p: MultiPoly, var: str) -> tuple[MultiPoly, MultiPoly]:
    """Content (gcd of var-coefficients) and primitive part w.r.t. var."""
    coeffs = [c for c in p.coeffs_in(var) if not c.is_zero()]
    cont = coeffs[0]
    for c in coeffs[1:]:
        cont = poly_gcd(cont, c)
        if cont.is_constant():
            break
    cont = align_to(cont, ())
    return cont, exact_div(p, cont)


def _pseudo_rem(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    """Pseudo-remainder lc(b)^(delta+1) * a mod b w.r.t. var, with the
    exact canonical multiplier (delta = deg a - deg b >= 0)."""
    db = b.degree_in(var)
    lb = b.coefficient(var, db)
    r = a
    spare = a.degree_in(var) - db + 1
    vmono = MultiPoly.variable(var)
    while not r.is_zero() and r.degree_in(var) >= db:
        dr = r.degree_in(var)
        lr = r.coefficient(var, dr)
        r = r * lb - b * lr * vmono ** (dr - db)
        spare -= 1
    for _ in range(spare):
        r = r * lb
    return r


_PROBE_SEEDS = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31)


def _scalar_gcd_degree(a: list, b: list) -> int:
    """Degree of the gcd of two univariate coefficient lists (low first)."""

    def trim(c):
        while c and not c[-1]:
            c.pop()
        return c

    a, b = trim(list(a)), trim(list(b))
    while b:
        lb = b[-1]
        inv = lb.inverse() if isinstance(lb, NumberFieldElement) else 1 / lb
        db = len(b) - 1
        while len(a) - 1 >= db and a:
            q = a[-1] * inv
            off = len(a) - 1 - db
            for i in range(db + 1):
                a[off + i] = a[off + i] - q * b[i]
            trim(a)
            if not a:
                break
        a, b = b, a
    return len(a) - 1 if a else -1


def _probe_says_coprime(pa: MultiPoly, pb: MultiPoly, var: str) -> bool:
    """Specialize the non-main variables at a deterministic point; a degree-0
    univariate gcd there proves the primitive gcd has no var-part (the gcd of
    specializations is always a multiple of the specialized gcd, and a valid
    point keeps the leading coefficient alive)."""
    others = sorted(
        {v for v in (*pa.variables, *pb.variables)
         if v != var and (pa.degree_in(v) > 0 or pb.degree_in(v) > 0)}
    )
    if not others:
        return False
    da, db = pa.degree_in(var), pb.degree_in(var)
    for trial in range(4):
        pt = {
            v: Fraction(_PROBE_SEEDS[(i + trial) % len(_PROBE_SEEDS)] + trial)
            for i, v in enumerate(others)
        }
        la = pa.coefficient(var, da).evaluate(pt)
        lb = pb.coefficient(var, db).evaluate(pt)
        if la == 0 and lb == 0:
            continue
        ua = [c.evaluate(pt) for c in pa.coeffs_in(var)]
        ub = [c.evaluate(pt) for c in pb.coeffs_in(var)]
        return _scalar_gcd_degree(ua, ub) == 0
    return False


def poly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """gcd over Q (or a number field), normalized with graded-lex lead 1.

    Subresultant pseudo-remainder sequence in the main variable: the
    known factor g*h^delta is divided out of each remainder, so no content
    computation happens until the final candidate, which keeps the
    coefficient swell polynomial.
    """
    if a.is_zero():
        return b.monic_normalized()[1] if not b.is_zero() else b
    if b.is_zero():
        return a.monic_normalized()[1]
    if a.is_constant() or b.is_constant():
        return MultiPoly.constant(1, ())
    shared = [v for v in a.variables if v in b.variables and a.degree_in(v) > 0 and b.degree_in(v) > 0]
    if not shared:
        for v in a.variables:
            if a.degree_in(v) > 0:
                cont, _ = _content_and_pp(a, v)
                return poly_gcd(cont, b)
        return MultiPoly.constant(1, ())
    var = max(shared, key=lambda v: (min(a.degree_in(v), b.degree_in(v)), v))
    ca, pa = _content_and_pp(a, var)
    cb, pb = _content_and_pp(b, var)
    gc = poly_gcd(ca, cb)
    if _probe_says_coprime(pa, pb, var):
        return gc.monic_normalized()[1]
    one = MultiPoly.constant(1, ())
    f, g = (pa, pb) if pa.degree_in(var) >= pb.degree_in(var) else (pb, pa)
    gg = one
    hh = one
    while not g.is_zero() and g.degree_in(var) > 0:
        delta = f.degree_in(var) - g.degree_in(var)
        r = _pseudo_rem(f, g, var)
        f = g
        if r.is_zero():
            g = r
            break
        g = exact_div(r, gg * hh ** delta)
        gg = f.coefficient(var, f.degree_in(var))
        if delta == 1:
            hh = gg
        elif delta > 1:
            hh = exact_div(gg ** delta, hh ** (delta - 1))
    if not g.is_zero():
        pp_gcd = one
    else:
        _, pp_gcd = _content_and_pp(f, var)
    return (gc * pp_gcd).monic_normalized()[1]


def squarefree_decompose(p: MultiPoly) -> tuple[Coeff, list[tuple[MultiPoly, int]]]:
    """Yun decomposition p = unit * prod part_i^i with the parts squarefree,
    pairwise coprime, and graded-lex monic.  Main variable: highest degree,
    ties broken by canonical variable order."""
    if p.is_zero():
        raise DegenerateInput("squarefree decomposition of zero")
    if p.is_constant():
        return p.constant_value(), []
    pvars = [v for v in p.variables if p.degree_in(v) > 0]
    best = max(p.degree_in(v) for v in pvars)
    var = min((v for v in pvars if p.degree_in(v) == best), key=var_sort_key)
    cont, pp = _content_and_pp(p, var)
    parts: dict[int, MultiPoly] = {}
    unit: Coeff = Fraction(1)
    if not cont.is_constant():
        cu, cparts = squarefree_decompose(cont)
        unit = unit * cu
        for q, m in cparts:
            parts[m] = parts.get(m, MultiPoly.constant(1, ())) * q
    else:
        unit = unit * cont.constant_value()
    dp = pp.derivative(var)
    g = poly_gcd(pp, dp)
    c = exact_div(pp, g)
    d = exact_div(dp, g) - c.derivative(var)
    i = 1
    while not c.is_constant():
        w = poly_gcd(c, d)
        if not w.is_constant():
            parts[i] = parts.get(i, MultiPoly.constant(1, ())) * w
        c_next = exact_div(c, w)
        d = exact_div(d, w) - c_next.derivative(var)
        c = c_next
        i += 1
    unit = unit * c.constant_value()
    out: list[tuple[MultiPoly, int]] = []
    for m in sorted(parts):
        u, q = parts[m].monic_normalized()
        unit = unit * u**m
        out.append((q, m))
    return unit, out


# ---------- resultants ----------


def sylvester_matrix(p: MultiPoly, q: MultiPoly, var: str) -> list[list[MultiPoly]]:
    dp, dq = p.degree_in(var), q.degree_in(var)
    if dp < 1 or dq < 1:
        raise DegenerateInput("resultant needs positive degree in the variable")
    pc = p.coeffs_in(var)
    qc = q.coeffs_in(var)
    n = dp + dq
    zero = MultiPoly.zero(())
    rows: list[list[MultiPoly]] = []
    for sh in range(dq):
        row = [zero] * n
        for i, c in enumerate(reversed(pc)):
            row[sh + i] = c
        rows.append(row)
    for sh in range(dp):
        row = [zero] * n
        for i, c in enumerate(reversed(qc)):
            row[sh + i] = c
        rows.append(row)
    return rows


def bareiss_determinant(matrix: list[list[MultiPoly]]) -> MultiPoly:
    """Fraction-free determinant of a square matrix of polynomials."""
    n = len(matrix)
    if n == 0 or any(len(r) != n for r in matrix):
        raise DegenerateInput("determinant of empty or non-square matrix")
    m = [[align_to(e, ()) for e in row] for row in matrix]
    sign = 1
    denom = MultiPoly.constant(1, ())
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return MultiPoly.zero(())
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * pivot - m[i][k] * m[k][j]
                m[i][j] = exact_div(num, denom)
            m[i][k] = MultiPoly.zero(())
        denom = pivot
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def sylvester_resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    return bareiss_determinant(sylvester_matrix(p, q, var))


def discriminant(p: MultiPoly, var: str) -> MultiPoly:
    """Res(p, dp/dvar); sign/leading conventions follow that resultant directly."""
    return sylvester_resultant(p, p.derivative(var), var)


# ---------- number-field coefficient decomposition ----------


def lift_to_field(p: MultiPoly, field: NumberField) -> MultiPoly:
    """Explicitly view a rational polynomial over Q[u]/(H)."""
    def up(c: Coeff) -> NumberFieldElement:
        if isinstance(c, NumberFieldElement):
            if c.field != field:
                raise DegenerateInput("polynomial already over a different field")
            return c
        return field.from_rational(c)

    return p.map_coefficients(up)


def nf_coeff_decompose(p: MultiPoly) -> list[MultiPoly]:
    """Split a polynomial over Q[u]/(H) into deg(H) rational polynomials,
    one per power of u (lowest first): p = sum_r u^r * out[r]."""
    field = p.field()
    if field is None:
        raise DegenerateInput("polynomial has no number-field coefficients")
    outs: list[dict[tuple[int, ...], Coeff]] = [dict() for _ in range(field.degree)]
    for e, c in p.terms.items():
        if isinstance(c, NumberFieldElement):
            coeffs = c.coeffs
        else:
            coeffs = (c,) + (Fraction(0),) * (field.degree - 1)
        for r, cr in enumerate(coeffs):
            if cr:
                outs[r][e] = cr
    return [MultiPoly(p.variables, t) for t in outs]


# ---------- text parsing ----------


def parse_poly(text: str) -> MultiPoly:
    """Parse the canonical text form: terms of shape 3/2*x1^2*z joined by +/-."""
    s = text.strip()
    if not s:
        raise DegenerateInput("empty polynomial text")
    tokens = re.findall(r"\d+/\d+|\d+|[A-Za-z_][A-Za-z0-9_]*|\^|\*|\+|-|\S", s)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        t = tokens[pos]
        pos += 1
        return t

    def parse_factor() -> MultiPoly:
        t = peek()
        if t is None:
            raise DegenerateInput("unexpected end of polynomial text")
        if re.fullmatch(r"\d+/\d+|\d+", t):
            take()
            return MultiPoly.constant(parse_rational_token(t), ())
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t):
            take()
            k = 1
            if peek() == "^":
                take()
                e = peek()
                if e is None or not e.isdigit():
                    raise DegenerateInput("exponent must be a nonnegative integer")
                k = int(take())
            return MultiPoly.monomial((t,), (k,))
        raise DegenerateInput(f"unexpected token {t!r} in polynomial text")

    def parse_term() -> MultiPoly:
        acc = parse_factor()
        while peek() == "*":
            take()
            acc = acc * parse_factor()
        return acc

    def parse_rational_token(tok: str) -> Fraction:
        if "/" in tok:
            n, d = tok.split("/")
            if int(d) == 0:
                raise DegenerateInput("zero denominator")
            return Fraction(int(n), int(d))
        return Fraction(int(tok))

    negate = False
    if peek() in ("+", "-"):
        negate = take() == "-"
    acc = parse_term()
    if negate:
        acc = -acc
    while peek() is not None:
        op = take()
        if op not in ("+", "-"):
            raise DegenerateInput(f"expected + or - between terms, got {op!r}")
        term = parse_term()
        acc = acc + (-term if op == "-" else term)
    return acc


# ---------- interpolation ----------


def lagrange_matrix(nodes: Sequence[Fraction]) -> list[list[Fraction]]:
    """beta[m][j]: coefficient of y^m in the Lagrange basis polynomial L_j, so
    that a polynomial f of degree < len(nodes) has coefficients
    f_m = sum_j beta[m][j] * f(nodes[j])."""
    n = len(nodes)
    beta = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        num = [Fraction(1)]
        denom = Fraction(1)
        for i in range(n):
            if i == j:
                continue
            num = [
                (num[k - 1] if k > 0 else Fraction(0)) - nodes[i] * (num[k] if k < len(num) else Fraction(0))
                for k in range(len(num) + 1)
            ]
            denom *= nodes[j] - nodes[i]
        for m in range(n):
            beta[m][j] = (num[m] if m < len(num) else Fraction(0)) / denom
    return beta


def principal_lattice(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples |e| <= degree in ascending graded-lex order."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)

    for d in range(degree + 1):
        start = len(out)
        rec([], d, nvars)
        chunk = [e for e in out[start:] if sum(e) == d]
        del out[start:]
        out.extend(sorted(chunk))
    return out


_LATTICE_SOLVE_CACHE: dict = {}


def interpolate_on_lattice(
    variables: Sequence[str],
    degree: int,
    value_at: Callable[[tuple[int, ...]], Fraction],
    shift: tuple[int, ...] | None = None,
) -> MultiPoly:
    """Interpolate the unique polynomial of total degree <= degree from its
    values on the (optionally shifted) principal lattice."""
    n = len(variables)
    lat = principal_lattice(n, degree)
    if shift is None:
        shift = (0,) * n
    key = (n, degree, shift)
    if key not in _LATTICE_SOLVE_CACHE:
        size = len(lat)
        mat = []
        for e in lat:
            pt = tuple(e[i] + shift[i] for i in range(n))
            mat.append([_int_pow_prod(pt, a) for a in lat])
        _LATTICE_SOLVE_CACHE[key] = _invert_rational_matrix(mat)
    inv = _LATTICE_SOLVE_CACHE[key]
    values = [Fraction(value_at(tuple(e[i] + shift[i] for i in range(n)))) for e in lat]
    coeffs = [sum((inv[r][c] * values[c] for c in range(len(lat))), Fraction(0)) for r in range(len(lat))]
    terms = {e: c for e, c in zip(lat, coeffs) if c}
    vs = sorted(variables, key=var_sort_key)
    if tuple(vs) != tuple(variables):
        raise DegenerateInput("interpolation variables must be canonically ordered")
    return MultiPoly(tuple(variables), terms)


def _int_pow_prod(point: tuple[int, ...], exps: tuple[int, ...]) -> Fraction:
    v = 1
    for p, e in zip(point, exps):
        v *= p**e
    return Fraction(v)


def _invert_rational_matrix(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    work = [row[:] + [Fraction(1) if i == j else Fraction(0) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            raise DegenerateInput("interpolation matrix is singular")
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [a - f * b for a, b in zip(work[r], work[col])]
    return [row[n:] for row in work]
