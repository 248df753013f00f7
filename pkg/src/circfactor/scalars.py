"""Exact scalar arithmetic: rationals and explicit number fields Q[u]/(H).

Rationals are `fractions.Fraction` throughout — it already maintains the
normalized p/q invariant (gcd 1, positive denominator) and its str() form is
the wire format used everywhere in this package ("p/q", bare "p" when q = 1).

A NumberField is Q[u]/(H) for a monic irreducible H given by its dense
coefficient list.  Elements are immutable coefficient tuples in the power
basis 1, u, ..., u^(deg H - 1).  Inversion runs the extended Euclidean
algorithm on the coefficient representative and H; a nontrivial gcd means the
modulus was reducible after all and is reported as such rather than silently
mis-inverting.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

from .errors import DegenerateInput, ZeroInverse

Scalar = Fraction

RationalLike = Union[int, Fraction]


def parse_rational(text: str) -> Fraction:
    """Parse "p" or "p/q" with optional sign into a Fraction.

    Raises DegenerateInput on malformed text or zero denominator.
    """
    s = text.strip()
    if not s:
        raise DegenerateInput("empty rational literal")
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise DegenerateInput(f"malformed rational literal {text!r}") from None
    if d == 0:
        raise DegenerateInput(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_rational(value: RationalLike) -> str:
    """Serialize a rational as "p/q", omitting "/q" when the denominator is 1."""
    return str(Fraction(value))


def _poly_trim(coeffs: list[Fraction]) -> list[Fraction]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Division with remainder of dense rational polynomials (b nonzero)."""
    rem = list(a)
    quo = [Fraction(0)] * max(0, len(rem) - len(b) + 1)
    inv_lead = 1 / b[-1]
    while len(rem) >= len(b):
        c = rem[-1] * inv_lead
        k = len(rem) - len(b)
        quo[k] = c
        for i, bi in enumerate(b):
            rem[k + i] -= c * bi
        _poly_trim(rem)
        if not rem:
            break
    return _poly_trim(quo), rem


class NumberField:
    """Q[u]/(H) for a monic irreducible modulus H of degree >= 1."""

    def __init__(self, modulus: Sequence[RationalLike]):
        coeffs = [Fraction(c) for c in modulus]
        coeffs = _poly_trim(coeffs)
        if len(coeffs) < 2:
            raise DegenerateInput("number field modulus must have degree >= 1")
        if coeffs[-1] != 1:
            raise DegenerateInput("number field modulus must be monic")
        self.modulus: tuple[Fraction, ...] = tuple(coeffs)
        self.degree: int = len(coeffs) - 1
        # u^degree expressed in the power basis; reduce() folds with this.
        self._top: tuple[Fraction, ...] = tuple(-c for c in coeffs[:-1])

    def __eq__(self, other) -> bool:
        return isinstance(other, NumberField) and self.modulus == other.modulus

    def __hash__(self) -> int:
        return hash(self.modulus)

    def __repr__(self) -> str:
        return f"NumberField({[str(c) for c in self.modulus]})"

    def element(self, coeffs: Sequence[RationalLike]) -> "NumberFieldElement":
        return NumberFieldElement(self, coeffs)

    def from_rational(self, c: RationalLike) -> "NumberFieldElement":
        return NumberFieldElement(self, [Fraction(c)])

    def zero(self) -> "NumberFieldElement":
        return self.from_rational(0)

    def one(self) -> "NumberFieldElement":
        return self.from_rational(1)

    def gen(self) -> "NumberFieldElement":
        return NumberFieldElement(self, [0, 1])

    def reduce(self, coeffs: Sequence[RationalLike]) -> tuple[Fraction, ...]:
        """Reduce an arbitrary-length coefficient list modulo H."""
        work = [Fraction(c) for c in coeffs]
        d = self.degree
        for k in range(len(work) - 1, d - 1, -1):
            c = work[k]
            if c:
                work[k] = Fraction(0)
                for i, f in enumerate(self._top):
                    work[k - d + i] += c * f
        work = work[:d]
        work += [Fraction(0)] * (d - len(work))
        return tuple(work)

    def trace_powers(self, n: int) -> list[Fraction]:
        """Power sums p_0..p_n of the roots of H (p_a = Tr(u^a)).

        Newton's identity gives p_k from H's coefficients without knowing the
        roots; for k past the degree the linear recurrence of H takes over.
        """
        d = self.degree
        c = self.modulus
        p: list[Fraction] = [Fraction(d)]
        for k in range(1, n + 1):
            if k <= d:
                acc = -k * c[d - k]
                for i in range(1, k):
                    acc -= c[d - i] * p[k - i]
            else:
                acc = Fraction(0)
                for i in range(1, d + 1):
                    acc -= c[d - i] * p[k - i]
            p.append(acc)
        return p


class NumberFieldElement:
    """Immutable element of a NumberField in the power basis."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: Sequence[RationalLike]):
        if len(coeffs) > field.degree:
            object.__setattr__(self, "field", field)
            object.__setattr__(self, "coeffs", field.reduce(coeffs))
            return
        padded = [Fraction(c) for c in coeffs]
        padded += [Fraction(0)] * (field.degree - len(padded))
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(padded))

    def __setattr__(self, name, value):
        raise AttributeError("NumberFieldElement is immutable")

    def _coerce(self, other) -> "NumberFieldElement | None":
        if isinstance(other, NumberFieldElement):
            if other.field != self.field:
                raise DegenerateInput("arithmetic across distinct number fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NumberFieldElement(self.field, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NumberFieldElement(self.field, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NumberFieldElement(self.field, [a * other for a in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prod = _poly_mul(self.coeffs, o.coeffs)
        return NumberFieldElement(self.field, self.field.reduce(prod))

    __rmul__ = __mul__

    def inverse(self) -> "NumberFieldElement":
        return nf_inverse(self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroInverse("division by zero rational")
            return NumberFieldElement(self.field, [a / other for a in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * nf_inverse(o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * nf_inverse(self)

    def __pow__(self, n: int):
        if n < 0:
            return nf_inverse(self) ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.from_rational(other)
        if not isinstance(other, NumberFieldElement):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field.modulus, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise DegenerateInput("element is not rational")
        return self.coeffs[0]

    def __repr__(self) -> str:
        return f"NFE[{', '.join(str(c) for c in self.coeffs)}]"


def nf_inverse(a: NumberFieldElement) -> NumberFieldElement:
    """Invert a via the extended Euclidean algorithm on (a, H).

    gcd(a, H) must be a unit; a nontrivial gcd exposes a reducible modulus.
    """
    if not a:
        raise ZeroInverse("inverse of zero in number field")
    field = a.field
    r0: list[Fraction] = list(field.modulus)
    r1: list[Fraction] = _poly_trim(list(a.coeffs))
    s0: list[Fraction] = []
    s1: list[Fraction] = [Fraction(1)]
    while True:
        if len(r1) == 1:
            inv = 1 / r1[0]
            return NumberFieldElement(field, field.reduce([c * inv for c in s1]))
        if not r1:
            raise DegenerateInput("modulus is reducible: nontrivial gcd during inversion")
        q, r = _poly_divmod(r0, r1)
        qs = _poly_mul(q, s1)
        s_new = [Fraction(0)] * max(len(s0), len(qs))
        for i, c in enumerate(s0):
            s_new[i] += c
        for i, c in enumerate(qs):
            s_new[i] -= c
        r0, r1 = r1, r
        s0, s1 = s1, _poly_trim(s_new)
