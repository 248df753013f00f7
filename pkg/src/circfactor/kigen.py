"""Combinatorial designs and the variable-reduction substitution map.

The factorization pipeline replaces the n circuit variables by images of a
fixed low-degree "hard" polynomial evaluated on overlapping small variable
sets, shrinking the ambient dimension from n to mu = q^2 while keeping
nonzero polynomials nonzero.  The sets come from a Reed-Solomon style
construction a la Nisan-Wigderson: over a finite field with q elements, the
set attached to a polynomial f of degree < rho is the graph
{(a, f(a)) : a in F_q}, viewed inside the q-by-q grid.  Distinct
polynomials agree on fewer than rho points, so any two sets intersect in
fewer than rho elements.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DegenerateInput, InfeasibleParameters
from .polyring import MultiPoly, var_sort_key

__all__ = [
    "GF",
    "Design",
    "KiMap",
    "HARD_FAMILIES",
    "build_design",
    "build_ki_map",
    "design_parameters",
    "hard_polynomial",
    "hard_degree",
    "family_sequence",
    "is_prime",
    "next_prime_power",
    "prime_power_split",
]


# --------------------------------------------------------------------------
# primes and prime powers


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def prime_power_split(m: int) -> Optional[Tuple[int, int]]:
    """Return (p, k) with m == p**k and p prime, or None."""
    if m < 2:
        return None
    for p in range(2, m + 1):
        if p * p > m:
            return (m, 1)  # m itself is prime
        if m % p:
            continue
        k = 0
        rest = m
        while rest % p == 0:
            rest //= p
            k += 1
        return (p, k) if rest == 1 else None
    return None


def next_prime_power(m: int) -> int:
    """Smallest prime power >= max(m, 2)."""
    q = max(m, 2)
    while prime_power_split(q) is None:
        q += 1
    return q


# --------------------------------------------------------------------------
# dense univariate arithmetic over F_p (coefficient lists, low degree first)


def _fp_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _fp_trim(out)

def _fp_mod(a: Sequence[int], f: Sequence[int], p: int) -> List[int]:
    # f monic
    r = list(a)
    df = len(f) - 1
    while len(r) - 1 >= df and r:
        lead = r[-1] % p
        if lead:
            shift = len(r) - 1 - df
            for i in range(df + 1):
                r[shift + i] = (r[shift + i] - lead * f[i]) % p
        r.pop()
    return _fp_trim(r)


def _fp_gcd(a: List[int], b: List[int], p: int) -> List[int]:
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        # make b monic before reducing
        inv = pow(b[-1], p - 2, p)
        b = [(c * inv) % p for c in b]
        a, b = b, _fp_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(c * inv) % p for c in a]
    return a


def _fp_powmod_x(e: int, f: Sequence[int], p: int) -> List[int]:
    """x**e reduced mod f over F_p."""
    result = [1]
    base = _fp_mod([0, 1], f, p)
    while e:
        if e & 1:
            result = _fp_mod(_fp_mul(result, base, p), f, p)
        base = _fp_mod(_fp_mul(base, base, p), f, p)
        e >>= 1
    return result


def _fp_irreducible(f: Sequence[int], p: int) -> bool:
    """Deterministic irreducibility of monic f over F_p."""
    k = len(f) - 1
    if k <= 0:
        return False
    # no irreducible factor of degree <= k // 2
    for j in range(1, k // 2 + 1):
        xq = _fp_powmod_x(p ** j, f, p)
        diff = list(xq)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        g = _fp_gcd(list(f), _fp_trim(diff), p)
        if len(g) - 1 > 0:
            return False
    return True


# --------------------------------------------------------------------------
# finite fields


class GF:
    """Arithmetic in GF(p**k).

    Elements are encoded as integers in [0, q): the base-p digits of the
    index are the coordinates in the power basis 1, t, ..., t^(k-1), with
    the constant coordinate least significant.  For k > 1 the modulus is
    the irreducible monic polynomial of degree k with the smallest integer
    encoding under the same digit convention, found by exhaustive search;
    this pins the field tables independently of any randomness.
    """

    __slots__ = ("p", "k", "q", "modulus")

    def __init__(self, q: int):
        split = prime_power_split(q)
        if split is None:
            raise DegenerateInput(f"{q} is not a prime power")
        self.p, self.k = split
        self.q = q
        if self.k == 1:
            self.modulus: Tuple[int, ...] = ()
        else:
            self.modulus = self._find_modulus()

    def _find_modulus(self) -> Tuple[int, ...]:
        p, k = self.p, self.k
        for m in range(p ** k):
            low = [(m // p ** j) % p for j in range(k)]
            f = low + [1]
            if _fp_irreducible(f, p):
                return tuple(low)
        raise InfeasibleParameters(f"no irreducible of degree {k} over F_{p}")

    # --- index <-> digit vector
    def _digits(self, a: int) -> List[int]:
        p = self.p
        return [(a // p ** j) % p for j in range(self.k)]

    def _index(self, digits: Sequence[int]) -> int:
        p = self.p
        out = 0
        for j in range(self.k - 1, -1, -1):
            out = out * p + (digits[j] % p if j < len(digits) else 0)
        return out

    def elements(self) -> Iterable[int]:
        return range(self.q)

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        da, db = self._digits(a), self._digits(b)
        return self._index([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self._index([(-x) % self.p for x in self._digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        f = list(self.modulus) + [1]
        prod = _fp_mod(_fp_mul(self._digits(a), self._digits(b), self.p), f, self.p)
        return self._index(prod)

    def power(self, a: int, e: int) -> int:
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inverse(self, a: int) -> int:
        if a == 0:
            raise DegenerateInput("zero has no inverse in a field")
        return self.power(a, self.q - 2)


# --------------------------------------------------------------------------
# designs


@dataclass(frozen=True, eq=True)
class Design:
    """A family of n subsets of [mu], each of size sigma, pairwise
    intersecting in fewer than rho elements."""

    n: int
    sigma: int
    mu: int
    rho: int
    sets: Tuple[Tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "sigma": self.sigma,
            "mu": self.mu,
            "rho": self.rho,
            "sets": [list(s) for s in self.sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> "Design":
        return Design(
            n=int(d["n"]),
            sigma=int(d["sigma"]),
            mu=int(d["mu"]),
            rho=int(d["rho"]),
            sets=tuple(tuple(int(v) for v in s) for s in d["sets"]),
        )


def _ceil_log2(m: int) -> int:
    return (m - 1).bit_length() if m > 1 else 0


def _sigma_floor(n: int, epsilon: Fraction) -> int:
    """Smallest integer s >= n**epsilon, computed exactly."""
    a, b = epsilon.numerator, epsilon.denominator
    target = n ** a
    s = 1
    while s ** b < target:
        s += 1
    return s


_Q_CAP = 1 << 16


def design_parameters(n: int, epsilon: Fraction, min_sigma: int = 0) -> Tuple[int, int]:
    """Pick (q, rho) for n sets: q is the next prime power at or above
    ceil(n**epsilon), escalated until q**rho >= n with rho = ceil(log2 n)
    capped at q.  ``min_sigma`` raises the floor on q, which lets callers
    retry with a strictly larger design when a smaller one fell through.
    """
    if n < 1:
        raise InfeasibleParameters("need at least one set")
    if not (0 < epsilon <= 1):
        raise InfeasibleParameters("epsilon must lie in (0, 1]")
    want_rho = max(1, _ceil_log2(n))
    q = next_prime_power(max(_sigma_floor(n, epsilon), min_sigma))
    while True:
        rho = min(want_rho, q)
        if n <= q ** rho:
            return q, rho
        q = next_prime_power(q + 1)
        if q > _Q_CAP:
            raise InfeasibleParameters(
                f"no workable field size below {_Q_CAP} for n={n}"
            )


def build_design(
    n: int, epsilon: Fraction = Fraction(1, 3), min_sigma: int = 0
) -> Design:
    """Construct the first n Reed-Solomon sets for the given parameters.

    Set i is the graph of the polynomial whose coefficient vector is the
    base-q digit expansion of i (constant coefficient least significant);
    grid point (a, v) is encoded as the integer a*q + v.
    """
    q, rho = design_parameters(n, epsilon, min_sigma)
    field = GF(q)
    sets: List[Tuple[int, ...]] = []
    for i in range(n):
        coeffs = [(i // q ** j) % q for j in range(rho)]
        graph = []
        for a in field.elements():
            value = 0
            apow = 1
            for c in coeffs:
                if c:
                    value = field.add(value, field.mul(c, apow))
                apow = field.mul(apow, a)
            graph.append(a * q + value)
        sets.append(tuple(sorted(graph)))
    return Design(n=n, sigma=q, mu=q * q, rho=rho, sets=tuple(sets))


# --------------------------------------------------------------------------
# hard polynomial families


HARD_FAMILIES = ("esym", "nw", "isp")


def hard_degree(sigma: int) -> int:
    """Degree for the seed polynomial: grows doubly logarithmically.

    Returns max(2, t + 1) where t is the least integer with
    2**(2**t) >= sigma.
    """
    t = 0
    while 2 ** (2 ** t) < sigma:
        t += 1
    return max(2, t + 1)


def hard_polynomial(family: str, variables: Sequence[str]) -> MultiPoly:
    """A fixed low-degree polynomial on the given variables."""
    sigma = len(variables)
    if sigma < 1:
        raise InfeasibleParameters("seed polynomial needs at least one variable")
    d = hard_degree(sigma)
    if d > sigma:
        raise InfeasibleParameters(
            f"seed degree {d} exceeds arity {sigma}"
        )
    if family == "esym":
        total = MultiPoly.zero(variables)
        for combo in itertools.combinations(range(sigma), d):
            mono = MultiPoly.constant(1, variables)
            for idx in combo:
                mono = mono * MultiPoly.variable(variables[idx])
            total = total + mono
        return total
    if family == "nw":
        total = MultiPoly.zero(variables)
        for start in range(sigma):
            mono = MultiPoly.constant(1, variables)
            for off in range(d):
                mono = mono * MultiPoly.variable(variables[(start + off) % sigma])
            total = total + mono
        return total
    if family == "isp":
        base, rem = divmod(sigma, d)
        prod = MultiPoly.constant(1, variables)
        pos = 0
        for b in range(d):
            width = base + (1 if b < rem else 0)
            block = MultiPoly.zero(variables)
            for idx in range(pos, pos + width):
                block = block + MultiPoly.variable(variables[idx])
            prod = prod * block
            pos += width
        return prod
    raise DegenerateInput(f"unknown hard family {family!r}")


def family_sequence(preferred: Optional[str] = None) -> List[str]:
    """Escalation order of seed families.

    The CIRCFACTOR_SEED_FAMILY environment variable, when set to a known
    family name, takes precedence over the caller's preference.
    """
    env = os.environ.get("CIRCFACTOR_SEED_FAMILY", "").strip()
    first = env if env in HARD_FAMILIES else None
    if first is None and preferred is not None:
        if preferred not in HARD_FAMILIES:
            raise DegenerateInput(f"unknown hard family {preferred!r}")
        first = preferred
    if first is None:
        first = HARD_FAMILIES[0]
    rest = [f for f in HARD_FAMILIES if f != first]
    return [first] + rest


# --------------------------------------------------------------------------
# the substitution map


@dataclass(frozen=True, eq=False)
class KiMap:
    """Substitution x_i -> g(w restricted to set S_i).

    `images` maps each original variable to a polynomial in the fresh
    variables w1..w_mu; substituting them into a nonzero circuit of
    moderate degree keeps it nonzero, while the number of live variables
    drops to mu.
    """

    design: Design
    family: str
    degree: int
    variables: Tuple[str, ...]
    images: Dict[str, MultiPoly]

    def w_variables(self) -> List[str]:
        return [f"w{j + 1}" for j in range(self.design.mu)]

    def evaluate_images(self, w_point: Dict[str, Fraction]) -> Dict[str, Fraction]:
        return {v: self.images[v].evaluate(w_point) for v in self.variables}

    def image_circuits(self):
        from .circuit_ir import poly_to_circuit

        return {v: poly_to_circuit(self.images[v]) for v in self.variables}

    def substitute_into(self, circuit):
        from .circuit_ir import substitute_circuit

        return substitute_circuit(circuit, self.image_circuits())


def build_ki_map(
    variables: Sequence[str],
    epsilon: Fraction = Fraction(1, 3),
    family: str = "esym",
    min_sigma: int = 0,
) -> KiMap:
    """Build the reduction map for the given circuit variables.

    Variables are assigned sets in canonical order, so two calls with the
    same arguments produce identical maps.
    """
    ordered = tuple(sorted(set(variables), key=var_sort_key))
    if not ordered:
        raise InfeasibleParameters("no variables to map")
    if family not in HARD_FAMILIES:
        raise DegenerateInput(f"unknown hard family {family!r}")
    design = build_design(len(ordered), epsilon, min_sigma)
    slots = [f"s{j}" for j in range(design.sigma)]
    g = hard_polynomial(family, slots)
    w_names = [f"w{j + 1}" for j in range(design.mu)]
    images: Dict[str, MultiPoly] = {}
    for var, chosen in zip(ordered, design.sets):
        target = [w_names[j] for j in chosen]
        images[var] = g.substitute(
            {s: MultiPoly.variable(t) for s, t in zip(slots, target)}
        )
    return KiMap(
        design=design,
        family=family,
        degree=hard_degree(design.sigma),
        variables=ordered,
        images=images,
    )
