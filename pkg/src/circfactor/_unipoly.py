"""Dense univariate machinery for the factorization engine.

Coefficient lists run low degree first.  Three layers live here: exact
rational arithmetic for quotients / gcd / squarefree splitting, arithmetic
mod small primes for Berlekamp factorization, and integer Hensel lifting
with subset recombination — together a deterministic Zassenhaus
factorization over Q.  Everything is list-based; the engine wraps the
results back into sparse polynomials.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import List, Sequence, Tuple

from .errors import CapExceeded, DegenerateInput, InexactDivision

RECOMBINATION_CAP = 1 << 20


# --------------------------------------------------------------------------
# rational dense arithmetic


def trim(a: List[Fraction]) -> List[Fraction]:
    while a and a[-1] == 0:
        a.pop()
    return a


def degree(a: Sequence[Fraction]) -> int:
    return len(a) - 1


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return trim(out)


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    return add(a, [-c for c in b])


def mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return trim(out)


def scale(a: Sequence[Fraction], c: Fraction) -> List[Fraction]:
    return trim([x * c for x in a])


def deriv(a: Sequence[Fraction]) -> List[Fraction]:
    return trim([a[i] * i for i in range(1, len(a))])


def poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> Tuple[List[Fraction], List[Fraction]]:
    b = trim([Fraction(c) for c in b])
    if not b:
        raise DegenerateInput("division by the zero polynomial")
    r = trim([Fraction(c) for c in a])
    db = degree(b)
    if degree(r) < db:
        return [], r
    inv = Fraction(1) / b[-1]
    q = [Fraction(0)] * (len(r) - db)
    while len(r) - 1 >= db:
        if r[-1] == 0:
            r.pop()
            continue
        shift = len(r) - 1 - db
        c = r[-1] * inv
        q[shift] = c
        for i in range(db + 1):
            r[shift + i] -= c * b[i]
        r.pop()
    return trim(q), trim(r)


def exact_quot(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    q, r = poly_divmod(a, b)
    if r:
        raise InexactDivision("univariate division left a remainder")
    return q


def monic(a: Sequence[Fraction]) -> List[Fraction]:
    if not a:
        return []
    inv = Fraction(1) / a[-1]
    return [c * inv for c in a]


def gcd_q(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return monic(a)


def yun_squarefree(f: Sequence[Fraction]) -> List[Tuple[List[Fraction], int]]:
    """Squarefree split of a monic rational polynomial: f = prod part^mult."""
    f = trim(list(f))
    if degree(f) < 1:
        return []
    fp = deriv(f)
    g = gcd_q(f, fp)
    c = exact_quot(f, g)
    d = sub(exact_quot(fp, g), deriv(c))
    out: List[Tuple[List[Fraction], int]] = []
    i = 1
    while degree(c) > 0:
        p = gcd_q(c, d)
        if degree(p) > 0:
            out.append((monic(p), i))
        c = exact_quot(c, p)
        d = sub(exact_quot(d, p), deriv(c))
        i += 1
    return out


# --------------------------------------------------------------------------
# arithmetic mod p (int lists)


def _p_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _p_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _p_trim(out)


def _p_divmod(a: Sequence[int], b: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    b = _p_trim([c % p for c in b])
    if not b:
        raise DegenerateInput("division by the zero polynomial")
    r = _p_trim([c % p for c in a])
    db = len(b) - 1
    if len(r) - 1 < db:
        return [], r
    inv = pow(b[-1], p - 2, p)
    q = [0] * (len(r) - db)
    while len(r) - 1 >= db:
        if r[-1] == 0:
            r.pop()
            continue
        shift = len(r) - 1 - db
        c = (r[-1] * inv) % p
        q[shift] = c
        for i in range(db + 1):
            r[shift + i] = (r[shift + i] - c * b[i]) % p
        r.pop()
    return _p_trim(q), _p_trim(r)


def _p_gcd(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    a, b = _p_trim(list(a)), _p_trim(list(b))
    while b:
        a, b = b, _p_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(c * inv) % p for c in a]
    return a


def _p_powmod(base: Sequence[int], e: int, f: Sequence[int], p: int) -> List[int]:
    result = [1]
    b = _p_divmod(base, f, p)[1]
    while e:
        if e & 1:
            result = _p_divmod(_p_mul(result, b, p), f, p)[1]
        b = _p_divmod(_p_mul(b, b, p), f, p)[1]
        e >>= 1
    return result


def _p_deriv(a: Sequence[int], p: int) -> List[int]:
    return _p_trim([(a[i] * i) % p for i in range(1, len(a))])


# --------------------------------------------------------------------------
# Berlekamp factorization of a monic squarefree polynomial mod p


def _nullspace_mod_p(mat: List[List[int]], p: int) -> List[List[int]]:
    """Deterministic kernel basis of a square matrix over F_p."""
    n = len(mat)
    m = [row[:] for row in mat]
    pivot_col_of_row: List[int] = []
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, n):
            if m[r][col] % p:
                sel = r
                break
        if sel is None:
            continue
        m[row], m[sel] = m[sel], m[row]
        inv = pow(m[row][col], p - 2, p)
        m[row] = [(v * inv) % p for v in m[row]]
        for r in range(n):
            if r != row and m[r][col] % p:
                factor = m[r][col]
                m[r] = [(m[r][j] - factor * m[row][j]) % p for j in range(n)]
        pivot_col_of_row.append(col)
        row += 1
    pivots = set(pivot_col_of_row)
    basis: List[List[int]] = []
    for free in range(n):
        if free in pivots:
            continue
        v = [0] * n
        v[free] = 1
        for r, pc in enumerate(pivot_col_of_row):
            v[pc] = (-m[r][free]) % p
        basis.append(v)
    return basis


def berlekamp(f: Sequence[int], p: int) -> List[List[int]]:
    """Monic irreducible factors of a monic squarefree f over F_p."""
    f = [c % p for c in f]
    d = len(f) - 1
    if d <= 1:
        return [list(f)]
    xp = _p_powmod([0, 1], p, f, p)
    # Frobenius matrix: column j holds x^(j*p) mod f
    cols: List[List[int]] = [[1] + [0] * (d - 1)]
    for _ in range(1, d):
        nxt = _p_divmod(_p_mul(cols[-1], xp, p), f, p)[1]
        cols.append(nxt + [0] * (d - len(nxt)))
    frob_minus_i = [
        [(cols[j][i] - (1 if i == j else 0)) % p for j in range(d)]
        for i in range(d)
    ]
    basis = _nullspace_mod_p(frob_minus_i, p)
    r = len(basis)
    if r == 1:
        return [list(f)]
    factors = [list(f)]
    for v in basis:
        vec = _p_trim(list(v))
        if degree_int(vec) < 1:
            continue
        if len(factors) == r:
            break
        nxt: List[List[int]] = []
        for w in factors:
            pieces = [w]
            for c in range(p):
                shifted = list(vec)
                shifted[0] = (shifted[0] - c) % p
                new_pieces: List[List[int]] = []
                for piece in pieces:
                    if len(piece) - 1 <= 1:
                        new_pieces.append(piece)
                        continue
                    g = _p_gcd(piece, shifted, p)
                    if 0 < len(g) - 1 < len(piece) - 1:
                        new_pieces.append(g)
                        new_pieces.append(_p_divmod(piece, g, p)[0])
                    else:
                        new_pieces.append(piece)
                pieces = new_pieces
            nxt.extend(pieces)
        factors = nxt
        if len(factors) == r:
            break
    factors.sort(key=lambda g: (len(g), g))
    return factors


def degree_int(a: Sequence[int]) -> int:
    return len(a) - 1


# --------------------------------------------------------------------------
# Hensel lifting over Z (monic everywhere)


def _m_trimmed(a: Sequence[int], m: int) -> List[int]:
    out = [c % m for c in a]
    while out and out[-1] == 0:
        out.pop()
    return out


def _m_mul(a: Sequence[int], b: Sequence[int], m: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % m
    return _m_trimmed(out, m)


def _m_add(a: Sequence[int], b: Sequence[int], m: int) -> List[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c % m
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % m
    return _m_trimmed(out, m)


def _m_sub(a: Sequence[int], b: Sequence[int], m: int) -> List[int]:
    return _m_add(a, [-c for c in b], m)


def _m_divmod_monic(a: Sequence[int], b: Sequence[int], m: int) -> Tuple[List[int], List[int]]:
    r = [c % m for c in a]
    db = len(b) - 1
    q = [0] * max(0, len(r) - db)
    while len(r) - 1 >= db and _m_trimmed(r, m):
        shift = len(r) - 1 - db
        c = r[-1] % m
        q[shift] = c
        for i in range(db + 1):
            r[shift + i] = (r[shift + i] - c * b[i]) % m
        r.pop()
    return _m_trimmed(q, m), _m_trimmed(r, m)


def _bezout_mod_p(g: Sequence[int], h: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    """s, t with s*g + t*h = 1 mod p for coprime monic g, h."""
    r0, r1 = _p_trim([c % p for c in g]), _p_trim([c % p for c in h])
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _p_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _p_trim([(a - b) % p for a, b in _zip_pad(s0, _p_mul(q, s1, p))])
        t0, t1 = t1, _p_trim([(a - b) % p for a, b in _zip_pad(t0, _p_mul(q, t1, p))])
    if degree_int(r0) != 0:
        raise DegenerateInput("polynomials are not coprime mod p")
    inv = pow(r0[0], p - 2, p)
    return [(c * inv) % p for c in s0], [(c * inv) % p for c in t0]


def _zip_pad(a: Sequence[int], b: Sequence[int]):
    n = max(len(a), len(b))
    for i in range(n):
        yield (a[i] if i < len(a) else 0, b[i] if i < len(b) else 0)


def _hensel_step(f, g, h, s, t, m):
    """One quadratic step: valid mod m -> valid mod m^2 (all monic)."""
    m2 = m * m
    e = _m_sub(f, _m_mul(g, h, m2), m2)
    q, r = _m_divmod_monic(_m_mul(s, e, m2), h, m2)
    g1 = _m_add(_m_add(g, _m_mul(t, e, m2), m2), _m_mul(q, g, m2), m2)
    h1 = _m_add(h, r, m2)
    b = _m_sub(_m_add(_m_mul(s, g1, m2), _m_mul(t, h1, m2), m2), [1], m2)
    c, d = _m_divmod_monic(_m_mul(s, b, m2), h1, m2)
    s1 = _m_sub(s, d, m2)
    t1 = _m_sub(_m_sub(t, _m_mul(t, b, m2), m2), _m_mul(c, g1, m2), m2)
    return g1, h1, s1, t1


def _lift_pair(f, g0, h0, p, target):
    """Lift f ≡ g0*h0 (mod p) to modulus ≥ target; returns (g, h, modulus)."""
    s, t = _bezout_mod_p(g0, h0, p)
    g, h, m = list(g0), list(h0), p
    while m < target:
        g, h, s, t = _hensel_step(f, g, h, s, t, m)
        m = m * m
    return g, h, m


def hensel_lift_multi(f: Sequence[int], factors: List[List[int]], p: int, target: int) -> Tuple[List[List[int]], int]:
    """Lift a monic mod-p factorization of monic integer f to modulus ≥ target.

    Returns the lifted monic factors and the common modulus actually used
    (a power of p, identical across the recursion).
    """
    modulus = p
    while modulus < target:
        modulus = modulus * modulus

    def rec(fk: List[int], parts: List[List[int]]) -> List[List[int]]:
        if len(parts) == 1:
            return [_m_trimmed(fk, modulus)]
        k = len(parts) // 2
        g0 = [1]
        for q in parts[:k]:
            g0 = _p_mul(g0, q, p)
        h0 = [1]
        for q in parts[k:]:
            h0 = _p_mul(h0, q, p)
        g, h, _ = _lift_pair(fk, g0, h0, p, modulus)
        return rec(g, parts[:k]) + rec(h, parts[k:])

    return rec(_m_trimmed(f, modulus), factors), modulus


# --------------------------------------------------------------------------
# Zassenhaus over Z for monic squarefree integer input


def _symmetric(c: int, m: int) -> int:
    c %= m
    return c - m if c > m // 2 else c


def _int_divmod_monic(a: Sequence[int], b: Sequence[int]) -> Tuple[List[int], List[int]]:
    r = list(a)
    db = len(b) - 1
    q = [0] * max(0, len(r) - db)
    while len(r) - 1 >= db and r:
        if r[-1] == 0:
            r.pop()
            continue
        shift = len(r) - 1 - db
        c = r[-1]
        q[shift] = c
        for i in range(db + 1):
            r[shift + i] -= c * b[i]
        r.pop()
    while r and r[-1] == 0:
        r.pop()
    return q, r


def _mignotte_target(f: Sequence[int]) -> int:
    d = len(f) - 1
    norm = math.isqrt(sum(c * c for c in f)) + 1
    return 2 * (2 ** d) * norm + 1


def _primes():
    yield 2
    yield 3
    n = 5
    while True:
        for q in (n, n + 2):
            ok = True
            r = 3
            while r * r <= q:
                if q % r == 0:
                    ok = False
                    break
                r += 2
            if ok:
                yield q
        n += 6


def zassenhaus_monic(f: Sequence[int]) -> List[List[int]]:
    """Monic irreducible integer factors of a monic squarefree integer poly."""
    f = list(f)
    d = len(f) - 1
    if d <= 1:
        return [f]
    for p in _primes():
        fp = [c % p for c in f]
        if degree_int(_p_gcd(fp, _p_deriv(fp, p), p)) != 0:
            continue  # not squarefree mod p
        modular = berlekamp(fp, p)
        if len(modular) == 1:
            return [f]
        target = _mignotte_target(f)
        lifted, modulus = hensel_lift_multi(f, modular, p, target)
        return _recombine(f, lifted, modulus)
    raise DegenerateInput("prime sequence exhausted")  # pragma: no cover


def _recombine(f: List[int], lifted: List[List[int]], modulus: int) -> List[List[int]]:
    result: List[List[int]] = []
    pool = list(range(len(lifted)))
    attempts = 0
    size = 1
    while pool and size <= len(pool):
        found = False
        for combo in itertools.combinations(pool, size):
            attempts += 1
            if attempts > RECOMBINATION_CAP:
                raise CapExceeded("factor recombination subset cap exceeded")
            cand = [1]
            for i in combo:
                cand = _m_mul(cand, lifted[i], modulus)
            cand_sym = [_symmetric(c, modulus) for c in cand]
            while cand_sym and cand_sym[-1] == 0:
                cand_sym.pop()
            q, r = _int_divmod_monic(f, cand_sym)
            if not r:
                result.append(cand_sym)
                f = q
                pool = [i for i in pool if i not in combo]
                found = True
                break
        if not found:
            size += 1
    if len(f) - 1 >= 1:
        result.append(f)
    result.sort(key=lambda g: (len(g), g))
    return result


# --------------------------------------------------------------------------
# rational front end


def factor_rational(coeffs: Sequence[Fraction]) -> Tuple[Fraction, List[Tuple[List[Fraction], int]]]:
    """Full factorization over Q of a dense rational polynomial.

    Returns (unit, [(monic irreducible, multiplicity)]), sorted by degree
    then coefficients for determinism.
    """
    f = trim([Fraction(c) for c in coeffs])
    if degree(f) < 1:
        raise DegenerateInput("need degree at least 1 to factor")
    unit = f[-1]
    f = monic(f)
    out: List[Tuple[List[Fraction], int]] = []
    for part, mult in yun_squarefree(f):
        for irr in _factor_monic_squarefree(part):
            out.append((irr, mult))
    out.sort(key=lambda t: (len(t[0]), t[0], t[1]))
    return unit, out


def _factor_monic_squarefree(part: List[Fraction]) -> List[List[Fraction]]:
    d = degree(part)
    if d == 1:
        return [part]
    lam = 1
    for c in part:
        lam = lam * c.denominator // math.gcd(lam, c.denominator)
    # m(y) = lam^(d) * part(y / lam) is monic with integer coefficients
    m = [int(part[i] * lam ** (d - i)) for i in range(d + 1)]
    pieces = zassenhaus_monic(m)
    out: List[List[Fraction]] = []
    for piece in pieces:
        dd = len(piece) - 1
        # map back: q(y) = piece(lam * y) / lam^dd, then monic over Q
        q = [Fraction(piece[i], 1) * Fraction(lam) ** i / Fraction(lam) ** dd for i in range(dd + 1)]
        out.append(monic(q))
    return out
