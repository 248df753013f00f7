"""Algebraic circuits: DAGs of unbounded fan-in + and * gates over Q.

Nodes are ("in", var), ("const", Fraction), ("add", ids) or ("mul", ids),
stored in topological order; size is the edge count and depth the longest
leaf-to-output path in edges.  The builder hash-conses structurally identical
gates (no other common-subexpression elimination is attempted).

The polynomial-level transforms (derivative, truncation, homogeneous
component) follow the interpolation recipe: evaluate the circuit at the
integer nodes 0..d in the relevant variable(s) and recombine with rational
weights, so every output is again a division-free circuit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import (
    ArityMismatch,
    CapExceeded,
    CircuitSyntaxError,
    CycleError,
    DegenerateInput,
    DimensionMismatch,
    InexactDivision,
    MissingAssignment,
    UnknownIdentifier,
    ZeroDivisorAtPoint,
)
from .polyring import MultiPoly, lagrange_matrix, var_sort_key
from .scalars import parse_rational

Node = tuple
_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

DEFAULT_DET_DIM_CAP = 64
DEFAULT_MONOMIAL_CAP = 2_000_000


class Circuit:
    """Immutable circuit; construct through CircuitBuilder or the parser."""

    __slots__ = ("nodes", "outputs")

    def __init__(self, nodes: Sequence[Node], outputs: Sequence[int]):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "outputs", tuple(outputs))
        if not self.outputs:
            raise DegenerateInput("circuit must have at least one output")

    def __setattr__(self, name, value):
        raise AttributeError("Circuit is immutable")

    def variables(self) -> tuple[str, ...]:
        vs = {n[1] for n in self.nodes if n[0] == "in"}
        return tuple(sorted(vs, key=var_sort_key))

    def size(self) -> int:
        return sum(len(n[1]) for n in self.nodes if n[0] in ("add", "mul"))

    def depth(self) -> int:
        d = [0] * len(self.nodes)
        for i, n in enumerate(self.nodes):
            if n[0] in ("add", "mul"):
                d[i] = 1 + max(d[j] for j in n[1])
        return max((d[i] for i in self.outputs), default=0)

    def single_output(self) -> int:
        if len(self.outputs) != 1:
            raise DimensionMismatch("expected a single-output circuit")
        return self.outputs[0]


class CircuitBuilder:
    def __init__(self):
        self.nodes: list[Node] = []
        self._memo: dict = {}

    def _intern(self, node: Node) -> int:
        got = self._memo.get(node)
        if got is not None:
            return got
        self.nodes.append(node)
        idx = len(self.nodes) - 1
        self._memo[node] = idx
        return idx

    def inp(self, var: str) -> int:
        return self._intern(("in", var))

    def const(self, value) -> int:
        return self._intern(("const", Fraction(value)))

    def add(self, children: Sequence[int]) -> int:
        if not children:
            raise ArityMismatch("add gate needs at least one child")
        if len(children) == 1:
            return children[0]
        return self._intern(("add", tuple(children)))

    def mul(self, children: Sequence[int]) -> int:
        if not children:
            raise ArityMismatch("mul gate needs at least one child")
        if len(children) == 1:
            return children[0]
        return self._intern(("mul", tuple(children)))

    def splice(self, circuit: Circuit, input_map: Mapping[str, int] | None = None) -> list[int]:
        """Copy circuit into this builder; returns new ids of its outputs.
        input_map may redirect input variables to existing node ids."""
        remap: list[int] = []
        for n in circuit.nodes:
            if n[0] == "in":
                if input_map and n[1] in input_map:
                    remap.append(input_map[n[1]])
                else:
                    remap.append(self.inp(n[1]))
            elif n[0] == "const":
                remap.append(self.const(n[1]))
            else:
                kids = tuple(remap[j] for j in n[1])
                remap.append(self.add(kids) if n[0] == "add" else self.mul(kids))
        return [remap[o] for o in circuit.outputs]

    def build(self, outputs: Sequence[int]) -> Circuit:
        return Circuit(self.nodes, outputs)


# ---------- text format ----------


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format:

        # comment
        input x1
        node n1 = mul x1 x1
        node n2 = add n1 c(-1/2)
        node k  = c(7)
        output n2
    """
    builder = CircuitBuilder()
    env: dict[str, int] = {}
    all_node_names: set[str] = set()
    outputs: list[int] = []
    lines = text.splitlines()
    for raw in lines:
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = re.match(r"^\s*node\s+([A-Za-z_][A-Za-z0-9_]*)\s*=", raw.split("#", 1)[0])
        if m:
            all_node_names.add(m.group(1))

    def fail(msg: str, lineno: int, col: int):
        raise CircuitSyntaxError(msg, lineno, col)

    def resolve(ref: str, lineno: int, col: int) -> int:
        if ref.startswith("c(") and ref.endswith(")"):
            try:
                return builder.const(parse_rational(ref[2:-1]))
            except DegenerateInput as e:
                fail(str(e), lineno, col)
        if ref in env:
            return env[ref]
        if ref in all_node_names:
            raise CycleError(f"reference to node {ref!r} before its definition")
        raise UnknownIdentifier(f"unknown identifier {ref!r}")

    for lineno, raw in enumerate(lines, start=1):
        code = raw.split("#", 1)[0]
        line = code.strip()
        if not line:
            continue
        col = len(code) - len(code.lstrip()) + 1
        tokens = line.split()
        head = tokens[0]
        if head == "input":
            if len(tokens) != 2:
                fail("input takes exactly one variable name", lineno, col)
            name = tokens[1]
            if not _ID_RE.match(name):
                fail(f"bad variable name {name!r}", lineno, col)
            if name in env or name in all_node_names:
                fail(f"duplicate identifier {name!r}", lineno, col)
            env[name] = builder.inp(name)
        elif head == "node":
            m = re.match(r"^node\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$", line)
            if not m:
                fail("malformed node statement", lineno, col)
            name, rhs = m.group(1), m.group(2).strip()
            if name in env:
                fail(f"duplicate identifier {name!r}", lineno, col)
            cm = re.fullmatch(r"c\(\s*(-?\d+(?:/\d+)?)\s*\)", rhs)
            if cm:
                env[name] = builder.const(parse_rational(cm.group(1)))
                continue
            parts = rhs.split()
            op, refs = parts[0], parts[1:]
            if op not in ("add", "mul"):
                fail(f"unknown operation {op!r}", lineno, col)
            if not refs:
                fail(f"{op} gate needs at least one operand", lineno, col)
            ids = [resolve(r, lineno, col) for r in refs]
            env[name] = builder.add(ids) if op == "add" else builder.mul(ids)
        elif head == "output":
            if len(tokens) != 2:
                fail("output takes exactly one reference", lineno, col)
            outputs.append(resolve(tokens[1], lineno, col))
        else:
            fail(f"unknown statement {head!r}", lineno, col)
    if not outputs:
        raise CircuitSyntaxError("circuit has no output statement", len(lines) or 1, 1)
    return builder.build(outputs)


def serialize_circuit(circuit: Circuit) -> str:
    """Deterministic text form; parse(serialize(c)) evaluates identically."""
    lines: list[str] = []
    names: dict[int, str] = {}
    counter = 0
    for i, n in enumerate(circuit.nodes):
        if n[0] == "in":
            names[i] = n[1]
    for v in circuit.variables():
        lines.append(f"input {v}")
    for i, n in enumerate(circuit.nodes):
        if n[0] == "in":
            continue
        name = f"n{counter}"
        counter += 1
        names[i] = name
        if n[0] == "const":
            lines.append(f"node {name} = c({n[1]})")
        else:
            refs = " ".join(names[j] for j in n[1])
            lines.append(f"node {name} = {n[0]} {refs}")
    for o in circuit.outputs:
        lines.append(f"output {names[o]}")
    return "\n".join(lines) + "\n"


# ---------- evaluation ----------


def eval_all(circuit: Circuit, point: Mapping[str, object]) -> list:
    vals: list = [None] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        kind = n[0]
        if kind == "in":
            if n[1] not in point:
                raise MissingAssignment(f"no value for input {n[1]!r}")
            v = point[n[1]]
            vals[i] = Fraction(v) if isinstance(v, int) else v
        elif kind == "const":
            vals[i] = n[1]
        elif kind == "add":
            acc = vals[n[1][0]]
            for j in n[1][1:]:
                acc = acc + vals[j]
            vals[i] = acc
        else:
            acc = vals[n[1][0]]
            for j in n[1][1:]:
                acc = acc * vals[j]
            vals[i] = acc
    return [vals[o] for o in circuit.outputs]


def eval_circuit(circuit: Circuit, point: Mapping[str, object]):
    """Evaluate; returns the single output value, or a list for multi-output."""
    out = eval_all(circuit, point)
    return out[0] if len(out) == 1 else out


# ---------- degree bounds ----------


@dataclass(frozen=True)
class DegreeBound:
    total: int
    per_var: dict


def degree_bound(circuit: Circuit) -> DegreeBound:
    """Sound structural bounds: inputs 1, constants 0, add max, mul sum."""
    vs = circuit.variables()
    idx = {v: i for i, v in enumerate(vs)}
    zeros = (0,) * len(vs)
    per: list[tuple[int, ...]] = []
    tot: list[int] = []
    for n in circuit.nodes:
        if n[0] == "in":
            e = list(zeros)
            e[idx[n[1]]] = 1
            per.append(tuple(e))
            tot.append(1)
        elif n[0] == "const":
            per.append(zeros)
            tot.append(0)
        elif n[0] == "add":
            per.append(tuple(max(per[j][k] for j in n[1]) for k in range(len(vs))))
            tot.append(max(tot[j] for j in n[1]))
        else:
            per.append(tuple(sum(per[j][k] for j in n[1]) for k in range(len(vs))))
            tot.append(sum(tot[j] for j in n[1]))
    agg_per = {v: max((per[o][idx[v]] for o in circuit.outputs), default=0) for v in vs}
    agg_tot = max(tot[o] for o in circuit.outputs)
    return DegreeBound(total=agg_tot, per_var=agg_per)


# ---------- structural transforms ----------


def substitute_circuit(circuit: Circuit, images: Mapping[str, Union[Circuit, int, Fraction]]) -> Circuit:
    """Replace input variables by circuits or rational constants."""
    builder = CircuitBuilder()
    input_map: dict[str, int] = {}
    for v, im in images.items():
        if isinstance(im, Circuit):
            outs = builder.splice(im)
            if len(outs) != 1:
                raise DimensionMismatch("substitution image must have one output")
            input_map[v] = outs[0]
        else:
            input_map[v] = builder.const(im)
    outs = builder.splice(circuit, input_map)
    return builder.build(outs)


def poly_to_circuit(p: MultiPoly) -> Circuit:
    """Depth-2 (plus power chains) circuit computing a rational polynomial."""
    if p.field() is not None:
        raise DegenerateInput("circuits carry rational constants only")
    builder = CircuitBuilder()
    out = _splice_poly(builder, p)
    return builder.build([out])


def _splice_poly(builder: CircuitBuilder, p: MultiPoly) -> int:
    if not p.terms:
        return builder.const(0)

    def power(var: str, k: int) -> int:
        base = builder.inp(var)
        if k == 1:
            return base
        half = power(var, k // 2)
        kids = [half, half] + ([builder.inp(var)] if k % 2 else [])
        return builder.mul(kids)

    terms = []
    for e, c in p.sorted_terms():
        factors = [power(v, k) for v, k in zip(p.variables, e) if k > 0]
        if not factors:
            terms.append(builder.const(c))
        elif c == 1:
            terms.append(builder.mul(factors) if len(factors) > 1 else factors[0])
        else:
            terms.append(builder.mul([builder.const(c)] + factors))
    return builder.add(terms)


def _scaled_substitution(builder: CircuitBuilder, circuit: Circuit, vars: Sequence[str], factor: Fraction) -> int:
    """Splice circuit with each v in vars replaced by factor*v."""
    input_map: dict[str, int] = {}
    for v in vars:
        if factor == 0:
            input_map[v] = builder.const(0)
        else:
            input_map[v] = builder.mul([builder.const(factor), builder.inp(v)])
    outs = builder.splice(circuit, input_map)
    return outs[0]


def _weights_combination(
    circuit: Circuit, vars: Sequence[str], weights: Sequence[Fraction]
) -> Circuit:
    """sum_j weights[j] * circuit(vars scaled by j) as one circuit."""
    builder = CircuitBuilder()
    parts: list[int] = []
    for j, w in enumerate(weights):
        if w == 0:
            continue
        sub = _scaled_substitution(builder, circuit, vars, Fraction(j))
        parts.append(builder.mul([builder.const(w), sub]))
    if not parts:
        return builder.build([builder.const(0)])
    return builder.build([builder.add(parts)])


def hom_component_circuit(circuit: Circuit, vars: Sequence[str], degree: int) -> Circuit:
    """Circuit for the weight-`degree` homogeneous component in vars."""
    d = max(0, _weighted_bound(circuit, vars))
    if degree > d:
        b = CircuitBuilder()
        return b.build([b.const(0)])
    beta = lagrange_matrix([Fraction(j) for j in range(d + 1)])
    return _weights_combination(circuit, vars, beta[degree])


def truncate_circuit(circuit: Circuit, vars: Sequence[str], k: int) -> Circuit:
    """Circuit computing the polynomial with all vars-degree >= k terms dropped."""
    if k <= 0:
        b = CircuitBuilder()
        return b.build([b.const(0)])
    d = max(0, _weighted_bound(circuit, vars))
    if k > d:
        return circuit
    beta = lagrange_matrix([Fraction(j) for j in range(d + 1)])
    gamma = [sum((beta[i][j] for i in range(min(k, d + 1))), Fraction(0)) for j in range(d + 1)]
    return _weights_combination(circuit, vars, gamma)


def derivative_circuit(circuit: Circuit, var: str, order: int = 1) -> Circuit:
    """Exact order-th partial derivative (not divided by order!)."""
    if order == 0:
        return circuit
    d = degree_bound(circuit).per_var.get(var, 0)
    builder = CircuitBuilder()
    if order > d:
        return builder.build([builder.const(0)])
    beta = lagrange_matrix([Fraction(j) for j in range(d + 1)])
    # mu_j(y) = sum_{m>=order} beta[m][j] * m!/(m-order)! * y^(m-order)
    parts: list[int] = []
    for j in range(d + 1):
        coeffs: list[Fraction] = []
        for m in range(order, d + 1):
            fall = 1
            for t in range(order):
                fall *= m - t
            coeffs.append(beta[m][j] * fall)
        mu = MultiPoly.from_coeffs_in(var, [MultiPoly.constant(c, ()) for c in coeffs])
        if mu.is_zero():
            continue
        sub = builder.splice(circuit, {var: builder.const(j)})[0]
        mu_id = _splice_poly(builder, mu)
        parts.append(builder.mul([mu_id, sub]))
    if not parts:
        return builder.build([builder.const(0)])
    return builder.build([builder.add(parts)])


def coefficient_circuits(circuit: Circuit, var: str, degree: int | None = None) -> list[Circuit]:
    """Circuits for the coefficients of var^0..var^degree (each var-free)."""
    d = degree_bound(circuit).per_var.get(var, 0) if degree is None else degree
    beta = lagrange_matrix([Fraction(j) for j in range(d + 1)])
    out: list[Circuit] = []
    for i in range(d + 1):
        builder = CircuitBuilder()
        parts: list[int] = []
        for j in range(d + 1):
            if beta[i][j] == 0:
                continue
            sub = builder.splice(circuit, {var: builder.const(j)})[0]
            parts.append(builder.mul([builder.const(beta[i][j]), sub]))
        out.append(builder.build([builder.add(parts)] if parts else [builder.const(0)]))
    return out


def _weighted_bound(circuit: Circuit, vars: Sequence[str]) -> int:
    """Structural bound on the total degree in the selected variables only."""
    vs = set(vars)
    idx_nodes: list[int] = []
    for n in circuit.nodes:
        if n[0] == "in":
            idx_nodes.append(1 if n[1] in vs else 0)
        elif n[0] == "const":
            idx_nodes.append(0)
        elif n[0] == "add":
            idx_nodes.append(max(idx_nodes[j] for j in n[1]))
        else:
            idx_nodes.append(sum(idx_nodes[j] for j in n[1]))
    return max(idx_nodes[o] for o in circuit.outputs)


# ---------- determinant circuits (Berkowitz, division-free) ----------


def determinant_circuit(matrix: Sequence[Sequence[Circuit]], dim_cap: int = DEFAULT_DET_DIM_CAP) -> Circuit:
    """Single-output circuit computing det of a square matrix of circuits."""
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise DimensionMismatch("determinant needs a nonempty square matrix")
    if n > dim_cap:
        raise CapExceeded(f"determinant dimension {n} exceeds cap {dim_cap}")
    builder = CircuitBuilder()
    ids = [[builder.splice(matrix[i][j])[0] for j in range(n)] for i in range(n)]
    det = _berkowitz(builder, ids)
    return builder.build([det])


def _berkowitz(builder: CircuitBuilder, a: list[list[int]]) -> int:
    """Characteristic-polynomial recursion; returns the determinant node."""
    n = len(a)
    one = builder.const(1)
    neg_one = builder.const(-1)

    def neg(x: int) -> int:
        return builder.mul([neg_one, x])

    def dot(u: list[int], v: list[int]) -> int:
        return builder.add([builder.mul([x, y]) for x, y in zip(u, v)])

    # p holds the characteristic polynomial of the leading r x r block,
    # coefficients from lambda^r down to the constant term.
    p = [one, neg(a[0][0])]
    for r in range(2, n + 1):
        row = [a[r - 1][j] for j in range(r - 1)]
        col = [a[i][r - 1] for i in range(r - 1)]
        d = a[r - 1][r - 1]
        seq = [one, neg(d)]
        s = col
        for _ in range(r - 1):
            seq.append(neg(dot(row, s)))
            if len(seq) < r + 1:
                s = [dot(a[i][: r - 1], s) for i in range(r - 1)]
        seq = seq[: r + 1]
        newp = []
        for i in range(r + 1):
            lo = max(0, i - r)
            hi = min(i, r - 1)
            terms = [builder.mul([seq[i - j], p[j]]) for j in range(lo, hi + 1)]
            newp.append(builder.add(terms))
        p = newp
    det = p[-1]
    if n % 2 == 1:
        det = neg(det)
    return det


# ---------- division elimination ----------


def eliminate_division(
    numerator: Circuit,
    divisor: Circuit,
    point: Mapping[str, Fraction],
    quotient_degree: int,
    check_points: int = 50,
) -> Circuit:
    """Division-free circuit for numerator/divisor, assuming the division is
    exact and the quotient has total degree <= quotient_degree.

    Strassen's recipe: shift so the divisor has nonzero constant term, expand
    the inverse as a truncated geometric series, multiply, truncate, unshift.
    """
    vars = sorted(set(numerator.variables()) | set(divisor.variables()), key=var_sort_key)
    b0 = eval_circuit(divisor, {v: point.get(v, Fraction(0)) for v in divisor.variables()})
    if b0 == 0:
        raise ZeroDivisorAtPoint("divisor vanishes at the chosen point")

    def shift(c: Circuit, sign: int) -> Circuit:
        builder = CircuitBuilder()
        imap: dict[str, int] = {}
        for v in c.variables():
            off = point.get(v, Fraction(0)) * sign
            if off == 0:
                continue
            imap[v] = builder.add([builder.inp(v), builder.const(off)])
        outs = builder.splice(c, imap)
        return builder.build(outs)

    num_s = shift(numerator, +1)
    div_s = shift(divisor, +1)

    builder = CircuitBuilder()
    div_id = builder.splice(div_s)[0]
    # btilde = 1 - divisor/b0 has zero constant term after the shift
    btilde = builder.add([builder.const(1), builder.mul([builder.const(Fraction(-1) / b0), div_id])])
    powers = [builder.const(1)]
    for _ in range(quotient_degree):
        powers.append(builder.mul([powers[-1], btilde]))
    series = builder.add(powers)
    num_id = builder.splice(num_s)[0]
    quot = builder.mul([builder.const(Fraction(1) / b0), num_id, series])
    raw = builder.build([quot])
    truncated = truncate_circuit(raw, vars, quotient_degree + 1)
    result = shift(truncated, -1)

    _division_check(numerator, divisor, result, vars, check_points)
    return result


def _division_check(num: Circuit, div: Circuit, quo: Circuit, vars: Sequence[str], count: int):
    for pt in deterministic_points(vars, count):
        nv = eval_circuit(num, pt) if num.variables() else eval_circuit(num, {})
        dv = eval_circuit(div, pt)
        qv = eval_circuit(quo, pt)
        if nv != dv * qv:
            raise InexactDivision("quotient check failed at a sample point")


def deterministic_points(vars: Sequence[str], count: int, spread: int = 19) -> list[dict[str, Fraction]]:
    """Fixed pseudorandom rational points (small integers), reproducible."""
    state = 0x2545F4914F6CDD1D
    pts = []
    for _ in range(count):
        pt = {}
        for v in vars:
            state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
            pt[v] = Fraction((state >> 33) % (2 * spread + 1) - spread)
        pts.append(pt)
    return pts


# ---------- densification ----------


def dense_from_circuit(circuit: Circuit, monomial_cap: int = DEFAULT_MONOMIAL_CAP) -> MultiPoly:
    """Expand the circuit exactly by evaluating it over the polynomial ring."""
    b = degree_bound(circuit)
    cap_estimate = 1
    for v, d in b.per_var.items():
        cap_estimate *= d + 1
        if cap_estimate > monomial_cap:
            raise CapExceeded(
                f"dense form may need up to {cap_estimate}+ monomials (cap {monomial_cap})"
            )
    point = {v: MultiPoly.variable(v) for v in circuit.variables()}
    out = eval_all(circuit, point)
    polys = [p if isinstance(p, MultiPoly) else MultiPoly.constant(p, ()) for p in out]
    return polys[0] if len(polys) == 1 else polys  # type: ignore[return-value]
