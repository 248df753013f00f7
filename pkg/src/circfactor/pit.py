"""Deterministic polynomial identity testing.

Two routes are provided.  `grid_pit` exhaustively evaluates a circuit on
the grid {0,..,d}^m, which is complete whenever d bounds the degree — a
nonzero polynomial of total degree d cannot vanish on the whole grid
because it has at most d*(d+1)^(m-1) zeros there.  `ki_pit` first shrinks
the variable count by composing with the design-based substitution map and
then grid-tests the composition; its nonzero answers are unconditional
(the witness is re-checked on the original circuit) while its zero answers
rest on the hardness of the seed polynomial.  `certified_pit` chains the
two so that no zero verdict escapes without either a second independent
seed family or a direct grid pass.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence

from .circuit_ir import Circuit, degree_bound, eval_all, substitute_circuit
from .errors import CapExceeded, FallbackExhausted, InfeasibleParameters
from .kigen import KiMap, build_ki_map, family_sequence

__all__ = [
    "DEFAULT_GRID_CAP",
    "PitVerdict",
    "grid_pit",
    "ki_pit",
    "certified_pit",
]

DEFAULT_GRID_CAP = 1_000_000

_W_NAME = re.compile(r"^w\d+$")


@dataclass(frozen=True)
class PitVerdict:
    is_zero: bool
    witness: Optional[Dict[str, Fraction]] = None
    route: str = "grid"
    points_checked: int = 0


def _first_output(vals, circuit: Circuit) -> Fraction:
    return vals[0]


def grid_pit(
    circuit: Circuit,
    d: Optional[int] = None,
    grid_cap: int = DEFAULT_GRID_CAP,
) -> PitVerdict:
    """Evaluate on {0,..,d}^m in lexicographic order.

    Returns the first nonzero point as witness, or a zero verdict after
    the whole grid evaluates to zero.  The answer is unconditional when d
    is at least the circuit's degree; by default d is the structural
    degree bound, which always suffices.
    """
    variables = circuit.variables()
    if d is None:
        d = degree_bound(circuit).total
    if d < 0:
        d = 0
    m = len(variables)
    total = (d + 1) ** m
    if total > grid_cap:
        raise CapExceeded(
            f"grid of {(d + 1)}^{m} = {total} points exceeds cap {grid_cap}"
        )
    checked = 0
    for values in itertools.product(range(d + 1), repeat=m):
        point = {v: Fraction(c) for v, c in zip(variables, values)}
        val = _first_output(eval_all(circuit, point), circuit)
        checked += 1
        if val != 0:
            # witness self-check: re-evaluate to guarantee soundness
            again = _first_output(eval_all(circuit, point), circuit)
            if again == 0:
                raise FallbackExhausted("witness failed re-evaluation")
            return PitVerdict(False, point, route="grid", points_checked=checked)
    return PitVerdict(True, None, route="grid", points_checked=checked)


def _fresh_names(taken: Sequence[str], count: int) -> list:
    out = []
    i = 1
    taken_set = set(taken)
    while len(out) < count:
        cand = f"v{i}"
        if cand not in taken_set:
            out.append(cand)
        i += 1
    return out


def ki_pit(
    circuit: Circuit,
    epsilon: Fraction = Fraction(1, 3),
    family: str = "esym",
    grid_cap: int = DEFAULT_GRID_CAP,
) -> PitVerdict:
    """Compose with the variable-reduction map, then grid-test.

    A nonzero verdict carries a rational witness for the *original*
    circuit, obtained by evaluating the substitution images at the
    composed grid point, and is re-checked there.  A zero verdict means
    the composition vanished on its whole grid; trusting it for the
    original circuit requires the seed polynomial to be hard for it.
    """
    variables = circuit.variables()
    if not variables:
        v = _first_output(eval_all(circuit, {}), circuit)
        return PitVerdict(v == 0, None if v == 0 else {}, route=f"ki:{family}",
                          points_checked=1)

    # The map introduces fresh variables w1..w_mu; rename any clashing
    # circuit inputs first so the splice cannot capture them.
    work = circuit
    rename: Dict[str, str] = {}
    if any(_W_NAME.match(v) for v in variables):
        fresh = _fresh_names(variables, len(variables))
        rename = dict(zip(variables, fresh))
        work = substitute_circuit(
            circuit,
            {v: _var_circuit(nv) for v, nv in rename.items()},
        )

    km = build_ki_map(work.variables(), epsilon, family)
    composed = km.substitute_into(work)
    inner = grid_pit(composed, grid_cap=grid_cap)
    if inner.is_zero:
        return PitVerdict(True, None, route=f"ki:{family}",
                          points_checked=inner.points_checked)
    w_point = inner.witness
    images = km.evaluate_images(w_point)
    if rename:
        back = {orig: images[new] for orig, new in rename.items()}
    else:
        back = images
    witness = {v: back[v] for v in variables}
    val = _first_output(eval_all(circuit, witness), circuit)
    if val == 0:
        # cannot happen when the composition is a true substitution;
        # keep the guard so a soundness bug cannot masquerade as an answer
        raise FallbackExhausted("composed witness failed on original circuit")
    return PitVerdict(False, witness, route=f"ki:{family}",
                      points_checked=inner.points_checked)


def _var_circuit(name: str) -> Circuit:
    from .circuit_ir import CircuitBuilder

    b = CircuitBuilder()
    return b.build([b.inp(name)])


def certified_pit(
    circuit: Circuit,
    epsilon: Fraction = Fraction(1, 3),
    family: Optional[str] = None,
    grid_cap: int = DEFAULT_GRID_CAP,
) -> PitVerdict:
    """Unconditional verdict via escalation.

    Order: preferred seed family, then the remaining families, then the
    direct grid.  Nonzero answers (self-checked witnesses) are returned
    immediately.  A zero answer is only returned once two distinct seed
    families agree or the direct grid confirms it.  When nothing feasible
    certifies the answer, FallbackExhausted is raised.
    """
    variables = circuit.variables()
    if not variables:
        return grid_pit(circuit, grid_cap=grid_cap)
    zero_votes = 0
    for fam in family_sequence(family):
        try:
            verdict = ki_pit(circuit, epsilon, family=fam, grid_cap=grid_cap)
        except (CapExceeded, InfeasibleParameters):
            continue
        if not verdict.is_zero:
            return verdict
        zero_votes += 1
        if zero_votes >= 2:
            return PitVerdict(True, None, route="ki:agreement",
                              points_checked=verdict.points_checked)
    try:
        return grid_pit(circuit, grid_cap=grid_cap)
    except CapExceeded as exc:
        raise FallbackExhausted(
            "no identity-testing route fits under the configured caps"
        ) from exc
