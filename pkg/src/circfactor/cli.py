"""Command-line front end: factor | irreducible | pit | verify.

Exit codes, shared across subcommands:

    0   success (verified factorization, irreducible verdict, PIT answer,
        matching verification)
    1   input errors: unreadable file, malformed circuit text, malformed
        result JSON, constant/zero input where a verdict needs more, or
        invalid flag values
    2   verification failure (a factorization that does not multiply back)
    3   reducible verdict from the irreducible subcommand
    4   infeasible: a cap was exceeded or no certification route applies

Output is deterministic: identical inputs and flags produce byte-identical
bytes.  JSON documents carry a "schema": 1 field and are serialized with
sorted keys; witness points and factor lists are emitted in canonical
variable and factor order.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import NoReturn, Optional

import click

from . import errors
from .certify import irreducibility_certificate, verify_factorization
from .circuit_ir import (
    DEFAULT_MONOMIAL_CAP,
    Circuit,
    dense_from_circuit,
    eval_circuit,
    parse_circuit,
)
from .factor_engine import FactorEntry, FactorizationResult, factor_all, preprocess
from .kigen import HARD_FAMILIES
from .pit import DEFAULT_GRID_CAP, certified_pit
from .polyring import squarefree_decompose, var_sort_key

__all__ = ["main"]

_EXIT_INPUT = 1
_EXIT_VERIFICATION = 2
_EXIT_REDUCIBLE = 3
_EXIT_INFEASIBLE = 4

_INPUT_ERRORS = (
    errors.CircuitSyntaxError,
    errors.CycleError,
    errors.UnknownIdentifier,
    errors.MissingAssignment,
    errors.ArityMismatch,
    errors.DimensionMismatch,
    errors.DegenerateInput,
    errors.NotMonic,
)
_INFEASIBLE_ERRORS = (
    errors.CapExceeded,
    errors.FallbackExhausted,
    errors.InfeasibleParameters,
    errors.HypothesisViolated,
)


def _fail(code: int, message: str) -> NoReturn:
    click.echo(f"circfactor: {message}", err=True)
    sys.exit(code)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _load_circuit(path: str) -> Circuit:
    try:
        text = Path(path).read_text()
    except OSError as err:
        _fail(_EXIT_INPUT, f"cannot read {path}: {err}")
    try:
        return parse_circuit(text)
    except _INPUT_ERRORS as err:
        _fail(_EXIT_INPUT, f"{path}: {type(err).__name__}: {err}")


def _parse_epsilon(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        _fail(_EXIT_INPUT, f"--epsilon must be a rational number, got {text!r}")
    if not (0 < eps < Fraction(1, 2)):
        _fail(_EXIT_INPUT, f"--epsilon must lie strictly between 0 and 1/2, got {eps}")
    return eps


def _check_family(family: Optional[str]) -> Optional[str]:
    if family is not None and family not in HARD_FAMILIES:
        _fail(
            _EXIT_INPUT,
            f"unknown --hard-family {family!r}; choose one of {', '.join(HARD_FAMILIES)}",
        )
    return family


def _check_positive(value: int, flag: str) -> int:
    if value <= 0:
        _fail(_EXIT_INPUT, f"{flag} must be positive, got {value}")
    return value


def _common_options(fn):
    fn = click.option(
        "--epsilon",
        default="1/3",
        show_default=True,
        help="Design accuracy parameter, a rational in (0, 1/2).",
    )(fn)
    fn = click.option(
        "--hard-family",
        default=None,
        help="Preferred seed family for the variable-reduction map "
        f"({', '.join(HARD_FAMILIES)}); CIRCFACTOR_SEED_FAMILY overrides.",
    )(fn)
    fn = click.option(
        "--grid-cap",
        type=int,
        default=DEFAULT_GRID_CAP,
        show_default=True,
        help="Largest evaluation grid any single identity test may use.",
    )(fn)
    fn = click.option(
        "--monomial-cap",
        type=int,
        default=DEFAULT_MONOMIAL_CAP,
        show_default=True,
        help="Largest dense expansion (number of monomials) permitted.",
    )(fn)
    fn = click.option(
        "--fallback",
        type=click.Choice(["auto", "off"]),
        default="auto",
        show_default=True,
        help="auto: escalate through seed families and dense factorization; "
        "off: fail instead of densifying.",
    )(fn)
    fn = click.option(
        "--out",
        default=None,
        type=click.Path(dir_okay=False, writable=True),
        help="Write the result to this file instead of standard output.",
    )(fn)
    return fn


@click.group()
def main() -> None:
    """Deterministic factorization of rational polynomial circuits."""


@main.command()
@click.argument("circuit_file", type=click.Path(dir_okay=False))
@_common_options
def factor(circuit_file, epsilon, hard_family, grid_cap, monomial_cap, fallback, out):
    """Factor the polynomial computed by CIRCUIT_FILE; print JSON."""
    eps = _parse_epsilon(epsilon)
    family = _check_family(hard_family)
    _check_positive(grid_cap, "--grid-cap")
    _check_positive(monomial_cap, "--monomial-cap")
    circ = _load_circuit(circuit_file)
    try:
        result = factor_all(
            circ, epsilon=eps, family=family, fallback=fallback, monomial_cap=monomial_cap
        )
    except errors.VerificationFailed as err:
        _fail(_EXIT_VERIFICATION, f"factorization failed verification: {err}")
    except _INFEASIBLE_ERRORS as err:
        _fail(_EXIT_INFEASIBLE, f"{type(err).__name__}: {err}")
    except _INPUT_ERRORS as err:
        _fail(_EXIT_INPUT, f"{type(err).__name__}: {err}")
    if not verify_factorization(circ, result):
        _fail(_EXIT_VERIFICATION, "factorization failed the final re-verification")
    payload = {"schema": 1, **result.as_dict()}
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)


@main.command()
@click.argument("circuit_file", type=click.Path(dir_okay=False))
@click.option(
    "--method",
    type=click.Choice(["pipeline", "certificate"]),
    default="pipeline",
    show_default=True,
    help="pipeline: count the factors of the full factorization; "
    "certificate: run the class-union divisibility sweep.",
)
@click.option(
    "--require-squarefree",
    is_flag=True,
    help="Reject inputs that are not squarefree instead of reporting them reducible.",
)
@_common_options
def irreducible(
    circuit_file, method, require_squarefree, epsilon, hard_family, grid_cap,
    monomial_cap, fallback, out,
):
    """Decide irreducibility over Q; exit 0 = irreducible, 3 = reducible."""
    eps = _parse_epsilon(epsilon)
    family = _check_family(hard_family)
    _check_positive(grid_cap, "--grid-cap")
    _check_positive(monomial_cap, "--monomial-cap")
    circ = _load_circuit(circuit_file)
    try:
        dense = dense_from_circuit(circ, monomial_cap)
    except _INFEASIBLE_ERRORS as err:
        _fail(_EXIT_INFEASIBLE, f"{type(err).__name__}: {err}")
    if dense.is_zero() or dense.is_constant():
        _fail(_EXIT_INPUT, "a constant has no irreducibility verdict")
    _, parts = squarefree_decompose(dense)
    squarefree = len(parts) == 1 and parts[0][1] == 1
    if require_squarefree and not squarefree:
        _fail(_EXIT_INPUT, "input is not squarefree")

    if not squarefree:
        verdict = "reducible"
    elif method == "pipeline":
        try:
            result = factor_all(
                circ, epsilon=eps, family=family, fallback=fallback,
                monomial_cap=monomial_cap,
            )
        except _INFEASIBLE_ERRORS as err:
            _fail(_EXIT_INFEASIBLE, f"{type(err).__name__}: {err}")
        except (errors.VerificationFailed, *_INPUT_ERRORS) as err:
            _fail(_EXIT_INPUT, f"{type(err).__name__}: {err}")
        count = sum(e.multiplicity for e in result.factors)
        verdict = "irreducible" if count == 1 else "reducible"
    else:
        try:
            _, prep = preprocess(circ, eps, family, monomial_cap)
            cert = irreducibility_certificate(prep.regularized_dense, eps)
        except _INFEASIBLE_ERRORS as err:
            _fail(_EXIT_INFEASIBLE, f"{type(err).__name__}: {err}")
        except _INPUT_ERRORS as err:
            _fail(_EXIT_INPUT, f"{type(err).__name__}: {err}")
        if cert.status == "infeasible":
            _fail(_EXIT_INFEASIBLE, f"certificate infeasible: {cert.reason}")
        verdict = cert.status

    _emit(verdict + "\n", out)
    if verdict == "reducible":
        sys.exit(_EXIT_REDUCIBLE)


@main.command()
@click.argument("circuit_file", type=click.Path(dir_okay=False))
@_common_options
def pit(circuit_file, epsilon, hard_family, grid_cap, monomial_cap, fallback, out):
    """Test the circuit for identical zero; print the verdict and witness."""
    eps = _parse_epsilon(epsilon)
    family = _check_family(hard_family)
    _check_positive(grid_cap, "--grid-cap")
    _check_positive(monomial_cap, "--monomial-cap")
    circ = _load_circuit(circuit_file)
    try:
        verdict = certified_pit(circ, eps, family, grid_cap)
    except _INFEASIBLE_ERRORS as err:
        _fail(_EXIT_INFEASIBLE, f"{type(err).__name__}: {err}")
    if verdict.is_zero:
        _emit("zero\n", out)
        return
    witness = dict(verdict.witness or {})
    point = {v: witness.get(v, Fraction(0)) for v in circ.variables()}
    if eval_circuit(circ, point) == 0:
        _fail(_EXIT_VERIFICATION, "witness failed re-evaluation")
    rendered = " ".join(
        f"{v}={point[v]}" for v in sorted(point, key=var_sort_key)
    )
    _emit(f"nonzero {rendered}\n" if rendered else "nonzero\n", out)


@main.command()
@click.argument("circuit_file", type=click.Path(dir_okay=False))
@click.argument("result_file", type=click.Path(dir_okay=False))
def verify(circuit_file, result_file):
    """Check a factor-command JSON result against CIRCUIT_FILE."""
    circ = _load_circuit(circuit_file)
    try:
        data = json.loads(Path(result_file).read_text())
    except OSError as err:
        _fail(_EXIT_INPUT, f"cannot read {result_file}: {err}")
    except json.JSONDecodeError as err:
        _fail(_EXIT_INPUT, f"{result_file}: invalid JSON: {err}")
    try:
        if data.get("schema") != 1:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        unit = Fraction(data["unit"])
        entries = [
            FactorEntry(
                circuit=parse_circuit(f["circuit"]),
                multiplicity=int(f["multiplicity"]),
                dense=None,
            )
            for f in data["factors"]
        ]
    except (KeyError, TypeError, ValueError, *_INPUT_ERRORS) as err:
        _fail(_EXIT_INPUT, f"{result_file}: malformed result: {err}")
    result = FactorizationResult(unit=unit, factors=entries)
    if not verify_factorization(circ, result):
        _fail(_EXIT_VERIFICATION, "result does not reproduce the circuit")
    click.echo("ok")


if __name__ == "__main__":
    main()
