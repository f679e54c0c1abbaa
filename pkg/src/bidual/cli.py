"""Batch command-line driver.  All input and output is JSON.

Exit codes: 0 pass, 1 a check or suite failed, 2 usage or parse error,
3 a mathematical hypothesis of the computation does not hold.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any

from .serialize import dumps, load_input, write_output

log = logging.getLogger("bidual")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_HYPOTHESIS = 0, 1, 2, 3


class UsageError(Exception):
    pass


class HypothesisViolation(Exception):
    def __init__(self, msg: str, report: dict | None = None):
        super().__init__(msg)
        self.report = report or {}


# ---------------------------------------------------------------------------
# ideal


def cmd_ideal(args) -> tuple[dict, int]:
    from .modules import ModuleError, PresentedModule, annihilator, characteristic_ideal, fitting_ideal, ideal_compare
    from .ring import RingError

    data = load_input(args.input)
    if data is None:
        raise UsageError("ideal needs --input with a module presentation")
    try:
        M = PresentedModule.from_json(data)
    except (ModuleError, RingError) as exc:
        raise UsageError(str(exc)) from exc
    f0 = fitting_ideal(M, 0)
    ch = characteristic_ideal(M)
    ann = annihilator(M)
    verdict = ideal_compare(f0, ch)
    report: dict[str, Any] = {
        "fitt0": f0.describe(),
        "char": ch.describe(),
        "ann": ann.describe(),
        "verdict": {"equal": "equal", "a<b": "strict"}.get(verdict, "violated"),
        "char_equals_ann": ch == ann,
        "ideals": {"fitt0": f0.to_json(), "char": ch.to_json(), "ann": ann.to_json()},
        "fitting": [fitting_ideal(M, i).describe() for i in range(M.gens + 1)],
    }
    if args.oracle:
        from . import oracles

        R = M.ring
        if R.order * M.gens <= 4 and R.q**R.order <= 4096:
            brute = {tuple(a) for a in oracles.annihilator_elements(R, M.gens, M.relations)}
            mine = {tuple(int(c) for c in a) for a in _ideal_elements(ann)}
            report["oracle"] = {"annihilator_matches": brute == mine, "module_order": str(oracles.module_order(R, M.gens, M.relations))}
        else:
            report["oracle"] = {"skipped": "instance too large for exhaustive search"}
    if not (f0 <= ch) or not (ch == ann):
        raise HypothesisViolation("Fitt0 in char = Ann fails; is the ring Gorenstein local?", report)
    return report, EXIT_OK


def _ideal_elements(I):
    from itertools import product

    import numpy as np

    R = I.ring
    return [x for x in product(range(R.q), repeat=R.order) if I.contains(np.array(x, dtype=np.int64))]


# ---------------------------------------------------------------------------
# stickelberger


def _character_spec(data: dict | None, p: int, n: int):
    from .ring import CharacterSpec, RingError

    data = data or {"modulus": 5, "order": 2, "exponents": [1]}
    try:
        return CharacterSpec.from_exponents(int(data["modulus"]), p, n, int(data.get("order", p - 1)), [int(e) for e in data["exponents"]])
    except RingError as exc:
        raise HypothesisViolation(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed character: {exc}") from exc


def cmd_stickelberger(args) -> tuple[dict, int]:
    from . import oracles
    from .stickelberger import (
        DirichletCharacter,
        IntegralityError,
        LevelField,
        StickelbergerError,
        dirichlet_characters,
        flat_projection,
        modified_p_adic_L,
        stickelberger_element,
    )

    data = load_input(args.input) or {}
    m = int(data.get("m", args.m if args.m is not None else 0))
    if m <= 1:
        raise UsageError("modulus must exceed 1")
    try:
        theta = stickelberger_element(m, [int(q) for q in data.get("extra_primes", [])])
    except StickelbergerError as exc:
        raise UsageError(str(exc)) from exc
    report: dict[str, Any] = {"theta": theta.to_json()}
    if "character" in data:
        chars = [DirichletCharacter(m, tuple(int(e) for e in data["character"]))]
    else:
        chars = [psi for psi in dirichlet_characters(m) if psi.is_odd()]
    evals = []
    ok = True
    for psi in chars:
        val = theta.evaluate(psi)
        row = {"exponents": list(psi.exps), "conductor": psi.conductor, "odd": psi.is_odd(), "value": str(val)}
        if psi.is_odd() and not data.get("extra_primes"):
            from .stickelberger import CyclotomicNumber
            from .ring import is_prime

            N = psi.root_order
            rhs = oracles.character_sum_b1(psi) * -1
            for q in range(2, m + 1):
                if is_prime(q) and m % q == 0 and psi.conductor % q:
                    rhs = rhs * (CyclotomicNumber.rational(N, 1) - CyclotomicNumber.root(N, -psi.primitive_exponent(q)))
            row["b1_oracle"] = str(rhs)
            row["agrees"] = rhs == val
            ok &= rhs == val
        evals.append(row)
    report["evaluations"] = evals
    p, n = args.p, args.n
    if p is not None and n is not None:
        if m % p == 0 and not data.get("extra_primes"):
            try:
                report["flat"] = flat_projection(theta, p, n).to_json()
            except IntegralityError as exc:
                raise HypothesisViolation(str(exc), report) from exc
        if "chi" in data or "labels" in data:
            chi = _character_spec(data.get("chi"), p, n)
            K = LevelField(p, n, tuple(sorted(int(q) for q in data.get("labels", []))), data.get("cap"))
            try:
                report["L"] = {"labels": list(K.labels), "value": modified_p_adic_L(K, chi).to_json()}
            except StickelbergerError as exc:
                raise HypothesisViolation(str(exc), report) from exc
    return report, EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# kolyvagin


def cmd_kolyvagin(args) -> tuple[dict, int]:
    from itertools import combinations

    from .kolyvagin import InvarianceError, kolyvagin_class
    from .stickelberger import build_window
    from .suites import kolyvagin_window_checks

    data = load_input(args.input) or {}
    p = args.p if args.p is not None else int(data.get("p", 3))
    n = args.n if args.n is not None else int(data.get("n", 1))
    labels = tuple(sorted(int(q) for q in data.get("labels", [7, 13, 31])))
    if args.pool_max is not None:
        labels = labels[: args.pool_max]
    cap = data.get("cap")
    cap = int(cap) if cap is not None else None
    max_size = int(data.get("max_size", 2))
    squares = bool(data.get("squares", False))
    chi = _character_spec(data.get("chi"), p, n)
    w = build_window(p, n, chi, labels, max_size, cap)
    res = kolyvagin_window_checks(n, labels, cap, max_size, squares, p=p, chi=chi, window=w)
    classes = {}
    bad = None
    for k in range(max_size + 1):
        for nn in combinations(labels, k):
            try:
                classes[",".join(map(str, nn))] = kolyvagin_class(w, (), nn).to_json()
            except InvarianceError as exc:
                bad = bad or {"n": list(nn), "error": str(exc), "witness": exc.witness}
    report = {"p": p, "n": n, "labels": list(labels), "cap": cap, "kappa": classes}
    report["checks"] = res["checks"]
    if bad:
        report["invariance_failure"] = bad
        raise HypothesisViolation("kappa is not Galois-fixed; the labels are not admissible at this level", report)
    if not all(res["checks"].values()):
        return report, EXIT_FAIL
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# stark


def _datum_from_input(data: dict, seed: int, pool_max: int | None):
    from .ring import RingDescriptor
    from .stark import SelmerDatum, integral_datum, synthetic_datum, toy_datum

    if "phi" in data:
        return SelmerDatum.from_json(data)
    kind = data.get("kind", "synthetic")
    labels = tuple(int(q) for q in data.get("labels", [7, 13, 19]))
    if pool_max is not None:
        labels = labels[:pool_max]
    r = int(data.get("rank", 0))
    if kind == "integral":
        return integral_datum(int(data.get("seed", seed)), int(data.get("p", 3)), int(data.get("N", 7)), labels, r, int(data.get("max_exp", 1)))
    R = RingDescriptor.from_json(data.get("ring", {"p": 3, "n": 2}))
    if kind == "toy":
        return toy_datum(R, labels, r)
    if kind == "synthetic":
        return synthetic_datum(int(data.get("seed", seed)), R, labels, r)
    raise UsageError(f"unknown datum kind {kind!r}")


def cmd_stark(args) -> tuple[dict, int]:
    from .ring import RingError
    from .stark import StarkError, stark_solve, validate_selmer_datum
    from .suites import stark_datum_checks

    data = load_input(args.input) or {}
    try:
        d = _datum_from_input(data, args.seed, args.pool_max)
    except (KeyError, TypeError, ValueError, RingError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"malformed datum: {exc}") from exc
    v = validate_selmer_datum(d)
    report: dict[str, Any] = {"labels": list(d.labels), "rank": d.rank, "ring": d.ring.to_json(), "validation": v}
    if not v["valid"]:
        raise HypothesisViolation("the datum does not satisfy the Selmer axioms", report)
    res = stark_datum_checks(d, args.seed)
    report["checks"] = res["checks"]
    report["detail"] = res["detail"]
    try:
        report["system"] = stark_solve(d, 0, True).generators[0].to_json()
    except (StarkError, IndexError):
        pass
    if args.oracle:
        report["datum"] = d.to_json()
    return report, EXIT_OK if all(res["checks"].values()) else EXIT_FAIL


# ---------------------------------------------------------------------------
# suite


def cmd_suite(args) -> tuple[dict, int]:
    from .suites import SUITE_NAMES, SuiteError, run_suite

    if args.oracle and args.name is None:
        from .fixtures import derived_fixtures

        return derived_fixtures(), EXIT_OK
    if args.name is None:
        raise UsageError("suite needs a name: " + ", ".join(SUITE_NAMES))
    kw: dict[str, Any] = {}
    data = load_input(args.input)
    if args.name == "stark":
        if args.pool_max is not None:
            kw["pool_max"] = args.pool_max
        if data is not None:
            from .stark import SelmerDatum

            kw["datum"] = SelmerDatum.from_json(data) if "phi" in data else _datum_from_input(data, args.seed, args.pool_max)
    elif args.name == "kolyvagin" and data is not None:
        kw["labels"] = tuple(int(q) for q in data.get("labels", (7, 13, 31)))
        kw["levels"] = tuple(int(n) for n in data.get("levels", (1, 2)))
        kw["cap"] = int(data["cap"]) if data.get("cap") is not None else None
        kw["squares"] = bool(data.get("squares", False))
        kw["controls"] = bool(data.get("controls", True))
    elif data is not None:
        raise UsageError(f"suite {args.name} takes no --input")
    try:
        report = run_suite(args.name, seed=args.seed, workers=args.workers, **kw)
    except SuiteError as exc:
        raise UsageError(str(exc)) from exc
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON file, inline JSON, or - for stdin")
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--p", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--pool-max", type=int, dest="pool_max")
    common.add_argument("--oracle", action="store_true", help="also run the brute-force oracles")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="bidual", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("ideal", parents=[common], help="Fitt0, char and Ann of a presented module")
    s = sub.add_parser("stickelberger", parents=[common], help="Stickelberger elements and L-elements")
    s.add_argument("--m", type=int)
    sub.add_parser("kolyvagin", parents=[common], help="Kolyvagin classes of a Stickelberger window")
    sub.add_parser("stark", parents=[common], help="Stark systems of a Selmer datum")
    s = sub.add_parser("suite", parents=[common], help="run a property suite")
    s.add_argument("name", nargs="?")
    s.add_argument("--workers", type=int, default=4)
    return ap


COMMANDS = {
    "ideal": cmd_ideal,
    "stickelberger": cmd_stickelberger,
    "kolyvagin": cmd_kolyvagin,
    "stark": cmd_stark,
    "suite": cmd_suite,
}




def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    log.info("command %s seed %d", args.command, args.seed)
    try:
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"bidual: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"bidual: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"bidual: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisViolation as exc:
        print(f"bidual: {exc}", file=sys.stderr)
        write_output(dumps({"error": str(exc), **exc.report}), args.output)
        return EXIT_HYPOTHESIS
    write_output(dumps(report), args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
