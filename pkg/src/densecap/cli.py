"""Command-line front end: ``densecap {capacity,check,construct,reproduce,subgroups}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import os
import sys

import numpy as np

from . import __version__
from .capacity import capacity_decomposed, capacity_direct, capacity_measured
from .checks import SearchOptions, classify
from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError, ParseError
from .groups import decompose_abelian, verify_decomposition
from .io import (basis_from_json, basis_to_json, dec_from_json, dec_to_json, dumps, load_json, rep_from_json,
                 rep_to_json, state_from_json, state_to_json, write_atomic)
from .reproduce import SUITES, rows_to_csv, run_suite
from .states import (build_dephased, build_illumination, build_max_entangled, build_section32,
                     build_useful_protocol, s3_example, shift_rep_with_dec)
from .symplectic import count_commutative_subgroups, enumerate_commutative_subgroups

EXIT_WARN, EXIT_PARSE, EXIT_DIM, EXIT_NUM = 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nats", action="store_true", help="report the headline unit in nats")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--strict", action="store_true", help="exit with status 1 when warnings are raised")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    for f in dataclasses.fields(Tolerances):
        p.add_argument(f"--tol-{f.name.replace('_', '-')}", type=float, dest=f"tol_{f.name}", default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="densecap", description=__doc__)
    parser.add_argument("--version", action="version", version=f"densecap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", parents=[common], help="capacities with and without Bob's memory")
    p.add_argument("state")
    p.add_argument("rep")
    p.add_argument("--basis")
    p.add_argument("--dec")

    p = sub.add_parser("check", parents=[common], help="decide whether Bob's memory is useful")
    p.add_argument("state")
    p.add_argument("rep")
    p.add_argument("--dec")
    p.add_argument("--basis")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--n-bases", type=int, default=32)

    p = sub.add_parser("construct", parents=[common], help="build a state family")
    p.add_argument("family", choices=("max-entangled", "dephased", "section32", "useful", "illumination"))
    p.add_argument("--group", default="Z3", help="Zd (cyclic shift) or S3")
    p.add_argument("--p", type=float, default=0.5, help="dephasing weight")
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--dB", type=int, default=2)
    p.add_argument("--pj", type=float, nargs="+", help="mixture weights P_J")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--analytic", action="store_true")
    src.add_argument("--random", action="store_true")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--out-dir", default=".", help="directory for state/rep/dec/basis/recipe files")

    p = sub.add_parser("reproduce", parents=[common], help="regenerate a suite of worked examples")
    p.add_argument("suite", choices=SUITES)

    p = sub.add_parser("subgroups", parents=[common], help="count commutative Weyl-Heisenberg subgroups")
    p.add_argument("p", type=int)
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--enumerate", action="store_true")
    return parser


def _tolerances(args) -> Tolerances:
    changes = {f.name: getattr(args, f"tol_{f.name}") for f in dataclasses.fields(Tolerances)
               if getattr(args, f"tol_{f.name}") is not None}
    return DEFAULT_TOL.replace(**changes)


def _envelope(args, tol, inputs, result, warnings) -> dict:
    return {"tool": "densecap", "version": __version__, "command": args.command, "seed": args.seed,
            "tolerances": tol.as_dict(), "inputs": inputs, "warnings": warnings, "result": result}


def _emit(args, text: str) -> None:
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def _flat_csv(d: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])

    def walk(prefix, x):
        if isinstance(x, dict):
            for k in sorted(x):
                walk(f"{prefix}.{k}" if prefix else str(k), x[k])
        elif isinstance(x, float):
            w.writerow([prefix, f"{x:.12g}"])
        else:
            w.writerow([prefix, x])

    walk("", d)
    return buf.getvalue()


def _report(args, tol, inputs, result, warnings) -> int:
    env = _envelope(args, tol, inputs, result, warnings)
    _emit(args, dumps(env) if args.format == "json" else _flat_csv(env))
    return EXIT_WARN if args.strict and warnings else 0


def _load_inputs(args):
    inputs = {}
    data, inputs["state"] = load_json(args.state)
    state, dims = state_from_json(data)
    data, inputs["rep"] = load_json(args.rep)
    rep = rep_from_json(data)
    dec = basis = None
    if getattr(args, "dec", None):
        data, inputs["dec"] = load_json(args.dec)
        dec = dec_from_json(data)
    if getattr(args, "basis", None):
        data, inputs["basis"] = load_json(args.basis)
        basis = basis_from_json(data)
    if len(dims) != 2 or dims[0] != rep.dim:
        raise DimensionError(f"state dims {dims} do not match representation dim {rep.dim}")
    if basis is not None and basis.dim != dims[1]:
        raise DimensionError(f"basis dim {basis.dim} does not match d_B = {dims[1]}")
    if dec is not None and dec.dim != rep.dim:
        raise DimensionError("decomposition and representation dimensions differ")
    return state, dims, rep, dec, basis, inputs


def _units(bits: float | None, nats: bool) -> dict:
    if bits is None:
        return {"bits": None, "nats": None}
    return {"bits": bits, "nats": bits * math.log(2), "unit": "nats" if nats else "bits",
            "value": bits * math.log(2) if nats else bits}


def cmd_capacity(args) -> int:
    tol = _tolerances(args)
    state, dims, rep, dec, basis, inputs = _load_inputs(args)
    rep.validate(tol)
    warnings = []
    cc = capacity_direct(state, rep, dims, 2, tol)
    result = {"C_c_bits": cc, "C_c_nats": cc * math.log(2), "C_c": _units(cc, args.nats)}
    if basis is not None:
        cm = capacity_measured(state, rep, basis, dims, 2, tol)
        gap = cc - cm
        result.update({"C_c_measured_bits": cm, "C_c_measured_nats": cm * math.log(2),
                       "gap_bits": gap, "gap_nats": gap * math.log(2), "useless_at_basis": gap <= tol.zero})
    if dec is not None:
        if verify_decomposition(rep, dec) > tol.rep * 100:
            raise NumericalError("supplied decomposition does not block-diagonalize the representation")
        r = capacity_decomposed(state, dec, dims, 2, tol)
        result["decomposed"] = {"C_c_bits": r.C_c, "P_Lambda": r.P_Lambda, "labels": [str(x) for x in r.labels],
                                "block_entropies_bits": r.block_entropies, "pure_variant_bits": r.C_c_pure_variant}
        if abs(r.C_c - cc) > 1e-8:
            warnings.append("block formula disagrees with the direct capacity")
    return _report(args, tol, inputs, result, warnings)


def cmd_check(args) -> int:
    tol = _tolerances(args)
    state, dims, rep, dec, basis, inputs = _load_inputs(args)
    rep.validate(tol)
    warnings = []
    if dec is None and not rep.is_projective:
        try:
            dec = decompose_abelian(rep, args.seed, tol)
        except ValueError as exc:
            warnings.append(f"no decomposition available: {exc}")
    opts = SearchOptions(args.restarts, args.iterations, None, args.seed, args.n_bases)
    report = classify(state, rep, dec, basis, dims, opts, tol)
    out = report.to_dict()
    out["C_c"] = _units(report.C_c_bits, args.nats)
    return _report(args, tol, inputs, out, warnings + report.warnings)


def _group(name: str):
    name = name.upper()
    if name == "S3":
        return s3_example()
    if name.startswith("Z") and name[1:].isdigit():
        return shift_rep_with_dec(int(name[1:]))
    raise ParseError(f"unknown group {name!r}; use Zd or S3")


def cmd_construct(args) -> int:
    tol = _tolerances(args)
    fam = args.family
    if fam == "max-entangled":
        rep, dec = _group(args.group)
        c = build_max_entangled(dec, rep)
    elif fam == "dephased":
        rep, dec = _group(args.group)
        c = build_max_entangled(dec, rep)
        c.state = build_dephased(c.state, rep, args.p, c.dims)
        c.recipe.family, c.recipe.params = "dephased", {**c.recipe.params, "p": args.p}
    elif fam == "section32":
        pj = args.pj or [1.0 / args.l] * args.l
        c = build_section32(args.l, pj)
    elif fam == "useful":
        c = build_useful_protocol(args.l, args.dB, "analytic" if args.analytic else "random", args.seed, tol=tol)
    else:
        c = build_illumination(args.d)
    os.makedirs(args.out_dir, exist_ok=True)
    files = {"state.json": state_to_json(c.state, c.dims), "rep.json": rep_to_json(c.rep),
             "dec.json": dec_to_json(c.dec), "recipe.json": c.recipe.to_dict()}
    if c.basis is not None:
        files["basis.json"] = basis_to_json(c.basis)
    for name, obj in files.items():
        write_atomic(os.path.join(args.out_dir, name), dumps(obj))
    result = {"family": c.recipe.family, "dims": list(c.dims), "files": sorted(files),
              "recipe": c.recipe.to_dict()}
    return _report(args, tol, {}, result, [])


def cmd_reproduce(args) -> int:
    tol = _tolerances(args)
    rows = run_suite(args.suite, args.seed)
    if args.format == "csv":
        _emit(args, rows_to_csv(rows))
    else:
        result = {"suite": args.suite, "rows": [dict(zip(["name", "expected", "actual", "tol", "status"],
                                                           r.as_list())) for r in rows]}
        _emit(args, dumps(_envelope(args, tol, {}, result, [])))
    return 0 if all(r.passed for r in rows) else EXIT_WARN


def cmd_subgroups(args) -> int:
    tol = _tolerances(args)
    try:
        count = count_commutative_subgroups(args.p, args.n, args.m)
        result = {"p": args.p, "n": args.n, "m": args.m, "count": str(count)}
        if args.enumerate:
            subs = enumerate_commutative_subgroups(args.p, args.n, args.m)
            result["enumerated"] = len(subs)
            result["generators"] = [[list(g) for g in s.generators] for s in subs]
            result["count_matches"] = len(subs) == count
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return _report(args, tol, {}, result, [])


COMMANDS = {"capacity": cmd_capacity, "check": cmd_check, "construct": cmd_construct,
            "reproduce": cmd_reproduce, "subgroups": cmd_subgroups}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"densecap: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as exc:
        print(f"densecap: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"densecap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUM
    except ValueError as exc:  # invalid parameters for a construction or count
        print(f"densecap: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
