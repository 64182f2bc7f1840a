"""Batch front end: JSON descriptions in, machine-readable reports out.

Complex entries are ``[re, im]`` pairs.  Formats:

ensemble     ``{"version": 1, "dim": d, "states": [{"p": w, "rho": M}, ...]}``
measurement  ``{"version": 1, "dim": d, "outcomes": [{"weight": w, "kraus": [M, ...]}, ...]}``
povm         ``{"version": 1, "dim": d, "elements": [M, ...]}``

Reports are JSON on standard output with values at 12 significant digits and
solver diagnostics under a separate "solver" key; identical inputs and seed
reproduce a report byte for byte.  Exit codes: 0 ok, 2 parse error,
3 dimension mismatch, 4 solver did not converge (report still printed),
5 invalid measurement or POVM.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from .channels import (
    GeneralizedMeasurement,
    Povm,
    dist_max,
    fid_min,
    jamiolkowski_ensemble,
    make_measurement,
    make_povm,
    povm_to_ensemble,
    WorstCaseOptions,
)
from .ehs import SolverOptions, ehs_distance, ehs_fidelity
from .ensembles import Ensemble, make_ensemble
from .errors import (
    DimMismatch,
    EnsembleMetricsError,
    InvalidMeasurement,
    InvalidPovm,
)
from .kantorovich import coupling_lp

FORMAT_VERSION = 1
SEED_ENV = "ENSEMBLE_METRICS_SEED"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIM = 3
EXIT_NO_CONVERGENCE = 4
EXIT_INVALID_DEVICE = 5


class ParseError(ValueError):
    """Input file rejected; the message carries the file and field path."""


def _num(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ParseError(f"{path}: expected a number, got {type(node).__name__}")
    return float(node)


def _parse_matrix(node, path: str, dim: int) -> np.ndarray:
    if not isinstance(node, list) or len(node) != dim:
        raise ParseError(f"{path}: expected {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for r, row in enumerate(node):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"{path}[{r}]: expected {dim} entries")
        for c, cell in enumerate(row):
            if not isinstance(cell, list) or len(cell) != 2:
                raise ParseError(f"{path}[{r}][{c}]: expected an [re, im] pair")
            out[r, c] = complex(_num(cell[0], f"{path}[{r}][{c}][0]"),
                                _num(cell[1], f"{path}[{r}][{c}][1]"))
    return out


def _header(doc, label: str) -> int:
    if not isinstance(doc, dict):
        raise ParseError(f"{label}: expected a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"{label}.version: expected {FORMAT_VERSION}, got {version!r}")
    dim = doc.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{label}.dim: expected a positive integer")
    return dim


def parse_ensemble(doc, label: str = "ensemble") -> Ensemble:
    dim = _header(doc, label)
    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise ParseError(f"{label}.states: expected a non-empty list")
    pairs = []
    for k, entry in enumerate(states):
        here = f"{label}.states[{k}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{here}: expected an object")
        prob = _num(entry.get("p"), f"{here}.p")
        rho = _parse_matrix(entry.get("rho"), f"{here}.rho", dim)
        pairs.append((prob, rho))
    try:
        return make_ensemble(pairs)
    except EnsembleMetricsError as exc:
        raise ParseError(f"{label}.states: {exc}") from exc


def parse_measurement(doc, label: str = "measurement") -> GeneralizedMeasurement:
    dim = _header(doc, label)
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not outcomes:
        raise ParseError(f"{label}.outcomes: expected a non-empty list")
    pairs = []
    for k, entry in enumerate(outcomes):
        here = f"{label}.outcomes[{k}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{here}: expected an object")
        weight = _num(entry.get("weight"), f"{here}.weight")
        kraus = entry.get("kraus")
        if not isinstance(kraus, list) or not kraus:
            raise ParseError(f"{here}.kraus: expected a non-empty list")
        mats = [
            _parse_matrix(m, f"{here}.kraus[{j}]", dim) for j, m in enumerate(kraus)
        ]
        pairs.append((weight, mats))
    return make_measurement(pairs)  # InvalidMeasurement propagates (exit 5)


def parse_povm(doc, label: str = "povm") -> Povm:
    dim = _header(doc, label)
    elements = doc.get("elements")
    if not isinstance(elements, list) or not elements:
        raise ParseError(f"{label}.elements: expected a non-empty list")
    mats = [
        _parse_matrix(m, f"{label}.elements[{j}]", dim) for j, m in enumerate(elements)
    ]
    return make_povm(mats)  # InvalidPovm propagates (exit 5)


def _matrix_json(mat: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat, complex)]


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "version": FORMAT_VERSION,
        "dim": ens.dim,
        "states": [{"p": float(p), "rho": _matrix_json(s)} for p, s in ens],
    }


def measurement_to_json(m: GeneralizedMeasurement) -> dict:
    return {
        "version": FORMAT_VERSION,
        "dim": m.dim,
        "outcomes": [
            {"weight": float(w), "kraus": [_matrix_json(k) for k in kraus]}
            for w, kraus in m.outcomes
        ],
    }


def povm_to_json(p: Povm) -> dict:
    return {
        "version": FORMAT_VERSION,
        "dim": p.dim,
        "elements": [_matrix_json(e) for e in p.elements],
    }


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return doc, hashlib.sha256(raw).hexdigest()


def _sig12(x: float) -> float:
    return float(f"{float(x):.12g}")


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        tol=args.tol, max_iter=args.max_iter, restarts=args.restarts, seed=args.seed
    )


def _measure_report(a: Ensemble, b: Ensemble, kind: str, args, digests, measure_name=None):
    """Shared dist/fid core; returns (report, exit code)."""
    report = {"inputs": {"a": digests[0], "b": digests[1]}}
    code = EXIT_OK
    if args.method == "kantorovich":
        sol = coupling_lp(a, b, kind)
        report["measure"] = measure_name or f"kantorovich_{kind}"
        report["value"] = _sig12(min(max(sol.value, 0.0), 1.0))
        report["solver"] = {
            "converged": True,
            "iterations": sol.iterations,
            "seed": args.seed,
            "status": sol.status,
        }
    else:
        solve = ehs_distance if kind == "distance" else ehs_fidelity
        rep = solve(a, b, _solver_options(args))
        report["measure"] = measure_name or f"ehs_{kind}"
        report["value"] = _sig12(rep.value)
        report["bracket"] = [_sig12(rep.bracket[0]), _sig12(rep.bracket[1])]
        report["solver"] = {
            "converged": rep.converged,
            "iterations": rep.iterations,
            "max_iter": args.max_iter,
            "restarts": args.restarts,
            "seed": args.seed,
            "tol": args.tol,
        }
        if not rep.converged:
            code = EXIT_NO_CONVERGENCE
    if measure_name:
        report["method"] = args.method
    return report, code


def cmd_dist(args) -> int:
    (doc_a, dig_a) = _load(args.input_a)
    (doc_b, dig_b) = _load(args.input_b)
    a = parse_ensemble(doc_a, args.input_a)
    b = parse_ensemble(doc_b, args.input_b)
    if a.dim != b.dim:
        raise DimMismatch(f"ensembles on dims {a.dim} and {b.dim}")
    report, code = _measure_report(a, b, "distance", args, (dig_a, dig_b))
    _emit(report)
    return code


def cmd_fid(args) -> int:
    (doc_a, dig_a) = _load(args.input_a)
    (doc_b, dig_b) = _load(args.input_b)
    a = parse_ensemble(doc_a, args.input_a)
    b = parse_ensemble(doc_b, args.input_b)
    if a.dim != b.dim:
        raise DimMismatch(f"ensembles on dims {a.dim} and {b.dim}")
    report, code = _measure_report(a, b, "fidelity", args, (dig_a, dig_b))
    _emit(report)
    return code


def cmd_channel(args) -> int:
    (doc_m, dig_m) = _load(args.input_m)
    (doc_n, dig_n) = _load(args.input_n)
    m = parse_measurement(doc_m, args.input_m)
    n = parse_measurement(doc_n, args.input_n)
    if m.dim != n.dim:
        raise DimMismatch(f"measurements on dims {m.dim} and {n.dim}")
    kind = "distance" if args.measure == "dist" else "fidelity"
    if args.compare == "iso":
        ea = jamiolkowski_ensemble(m).ensemble
        eb = jamiolkowski_ensemble(n).ensemble
        name = "dist_iso" if kind == "distance" else "fid_iso"
        report, code = _measure_report(ea, eb, kind, args, (dig_m, dig_n), name)
    else:
        wopts = WorstCaseOptions(
            restarts=args.worst_restarts, max_steps=args.worst_steps, seed=args.seed
        )
        opts = _solver_options(args)
        if kind == "distance":
            value, state = dist_max(m, n, args.method, opts, wopts)
            name = "dist_max"
        else:
            value, state = fid_min(m, n, args.method, opts, wopts)
            name = "fid_min"
        report = {
            "inputs": {"a": dig_m, "b": dig_n},
            "measure": name,
            "method": args.method,
            "value": _sig12(value),
            "state": [[_sig12(z.real), _sig12(z.imag)] for z in state],
            "solver": {
                "converged": True,  # best-effort bound by contract
                "iterations": args.worst_steps,
                "restarts": args.worst_restarts,
                "seed": args.seed,
            },
        }
        code = EXIT_OK
    _emit(report)
    return code


def cmd_povm(args) -> int:
    (doc_p, dig_p) = _load(args.input_p)
    (doc_q, dig_q) = _load(args.input_q)
    p = parse_povm(doc_p, args.input_p)
    q = parse_povm(doc_q, args.input_q)
    if p.dim != q.dim:
        raise DimMismatch(f"POVMs on dims {p.dim} and {q.dim}")
    kind = "distance" if args.measure == "dist" else "fidelity"
    name = "povm_distance" if kind == "distance" else "povm_fidelity"
    report, code = _measure_report(
        povm_to_ensemble(p), povm_to_ensemble(q), kind, args, (dig_p, dig_q), name
    )
    _emit(report)
    return code


def cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(args.level)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"{SEED_ENV}={raw!r}: expected an integer") from exc


def _add_solver_flags(sp) -> None:
    sp.add_argument("--method", choices=["kantorovich", "ehs"], default="kantorovich")
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--max-iter", type=int, default=5000, dest="max_iter")
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-metrics",
        description="Distances and fidelities between ensembles of quantum states, "
        "generalized measurements, and POVMs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dist", help="ensemble distance")
    sp.add_argument("input_a")
    sp.add_argument("input_b")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("fid", help="ensemble fidelity")
    sp.add_argument("input_a")
    sp.add_argument("input_b")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_fid)

    sp = sub.add_parser("channel", help="measures between generalized measurements")
    sp.add_argument("input_m")
    sp.add_argument("input_n")
    sp.add_argument("--compare", choices=["iso", "worst"], default="iso")
    sp.add_argument("--measure", choices=["dist", "fid"], default="dist")
    sp.add_argument("--worst-restarts", type=int, default=32, dest="worst_restarts")
    sp.add_argument("--worst-steps", type=int, default=500, dest="worst_steps")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_channel)

    sp = sub.add_parser("povm", help="measures between POVMs")
    sp.add_argument("input_p")
    sp.add_argument("input_q")
    sp.add_argument("--measure", choices=["dist", "fid"], default="dist")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_povm)

    sp = sub.add_parser("selftest", help="run the embedded property suites")
    sp.add_argument("--level", choices=["quick", "full"], default="quick")
    sp.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports its own errors with code 2
        return int(exc.code or 0)
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _default_seed()
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimMismatch as exc:
        print(f"dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (InvalidMeasurement, InvalidPovm) as exc:
        print(f"invalid device: {exc}", file=sys.stderr)
        return EXIT_INVALID_DEVICE
    except EnsembleMetricsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
