"""Batch front-end: compute correlator tables, verify them, emit quantum
operators, and run the WKB cross-checks.

Config files are JSON curve documents (the same shape CurveSpec.to_jsonable
emits).  All output documents are canonical JSON: sorted keys, exact
rationals as "p/q" strings, trailing newline, so byte equality is the
regression test.

Exit codes: 0 all checks pass, 1 a verifier reported a failure, 2 invalid
input or configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BAD = 2

_UNCHECKED_ENV = "SHIFTEDTR_ALLOW_UNCHECKED"


def canonical_json(doc, pretty=False):
    if pretty:
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def write_document(doc, path, pretty=False):
    text = canonical_json(doc, pretty)
    with open(path, "w") as fh:
        fh.write(text)


def _load_curve(path, fixtures):
    from .curve import CurveSpec

    with open(path) as fh:
        doc = json.load(fh)
    return CurveSpec.from_config(doc, _unchecked=fixtures)


def _load_table(path):
    from .series import CorrelatorTable

    with open(path) as fh:
        return CorrelatorTable.from_jsonable(json.load(fh))


def _emit(out, line):
    print(line, file=out)


def _sections_dict(table):
    """Raw {(two_g, n): {keys: Rat}} view used by the constraint verifier."""
    return {sec: table.section(*sec) for sec in table.sectors()}


def _report_lines(out, rep):
    ok = rep.ok
    _emit(out, "%s: %s" % (rep.check, "PASS" if ok else "FAIL"))
    if not ok:
        for f in rep.failures[:3]:
            _emit(out, "  at %r: %r" % (f["location"], f["witness"]))
        if len(rep.failures) > 3:
            _emit(out, "  (%d more failures)" % (len(rep.failures) - 3))
    return ok


def cmd_compute(args, out):
    from .tr import run_curve

    curve = _load_curve(args.curve, args.fixtures)
    state = run_curve(curve, args.chi, strict=not args.fixtures)
    doc = state.export_table().to_jsonable()
    if args.out:
        write_document(doc, args.out, args.pretty)
        _emit(out, "table written to %s" % args.out)
    else:
        sys.stdout.write(canonical_json(doc, args.pretty))
    _emit(out, "computed %d sectors through chi=%d" % (len(doc["entries"]), args.chi))
    return EXIT_OK


def cmd_verify(args, out):
    from .tr import run_curve, state_from_table
    from .airy import verify_w_constraints

    curve = _load_curve(args.curve, args.fixtures)
    if args.table:
        table = _load_table(args.table)
        state = state_from_table(curve, table, strict=not args.fixtures)
    else:
        state = run_curve(curve, args.chi, strict=not args.fixtures)
        table = state.export_table()
    reports = [
        state.verify_symmetry_and_identity(),
        state.verify_loop_equations(),
    ]
    if curve.f02:
        _emit(out, "w-constraints: skipped (deformed bidifferential is refused by the verifier)")
    else:
        n_cap = min(state.chi_done + 1, 4)
        reports.append(verify_w_constraints(curve, _sections_dict(table), n_cap, 3))
    ok = True
    for rep in reports:
        ok = _report_lines(out, rep) and ok
    if args.out:
        write_document({"reports": [r.to_jsonable() for r in reports]}, args.out, args.pretty)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_qc(args, out):
    from .tr import run_curve
    from .qcurve import (
        build_quantum_operator,
        pretty_operator,
        resolvent,
        verify_quantum_curve,
    )

    curve = _load_curve(args.curve, args.fixtures)
    order = args.order
    op = build_quantum_operator(curve, order)
    _emit(out, pretty_operator(curve, order))
    state = run_curve(curve, order - 1, strict=not args.fixtures)
    F = resolvent(state.export_table(), order)
    qrep = verify_quantum_curve(op, F, order)
    if qrep.ok:
        _emit(out, "quantum-curve: PASS (annihilation through hbar^%d)" % qrep.order)
    else:
        _emit(out, "quantum-curve: FAIL at hbar^%d, witness %r" % (qrep.order + 1, qrep.witness))
    if args.out:
        write_document(op.to_jsonable(), args.out, args.pretty)
    return EXIT_OK if qrep.ok else EXIT_FAIL


def cmd_wkb(args, out):
    from .tr import run_curve
    from .wkb import (
        build_connection_data,
        cross_check,
        determinant_diagnostic,
        solve_formal_gauge,
    )

    curve = _load_curve(args.curve, args.fixtures)
    L = args.order
    data = build_connection_data(curve, L)
    gauge = solve_formal_gauge(data, L)
    state = run_curve(curve, L - 1, strict=not args.fixtures)
    rep = cross_check(state.export_table(), data, gauge)
    ok = _report_lines(out, rep)
    _, record = determinant_diagnostic(curve.r, curve.s, curve.shifts)
    _emit(
        out,
        "diagnostic: min exponent %s, %s (condition %s)"
        % (
            record.min_exponent,
            "topological type" if record.holomorphic else "NOT topological type",
            record.condition,
        ),
    )
    if args.out:
        write_document(
            {"cross_check": rep.to_jsonable(), "diagnostic": record.to_jsonable()},
            args.out,
            args.pretty,
        )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_all(args, out):
    from .tr import run_curve
    from .airy import verify_w_constraints
    from .qcurve import QCurveError, build_quantum_operator, resolvent, verify_quantum_curve
    from .wkb import (
        WKBError,
        build_connection_data,
        cross_check,
        determinant_diagnostic,
        solve_formal_gauge,
    )

    curve = _load_curve(args.curve, args.fixtures)
    order = args.order
    chi = max(args.chi, order - 1)
    state = run_curve(curve, chi, strict=not args.fixtures)
    table = state.export_table()
    artifacts = {"table": table.to_jsonable()}
    reports = [state.verify_symmetry_and_identity(), state.verify_loop_equations()]
    if not curve.f02:
        reports.append(verify_w_constraints(curve, _sections_dict(table), min(chi + 1, 4), 3))
    ok = True
    for rep in reports:
        ok = _report_lines(out, rep) and ok

    try:
        op = build_quantum_operator(curve, order)
        F = resolvent(table, order)
        qrep = verify_quantum_curve(op, F, order)
        artifacts["operator"] = op.to_jsonable()
        _emit(out, "quantum-curve: %s (order %d)" % ("PASS" if qrep.ok else "FAIL", qrep.order))
        ok = ok and qrep.ok
    except QCurveError as e:
        _emit(out, "quantum-curve: skipped (%s)" % e)

    try:
        data = build_connection_data(curve, order)
        gauge = solve_formal_gauge(data, order)
        wrep = cross_check(table, data, gauge)
        ok = _report_lines(out, wrep) and ok
        _, record = determinant_diagnostic(curve.r, curve.s, curve.shifts)
        artifacts["diagnostic"] = record.to_jsonable()
        artifacts["wkb"] = wrep.to_jsonable()
        _emit(out, "diagnostic condition: %s" % record.condition)
    except WKBError as e:
        _emit(out, "wkb: skipped (%s)" % e)

    artifacts["reports"] = [r.to_jsonable() for r in reports]
    if args.out:
        write_document(artifacts, args.out, args.pretty)
        _emit(out, "artifacts written to %s" % args.out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(
        prog="shiftedtr",
        description="Exact shifted topological recursion on (r,s) spectral curves.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    specs = {
        "compute": (cmd_compute, "run the recursion and write the correlator table"),
        "verify": (cmd_verify, "check symmetry, string identity, loop equations, W-constraints"),
        "qc": (cmd_qc, "emit the quantum operator and verify wave-function annihilation"),
        "wkb": (cmd_wkb, "solve the WKB gauge and cross-check amplitudes against the table"),
        "all": (cmd_all, "compute, then run every verifier and emit all artifacts"),
    }
    for name, (fn, help_text) in specs.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--curve", required=True, help="curve config JSON path")
        sp.add_argument("--chi", type=int, default=3, help="max 2g-2+n to compute")
        sp.add_argument("--order", type=int, default=4, help="hbar truncation order")
        sp.add_argument("--out", default=None, help="output document path")
        sp.add_argument("--table", default=None, help="verify an existing table document")
        sp.add_argument("--pretty", action="store_true", help="indent output documents")
        sp.add_argument(
            "--fixtures",
            action="store_true",
            help="test-only: allow unchecked curves and non-strict recursion",
        )
        sp.set_defaults(fn=fn)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.fixtures:
        os.environ[_UNCHECKED_ENV] = "1"
    if args.chi < 0 or args.order < 0:
        print("error: --chi and --order must be nonnegative", file=sys.stderr)
        return EXIT_BAD
    try:
        return args.fn(args, sys.stdout)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        print("error [%s]: %s" % (type(e).__module__ + "." + type(e).__name__, e), file=sys.stderr)
        return EXIT_BAD


if __name__ == "__main__":
    sys.exit(main())
