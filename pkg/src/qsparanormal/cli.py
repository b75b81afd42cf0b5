"""Command-line front end.

Exit codes: 0 all checks passed / Member, 1 a definite NonMember or
violation was found, 2 an Inconclusive verdict is present (and nothing
definite was refuted), 64 usage error, 65 input data error, 70 a gallery
expectation was not reproduced.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import gallery
from .classes import ClassId, Family
from .errors import InputFormatError, OperatorError
from .linalg import DEFAULT_TOL, load_matrix, matrix_from_json
from .membership import SearchConfig, Status, check, classify
from .shifts import (
    WeightSequence,
    shift_is_normaloid,
    shift_norm,
    shift_spectral_radius,
    shift_verdict,
)
from .spectral import spectral_report
from .structure import build_similarity, decompose

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_EXPECTATION = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p, matrix=True):
    if matrix:
        p.add_argument("--matrix", type=Path, required=True, metavar="PATH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--mu-grid", type=int, default=201)
    p.add_argument("--json", action="store_true", help="print a JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsparanormal", description="Membership checks for quasi-*-paranormal type operator classes.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="decide membership of one class")
    _common(p)
    p.add_argument("--class", dest="family", required=True, choices=[f.value for f in Family])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("classify", help="sweep all classes up to the given n and k")
    _common(p)
    p.add_argument("--n", type=int, default=2, help="largest n in the sweep")
    p.add_argument("--k", type=int, default=3, help="largest k in the sweep")

    p = sub.add_parser("shift-check", help="exact verdict for a weighted shift")
    _common(p, matrix=False)
    p.add_argument("--weights", type=Path, required=True, metavar="PATH")
    p.add_argument("--class", dest="family", default="qsp", choices=["qsp", "qp", "qh", "normaloid"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("decompose", help="range(T^k) / ker(T*^k) block decomposition")
    _common(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("similar", help="similarity of [[A, B], [0, C]] to A (+) C")
    _common(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("spectral", help="point spectra and kernel checks")
    _common(p)
    p.add_argument("--k", type=int, default=0)

    p = sub.add_parser("gallery", help="run gallery entries (all when no id is given)")
    _common(p, matrix=False)
    p.add_argument("ids", nargs="*", metavar="ID")
    return parser


def _config(args) -> SearchConfig:
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    if args.mu_grid < 2:
        raise UsageError("--mu-grid must be at least 2")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    return SearchConfig(restarts=args.restarts, mu_grid=args.mu_grid, seed=args.seed, tol=args.tol)


def _class_from_args(family, n, k) -> ClassId:
    fam = Family(family)
    try:
        if fam in (Family.QUASI_STAR_PARANORMAL, Family.QUASI_PARANORMAL):
            if n is None or k is None:
                raise UsageError(f"--class {family} needs --n and --k")
            return ClassId(fam, n, k)
        if fam in (Family.QUASI_STAR_CLASS_A, Family.QUASI_HYPONORMAL):
            if k is None:
                raise UsageError(f"--class {family} needs --k")
            if n is not None:
                raise UsageError(f"--class {family} takes no --n")
            return ClassId(fam, None, k)
        if n is not None or k is not None:
            raise UsageError("--class normaloid takes no --n or --k")
        return ClassId.normaloid()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputFormatError(f"cannot read file ({exc.strerror})", path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON ({exc})", path) from exc


def _load_matrix(path: Path) -> np.ndarray:
    if not path.exists():
        raise InputFormatError("file not found", path)
    T = load_matrix(path)
    if T.shape[0] != T.shape[1]:
        raise InputFormatError(f"matrix must be square, got {T.shape[0]}x{T.shape[1]}", path, "cols")
    return T


def _verdict_code(statuses) -> int:
    statuses = list(statuses)
    if Status.NON_MEMBER in statuses:
        return EXIT_REFUTED
    if Status.INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _verdict_line(v) -> str:
    mu = "" if v.mu is None else f"  mu={v.mu:.6g}"
    return f"{str(v.cls):<12} {v.status.value:<12} margin={v.margin:+.6e}  engine={v.engine.value}{mu}"


# -- verbs --------------------------------------------------------------------


def _cmd_check(args):
    cls = _class_from_args(args.family, args.n, args.k)
    T = _load_matrix(args.matrix)
    v = check(T, cls, _config(args))
    report = v.to_json()
    text = _verdict_line(v)
    if v.witness is not None:
        text += "\nwitness: " + " ".join(f"{z.real:+.4f}{z.imag:+.4f}j" for z in v.witness)
    return _verdict_code([v.status]), report, text


def _cmd_classify(args):
    if args.n < 0 or args.k < 0:
        raise UsageError("--n and --k must be nonnegative")
    T = _load_matrix(args.matrix)
    res = classify(T, range(args.n + 1), range(args.k + 1), _config(args))
    text = "\n".join(_verdict_line(v) for v in res.verdicts)
    return _verdict_code(v.status for v in res.verdicts), {"verdicts": res.to_json()}, text


def _cmd_shift_check(args):
    obj = _read_json(args.weights)
    ws = WeightSequence.from_json(obj, args.weights)
    rad = shift_spectral_radius(ws)
    report = {
        "weights": ws.to_json(),
        "norm": str(shift_norm(ws)),
        "spectral_radius": str(rad) if not isinstance(rad, float) else rad,
        "normaloid": shift_is_normaloid(ws),
    }
    if args.family == "normaloid":
        _class_from_args("normaloid", args.n, args.k)
        ok = report["normaloid"]
        report["status"] = "Member" if ok else "NonMember"
        text = f"normaloid    {report['status']}  norm={report['norm']} spectral_radius={report['spectral_radius']}"
        return (EXIT_OK if ok else EXIT_REFUTED), report, text
    cls = _class_from_args(args.family, args.n, args.k)
    v = shift_verdict(ws, cls)
    report["verdict"] = v.to_json()
    text = f"{str(cls):<12} {v.status.value}"
    if v.is_non_member:
        d = v.details
        text += f"  first violation at m={d['first_violation']}: {d['lhs']} > {d['rhs']}"
    return _verdict_code([v.status]), report, text


def _cmd_decompose(args):
    if args.k < 0:
        raise UsageError("--k must be nonnegative")
    T = _load_matrix(args.matrix)
    dec = decompose(T, args.k, args.tol)
    text = (
        f"range(T^{args.k}) dim {dec.T1.shape[0]}, ker(T*^{args.k}) dim {dec.T3.shape[0]}\n"
        f"lower-left residual {dec.residual:.3e}, |T3^k| {dec.t3_power_norm:.3e}, "
        f"T3 nilpotent {dec.t3_nilpotent}, spectra match {dec.spectrum_match}"
    )
    return EXIT_OK, dec.to_json(), text


def _cmd_similar(args):
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    obj = _read_json(args.matrix)
    if not isinstance(obj, dict):
        raise InputFormatError("expected an object with blocks A, B, C", args.matrix)
    blocks = {}
    for key in ("A", "B", "C"):
        if key not in obj:
            raise InputFormatError("missing block", args.matrix, key)
        try:
            blocks[key] = matrix_from_json(obj[key], args.matrix)
        except InputFormatError as exc:
            field = key if exc.field is None else f"{key}.{exc.field}"
            raise InputFormatError(exc.message, args.matrix, field) from exc
    try:
        res = build_similarity(blocks["A"], blocks["B"], blocks["C"], args.k, args.tol)
    except ValueError as exc:
        if isinstance(exc, OperatorError):
            raise
        raise InputFormatError(str(exc), args.matrix) from exc
    text = (
        f"sylvester residual {res.sylvester_residual:.3e}\n"
        f"intertwining residual {res.intertwining_residual:.3e}\n"
        f"similarity residual {res.similarity_residual:.3e}"
    )
    return EXIT_OK, res.to_json(), text


def _cmd_spectral(args):
    if args.k < 0:
        raise UsageError("--k must be nonnegative")
    T = _load_matrix(args.matrix)
    rep = spectral_report(T, args.k, args.tol)
    lines = ["eigenvalue            mult  joint"]
    for e in rep.clusters:
        joint = any(abs(e.value - z) == 0 for z in rep.joint_eigenvalues)
        lines.append(f"{e.value.real:+.6f}{e.value.imag:+.6f}j  {e.multiplicity:>4}  {joint}")
    for v in rep.violations:
        lines.append(f"violation {v.check} at {v.lam:.6g}: residual {v.residual:.3e}")
    return (EXIT_OK if rep.ok else EXIT_REFUTED), rep.to_json(), "\n".join(lines)


def _cmd_gallery(args):
    ids = args.ids or list(gallery.BUILDERS)
    unknown = [i for i in ids if i not in gallery.BUILDERS]
    if unknown:
        raise UsageError(f"unknown gallery id(s): {', '.join(unknown)}; known: {', '.join(gallery.BUILDERS)}")
    cfg = _config(args)
    reports, lines = [], []
    failed = refuted = False
    for i in ids:
        entry = gallery.get(i)
        results = entry.run(cfg)
        reports.append(entry.to_json(results))
        lines.append(f"{entry.id}: {entry.title}")
        for r in results:
            lines.append(f"  [{'pass' if r.passed else 'FAIL'}] {r.description}: expected {r.expected}, got {_fmt(r.observed)}")
            failed |= not r.passed
            refuted |= r.passed and r.refutes
    code = EXIT_EXPECTATION if failed else (EXIT_REFUTED if refuted else EXIT_OK)
    return code, {"entries": reports}, "\n".join(lines)


COMMANDS = {
    "check": _cmd_check,
    "classify": _cmd_classify,
    "shift-check": _cmd_shift_check,
    "decompose": _cmd_decompose,
    "similar": _cmd_similar,
    "spectral": _cmd_spectral,
    "gallery": _cmd_gallery,
}


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, report, text = COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except InputFormatError as exc:
        print(f"data error: {exc}", file=stderr)
        return EXIT_DATA
    except OperatorError as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    print(dumps(report) if args.json else text, file=stdout)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
