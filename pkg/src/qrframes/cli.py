"""Command-line entry point ``qrf``.

Exit codes: 0 success, 2 a verification check failed, 1 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .errors import QRFError
from .groups import build_group, verify_group_axioms
from .hilbert import build_encoding
from .reversible import translation_equivalence_check, verify_lemmas
from .scenarios import dump_report, run_scenario, run_wigner
from .theory import consistency_probe, orthonormality_crosscheck

OK, USAGE, FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--tolerance", type=float, default=1e-10)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    p.set_defaults(pretty=False)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="qrf", description="Quantum reference frames for finite groups.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("group", parents=[common], help="build a group and print its table")
    p.add_argument("spec")
    p.add_argument("--verify", action="store_true", help="run the axiom checks")

    p = sub.add_parser("verify", parents=[common], help="unitarity, inverse and composition checks")
    p.add_argument("--group", required=True)
    p.add_argument("--systems", type=int, required=True)

    p = sub.add_parser("probe", parents=[common], help="Gram-matrix probe of an encoding")
    p.add_argument("--encoding", required=True, help="half-angle:m or regular:<group>")

    for name in ("transform", "truncate"):
        p = sub.add_parser(name, parents=[common], help=f"run a scenario file ({name})")
        p.add_argument("scenario")
        if name == "truncate":
            p.add_argument("--slots", help="comma-separated system names; overrides the file's pipeline")

    p = sub.add_parser("wigner", parents=[common], help="Wigner's friend")
    p.add_argument("--alpha", type=_complex_arg, required=True)
    p.add_argument("--beta", type=_complex_arg, required=True)
    p.add_argument("--with-reference", action="store_true")

    p = sub.add_parser("equivalence", parents=[common], help="parity-swap / controlled-shift comparison")
    p.add_argument("--d", type=int, required=True)
    return parser


def _group(args) -> tuple[dict, bool]:
    G = build_group(args.spec)
    out = {
        "name": G.name,
        "order": G.order,
        "identity": G.identity,
        "labels": list(G.labels),
        "cayley": G.cayley.tolist(),
    }
    d = G.decomposition
    if d is not None:
        out["decomposition"] = {"mode": d.mode, "normal": list(d.normal), "transversal": list(d.transversal)}
    ok = True
    if args.verify:
        rep = verify_group_axioms(G)
        out["verification"] = rep.to_dict()
        ok = rep.passed
    return out, ok


def _probe(args) -> tuple[dict, bool]:
    model = build_encoding(args.encoding)
    probe = consistency_probe(model, args.tolerance)
    cross = orthonormality_crosscheck(model, args.tolerance)
    return {"probe": probe.to_dict(), "crosscheck": cross.to_dict()}, cross.passed


def _scenario(args) -> tuple[dict, bool]:
    pipeline = None
    if getattr(args, "slots", None):
        pipeline = [{"op": "truncate", "slots": [s.strip() for s in args.slots.split(",")]}]
    report = run_scenario(args.scenario, args.tolerance, pipeline)
    return report, report["passed"]


def _wigner(args) -> tuple[dict, bool]:
    res = run_wigner(args.alpha, args.beta, args.with_reference, args.tolerance)
    return res.to_dict(), res.oracle_residual < args.tolerance


def run(args) -> tuple[dict, bool]:
    cmd = args.command
    if cmd == "group":
        return _group(args)
    if cmd == "verify":
        rep = verify_lemmas(build_group(args.group), args.systems, args.tolerance)
        return rep.to_dict(), rep.passed
    if cmd == "probe":
        return _probe(args)
    if cmd in ("transform", "truncate"):
        return _scenario(args)
    if cmd == "wigner":
        return _wigner(args)
    if cmd == "equivalence":
        rep = translation_equivalence_check(args.d, args.tolerance)
        return rep.to_dict(), rep.passed
    raise AssertionError(cmd)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, ok = run(args)
    except (QRFError, ValueError, IndexError) as exc:
        print(f"qrf: error: {exc}", file=sys.stderr)
        return USAGE
    text = dump_report(payload, args.pretty)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK if ok else FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
