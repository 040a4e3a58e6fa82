"""Command-line front end.

    nestedrisk tc-check --pair p.json --mode wtc|utc|stc [--order componentwise] [--tol 1e-9]
    nestedrisk avar --space s.json --beta 0.5 --rv x.json [--partition p.json]
    nestedrisk properties --check monotone|homogeneous|translation|convex --spec spec.json
    nestedrisk acceptance-check --rho global_max --factor conditional_max --partition p.json --window=-2..2
    nestedrisk conjugate-check --system sys.json --g g.json [--exploratory]

Exit status: 0 pass, 1 fail (a witness is printed), 2 input or usage error.
Add ``--report json`` for a machine-readable report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .verdict import InconclusiveError, InputError, Verdict, jsonable

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class Report:
    tool_version: str
    check_name: str
    verdict: Optional[Verdict]
    inputs_digest: str
    timing_ms: float
    result: Any = None
    arguments: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "check_name": self.check_name,
            "verdict": self.verdict.to_dict() if self.verdict is not None else None,
            "inputs_digest": self.inputs_digest,
            "timing_ms": self.timing_ms,
            "result": jsonable(self.result),
            "arguments": jsonable(self.arguments),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(
            d["tool_version"],
            d["check_name"],
            Verdict.from_dict(d["verdict"]) if d.get("verdict") else None,
            d["inputs_digest"],
            d["timing_ms"],
            d.get("result"),
            d.get("arguments") or {},
        )

    def to_text(self) -> str:
        lines = []
        if self.verdict is not None:
            v = self.verdict
            lines.append(f"{self.check_name}: {v.outcome.upper()}")
            if v.witness is not None:
                lines.append("witness: " + json.dumps(jsonable(v.witness), sort_keys=True))
            if v.discrepancy is not None:
                lines.append(f"discrepancy: {jsonable(v.discrepancy)}")
            for k, val in sorted(v.details.items()):
                lines.append(f"  {k}: {json.dumps(jsonable(val), sort_keys=True)}")
        if self.result is not None:
            lines.append(json.dumps(jsonable(self.result)))
        return "\n".join(lines)


def _load(path: str, what: str, digests: list) -> Any:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"--{what}: cannot read {path!r} ({e.strerror})")
    digests.append((what, raw))
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise InputError(f"--{what}: {path!r} is not valid JSON ({e.msg} at line {e.lineno})")


def _digest(digests: list) -> str:
    h = hashlib.sha256()
    for name, raw in digests:
        h.update(name.encode() + b"\0" + hashlib.sha256(raw).digest())
    return "sha256:" + h.hexdigest()


# ---------------------------------------------------------------------------
# subcommands


def _order(arg: Optional[str], default: Optional[str], digests: list, tol: float):
    from .consistency import make_order

    spec = arg if arg is not None else default
    if spec is None or spec in ("componentwise", "natural", "equality"):
        return make_order(spec, tol)
    return make_order(_load(spec, "order", digests), tol)


def cmd_tc_check(args, digests):
    from .consistency import check_stc, check_utc, check_wtc, pair_from_json

    pair = pair_from_json(_load(args.pair, "pair", digests))
    if args.mode == "wtc":
        return check_wtc(pair, args.tol), None
    oA = _order(args.order_a, args.order, digests, args.tol)
    oF = _order(args.order_f, args.order, digests, args.tol)
    if args.mode == "utc":
        return check_utc(pair, oA, oF, args.tol), None
    oH = _order(args.order_h, args.order, digests, args.tol)
    return check_stc(pair, oH, oA, oF, args.tol), None


def cmd_avar(args, digests):
    from .riskmeasures import avar, conditional_avar_blocks
    from .space import FiniteProbSpace, Partition

    space = FiniteProbSpace.from_json(_load(args.space, "space", digests))
    rv = _load(args.rv, "rv", digests)
    if isinstance(rv, dict):
        if "values" not in rv:
            raise InputError("--rv: expected a list or an object with a 'values' field")
        rv = rv["values"]
    if args.partition:
        p = Partition.from_json(_load(args.partition, "partition", digests), space.size)
        return None, conditional_avar_blocks(space, args.beta, p, rv).tolist()
    return None, avar(space, args.beta, rv)


def cmd_properties(args, digests):
    from . import properties as pr

    spec = _load(args.spec, "spec", digests)
    if not isinstance(spec, dict):
        raise InputError("--spec: expected a JSON object")
    tol = args.tol if args.tol is not None else pr.DEFAULT_TOL

    def mapping(key):
        if key not in spec:
            raise InputError(f"--spec: missing field '{key}'")
        return pr.builtin_mapping(spec[key])

    if args.check == "monotone":
        return pr.check_monotone_first_arg(mapping("mapping"), args.samples, args.seed, tol), None
    if args.check == "translation":
        inv = spec.get("invariants")
        if not inv:
            raise InputError("--spec: 'invariants' must be a nonempty list")
        return pr.check_translation_invariance(mapping("mapping"), inv, args.samples, args.seed, tol), None
    if args.check == "convex":
        return pr.check_midpoint_convexity(mapping("mapping"), args.samples, args.seed, tol, spec.get("assumption")), None
    lambdas = spec.get("lambdas", [0.0, 0.5, 2.0])
    return (
        pr.check_positive_homogeneity(
            mapping("aggregator"), mapping("factor"), mapping("subaggregator"), lambdas, args.samples, args.seed, tol
        ),
        None,
    )


def cmd_acceptance(args, digests):
    from .acceptance import GroupTIMapping, LatticeWindow, aggregator_from_rho, check_acceptance_identity
    from .consistency import check_utc
    from .space import Partition

    p = Partition.from_json(_load(args.partition, "partition", digests))
    n = p.size
    window = LatticeWindow.parse(args.window, n)
    heads = Partition.from_json(_load(args.heads_partition, "heads-partition", digests), n) if args.heads_partition else None

    def build(kind):
        return GroupTIMapping(kind, p, n=n)

    rho, f = build(args.rho), build(args.factor)
    verdict = check_acceptance_identity(rho, f, window, heads)
    if not args.no_cross_check:
        pair = aggregator_from_rho(rho, f, window, heads)
        utc = check_utc(pair)
        verdict.details["utc_on_induced_pair"] = {"outcome": utc.outcome, "witness": utc.witness}
        verdict.details["agrees_with_utc"] = utc.passed == verdict.passed
    return verdict, None


def cmd_conjugate(args, digests):
    import numpy as np

    from .conjugacy import check_nested_conjugate, function_from_json, system_from_json

    sysm = system_from_json(_load(args.system, "system", digests))
    g = function_from_json(_load(args.g, "g", digests))
    rng = np.random.default_rng(args.seed)
    return check_nested_conjugate(sysm, g, exploratory=args.exploratory, rng=rng, random_tries=args.samples or 0), None


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestedrisk", description="Time-consistency checks on finite spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", choices=("text", "json"), default="text")

    p = sub.add_parser("tc-check", help="weak/usual/strong time consistency of a tabulated pair")
    p.add_argument("--pair", required=True)
    p.add_argument("--mode", choices=("wtc", "utc", "stc"), default="wtc")
    p.add_argument("--order", default=None, help="componentwise | equality | path to {'relation': [[a, b], ...]}")
    p.add_argument("--order-h", default=None)
    p.add_argument("--order-a", default=None)
    p.add_argument("--order-f", default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)
    p.set_defaults(func=cmd_tc_check)

    p = sub.add_parser("avar", help="(conditional) Average Value-at-Risk")
    p.add_argument("--space", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rv", required=True)
    p.add_argument("--partition", default=None)
    common(p)
    p.set_defaults(func=cmd_avar)

    p = sub.add_parser("properties", help="sampled monotonicity/homogeneity/translation/convexity checks")
    p.add_argument("--check", choices=("monotone", "homogeneous", "translation", "convex"), required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_properties)

    p = sub.add_parser("acceptance-check", help="acceptance-set identity on an integer window")
    p.add_argument("--rho", required=True)
    p.add_argument("--factor", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--heads-partition", default=None)
    p.add_argument("--window", default="-2..2")
    p.add_argument("--no-cross-check", action="store_true", help="skip the UTC check on the induced pair")
    common(p)
    p.set_defaults(func=cmd_acceptance)

    p = sub.add_parser("conjugate-check", help="nested formula for Fenchel-Moreau conjugates")
    p.add_argument("--system", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--exploratory", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=0, help="random g to try in exploratory mode")
    common(p)
    p.set_defaults(func=cmd_conjugate)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_PASS
    digests: list = []
    start = time.perf_counter()
    try:
        verdict, result = args.func(args, digests)
    except (InputError, InconclusiveError) as e:
        print(f"error: {e}", file=stderr)
        return EXIT_ERROR
    elapsed = (time.perf_counter() - start) * 1000.0
    arguments = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "report")}
    report = Report(__version__, args.command, verdict, _digest(digests), round(elapsed, 3), result, arguments)
    if args.report == "json":
        print(report.to_json(), file=stdout)
    else:
        print(report.to_text(), file=stdout)
    if verdict is None:
        return EXIT_PASS
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
