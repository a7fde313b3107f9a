"""Command-line front end: machine JSON on stdout, summaries on stderr.

Exit codes: 0 success, 1 a checked property failed, 2 usage error.

Machine output is deterministic by construction — keys are sorted and
nothing time- or host-dependent is ever written to stdout (wall times
go to the stderr summary) — so identical flags and seed produce
byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import padyn
from padyn import acceptance
from padyn.borel import build_flow_group
from padyn.config import GlobalConfig, is_prime
from padyn.flows import GROUP_TAGS, minimal_subflows
from padyn.padic import PadicMatrix2, format_rational, parse_rational
from padyn.proj import ProjLevel, collapse_check, minimality_proximality_report
from padyn.residues import build_group
from padyn.sl2 import ellis_group, iwasawa, minimal_flow
from padyn.types1 import ScaleLadder

_CHECK_NAMES = tuple(name for name, _, _ in acceptance.CHECKS)


class UsageError(ValueError):
    """Flag combination the parser accepts but the domain rejects."""


@dataclass(frozen=True)
class RunReport:
    """Consolidated verification report: config echo, seed, results."""

    config: GlobalConfig
    seed: int
    version: str
    passed: bool
    checks: tuple

    def to_json(self) -> dict:
        return {
            "config": {
                "p": self.config.prime,
                "n": self.config.residue_level_n,
                "m": self.config.matrix_level_m,
                "w": self.config.valuation_window_w,
                "ladder_gap": self.config.ladder_gap,
            },
            "seed": self.seed,
            "version": self.version,
            "passed": self.passed,
            "checks": list(self.checks),
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padyn",
        description="Exact finite truncations of p-adic group flows.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=5, help="prime (default 5)")
    common.add_argument("--n", type=int, default=2, help="power-class level (default 2)")
    common.add_argument("--m", type=int, default=1, help="matrix congruence level (default 1)")
    common.add_argument("--w", type=int, default=2, help="valuation window (default 2)")
    common.add_argument("--gap", type=int, default=8, help="ladder gap (default 8)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("residues", parents=[common], help="power-residue class group table")
    flows = sub.add_parser("flows", parents=[common], help="affine flow minimal subflows")
    flows.add_argument("--group", default="gm", help=f"acting group, one of {GROUP_TAGS}")
    sub.add_parser("borel", parents=[common], help="triangular flow group table")
    iwa = sub.add_parser("iwasawa", parents=[common], help="integral-times-triangular factorization")
    iwa.add_argument(
        "--entries",
        default=None,
        help="matrix entries 'a b c d' as exact rationals (default: 1/p 0 1 p)",
    )
    sub.add_parser("minimal-flow", parents=[common], help="full flow connectivity report")
    sub.add_parser("ellis", parents=[common], help="identity-fiber group and tower report")
    proj = sub.add_parser("proj", parents=[common], help="projective-line flow reports")
    proj.add_argument("report", choices=("collapse", "minimal"))
    verify = sub.add_parser("verify", parents=[common], help="run the acceptance battery")
    scope = verify.add_mutually_exclusive_group()
    scope.add_argument("--all", action="store_true", help="run every check (the default)")
    scope.add_argument("--check", choices=_CHECK_NAMES, help="run a single named check")
    verify.add_argument(
        "--seed", type=int, default=None, help="override PADYN_SEED for randomized sweeps"
    )
    return parser


def _config_from(args: argparse.Namespace) -> GlobalConfig:
    if not is_prime(args.p):
        raise UsageError(f"--p {args.p} is not prime")
    return GlobalConfig(
        prime=args.p,
        residue_level_n=args.n,
        matrix_level_m=args.m,
        valuation_window_w=args.w,
        ladder_gap=args.gap,
    )


def _ladder(config: GlobalConfig) -> ScaleLadder:
    return ScaleLadder.build(config.ladder_gap, config.valuation_window_w, length=4)


def _rows_json(matrix: PadicMatrix2) -> list[list[str]]:
    return [[format_rational(entry) for entry in row] for row in matrix.rows()]


def _seed_from(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get("PADYN_SEED")
    if raw is None:
        return acceptance.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PADYN_SEED must be an integer, got {raw!r}")


def _cmd_residues(args, config):
    group = build_group(config.prime, config.residue_level_n)
    payload = {"p": config.prime, "n": config.residue_level_n, "group": group.to_json()}
    lines = [f"residue group at p={config.prime}, n={config.residue_level_n}: order {group.order}"]
    return 0, payload, lines


def _cmd_flows(args, config):
    report = minimal_subflows(args.group, config)
    sizes = sorted(len(family) for family in report.minimal_subflows)
    lines = [f"{report.group_tag}: {len(sizes)} minimal subflow(s), sizes {sizes}"]
    return 0, report.to_json(), lines


def _cmd_borel(args, config):
    fg = build_flow_group(config.prime, config.residue_level_n, _ladder(config))
    payload = {"p": config.prime, "n": config.residue_level_n, **fg.to_json()}
    ok = fg.idempotent_check() and fg.isomorphic_to_residue_group()
    lines = [f"flow group of order {fg.order}; matches residue group: {ok}"]
    return (0 if ok else 1), payload, lines


def _cmd_iwasawa(args, config):
    p = config.prime
    if args.entries is None:
        g = PadicMatrix2.of(((Fraction(1, p), 0), (1, p)), p)
    else:
        tokens = args.entries.replace(",", " ").replace(";", " ").split()
        if len(tokens) != 4:
            raise UsageError("--entries needs exactly four rationals")
        try:
            a, b, c, d = (parse_rational(tok) for tok in tokens)
        except ValueError:
            raise UsageError(f"could not parse matrix entries {args.entries!r}")
        g = PadicMatrix2.of(((a, b), (c, d)), p)
    if g.det() != 1:
        raise UsageError(f"matrix determinant must be 1, got {g.det()}")
    t, h = iwasawa(g)
    payload = {
        "p": p,
        "input": _rows_json(g),
        "integral_factor": _rows_json(t),
        "triangular_factor": _rows_json(h),
        "exact": (t @ h).rows() == g.rows(),
    }
    lines = [f"factored over p={p}; reconstruction exact: {payload['exact']}"]
    return 0, payload, lines


def _cmd_minimal_flow(args, config):
    report = minimal_flow(
        config.prime, config.residue_level_n, config.matrix_level_m, _ladder(config)
    )
    ok = report.strongly_connected and report.idempotent
    lines = [
        f"{report.size} states; strongly connected: {report.strongly_connected}; "
        f"basepoint idempotent: {report.idempotent}"
    ]
    return (0 if ok else 1), report.to_json(), lines


def _cmd_ellis(args, config):
    report = ellis_group(
        config.prime, config.residue_level_n, config.matrix_level_m, _ladder(config)
    )
    iso_ok = all(report.iso_by_level.values())
    tower_ok = all(flag for (_, _, flag) in report.tower)
    lines = [
        f"identity-fiber group of order {report.order}; "
        f"isomorphic at every level: {iso_ok}; tower commutes: {tower_ok}"
    ]
    return (0 if iso_ok and tower_ok else 1), report.to_json(), lines


def _cmd_proj(args, config):
    level = ProjLevel(config.prime, config.residue_level_n, config.valuation_window_w)
    ladder = _ladder(config)
    if args.report == "collapse":
        report = collapse_check(level, ladder=ladder, level_m=config.matrix_level_m)
        ok = report.collapsed
        lines = [
            f"{report.states_checked} types; collapsed: {report.collapsed} "
            f"onto {report.collapsed_type}"
        ]
    else:
        report = minimality_proximality_report(
            level, level_m=config.matrix_level_m, ladder=ladder
        )
        ok = report.strongly_connected and report.proximal
        lines = [
            f"{report.size} states; strongly connected: {report.strongly_connected}; "
            f"proximal: {report.proximal}"
        ]
    return (0 if ok else 1), report.to_json(), lines


def _cmd_verify(args, config):
    seed = _seed_from(args)
    outcome = acceptance.run_all(seed=seed, only=args.check)
    checks = []
    lines = []
    for result in outcome["results"]:
        checks.append(
            {
                key: value
                for key, value in result.items()
                if key not in ("seconds", "budget_seconds", "within_budget")
            }
        )
        verdict = "pass" if result["passed"] else "FAIL"
        budget_note = "" if result["within_budget"] else " (over budget)"
        lines.append(
            f"{result['check']}: {verdict} in {result['seconds']}s"
            f"/{result['budget_seconds']}s{budget_note}"
        )
    passed = all(entry["passed"] for entry in checks)
    lines.append(f"total: {outcome['total_seconds']}s; passed: {passed}")
    report = RunReport(
        config=config,
        seed=seed,
        version=padyn.__version__,
        passed=passed,
        checks=tuple(checks),
    )
    return (0 if passed else 1), report.to_json(), lines


_HANDLERS = {
    "residues": _cmd_residues,
    "flows": _cmd_flows,
    "borel": _cmd_borel,
    "iwasawa": _cmd_iwasawa,
    "minimal-flow": _cmd_minimal_flow,
    "ellis": _cmd_ellis,
    "proj": _cmd_proj,
    "verify": _cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        config = _config_from(args)
        code, payload, lines = _HANDLERS[args.command](args, config)
    except (UsageError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    for line in lines:
        print(line, file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
