"""Build, analyze, decode, verify and simulate column-weight-three LDPC codes.

Every run writes a ``<out>.manifest.json`` next to its primary output. Exit
codes: 0 success, 1 verification found failures, 2 usage error, 3 file I/O,
4 malformed code file, 5 infeasible construction, 6 sweep budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import DEFAULT_BUDGET, BudgetExceeded, exhaustive_verify, fer_estimate, set_workers
from .construct import (
    ConstructionError,
    ConstructionParams,
    InfeasibleParams,
    build_code,
    construction_summary,
)
from .decoder import DecoderConfig, gallager_a_decode
from .tanner import GraphError, read_alist, write_alist
from .trapping import critical_number, find_53_structures, find_80_codewords, find_three_three, classify_subset

log = logging.getLogger("gallager3")

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BAD_CODE = 4
EXIT_INFEASIBLE = 5
EXIT_BUDGET = 6

WORKERS_ENV = "GALLAGER3_WORKERS"


class CliError(Exception):
    def __init__(self, code: int, category: str, message: str):
        super().__init__(message)
        self.code = code
        self.category = category


@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    parameters: dict
    code_digest: str | None
    seed: int | None
    tool_version: str = __version__
    wall_time: float = 0.0
    outputs: dict = field(default_factory=dict)


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, "io", f"cannot read {path}: {exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, "io", f"cannot write {path}: {exc}") from None


def _load_code(path: str):
    raw = _read_bytes(path)
    try:
        return read_alist(raw.decode()), _digest(raw)
    except (GraphError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_BAD_CODE, "malformed-code", f"{path}: {exc}") from None


def _decoder_cfg(args) -> DecoderConfig:
    return DecoderConfig(max_iterations=args.max_iter, decision_rule=args.rule)


def _add_decoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=50, help="decoder iteration cap (default 50)")
    p.add_argument("--rule", choices=["A", "B"], default="A", help="decision rule (default A)")


def _add_workers(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (default ${WORKERS_ENV} or all cores); results do not depend on it")


def _workers(args) -> int:
    want = args.workers
    if want is None and os.environ.get(WORKERS_ENV):
        want = int(os.environ[WORKERS_ENV])
    return set_workers(want)


# -- subcommands ------------------------------------------------------------------


def cmd_construct(args) -> tuple[int, RunManifest]:
    params = ConstructionParams(
        n=args.n, m=args.m, max_check_degree=args.max_check_degree, tree_depth=args.tree_depth,
        rng_seed=args.seed, randomize=args.randomize, repair_attempts=args.repair_attempts,
        avoid_53=not args.no_avoid_53,
    )
    try:
        g, clog = build_code(params, repair=not args.no_repair, fallback=not args.no_fallback)
    except InfeasibleParams as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible-parameters", str(exc)) from None
    except ConstructionError as exc:
        raise CliError(EXIT_INFEASIBLE, "construction-failed", str(exc)) from None
    text = write_alist(g)
    _write(args.out, text)
    outputs = {"code": args.out}
    if args.log:
        _write(args.log, clog.to_jsonl())
        outputs["log"] = args.log
    summary = construction_summary(g)
    summary["structures_53"] = len(find_53_structures(g))
    summary["low_weight_codewords"] = len(find_80_codewords(g).supports)
    log.info("constructed %s", json.dumps(summary, sort_keys=True))
    manifest = RunManifest("construct", [], {**asdict(params), "summary": summary}, _digest(text.encode()), args.seed,
                           outputs=outputs)
    return EXIT_OK, manifest


def cmd_analyze(args) -> tuple[int, RunManifest]:
    g, digest = _load_code(args.code)
    cfg = _decoder_cfg(args)
    rows = []
    for trio in find_three_three(g):
        rows.append(("3,3", classify_subset(g, trio), False))
    for rep in find_53_structures(g):
        rows.append(("5,3", rep, rep.approximate))
    cw = find_80_codewords(g, budget=args.budget)
    for sup in cw.supports:
        rows.append((f"{len(sup)},0", classify_subset(g, sup), False))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["type", "support", "V", "C", "cond_a", "cond_b", "approximate", "critical_number"])
    for kind, rep, approx in rows:
        crit = ""
        if args.critical and rep.V <= 10:
            res = critical_number(g, rep.vars, cfg)
            crit = "" if res.value is None else res.value
        w.writerow([f"({kind})", " ".join(map(str, rep.vars)), rep.V, rep.C, int(rep.cond_a), int(rep.cond_b), int(approx), crit])
    _write(args.out, buf.getvalue())
    params = {"critical": args.critical, "budget": args.budget, "codeword_search_exhaustive": cw.exhaustive,
              "max_iter": args.max_iter, "rule": args.rule}
    return EXIT_OK, RunManifest("analyze", [], params, digest, None, outputs={"structures": args.out})


def _read_word(path: str, n: int) -> np.ndarray:
    text = _read_bytes(path).decode().split()
    tokens = [t for t in text if t]
    if len(tokens) == n and set(tokens) <= {"0", "1"}:
        return np.array([int(t) for t in tokens], dtype=np.uint8)
    if len(tokens) == 1 and len(tokens[0]) == n and set(tokens[0]) <= {"0", "1"}:
        return np.array([int(ch) for ch in tokens[0]], dtype=np.uint8)
    try:
        word = np.zeros(n, dtype=np.uint8)
        for t in tokens:
            word[int(t)] = 1
    except (ValueError, IndexError):
        raise CliError(EXIT_USAGE, "bad-word", f"{path}: expected {n} bits or a list of 0-based error positions") from None
    return word


def cmd_decode(args) -> tuple[int, RunManifest]:
    g, digest = _load_code(args.code)
    word = _read_word(args.received, g.n)
    try:
        out = gallager_a_decode(g, word, _decoder_cfg(args))
    except GraphError as exc:
        raise CliError(EXIT_BAD_CODE, "malformed-code", str(exc)) from None
    text = (
        "status,iterations_used,output_weight,residual_error_support,output\n"
        f"{out.status.value},{out.iterations_used},{int(out.output.sum())},"
        f"{' '.join(map(str, out.residual_error_support))},{''.join(map(str, out.output.tolist()))}\n"
    )
    _write(args.out, text)
    params = {"received": args.received, "max_iter": args.max_iter, "rule": args.rule}
    return EXIT_OK, RunManifest("decode", [], params, digest, None, outputs={"outcome": args.out})


def cmd_verify(args) -> tuple[int, RunManifest]:
    g, digest = _load_code(args.code)
    workers = _workers(args)
    try:
        rep = exhaustive_verify(g, args.t, _decoder_cfg(args), budget=args.budget)
    except BudgetExceeded as exc:
        raise CliError(EXIT_BUDGET, "budget-exceeded", str(exc)) from None
    except GraphError as exc:
        raise CliError(EXIT_BAD_CODE, "malformed-code", str(exc)) from None
    _write(args.out, json.dumps(rep.to_dict(timing=False), indent=2, sort_keys=True) + "\n")
    params = {"t": args.t, "budget": args.budget, "max_iter": args.max_iter, "rule": args.rule, "workers": workers}
    code = EXIT_OK if rep.passed else EXIT_FAILURES
    return code, RunManifest("verify", [], params, digest, None, outputs={"report": args.out})


def cmd_simulate(args) -> tuple[int, RunManifest]:
    g, digest = _load_code(args.code)
    workers = _workers(args)
    try:
        alphas = [float(a) for a in args.alpha_list.split(",") if a.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, "bad-alpha", f"cannot parse --alpha-list {args.alpha_list!r}") from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "trials", "failures", "fer", "ci_low", "ci_high"])
    for a in alphas:
        try:
            p = fer_estimate(g, a, args.min_failures, args.max_trials, args.seed, _decoder_cfg(args))
        except (ValueError, GraphError) as exc:
            raise CliError(EXIT_USAGE, "bad-parameters", str(exc)) from None
        w.writerow([repr(a), p.trials, p.failures, f"{p.fer:.10e}", f"{p.ci_low:.10e}", f"{p.ci_high:.10e}"])
        log.info("alpha=%g trials=%d failures=%d fer=%.3e", a, p.trials, p.failures, p.fer)
    _write(args.out, buf.getvalue())
    params = {"alpha_list": alphas, "min_failures": args.min_failures, "max_trials": args.max_trials,
              "max_iter": args.max_iter, "rule": args.rule, "workers": workers}
    return EXIT_OK, RunManifest("simulate", [], params, digest, args.seed, outputs={"fer": args.out})


def cmd_replay(args) -> tuple[int, RunManifest | None]:
    try:
        manifest = json.loads(_read_bytes(args.manifest).decode())
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_USAGE, "bad-manifest", f"{args.manifest}: {exc}") from None
    return main(manifest["argv"]), None


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gallager3", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a girth-8, (5,3)-free column-weight-three code")
    p.add_argument("--n", type=int, required=True, help="number of variable nodes")
    p.add_argument("--m", type=int, required=True, help="number of check nodes")
    p.add_argument("--max-check-degree", type=int, default=7, help="check degree cap (default 7)")
    p.add_argument("--tree-depth", type=int, default=6, help="BFS exclusion depth in edges (default 6)")
    p.add_argument("--seed", type=int, default=0, help="seed for variable order and rewiring (default 0)")
    p.add_argument("--randomize", action="store_true", help="process variables in a seeded random order")
    p.add_argument("--repair-attempts", type=int, default=100, help="weight-8 repair rounds (default 100)")
    p.add_argument("--no-repair", action="store_true", help="skip the low-weight codeword repair")
    p.add_argument("--no-fallback", action="store_true", help="fail instead of rewiring when growth stalls")
    p.add_argument("--no-avoid-53", action="store_true", help="plain girth-8 growth, keeps (5,3) structures")
    p.add_argument("--out", required=True, help="alist output path")
    p.add_argument("--log", help="construction log output path (JSON lines)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="list (3,3), (5,3) and low-weight codeword structures as CSV")
    p.add_argument("--code", required=True, help="alist file")
    p.add_argument("--critical", action="store_true", help="also compute critical numbers (slow)")
    p.add_argument("--budget", type=int, default=None, help="node budget for the codeword search")
    p.add_argument("--out", required=True, help="CSV output path")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("decode", help="decode one received word")
    p.add_argument("--code", required=True, help="alist file")
    p.add_argument("--received", required=True, help="file with n bits, or 0-based error positions")
    p.add_argument("--out", required=True, help="outcome CSV path")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="decode every error pattern of weight <= t")
    p.add_argument("--code", required=True, help="alist file")
    p.add_argument("--t", type=int, default=3, help="largest error weight (default 3)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="refuse sweeps with more patterns")
    p.add_argument("--out", required=True, help="JSON report path")
    _add_decoder_flags(p)
    _add_workers(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo FER on the BSC")
    p.add_argument("--code", required=True, help="alist file")
    p.add_argument("--alpha-list", required=True, help="comma separated crossover probabilities")
    p.add_argument("--min-failures", type=int, default=50, help="stop a point after this many failures")
    p.add_argument("--max-trials", type=int, default=10**8, help="trial cap per point")
    p.add_argument("--seed", type=int, default=0, help="trial stream seed")
    p.add_argument("--out", required=True, help="CSV output path")
    _add_decoder_flags(p)
    _add_workers(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest", help="manifest JSON written by an earlier run")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code, manifest = args.func(args)
    except CliError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.code
    if manifest is not None:
        manifest.argv = argv
        manifest.wall_time = time.perf_counter() - t0
        primary = next(iter(manifest.outputs.values()))
        try:
            _write(primary + ".manifest.json", json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
        except CliError as exc:
            print(f"error: {exc.category}: {exc}", file=sys.stderr)
            return exc.code
    return code


if __name__ == "__main__":
    sys.exit(main())
