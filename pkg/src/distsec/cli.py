"""Command-line front end.

Exit codes: 0 success, 2 usage errors, 3 malformed input (files, configs,
incompatible parameters), 4 desk-scale cap exceeded, 1 unexpected failure.
Runs with identical flags and seeds write byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .analysis import bound_report
from .encoders import complete_key_assignment, exchange_binning, greedy_code, identity_code
from .model import (
    CapExceededError,
    KeyedCode,
    SourceAlphabet,
    alphabet_from_dict,
    alphabet_to_dict,
    code_from_dict,
    code_to_dict,
    make_alphabet,
    scalar_from_json,
)
from .multisource import JointSystem, SeparableFunction, joint_distortion
from .search import brute_force_optimal
from .simulation import SimConfig, simulate

STATE_CAP_ENV = "DISTSEC_CAP_STATES"
REPORT_COLUMNS = [
    "alphabet_id",
    "m",
    "k",
    "alg",
    "seed",
    "d_max",
    "d_ach",
    "delta",
    "bound1",
    "bound2",
    "bound1_ok",
    "bound2_ok",
    "perfectly_secure",
]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _fmt_flag(b) -> str:
    if b is None:
        return "na"
    return "true" if b else "false"


def _parse_seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _parse_token(tok: str, exact: bool):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        pass
    if "/" in tok or exact:
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError) as e:
            raise CliError(3, f"bad numeric literal {tok!r}") from e
    try:
        return float(tok)
    except ValueError as e:
        raise CliError(3, f"bad numeric literal {tok!r}") from e


def _parse_number_list(text: str, exact: bool) -> list:
    if not text.strip():
        raise CliError(3, "empty number list")
    return [_parse_token(tok, exact) for tok in text.split(",")]


def _parse_int_range(text: str) -> list[int]:
    """"0..5" inclusive range, or "1,3,5" list."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError as e:
            raise CliError(3, f"bad range {text!r}") from e
        if hi < lo:
            raise CliError(3, f"empty range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as e:
        raise CliError(3, f"bad integer list {text!r}") from e


def _read_json(path: str, exact: bool):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            if exact:
                return json.load(fh, parse_float=Fraction)
            return json.load(fh)
    except OSError as e:
        raise CliError(3, f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CliError(3, f"{path} is not valid JSON: {e}") from e


def _load_alphabet(args) -> SourceAlphabet:
    if args.values is None:
        raise CliError(2, "missing --values")
    text = args.values.strip()
    pmf = _parse_number_list(args.pmf, args.exact) if args.pmf else None
    try:
        if text.startswith("@"):
            doc = _read_json(text[1:], args.exact)
            if not isinstance(doc, dict) or "values" not in doc:
                raise CliError(3, f"{text[1:]}: expected an object with a 'values' list")
            values = [scalar_from_json(v) for v in doc["values"]]
            if pmf is None and doc.get("pmf") is not None:
                pmf = [scalar_from_json(p) for p in doc["pmf"]]
            return make_alphabet(values, pmf)
        if ".." in text and "," not in text:
            lo, _, hi = text.partition("..")
            values = list(range(int(lo), int(hi) + 1))
            if not values:
                raise CliError(3, f"empty value range {text!r}")
        else:
            values = _parse_number_list(text, args.exact)
        return make_alphabet(values, pmf)
    except ValueError as e:
        raise CliError(3, str(e)) from e


def _inverse(order):
    inv = [0] * len(order)
    for pos, orig in enumerate(order):
        inv[orig] = pos
    return inv


def _load_code(path: str, exact: bool) -> KeyedCode:
    doc = _read_json(path, exact)
    try:
        return code_from_dict(doc)
    except ValueError as e:
        raise CliError(3, f"{path}: {e}") from e


def _alphabet_id(alphabet: SourceAlphabet) -> str:
    blob = json.dumps(alphabet_to_dict(alphabet), sort_keys=True, default=str)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    import csv

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None:
        return 1_000_000
    try:
        return int(raw)
    except ValueError as e:
        raise CliError(3, f"{STATE_CAP_ENV}={raw!r} is not an integer") from e


def _report_row(alphabet, code_k: int, alg: str, seed, report) -> list[str]:
    keys = 2**code_k
    if alphabet is not None and alphabet.is_uniform():
        bound1 = report.d_max / keys
        bound2 = report.spread * report.spread / keys**2
        b1, b2 = _fmt(bound1), _fmt(bound2)
    else:
        b1 = b2 = "na"
    return [
        _alphabet_id(alphabet) if alphabet is not None else "na",
        str(alphabet.m) if alphabet is not None else "na",
        str(code_k),
        alg,
        "na" if seed is None else str(seed),
        _fmt(report.d_max),
        _fmt(report.d_ach),
        _fmt(report.delta),
        b1,
        b2,
        _fmt_flag(report.bound1_ok),
        _fmt_flag(report.bound2_ok),
        _fmt_flag(report.perfectly_secure),
    ]


def _build_code(alg: str, alphabet: SourceAlphabet, k: int, r, seed: int) -> KeyedCode:
    if alg == "greedy":
        if r is not None and r != alphabet.m:
            raise CliError(3, "greedy codes use r = m")
        return greedy_code(alphabet, k)
    if alg == "exchange":
        binning = exchange_binning(alphabet, k, r, seed=seed)
        return complete_key_assignment(binning, k)
    if alg == "identity":
        if k not in (0, None):
            raise CliError(3, "identity is the k=0 code")
        return identity_code(alphabet.m)
    raise CliError(2, f"unknown algorithm {alg!r}")


# --- subcommand handlers ---------------------------------------------------

def _cmd_encode(args) -> int:
    alphabet = _load_alphabet(args)
    if args.alg != "identity" and args.k is None:
        raise CliError(2, "--k is required for greedy and exchange")
    code = _build_code(args.alg, alphabet, args.k, args.r, args.seed)
    _write_text(args.output, json.dumps(code_to_dict(code), indent=2) + "\n")
    return 0


def _cmd_analyze(args) -> int:
    alphabet = _load_alphabet(args)
    code = _load_code(args.code, args.exact)
    report = bound_report(code, alphabet)
    row = _report_row(alphabet, code.k, "na", None, report)
    _write_text(args.output, _csv_text(REPORT_COLUMNS, [row]))
    return 0


def _cmd_search(args) -> int:
    alphabet = _load_alphabet(args)
    r_range = None
    if args.r_lo is not None or args.r_hi is not None:
        if args.r_lo is None or args.r_hi is None:
            raise CliError(2, "--r-lo and --r-hi go together")
        r_range = (args.r_lo, args.r_hi)
    result = brute_force_optimal(
        alphabet,
        args.k,
        r_range=r_range,
        prune=not args.no_prune,
        max_m=args.max_m,
        max_k=args.max_k,
        force=args.force,
    )
    doc = {
        "version": 1,
        "best_delta": float(result.best_delta),
        "best_delta_exact": str(result.best_delta)
        if isinstance(result.best_delta, (int, Fraction))
        else None,
        "candidates_examined": result.candidates_examined,
        "pruned": result.pruned,
        "exhaustive": result.exhaustive,
        "best_code": code_to_dict(result.best_code),
    }
    _write_text(args.output, json.dumps(doc, indent=2) + "\n")
    return 0


def _parse_system(doc, base_dir: str, exact: bool) -> JointSystem:
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise CliError(3, "system config must be a JSON object with version: 1")
    for field in ("sources", "codes", "function"):
        if field not in doc:
            raise CliError(3, f"system config missing field {field!r}")
    try:
        sources = tuple(alphabet_from_dict(d) for d in doc["sources"])
        codes = []
        for entry in doc["codes"]:
            if isinstance(entry, str):
                path = entry
            elif isinstance(entry, dict) and "path" in entry:
                path = entry["path"]
            else:
                codes.append(code_from_dict(entry))
                continue
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            codes.append(_load_code(path, exact))
        fn = doc["function"]
        if not isinstance(fn, dict) or "components" not in fn:
            raise CliError(3, "function must be an object with components")
        components = tuple(
            tuple(tuple(scalar_from_json(t) for t in table) for table in term)
            for term in fn["components"]
        )
        function = SeparableFunction(
            n=len(components[0]) if components else 0,
            components=components,
            form=fn.get("form", "general-sum-of-products"),
        )
        return JointSystem(sources=sources, codes=tuple(codes), function=function)
    except ValueError as e:
        raise CliError(3, str(e)) from e


def _cmd_compose(args) -> int:
    doc = _read_json(args.config, args.exact)
    system = _parse_system(doc, os.path.dirname(os.path.abspath(args.config)), args.exact)
    report = joint_distortion(system, max_states=_state_cap())
    row = _report_row(None, system.total_key_bits, "compose", None, report)
    blob = json.dumps(doc, sort_keys=True, default=str)
    row[0] = hashlib.sha1(blob.encode()).hexdigest()[:12]
    row[1] = str(_joint_m(system))
    _write_text(args.output, _csv_text(REPORT_COLUMNS, [row]))
    return 0


def _joint_m(system: JointSystem) -> int:
    m = 1
    for a in system.sources:
        m *= a.m
    return m


def _cmd_simulate(args) -> int:
    if (args.system is None) == (args.code is None):
        raise CliError(2, "give exactly one of --code or --system")
    if args.system is not None:
        doc = _read_json(args.system, args.exact)
        target = _parse_system(doc, os.path.dirname(os.path.abspath(args.system)), args.exact)
    else:
        alphabet = _load_alphabet(args)
        target = (_load_code(args.code, args.exact), alphabet)
    try:
        config = SimConfig(trials=args.trials, seed=args.seed, target=target)
    except ValueError as e:
        raise CliError(3, str(e)) from e
    report = simulate(config, max_states=_state_cap())
    rows = [[
        str(report.trials),
        str(report.seed),
        _fmt(report.analytic_dach),
        _fmt(report.empirical_dach),
        _fmt(report.stderr),
    ]]
    _write_text(
        args.output,
        _csv_text(["trials", "seed", "analytic_dach", "empirical_dach", "stderr"], rows),
    )
    return 0


def _sweep_row(spec) -> list[str]:
    values, pmf, k, alg, seed = spec
    alphabet = make_alphabet(values, pmf)
    code = _build_code(alg, alphabet, k if alg != "identity" else 0, None, seed)
    report = bound_report(code, alphabet)
    return _report_row(alphabet, code.k, alg, seed, report)


def _cmd_sweep(args) -> int:
    alphabet = _load_alphabet(args)
    ks = _parse_int_range(args.k)
    if any(k < 0 for k in ks):
        raise CliError(3, "key bit counts must be >= 0")
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    for alg in algs:
        if alg not in ("greedy", "exchange", "identity"):
            raise CliError(2, f"unknown algorithm {alg!r}")
    seeds = _parse_int_range(args.seeds) if args.seeds else [args.seed]

    # Pass plain values so rows pickle cleanly for the process pool.
    inverse = _inverse(alphabet.original_index)
    values = [alphabet.values[inverse[i]] for i in range(alphabet.m)]
    pmf = None if alphabet.is_uniform() else [alphabet.pmf[inverse[i]] for i in range(alphabet.m)]
    specs = []
    for k in ks:
        for alg in algs:
            if alg == "identity" and k != min(ks):
                continue  # identity has no key; one row per seed
            for seed in seeds:
                specs.append((values, pmf, k, alg, seed))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, specs))
    else:
        rows = [_sweep_row(spec) for spec in specs]
    _write_text(args.output, _csv_text(REPORT_COLUMNS, rows))
    return 0


# --- argument wiring -------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_parse_seed, default=0, metavar="U64",
                        help="RNG seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="worker bound for parallelizable steps (default 1)")
    common.add_argument("--exact", action="store_true",
                        help="parse decimal literals as exact rationals")
    common.add_argument("-o", "--output", default=None, metavar="PATH",
                        help="output file (default stdout)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="distsec",
        description="Keyed block-length-one codes that maximize an eavesdropper's "
        "mean-squared estimation error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="construct a code")
    p.add_argument("--alg", required=True, choices=["greedy", "exchange", "identity"])
    p.add_argument("--values", required=True, help="comma list, lo..hi range, or @file.json")
    p.add_argument("--pmf", default=None, help="comma list of probabilities")
    p.add_argument("--k", type=int, default=None, help="key bits")
    p.add_argument("--r", type=int, default=None, help="bin count (exchange; must be m)")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("analyze", parents=[common], help="distortion report for a code")
    p.add_argument("--code", required=True, help="code JSON file")
    p.add_argument("--values", required=True)
    p.add_argument("--pmf", default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("search", parents=[common], help="brute-force optimal code")
    p.add_argument("--values", required=True)
    p.add_argument("--pmf", default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r-lo", type=int, default=None)
    p.add_argument("--r-hi", type=int, default=None)
    p.add_argument("--no-prune", action="store_true",
                   help="disable the light-bin pruning rule")
    p.add_argument("--max-m", type=int, default=8)
    p.add_argument("--max-k", type=int, default=2)
    p.add_argument("--force", action="store_true",
                   help="acknowledge a factorial search beyond the caps")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("compose", parents=[common], help="analyze a multi-source system")
    p.add_argument("--config", required=True, help="system JSON config")
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check")
    p.add_argument("--code", default=None)
    p.add_argument("--values", default=None)
    p.add_argument("--pmf", default=None)
    p.add_argument("--system", default=None, help="system JSON config")
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="report grid over k and algorithms")
    p.add_argument("--values", required=True)
    p.add_argument("--pmf", default=None)
    p.add_argument("--k", required=True, help="range lo..hi or comma list")
    p.add_argument("--alg", required=True, help="comma list from greedy,exchange,identity")
    p.add_argument("--seeds", default=None, help="comma list of seeds (default: --seed)")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except CapExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # pragma: no cover - safety net
        print(f"unexpected error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
