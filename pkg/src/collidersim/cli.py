"""Command-line front end.

Three subcommands cover the package's workflows:

  measure    read digits of a hidden mass by bisection or a grid sweep
  estimate   read digits of an embedded parameter under fixed tolerance
  advice     inspect the encoding of an advice table as a mass

Every run is deterministic given its parameters and seed; with --out,
results land in a directory as JSON plus a JSONL query transcript and a
manifest of content hashes, so reruns can be compared byte for byte.

Exit codes: 0 on a complete result, 2 on configuration or usage errors,
3 when the requested measurement timed out.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .advice import PrefixFunction, decode_advice, encoded_mass, read_bound
from .harness import embed_parameter, estimate_digits
from .oracle import (CollisionOracle, ConfigError, OracleConfig, PrecisionMode,
                     TimeoutExceeded, TimeoutReaction, WaitPolicy)
from .procedures import bisection, grid_sweep, parse_schedule
from .sources import parse_fraction, parse_mass_spec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3

SEED_ENV = "CME_SEED"

_MODES = {
    "errorfree": PrecisionMode.ERROR_FREE,
    "arbitrary": PrecisionMode.ARBITRARY,
    "fixed": PrecisionMode.FIXED,
}
_WAITS = {"interrupt": WaitPolicy.INTERRUPT, "full": WaitPolicy.FULL_BUDGET}
_REACTIONS = {"return": TimeoutReaction.RETURN, "abort": TimeoutReaction.ABORT}


def _fmt(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return data


def _resolve_config(args) -> OracleConfig:
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag, key, default):
        if flag is not None:
            return flag
        if key in file_cfg:
            return str(file_cfg[key])
        return default

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = file_cfg.get("seed")
    if seed is None:
        seed = os.environ.get(SEED_ENV, "0")
    mode = _MODES[pick(getattr(args, "mode", None), "mode", "errorfree")]
    eps_text = pick(getattr(args, "epsilon", None), "epsilon", None)
    return OracleConfig(
        K=parse_fraction(pick(args.K, "K", "1")),
        N=parse_fraction(pick(args.N, "N", "0")),
        mode=mode,
        epsilon=parse_fraction(eps_text) if eps_text is not None else None,
        wait_policy=_WAITS[pick(getattr(args, "wait", None), "wait_policy", "interrupt")],
        timeout_reaction=_REACTIONS[pick(getattr(args, "on_timeout", None),
                                         "timeout_reaction", "return")],
        c_setup=parse_fraction(pick(getattr(args, "c_setup", None), "c_setup", "1")),
        timing=pick(getattr(args, "timing", None), "timing", "protocol"),
        launch_speed=parse_fraction(pick(None, "u", "1")),
        flag_distance=parse_fraction(pick(None, "r", "1")),
        seed=int(seed),
    )


def _config_dict(cfg: OracleConfig) -> dict:
    return {
        "K": _fmt(cfg.K),
        "N": _fmt(cfg.N),
        "u": _fmt(cfg.launch_speed),
        "r": _fmt(cfg.flag_distance),
        "mode": cfg.mode.value,
        "epsilon": _fmt(cfg.epsilon) if cfg.epsilon is not None else None,
        "seed": cfg.seed,
        "wait_policy": cfg.wait_policy.value,
        "timeout_reaction": cfg.timeout_reaction.value,
        "c_setup": _fmt(cfg.c_setup),
        "timing": cfg.timing,
    }


def _write_outputs(outdir: str, files: dict, parameters: dict) -> None:
    os.makedirs(outdir, exist_ok=True)
    hashes = {}
    for name, content in files.items():
        if isinstance(content, (dict, list)):
            text = json.dumps(content, indent=2, sort_keys=True) + "\n"
        else:
            text = content
        with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
            fh.write(text)
        hashes[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
    manifest = {"parameters": parameters, "files": hashes}
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _transcript_jsonl(oracle: CollisionOracle) -> str:
    return "".join(json.dumps(rec.to_dict(), sort_keys=True) + "\n"
                   for rec in oracle.transcript)


def cmd_measure(args) -> int:
    cfg = _resolve_config(args)
    schedule = parse_schedule(args.schedule, cfg.K) if args.schedule else None
    src = parse_mass_spec(args.mass, schedule_budget=schedule, K=cfg.K)
    oracle = CollisionOracle(src, cfg)
    if args.procedure == "bisection":
        if args.digits is None or schedule is None:
            raise ValueError("bisection needs --digits and --schedule")
        report = bisection(oracle, args.digits, schedule)
    else:
        if args.level is None:
            raise ValueError("the grid procedure needs --level")
        report = grid_sweep(oracle, args.level)
    payload = {
        "mass": src.describe(),
        "config": _config_dict(cfg),
        "result": report.to_dict(),
    }
    parameters = {"command": "measure", "mass": args.mass,
                  "procedure": args.procedure, "digits": args.digits,
                  "level": args.level, "schedule": args.schedule,
                  "config": _config_dict(cfg)}
    if args.out:
        _write_outputs(args.out, {"report.json": payload,
                                  "transcript.jsonl": _transcript_jsonl(oracle)},
                       parameters)
    print(f"status: {report.status()}")
    if report.digits:
        print(f"digits: {report.digits}")
    print(f"waiting time: {_fmt(report.total_time)}")
    print(f"setup time: {_fmt(report.total_setup)}")
    return EXIT_OK if report.complete else EXIT_TIMEOUT


def cmd_estimate(args) -> int:
    if args.mode is None:
        args.mode = "fixed"
    if args.wait is None:
        args.wait = "full"
    cfg = _resolve_config(args)
    if cfg.epsilon is None:
        raise ValueError("estimate needs --epsilon (the fixed tolerance)")
    s_source = parse_mass_spec(args.mass)
    oracle = CollisionOracle(embed_parameter(s_source, cfg.epsilon), cfg)
    est = estimate_digits(oracle, args.k, parse_fraction(args.delta))
    payload = {
        "parameter": s_source.describe(),
        "config": _config_dict(cfg),
        "estimate": est.to_dict(),
    }
    parameters = {"command": "estimate", "mass": args.mass, "k": args.k,
                  "delta": args.delta, "config": _config_dict(cfg)}
    if args.out:
        _write_outputs(args.out, {"estimate.json": payload,
                                  "transcript.jsonl": _transcript_jsonl(oracle)},
                       parameters)
    print(f"digits: {est.digits}")
    print(f"s_hat: {_fmt(est.s_hat)}")
    print(f"counts: lesser={est.n_lesser} greater={est.n_greater} "
          f"timeout={est.n_timeout} (zeta={est.zeta}, engine={est.engine})")
    return EXIT_OK


def cmd_advice(args) -> int:
    f = PrefixFunction.from_table_file(args.table)
    src = encoded_mass(f)
    payload = {
        "table": args.table,
        "growth": {"a": str(f.a), "b": str(f.b)},
        "mass": src.describe(),
    }
    if args.digits:
        payload["digits"] = "".join(str(src.digit_at(i))
                                    for i in range(1, args.digits + 1))
    if args.word_length:
        bits, consumed = decode_advice(src, args.word_length, f.a, f.b)
        payload["decoded"] = {
            "word_length": args.word_length,
            "advice": bits,
            "digits_consumed": consumed,
            "read_bound": read_bound(args.word_length, f.a, f.b),
        }
    parameters = {"command": "advice", "table": args.table,
                  "digits": args.digits, "word_length": args.word_length}
    if args.out:
        _write_outputs(args.out, {"advice.json": payload}, parameters)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _add_oracle_args(sp) -> None:
    sp.add_argument("--config", help="JSON file with oracle parameters")
    sp.add_argument("--K", help="timing-law constant (rational, default 1)")
    sp.add_argument("--N", help="launch latency (rational, default 0)")
    sp.add_argument("--mode", choices=sorted(_MODES),
                    help="mass manufacturing precision (default errorfree)")
    sp.add_argument("--epsilon", help="tolerance for fixed mode (rational)")
    sp.add_argument("--seed", type=int,
                    help=f"RNG seed (default ${SEED_ENV} or 0)")
    sp.add_argument("--wait", choices=sorted(_WAITS),
                    help="billing: interrupt at the flag or wait out the budget")
    sp.add_argument("--on-timeout", dest="on_timeout", choices=sorted(_REACTIONS),
                    help="return timeout records or abort the run")
    sp.add_argument("--timing", choices=["protocol", "kinematic"],
                    help="arrival law: protocol K/gap or kinematic traversal")
    sp.add_argument("--c-setup", dest="c_setup",
                    help="setup cost per word digit (rational, default 1)")
    sp.add_argument("--out", help="directory for JSON results and transcript")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collidersim",
        description="Mass measurement through timed elastic collisions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="read digits of a hidden mass")
    m.add_argument("--mass", required=True,
                   help="mass spec, e.g. rational:1/3, pattern:3,2,4, "
                        "advice:TABLE, adversarial:u1=4, file:PATH")
    m.add_argument("--procedure", choices=["bisection", "grid"],
                   default="bisection")
    m.add_argument("--digits", type=int, help="digits to read (bisection)")
    m.add_argument("--schedule",
                   help="budget law, e.g. exp:k=0, alg:k=2,alpha=1, const:96")
    m.add_argument("--level", type=int, help="grid resolution (grid)")
    _add_oracle_args(m)
    m.set_defaults(func=cmd_measure)

    e = sub.add_parser("estimate", help="estimate digits under fixed tolerance")
    e.add_argument("--mass", required=True,
                   help="spec of the embedded parameter s")
    e.add_argument("--k", type=int, required=True, help="digits to estimate")
    e.add_argument("--delta", default="1/4", help="error probability bound")
    _add_oracle_args(e)
    e.set_defaults(func=cmd_estimate)

    a = sub.add_parser("advice", help="inspect an encoded advice table")
    a.add_argument("--table", required=True, help="tab-separated advice table")
    a.add_argument("--digits", type=int, help="print this many encoded digits")
    a.add_argument("--word-length", dest="word_length", type=int,
                   help="decode the advice for this input length")
    a.add_argument("--out", help="directory for JSON results")
    a.set_defaults(func=cmd_advice)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TimeoutExceeded as exc:
        print(f"timed out: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
