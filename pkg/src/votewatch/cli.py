"""Command-line interface: ``test``, ``simulate`` and ``fprob`` subcommands.

Machine output is the canonical artifact: ``test --json`` writes a single
JSON report (schema in :data:`REPORT_SCHEMA`), ``simulate`` writes tidy
and summary CSV tables plus a config echo.  Human-readable tables go to
stdout, rendering statistics below 1e-6 as "~0" while the machine output
keeps full precision.

Exit codes: 0 success, 2 input or validation error, 3 infeasible
computation.  ``VOTEWATCH_SEED`` supplies a master seed when ``--seed``
is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .cost import CostFunction
from .data import BUNDLED_DATASETS, ElectionRecord, ExitPollRecord, ingest, load_dataset
from .errors import BoundaryError, FeasibilityError, InvalidInputError
from .simlab import SimConfig, run_sim_a, run_sim_b, summarize
from .testing import (
    DEFAULT_ALPHA,
    DEFAULT_TAU_C,
    TestResult,
    majority_match_prob,
    run_test_cost,
    run_test_exit_poll,
)
from .voter import InterventionCase

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

_TINY = 1e-6

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["votewatch_version", "config", "results"],
    "additionalProperties": False,
    "properties": {
        "votewatch_version": {"type": "string"},
        "config": {
            "type": "object",
            "required": ["method", "alpha", "tau_c"],
            "properties": {
                "method": {"enum": ["exit", "cost"]},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "tau_c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "cost": {"type": ["string", "null"]},
                "dataset": {"type": ["string", "null"]},
                "results_file": {"type": ["string", "null"]},
                "polls_file": {"type": ["string", "null"]},
                "candidates": {
                    "type": ["array", "null"],
                    "items": {"type": "string"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
        },
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "region",
                    "n",
                    "statistic",
                    "lower",
                    "decision",
                    "case",
                    "diagnostics",
                ],
                "additionalProperties": False,
                "properties": {
                    "region": {"type": "string"},
                    "n": {"type": "integer", "minimum": 1},
                    "k": {"type": ["integer", "null"], "minimum": 1},
                    "statistic": {"type": "number", "minimum": 0, "maximum": 1},
                    "lower": {"type": "number", "minimum": 0, "maximum": 1},
                    "decision": {"enum": ["reject", "retain"]},
                    "case": {"enum": ["no_flip", "flips_first", "flips_second"]},
                    "diagnostics": {
                        "type": "object",
                        "required": [
                            "p_prime_interval",
                            "p0_interval",
                            "grid",
                            "feasibility_clipped",
                        ],
                        "additionalProperties": False,
                        "properties": {
                            "p_prime_interval": {
                                "type": "array",
                                "items": {"type": "number"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                            "p0_interval": {
                                "type": "array",
                                "items": {"type": "number"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                            "grid": {"type": "integer", "minimum": 2},
                            "feasibility_clipped": {"type": "boolean"},
                        },
                    },
                },
            },
        },
    },
}


def _human_stat(value: float) -> str:
    return "~0" if value < _TINY else f"{value:.8f}"


def _result_entry(region: str, n: int, k: int | None, res: TestResult) -> dict:
    return {
        "region": region,
        "n": n,
        "k": k,
        "statistic": res.statistic,
        "lower": res.lower,
        "decision": res.decision,
        "case": res.case.value,
        "diagnostics": {
            "p_prime_interval": list(res.diagnostics.p_prime_interval),
            "p0_interval": list(res.diagnostics.p0_interval),
            "grid": res.diagnostics.grid,
            "feasibility_clipped": res.diagnostics.feasibility_clipped,
        },
    }


def _parse_candidates(raw: str | None) -> tuple[str, str] | None:
    if raw is None:
        return None
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2 or not all(parts):
        raise InvalidInputError(f"--candidates must be 'NAME1,NAME2', got {raw!r}")
    return parts[0], parts[1]


def _load_records(args) -> tuple[dict[str, ElectionRecord], dict[str, ExitPollRecord]]:
    if args.dataset is not None:
        if args.results or args.polls:
            raise InvalidInputError("--dataset cannot be combined with --results/--polls")
        return load_dataset(args.dataset)
    if args.results is None:
        raise InvalidInputError("provide --results (and optionally --polls) or --dataset")
    return ingest(args.results, args.polls, candidates=_parse_candidates(args.candidates))


def cmd_test(args) -> int:
    results, polls = _load_records(args)
    cost = None
    if args.method == "cost":
        cost = CostFunction.parse(args.cost)
        if cost.param < 10:
            print(
                f"warning: cost parameter {cost.param:g} is below 10; "
                "false-positive rates inflate for shallow priors (use 20-50)",
                file=sys.stderr,
            )
    entries = []
    print(f"method={args.method} alpha={args.alpha:g} tau_c={args.tau_c:g}"
          + (f" cost={cost.label}" if cost else ""))
    header = f"{'region':<18} {'statistic':>12} {'lower':>12} decision"
    print(header)
    print("-" * len(header))
    for region, record in results.items():
        if args.method == "exit":
            poll = polls.get(region)
            if poll is None:
                raise InvalidInputError(f"{region}: no exit poll row; required for --method exit")
            res = run_test_exit_poll(record, poll, alpha=args.alpha, tau_c=args.tau_c)
            k = poll.k
        else:
            res = run_test_cost(record, cost, alpha=args.alpha, tau_c=args.tau_c)
            k = None
        entries.append(_result_entry(region, record.n, k, res))
        print(
            f"{region:<18} {_human_stat(res.statistic):>12} "
            f"{_human_stat(res.lower):>12} {res.decision}"
        )
    if args.json is not None:
        doc = {
            "votewatch_version": __version__,
            "config": {
                "method": args.method,
                "alpha": args.alpha,
                "tau_c": args.tau_c,
                "cost": cost.label if cost else None,
                "dataset": args.dataset,
                "results_file": str(args.results) if args.results else None,
                "polls_file": str(args.polls) if args.polls else None,
                "candidates": list(_parse_candidates(args.candidates) or []) or None,
            },
            "results": entries,
        }
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"report written to {args.json}")
    return EXIT_OK


_SIM_DEFAULTS = {
    "reps": 100,
    "n": 50_000,
    "k": None,
    "p0": None,
    "pprime": None,
    "p0_range": [0.45, 0.55],
    "true_cost": "texp:30",
    "assumed_cost": None,
    "alpha": DEFAULT_ALPHA,
    "tau_c": DEFAULT_TAU_C,
    "seed": None,
    "out": "simlab-out",
}


def _effective_sim_settings(args) -> dict:
    """Merge simulate settings: flags > config file > defaults."""
    config = {}
    if args.config is not None:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(config) - set(_SIM_DEFAULTS) - {"protocol"}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key, default in _SIM_DEFAULTS.items():
        flag = getattr(args, key)
        merged[key] = flag if flag is not None else config.get(key, default)
    merged["protocol"] = args.protocol or config.get("protocol")
    if merged["protocol"] not in ("a", "b"):
        raise InvalidInputError("simulate needs --protocol a|b (flag or config)")
    if merged["seed"] is None:
        env = os.environ.get("VOTEWATCH_SEED")
        merged["seed"] = int(env) if env else 0
    return merged


def cmd_simulate(args) -> int:
    s = _effective_sim_settings(args)
    if s["protocol"] == "a":
        true_cost = CostFunction.parse(s["true_cost"])
        assumed = CostFunction.parse(s["assumed_cost"] or s["true_cost"])
        cfg = SimConfig(
            protocol="a",
            reps=int(s["reps"]),
            n=int(s["n"]),
            seed=int(s["seed"]),
            alpha=float(s["alpha"]),
            tau_c=float(s["tau_c"]),
            true_cost=true_cost,
            assumed_cost=assumed,
            p0_range=tuple(float(x) for x in s["p0_range"]),
        )
        rows = run_sim_a(cfg)
    else:
        if s["k"] is None or s["p0"] is None or s["pprime"] is None:
            raise InvalidInputError("protocol b needs --k, --p0 and --pprime")
        cfg = SimConfig(
            protocol="b",
            reps=int(s["reps"]),
            n=int(s["n"]),
            seed=int(s["seed"]),
            alpha=float(s["alpha"]),
            tau_c=float(s["tau_c"]),
            k=int(s["k"]),
            p0_values=tuple(float(x) for x in s["p0"]),
            p_prime_values=tuple(float(x) for x in s["pprime"]),
        )
        rows = run_sim_b(cfg)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    rows.to_csv(out / "rows.csv", index=False)
    summary = summarize(rows)
    summary.to_csv(out / "summary.csv", index=False)
    echo = {key: (str(val) if isinstance(val, Path) else val) for key, val in s.items()}
    (out / "config.json").write_text(json.dumps(echo, indent=2) + "\n", encoding="utf-8")
    print(summary.to_string(index=False))
    print(f"tables written to {out}")
    return EXIT_OK


def cmd_fprob(args) -> int:
    case = (
        InterventionCase.FLIPS_FIRST if args.case == "b" else InterventionCase.FLIPS_SECOND
    )
    value = majority_match_prob(args.p0, args.pprime, args.n, case)
    print(f"{value:.8f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votewatch",
        description="Detect majority-flipping interference in two-candidate elections.",
    )
    parser.add_argument("--version", action="version", version=f"votewatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run the interference test per region")
    p_test.add_argument("--results", type=Path, help="results CSV (region,candidate,votes)")
    p_test.add_argument(
        "--polls", type=Path, help="polls CSV (region,poll_id,candidate,respondents)"
    )
    p_test.add_argument(
        "--dataset", choices=BUNDLED_DATASETS, help="use a bundled dataset instead of files"
    )
    p_test.add_argument(
        "--candidates", help="designate the two candidates as 'NAME1,NAME2'"
    )
    p_test.add_argument("--method", choices=["exit", "cost"], default="exit")
    p_test.add_argument(
        "--cost", default="texp:30", help="cost prior for --method cost, e.g. texp:30 or beta:30"
    )
    p_test.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p_test.add_argument("--tau-c", type=float, default=DEFAULT_TAU_C, dest="tau_c")
    p_test.add_argument("--json", type=Path, help="write the machine-readable report here")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="estimate error rates and power by simulation")
    p_sim.add_argument("--protocol", choices=["a", "b"])
    p_sim.add_argument("--config", type=Path, help="JSON file with simulate settings")
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--k", type=int)
    p_sim.add_argument("--p0", type=float, nargs="+")
    p_sim.add_argument("--pprime", type=float, nargs="+")
    p_sim.add_argument("--p0-range", type=float, nargs=2, dest="p0_range")
    p_sim.add_argument("--true-cost", dest="true_cost")
    p_sim.add_argument("--assumed-cost", dest="assumed_cost")
    p_sim.add_argument("--alpha", type=float)
    p_sim.add_argument("--tau-c", type=float, dest="tau_c")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--out", type=Path)
    p_sim.set_defaults(func=cmd_simulate)

    p_fprob = sub.add_parser(
        "fprob", help="print the majority-match probability for one share pair"
    )
    p_fprob.add_argument("--p0", type=float, required=True)
    p_fprob.add_argument("--pprime", type=float, required=True)
    p_fprob.add_argument("--n", type=int, required=True)
    p_fprob.add_argument("--case", choices=["b", "c"], default="b")
    p_fprob.set_defaults(func=cmd_fprob)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FeasibilityError, BoundaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def entrypoint() -> None:
    sys.exit(main())
