"""Command-line interface.

Subcommands: ``validate`` (check a SOC file), ``rule`` (print a rule's
lottery), ``distort`` (exact metric distortion of a lottery or of a rule's
lottery), ``sample`` (emit a random profile as SOC), and ``experiment``
(run a config and write CSV).

Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .distortion import DistortionLp
from .harness import (
    RULE_FUNCTIONS,
    canonical_rule,
    config_comment_lines,
    parse_config,
    run_experiment,
    summarize,
    write_csv,
)
from .ingest import SocDocument, SocError, parse_soc, write_soc
from .lp import NumericalFailure
from .profiles import PreferenceProfile, ProfileError
from .rules import Lottery
from .samplers import GEOMETRIES, MODELS, RNG_ALGORITHM, SamplerSpec, sample

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise _UsageError(message)


def _load_profile(path: str) -> PreferenceProfile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_soc(handle.read()).profile


def _parse_lottery(spec: str, profile: PreferenceProfile) -> Lottery:
    """Parse ``uniform`` or a ``name:prob,...`` list (omitted names get 0)."""
    if spec.strip() == "uniform":
        return Lottery.uniform(profile.m)
    probs = np.zeros(profile.m)
    for item in spec.split(","):
        name, sep, value = item.partition(":")
        if not sep:
            raise ValueError(f"bad lottery entry {item!r}; expected 'name:prob'")
        probs[profile.index_of(name.strip())] = float(value)
    return Lottery(probs)


def _format_value(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"


def _cmd_validate(args) -> int:
    profile = _load_profile(args.profile)
    distinct = len(set(profile.rankings))
    print(f"ok: {profile.m} alternatives, {profile.n} voters, {distinct} distinct rankings")
    return EXIT_OK


def _cmd_rule(args) -> int:
    profile = _load_profile(args.profile)
    lottery = RULE_FUNCTIONS[canonical_rule(args.name)](profile)
    for name, p in lottery.as_dict(profile.alternatives).items():
        print(f"{name}\t{p:.6f}")
    return EXIT_OK


def _cmd_distort(args) -> int:
    profile = _load_profile(args.profile)
    if args.rule:
        lottery = RULE_FUNCTIONS[canonical_rule(args.rule)](profile)
    else:
        lottery = _parse_lottery(args.lottery, profile)
    print(_format_value(DistortionLp(profile).metric_distortion(lottery)))
    return EXIT_OK


def _cmd_sample(args) -> int:
    spec = SamplerSpec(
        model=args.model, m=args.m, n=args.n, seed=args.seed, phi=args.phi,
        alpha=args.alpha, dim=args.dim, geometry=args.geometry,
    )
    profile = sample(spec)
    metadata = [
        ("DATA TYPE", "soc"),
        ("MODEL", spec.model),
        ("NUMBER ALTERNATIVES", str(profile.m)),
        ("NUMBER VOTERS", str(profile.n)),
        ("RNG", RNG_ALGORITHM),
        ("SEED", str(spec.seed)),
    ]
    text = write_soc(SocDocument(metadata=tuple(metadata), profile=profile))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        config = parse_config(handle.read(), base_dir=os.path.dirname(args.config) or ".")
    results = run_experiment(config)
    csv_text = write_csv(results, layout=config.layout, comments=config_comment_lines(config))
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(csv_text)
    sys.stdout.write(summarize(results))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distvote", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("validate", help="check a SOC profile file")
    q.add_argument("profile")
    q.set_defaults(func=_cmd_validate)

    q = sub.add_parser("rule", help="print the lottery a rule selects")
    q.add_argument("name", help="RD, RPV, C1ML, C2ML, or CRWW")
    q.add_argument("profile")
    q.set_defaults(func=_cmd_rule)

    q = sub.add_parser("distort", help="exact metric distortion of a lottery")
    q.add_argument("profile")
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--rule", help="evaluate this rule's lottery")
    group.add_argument("--lottery", help="'uniform' or 'name:prob,...'")
    q.set_defaults(func=_cmd_distort)

    q = sub.add_parser("sample", help="emit a random profile as SOC text")
    q.add_argument("--model", required=True, choices=MODELS)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--phi", type=float, default=0.5)
    q.add_argument("--alpha", type=float, default=10.0)
    q.add_argument("--dim", type=int, default=3)
    q.add_argument("--geometry", choices=GEOMETRIES, default="cube")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_sample)

    q = sub.add_parser("experiment", help="run a config file and write CSV")
    q.add_argument("--config", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SocError, ProfileError, OSError, KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
