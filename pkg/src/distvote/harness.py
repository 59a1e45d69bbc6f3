"""Experiment orchestration: evaluate rules on profiles, aggregate, emit CSV.

A run is described by a flat key/value config (see :func:`parse_config`).
Profiles come either from a sampler grid (every combination of the ``m`` and
``n`` lists, ``trials`` profiles each) or from SOC input files.  For each
profile the selected rules are evaluated and their exact metric distortion
computed; per cell (m, n, rule) the mean and variance over finite trials are
reported with infinite outcomes counted separately.

Determinism: trial sub-seeds are assigned up front from the config seed and
results are reduced in trial order, so output bytes do not depend on the
parallelism degree.
"""

from __future__ import annotations

import glob
import math
import multiprocessing
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .distortion import DistortionLp
from .ingest import parse_soc
from .lp import NumericalFailure
from .rules import (
    c1_maximal_lottery,
    c2_maximal_lottery,
    crww,
    random_dictatorship,
    randomized_plurality_veto,
)
from .samplers import MODELS, RNG_ALGORITHM, SamplerSpec, sample, sub_seed

RULE_FUNCTIONS = {
    "RandomDictatorship": random_dictatorship,
    "C1ML": c1_maximal_lottery,
    "C2ML": c2_maximal_lottery,
    "CRWW": crww,
    "PluralityVeto": randomized_plurality_veto,
}

# Column order of the wide CSV layout.
WIDE_ORDER = ("RandomDictatorship", "C1ML", "C2ML", "CRWW", "PluralityVeto")

_RULE_ALIASES = {
    "RD": "RandomDictatorship",
    "RANDOMDICTATORSHIP": "RandomDictatorship",
    "RPV": "PluralityVeto",
    "PLURALITYVETO": "PluralityVeto",
    "C1ML": "C1ML",
    "C2ML": "C2ML",
    "CRWW": "CRWW",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class MixedMError(ValueError):
    """Wide CSV layout requires a single number of alternatives."""


def canonical_rule(token: str) -> str:
    try:
        return _RULE_ALIASES[token.strip().upper()]
    except KeyError:
        raise ConfigError(f"unknown rule {token.strip()!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    rules: tuple[str, ...]
    seed: int
    trials: int = 1
    model: str | None = None
    m_values: tuple[int, ...] = ()
    n_values: tuple[int, ...] = ()
    phi: float = 0.5
    alpha: float = 10.0
    dim: int = 3
    geometry: str = "cube"
    input_patterns: tuple[str, ...] = ()
    input_paths: tuple[str, ...] = ()
    workers: int = 1
    layout: str = "long"

    def __post_init__(self) -> None:
        if not self.rules:
            raise ConfigError("at least one rule is required")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.layout not in ("long", "wide"):
            raise ConfigError(f"unknown layout {self.layout!r}")
        sampled = self.model is not None
        if sampled:
            if self.model not in MODELS:
                raise ConfigError(f"unknown model {self.model!r}")
            if not self.m_values or not self.n_values:
                raise ConfigError("sampler experiments need nonempty m and n lists")
        elif not self.input_paths:
            raise ConfigError("config needs either a sampler model or input files")


def _parse_int_list(value: str) -> tuple[int, ...]:
    return tuple(int(item.strip()) for item in value.split(",") if item.strip())


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse the flat ``key = value`` config grammar.

    Lines are ``key = value`` pairs; ``#`` starts a comment and blank lines
    are skipped.  List values are comma-separated.  ``input`` holds glob
    patterns resolved relative to ``base_dir``.
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        entries[key.strip()] = value.strip()

    known = {"model", "m", "n", "trials", "rules", "seed", "phi", "alpha",
             "dim", "geometry", "input", "workers", "layout"}
    unknown = set(entries) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "rules" not in entries or "seed" not in entries:
        raise ConfigError("config requires 'rules' and 'seed'")

    rules = tuple(dict.fromkeys(canonical_rule(t) for t in entries["rules"].split(",")))
    patterns = tuple(t.strip() for t in entries.get("input", "").split(",") if t.strip())
    paths: tuple[str, ...] = ()
    if patterns:
        matched: list[str] = []
        for pattern in patterns:
            full = pattern if os.path.isabs(pattern) else os.path.join(base_dir, pattern)
            matched.extend(sorted(glob.glob(full)))
        if not matched:
            raise ConfigError(f"input patterns matched no files: {patterns}")
        paths = tuple(matched)

    return ExperimentConfig(
        rules=rules,
        seed=int(entries["seed"]),
        trials=int(entries.get("trials", "1")),
        model=entries.get("model"),
        m_values=_parse_int_list(entries.get("m", "")),
        n_values=_parse_int_list(entries.get("n", "")),
        phi=float(entries.get("phi", "0.5")),
        alpha=float(entries.get("alpha", "10")),
        dim=int(entries.get("dim", "3")),
        geometry=entries.get("geometry", "cube"),
        input_patterns=patterns,
        input_paths=paths,
        workers=int(entries.get("workers", "1")),
        layout=entries.get("layout", "long"),
    )


def config_comment_lines(config: ExperimentConfig) -> list[str]:
    """Science-relevant resolved config, embedded in every CSV.

    ``workers`` is deliberately omitted: parallelism must not change output
    bytes.
    """
    lines = [f"rng = {RNG_ALGORITHM}", f"seed = {config.seed}",
             f"rules = {','.join(config.rules)}"]
    if config.model is not None:
        lines.append(f"model = {config.model}")
        lines.append(f"m = {','.join(str(v) for v in config.m_values)}")
        lines.append(f"n = {','.join(str(v) for v in config.n_values)}")
        lines.append(f"trials = {config.trials}")
        if config.model == "mallows":
            lines.append(f"phi = {config.phi}")
        if config.model == "urn":
            lines.append(f"alpha = {config.alpha}")
        if config.model == "euclidean":
            lines.append(f"dim = {config.dim}")
            lines.append(f"geometry = {config.geometry}")
    if config.input_patterns:
        lines.append(f"input = {','.join(config.input_patterns)}")
    return lines


@dataclass(frozen=True)
class CellResult:
    """Aggregate for one (m, n, rule) cell.

    ``mean`` and ``variance`` (population) cover finite trials only;
    infinite distortions are counted in ``infinite`` and trials that failed
    numerically in ``failures``.  ``trials`` counts evaluated trials
    (finite + infinite).
    """

    m: int
    n: int
    rule: str
    mean: float
    variance: float
    trials: int
    infinite: int
    failures: int = 0


def _evaluate_trial(task) -> dict[str, float | None]:
    """Distortion of every selected rule on one profile (worker function)."""
    payload, rule_names = task
    profile = sample(payload) if isinstance(payload, SamplerSpec) else payload
    solver = DistortionLp(profile)
    outcome: dict[str, float | None] = {}
    for name in rule_names:
        try:
            outcome[name] = solver.metric_distortion(RULE_FUNCTIONS[name](profile))
        except NumericalFailure:
            outcome[name] = None
    return outcome


def _run_tasks(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_evaluate_trial(task) for task in tasks]
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(_evaluate_trial, tasks, chunksize=1)


def _aggregate(key_order, keys, outcomes, rules) -> list[CellResult]:
    per_cell: dict[tuple[int, int], list[dict]] = {key: [] for key in key_order}
    for key, outcome in zip(keys, outcomes):
        per_cell[key].append(outcome)
    results = []
    for m, n in key_order:
        for rule in rules:
            values = [o[rule] for o in per_cell[(m, n)]]
            failures = sum(1 for v in values if v is None)
            finite = [v for v in values if v is not None and math.isfinite(v)]
            infinite = sum(1 for v in values if v is not None and math.isinf(v))
            if failures:
                warnings.warn(
                    f"cell m={m} n={n} rule={rule}: {failures} trial(s) failed numerically"
                )
            mean = float(np.mean(finite)) if finite else math.nan
            variance = float(np.var(finite)) if finite else math.nan
            results.append(CellResult(
                m=m, n=n, rule=rule, mean=mean, variance=variance,
                trials=len(values) - failures, infinite=infinite, failures=failures,
            ))
    return sorted(results, key=lambda r: (r.m, r.n, r.rule))


def run_experiment(config: ExperimentConfig) -> list[CellResult]:
    """Run all cells of a config; deterministic for a fixed config at any
    parallelism degree (per-trial sub-seeds, trial-order reduction)."""
    tasks = []
    keys = []
    if config.model is not None:
        cells = [(m, n) for m in config.m_values for n in config.n_values]
        for cell_index, (m, n) in enumerate(cells):
            cell_seed = sub_seed(config.seed, cell_index)
            for trial in range(config.trials):
                spec = SamplerSpec(
                    model=config.model, m=m, n=n, seed=sub_seed(cell_seed, trial),
                    phi=config.phi, alpha=config.alpha, dim=config.dim,
                    geometry=config.geometry,
                )
                tasks.append((spec, config.rules))
                keys.append((m, n))
        key_order = cells
    else:
        key_order = []
        for path in config.input_paths:
            with open(path, "r", encoding="utf-8") as handle:
                profile = parse_soc(handle.read()).profile
            key = (profile.m, profile.n)
            if key not in key_order:
                key_order.append(key)
            tasks.append((profile, config.rules))
            keys.append(key)

    outcomes = _run_tasks(tasks, config.workers)
    return _aggregate(key_order, keys, outcomes, config.rules)


def write_csv(results, layout: str = "long", comments=()) -> str:
    """Render results as deterministic CSV text.

    Long layout: ``m,n,rule,mean,variance,trials,infinite`` rows sorted by
    (m, n, rule).  Wide layout: one row per n with per-rule mean columns in
    the fixed order ``n,RandomDictatorship,C1ML,C2ML,CRWW,PluralityVeto``
    (absent rules omitted); requires a single m.  Values carry 6 decimal
    digits and the text ends with a newline.
    """
    lines = [f"# {comment}" for comment in comments]
    ordered = sorted(results, key=lambda r: (r.m, r.n, r.rule))
    if layout == "long":
        lines.append("m,n,rule,mean,variance,trials,infinite")
        for r in ordered:
            lines.append(
                f"{r.m},{r.n},{r.rule},{r.mean:.6f},{r.variance:.6f},{r.trials},{r.infinite}"
            )
    elif layout == "wide":
        ms = {r.m for r in ordered}
        if len(ms) > 1:
            raise MixedMError(f"wide layout needs a single m, got {sorted(ms)}")
        present = {r.rule for r in ordered}
        columns = [rule for rule in WIDE_ORDER if rule in present]
        cells = {(r.n, r.rule): r.mean for r in ordered}
        lines.append(",".join(["n", *columns]))
        for n in sorted({r.n for r in ordered}):
            row = [str(n)] + [f"{cells[(n, rule)]:.6f}" for rule in columns]
            lines.append(",".join(row))
    else:
        raise ValueError(f"unknown layout {layout!r}")
    return "\n".join(lines) + "\n"


def summarize(results) -> str:
    """Human-readable per-rule summary across cells."""
    if not results:
        return "no results\n"
    by_rule: dict[str, list[CellResult]] = {}
    for r in sorted(results, key=lambda r: (r.rule, r.m, r.n)):
        by_rule.setdefault(r.rule, []).append(r)
    lines = [f"{'rule':<20} {'cells':>5} {'mean':>9} {'min':>9} {'max':>9} "
             f"{'infinite':>8} {'failed':>6}"]
    for rule, cells in by_rule.items():
        means = [c.mean for c in cells if not math.isnan(c.mean)]
        mean = float(np.mean(means)) if means else math.nan
        lo = min(means) if means else math.nan
        hi = max(means) if means else math.nan
        infinite = sum(c.infinite for c in cells)
        failed = sum(c.failures for c in cells)
        lines.append(f"{rule:<20} {len(cells):>5} {mean:>9.6f} {lo:>9.6f} {hi:>9.6f} "
                     f"{infinite:>8} {failed:>6}")
    return "\n".join(lines) + "\n"
