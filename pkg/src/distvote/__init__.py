"""Metric distortion of randomized voting rules.

Compute the exact metric distortion of a lottery over alternatives via a
compact linear program, evaluate five classic randomized social choice
functions, and reproduce average-case experiments from synthetic samplers or
PrefLib SOC data.
"""

from .distortion import (
    BiasedValuation,
    DistortionLp,
    InfeasibleLpError,
    LpOneSolution,
    MetricWitness,
    biased_metric,
    distortion_at,
    extract_witness_metric,
    majority_distance_bound,
    metric_distortion,
    optimal_majoritarian_lottery,
    oracle_distortion,
)
from .harness import (
    CellResult,
    ExperimentConfig,
    parse_config,
    run_experiment,
    summarize,
    write_csv,
)
from .ingest import SocDocument, SocError, parse_soc, write_soc
from .lp import (
    LinearProgram,
    LpOutcome,
    LpStatus,
    NumericalFailure,
    solve,
    solve_matrix_game,
)
from .profiles import (
    MajorityRelation,
    PreferenceProfile,
    SupportMatrix,
    Tallies,
    build_profile,
    lottery_majority_distance,
    majority_distance,
    majority_distance_matrix,
    majority_relation,
    mcgarvey,
    restrict,
    support_matrix,
    tallies,
)
from .rules import (
    CRWW_CONSTANTS,
    CrwwConstants,
    Lottery,
    beta_radius_rule,
    beta_uncovered_set,
    c1_maximal_lottery,
    c2_maximal_lottery,
    crww,
    plurality_veto_winners,
    random_dictatorship,
    randomized_plurality_veto,
)
from .samplers import SamplerSpec, sample, sample_batch, sub_seed

__all__ = [
    "BiasedValuation",
    "CRWW_CONSTANTS",
    "CellResult",
    "CrwwConstants",
    "DistortionLp",
    "ExperimentConfig",
    "InfeasibleLpError",
    "LinearProgram",
    "Lottery",
    "LpOneSolution",
    "LpOutcome",
    "LpStatus",
    "MajorityRelation",
    "MetricWitness",
    "NumericalFailure",
    "PreferenceProfile",
    "SamplerSpec",
    "SocDocument",
    "SocError",
    "SupportMatrix",
    "Tallies",
    "beta_radius_rule",
    "beta_uncovered_set",
    "biased_metric",
    "build_profile",
    "c1_maximal_lottery",
    "c2_maximal_lottery",
    "crww",
    "distortion_at",
    "extract_witness_metric",
    "lottery_majority_distance",
    "majority_distance",
    "majority_distance_bound",
    "majority_distance_matrix",
    "majority_relation",
    "mcgarvey",
    "metric_distortion",
    "optimal_majoritarian_lottery",
    "oracle_distortion",
    "parse_config",
    "parse_soc",
    "plurality_veto_winners",
    "random_dictatorship",
    "randomized_plurality_veto",
    "restrict",
    "run_experiment",
    "sample",
    "sample_batch",
    "solve",
    "solve_matrix_game",
    "sub_seed",
    "summarize",
    "support_matrix",
    "tallies",
    "write_csv",
    "write_soc",
]
