"""Seeded random preference-profile generators for the average-case experiments.

Four models: impartial culture (i.i.d. uniform rankings), the Mallows model
(sampled exactly by repeated insertion), the Polya-Eggenberger urn model
(contagious draws), and Euclidean models placing voters and alternatives
uniformly in a cube or ball.

All sampling is driven by numpy's Philox counter-based generator keyed
through ``SeedSequence``, so a spec determines its profile exactly and
batches can be generated in parallel from precomputed sub-seeds.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .profiles import PreferenceProfile, profile_from_indices

RNG_ALGORITHM = "philox4x64-seedsequence"

MODELS = ("IC", "mallows", "urn", "euclidean")
GEOMETRIES = ("cube", "ball")


@dataclass(frozen=True)
class SamplerSpec:
    """A fully deterministic description of one random profile.

    Model-specific fields are ignored by the other models: ``phi`` and
    ``reference`` belong to Mallows (``phi = 1`` degenerates to impartial
    culture, ``phi = 0`` to copies of the reference), ``alpha`` to the urn
    (expected copies added per draw), ``dim``/``geometry`` to Euclidean.
    """

    model: str
    m: int
    n: int
    seed: int
    phi: float = 0.5
    reference: tuple[int, ...] | None = None
    alpha: float = 10.0
    dim: int = 3
    geometry: str = "cube"

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.m < 1 or self.n < 1:
            raise ValueError("need m >= 1 alternatives and n >= 1 voters")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi must lie in [0, 1]")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.reference is not None and sorted(self.reference) != list(range(self.m)):
            raise ValueError("reference must be a permutation of 0..m-1")


def sub_seed(seed: int, index: int) -> int:
    """Collision-resistant 64-bit sub-seed for trial ``index``."""
    state = np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)
    return int(state[0])


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _names(m: int) -> tuple[str, ...]:
    return tuple(str(i + 1) for i in range(m))


def _mallows_ranking(rng: np.random.Generator, reference, phi: float) -> tuple[int, ...]:
    # Repeated insertion: step j inserts the j-th reference item at position
    # k in 0..j-1 with weight phi^(j-1-k), which is exact for the model.
    ranking: list[int] = []
    for j, item in enumerate(reference, start=1):
        weights = phi ** np.arange(j - 1, -1, -1, dtype=float)
        position = int(rng.choice(j, p=weights / weights.sum()))
        ranking.insert(position, item)
    return tuple(ranking)


def _urn_rankings(rng: np.random.Generator, m: int, n: int, alpha: float):
    # The urn starts with every ranking once; enumerating m! rankings is
    # avoided by drawing fresh uniform rankings with probability
    # m!/(m! + k*alpha) and otherwise copying one of the k earlier draws.
    fact = float(math.factorial(m))
    draws: list[tuple[int, ...]] = []
    for _ in range(n):
        k = len(draws)
        if rng.random() < fact / (fact + k * alpha):
            draws.append(tuple(int(x) for x in rng.permutation(m)))
        else:
            draws.append(draws[int(rng.integers(k))])
    return draws


def _ball_points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    points = np.empty((count, dim))
    filled = 0
    while filled < count:
        batch = rng.uniform(-1.0, 1.0, size=(max(2 * count, 16), dim))
        kept = batch[(batch * batch).sum(axis=1) <= 1.0]
        take = min(len(kept), count - filled)
        points[filled : filled + take] = kept[:take]
        filled += take
    return points


def euclidean_points(spec: SamplerSpec) -> tuple[np.ndarray, np.ndarray]:
    """The (alternative, voter) point sets a Euclidean spec induces.

    Alternatives are drawn before voters from the spec's generator; the
    profile returned by :func:`sample` ranks by squared distance to these
    exact points, ties broken by alternative index.
    """
    rng = _generator(spec.seed)
    if spec.geometry == "cube":
        alternatives = rng.uniform(-1.0, 1.0, size=(spec.m, spec.dim))
        voters = rng.uniform(-1.0, 1.0, size=(spec.n, spec.dim))
    else:
        alternatives = _ball_points(rng, spec.m, spec.dim)
        voters = _ball_points(rng, spec.n, spec.dim)
    return alternatives, voters


def profile_from_points(
    alternatives: np.ndarray, voters: np.ndarray, names=None
) -> PreferenceProfile:
    """Rank alternatives by squared Euclidean distance to each voter point."""
    rankings = []
    for voter in voters:
        d2 = ((alternatives - voter) ** 2).sum(axis=1)
        rankings.append(tuple(int(x) for x in np.argsort(d2, kind="stable")))
    return profile_from_indices(rankings, names=names or _names(len(alternatives)))


def sample(spec: SamplerSpec) -> PreferenceProfile:
    """Generate the profile a spec describes; identical specs give identical
    profiles, independent of platform for one build."""
    rng = _generator(spec.seed)
    names = _names(spec.m)
    if spec.model == "IC":
        rankings = [tuple(int(x) for x in rng.permutation(spec.m)) for _ in range(spec.n)]
    elif spec.model == "mallows":
        reference = spec.reference if spec.reference is not None else tuple(range(spec.m))
        rankings = [_mallows_ranking(rng, reference, spec.phi) for _ in range(spec.n)]
    elif spec.model == "urn":
        rankings = _urn_rankings(rng, spec.m, spec.n, spec.alpha)
    else:
        alternatives, voters = euclidean_points(spec)
        return profile_from_points(alternatives, voters, names=names)
    return profile_from_indices(rankings, names=names)


def sample_batch(spec: SamplerSpec, trials: int) -> list[PreferenceProfile]:
    """One profile per trial, trial ``i`` re-seeded with ``sub_seed(seed, i)``.

    The batch is deterministic and, because sub-seeds are precomputed, the
    trials are independent and may be generated in parallel in any order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return [
        sample(dataclasses.replace(spec, seed=sub_seed(spec.seed, i)))
        for i in range(trials)
    ]
