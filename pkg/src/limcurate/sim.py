"""Synthetic reward trajectories for desk-scale validation of selection.

Every sample belongs to one of three archetypes (near-zero, fast saturating,
progressive) and follows a latent saturating-exponential pass-rate curve

    p(k) = p0 + (p_inf - p0) * (1 - exp(-rate * k))

Each epoch draws ``rollouts`` Bernoulli(p(k)) outcomes and records their
pass rate.

Seeding: sample ``i`` of a run seeded with ``seed`` draws from
``np.random.SeedSequence(seed, spawn_key=(i,))``, so samples are
independent of each other and of N.  Seed ``j`` of a strategy comparison
uses ``SeedSequence(cfg.seed, spawn_key=(1_000_000 + j,))`` as its base
seed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import BudgetExceedsPopulation, UsageError
from .trajectory import (
    DEFAULT_LIM_THETA,
    DEFAULT_LINEAR_THETA,
    RewardTrajectory,
    TrainingLog,
    score_all,
    select_by_threshold,
    select_random,
    select_top_k,
)


class Archetype(enum.Enum):
    NEAR_ZERO = "near_zero"
    FAST_SATURATING = "fast_saturating"
    PROGRESSIVE = "progressive"


ARCHETYPES = (Archetype.NEAR_ZERO, Archetype.FAST_SATURATING, Archetype.PROGRESSIVE)

# Uniform ranges (low, high) for p0, p_inf and rate, drawn independently.
# Every draw satisfies the archetype's construction constraints.
ARCHETYPE_PRIORS = {
    Archetype.NEAR_ZERO: {"p0": (0.0, 0.05), "p_inf": (0.0, 0.1), "rate": (0.1, 1.0)},
    Archetype.FAST_SATURATING: {"p0": (0.6, 0.9), "p_inf": (0.9, 1.0), "rate": (2.0, 4.0)},
    Archetype.PROGRESSIVE: {"p0": (0.0, 0.2), "p_inf": (0.7, 0.95), "rate": (0.1, 1.0)},
}

NOISE_MODES = ("bernoulli", "drift", "none")


@dataclass(frozen=True)
class SampleArchetype:
    kind: Archetype
    p0: float
    p_inf: float
    rate: float

    def __post_init__(self):
        kind = Archetype(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p_inf <= 1.0):
            raise ValueError("p0 and p_inf must lie in [0, 1]")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if kind is Archetype.NEAR_ZERO and self.p_inf > 0.1:
            raise ValueError("near-zero samples need p_inf <= 0.1")
        if kind is Archetype.FAST_SATURATING and not (self.p0 >= 0.6 or self.rate >= 2.0):
            raise ValueError("fast-saturating samples need p0 >= 0.6 or rate >= 2")
        if kind is Archetype.PROGRESSIVE and not (
            self.p_inf - self.p0 >= 0.4 and 0.1 <= self.rate <= 1.0
        ):
            raise ValueError("progressive samples need p_inf - p0 >= 0.4 and rate in [0.1, 1]")


def _latent(p0, p_inf, rate, k):
    p = p0 + (p_inf - p0) * (1.0 - np.exp(-rate * np.asarray(k, dtype=float)))
    return np.clip(p, 0.0, 1.0)


def latent_curve(arch: SampleArchetype, k) -> float:
    """Latent pass rate at epoch ``k`` (scalar or array)."""
    p = _latent(arch.p0, arch.p_inf, arch.rate, k)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 300
    epochs: int = 8
    rollouts: int = 8
    archetype_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    noise: str = "bernoulli"
    drift_scale: float = 0.05
    seed: int = 0
    # multiplier applied to progressive rates per unit of progressive
    # fraction in a selected set; see run_strategy_comparison
    feedback_gain: float = 2.0

    def __post_init__(self):
        mix = tuple(float(w) for w in self.archetype_mix)
        object.__setattr__(self, "archetype_mix", mix)
        if self.n_samples < 1 or self.epochs < 2 or self.rollouts < 1:
            raise UsageError("need n_samples >= 1, epochs >= 2 and rollouts >= 1")
        if len(mix) != 3 or any(w < 0 or not math.isfinite(w) for w in mix):
            raise UsageError(f"archetype_mix must be three nonnegative weights, got {mix}")
        if abs(sum(mix) - 1.0) > 1e-9:
            raise UsageError(f"archetype_mix must sum to 1, got {sum(mix)}")
        if self.noise not in NOISE_MODES:
            raise UsageError(f"noise must be one of {NOISE_MODES}, got {self.noise!r}")


def sample_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(index,))


def draw_archetype(kind: Archetype, rng: np.random.Generator) -> SampleArchetype:
    prior = ARCHETYPE_PRIORS[kind]
    return SampleArchetype(
        kind,
        p0=rng.uniform(*prior["p0"]),
        p_inf=rng.uniform(*prior["p_inf"]),
        rate=rng.uniform(*prior["rate"]),
    )


def _sample_id(i: int) -> str:
    return f"sim-{i:05d}"


def draw_population(cfg: SimConfig) -> list[tuple[str, SampleArchetype, np.random.Generator]]:
    """Archetype and latent parameters for every sample, plus its generator.

    The returned generator has consumed only the archetype draws, so it is
    ready for the rollout draws.
    """
    out = []
    for i in range(cfg.n_samples):
        rng = np.random.Generator(np.random.PCG64(sample_seed(cfg.seed, i)))
        kind = ARCHETYPES[int(rng.choice(3, p=cfg.archetype_mix))]
        out.append((_sample_id(i), draw_archetype(kind, rng), rng))
    return out


def _pass_rates(arch: SampleArchetype, cfg: SimConfig, rng, rate_scale: float = 1.0):
    # a boosted rate may leave the archetype's construction range on purpose
    p = _latent(arch.p0, arch.p_inf, arch.rate * rate_scale, np.arange(1, cfg.epochs + 1))
    if cfg.noise == "none":
        return p
    if cfg.noise == "drift":
        p = np.clip(p + np.cumsum(rng.normal(0.0, cfg.drift_scale, size=cfg.epochs)), 0.0, 1.0)
    # compare uniforms with p so a higher latent curve never lowers a pass rate
    u = rng.random((cfg.epochs, cfg.rollouts))
    return (u < p[:, None]).mean(axis=1)


def simulate_log(cfg: SimConfig, progressive_rate_scale: float = 1.0):
    """Simulated training log and the hidden archetype of every sample.

    ``progressive_rate_scale`` multiplies the learning rate of progressive
    samples; it is the hook the selection feedback model uses.
    """
    trajectories = []
    truth = {}
    for sid, arch, rng in draw_population(cfg):
        scale = progressive_rate_scale if arch.kind is Archetype.PROGRESSIVE else 1.0
        rates = _pass_rates(arch, cfg, rng, scale)
        trajectories.append(RewardTrajectory(sid, tuple(rates), cfg.rollouts))
        truth[sid] = arch.kind
    return TrainingLog(trajectories), truth


def expected_average_curve(cfg: SimConfig) -> np.ndarray:
    """Mixture of latent curves, averaged over the parameter priors.

    Uses the closed form of E[p(k)] for independent uniform parameters.
    """
    k = np.arange(1, cfg.epochs + 1, dtype=float)
    total = np.zeros_like(k)
    for w, kind in zip(cfg.archetype_mix, ARCHETYPES):
        prior = ARCHETYPE_PRIORS[kind]
        e_p0 = sum(prior["p0"]) / 2
        e_inf = sum(prior["p_inf"]) / 2
        lo, hi = prior["rate"]
        e_decay = (np.exp(-lo * k) - np.exp(-hi * k)) / (k * (hi - lo))
        total += w * (e_p0 + (e_inf - e_p0) * (1.0 - e_decay))
    return total


def progressive_precision(selected, truth) -> float:
    if not selected:
        return 0.0
    return sum(truth[s] is Archetype.PROGRESSIVE for s in selected) / len(selected)


STRATEGIES = ("FULL", "RAND", "LIM", "LINEAR")


@dataclass
class StrategyResult:
    strategy: str
    yields: list[float] = field(default_factory=list)
    precisions: list[float] = field(default_factory=list)
    above_threshold: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.yields))

    @property
    def stderr(self) -> float:
        if len(self.yields) < 2:
            return 0.0
        return float(np.std(self.yields, ddof=1) / math.sqrt(len(self.yields)))


@dataclass
class ComparisonTable:
    budget: int
    seeds: list[int]
    results: dict[str, StrategyResult]

    def wins(self, a: str, b: str) -> int:
        """Number of seeds where strategy ``a`` has strictly higher yield than ``b``."""
        ya, yb = self.results[a].yields, self.results[b].yields
        return sum(x > y for x, y in zip(ya, yb))

    def rows(self):
        """Per-seed rows followed by one summary row per strategy."""
        for j, s in enumerate(self.seeds):
            for name in STRATEGIES:
                r = self.results[name]
                yield {
                    "seed": s,
                    "strategy": name,
                    "yield": r.yields[j],
                    "progressive_precision": r.precisions[j],
                    "above_threshold": r.above_threshold[j],
                }

    def summary(self):
        return {
            name: {"mean": r.mean, "stderr": r.stderr} for name, r in self.results.items()
        }


def learning_yield(cfg: SimConfig, progressive_fraction: float, fresh_seed: int) -> float:
    """Mean final-epoch pass rate of a fresh run under the feedback model.

    The fresh run's progressive samples learn ``1 + gain * fraction`` times
    faster, where ``fraction`` is the share of progressive samples in the
    selected training set.
    """
    fresh = replace(cfg, seed=fresh_seed)
    log, _ = simulate_log(fresh, 1.0 + cfg.feedback_gain * progressive_fraction)
    return float(log.matrix()[:, -1].mean())


def _budgeted(scores, field, theta, budget):
    # threshold passes rank first; the budget truncates or pads by score
    above = len(select_by_threshold(scores, field, theta))
    return select_top_k(scores, field, budget), above


def run_strategy_comparison(
    cfg: SimConfig,
    budget: int = 100,
    seeds: int = 20,
    lim_theta: float = DEFAULT_LIM_THETA,
    linear_theta: float = DEFAULT_LINEAR_THETA,
) -> ComparisonTable:
    """Compare FULL, RAND, LIM and LINEAR selection under the feedback model.

    Every strategy except FULL picks exactly ``budget`` samples; LIM and
    LINEAR take their top ``budget`` by score, which is the threshold set
    when it has exactly ``budget`` members.  All strategies of one seed share
    the fresh run's random numbers, so yields differ only through the
    progressive fraction of the selection.
    """
    if budget < 0 or budget > cfg.n_samples:
        raise BudgetExceedsPopulation(
            f"budget {budget} outside [0, {cfg.n_samples}]"
        )
    results = {name: StrategyResult(name) for name in STRATEGIES}
    seed_list = []
    for j in range(seeds):
        base = int(np.random.SeedSequence(cfg.seed, spawn_key=(1_000_000 + j,)).generate_state(1)[0])
        seed_list.append(base)
        run_cfg = replace(cfg, seed=base)
        log, truth = simulate_log(run_cfg)
        scores = score_all(log)
        ids = [s.sample_id for s in scores]
        picks = {
            "FULL": (ids, len(ids)),
            "RAND": (select_random(ids, budget, base), budget),
            "LIM": _budgeted(scores, "lim", lim_theta, budget),
            "LINEAR": _budgeted(scores, "linear", linear_theta, budget),
        }
        fresh_seed = base + 1
        for name, (chosen, above) in picks.items():
            prec = progressive_precision(chosen, truth)
            r = results[name]
            r.precisions.append(prec)
            r.above_threshold.append(above)
            r.yields.append(learning_yield(cfg, prec, fresh_seed))
    return ComparisonTable(budget, seed_list, results)
