"""Reward trajectories, the average learning curve, and sample selection.

A trajectory is one sample's pass rate per epoch.  The average curve is the
per-epoch mean over every sample in a log, and the LIM score measures how
closely a trajectory follows that curve:

    lim = 1 - sum_k (r_k - avg_k)^2 / sum_k (1 - avg_k)^2

LINEAR is the baseline that rewards steady improvement, scored as the
Pearson correlation between epoch index and reward, clipped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CountExceedsPopulation,
    DegenerateAverage,
    EmptyLog,
    TooFewEpochs,
)

DEFAULT_LIM_THETA = 0.6
DEFAULT_LINEAR_THETA = 0.7
DEGENERATE_TOL = 1e-12

SCORE_FIELDS = ("lim", "linear")


@dataclass(frozen=True)
class RewardTrajectory:
    sample_id: str
    rewards: tuple[float, ...]
    rollouts_per_epoch: int = 8

    def __post_init__(self):
        rewards = tuple(float(r) for r in self.rewards)
        if not rewards:
            raise ValueError(f"trajectory {self.sample_id!r} has no epochs")
        for r in rewards:
            if not (0.0 <= r <= 1.0):
                raise ValueError(
                    f"trajectory {self.sample_id!r} has reward {r} outside [0, 1]"
                )
        if int(self.rollouts_per_epoch) < 1:
            raise ValueError("rollouts_per_epoch must be positive")
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "rollouts_per_epoch", int(self.rollouts_per_epoch))

    @property
    def epochs(self) -> int:
        return len(self.rewards)


class TrainingLog:
    """Rectangular N x K collection of trajectories keyed by sample id.

    Insertion order is kept for iteration; nothing computed from the log
    depends on it.
    """

    def __init__(self, trajectories: Iterable[RewardTrajectory] = ()):
        self._trajectories: dict[str, RewardTrajectory] = {}
        self._epochs: int | None = None
        for traj in trajectories:
            self.add(traj)

    def add(self, traj: RewardTrajectory) -> None:
        if traj.sample_id in self._trajectories:
            raise ValueError(f"duplicate sample id {traj.sample_id!r}")
        if self._epochs is None:
            self._epochs = traj.epochs
        elif traj.epochs != self._epochs:
            raise ValueError(
                f"trajectory {traj.sample_id!r} has {traj.epochs} epochs, "
                f"log has {self._epochs}"
            )
        self._trajectories[traj.sample_id] = traj

    @classmethod
    def from_matrix(cls, ids: Sequence[str], matrix, rollouts: int = 8) -> "TrainingLog":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise ValueError("matrix must be 2-D with one row per id")
        return cls(
            RewardTrajectory(sid, tuple(row), rollouts) for sid, row in zip(ids, matrix)
        )

    @property
    def trajectories(self) -> Mapping[str, RewardTrajectory]:
        return self._trajectories

    @property
    def sample_ids(self) -> list[str]:
        return list(self._trajectories)

    @property
    def sample_count(self) -> int:
        return len(self._trajectories)

    @property
    def epochs(self) -> int:
        return self._epochs or 0

    def __len__(self):
        return len(self._trajectories)

    def __iter__(self):
        return iter(self._trajectories.values())

    def __getitem__(self, sample_id):
        return self._trajectories[sample_id]

    def __contains__(self, sample_id):
        return sample_id in self._trajectories

    def __eq__(self, other):
        if not isinstance(other, TrainingLog):
            return NotImplemented
        return self._trajectories == other._trajectories

    def __repr__(self):
        return f"TrainingLog(N={self.sample_count}, K={self.epochs})"

    def matrix(self, ids: Sequence[str] | None = None) -> np.ndarray:
        ids = self.sample_ids if ids is None else ids
        return np.array([self._trajectories[i].rewards for i in ids], dtype=float).reshape(
            len(ids), self.epochs
        )


@dataclass(frozen=True)
class AverageCurve:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass
class ScoredSample:
    sample_id: str
    lim_score: float
    linear_score: float
    selected: bool = False

    def score(self, field: str) -> float:
        if field == "lim":
            return self.lim_score
        if field == "linear":
            return self.linear_score
        raise ValueError(f"unknown score field {field!r}; expected one of {SCORE_FIELDS}")


def compute_average_curve(log: TrainingLog) -> AverageCurve:
    if log.sample_count == 0 or log.epochs == 0:
        raise EmptyLog("cannot average an empty log")
    return AverageCurve(tuple(log.matrix().mean(axis=0)))


def _rewards(traj) -> np.ndarray:
    if isinstance(traj, RewardTrajectory):
        return np.asarray(traj.rewards, dtype=float)
    return np.asarray(traj, dtype=float)


def _avg_values(avg) -> np.ndarray:
    if isinstance(avg, AverageCurve):
        return avg.as_array()
    return np.asarray(avg, dtype=float)


def lim_score(traj, avg) -> float:
    """Alignment of one trajectory with the average curve.

    Accepts a RewardTrajectory or a plain sequence for ``traj`` and an
    AverageCurve or sequence for ``avg``.  Raises DegenerateAverage when the
    average is 1 in every epoch.
    """
    r = _rewards(traj)
    a = _avg_values(avg)
    if r.shape != a.shape:
        raise ValueError(f"trajectory has {r.size} epochs, average curve has {a.size}")
    denom = float(np.sum((1.0 - a) ** 2))
    if denom < DEGENERATE_TOL:
        raise DegenerateAverage(
            f"average curve is saturated at 1 (denominator {denom:.3g}); alignment undefined"
        )
    return 1.0 - float(np.sum((r - a) ** 2)) / denom


def lim_scores(log: TrainingLog, avg: AverageCurve | None = None) -> np.ndarray:
    """Vectorized lim_score for every sample, in log order."""
    avg = compute_average_curve(log) if avg is None else avg
    a = avg.as_array()
    denom = float(np.sum((1.0 - a) ** 2))
    if denom < DEGENERATE_TOL:
        raise DegenerateAverage(
            f"average curve is saturated at 1 (denominator {denom:.3g}); alignment undefined"
        )
    m = log.matrix()
    return 1.0 - np.sum((m - a) ** 2, axis=1) / denom


def linear_score(traj) -> float:
    """Pearson correlation of rewards against epoch 1..K, clipped below at 0.

    A constant trajectory scores 0.  The input may be any real sequence, so
    the score is usable on rescaled rewards too.
    """
    y = _rewards(traj)
    k = y.size
    if k < 2:
        raise TooFewEpochs(f"LINEAR needs at least 2 epochs, got {k}")
    if np.all(y == y[0]):
        return 0.0
    x = np.arange(1, k + 1, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxy = float(np.dot(dx, dy))
    syy = float(np.dot(dy, dy))
    if syy == 0.0:
        return 0.0
    rho = sxy / math.sqrt(float(np.dot(dx, dx)) * syy)
    # rounding can push |rho| a hair past 1
    return min(1.0, max(0.0, rho))


def score_all(log: TrainingLog) -> list[ScoredSample]:
    """LIM and LINEAR scores for every sample, ordered by sample id."""
    avg = compute_average_curve(log)
    lims = dict(zip(log.sample_ids, lim_scores(log, avg)))
    return [
        ScoredSample(sid, float(lims[sid]), linear_score(log[sid]))
        for sid in sorted(log.sample_ids)
    ]


def select_by_threshold(
    scores: Sequence[ScoredSample], field: str = "lim", theta: float = DEFAULT_LIM_THETA
) -> list[str]:
    """Ids whose score is strictly greater than ``theta``, in input order."""
    if field not in SCORE_FIELDS:
        raise ValueError(f"unknown score field {field!r}; expected one of {SCORE_FIELDS}")
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    return [s.sample_id for s in scores if s.score(field) > theta]


def select_top_k(scores: Sequence[ScoredSample], field: str, k: int) -> list[str]:
    """Highest ``k`` scores; ties broken by sample id ascending."""
    if k < 0 or k > len(scores):
        raise CountExceedsPopulation(f"cannot take top {k} of {len(scores)} samples")
    ranked = sorted(scores, key=lambda s: (-s.score(field), s.sample_id))
    return [s.sample_id for s in ranked[:k]]


def select_random(ids: Sequence[str], count: int, seed: int) -> list[str]:
    """Uniform sample of ``count`` ids without replacement, in original order."""
    ids = list(ids)
    if count < 0 or count > len(ids):
        raise CountExceedsPopulation(f"cannot draw {count} of {len(ids)} ids")
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = np.sort(rng.permutation(len(ids))[:count])
    return [ids[i] for i in picked]


def mark_selected(scores: Sequence[ScoredSample], selected_ids: Iterable[str]) -> None:
    chosen = set(selected_ids)
    for s in scores:
        s.selected = s.sample_id in chosen
