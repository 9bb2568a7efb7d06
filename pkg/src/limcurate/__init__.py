"""Reward-trajectory scoring and subset selection for RL training data."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceedsPopulation,
    CountExceedsPopulation,
    DegenerateAverage,
    DuplicateRecord,
    EmptyLog,
    EmptyRollouts,
    LimError,
    ParseError,
    RaggedLog,
    TooFewEpochs,
    UnknownSample,
    UsageError,
    ValueOutOfRange,
)
from .rewards import (  # noqa: E402
    GoldItem,
    Verdict,
    VerdictKind,
    extract_answer,
    grade,
    normalize_answer,
    pass_rate,
)
from .trajectory import (  # noqa: E402
    AverageCurve,
    RewardTrajectory,
    ScoredSample,
    TrainingLog,
    compute_average_curve,
    lim_score,
    linear_score,
    score_all,
    select_by_threshold,
    select_random,
    select_top_k,
)
