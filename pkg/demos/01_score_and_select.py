# %% [markdown]
# # Scoring a training log
#
# A log holds one pass rate per sample and epoch. Samples whose curve
# tracks the population average get a LIM score near 1.

# %%
import numpy as np

from limcurate.trajectory import (
    TrainingLog,
    compute_average_curve,
    score_all,
    select_by_threshold,
    select_random,
    select_top_k,
)

rows = {
    "steady_climb": [0.1, 0.3, 0.5, 0.7, 0.9],
    "already_solved": [1.0, 1.0, 1.0, 1.0, 1.0],
    "never_solved": [0.0, 0.0, 0.0, 0.0, 0.0],
    "late_bloomer": [0.0, 0.0, 0.1, 0.6, 1.0],
    "noisy": [0.5, 0.0, 0.75, 0.25, 0.5],
}
log = TrainingLog.from_matrix(list(rows), list(rows.values()), rollouts=8)
print(compute_average_curve(log).values)

# %%
scores = score_all(log)
for s in scores:
    print(f"{s.sample_id:15s} lim={s.lim_score:.3f} linear={s.linear_score:.3f}")

# %% [markdown]
# Threshold selection keeps scores strictly above theta.

# %%
print(select_by_threshold(scores, "lim", 0.6))
print(select_top_k(scores, "lim", 2))

# %% [markdown]
# A random baseline of the same size, reproducible from the seed.

# %%
print(select_random(log.sample_ids, 2, seed=0))
print(select_random(log.sample_ids, 2, seed=0) == select_random(log.sample_ids, 2, seed=0))

# %% Bigger random population
rng = np.random.default_rng(1)
big = TrainingLog.from_matrix([f"s{i}" for i in range(500)], rng.random((500, 6)))
lims = np.array([s.lim_score for s in score_all(big)])
print(f"median lim {np.median(lims):.3f}, above 0.6: {(lims > 0.6).sum()}")
