"""Reading and writing logs, datasets, scores, selections and reports.

All record files are line-delimited JSON, one object per line.  Reports are
CSV.  Readers never impute: any malformed, duplicate, out-of-range or
missing record is rejected with the offending line number.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .errors import (
    DuplicateRecord,
    EmptyLog,
    ParseError,
    RaggedLog,
    ValueOutOfRange,
)
from .rewards import REWARD_VALUES, GoldItem, pass_rate_from_rewards
from .trajectory import (
    RewardTrajectory,
    ScoredSample,
    TrainingLog,
    compute_average_curve,
)

HISTOGRAM_BINS = 20
SELECTION_METHODS = ("lim", "linear", "random")


def _iter_records(path) -> Iterator[tuple[int, dict]]:
    """Yield (line number, object) for every non-blank line."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno, path=path) from None
            if not isinstance(obj, dict):
                raise ParseError("record is not an object", line=lineno, path=path)
            yield lineno, obj


def _require(obj, key, kind, lineno, path):
    if key not in obj:
        raise ParseError(f"missing field {key!r}", line=lineno, path=path)
    value = obj[key]
    if kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ParseError(f"field {key!r} has wrong type", line=lineno, path=path)
    return value


def _write_lines(path, objs) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for obj in objs:
            f.write(json.dumps(obj, ensure_ascii=False))
            f.write("\n")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# -- training logs -----------------------------------------------------------


def parse_log_record(obj: Mapping[str, Any], lineno=None, path=None):
    """Validate one log record; return (sample_id, epoch, pass_rate, rollouts)."""
    sid = _require(obj, "sample_id", str, lineno, path)
    epoch = _require(obj, "epoch", int, lineno, path)
    if epoch < 1:
        raise ValueOutOfRange(f"epoch {epoch} < 1", line=lineno, path=path)
    has_rewards = "rewards" in obj
    has_rate = "pass_rate" in obj
    if has_rewards == has_rate:
        raise ParseError("exactly one of 'rewards' / 'pass_rate' is required", line=lineno, path=path)
    if has_rewards:
        rewards = _require(obj, "rewards", list, lineno, path)
        if not rewards:
            raise ValueOutOfRange("empty rewards list", line=lineno, path=path)
        for r in rewards:
            if isinstance(r, bool) or not isinstance(r, (int, float)) or float(r) not in REWARD_VALUES:
                raise ValueOutOfRange(
                    f"reward {r!r} not in {{1, -0.5, -1}}", line=lineno, path=path
                )
        return sid, epoch, pass_rate_from_rewards([float(r) for r in rewards]), len(rewards)
    rate = float(_require(obj, "pass_rate", float, lineno, path))
    if not (0.0 <= rate <= 1.0):
        raise ValueOutOfRange(f"pass_rate {rate} outside [0, 1]", line=lineno, path=path)
    rollouts = _require(obj, "rollouts", int, lineno, path)
    if rollouts < 1:
        raise ValueOutOfRange(f"rollouts {rollouts} < 1", line=lineno, path=path)
    return sid, epoch, rate, rollouts


def ingest_log(path) -> TrainingLog:
    """Assemble a rectangular TrainingLog from a record file.

    Shaped-reward records become pass rates (a rollout passes iff its reward
    is 1).  Every sample must cover epochs 1..K with the same K and the same
    rollout count in every epoch.
    """
    epochs: dict[str, dict[int, float]] = {}
    rollouts: dict[str, int] = {}
    last_line: dict[str, int] = {}
    for lineno, obj in _iter_records(path):
        sid, epoch, rate, g = parse_log_record(obj, lineno, path)
        per = epochs.setdefault(sid, {})
        if epoch in per:
            raise DuplicateRecord(sid, epoch, line=lineno, path=path)
        if rollouts.setdefault(sid, g) != g:
            raise ValueOutOfRange(
                f"sample {sid!r} has {g} rollouts at epoch {epoch}, "
                f"{rollouts[sid]} elsewhere",
                line=lineno,
                path=path,
            )
        per[epoch] = rate
        last_line[sid] = lineno
    if not epochs:
        raise EmptyLog(f"{path}: no records")
    k = max(max(per) for per in epochs.values())
    log = TrainingLog()
    for sid, per in epochs.items():
        if len(per) != k or max(per) != k:
            raise RaggedLog(sid, k, len(per), line=last_line[sid], path=path)
        log.add(RewardTrajectory(sid, tuple(per[e] for e in range(1, k + 1)), rollouts[sid]))
    return log


def write_log(log: TrainingLog, path) -> None:
    """Write one pass-rate record per (sample, epoch), in log order."""
    _write_lines(
        path,
        (
            {"sample_id": t.sample_id, "epoch": e, "pass_rate": r, "rollouts": t.rollouts_per_epoch}
            for t in log
            for e, r in enumerate(t.rewards, start=1)
        ),
    )


def write_reward_log(records, path) -> None:
    """Write shaped-reward records: iterable of (sample_id, epoch, rewards)."""
    _write_lines(
        path,
        ({"sample_id": sid, "epoch": e, "rewards": list(rs)} for sid, e, rs in records),
    )


# -- datasets and completions ------------------------------------------------


def load_dataset(path) -> dict[str, GoldItem]:
    items: dict[str, GoldItem] = {}
    for lineno, obj in _iter_records(path):
        gid = _require(obj, "id", str, lineno, path)
        problem = _require(obj, "problem", str, lineno, path)
        gold = _require(obj, "gold_answer", str, lineno, path)
        level = obj.get("level")
        if level is not None and (isinstance(level, bool) or not isinstance(level, int)):
            raise ParseError("field 'level' has wrong type", line=lineno, path=path)
        if gid in items:
            raise ParseError(f"duplicate dataset id {gid!r}", line=lineno, path=path)
        if not gold.strip():
            raise ValueOutOfRange(f"empty gold answer for {gid!r}", line=lineno, path=path)
        items[gid] = GoldItem(gid, problem, gold, level)
    return items


@dataclass(frozen=True)
class Completion:
    id: str
    epoch: int
    rollout: int
    completion: str
    line: Optional[int] = None


def load_completions(path) -> list[Completion]:
    out = []
    for lineno, obj in _iter_records(path):
        cid = _require(obj, "id", str, lineno, path)
        epoch = _require(obj, "epoch", int, lineno, path)
        rollout = _require(obj, "rollout", int, lineno, path)
        text = _require(obj, "completion", str, lineno, path)
        if epoch < 1:
            raise ValueOutOfRange(f"epoch {epoch} < 1", line=lineno, path=path)
        if rollout < 0:
            raise ValueOutOfRange(f"rollout {rollout} < 0", line=lineno, path=path)
        out.append(Completion(cid, epoch, rollout, text, lineno))
    return out


# -- scores ------------------------------------------------------------------


def _score_float(x: float) -> float:
    return float(f"{x:.12g}")


def write_scores(scores: Sequence[ScoredSample], path) -> None:
    """One record per sample in the given order; scores kept to 12 significant digits."""
    _write_lines(
        path,
        (
            {
                "sample_id": s.sample_id,
                "lim_score": _score_float(s.lim_score),
                "linear_score": _score_float(s.linear_score),
                "selected": bool(s.selected),
            }
            for s in scores
        ),
    )


def read_scores(path) -> list[ScoredSample]:
    out = []
    seen = set()
    for lineno, obj in _iter_records(path):
        sid = _require(obj, "sample_id", str, lineno, path)
        lim = float(_require(obj, "lim_score", float, lineno, path))
        lin = float(_require(obj, "linear_score", float, lineno, path))
        sel = obj.get("selected", False)
        if not isinstance(sel, bool):
            raise ParseError("field 'selected' has wrong type", line=lineno, path=path)
        if sid in seen:
            raise ParseError(f"duplicate score for {sid!r}", line=lineno, path=path)
        if not (math.isfinite(lim) and lim <= 1.0 + 1e-9):
            raise ValueOutOfRange(f"lim_score {lim} above 1", line=lineno, path=path)
        if not (0.0 <= lin <= 1.0):
            raise ValueOutOfRange(f"linear_score {lin} outside [0, 1]", line=lineno, path=path)
        seen.add(sid)
        out.append(ScoredSample(sid, lim, lin, sel))
    return out


# -- selection manifests -----------------------------------------------------


@dataclass
class SelectionManifest:
    method: str
    selected_ids: list[str]
    digest: str
    theta: Optional[float] = None
    count: Optional[int] = None
    seed: Optional[int] = None
    tool_version: str = __version__
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in SELECTION_METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def header(self) -> dict:
        return {
            "method": self.method,
            "theta": self.theta,
            "count": self.count,
            "seed": self.seed,
            "digest": self.digest,
            "tool_version": self.tool_version,
            "n_selected": len(self.selected_ids),
            "config": self.config,
        }


def write_selection(manifest: SelectionManifest, path) -> None:
    """Header record followed by one ``{"sample_id": ...}`` record per selected id."""
    _write_lines(
        path,
        [manifest.header()] + [{"sample_id": sid} for sid in manifest.selected_ids],
    )


def read_selection(path) -> SelectionManifest:
    records = iter(_iter_records(path))
    try:
        lineno, head = next(records)
    except StopIteration:
        raise ParseError("empty manifest", path=path) from None
    method = _require(head, "method", str, lineno, path)
    if method not in SELECTION_METHODS:
        raise ValueOutOfRange(f"unknown method {method!r}", line=lineno, path=path)
    digest = _require(head, "digest", str, lineno, path)
    ids = [_require(obj, "sample_id", str, ln, path) for ln, obj in records]
    if head.get("n_selected", len(ids)) != len(ids):
        raise ParseError(
            f"header says {head['n_selected']} ids, found {len(ids)}", line=lineno, path=path
        )
    return SelectionManifest(
        method=method,
        selected_ids=ids,
        digest=digest,
        theta=head.get("theta"),
        count=head.get("count"),
        seed=head.get("seed"),
        tool_version=head.get("tool_version", ""),
        config=head.get("config") or {},
    )


# -- archetype sidecar -------------------------------------------------------


def write_archetypes(truth: Mapping[str, Any], path) -> None:
    _write_lines(
        path,
        ({"id": sid, "archetype": getattr(kind, "value", kind)} for sid, kind in truth.items()),
    )


def read_archetypes(path) -> dict[str, str]:
    out = {}
    for lineno, obj in _iter_records(path):
        sid = _require(obj, "id", str, lineno, path)
        out[sid] = _require(obj, "archetype", str, lineno, path)
    return out


# -- reports -----------------------------------------------------------------


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def score_histogram(values, bins: int = HISTOGRAM_BINS):
    """Counts over ``bins`` equal bins spanning the observed range.

    When every value is equal the range is widened by 0.5 on each side, so
    all mass lands in the middle bin.
    """
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return counts, edges


def emit_report(
    log: TrainingLog,
    scores: Sequence[ScoredSample],
    out_dir,
    archetypes: Optional[Mapping[str, Any]] = None,
) -> list[Path]:
    """Write the report CSVs into ``out_dir`` and return their paths.

    Files: ``average_curve.csv``, ``lim_histogram.csv``,
    ``linear_histogram.csv`` and, with an archetype map,
    ``archetype_curves.csv``.
    """
    if not scores:
        raise ValueError("no scores to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    avg = compute_average_curve(log)
    paths = [
        _write_csv(
            out_dir / "average_curve.csv",
            ["epoch", "mean_reward"],
            ((k, repr(v)) for k, v in enumerate(avg.values, start=1)),
        )
    ]
    for name, values in (
        ("lim", [s.lim_score for s in scores]),
        ("linear", [s.linear_score for s in scores]),
    ):
        counts, edges = score_histogram(values)
        paths.append(
            _write_csv(
                out_dir / f"{name}_histogram.csv",
                ["bin", "lower", "upper", "count"],
                (
                    (i, repr(float(edges[i])), repr(float(edges[i + 1])), int(c))
                    for i, c in enumerate(counts)
                ),
            )
        )
    if archetypes is not None:
        groups = defaultdict(list)
        for sid in log.sample_ids:
            if sid in archetypes:
                kind = archetypes[sid]
                groups[getattr(kind, "value", kind)].append(sid)
        rows = []
        for kind in sorted(groups):
            m = log.matrix(groups[kind]).mean(axis=0)
            rows.extend(
                (kind, k, repr(float(v)), len(groups[kind])) for k, v in enumerate(m, start=1)
            )
        paths.append(
            _write_csv(
                out_dir / "archetype_curves.csv",
                ["archetype", "epoch", "mean_reward", "n_samples"],
                rows,
            )
        )
    return paths


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
