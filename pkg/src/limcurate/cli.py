"""Command line entry point: ``limcurate {score,select,grade,simulate,report}``.

Option values resolve in order: built-in default, then the ``--config``
JSON file (top-level keys apply to every subcommand, a section named after
the subcommand overrides them), then explicit flags.  The effective
configuration is echoed to stdout as one JSON line unless ``--quiet``.

Failures print a single ``ERROR <code> <detail>`` line to stderr and exit
with code 1 (usage), 2 (parse), 3 (degenerate math) or 4 (io).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import defaultdict
from pathlib import Path

from . import __version__
from .errors import DuplicateRecord, LimError, UnknownSample, UsageError
from .pipeline import (
    SelectionManifest,
    emit_report,
    file_digest,
    ingest_log,
    load_completions,
    load_dataset,
    read_archetypes,
    read_scores,
    write_archetypes,
    write_log,
    write_reward_log,
    write_scores,
    write_selection,
)
from .rewards import grade
from .sim import STRATEGIES, SimConfig, run_strategy_comparison, simulate_log
from .trajectory import (
    DEFAULT_LIM_THETA,
    DEFAULT_LINEAR_THETA,
    score_all,
    select_by_threshold,
    select_random,
)

EXIT_USAGE, EXIT_PARSE, EXIT_MATH, EXIT_IO = 1, 2, 3, 4

DEFAULTS = {
    "score": {"log": None, "out": None},
    "select": {"scores": None, "method": "lim", "theta": None, "count": None, "out": None},
    "grade": {"completions": None, "dataset": None, "out": None},
    "simulate": {
        "out": None,
        "n_samples": 300,
        "epochs": 8,
        "rollouts": 8,
        "mix": [1 / 3, 1 / 3, 1 / 3],
        "noise": "bernoulli",
        "drift_scale": 0.05,
        "feedback_gain": 2.0,
        "compare": False,
        "budget": 100,
        "seeds": 20,
    },
    "report": {"log": None, "scores": None, "out": None, "archetypes": None},
}
GLOBAL_DEFAULTS = {"seed": 0, "quiet": False}
REQUIRED = {
    "score": ("log", "out"),
    "select": ("scores", "out"),
    "grade": ("completions", "dataset", "out"),
    "simulate": ("out",),
    "report": ("log", "scores", "out"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _mix(text):
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid mix {text!r}") from None
    return parts


def _global_flags(p, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {"default": None}
    p.add_argument("--config", metavar="PATH", help="JSON config file", **kw)
    p.add_argument("--seed", type=int, help="random seed (default: 0)", **kw)
    p.add_argument(
        "--quiet", action="store_true", help="do not echo the effective config", **kw
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="limcurate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("score", parents=[common], help="LIM and LINEAR scores for a log")
    p.add_argument("--log", help="training log (.jsonl)")
    p.add_argument("--out", help="score file to write (.jsonl)")

    p = sub.add_parser("select", parents=[common], help="select a subset from a score file")
    p.add_argument("--scores", help="score file (.jsonl)")
    p.add_argument(
        "--method", choices=["lim", "linear", "random"], help="selection method (default: lim)"
    )
    p.add_argument(
        "--theta",
        type=float,
        help=f"keep scores strictly above theta (default: {DEFAULT_LIM_THETA} for lim, "
        f"{DEFAULT_LINEAR_THETA} for linear)",
    )
    p.add_argument(
        "--count",
        type=int,
        help="random subset size (default: size of the lim selection at "
        f"theta {DEFAULT_LIM_THETA})",
    )
    p.add_argument("--out", help="selection manifest to write (.jsonl)")

    p = sub.add_parser("grade", parents=[common], help="grade completions into a reward log")
    p.add_argument("--completions", help="completion records (.jsonl)")
    p.add_argument("--dataset", help="dataset with gold answers (.jsonl)")
    p.add_argument("--out", help="shaped-reward training log to write (.jsonl)")

    d = DEFAULTS["simulate"]
    p = sub.add_parser("simulate", parents=[common], help="synthetic log and strategy comparison")
    p.add_argument("--out", help="output directory")
    p.add_argument("--n-samples", type=int, help=f"samples (default: {d['n_samples']})")
    p.add_argument("--epochs", type=int, help=f"epochs (default: {d['epochs']})")
    p.add_argument(
        "--rollouts", type=int, help=f"rollouts per sample and epoch, G (default: {d['rollouts']})"
    )
    p.add_argument(
        "--mix",
        type=_mix,
        help="near_zero,fast_saturating,progressive weights (default: equal thirds)",
    )
    p.add_argument(
        "--noise", choices=["bernoulli", "drift", "none"], help="noise model (default: bernoulli)"
    )
    p.add_argument("--drift-scale", type=float, help=f"drift step sd (default: {d['drift_scale']})")
    p.add_argument(
        "--feedback-gain",
        type=float,
        help=f"progressive rate boost per unit precision (default: {d['feedback_gain']})",
    )
    p.add_argument(
        "--compare", action="store_true", default=None, help="also write comparison.csv"
    )
    p.add_argument("--budget", type=int, help=f"comparison subset size (default: {d['budget']})")
    p.add_argument("--seeds", type=int, help=f"comparison seeds (default: {d['seeds']})")

    p = sub.add_parser("report", parents=[common], help="CSV report for plotting")
    p.add_argument("--log", help="training log (.jsonl)")
    p.add_argument("--scores", help="score file (.jsonl)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--archetypes", help="optional ground-truth sidecar (.jsonl)")
    return parser


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: top level must be an object")
    return cfg


def resolve(args) -> dict:
    """Merge defaults, config file and flags into the effective config."""
    cmd = args.command
    known = set(DEFAULTS[cmd]) | set(GLOBAL_DEFAULTS)
    eff = {**GLOBAL_DEFAULTS, **DEFAULTS[cmd]}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        raw = _load_config(cfg_path)
        anywhere = set(GLOBAL_DEFAULTS).union(*DEFAULTS.values())
        for k, v in raw.items():
            key = k.replace("-", "_")
            if k in DEFAULTS:
                continue
            if key not in anywhere:
                raise UsageError(f"config {cfg_path}: unknown key {k!r}")
            # shared top-level files may carry keys for other subcommands
            if key in known:
                eff[key] = v
        section = raw.get(cmd) or {}
        if not isinstance(section, dict):
            raise UsageError(f"config {cfg_path}: section {cmd!r} must be an object")
        for k, v in section.items():
            key = k.replace("-", "_")
            if key not in known:
                raise UsageError(f"config {cfg_path}: unknown key {k!r} for {cmd}")
            eff[key] = v
    for k, v in vars(args).items():
        if k in known and v is not None:
            eff[k] = v
    for k in REQUIRED[cmd]:
        if eff.get(k) in (None, ""):
            raise UsageError(f"{cmd}: --{k.replace('_', '-')} is required")
    eff["command"] = cmd
    return eff


def cmd_score(eff):
    log = ingest_log(eff["log"])
    scores = score_all(log)
    write_scores(scores, eff["out"])
    return 0


def cmd_select(eff):
    scores = read_scores(eff["scores"])
    method = eff["method"]
    theta = eff["theta"]
    count = eff["count"]
    seed = int(eff["seed"])
    if method == "random":
        if count is None:
            count = len(select_by_threshold(scores, "lim", DEFAULT_LIM_THETA))
        ids = select_random([s.sample_id for s in scores], int(count), seed)
        theta = None
    else:
        if theta is None:
            theta = DEFAULT_LIM_THETA if method == "lim" else DEFAULT_LINEAR_THETA
        ids = select_by_threshold(scores, method, float(theta))
        count = seed = None
    eff = {**eff, "theta": theta, "count": count}
    manifest = SelectionManifest(
        method=method,
        selected_ids=ids,
        digest=file_digest(eff["scores"]),
        theta=theta,
        count=count,
        seed=seed,
        config=_embedded(eff),
    )
    write_selection(manifest, eff["out"])
    return 0


def grade_completions(completions, dataset):
    """Shaped rewards grouped as (sample_id, epoch, rewards ordered by rollout)."""
    groups = defaultdict(dict)
    for c in completions:
        gold = dataset.get(c.id)
        if gold is None:
            raise UnknownSample(c.id, line=c.line)
        per = groups[(c.id, c.epoch)]
        if c.rollout in per:
            raise DuplicateRecord(c.id, c.epoch, line=c.line)
        per[c.rollout] = grade(c.completion, gold).reward
    return [
        (sid, epoch, [per[r] for r in sorted(per)])
        for (sid, epoch), per in sorted(groups.items())
    ]


def cmd_grade(eff):
    dataset = load_dataset(eff["dataset"])
    completions = load_completions(eff["completions"])
    write_reward_log(grade_completions(completions, dataset), eff["out"])
    return 0


def sim_config(eff) -> SimConfig:
    return SimConfig(
        n_samples=int(eff["n_samples"]),
        epochs=int(eff["epochs"]),
        rollouts=int(eff["rollouts"]),
        archetype_mix=tuple(eff["mix"]),
        noise=eff["noise"],
        drift_scale=float(eff["drift_scale"]),
        seed=int(eff["seed"]),
        feedback_gain=float(eff["feedback_gain"]),
    )


def cmd_simulate(eff):
    if len(eff["mix"]) != 3:
        raise UsageError(f"--mix needs three weights, got {len(eff['mix'])}")
    cfg = sim_config(eff)
    out = Path(eff["out"])
    out.mkdir(parents=True, exist_ok=True)
    log, truth = simulate_log(cfg)
    write_log(log, out / "log.jsonl")
    write_archetypes(truth, out / "archetypes.jsonl")
    with open(out / "run_config.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(_embedded(eff), f, sort_keys=True, indent=2)
        f.write("\n")
    if eff["compare"]:
        table = run_strategy_comparison(cfg, int(eff["budget"]), int(eff["seeds"]))
        write_comparison(table, out / "comparison.csv")
    return 0


def write_comparison(table, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seed", "strategy", "yield", "progressive_precision", "above_threshold"])
        for row in table.rows():
            w.writerow(
                [
                    row["seed"],
                    row["strategy"],
                    repr(row["yield"]),
                    repr(row["progressive_precision"]),
                    row["above_threshold"],
                ]
            )
        for name in STRATEGIES:
            r = table.results[name]
            mean_precision = sum(r.precisions) / len(r.precisions)
            w.writerow(["mean", name, repr(r.mean), repr(mean_precision), ""])
            w.writerow(["stderr", name, repr(r.stderr), "", ""])


def cmd_report(eff):
    log = ingest_log(eff["log"])
    scores = read_scores(eff["scores"])
    if not scores:
        raise UsageError(f"{eff['scores']}: no scores to report")
    archetypes = read_archetypes(eff["archetypes"]) if eff.get("archetypes") else None
    emit_report(log, scores, eff["out"], archetypes)
    return 0


COMMANDS = {
    "score": cmd_score,
    "select": cmd_select,
    "grade": cmd_grade,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def _echoable(eff, drop=("quiet", "config")):
    return {k: v for k, v in sorted(eff.items()) if k not in drop}


def _embedded(eff):
    # configs written into outputs omit the output location itself
    return _echoable(eff, drop=("quiet", "config", "out"))


def _fail(code, detail):
    detail = " ".join(str(detail).split())
    print(f"ERROR {code} {detail}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        eff = resolve(args)
        if not eff["quiet"]:
            print(json.dumps(_echoable(eff), sort_keys=True))
        return COMMANDS[args.command](eff)
    except LimError as exc:
        return _fail(exc.exit_code, exc)
    except OSError as exc:
        return _fail(EXIT_IO, f"{exc.strerror or exc}: {exc.filename}")
    except (ValueError, TypeError) as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
