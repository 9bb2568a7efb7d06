# %% [markdown]
# # End to end from the command line
#
# Simulate a log, score it, select a subset, then write plot-ready CSVs.

# %%
import subprocess
import sys
import tempfile
from pathlib import Path

from limcurate.pipeline import read_csv, read_selection

work = Path(tempfile.mkdtemp())


def run(*args):
    subprocess.run([sys.executable, "-m", "limcurate", "--quiet", *args], check=True)


run("simulate", "--out", str(work / "sim"))
run("score", "--log", str(work / "sim" / "log.jsonl"), "--out", str(work / "scores.jsonl"))
run("select", "--scores", str(work / "scores.jsonl"), "--out", str(work / "lim.jsonl"))
run("select", "--scores", str(work / "scores.jsonl"), "--method", "random", "--out", str(work / "rand.jsonl"))

# %%
lim, rand = read_selection(work / "lim.jsonl"), read_selection(work / "rand.jsonl")
print(lim.method, len(lim.selected_ids), lim.digest[:12])
print(rand.method, len(rand.selected_ids), "overlap", len(set(lim.selected_ids) & set(rand.selected_ids)))

# %%
run(
    "report",
    "--log", str(work / "sim" / "log.jsonl"),
    "--scores", str(work / "scores.jsonl"),
    "--archetypes", str(work / "sim" / "archetypes.jsonl"),
    "--out", str(work / "report"),
)
for row in read_csv(work / "report" / "average_curve.csv"):
    print(row)
print(sorted(p.name for p in (work / "report").iterdir()))
