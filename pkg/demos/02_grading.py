# %% [markdown]
# # Grading completions
#
# Each completion gets one of three verdicts from its final boxed answer.

# %%
from limcurate.rewards import GoldItem, grade, normalize_answer, pass_rate

gold = GoldItem("p1", "What is 1/2 + 1/4?", "\\frac{3}{4}")

for text in [
    "Adding gives \\boxed{3/4}.",
    "So the answer is $\\boxed{\\dfrac{3}{4}}$",
    "I get \\boxed{1/2}",
    "the answer is 3/4",
    "\\boxed{3/4",
]:
    v = grade(text, gold)
    print(f"{v.kind.value:26s} {v.reward:+.1f}  extracted={v.extracted_answer!r}")

# %% Normalization is idempotent
for raw in ["$ 42 $", "\\frac{10}{4}", "X = 5.", "\\tfrac12"]:
    once = normalize_answer(raw)
    print(repr(raw), "->", repr(once), normalize_answer(once) == once)

# %% [markdown]
# A pass rate counts only the correct rollouts.

# %%
verdicts = [grade(t, gold) for t in ["\\boxed{3/4}", "\\boxed{0.75}", "3/4", "\\boxed{3/4}"]]
print(pass_rate(verdicts))
