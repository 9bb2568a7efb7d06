"""Rule-based grading of math completions.

A completion is well formatted when it contains a balanced ``\\boxed{...}``
group; the last such group is the answer.  Grading compares normalized
strings only, there is no symbolic equivalence.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyRollouts


class VerdictKind(enum.Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect_well_formatted"
    FORMAT_ERROR = "format_error"


REWARDS = {
    VerdictKind.CORRECT: 1.0,
    VerdictKind.INCORRECT: -0.5,
    VerdictKind.FORMAT_ERROR: -1.0,
}
REWARD_VALUES = frozenset(REWARDS.values())


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    extracted_answer: Optional[str] = None

    def __post_init__(self):
        if (self.kind is VerdictKind.FORMAT_ERROR) != (self.extracted_answer is None):
            raise ValueError("a format error carries no answer and only a format error")

    @property
    def reward(self) -> float:
        return REWARDS[self.kind]

    @property
    def correct(self) -> bool:
        return self.kind is VerdictKind.CORRECT


@dataclass(frozen=True)
class GoldItem:
    id: str
    problem: str
    gold_answer: str
    level: Optional[int] = None

    def __post_init__(self):
        if not self.gold_answer or not self.gold_answer.strip():
            raise ValueError(f"gold item {self.id!r} has an empty answer")


_BOXED = re.compile(r"\\boxed\s*\{")


def extract_answer(completion: str) -> Optional[str]:
    """Content of the last ``\\boxed{...}`` group.

    Returns None when there is no boxed group, when the last one never
    closes, or when it is empty.
    """
    if not completion:
        return None
    starts = [m.end() for m in _BOXED.finditer(completion)]
    if not starts:
        return None
    pos = starts[-1]
    depth = 1
    for i in range(pos, len(completion)):
        ch = completion[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                content = completion[pos:i].strip()
                return content or None
    return None


_WS = re.compile(r"\s+")
_FRAC_BRACED = re.compile(r"^(-?)\\[dt]?frac\{\s*(-?\d+)\s*\}\{\s*(-?\d+)\s*\}$")
_FRAC_SHORT = re.compile(r"^(-?)\\[dt]?frac(\d)(\d)$")
_FRAC_SLASH = re.compile(r"^(-?\d+)\s*/\s*(-?\d+)$")
_LETTER = re.compile(r"[A-Za-z]")


def _fraction(sign: str, num: str, den: str) -> str:
    if sign and num.startswith("-"):
        num = num[1:]
    elif sign:
        num = "-" + num
    return f"{num}/{den}"


def _normalize_once(s: str) -> str:
    s = s.replace("$", "")
    s = _WS.sub(" ", s).strip()
    s = s.rstrip(". ").strip()
    m = _FRAC_BRACED.match(s) or _FRAC_SHORT.match(s)
    if m:
        s = _fraction(*m.groups())
    else:
        m = _FRAC_SLASH.match(s)
        if m:
            s = f"{m.group(1)}/{m.group(2)}"
    if "\\" not in s and _LETTER.search(s):
        s = s.lower()
    return s


def normalize_answer(raw: str) -> str:
    """Canonical string form of an answer.

    Strips whitespace, trailing periods and ``$`` delimiters, writes simple
    integer fractions (``a/b``, ``\\frac{a}{b}``, ``\\dfrac``, ``\\frac12``)
    as ``a/b`` and lowercases plain-text answers.  Answers containing LaTeX
    commands keep their case.  Anything else passes through unchanged.
    """
    s = raw
    for _ in range(8):
        nxt = _normalize_once(s)
        if nxt == s:
            break
        s = nxt
    return s


def grade(completion: str, gold: GoldItem) -> Verdict:
    extracted = extract_answer(completion)
    if extracted is None:
        return Verdict(VerdictKind.FORMAT_ERROR)
    answer = normalize_answer(extracted)
    if answer == normalize_answer(gold.gold_answer):
        return Verdict(VerdictKind.CORRECT, answer)
    return Verdict(VerdictKind.INCORRECT, answer)


def pass_rate(verdicts: Sequence[Verdict]) -> float:
    if not verdicts:
        raise EmptyRollouts("pass rate of zero rollouts")
    return sum(v.correct for v in verdicts) / len(verdicts)


def pass_rate_from_rewards(rewards: Sequence[float]) -> float:
    """Pass rate of shaped rewards: a rollout counts as passed iff its reward is 1."""
    if not rewards:
        raise EmptyRollouts("pass rate of zero rollouts")
    return sum(1 for r in rewards if r == REWARDS[VerdictKind.CORRECT]) / len(rewards)
