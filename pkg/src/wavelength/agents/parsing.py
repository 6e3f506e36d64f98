"""Extracting answers from model output and advisory clue checks."""

from __future__ import annotations

import re
from dataclasses import dataclass

_ANSWER_SPAN = re.compile(r"<answer>(.*?)</answer>", re.IGNORECASE | re.DOTALL)
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")
_WORD = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)?", re.UNICODE)

MODIFIER_WORDS = frozenset({"but", "very", "almost", "slightly"})
MAX_CLUE_WORDS = 5


def answer_spans(text: str) -> list:
    """All <answer>...</answer> span contents, case-insensitive, in order."""
    return _ANSWER_SPAN.findall(text or "")


def parse_answer(text: str):
    """Numeric guess from model output, or None when unparseable.

    The last answer span wins (chain-of-thought output may mention earlier
    candidates); the first real number inside it is read and clamped to
    [0, 100]. Returning None is the failure signal; callers decide whether
    enough samples parsed.
    """
    spans = answer_spans(text)
    if not spans:
        return None
    match = _NUMBER.search(spans[-1])
    if match is None:
        return None
    value = float(match.group())
    return min(100.0, max(0.0, value))


def parse_clue(text: str):
    """Clue text from speaker output, or None when unparseable or empty."""
    spans = answer_spans(text)
    if not spans:
        return None
    clue = " ".join(spans[-1].split())
    return clue or None


@dataclass(frozen=True)
class ClueIssue:
    rule: str
    detail: str


@dataclass(frozen=True)
class ClueValidation:
    issues: tuple

    @property
    def ok(self) -> bool:
        return not self.issues

    def rules(self) -> list:
        return [issue.rule for issue in self.issues]


def validate_clue(clue: str, pair) -> ClueValidation:
    """Advisory rule check for a proposed clue on a concept pair.

    Flags clues that are too long, reuse a concept word, contain numbers, or
    use hedging modifiers. Violations are reported, never enforced: the
    game's instructions forbid these, but collected data may still contain
    them and evaluation must not silently drop records.
    """
    issues = []
    words = clue.split()
    if len(words) > MAX_CLUE_WORDS:
        issues.append(ClueIssue(
            "too-many-words",
            f"{len(words)} words, at most {MAX_CLUE_WORDS} allowed",
        ))
    clue_tokens = {w.casefold() for w in _WORD.findall(clue)}
    concept_tokens = {
        w.casefold() for w in _WORD.findall(f"{pair.left} {pair.right}")
    }
    reused = sorted(clue_tokens & concept_tokens)
    if reused:
        issues.append(ClueIssue(
            "reuses-concept-word", f"clue repeats {', '.join(reused)}"
        ))
    if re.search(r"\d", clue):
        issues.append(ClueIssue("contains-number", "clues may not use numeric values"))
    hedges = sorted(clue_tokens & MODIFIER_WORDS)
    if hedges:
        issues.append(ClueIssue(
            "contains-modifier", f"clue uses {', '.join(hedges)}"
        ))
    return ClueValidation(tuple(issues))
