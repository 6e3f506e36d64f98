"""Pragmatic inference over a bounded discrete scale.

The game is played on a 0-100 scale sampled at fixed positions (the state
grid). A literal listener maps each utterance to a distribution over grid
positions; the pragmatic speaker soft-maximizes the log-probability that the
listener recovers the intended position; the pragmatic listener inverts the
speaker with Bayes' rule. A second listener variant reweights the literal
listener by a generation-based speaker score instead of running the full
recursion, and the inverse direction scores candidate utterances for a known
target. All operations are pure functions over immutable inputs.

Conventions: literal/pragmatic listener matrices are (n_states, n_utterances)
with stochastic columns; speaker matrices have stochastic rows. Probabilities
must sum to 1 within 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllZeroWeights,
    DimensionMismatch,
    InvalidUtterancePool,
    ZeroColumn,
)

SCALE_MIN = 0.0
SCALE_MAX = 100.0
GRID_STEP = 5.0
SUM_TOL = 1e-9

# Provenance tags for utterance-set entries.
ACTUAL_CLUE = "actual-clue"
GENERATED_ALTERNATIVE = "generated-alternative"
SPEAKER_CANDIDATE = "speaker-candidate"
_PROVENANCE_TAGS = frozenset({ACTUAL_CLUE, GENERATED_ALTERNATIVE, SPEAKER_CANDIDATE})


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def canonical_clue(text: str) -> str:
    """Whitespace-collapsed, case-folded form used for deduplication."""
    return " ".join(text.split()).casefold()


@dataclass(frozen=True, eq=False)
class StateGrid:
    """Strictly increasing candidate positions within [0, 100]."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        v = self.values
        if v.ndim != 1 or v.size == 0:
            raise ValueError("state grid must be a non-empty 1-d sequence")
        if np.any(np.diff(v) <= 0):
            raise ValueError("state grid values must be strictly increasing")
        if v[0] < SCALE_MIN - SUM_TOL or v[-1] > SCALE_MAX + SUM_TOL:
            raise ValueError("state grid values must lie within [0, 100]")

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self):
        return iter(float(x) for x in self.values)

    def index_of(self, value: float) -> int:
        hits = np.nonzero(np.abs(self.values - value) < 1e-9)[0]
        if hits.size == 0:
            raise ValueError(f"value {value!r} is not on the state grid")
        return int(hits[0])

    def contains(self, value: float) -> bool:
        return bool(np.any(np.abs(self.values - value) < 1e-9))

    def snap(self, value: float) -> float:
        """Nearest grid position; ties resolve to the lower position."""
        return float(self.values[int(np.argmin(np.abs(self.values - value)))])


DEFAULT_GRID = StateGrid(np.arange(SCALE_MIN, SCALE_MAX + GRID_STEP, GRID_STEP))


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability mass over an explicit real-valued support."""

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = self.support
        if isinstance(support, StateGrid):
            support = support.values
        object.__setattr__(self, "support", _frozen_array(support))
        probs = np.array(self.probs, dtype=float)
        if probs.shape != self.support.shape:
            raise DimensionMismatch(
                f"support has {self.support.size} entries, probs has {probs.size}"
            )
        if probs.size == 0:
            raise ValueError("distribution needs a non-empty support")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be non-negative")
        np.clip(probs, 0.0, None, out=probs)
        total = probs.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {SUM_TOL}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return int(self.support.size)

    @classmethod
    def uniform(cls, support) -> "Distribution":
        values = support.values if isinstance(support, StateGrid) else np.asarray(support, float)
        n = values.size
        return cls(values, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, support, value: float) -> "Distribution":
        values = support.values if isinstance(support, StateGrid) else np.asarray(support, float)
        probs = np.zeros(values.size)
        hits = np.nonzero(np.abs(values - value) < 1e-9)[0]
        if hits.size == 0:
            raise ValueError(f"value {value!r} is not in the support")
        probs[hits[0]] = 1.0
        return cls(values, probs)


def normalize(weights, support, epsilon: float = 0.0) -> Distribution:
    """Scale non-negative weights into a Distribution.

    epsilon > 0 is added to every weight before normalizing, so an all-zero
    vector smooths to uniform; with epsilon == 0 an all-zero vector raises
    AllZeroWeights.
    """
    w = np.array(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if epsilon > 0:
        w = w + epsilon
    total = w.sum()
    if total <= 0:
        raise AllZeroWeights("every weight is zero and smoothing is disabled")
    return Distribution(support, w / total)


def mean_value(dist: Distribution) -> float:
    """Expected scale position under `dist`."""
    return float(np.dot(dist.probs, dist.support))


def entropy(dist: Distribution) -> float:
    """Shannon entropy in nats, with 0·ln 0 = 0."""
    p = dist.probs[dist.probs > 0]
    return float(-np.sum(p * np.log(p)))


@dataclass(frozen=True)
class UtteranceSet:
    """Ordered utterances with per-entry provenance.

    Entries are unique after whitespace collapsing and case folding; the
    original display text of the first occurrence is kept for prompting.
    """

    texts: tuple
    provenance: tuple

    def __post_init__(self):
        texts = tuple(self.texts)
        prov = tuple(self.provenance)
        object.__setattr__(self, "texts", texts)
        object.__setattr__(self, "provenance", prov)
        if len(texts) != len(prov):
            raise DimensionMismatch("texts and provenance lengths differ")
        if len(texts) == 0:
            raise InvalidUtterancePool("utterance set must be non-empty")
        seen = set()
        for text, tag in zip(texts, prov):
            if not isinstance(text, str) or not text.strip():
                raise ValueError("utterances must be non-empty strings")
            if tag not in _PROVENANCE_TAGS:
                raise ValueError(f"unknown provenance tag {tag!r}")
            key = canonical_clue(text)
            if key in seen:
                raise ValueError(f"duplicate utterance after normalization: {text!r}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.texts)

    def __iter__(self):
        return iter(self.texts)

    @classmethod
    def build(cls, entries: Iterable) -> "UtteranceSet":
        """Deduplicating constructor; the first occurrence of a key wins."""
        texts, prov, seen = [], [], set()
        for text, tag in entries:
            key = canonical_clue(text)
            if key in seen:
                continue
            seen.add(key)
            texts.append(text)
            prov.append(tag)
        return cls(tuple(texts), tuple(prov))

    def index_of(self, text: str) -> int:
        key = canonical_clue(text)
        for i, existing in enumerate(self.texts):
            if canonical_clue(existing) == key:
                return i
        raise ValueError(f"utterance {text!r} not in set")

    def with_actual(self, clue: str) -> "UtteranceSet":
        """Return a copy where `clue` is present exactly once as the actual clue.

        If an alternative collides with the clue after normalization it is
        re-tagged (and its display text replaced by the actual clue's);
        otherwise the clue is appended at the end.
        """
        key = canonical_clue(clue)
        texts, prov = list(self.texts), list(self.provenance)
        for i, tag in enumerate(prov):
            if tag == ACTUAL_CLUE and canonical_clue(texts[i]) != key:
                raise InvalidUtterancePool(
                    f"set already contains a different actual clue: {texts[i]!r}"
                )
        placed = False
        for i, text in enumerate(texts):
            if canonical_clue(text) == key:
                texts[i] = clue
                prov[i] = ACTUAL_CLUE
                placed = True
        if not placed:
            texts.append(clue)
            prov.append(ACTUAL_CLUE)
        return UtteranceSet(tuple(texts), tuple(prov))

    @property
    def actual_index(self) -> int:
        hits = [i for i, tag in enumerate(self.provenance) if tag == ACTUAL_CLUE]
        if len(hits) != 1:
            raise InvalidUtterancePool(
                f"expected exactly one actual clue, found {len(hits)}"
            )
        return hits[0]


def _check_alignment(states_a, states_b, utts_a, utts_b):
    if len(utts_a) != len(utts_b) or any(
        canonical_clue(x) != canonical_clue(y) for x, y in zip(utts_a, utts_b)
    ):
        raise DimensionMismatch("utterance sets differ")
    if len(states_a) != len(states_b) or np.any(
        np.abs(states_a.values - states_b.values) > 1e-9
    ):
        raise DimensionMismatch("state grids differ")


@dataclass(frozen=True, eq=False)
class LiteralMatrix:
    """Listener matrix: column u is a distribution over states given utterance u."""

    states: StateGrid
    utterances: UtteranceSet
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        expected = (len(self.states), len(self.utterances))
        if m.shape != expected:
            raise DimensionMismatch(f"matrix shape {m.shape}, expected {expected}")
        if np.any(m < -1e-12):
            raise ValueError("matrix entries must be non-negative")
        np.clip(m, 0.0, None, out=m)
        sums = m.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise ValueError("listener matrix columns must each sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_columns(cls, states: StateGrid, utterances: UtteranceSet,
                     columns: Sequence[Distribution]) -> "LiteralMatrix":
        if len(columns) != len(utterances):
            raise DimensionMismatch("one column per utterance required")
        for col in columns:
            if col.support.size != len(states) or np.any(
                np.abs(col.support - states.values) > 1e-9
            ):
                raise DimensionMismatch("column support does not match the state grid")
        return cls(states, utterances, np.stack([c.probs for c in columns], axis=1))

    def column(self, u: int) -> Distribution:
        return Distribution(self.states.values, self.matrix[:, u])

    def smoothed(self, epsilon: float) -> "LiteralMatrix":
        """Add epsilon to every entry and renormalize each column."""
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if epsilon == 0:
            return self
        m = self.matrix + epsilon
        return LiteralMatrix(self.states, self.utterances, m / m.sum(axis=0))


@dataclass(frozen=True, eq=False)
class SpeakerMatrix:
    """Speaker matrix: row s is a distribution over utterances given state s."""

    states: StateGrid
    utterances: UtteranceSet
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        expected = (len(self.states), len(self.utterances))
        if m.shape != expected:
            raise DimensionMismatch(f"matrix shape {m.shape}, expected {expected}")
        if np.any(m < -1e-12):
            raise ValueError("matrix entries must be non-negative")
        np.clip(m, 0.0, None, out=m)
        sums = m.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise ValueError("speaker matrix rows must each sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_scores(cls, states: StateGrid, utterances: UtteranceSet, scores,
                    epsilon: float = 0.0) -> "SpeakerMatrix":
        """Row-normalize raw non-negative generation scores into a speaker."""
        raw = np.array(scores, dtype=float)
        expected = (len(states), len(utterances))
        if raw.shape != expected:
            raise DimensionMismatch(f"scores shape {raw.shape}, expected {expected}")
        if np.any(raw < 0):
            raise ValueError("scores must be non-negative")
        if epsilon > 0:
            raw = raw + epsilon
        totals = raw.sum(axis=1, keepdims=True)
        if np.any(totals <= 0):
            state = float(states.values[int(np.argmax(totals.ravel() <= 0))])
            raise AllZeroWeights(f"no utterance has positive score at state {state}")
        return cls(states, utterances, raw / totals)

    def row(self, s: int) -> np.ndarray:
        return self.matrix[s, :]


@dataclass(frozen=True, eq=False)
class UtteranceDistribution:
    """Probability mass over an utterance set."""

    utterances: UtteranceSet
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (len(self.utterances),):
            raise DimensionMismatch("one probability per utterance required")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be non-negative")
        np.clip(probs, 0.0, None, out=probs)
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError("probabilities must sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def argmax(self) -> int:
        """Index of the highest-probability utterance; ties take the lowest index."""
        return int(np.argmax(self.probs))

    def argmax_text(self) -> str:
        return self.utterances.texts[self.argmax()]


@dataclass(frozen=True)
class RsaConfig:
    """Knobs for the pragmatic recursion.

    alpha is the speaker rationality (0 = indifferent, higher = sharper).
    prior is the listener's prior over states; None means uniform.
    epsilon is the literal-matrix smoothing constant; 0 disables smoothing.
    """

    alpha: float = 1.0
    prior: Distribution | None = None
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    def prior_over(self, states: StateGrid) -> np.ndarray:
        if self.prior is None:
            n = len(states)
            return np.full(n, 1.0 / n)
        if self.prior.support.size != len(states) or np.any(
            np.abs(self.prior.support - states.values) > 1e-9
        ):
            raise DimensionMismatch("prior support does not match the state grid")
        return np.asarray(self.prior.probs, dtype=float)


def pragmatic_speaker(literal: LiteralMatrix, config: RsaConfig = RsaConfig()) -> SpeakerMatrix:
    """Soft-max speaker: S(u|s) ∝ L(s|u)^alpha, rows normalized over utterances.

    Computed in log space with a per-row max shift so large alphas stay
    stable. Smoothing from the config is applied to the literal matrix first.
    """
    base = literal.smoothed(config.epsilon)
    n_states, n_utts = base.matrix.shape
    if config.alpha == 0:
        rows = np.full((n_states, n_utts), 1.0 / n_utts)
        return SpeakerMatrix(base.states, base.utterances, rows)
    logs = np.full(base.matrix.shape, -np.inf)
    np.log(base.matrix, out=logs, where=base.matrix > 0)
    scaled = config.alpha * logs
    best = scaled.max(axis=1)
    if np.any(np.isneginf(best)):
        state = float(base.states.values[int(np.argmax(np.isneginf(best)))])
        raise AllZeroWeights(
            f"state {state} has zero literal mass under every utterance"
        )
    shifted = np.exp(scaled - best[:, None])
    return SpeakerMatrix(base.states, base.utterances,
                         shifted / shifted.sum(axis=1, keepdims=True))


def pragmatic_listener(speaker: SpeakerMatrix, config: RsaConfig = RsaConfig()) -> LiteralMatrix:
    """Bayes-invert a speaker: L(s|u) ∝ S(u|s)·prior(s), columns normalized."""
    prior = config.prior_over(speaker.states)
    scores = speaker.matrix * prior[:, None]
    totals = scores.sum(axis=0)
    if np.any(totals <= 0):
        u = int(np.argmax(totals <= 0))
        raise ZeroColumn(
            f"utterance {speaker.utterances.texts[u]!r} has zero posterior mass"
        )
    return LiteralMatrix(speaker.states, speaker.utterances, scores / totals)


def inverse_speaker(s0_weights, literal: LiteralMatrix, target: float,
                    epsilon: float = 0.0) -> UtteranceDistribution:
    """Score candidate utterances for a known target state.

    P(u) ∝ s0_weights[u] · L(target|u): generation propensity reweighted by how
    well the literal listener recovers the target from u.
    """
    w = np.asarray(s0_weights, dtype=float)
    if w.shape != (len(literal.utterances),):
        raise DimensionMismatch(
            f"{w.size} weights for {len(literal.utterances)} utterances"
        )
    if np.any(w < 0):
        raise ValueError("speaker weights must be non-negative")
    row = literal.matrix[literal.states.index_of(target), :]
    scores = w * row
    if epsilon > 0:
        scores = scores + epsilon
    total = scores.sum()
    if total <= 0:
        raise AllZeroWeights(
            "no candidate has positive mass at the target and smoothing is disabled"
        )
    return UtteranceDistribution(literal.utterances, scores / total)


def alt_pragmatic_listener(literal: LiteralMatrix, speaker: SpeakerMatrix,
                           utterance_index: int) -> Distribution:
    """Listener that reweights literal interpretation by speaker propensity.

    L(s|u) ∝ L0(s|u)·S(u|s), normalized over states for the given utterance.
    Unlike the Bayes inversion this never normalizes over the utterance set,
    so it tolerates generation scores on incomparable scales.
    """
    _check_alignment(literal.states, speaker.states, literal.utterances, speaker.utterances)
    if not 0 <= utterance_index < len(literal.utterances):
        raise DimensionMismatch(f"utterance index {utterance_index} out of range")
    scores = literal.matrix[:, utterance_index] * speaker.matrix[:, utterance_index]
    total = scores.sum()
    if total <= 0:
        text = literal.utterances.texts[utterance_index]
        raise ZeroColumn(f"utterance {text!r} has zero mass under every state")
    return Distribution(literal.states.values, scores / total)
