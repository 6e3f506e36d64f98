"""Deterministic mock agents for offline evaluation and tests.

A TabularLexicon maps clue texts to response curves over the grid. The mock
listener reads the curve for the clue (unknown clues fall back to a flat
curve so generated alternatives never crash a run); the mock speaker ranks
lexicon entries by how close their curve peak sits to the target. All
randomness comes from seeds derived from (lexicon noise seed, agent seed,
role, problem, inputs), so identical configurations replay identically,
across threads and processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from ..hashing import derive_seed, digest_of
from ..rsa import DEFAULT_GRID, Distribution, canonical_clue, normalize
from .base import dedupe_candidates
from .config import AgentConfig

# Generation propensity for utterances absent from the lexicon: flat across
# states and small enough not to crowd out scripted entries.
UNKNOWN_UTTERANCE_SCORE = 1e-3


@dataclass(frozen=True)
class GaussianCurve:
    """Bell response centered on mu with width sigma."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def weights(self, grid) -> np.ndarray:
        z = (grid.values - self.mu) / self.sigma
        return np.exp(-0.5 * z * z)

    def spec(self) -> dict:
        return {"kind": "gaussian", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class IntervalCurve:
    """Uniform response inside [lo, hi], zero outside."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo must not exceed hi")

    def weights(self, grid) -> np.ndarray:
        v = grid.values
        return ((v >= self.lo - 1e-9) & (v <= self.hi + 1e-9)).astype(float)

    def spec(self) -> dict:
        return {"kind": "interval", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ExplicitCurve:
    """One non-negative weight per grid position."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise ValueError("curve weights must be non-negative")

    def weights(self, grid) -> np.ndarray:
        if len(self.values) != len(grid):
            raise ValueError(
                f"curve has {len(self.values)} weights for a {len(grid)}-point grid"
            )
        return np.array(self.values, dtype=float)

    def spec(self) -> dict:
        return {"kind": "explicit", "values": list(self.values)}


def curve_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "gaussian":
        return GaussianCurve(float(spec["mu"]), float(spec["sigma"]))
    if kind == "interval":
        return IntervalCurve(float(spec["lo"]), float(spec["hi"]))
    if kind == "explicit":
        return ExplicitCurve(tuple(spec["values"]))
    raise ValueError(f"unknown curve kind {kind!r}")


class TabularLexicon:
    """Ordered clue-to-curve table with a noise seed for sampling paths."""

    def __init__(self, entries: dict, noise_seed: int = 0):
        if not entries:
            raise ValueError("lexicon must have at least one entry")
        self.entries = dict(entries)
        self.noise_seed = int(noise_seed)
        self._by_key = {}
        for text in self.entries:
            key = canonical_clue(text)
            if key in self._by_key:
                raise ValueError(f"duplicate lexicon entry after normalization: {text!r}")
            self._by_key[key] = text

    @property
    def texts(self) -> list:
        return list(self.entries)

    def curve_for(self, clue: str):
        text = self._by_key.get(canonical_clue(clue))
        return self.entries[text] if text is not None else None

    def peak(self, clue: str, grid=DEFAULT_GRID) -> float:
        curve = self.curve_for(clue)
        if curve is None:
            raise KeyError(f"clue {clue!r} not in lexicon")
        return float(grid.values[int(np.argmax(curve.weights(grid)))])

    def to_dict(self) -> dict:
        return {
            "noise_seed": self.noise_seed,
            "entries": {text: curve.spec() for text, curve in self.entries.items()},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TabularLexicon":
        entries = {
            text: curve_from_spec(spec)
            for text, spec in (raw.get("entries") or {}).items()
        }
        return cls(entries, noise_seed=int(raw.get("noise_seed", 0)))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False, allow_unicode=True)

    @classmethod
    def load(cls, path) -> "TabularLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def digest(self) -> str:
        return digest_of(self.to_dict())


class MockAgent:
    """Listener/speaker over a TabularLexicon; same surface as LmAgent."""

    def __init__(self, lexicon: TabularLexicon, config: AgentConfig = AgentConfig(),
                 grid=DEFAULT_GRID, speaker_spread: float = 5.0):
        if speaker_spread <= 0:
            raise ValueError("speaker_spread must be positive")
        self.lexicon = lexicon
        self.config = config
        self.grid = grid
        self.speaker_spread = float(speaker_spread)

    def fingerprint(self) -> dict:
        return {
            "kind": "mock",
            "lexicon": self.lexicon.digest(),
            "noise_seed": self.lexicon.noise_seed,
            "speaker_spread": self.speaker_spread,
            **self.config.as_dict(),
        }

    def with_config(self, **overrides) -> "MockAgent":
        if not overrides:
            return self
        return MockAgent(self.lexicon, self.config.replaced(**overrides),
                         grid=self.grid, speaker_spread=self.speaker_spread)

    def literal(self) -> "MockAgent":
        # Curves do not change with prompting mode, so the agent is its own
        # literal listener.
        return self

    def _clue_weights(self, clue: str) -> np.ndarray:
        curve = self.lexicon.curve_for(clue)
        if curve is None:
            return np.ones(len(self.grid))
        w = curve.weights(self.grid)
        if w.sum() <= 0:
            return np.ones(len(self.grid))
        return w

    def listener_distribution(self, problem, clue: str) -> Distribution:
        weights = self._clue_weights(clue)
        if self.config.estimator == "logprob-scoring":
            return normalize(weights, self.grid, epsilon=self.config.smoothing)
        seed = derive_seed(self.lexicon.noise_seed, self.config.seed, "listener",
                           problem.problem_id, canonical_clue(clue))
        rng = np.random.default_rng(seed)
        draws = rng.choice(len(self.grid), size=self.config.n_samples,
                           p=weights / weights.sum())
        counts = np.bincount(draws, minlength=len(self.grid)).astype(float)
        return normalize(counts, self.grid, epsilon=self.config.smoothing)

    # -- speaker ----------------------------------------------------------

    def _peaks(self) -> list:
        return [(text, self.lexicon.peak(text, self.grid)) for text in self.lexicon.texts]

    def generate_alternatives(self, problem, per_state: int = 1) -> list:
        """Nearest-peak lexicon entries, per_state per grid position."""
        if per_state < 1:
            raise ValueError("per_state must be at least 1")
        peaks = self._peaks()
        seen = set()
        out = []
        for state in self.grid:
            ranked = sorted(peaks, key=lambda item: abs(item[1] - state))
            for text, _ in ranked[:per_state]:
                key = canonical_clue(text)
                if key not in seen:
                    seen.add(key)
                    out.append(text)
        return out

    def _speaker_weights(self, target: float) -> np.ndarray:
        peaks = np.array([peak for _, peak in self._peaks()])
        z = (peaks - target) / self.speaker_spread
        return np.exp(-0.5 * z * z)

    def speaker_samples(self, problem, target: float, n: int) -> list:
        weights = self._speaker_weights(target)
        if weights.sum() <= 0:
            weights = np.ones_like(weights)
        seed = derive_seed(self.lexicon.noise_seed, self.config.seed, "speaker",
                           problem.problem_id, float(target))
        rng = np.random.default_rng(seed)
        texts = self.lexicon.texts
        draws = rng.choice(len(texts), size=n, p=weights / weights.sum())
        return [texts[i] for i in draws]

    def speaker_candidates(self, problem, target: float, n: int) -> list:
        return dedupe_candidates(self.speaker_samples(problem, target, n))

    def speaker_score(self, problem, state: float, utterance: str) -> float:
        curve = self.lexicon.curve_for(utterance)
        if curve is None:
            return UNKNOWN_UTTERANCE_SCORE
        peak = self.lexicon.peak(utterance, self.grid)
        z = (peak - state) / self.speaker_spread
        return math.exp(-0.5 * z * z)


class ScriptedSpeaker(MockAgent):
    """MockAgent whose speaker side replays fixed weighted candidates.

    scripts maps problem_id to [(clue, weight), ...]. Sampling expands the
    weights into a deterministic count profile over n draws, so downstream
    frequency estimates recover the scripted weights exactly.
    """

    def __init__(self, lexicon, scripts: dict, config: AgentConfig = AgentConfig(),
                 grid=DEFAULT_GRID, speaker_spread: float = 5.0):
        super().__init__(lexicon, config, grid=grid, speaker_spread=speaker_spread)
        self.scripts = dict(scripts)

    def with_config(self, **overrides) -> "ScriptedSpeaker":
        if not overrides:
            return self
        return ScriptedSpeaker(self.lexicon, self.scripts,
                               self.config.replaced(**overrides),
                               grid=self.grid, speaker_spread=self.speaker_spread)

    def speaker_samples(self, problem, target: float, n: int) -> list:
        script = self.scripts.get(problem.problem_id)
        if script is None:
            return super().speaker_samples(problem, target, n)
        total = sum(weight for _, weight in script)
        if total <= 0:
            raise ValueError(f"script for {problem.problem_id} has no positive weight")
        # Largest-remainder apportionment of n samples over the script.
        shares = [(clue, n * weight / total) for clue, weight in script]
        counts = {clue: int(share) for clue, share in shares}
        leftover = n - sum(counts.values())
        by_remainder = sorted(shares, key=lambda item: item[1] - int(item[1]), reverse=True)
        for clue, _ in by_remainder[:leftover]:
            counts[clue] += 1
        samples = []
        for clue, _ in script:
            samples.extend([clue] * counts[clue])
        return samples


def gaussian_comprehension_suite(problems, sigma: float = 5.0, noise_seed: int = 0,
                                 grid=DEFAULT_GRID):
    """A lexicon with one bell-shaped clue per problem, centered on its target.

    Returns (lexicon, clue_by_problem_id). A listener that reads the curves
    predicts each target up to grid discretization, which pins down what the
    comprehension pipeline should report.
    """
    entries = {}
    clue_by_problem = {}
    for p in problems:
        clue = f"signal {p.problem_id}"
        entries[clue] = GaussianCurve(mu=p.target, sigma=sigma)
        clue_by_problem[p.problem_id] = clue
    return TabularLexicon(entries, noise_seed=noise_seed), clue_by_problem


def misleading_production_suite(problems, lure_offset: float = 30.0,
                                lure_weight: float = 0.7, sigma: float = 5.0,
                                noise_seed: int = 0, grid=DEFAULT_GRID):
    """A speaker whose most frequent proposal points away from the target.

    Each problem gets a 'lure' clue peaked lure_offset away from the target
    (carrying lure_weight of the samples) and an on-target clue with the
    rest. Frequency-based selection picks the lure; reweighting by how well
    a literal listener recovers the target picks the on-target clue. Returns
    (lexicon, scripts) for a ScriptedSpeaker.
    """
    if not 0.5 < lure_weight < 1.0:
        raise ValueError("lure_weight must sit in (0.5, 1.0) for the lure to win on frequency")
    entries = {}
    scripts = {}
    for p in problems:
        shift = lure_offset if p.target <= 50 else -lure_offset
        lure_mu = grid.snap(p.target + shift)
        lure = f"lure {p.problem_id}"
        hit = f"hit {p.problem_id}"
        entries[lure] = GaussianCurve(mu=lure_mu, sigma=sigma)
        entries[hit] = GaussianCurve(mu=p.target, sigma=sigma)
        scripts[p.problem_id] = [(lure, lure_weight), (hit, 1.0 - lure_weight)]
    return TabularLexicon(entries, noise_seed=noise_seed), scripts
