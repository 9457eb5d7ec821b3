"""Finite-statistics experiments: M random setting tuples with K shots each.

Shots are drawn as the +/-1 product outcome directly: the number of +1 results
at a setting with correlation E is Binomial(K, (1 + E) / 2).  Setting tuples
and shot counts come from separate counter-keyed streams, so results depend
only on (config, seed) and never on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Union

import numpy as np

from . import _rng
from .correlations import correlation_tensor, correlation_values, sphere_settings_block
from .errors import DomainError, ValidationError
from .states import State, make_ghz, state_from_dict
from .witness import INFINITE, TWO_SIGMA, ConfidenceLevel, witness_decide

SCHEMA = 1
_MAX_TOTAL_SHOTS = 2**62


def _parse_K(K: Any) -> float:
    if isinstance(K, str):
        if K.strip().lower() in ("inf", "infinite", "infinity"):
            return INFINITE
        try:
            K = int(K)
        except ValueError as exc:
            raise ValidationError(f"K must be an integer or 'inf', got {K!r}") from exc
    if K == INFINITE:
        return INFINITE
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise ValidationError(f"K must be an integer >= 1 or 'inf', got {K!r}")
    return int(K)


def simulate_shots(E: float, K: int, rng: np.random.Generator) -> float:
    """Mean of K +/-1 outcomes with P(+1) = (1 + E) / 2."""
    if abs(E) > 1 + 1e-9:
        raise DomainError(f"|E| must be <= 1, got {E!r}")
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    p = (1.0 + min(max(E, -1.0), 1.0)) / 2.0
    plus = int(rng.binomial(int(K), p))
    return (2 * plus - K) / K


def _shot_sums(E: np.ndarray, K: int, seed: int, block: int) -> np.ndarray:
    """Sum of K +/-1 shots for each setting in one block (prefix-stable)."""
    rng = _rng.stream(seed, _rng.SHOTS, block)
    p = (1.0 + np.clip(E, -1.0, 1.0)) / 2.0
    return 2 * rng.binomial(K, p).astype(np.int64) - K


@dataclass(frozen=True)
class ExperimentConfig:
    """M settings, K shots per setting (int or ``inf``), seed and a state description."""

    state: Mapping[str, Any]
    M: int
    K: float
    seed: int
    N: int | None = None

    def __post_init__(self) -> None:
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise ValidationError(f"M must be an integer >= 1, got {self.M!r}")
        K = _parse_K(self.K)
        if K != INFINITE and int(self.M) * K > _MAX_TOTAL_SHOTS:
            raise ValidationError(f"M*K = {int(self.M) * K} exceeds the shot-count limit")
        try:
            seed = _rng.check_seed(self.seed)
        except (TypeError, ValueError) as exc:
            raise ValidationError(str(exc)) from exc
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "state", dict(self.state))

    def load_state(self) -> State:
        state = state_from_dict(self.state)
        if self.N is not None and self.N != state.num_parties:
            raise ValidationError(f"config N={self.N} but the state has {state.num_parties} parties")
        return state

    def to_dict(self) -> dict:
        return {
            "state": dict(self.state),
            "M": self.M,
            "K": "inf" if self.K == INFINITE else self.K,
            "seed": self.seed,
            "N": self.N,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        missing = [k for k in ("state", "M", "K", "seed") if k not in data]
        if missing:
            raise ValidationError(f"config is missing field(s): {', '.join(missing)}")
        return cls(data["state"], data["M"], data["K"], data["seed"], data.get("N"))

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(self.state, self.M, self.K, seed, self.N)


@dataclass(frozen=True)
class RunRecord:
    setting_index: int
    settings: np.ndarray
    exact_E: float
    estimated_E_K: float
    shot_sum: int | None


@dataclass(frozen=True)
class ExperimentResult:
    """Per-setting arrays plus the estimator ``R_MK = mean(estimated_E_K**2)``."""

    config: ExperimentConfig
    settings: np.ndarray = field(repr=False)
    exact_E: np.ndarray = field(repr=False)
    estimated_E_K: np.ndarray = field(repr=False)
    shot_sums: np.ndarray | None = field(repr=False)
    R_MK: float
    finite_K_bias: float

    @property
    def records(self) -> list[RunRecord]:
        return list(self.iter_records())

    def iter_records(self) -> Iterator[RunRecord]:
        for i in range(self.config.M):
            yield RunRecord(
                i,
                self.settings[i],
                float(self.exact_E[i]),
                float(self.estimated_E_K[i]),
                None if self.shot_sums is None else int(self.shot_sums[i]),
            )

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": self.config.to_dict(),
            "R_MK": self.R_MK,
            "finite_K_bias": self.finite_K_bias,
            "records": [
                {
                    "setting_index": r.setting_index,
                    "settings": r.settings.tolist(),
                    "exact_E": r.exact_E,
                    "estimated_E_K": r.estimated_E_K,
                    "shot_sum": r.shot_sum,
                }
                for r in self.iter_records()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentResult":
        config = ExperimentConfig.from_dict(data["config"])
        recs = data["records"]
        shots = [r["shot_sum"] for r in recs]
        return cls(
            config=config,
            settings=np.array([r["settings"] for r in recs], dtype=float),
            exact_E=np.array([r["exact_E"] for r in recs], dtype=float),
            estimated_E_K=np.array([r["estimated_E_K"] for r in recs], dtype=float),
            shot_sums=None if shots[0] is None else np.array(shots, dtype=np.int64),
            R_MK=float(data["R_MK"]),
            finite_K_bias=float(data["finite_K_bias"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentResult":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        N = self.settings.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["index"]
        for n in range(1, N + 1):
            header += [f"u{n}_x", f"u{n}_y", f"u{n}_z"]
        w.writerow(header + ["exact_E", "estimated_E_K"])
        for r in self.iter_records():
            w.writerow([r.setting_index, *map(repr, r.settings.reshape(-1).tolist()),
                        repr(r.exact_E), repr(r.estimated_E_K)])
        return buf.getvalue()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExperimentResult):
            return NotImplemented
        same_shots = (
            (self.shot_sums is None and other.shot_sums is None)
            or (self.shot_sums is not None and other.shot_sums is not None
                and np.array_equal(self.shot_sums, other.shot_sums))
        )
        return (
            self.config == other.config
            and same_shots
            and np.array_equal(self.settings, other.settings)
            and np.array_equal(self.exact_E, other.exact_E)
            and np.array_equal(self.estimated_E_K, other.estimated_E_K)
            and self.R_MK == other.R_MK
            and self.finite_K_bias == other.finite_K_bias
        )

    __hash__ = None  # type: ignore[assignment]


def run_experiment(
    config: ExperimentConfig, threads: int | None = None, state: State | None = None
) -> ExperimentResult:
    """Simulate the experiment described by ``config``.

    ``state`` skips re-parsing when the caller already holds the loaded state.
    """
    if state is None:
        state = config.load_state()
    T = correlation_tensor(state)
    N, M, K, seed = state.num_parties, config.M, config.K, config.seed

    def work(b: tuple[int, int, int]):
        block, start, stop = b
        U = sphere_settings_block(N, seed, block)[: stop - start]
        E = correlation_values(T, U)
        if K == INFINITE:
            return U, E, E.copy(), None
        sums = _shot_sums(E, K, seed, block)
        return U, E, sums / K, sums

    parts = _rng.map_ordered(work, _rng.block_ranges(M), threads)
    U = np.concatenate([p[0] for p in parts])
    E = np.concatenate([p[1] for p in parts])
    EK = np.concatenate([p[2] for p in parts])
    sums = None if K == INFINITE else np.concatenate([p[3] for p in parts])
    bias = 0.0 if K == INFINITE else float(np.mean(1.0 - E**2) / K)
    return ExperimentResult(config, U, E, EK, sums, float(np.mean(EK**2)), bias)


def empirical_deviation(
    config: ExperimentConfig, repetitions: int, threads: int | None = None
) -> tuple[float, float]:
    """Sample mean and standard deviation of R_MK over independent repetitions."""
    if repetitions < 2:
        raise DomainError(f"repetitions must be >= 2, got {repetitions}")
    state = config.load_state()
    values = np.array([
        run_experiment(config.with_seed(_rng.derive_seed(config.seed, _rng.REPETITION, r)),
                       threads, state).R_MK
        for r in range(repetitions)
    ])
    return float(values.mean()), float(values.std(ddof=1))


def eight_photon_scenario(
    K: Union[int, float] = 1000,
    confidence: Union[ConfidenceLevel, float] = TWO_SIGMA,
    repetitions: int = 10_000,
    seed: int = 0,
    state: State | None = None,
    threads: int | None = None,
) -> float:
    """Fraction of single-setting (M=1) experiments on GHZ_8 that the witness declares entangled.

    Repetition ``r`` uses setting index ``r`` of the seed's streams, so each
    repetition is an independent M=1 run.
    """
    if repetitions < 1:
        raise DomainError(f"repetitions must be >= 1, got {repetitions}")
    K = _parse_K(K)
    if state is None:
        state = make_ghz(8)
    T = correlation_tensor(state)
    N = state.num_parties
    threshold = witness_decide(0.0, N, 1, K, confidence).threshold

    def work(b: tuple[int, int, int]) -> np.ndarray:
        block, start, stop = b
        E = correlation_values(T, sphere_settings_block(N, seed, block)[: stop - start])
        if K == INFINITE:
            return E
        return _shot_sums(E, K, seed, block) / K

    EK = np.concatenate(_rng.map_ordered(work, _rng.block_ranges(repetitions), threads))
    return float(np.mean(EK**2 > threshold))
