"""Statistics of squared correlations for product states and the witness rule.

For a pure product state measured along sphere-uniform local directions the
squared correlation ``E**2`` has density

    chi_N(t) = (-ln t)**(N-1) / (2**N sqrt(t) (N-1)!),   0 < t <= 1,

with mean ``3**-N`` and second moment ``5**-N``.  The witness declares a
state entangled when an estimate of the random correlations exceeds
``3**-N`` by ``z`` standard deviations of the product-state estimator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Literal, NamedTuple, Union

import numpy as np

from .correlations import CorrelationTensor, _tensor_of, sampled_correlations
from .errors import DomainError, ValidationError
from .states import State

INFINITE = math.inf

_NORMAL = NormalDist()

# Conventional "k sigma" labels: 95.4% and 99.7% stand for exactly 2 and 3
# standard deviations.  The coverage is warped piecewise-linearly through these
# anchors so z(p) stays strictly increasing.
_LABELS = np.array([0.0, 0.80, 0.954, 0.997, 1.0])
_COVERAGE = np.array(
    [0.0, 0.80, 2 * _NORMAL.cdf(2.0) - 1, 2 * _NORMAL.cdf(3.0) - 1, 1.0]
)


@dataclass(frozen=True)
class ConfidenceLevel:
    """Probability ``p`` and its normal multiplier.

    ``sided=2`` (default) uses the two-sided convention where 0.954 maps to
    2.0 and 0.80 to 1.2816; ``sided=1`` uses ``z = Phi^-1(p)``.
    """

    p: float
    sided: int = 2

    def __post_init__(self) -> None:
        p = float(self.p)
        if not (0.0 < p < 1.0) or math.isnan(p):
            raise ValidationError(f"confidence must lie strictly between 0 and 1, got {self.p!r}")
        if self.sided not in (1, 2):
            raise ValidationError(f"sided must be 1 or 2, got {self.sided!r}")
        object.__setattr__(self, "p", p)

    @property
    def z(self) -> float:
        if self.sided == 1:
            return _NORMAL.inv_cdf(self.p)
        coverage = float(np.interp(self.p, _LABELS, _COVERAGE))
        return _NORMAL.inv_cdf((1.0 + coverage) / 2.0)

    @classmethod
    def of(cls, value: Union["ConfidenceLevel", float]) -> "ConfidenceLevel":
        return value if isinstance(value, ConfidenceLevel) else cls(float(value))


TWO_SIGMA = ConfidenceLevel(0.954)


# --- product-state distribution ---------------------------------------------

def _check_parties(N: int) -> None:
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")


def chi_density(e2: float, N: int) -> float:
    """Density of E^2 for a product state of N qubits."""
    _check_parties(N)
    if not 0.0 < e2 <= 1.0:
        raise DomainError(f"chi_density is defined on (0, 1], got {e2!r}")
    return (-math.log(e2)) ** (N - 1) / (2**N * math.sqrt(e2) * math.factorial(N - 1))


def upper_gamma_regularized(N: int, x: float) -> float:
    """Gamma(N, x) / (N-1)! for integer N >= 1 via the finite series."""
    if math.isinf(x):
        return 0.0
    term = 1.0
    total = 1.0
    for k in range(1, N):
        term *= x / k
        total += term
    return math.exp(-x) * total


def chi_cdf(c: float, N: int) -> float:
    """P(E^2 <= c) for a product state: Gamma(N, -ln(c)/2) / (N-1)!."""
    _check_parties(N)
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"chi_cdf needs c in [0, 1], got {c!r}")
    if c == 0.0:
        return 0.0
    return upper_gamma_regularized(N, -0.5 * math.log(c))


def delta_product(N: int) -> float:
    """Standard deviation of E^2 under chi_N."""
    _check_parties(N)
    return math.sqrt(5.0**-N - 9.0**-N)


def _check_settings(M: int) -> None:
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M!r}")


def delta_M(N: int, M: int) -> float:
    _check_settings(M)
    return delta_product(N) / math.sqrt(M)


def delta_K(N: int, M: int, K: float, delta_m: float | None = None) -> float:
    """Standard deviation of the estimator due to K shots per setting.

    ``delta_m`` overrides the finite-M deviation that enters the bracket
    (defaults to ``delta_M(N, M)``).  ``K = inf`` gives 0.
    """
    _check_parties(N)
    _check_settings(M)
    if K == INFINITE:
        return 0.0
    if int(K) != K or K < 2:
        raise DomainError(f"K must be an integer >= 2 or infinite, got {K!r}")
    dm = delta_M(N, M) if delta_m is None else delta_m
    bracket = 1 - 2 * (1 - K) / 3.0**N + (1 - 2 * K) * (9.0**-N - dm**2)
    radicand = 2.0 / (M * K * K) * bracket
    if radicand <= 0:
        raise DomainError(
            f"finite-K variance is nonpositive ({radicand!r}) at N={N}, M={M}, K={K}; "
            "parameters lie outside the regime of the approximation"
        )
    return math.sqrt(radicand)


def delta_MK(N: int, M: int, K: float) -> float:
    return math.hypot(delta_M(N, M), delta_K(N, M, K))


def separable_delta_bound(N: int) -> float:
    """Upper bound on the E^2 standard deviation of any separable state."""
    _check_parties(N)
    return 5.0 ** (-N / 2)


def ghz_noise_threshold(N: int) -> float:
    """Noise parameter above which the separable-bound witness fires for GHZ + white noise."""
    if int(N) != N or N < 2:
        raise DomainError(f"N must be >= 2, got {N!r}")
    return math.sqrt(3.0**N / (2.0 ** (N - 2) * 5.0 ** (N / 2)))


# --- decision rule -----------------------------------------------------------

BoundMode = Literal["pure", "separable"]


@dataclass(frozen=True)
class WitnessVerdict:
    estimate: float
    threshold: float
    delta_M: float
    delta_K: float
    delta_MK: float
    entangled: bool
    confidence: ConfidenceLevel
    N: int
    M: int
    K: float
    bound_mode: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["confidence"] = self.confidence.p
        d["confidence_sided"] = self.confidence.sided
        d["z"] = self.confidence.z
        d["K"] = "inf" if self.K == INFINITE else int(self.K)
        return d


def witness_decide(
    R_hat: float,
    N: int,
    M: int,
    K: float,
    confidence: Union[ConfidenceLevel, float] = TWO_SIGMA,
    bound_mode: BoundMode = "pure",
) -> WitnessVerdict:
    """Entangled iff ``R_hat > 3**-N + z * Delta_MK``.

    In ``separable`` mode the per-sample deviation is the separable bound
    ``5**(-N/2)`` instead of the product-state value.
    """
    conf = ConfidenceLevel.of(confidence)
    _check_parties(N)
    _check_settings(M)
    if not -1e-12 <= R_hat <= 1.0 + 1e-12:
        raise DomainError(f"R_hat must lie in [0, 1], got {R_hat!r}")
    if bound_mode == "pure":
        dm = delta_M(N, M)
    elif bound_mode == "separable":
        dm = separable_delta_bound(N) / math.sqrt(M)
    else:
        raise ValidationError(f"bound_mode must be 'pure' or 'separable', got {bound_mode!r}")
    dk = delta_K(N, M, K, delta_m=dm)
    dmk = math.hypot(dm, dk)
    threshold = 3.0**-N + conf.z * dmk
    return WitnessVerdict(
        estimate=float(R_hat),
        threshold=threshold,
        delta_M=dm,
        delta_K=dk,
        delta_MK=dmk,
        entangled=bool(R_hat > threshold),
        confidence=conf,
        N=int(N),
        M=int(M),
        K=K if K == INFINITE else int(K),
        bound_mode=bound_mode,
    )


# --- single measurement setting ---------------------------------------------

class SingleSettingThreshold(NamedTuple):
    c: float
    delta: float


def single_setting_threshold(N: int, confidence: Union[ConfidenceLevel, float] = TWO_SIGMA) -> SingleSettingThreshold:
    """The c with chi_cdf(c, N) = p, so a product state exceeds c with probability 1 - p.

    Bisection runs on ln(c) until the bracket is narrower than 1e-12, which
    makes c relatively accurate to ~1e-12 even for tiny thresholds.
    """
    _check_parties(N)
    p = ConfidenceLevel.of(confidence).p
    lo, hi = math.log(1e-300), 0.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if chi_cdf(math.exp(mid), N) < p:
            lo = mid
        else:
            hi = mid
    c = math.exp(0.5 * (lo + hi))
    return SingleSettingThreshold(c, c - 3.0**-N)


def detection_probability(
    state: Union[State, CorrelationTensor],
    confidence: Union[ConfidenceLevel, float] = TWO_SIGMA,
    num_samples: int = 100_000,
    seed: int = 0,
    N: int | None = None,
    threads: int | None = None,
) -> float:
    """Fraction of random setting tuples whose E^2 beats the single-setting threshold."""
    if num_samples < 1:
        raise DomainError(f"num_samples must be >= 1, got {num_samples}")
    T = _tensor_of(state)
    if N is not None and N != T.num_parties:
        raise DomainError(f"N={N} does not match the {T.num_parties}-party state")
    c = single_setting_threshold(T.num_parties, confidence).c
    e2 = sampled_correlations(T, num_samples, seed, threads) ** 2
    return float(np.mean(e2 > c))
