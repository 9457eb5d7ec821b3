"""Correlation lengths for d-level parties using generalized Gell-Mann generators.

With the standard normalization Tr(g_a g_b) = 2 delta_ab a pure qudit has
sum_a <g_a>^2 = 2(d-1)/d.  Scaling every generator by d/2 (the "calibrated"
normalization) turns that into d(d-1)/2, which makes the product-state value
of the correlation length equal to prod_n d_n(d_n-1)/2.  That calibration is
an inference, so every report carries it explicitly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from . import _rng, config
from .errors import DimensionError, DomainError, ValidationError
from .states import PureState, State, haar_random_pure, random_product_pure

Array = np.ndarray

CALIBRATION_NOTE = (
    "generators scaled by d/2 relative to Tr(g_a g_b) = 2 delta_ab; this scale is "
    "inferred so that product states attain [d(d-1)/2]^N and is not a stated convention"
)


def calibrated_scale(d: int) -> float:
    return d / 2


@dataclass(frozen=True)
class GeneratorBasis:
    d: int
    matrices: Array = field(repr=False)
    scale: float = 1.0

    def __post_init__(self) -> None:
        mats = np.array(self.matrices, dtype=np.complex128)
        if mats.shape != (self.d**2 - 1, self.d, self.d):
            raise ValidationError(f"expected {self.d**2 - 1} generators of size {self.d}, got {mats.shape}")
        tol = config.TOLERANCE
        if np.abs(mats - mats.conj().transpose(0, 2, 1)).max() > tol:
            raise ValidationError("generators must be Hermitian")
        if np.abs(np.trace(mats, axis1=1, axis2=2)).max() > tol:
            raise ValidationError("generators must be traceless")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def gram(self) -> Array:
        """Tr(g_a g_b)."""
        return np.einsum("aij,bji->ab", self.matrices, self.matrices).real


def gellmann_basis(d: int, scale: float = 1.0) -> GeneratorBasis:
    """Generalized Gell-Mann matrices: symmetric, antisymmetric, then diagonal.

    At d=2 and scale=1 this is (sigma_x, sigma_y, sigma_z).
    """
    if int(d) != d or d < 2:
        raise DomainError(f"d must be an integer >= 2, got {d!r}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")
    d = int(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    mats = []
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = m[k, j] = 1
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        mats.append(np.diag(np.sqrt(2 / (l * (l + 1))) * diag).astype(np.complex128))
    return GeneratorBasis(d, scale * np.array(mats), float(scale))


Bases = Union[GeneratorBasis, Sequence[GeneratorBasis]]


def _per_party(state: State, bases: Bases) -> list[GeneratorBasis]:
    dims = state.local_dims
    blist = [bases] * len(dims) if isinstance(bases, GeneratorBasis) else list(bases)
    if len(blist) != len(dims):
        raise DimensionError(f"{len(blist)} bases for {len(dims)} parties")
    for n, (b, d) in enumerate(zip(blist, dims), start=1):
        if b.d != d:
            raise DimensionError(f"party {n}: basis dimension {b.d} != local dimension {d}")
    return blist


@dataclass(frozen=True)
class QuditCorrelationTensor:
    entries: Array = field(repr=False)

    @property
    def num_parties(self) -> int:
        return self.entries.ndim


def qudit_correlation_tensor(state: State, bases: Bases) -> QuditCorrelationTensor:
    """Expectations of every product of one generator per party."""
    blist = _per_party(state, bases)
    dims = state.local_dims
    N = len(dims)
    if isinstance(state, PureState):
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    else:
        rho = np.asarray(state.matrix)
    t = rho.reshape(dims + dims)
    perm = [ax for n in range(N) for ax in (n, N + n)]
    t = t.transpose(perm).reshape(tuple(d * d for d in dims))
    for n, b in enumerate(blist):
        # Tr(rho g) = sum_{a,c} rho[a,c] g[c,a]
        proj = b.matrices.transpose(2, 1, 0).reshape(b.d * b.d, len(b))
        t = np.moveaxis(np.tensordot(t, proj, axes=([n], [0])), -1, n)
    if np.abs(t.imag).max() > config.TOLERANCE:
        raise ValidationError("qudit correlation tensor has a non-negligible imaginary part")
    return QuditCorrelationTensor(t.real)


def qudit_correlation_length(state: State, bases: Bases) -> float:
    return float(np.sum(qudit_correlation_tensor(state, bases).entries ** 2))


def product_bound(local_dims: Sequence[int]) -> float:
    """prod_n d_n(d_n-1)/2, the product-state value under calibrated normalization."""
    return float(math.prod(d * (d - 1) / 2 for d in local_dims))


MAX_CHECK_DIM = 81


@dataclass(frozen=True)
class QuditBoundReport:
    N: int
    d: int
    normalization_scale: float
    calibration_note: str
    bound: float
    num_states: int
    min_C: float
    max_C: float
    min_C_product: float
    max_C_product: float
    violations: int
    product_mismatches: int

    def to_dict(self) -> dict:
        return {"schema": 1, **asdict(self)}


def qudit_bound_check(N: int, d: int, num_random_states: int, seed: int) -> QuditBoundReport:
    """Check C >= [d(d-1)/2]^N on Haar-random states and equality on random product states."""
    if N < 1 or d < 2:
        raise DomainError(f"need N >= 1 and d >= 2, got N={N}, d={d}")
    if d**N > MAX_CHECK_DIM:
        raise DomainError(f"d**N = {d**N} exceeds the supported size {MAX_CHECK_DIM}")
    if num_random_states < 1:
        raise DomainError("num_random_states must be >= 1")
    dims = (d,) * N
    scale = calibrated_scale(d)
    basis = gellmann_basis(d, scale)
    bound = product_bound(dims)
    haar = []
    prod_vals = []
    for i in range(num_random_states):
        psi = haar_random_pure(N, _rng.derive_seed(seed, _rng.HAAR, i), dims)
        haar.append(qudit_correlation_length(psi, basis))
        phi = random_product_pure(dims, _rng.derive_seed(seed, _rng.PRODUCT, i))
        prod_vals.append(qudit_correlation_length(phi, basis))
    haar_a = np.array(haar)
    prod_a = np.array(prod_vals)
    return QuditBoundReport(
        N=N,
        d=d,
        normalization_scale=scale,
        calibration_note=CALIBRATION_NOTE,
        bound=bound,
        num_states=num_random_states,
        min_C=float(haar_a.min()),
        max_C=float(haar_a.max()),
        min_C_product=float(prod_a.min()),
        max_C_product=float(prod_a.max()),
        violations=int(np.sum(haar_a < bound - 1e-6) + np.sum(prod_a < bound - 1e-6)),
        product_mismatches=int(np.sum(np.abs(prod_a - bound) > 1e-6)),
    )
