"""Full correlation tensors and the quantities built from them.

The correlation tensor of an N-qubit state has entries
``T[j1, ..., jN] = Tr(rho sigma_j1 x ... x sigma_jN)`` with axes ordered
(x, y, z).  Everything else here (directional correlations, correlation
length, random correlations) is computed from that tensor; the two-copy
operator and the reference-qubit measurement give independent routes to the
same numbers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import _rng, config
from .errors import DimensionError, DomainError, ValidationError
from .states import PureState, State, as_density, bloch_to_qubit

Array = np.ndarray

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

AXES = "xyz"

# entries contracted per batch; a multiple of the RNG block keeps the
# floating-point path of every setting independent of the caller
_CONTRACT_CHUNK = 256


@dataclass(frozen=True)
class CorrelationTensor:
    """Real array of shape ``(3,) * N``."""

    entries: Array = field(repr=False)

    def __post_init__(self) -> None:
        t = np.array(self.entries, dtype=float)
        if t.ndim == 0 or any(s != 3 for s in t.shape):
            raise ValidationError(f"correlation tensor must have shape (3,)*N, got {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    @property
    def num_parties(self) -> int:
        return self.entries.ndim

    def __getitem__(self, label: str) -> float:
        """Entry by axis letters, e.g. ``T["xyy"]``."""
        if len(label) != self.num_parties:
            raise DimensionError(f"label {label!r} has wrong length for N={self.num_parties}")
        return float(self.entries[tuple(AXES.index(c) for c in label)])

    def records(self) -> list[tuple[str, float]]:
        """(letters, value) for every index tuple in row-major order."""
        return [
            ("".join(AXES[j] for j in idx), float(v))
            for idx, v in np.ndenumerate(self.entries)
        ]


def correlation_tensor(state: State) -> CorrelationTensor:
    if any(d != 2 for d in state.local_dims):
        raise DimensionError(
            f"correlation_tensor needs qubits, got local_dims {state.local_dims}; use the qudit module"
        )
    N = state.num_parties
    if isinstance(state, PureState):
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    else:
        rho = np.asarray(state.matrix)
    # pair row/col index of each party into one axis of size 4
    t = rho.reshape((2,) * (2 * N))
    perm = [ax for n in range(N) for ax in (n, N + n)]
    t = t.transpose(perm).reshape((4,) * N)
    # Tr(rho A) = sum_{a,b} rho[a,b] A[b,a]
    basis = PAULIS.transpose(2, 1, 0).reshape(4, 3)
    for n in range(N):
        t = np.moveaxis(np.tensordot(t, basis, axes=([n], [0])), -1, n)
    if N and np.abs(t.imag).max() > config.TOLERANCE:
        raise ValidationError("correlation tensor has a non-negligible imaginary part; state is not Hermitian")
    return CorrelationTensor(t.real)


def as_settings(settings: Sequence[Sequence[float]] | Array, N: int | None = None) -> Array:
    """Validate a setting tuple (one unit 3-vector per party) and return it as an (N, 3) array."""
    s = np.asarray(settings, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3:
        raise ValidationError(f"setting tuple must have shape (N, 3), got {s.shape}")
    if N is not None and s.shape[0] != N:
        raise DimensionError(f"setting tuple has {s.shape[0]} vectors for {N} parties")
    norms = np.linalg.norm(s, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > config.TOLERANCE)
    if bad.size:
        raise ValidationError(f"party {bad[0] + 1}: setting vector has norm {norms[bad[0]]!r}")
    return s


def _contract(entries: Array, U: Array) -> Array:
    """E for a batch of settings ``U`` of shape (m, N, 3)."""
    N = entries.ndim
    m = U.shape[0]
    acc = entries.reshape(-1, 3) @ U[:, N - 1, :].T
    for n in range(N - 2, -1, -1):
        acc = acc.reshape(-1, 3, m)
        acc = np.einsum("ajm,mj->am", acc, U[:, n, :])
    return acc.reshape(m)


def correlation_values(T: CorrelationTensor, settings: Array) -> Array:
    """Vectorised ``correlation_value`` over settings of shape (M, N, 3); no validation."""
    U = np.asarray(settings, dtype=float)
    if U.ndim != 3 or U.shape[1:] != (T.num_parties, 3):
        raise DimensionError(f"settings must have shape (M, {T.num_parties}, 3), got {U.shape}")
    out = np.empty(U.shape[0])
    for start in range(0, U.shape[0], _CONTRACT_CHUNK):
        stop = min(start + _CONTRACT_CHUNK, U.shape[0])
        out[start:stop] = _contract(T.entries, U[start:stop])
    return out


def correlation_value(T: CorrelationTensor, settings: Sequence[Sequence[float]] | Array) -> float:
    """E = sum_j T_j (u_1)_j1 ... (u_N)_jN for one setting tuple."""
    s = as_settings(settings, T.num_parties)
    return float(_contract(T.entries, s[None, :, :])[0])


def correlation_length(T: CorrelationTensor) -> float:
    return float(np.sum(T.entries**2))


def random_correlations_exact(T: CorrelationTensor) -> float:
    return correlation_length(T) / 3**T.num_parties


def sphere_settings_block(N: int, seed: int, block: int) -> Array:
    """Full block of ``_rng.BLOCK`` sphere-uniform setting tuples, shape (BLOCK, N, 3)."""
    rng = _rng.stream(seed, _rng.SETTINGS, block)
    cos_t = rng.uniform(-1.0, 1.0, size=(_rng.BLOCK, N))
    phi = rng.uniform(0.0, 2 * np.pi, size=(_rng.BLOCK, N))
    sin_t = np.sqrt(1.0 - cos_t**2)
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1)


def sample_settings(N: int, M: int, seed: int, threads: int | None = None) -> Array:
    """M sphere-uniform setting tuples, shape (M, N, 3); tuple i depends only on (seed, i)."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    blocks = _rng.block_ranges(M)
    parts = _rng.map_ordered(
        lambda b: sphere_settings_block(N, seed, b[0])[: b[2] - b[1]], blocks, threads
    )
    return np.concatenate(parts, axis=0)


def sampled_correlations(T: CorrelationTensor, M: int, seed: int, threads: int | None = None) -> Array:
    """Exact E at the first M sphere-uniform setting tuples of ``seed``."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    N = T.num_parties

    def work(b: tuple[int, int, int]) -> Array:
        U = sphere_settings_block(N, seed, b[0])[: b[2] - b[1]]
        return correlation_values(T, U)

    return np.concatenate(_rng.map_ordered(work, _rng.block_ranges(M), threads))


def _tensor_of(state_or_tensor: Union[State, CorrelationTensor]) -> CorrelationTensor:
    if isinstance(state_or_tensor, CorrelationTensor):
        return state_or_tensor
    return correlation_tensor(state_or_tensor)


def random_correlations_mc(
    state: Union[State, CorrelationTensor], M: int, seed: int, threads: int | None = None
) -> tuple[float, float | None]:
    """Monte Carlo mean of E^2 over M random setting tuples and its standard error.

    The standard error is ``None`` when ``M == 1``.
    """
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    e2 = sampled_correlations(_tensor_of(state), M, seed, threads) ** 2
    est = float(e2.mean())
    if M == 1:
        return est, None
    return est, float(e2.std(ddof=1) / math.sqrt(M))


# --- two-copy operator ------------------------------------------------------

HEISENBERG = sum(np.kron(s, s) for s in PAULIS).real
SINGLET = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)


def _interleaved_to_blocks(op: Array, N: int) -> Array:
    """Reorder qubits (1,1',2,2',...) -> (1,...,N,1',...,N') for a 2N-qubit operator."""
    order = [2 * n for n in range(N)] + [2 * n + 1 for n in range(N)]
    t = op.reshape((2,) * (4 * N))
    t = t.transpose(order + [2 * N + a for a in order])
    return t.reshape(4**N, 4**N)


def two_copy_operator(N: int) -> Array:
    """S = H_11' x ... x H_NN' on qubits ordered (1..N, 1'..N')."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    op = np.ones((1, 1))
    for _ in range(N):
        op = np.kron(op, HEISENBERG)
    return _interleaved_to_blocks(op, N)


def block_swap(N: int) -> Array:
    """Permutation exchanging the unprimed and primed N-qubit registers."""
    D = 2**N
    P = np.zeros((D * D, D * D))
    idx = np.arange(D * D)
    a, b = np.divmod(idx, D)
    P[b * D + a, idx] = 1.0
    return P


class TwoCopySpectrum(NamedTuple):
    all_eigenvalues: Array
    symmetric_eigenvalues: Array


MAX_SPECTRUM_N = 3


def two_copy_operator_spectrum(N: int) -> TwoCopySpectrum:
    """Spectrum of S, in full and restricted to the block-swap-symmetric subspace."""
    if not 1 <= N <= MAX_SPECTRUM_N:
        raise DomainError(f"two-copy spectrum supports 1 <= N <= {MAX_SPECTRUM_N}, got {N}")
    S = two_copy_operator(N)
    full = np.linalg.eigvalsh(S)
    proj = (np.eye(S.shape[0]) + block_swap(N)) / 2
    w, v = np.linalg.eigh(proj)
    Q = v[:, w > 0.5]
    sym = np.linalg.eigvalsh(Q.T @ S @ Q)
    return TwoCopySpectrum(np.sort(full), np.sort(sym))


def two_copy_expectation(state: State) -> float:
    """<psi psi| S |psi psi>, or Tr(S rho x rho) for a density matrix."""
    if any(d != 2 for d in state.local_dims):
        raise DimensionError("two-copy operator is defined for qubits only")
    N = state.num_parties
    S = two_copy_operator(N)
    if isinstance(state, PureState):
        v = np.kron(state.amplitudes, state.amplitudes)
        return float(np.vdot(v, S @ v).real)
    rho = state.matrix
    return float(np.trace(S @ np.kron(rho, rho)).real)


# --- reference-qubit total-spin measurement --------------------------------

SINGLET_PROJECTOR = np.outer(SINGLET, SINGLET.conj())
TRIPLET_PROJECTOR = np.eye(4) - SINGLET_PROJECTOR
OUTCOME_VALUES = {"singlet": -3.0, "triplet": 1.0}


def reference_frame_correlation(state: State, settings: Sequence[Sequence[float]] | Array) -> float:
    """Correlation of the +1/-3 total-spin outcomes with reference qubits along ``settings``.

    Each party measures singlet (-3) versus triplet (+1) on its principal qubit
    and one reference qubit prepared with Bloch vector ``u_n``; the result is
    the Born-rule average of the product of the N outcomes on the 2N-qubit state.
    """
    if any(d != 2 for d in state.local_dims):
        raise DimensionError("reference-frame measurement is defined for qubits only")
    N = state.num_parties
    s = as_settings(settings, N)
    rho = as_density(state).matrix
    ref = np.ones((1, 1), dtype=np.complex128)
    for u in s:
        q = bloch_to_qubit(u)
        ref = np.kron(ref, np.outer(q, q.conj()))
    joint = _interleaved_from_blocks(np.kron(rho, ref), N)
    projectors = {"singlet": SINGLET_PROJECTOR, "triplet": TRIPLET_PROJECTOR}
    total_prob = 0.0
    value = 0.0
    for outcome in itertools.product(projectors, repeat=N):
        P = np.ones((1, 1), dtype=np.complex128)
        for o in outcome:
            P = np.kron(P, projectors[o])
        p = float(np.trace(joint @ P).real)
        total_prob += p
        value += p * math.prod(OUTCOME_VALUES[o] for o in outcome)
    if abs(total_prob - 1.0) > 1e-9:
        raise ValidationError(f"outcome probabilities sum to {total_prob!r}")
    return value


def _interleaved_from_blocks(op: Array, N: int) -> Array:
    """Reorder qubits (1..N, 1'..N') -> (1,1',2,2',...)."""
    order = [ax for n in range(N) for ax in (n, N + n)]
    t = op.reshape((2,) * (4 * N))
    t = t.transpose(order + [2 * N + a for a in order])
    return t.reshape(4**N, 4**N)
