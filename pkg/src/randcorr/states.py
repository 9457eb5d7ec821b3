"""Dense N-party states: construction, validation, local rotations and JSON I/O.

Tensor index order puts party 1 on the most significant digit, so a pure state
reshaped to ``local_dims`` is indexed ``psi[i_1, ..., i_N]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from . import _rng, config
from .errors import DimensionError, DomainError, ValidationError

Array = np.ndarray

AXIS_LETTERS = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def _frozen(a: Array) -> Array:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def _check_dims(local_dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in local_dims)
    if not dims:
        raise ValidationError("local_dims must name at least one party")
    if any(d < 2 for d in dims):
        raise ValidationError(f"every local dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class PureState:
    """State vector over parties with dimensions ``local_dims``."""

    local_dims: tuple[int, ...]
    amplitudes: Array = field(repr=False)

    def __post_init__(self) -> None:
        dims = _check_dims(self.local_dims)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != prod(dims):
            raise ValidationError(
                f"amplitudes has length {amps.size}, expected {prod(dims)} for local_dims {dims}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > config.TOLERANCE:
            raise ValidationError(f"amplitudes are not normalised (squared norm {norm2!r})")
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def num_parties(self) -> int:
        return len(self.local_dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.local_dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    local_dims: tuple[int, ...]
    matrix: Array = field(repr=False)

    def __post_init__(self) -> None:
        dims = _check_dims(self.local_dims)
        rho = np.asarray(self.matrix, dtype=np.complex128)
        D = prod(dims)
        if rho.shape != (D, D):
            raise ValidationError(f"matrix has shape {rho.shape}, expected {(D, D)}")
        tol = config.TOLERANCE
        if np.abs(rho - rho.conj().T).max() > tol:
            raise ValidationError("matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"matrix trace is {tr.real!r}, expected 1")
        lam_min = float(np.linalg.eigvalsh(rho)[0])
        if lam_min < -tol:
            raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {lam_min!r})")
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "matrix", _frozen(rho))

    @property
    def num_parties(self) -> int:
        return len(self.local_dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def density(self) -> "DensityMatrix":
        return self


State = Union[PureState, DensityMatrix]


def as_density(state: State) -> DensityMatrix:
    return state.density()


def is_unitary(u: Array, tol: float | None = None) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    tol = config.TOLERANCE if tol is None else tol
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol)


@dataclass(frozen=True)
class LocalRotationSet:
    """One unitary per party."""

    matrices: tuple[Array, ...]

    def __post_init__(self) -> None:
        mats = []
        for n, u in enumerate(self.matrices, start=1):
            u = np.asarray(u, dtype=np.complex128)
            if not is_unitary(u):
                raise ValidationError(f"rotation for party {n} is not unitary")
            mats.append(_frozen(u))
        object.__setattr__(self, "matrices", tuple(mats))

    @classmethod
    def identity(cls, local_dims: Sequence[int]) -> "LocalRotationSet":
        return cls(tuple(np.eye(d) for d in local_dims))

    @classmethod
    def random(cls, local_dims: Sequence[int], seed: int) -> "LocalRotationSet":
        """Haar-random local unitaries."""
        rng = _rng.stream(seed, _rng.ROTATIONS)
        return cls(tuple(haar_unitary(d, rng) for d in local_dims))


def haar_unitary(d: int, rng: np.random.Generator) -> Array:
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def bloch_to_qubit(u: Sequence[float]) -> Array:
    """Pure qubit amplitudes whose Bloch vector is ``u`` (up to global phase)."""
    x, y, z = (float(c) for c in u)
    if z >= 0:
        a = np.sqrt((1 + z) / 2)
        b = (x + 1j * y) / np.sqrt(2 * (1 + z))
    else:
        b = np.sqrt((1 - z) / 2)
        a = (x - 1j * y) / np.sqrt(2 * (1 - z))
    return np.array([a, b], dtype=np.complex128)


def _as_bloch(u: Any, party: int) -> Array:
    if isinstance(u, str):
        sign = -1.0 if u.startswith("-") else 1.0
        key = u.lstrip("+-").lower()
        if key not in AXIS_LETTERS:
            raise ValidationError(f"party {party}: unknown direction {u!r}")
        return sign * np.array(AXIS_LETTERS[key])
    v = np.asarray(u, dtype=float)
    if v.shape != (3,):
        raise ValidationError(f"party {party}: Bloch vector must have 3 components, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > config.TOLERANCE:
        raise ValidationError(f"party {party}: Bloch vector has norm {norm!r}, expected 1")
    return v


def make_product_state(bloch_vectors: Sequence[Any]) -> PureState:
    """Product of pure qubits; entries are unit 3-vectors or axis letters like ``"z"``/``"-x"``."""
    if len(bloch_vectors) == 0:
        raise ValidationError("need at least one Bloch vector")
    psi = np.ones(1, dtype=np.complex128)
    for n, u in enumerate(bloch_vectors, start=1):
        psi = np.kron(psi, bloch_to_qubit(_as_bloch(u, n)))
    return PureState((2,) * len(bloch_vectors), psi / np.linalg.norm(psi))


def make_ghz(N: int) -> PureState:
    if N < 2:
        raise DomainError(f"GHZ state needs N >= 2, got {N}")
    psi = np.zeros(2**N, dtype=np.complex128)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return PureState((2,) * N, psi)


def mix_with_white_noise(state: State, epsilon: float) -> DensityMatrix:
    """``epsilon * rho + (1 - epsilon) * I / D``."""
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    rho = as_density(state)
    D = rho.dim
    return DensityMatrix(rho.local_dims, epsilon * rho.matrix + (1 - epsilon) * np.eye(D) / D)


def haar_random_pure(N: int, seed: int, local_dims: Sequence[int] | None = None) -> PureState:
    """Unitarily invariant random pure state: normalised complex Gaussian vector."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    dims = (2,) * N if local_dims is None else tuple(local_dims)
    if len(dims) != N:
        raise DimensionError(f"local_dims has {len(dims)} entries for N={N}")
    rng = _rng.stream(seed, _rng.HAAR)
    D = prod(dims)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return PureState(dims, v / np.linalg.norm(v))


def random_product_pure(local_dims: Sequence[int], seed: int) -> PureState:
    """Product of independent Haar-random local pure states."""
    rng = _rng.stream(seed, _rng.PRODUCT)
    psi = np.ones(1, dtype=np.complex128)
    for d in local_dims:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        psi = np.kron(psi, v / np.linalg.norm(v))
    return PureState(tuple(local_dims), psi / np.linalg.norm(psi))


def _apply_on_party(t: Array, u: Array, axis: int) -> Array:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)


def apply_local_rotations(state: State, rotations: LocalRotationSet | Sequence[Array]) -> State:
    """``(U_1 x ... x U_N)|psi>`` for pure input, the conjugation for a density matrix."""
    if not isinstance(rotations, LocalRotationSet):
        rotations = LocalRotationSet(tuple(rotations))
    mats = rotations.matrices
    dims = state.local_dims
    if len(mats) != len(dims):
        raise DimensionError(f"{len(mats)} rotations for {len(dims)} parties")
    for n, (u, d) in enumerate(zip(mats, dims), start=1):
        if u.shape != (d, d):
            raise DimensionError(f"party {n}: rotation is {u.shape}, local dimension is {d}")
    N = len(dims)
    if isinstance(state, PureState):
        t = state.amplitudes.reshape(dims)
        for n, u in enumerate(mats):
            t = _apply_on_party(t, u, n)
        return PureState(dims, t.reshape(-1))
    t = state.matrix.reshape(dims + dims)
    for n, u in enumerate(mats):
        t = _apply_on_party(t, u, n)
        t = _apply_on_party(t, u.conj(), N + n)
    D = state.dim
    rho = t.reshape(D, D)
    return DensityMatrix(dims, (rho + rho.conj().T) / 2)


def reduced_density(state: State, party: int) -> Array:
    """Single-party reduced density matrix (party counted from 0)."""
    dims = state.local_dims
    N = len(dims)
    if isinstance(state, PureState):
        t = np.moveaxis(state.amplitudes.reshape(dims), party, 0).reshape(dims[party], -1)
        return t @ t.conj().T
    t = state.matrix.reshape(dims + dims)
    keep = [i for i in range(N) if i != party]
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(N)]
    col = [letters[i] if i in keep else letters[N + i] for i in range(N)]
    subs = "".join(row) + "".join(col) + "->" + row[party] + col[party]
    return np.einsum(subs, t)


def single_party_purities(state: State) -> list[float]:
    out = []
    for n in range(state.num_parties):
        r = reduced_density(state, n)
        out.append(float(np.real(np.trace(r @ r))))
    return out


# --- JSON state files -------------------------------------------------------

NAMED_STATES = ("ghz", "product", "bell", "haar", "ghz-noise")


def named_state(
    name: str,
    n: int | None = None,
    *,
    dirs: Sequence[Any] | None = None,
    seed: int | None = None,
    epsilon: float | None = None,
) -> State:
    """Shorthand constructor for the state families used throughout."""
    name = name.lower()
    if name == "ghz":
        if n is None:
            raise ValidationError("named state 'ghz' requires 'n'")
        state: State = make_ghz(int(n))
        if epsilon is not None:
            state = mix_with_white_noise(state, float(epsilon))
        return state
    if name == "ghz-noise":
        if n is None or epsilon is None:
            raise ValidationError("named state 'ghz-noise' requires 'n' and 'epsilon'")
        return mix_with_white_noise(make_ghz(int(n)), float(epsilon))
    if name == "bell":
        return make_ghz(2)
    if name == "product":
        if dirs is None:
            raise ValidationError("named state 'product' requires 'dirs'")
        if n is not None and int(n) != len(dirs):
            raise ValidationError(f"'n'={n} does not match {len(dirs)} directions in 'dirs'")
        return make_product_state(list(dirs))
    if name == "haar":
        if n is None or seed is None:
            raise ValidationError("named state 'haar' requires 'n' and 'seed'")
        return haar_random_pure(int(n), int(seed))
    raise ValidationError(f"unknown named state {name!r}; expected one of {NAMED_STATES}")


def _complex_list(values: Any, where: str) -> Array:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"'{where}' must hold [re, im] pairs") from exc
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ValidationError(f"'{where}' must hold [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_from_dict(data: Mapping[str, Any]) -> State:
    if not isinstance(data, Mapping):
        raise ValidationError("state description must be a JSON object")
    if "named" in data:
        return named_state(
            str(data["named"]),
            data.get("n"),
            dirs=data.get("dirs"),
            seed=data.get("seed"),
            epsilon=data.get("epsilon"),
        )
    kind = data.get("kind")
    if kind not in ("pure", "density"):
        raise ValidationError("field 'kind' must be 'pure' or 'density'")
    if "local_dims" not in data:
        raise ValidationError("field 'local_dims' is missing")
    dims = data["local_dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise ValidationError("field 'local_dims' must be a list of integers")
    if kind == "pure":
        if "amplitudes" not in data:
            raise ValidationError("field 'amplitudes' is missing")
        return PureState(tuple(dims), _complex_list(data["amplitudes"], "amplitudes"))
    if "matrix" not in data:
        raise ValidationError("field 'matrix' is missing")
    return DensityMatrix(tuple(dims), _complex_list(data["matrix"], "matrix"))


def state_to_dict(state: State) -> dict:
    if isinstance(state, PureState):
        return {
            "kind": "pure",
            "local_dims": list(state.local_dims),
            "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
        }
    return {
        "kind": "density",
        "local_dims": list(state.local_dims),
        "matrix": [[[float(a.real), float(a.imag)] for a in row] for row in state.matrix],
    }
