import functools
import itertools

import numpy as np
import pytest

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def brute_tensor(rho: np.ndarray, N: int) -> dict:
    """Oracle: T[label] = Tr(rho sigma_1 x ... x sigma_N) by explicit Kronecker products."""
    out = {}
    for label in itertools.product("xyz", repeat=N):
        op = functools.reduce(np.kron, [PAULI[c] for c in label])
        out["".join(label)] = np.trace(rho @ op)
    return out


def brute_E(rho: np.ndarray, settings) -> float:
    """Oracle: Tr(rho (u_1.sigma) x ... x (u_N.sigma))."""
    ops = [sum(u[i] * PAULI[c] for i, c in enumerate("xyz")) for u in settings]
    return float(np.trace(rho @ functools.reduce(np.kron, ops)).real)


def random_unit_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
