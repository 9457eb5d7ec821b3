import json

import numpy as np
import pytest

from randcorr.correlations import PAULIS, correlation_length, correlation_tensor
from randcorr.errors import DimensionError, DomainError
from randcorr.qudit import (
    GeneratorBasis,
    calibrated_scale,
    gellmann_basis,
    product_bound,
    qudit_bound_check,
    qudit_correlation_length,
    qudit_correlation_tensor,
)
from randcorr.states import PureState, haar_random_pure, make_ghz, mix_with_white_noise, random_product_pure


def brute_qudit_length(psi, mats_per_party):
    """Oracle: explicit Kronecker products of generators."""
    import functools
    import itertools

    rho = np.outer(psi, psi.conj())
    total = 0.0
    for combo in itertools.product(*mats_per_party):
        total += np.trace(rho @ functools.reduce(np.kron, combo)).real ** 2
    return total


class TestBasis:
    def test_pauli_recovery(self):
        assert np.array_equal(gellmann_basis(2).matrices, PAULIS)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_count_and_orthogonality(self, d):
        b = gellmann_basis(d)
        assert len(b) == d * d - 1
        assert np.allclose(b.gram(), 2 * np.eye(d * d - 1), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_scaled_gram(self, d):
        s = calibrated_scale(d)
        assert np.allclose(gellmann_basis(d, s).gram(), 2 * s * s * np.eye(d * d - 1), atol=1e-12)

    def test_complete_with_identity(self):
        # generators plus identity span all 3x3 matrices
        b = gellmann_basis(3)
        stacked = np.concatenate([b.matrices, np.eye(3)[None]]).reshape(9, 9)
        assert np.linalg.matrix_rank(stacked) == 9

    def test_invalid(self):
        with pytest.raises(DomainError):
            gellmann_basis(1)
        with pytest.raises(DomainError):
            gellmann_basis(3, 0.0)

    def test_validation(self):
        with pytest.raises(Exception):
            GeneratorBasis(2, np.stack([np.eye(2)] * 3))


class TestLength:
    def test_single_qudit_identity(self):
        # a pure qudit has sum_a <g_a>^2 = 2(d-1)/d with standard normalization
        for d in (2, 3, 4, 5):
            for seed in range(5):
                psi = haar_random_pure(1, seed, (d,))
                assert qudit_correlation_length(psi, gellmann_basis(d)) == pytest.approx(2 * (d - 1) / d, abs=1e-12)

    def test_qutrit_product_pair(self):
        psi = random_product_pure((3, 3), 3)
        assert qudit_correlation_length(psi, gellmann_basis(3)) == pytest.approx(16 / 9, abs=1e-12)
        assert qudit_correlation_length(psi, gellmann_basis(3, 1.5)) == pytest.approx(9.0, abs=1e-12)

    def test_qubit_reduction(self):
        for seed in range(10):
            psi = haar_random_pure(3, seed)
            assert qudit_correlation_length(psi, gellmann_basis(2)) == pytest.approx(
                correlation_length(correlation_tensor(psi)), abs=1e-9
            )
        rho = mix_with_white_noise(make_ghz(3), 0.4)
        T = qudit_correlation_tensor(rho, gellmann_basis(2)).entries
        assert np.allclose(T, correlation_tensor(rho).entries, atol=1e-12)

    def test_matches_brute_force(self):
        psi = haar_random_pure(2, 8, (3, 2))
        bases = [gellmann_basis(3, 1.5), gellmann_basis(2)]
        assert qudit_correlation_length(psi, bases) == pytest.approx(
            brute_qudit_length(psi.amplitudes, [b.matrices for b in bases]), abs=1e-10
        )

    def test_heterogeneous_product_bound(self):
        dims = (2, 3, 4)
        bases = [gellmann_basis(d, calibrated_scale(d)) for d in dims]
        for seed in range(5):
            psi = random_product_pure(dims, seed)
            assert qudit_correlation_length(psi, bases) == pytest.approx(product_bound(dims), abs=1e-9)
        psi = haar_random_pure(3, 1, dims)
        assert qudit_correlation_length(psi, bases) > product_bound(dims)

    def test_mismatch(self):
        psi = haar_random_pure(2, 1, (3, 3))
        with pytest.raises(DimensionError):
            qudit_correlation_length(psi, gellmann_basis(2))
        with pytest.raises(DimensionError):
            qudit_correlation_length(psi, [gellmann_basis(3)])


class TestBoundCheck:
    @pytest.mark.parametrize("N,d", [(1, 3), (2, 3), (1, 4), (2, 4)])
    def test_zero_violations(self, N, d):
        r = qudit_bound_check(N, d, 200, 5)
        assert r.violations == 0
        assert r.product_mismatches == 0
        assert r.min_C >= r.bound - 1e-6

    def test_single_qutrit_is_always_three(self):
        r = qudit_bound_check(1, 3, 50, 1)
        assert r.min_C == pytest.approx(3.0, abs=1e-9)
        assert r.max_C == pytest.approx(3.0, abs=1e-9)

    def test_qubit_bound(self):
        r = qudit_bound_check(2, 2, 50, 1)
        assert r.bound == 1.0
        assert r.normalization_scale == 1.0

    def test_report_json(self):
        d = json.loads(json.dumps(qudit_bound_check(2, 3, 5, 0).to_dict()))
        assert d["schema"] == 1
        assert d["normalization_scale"] == 1.5
        assert "inferred" in d["calibration_note"]

    def test_too_large(self):
        with pytest.raises(DomainError):
            qudit_bound_check(3, 5, 10, 0)
