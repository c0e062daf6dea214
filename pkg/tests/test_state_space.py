import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from distcorr.state_space import (
    BELL_KETS,
    DensityMatrix,
    InvalidStateError,
    StateFileError,
    make_bell,
    make_bell_diagonal,
    make_classical_quantum,
    make_isotropic,
    make_product,
    make_separable,
    make_werner,
    partial_trace,
    partial_trace_array,
    projector,
    random_classical_quantum,
    random_density,
    random_density_array,
    random_unitary,
    spectrum,
    state_from_json,
    state_to_json,
    von_neumann_entropy,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestDensityMatrix:
    def test_valid_state_is_read_only(self):
        rho = make_bell()
        assert rho.dims == (2, 2)
        assert rho.dim == 4
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0

    def test_non_hermitian_rejected_with_residual(self):
        m = np.eye(2, dtype=complex) / 2
        m[0, 1] = 0.1
        with pytest.raises(InvalidStateError) as err:
            DensityMatrix(m, 2, 1)
        assert_allclose(err.value.residual, 0.1)

    def test_trace_rejected(self):
        with pytest.raises(InvalidStateError) as err:
            DensityMatrix(np.eye(2), 2, 1)
        assert_allclose(err.value.residual, 1.0)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(InvalidStateError) as err:
            DensityMatrix(np.diag([1.2, -0.2]), 2, 1)
        assert_allclose(err.value.residual, 0.2)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.eye(4) / 4, 2, 3)

    def test_tiny_violations_tolerated(self):
        m = np.diag([0.5 + 1e-12, 0.5 - 1e-12, -1e-12 + 0j])
        m = m / np.trace(m)
        DensityMatrix(m, 3, 1)


class TestPartialTrace:
    def test_product_marginals(self, rng):
        a = random_density_array(2, seed=rng)
        b = random_density_array(3, seed=rng)
        rho = make_product(a, b)
        assert_allclose(partial_trace(rho, "A").matrix, a, atol=1e-15)
        assert_allclose(partial_trace(rho, "B").matrix, b, atol=1e-15)

    def test_bell_marginals_maximally_mixed(self):
        rho = make_bell("psi-")
        assert_allclose(partial_trace(rho, "A").matrix, np.eye(2) / 2, atol=1e-15)
        assert_allclose(partial_trace(rho, "B").matrix, np.eye(2) / 2, atol=1e-15)

    def test_tripartite_keep(self, rng):
        a, b, e = (random_density_array(k, seed=rng) for k in (2, 3, 2))
        m = np.kron(np.kron(a, b), e)
        assert_allclose(partial_trace_array(m, (2, 3, 2), [0, 2]), np.kron(a, e), atol=1e-15)
        assert_allclose(partial_trace_array(m, (2, 3, 2), [1]), b, atol=1e-15)

    def test_bad_keep(self):
        with pytest.raises(ValueError):
            partial_trace(make_bell(), "C")


class TestEntropy:
    @pytest.mark.parametrize("m, expected", [
        (np.diag([1.0, 0.0]), 0.0),
        (np.eye(2) / 2, 1.0),
        (np.eye(4) / 4, 2.0),
        (np.diag([0.5, 0.25, 0.25]), 1.5),
    ])
    def test_known_values(self, m, expected):
        assert_allclose(von_neumann_entropy(m), expected, atol=1e-14)

    def test_pure_bell_has_zero_entropy(self):
        assert abs(von_neumann_entropy(make_bell())) < 1e-14

    @given(seeds)
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        m = random_density_array(3, seed=rng)
        u = random_unitary(3, rng)
        assert_allclose(von_neumann_entropy(u @ m @ u.conj().T), von_neumann_entropy(m),
                        atol=1e-12)

    def test_spectrum_descending_and_reconstructs(self, rng):
        m = random_density_array(4, seed=rng)
        s = spectrum(m)
        assert np.all(np.diff(s.eigenvalues) <= 0)
        assert_allclose(s.reconstruct(), m, atol=1e-14)


class TestFamilies:
    def test_werner_endpoints(self):
        assert_allclose(make_werner(0).matrix, np.eye(4) / 4)
        assert_allclose(make_werner(1).matrix, make_bell().matrix)

    @pytest.mark.parametrize("z", [-0.1, 1.1])
    def test_werner_range(self, z):
        with pytest.raises(ValueError):
            make_werner(z)

    def test_isotropic_qubit_matches_werner(self):
        # F = (1 + 3z)/4 on two qubits
        z = 0.3
        assert_allclose(make_isotropic((1 + 3 * z) / 4).matrix, make_werner(z).matrix, atol=1e-15)

    def test_isotropic_qutrit_is_valid(self):
        rho = make_isotropic(0.5, 3)
        assert rho.dims == (3, 3)

    def test_bell_diagonal(self):
        rho = make_bell_diagonal(0.5)
        expected = 0.5 * projector(BELL_KETS["phi+"]) + 0.5 * projector(BELL_KETS["psi+"])
        assert_allclose(rho.matrix, expected)

    def test_classical_quantum_blocks(self, rng):
        rho, p, basis, states = random_classical_quantum((3, 2), rng)
        for i in range(3):
            v = np.kron(basis[:, i].conj(), np.eye(2)).reshape(2, 6)
            assert_allclose(v @ rho.matrix @ v.conj().T, p[i] * states[i], atol=1e-14)

    def test_classical_quantum_needs_matching_lengths(self):
        with pytest.raises(ValueError):
            make_classical_quantum([0.5, 0.5], np.eye(2), [np.eye(2) / 2])

    def test_separable_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            make_separable([0.7, 0.7], [(np.eye(2) / 2, np.eye(2) / 2)] * 2)


class TestRandom:
    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_rank(self, rank):
        rho = random_density((2, 2), rank, seed=7)
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == rank

    @pytest.mark.parametrize("rank", [0, 5])
    def test_rank_out_of_range(self, rank):
        with pytest.raises(ValueError):
            random_density((2, 2), rank, seed=0)

    def test_seed_determinism(self):
        assert_allclose(random_density(4, seed=3).matrix, random_density(4, seed=3).matrix,
                        rtol=0, atol=0)

    def test_haar_unitary_is_unitary(self, rng):
        u = random_unitary(5, rng)
        assert_allclose(u @ u.conj().T, np.eye(5), atol=1e-13)


class TestStateFiles:
    @given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2)]))
    def test_round_trip_exact(self, seed, dims):
        rho = random_density(dims, seed=seed)
        back = state_from_json(state_to_json(rho))
        assert back.dims == rho.dims
        assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-15

    def test_format(self):
        data = json.loads(state_to_json(make_bell()))
        assert data["dim_a"] == 2 and data["dim_b"] == 2
        assert_allclose(data["matrix"][0][3], [0.5, 0.0], atol=1e-15)

    @pytest.mark.parametrize("text", [
        "{",
        "[]",
        '{"dim_a": 2, "dim_b": 2}',
        '{"dim_a": 2, "dim_b": 2, "matrix": [[1, 0], [0, 0]]}',
        '{"dim_a": "two", "dim_b": 2, "matrix": []}',
    ])
    def test_malformed(self, text):
        with pytest.raises(StateFileError):
            state_from_json(text)

    def test_unphysical_is_not_malformed(self):
        text = json.dumps({"dim_a": 1, "dim_b": 2, "matrix": [[[2, 0], [0, 0]], [[0, 0], [0, 0]]]})
        with pytest.raises(InvalidStateError):
            state_from_json(text)
