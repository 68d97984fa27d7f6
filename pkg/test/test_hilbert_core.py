#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pcsft_workbench.errors import ValidationError
from pcsft_workbench.hilbert_core import (BipartiteState, SymOperator, as_operator,
                                          bell_state, hvector, load_state,
                                          operator_tensor, random_state,
                                          reduced_density, save_state, schmidt,
                                          state_from_schmidt, swap,
                                          tensor_product)
from pcsft_workbench.test_utils import random_dims, random_symmetric


class TestPrimitives:

    def test_hvector(self):
        assert_allclose(hvector([1, 2]), [1.0, 2.0])
        with pytest.raises(ValidationError):
            hvector([[1, 2]])
        with pytest.raises(ValidationError):
            hvector([1, np.nan])
        with pytest.raises(ValidationError):
            hvector([1, 1], normalized=True)

    def test_sym_operator(self):
        op = SymOperator([[1, 2], [2, 3]])
        assert op.dim == 2
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 5
        with pytest.raises(ValidationError):
            SymOperator([[1, 2], [0, 3]])
        with pytest.raises(ValidationError):
            SymOperator([1, 2])

    def test_state_normalization(self):
        with pytest.raises(ValidationError):
            BipartiteState(np.ones((2, 2)))
        state = BipartiteState.from_coeffs(np.ones((2, 2)), normalize=True)
        assert_allclose(state.coeffs, np.full((2, 2), 0.5))
        with pytest.raises(ValidationError):
            BipartiteState.from_coeffs(np.zeros((2, 3)), normalize=True)

    def test_row_major_vector(self):
        coeffs = np.arange(6.0).reshape(2, 3)
        state = BipartiteState.from_coeffs(coeffs, normalize=True)
        # e_1 (x) f_2 sits at index 1 * 3 + 2
        assert state.vector[5] == state.coeffs[1, 2]
        assert state.dims == (2, 3)


class TestTensorProduct:

    def test_product_coefficients(self):
        state = tensor_product([1, 0], [0, 1])
        assert_allclose(as_operator(state), [[0, 1], [0, 0]])

    def test_dimensions(self):
        state = tensor_product([1, 0, 0], [0.6, 0.8])
        assert state.dims == (3, 2)

    def test_unnormalized_factor(self):
        with pytest.raises(ValidationError):
            tensor_product([1, 1], [1, 0])

    def test_operator_tensor_matches_vector_layout(self, rng):
        psi1 = rng.standard_normal(3)
        psi2 = rng.standard_normal(2)
        state = tensor_product(psi1 / np.linalg.norm(psi1), psi2 / np.linalg.norm(psi2))
        a1 = np.diag([1.0, 2.0, 3.0])
        a2 = np.diag([1.0, -1.0])
        expected = (a1 @ state.coeffs @ a2.T).reshape(-1)
        assert_allclose(operator_tensor(a1, a2).matrix @ state.vector, expected)

    def test_operator_tensor_on_product_vectors(self, rng):
        for _ in range(20):
            n1, n2 = random_dims(rng)
            a1, a2 = random_symmetric(n1, rng), random_symmetric(n2, rng)
            u, v = rng.standard_normal(n1), rng.standard_normal(n2)
            assert_allclose(operator_tensor(a1, a2).matrix @ np.kron(u, v),
                            np.kron(a1.matrix @ u, a2.matrix @ v), atol=1e-12)


class TestReducedDensity:

    def test_bell(self, bell):
        assert_allclose(reduced_density(bell, 1).matrix, np.eye(2) / 2)
        assert_allclose(reduced_density(bell, 2).matrix, np.eye(2) / 2)

    def test_unit_trace(self, rng):
        for _ in range(20):
            state = random_state((int(rng.integers(1, 6)), int(rng.integers(1, 6))),
                                 int(rng.integers(1000)))
            for side in (1, 2):
                rho = reduced_density(state, side).matrix
                assert abs(np.trace(rho) - 1) <= 1e-12
                assert np.linalg.eigvalsh(rho)[0] >= -1e-12

    def test_equal_nonzero_spectra(self, rng):
        for _ in range(20):
            state = random_state(random_dims(rng), int(rng.integers(2**31)))
            spectra = [np.linalg.eigvalsh(reduced_density(state, side).matrix) for side in (1, 2)]
            nonzero = [np.sort(x[x > 1e-12]) for x in spectra]
            assert_allclose(nonzero[0], nonzero[1], atol=1e-12)

    def test_as_operator_pairing(self, rng):
        state = random_state((4, 3), 17)
        for _ in range(20):
            u, phi = rng.standard_normal(4), rng.standard_normal(3)
            assert abs(as_operator(state) @ phi @ u - state.vector @ np.kron(u, phi)) <= 1e-12

    def test_bad_side(self, bell):
        with pytest.raises(ValidationError):
            reduced_density(bell, 3)


class TestSchmidt:

    def test_bell(self, bell):
        form = schmidt(bell)
        assert form.rank == 2
        assert_allclose(form.alphas, [1 / np.sqrt(2)] * 2, atol=1e-12)

    def test_product_has_rank_one(self, product_state):
        form = schmidt(product_state)
        assert form.rank == 1
        assert form.factorizable
        assert_allclose(form.alphas, [1.0])

    def test_reconstruction(self, rng):
        for _ in range(20):
            state = random_state((int(rng.integers(1, 7)), int(rng.integers(1, 6))),
                                 int(rng.integers(1000)))
            form = schmidt(state)
            assert_allclose(form.reconstruct(), state.coeffs, atol=1e-12)
            assert abs(np.sum(form.alphas**2) - 1) <= 1e-12
            assert np.all(np.diff(form.alphas) <= 0)
            # orthonormal frames
            assert_allclose(form.left_frame.T @ form.left_frame, np.eye(form.rank), atol=1e-12)
            assert_allclose(form.right_frame.T @ form.right_frame, np.eye(form.rank), atol=1e-12)

    def test_sign_convention(self, alpha_state):
        form = schmidt(alpha_state)
        for k in range(form.rank):
            column = form.left_frame[:, k]
            assert column[np.argmax(np.abs(column))] > 0

    def test_prescribed_coefficients(self, alpha_state):
        assert_allclose(schmidt(alpha_state).alphas, [0.8, 0.6], atol=1e-12)

    def test_schmidt_rank_of_generated_states(self, rng):
        for rank in (1, 2, 3):
            state = random_state((4, 3), int(rng.integers(1000)), schmidt_rank=rank)
            assert schmidt(state).rank == rank

    def test_tolerance_range(self, bell):
        with pytest.raises(ValidationError):
            schmidt(bell, tol=0.1)
        with pytest.raises(ValidationError):
            schmidt(bell, tol=0)


class TestGenerators:

    def test_random_state_is_reproducible(self):
        assert_allclose(random_state((3, 2), 7).coeffs, random_state((3, 2), 7).coeffs)

    def test_invalid_schmidt_rank(self):
        with pytest.raises(ValidationError):
            random_state((2, 3), 0, schmidt_rank=3)

    def test_bell_state(self):
        assert_allclose(bell_state(3).coeffs, np.eye(3) / np.sqrt(3))

    def test_swap(self, alpha_state):
        swapped = swap(alpha_state)
        assert swapped.dims == (2, 2)
        assert_allclose(reduced_density(swapped, 1).matrix,
                        reduced_density(alpha_state, 2).matrix)

    def test_schmidt_normalizes_alphas(self):
        state = state_from_schmidt([2.0, 1.0], (3, 3))
        assert_allclose(schmidt(state).alphas, np.array([2, 1]) / np.sqrt(5), atol=1e-12)


class TestStateFile:

    def test_save_and_load(self, tmp_path, alpha_state):
        filename = tmp_path / 'state.json'
        save_state(alpha_state, filename)
        assert_allclose(load_state(filename).coeffs, alpha_state.coeffs, atol=1e-15)

    def test_renormalize_within_tolerance(self, tmp_path):
        filename = tmp_path / 'state.json'
        filename.write_text(json.dumps({'dims': [1, 2], 'coeffs': [1.0 + 1e-7, 0.0]}))
        assert_allclose(load_state(filename).coeffs, [[1.0, 0.0]])

    def test_reject_unnormalized(self, tmp_path):
        filename = tmp_path / 'state.json'
        filename.write_text(json.dumps({'dims': [1, 2], 'coeffs': [1.1, 0.0]}))
        with pytest.raises(ValidationError):
            load_state(filename)

    @pytest.mark.parametrize('content', [
        'not json', '[1, 2]', '{"dims": [2, 2], "coeffs": [1, 0, 0]}',
        '{"dims": [0, 2], "coeffs": []}', '{"coeffs": [1]}'
    ])
    def test_malformed(self, tmp_path, content):
        filename = tmp_path / 'state.json'
        filename.write_text(content)
        with pytest.raises(ValidationError):
            load_state(filename)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_state(tmp_path / 'missing.json')
