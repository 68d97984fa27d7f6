#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pcsft_workbench.errors import (InseparableBackground, NotPositiveSemidefinite,
                                    ValidationError)
from pcsft_workbench.hilbert_core import BipartiteState, schmidt, swap
from pcsft_workbench.pcsft_covariance import (BlockCovariance, decompose,
                                              default_epsilon, entangled, is_psd,
                                              min_epsilon, naive_covariance,
                                              regularized_covariance,
                                              schmidt_block_spectrum)
from pcsft_workbench.test_utils import random_entangled_state, random_product_state

BELL_EPS_STAR = 1 / np.sqrt(2) - 0.5


class TestBlockCovariance:

    def test_blocks_of_naive_covariance(self, alpha_state):
        cov = naive_covariance(alpha_state)
        psi = alpha_state.coeffs
        assert_allclose(cov.d11, psi @ psi.T)
        assert_allclose(cov.d22, psi.T @ psi)
        assert_allclose(cov.d12, psi)
        assert_allclose(cov.d21, psi.T)
        assert cov.dims == (2, 2)
        assert_allclose(cov.full(), cov.full().T)

    def test_validation(self):
        with pytest.raises(ValidationError):
            BlockCovariance(np.eye(2), np.ones((2, 2)), np.zeros((2, 2)), np.eye(2))
        with pytest.raises(ValidationError):
            BlockCovariance(np.eye(2), np.zeros((2, 3)), np.zeros((3, 2)), np.eye(2))
        with pytest.raises(ValidationError):
            BlockCovariance(np.eye(1), np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1),
                            epsilon=-1)

    def test_from_matrix(self, bell):
        cov = naive_covariance(bell)
        again = BlockCovariance.from_matrix(cov.full(), (2, 2))
        assert_allclose(again.d12, cov.d12)
        with pytest.raises(ValidationError):
            BlockCovariance.from_matrix(np.eye(3), (2, 2))

    def test_covariance_id(self, bell):
        first = regularized_covariance(bell, 0.3)
        assert first.covariance_id == regularized_covariance(bell, 0.3).covariance_id
        assert first.covariance_id != regularized_covariance(bell, 0.4).covariance_id

    def test_swap_exchanges_blocks(self, alpha_state):
        cov = naive_covariance(alpha_state)
        swapped = naive_covariance(swap(alpha_state))
        assert_allclose(swapped.d11, cov.d22)
        assert_allclose(swapped.d12, cov.d21)


class TestPSD:

    def test_is_psd(self):
        assert is_psd(np.diag([1.0, 0.0]))[0]
        assert is_psd(np.diag([1.0, -1e-12]))[0]
        passed, lambda_min = is_psd(np.diag([1.0, -1e-3]))
        assert not passed
        assert lambda_min == pytest.approx(-1e-3)
        with pytest.raises(ValidationError):
            is_psd([[1.0, 1.0], [0.0, 1.0]])

    def test_product_states_are_psd(self, rng):
        for _ in range(100):
            state = random_product_state(rng)
            cov = naive_covariance(state)
            assert cov.lambda_min >= -1e-10
            assert cov.valid
            assert not entangled(state)

    def test_entangled_states_are_not_psd(self, rng):
        for _ in range(100):
            state = random_entangled_state(rng)
            alphas = schmidt(state).alphas
            cov = naive_covariance(state)
            assert abs(cov.lambda_min + np.max(alphas * (1 - alphas))) <= 1e-10
            assert not cov.valid
            assert entangled(state)

    def test_verdict_follows_schmidt_rank(self):
        # alpha_2 lies between the Schmidt cutoff and the PSD threshold
        a = 1.5e-10
        state = BipartiteState(np.diag([np.sqrt(1 - a**2), a]))
        assert schmidt(state).rank == 2
        assert entangled(state)
        with pytest.raises(InseparableBackground):
            decompose(state, 0.1)
        # a looser tolerance drops alpha_2 on both routes
        assert schmidt(state, 1e-6).rank == 1
        assert not entangled(state, 1e-6)
        assert len(min_epsilon(state, 1e-6).schmidt_alphas) == 1
        decompose(state, 0.1, tol=1e-6)


class TestEpsilon:

    def test_bell(self, bell):
        report = min_epsilon(bell)
        assert abs(report.eps_star - BELL_EPS_STAR) <= 1e-10
        assert abs(report.eps_star_closed_form - BELL_EPS_STAR) <= 1e-10
        assert report.lambda_min == pytest.approx(-BELL_EPS_STAR, abs=1e-10)

    def test_alpha_state(self, alpha_state):
        assert min_epsilon(alpha_state).eps_star == pytest.approx(0.24, abs=1e-10)

    def test_product_state(self, product_state):
        report = min_epsilon(product_state)
        assert report.eps_star == pytest.approx(0.0, abs=1e-12)
        assert report.schmidt_alphas == pytest.approx((1.0,))

    def test_closed_form_on_random_states(self, rng):
        for _ in range(100):
            state = random_entangled_state(rng) if rng.random() < 0.5 else random_product_state(rng)
            report = min_epsilon(state)
            assert abs(report.eps_star - report.eps_star_closed_form) <= 1e-10

    def test_default_epsilon(self, bell):
        assert default_epsilon(bell) == pytest.approx(BELL_EPS_STAR + 0.05)

    def test_report_dict(self, alpha_state):
        info = min_epsilon(alpha_state).to_dict()
        assert set(info) == {'lambda_min', 'eps_star', 'eps_star_closed_form', 'schmidt_alphas'}


class TestRegularized:

    def test_above_threshold(self, bell):
        cov = regularized_covariance(bell, 0.3)
        assert cov.valid
        assert cov.epsilon == 0.3
        assert_allclose(cov.d11, np.eye(2) * (0.5 + 0.3))
        assert cov.lambda_min == pytest.approx(0.3 - BELL_EPS_STAR)

    def test_at_threshold(self, alpha_state):
        cov = regularized_covariance(alpha_state, 0.24)
        assert cov.valid

    def test_below_threshold(self, bell):
        with pytest.raises(NotPositiveSemidefinite) as info:
            regularized_covariance(bell, 0.1)
        assert info.value.deficit == pytest.approx(BELL_EPS_STAR - 0.1)
        assert info.value.lambda_min < 0

    def test_negative(self, bell):
        with pytest.raises(ValidationError):
            regularized_covariance(bell, -0.1)

    def test_factorizable_without_background(self, product_state):
        assert regularized_covariance(product_state, 0.0).valid


class TestDecomposition:

    def test_factorizable(self, product_state):
        intrinsic, background = decompose(product_state, 0.2)
        assert background == 0.2
        assert intrinsic.valid
        assert intrinsic.epsilon == 0.0
        assert_allclose(intrinsic.d12, product_state.coeffs)

    def test_entangled(self, rng, bell):
        with pytest.raises(InseparableBackground):
            decompose(bell, 0.5)
        for _ in range(10):
            with pytest.raises(InseparableBackground) as info:
                decompose(random_entangled_state(rng), 1.0)
            assert len(info.value.alphas) >= 2


class TestSchmidtBlocks:

    def test_block_structure(self, alpha_state):
        blocks = schmidt_block_spectrum(alpha_state)
        for i, alpha in enumerate(blocks.alphas):
            block = blocks.conjugated[2 * i:2 * i + 2, 2 * i:2 * i + 2]
            assert_allclose(block, [[alpha**2, alpha], [alpha, alpha**2]], atol=1e-12)
            assert_allclose(blocks.eigenvalues[i], [alpha**2 - alpha, alpha**2 + alpha],
                            atol=1e-12)
        # blocks do not couple
        assert abs(blocks.conjugated[0, 2]) <= 1e-12
        assert abs(blocks.conjugated[1, 3]) <= 1e-12

    def test_minimum_matches_eps_star(self, rng):
        for _ in range(20):
            state = random_entangled_state(rng)
            blocks = schmidt_block_spectrum(state)
            assert -np.min(blocks.eigenvalues) == pytest.approx(
                min_epsilon(state).eps_star, abs=1e-10)
