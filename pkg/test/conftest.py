#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import numpy as np
import pytest

from pcsft_workbench.hilbert_core import bell_state, state_from_schmidt, tensor_product
from pcsft_workbench.test_utils import write_config_file, write_state_file


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture()
def bell():
    return bell_state(2)


@pytest.fixture()
def product_state():
    return tensor_product([0.6, 0.8], [1 / np.sqrt(2), -1 / np.sqrt(2)])


@pytest.fixture()
def alpha_state():
    """Schmidt coefficients (0.8, 0.6), eps* = 0.24"""
    return state_from_schmidt([0.8, 0.6], (2, 2), seed=3)


@pytest.fixture()
def z_operator():
    return np.diag([1.0, -1.0])


@pytest.fixture()
def bell_file(tmp_path, bell):
    return write_state_file(bell, tmp_path / 'bell.json')


@pytest.fixture()
def product_file(tmp_path, product_state):
    return write_state_file(product_state, tmp_path / 'product.json')


@pytest.fixture()
def alpha_file(tmp_path, alpha_state):
    return write_state_file(alpha_state, tmp_path / 'alpha.json')


@pytest.fixture()
def bell_config(tmp_path):
    return write_config_file(
        {
            'state': {
                'kind': 'bell',
                'dims': [2, 2]
            },
            'epsilon': 'auto',
            'n_samples': 40000,
            'seed': 11,
            'output_dir': str(tmp_path / 'bell_reports')
        }, tmp_path / 'bell_config.json')


@pytest.fixture()
def product_config(tmp_path, product_file):
    return write_config_file(
        {
            'state': str(product_file),
            'epsilon': 0.1,
            'n_samples': 40000,
            'seed': 5,
            'output_dir': str(tmp_path / 'product_reports')
        }, tmp_path / 'product_config.json')
