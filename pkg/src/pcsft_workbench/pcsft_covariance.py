#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Prequantum block covariance operators of a bipartite state.

The naive covariance has blocks (Psi Psi*, Psi; Psi*, Psi* Psi). It is
positive semidefinite only for factorizable states; adding a white-noise
background eps I to both diagonal blocks repairs it once eps reaches
eps* = max_i alpha_i (1 - alpha_i) over the Schmidt coefficients.
'''

import json
from dataclasses import dataclass, replace
from typing import NamedTuple, Tuple

import numpy as np
from sos.targets import textMD5
from sos.utils import env

from .errors import (InseparableBackground, InternalConsistencyError,
                     NotPositiveSemidefinite, ValidationError)
from .hilbert_core import BipartiteState, as_operator, schmidt

__all__ = [
    'BlockCovariance', 'EpsilonReport', 'FieldDecomposition', 'SchmidtBlocks',
    'is_psd', 'naive_covariance', 'min_epsilon', 'default_epsilon',
    'regularized_covariance', 'entangled', 'decompose', 'schmidt_block_spectrum'
]

PSD_TOL = 1e-10
SYMMETRY_TOL = 1e-12
EPSILON_TOL = 1e-10
AUTO_EPSILON_MARGIN = 0.05


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class BlockCovariance:
    '''Covariance of the field (phi1, phi2) on H1 x H2 in 2 x 2 block form.

    ``valid`` is set only when the full matrix passed the PSD check.
    '''
    d11: np.ndarray
    d12: np.ndarray
    d21: np.ndarray
    d22: np.ndarray
    epsilon: float = 0.0
    valid: bool = False

    def __post_init__(self):
        d11, d12, d21, d22 = (_frozen(x)
                              for x in (self.d11, self.d12, self.d21, self.d22))
        n1, n2 = d11.shape[0], d22.shape[0]
        if d11.shape != (n1, n1) or d22.shape != (n2, n2) or d12.shape != (
                n1, n2) or d21.shape != (n2, n1):
            raise ValidationError(
                f'Inconsistent block shapes {d11.shape}, {d12.shape}, {d21.shape}, {d22.shape}'
            )
        if np.max(np.abs(d21 - d12.T)) > SYMMETRY_TOL:
            raise ValidationError('Off-diagonal blocks must be transposes of each other')
        for block in (d11, d22):
            if np.max(np.abs(block - block.T)) > SYMMETRY_TOL:
                raise ValidationError('Diagonal blocks must be symmetric')
        if self.epsilon < 0:
            raise ValidationError(f'Background strength must be >= 0, got {self.epsilon}')
        object.__setattr__(self, 'd11', d11)
        object.__setattr__(self, 'd12', d12)
        object.__setattr__(self, 'd21', d21)
        object.__setattr__(self, 'd22', d22)
        object.__setattr__(self, 'epsilon', float(self.epsilon))

    @classmethod
    def from_matrix(cls, matrix, dims, epsilon=0.0, valid=False):
        n1, n2 = dims
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (n1 + n2, n1 + n2):
            raise ValidationError(
                f'Matrix of shape {matrix.shape} does not match dims {dims}')
        return cls(matrix[:n1, :n1], matrix[:n1, n1:], matrix[n1:, :n1],
                   matrix[n1:, n1:], epsilon, valid)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.d11.shape[0], self.d22.shape[0]

    def full(self) -> np.ndarray:
        return np.block([[self.d11, self.d12], [self.d21, self.d22]])

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.full())[0])

    @property
    def covariance_id(self) -> str:
        return textMD5(
            json.dumps({
                'dims': list(self.dims),
                'matrix': self.full().tolist(),
                'epsilon': self.epsilon
            }))

    def __repr__(self):
        return f'BlockCovariance(dims={self.dims}, epsilon={self.epsilon}, valid={self.valid})'


@dataclass(frozen=True)
class EpsilonReport:
    lambda_min: float
    eps_star: float
    eps_star_closed_form: float
    schmidt_alphas: Tuple[float, ...]

    def to_dict(self):
        return {
            'lambda_min': self.lambda_min,
            'eps_star': self.eps_star,
            'eps_star_closed_form': self.eps_star_closed_form,
            'schmidt_alphas': list(self.schmidt_alphas)
        }


class FieldDecomposition(NamedTuple):
    intrinsic: BlockCovariance
    background: float


class SchmidtBlocks(NamedTuple):
    alphas: np.ndarray
    # naive covariance in the basis (e_11, e_12, e_21, e_22, ...)
    conjugated: np.ndarray
    # eigenvalues of each 2 x 2 block, ascending
    eigenvalues: np.ndarray


def _spectrum(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f'Expect a square matrix, got shape {matrix.shape}')
    asym = np.max(np.abs(matrix - matrix.T)) if matrix.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValidationError(f'Matrix is not symmetric (max asymmetry {asym:.3g})')
    return np.linalg.eigvalsh(matrix)


def is_psd(matrix, tol: float = PSD_TOL) -> Tuple[bool, float]:
    '''(passed, lambda_min) with passed iff lambda_min >= -tol max(1, lambda_max).

    The test uses the eigendecomposition because the covariances here are
    routinely singular.
    '''
    eigenvalues = _spectrum(matrix)
    lambda_min, lambda_max = float(eigenvalues[0]), float(eigenvalues[-1])
    return lambda_min >= -tol * max(1.0, lambda_max), lambda_min


def naive_covariance(state: BipartiteState) -> BlockCovariance:
    psi = as_operator(state)
    cov = BlockCovariance(psi @ psi.T, psi, psi.T, psi.T @ psi, epsilon=0.0)
    passed, lambda_min = is_psd(cov.full())
    env.logger.debug(f'Naive covariance: lambda_min ``{lambda_min:.6g}``')
    return replace(cov, valid=passed)


def _closed_form_eps_star(state):
    alphas = np.linalg.svd(state.coeffs, compute_uv=False)
    return max(0.0, float(np.max(alphas * (1.0 - alphas))))


def min_epsilon(state: BipartiteState, tol: float = PSD_TOL) -> EpsilonReport:
    '''Smallest background strength making the naive covariance PSD.'''
    lambda_min = naive_covariance(state).lambda_min
    eps_star = max(0.0, -lambda_min)
    closed_form = _closed_form_eps_star(state)
    if abs(eps_star - closed_form) > EPSILON_TOL:
        raise InternalConsistencyError(
            f'Eigenvalue route eps* = {eps_star!r} disagrees with max alpha (1 - alpha) = {closed_form!r}',
            first=eps_star,
            second=closed_form)
    return EpsilonReport(
        lambda_min=lambda_min,
        eps_star=eps_star,
        eps_star_closed_form=closed_form,
        schmidt_alphas=tuple(float(x) for x in schmidt(state, tol).alphas))


def default_epsilon(state: BipartiteState,
                    margin: float = AUTO_EPSILON_MARGIN) -> float:
    return min_epsilon(state).eps_star + margin


def regularized_covariance(state: BipartiteState, eps: float) -> BlockCovariance:
    '''Naive covariance plus eps I on both diagonal blocks.'''
    if eps < 0:
        raise ValidationError(f'Background strength must be >= 0, got {eps}')
    report = min_epsilon(state)
    if eps < report.eps_star - EPSILON_TOL:
        raise NotPositiveSemidefinite(
            f'Background strength {eps:.6g} is below eps* = {report.eps_star:.6g} (deficit {report.eps_star - eps:.6g})',
            lambda_min=report.lambda_min + eps,
            deficit=report.eps_star - eps)
    psi = as_operator(state)
    n1, n2 = state.dims
    cov = BlockCovariance(psi @ psi.T + eps * np.eye(n1), psi, psi.T,
                          psi.T @ psi + eps * np.eye(n2), epsilon=eps)
    passed, lambda_min = is_psd(cov.full())
    env.logger.debug(
        f'Regularized covariance with eps ``{eps:.6g}``: lambda_min ``{lambda_min:.6g}``'
    )
    return replace(cov, valid=passed)


def entangled(state: BipartiteState, tol: float = PSD_TOL) -> bool:
    '''True iff the Schmidt rank at relative tolerance tol is at least 2.

    The verdict is cross-checked against the PSD test of the naive covariance
    at the same tol. Near the two cutoffs the routes may disagree on rounding
    alone: inside that band the Schmidt rank is kept with a warning, outside
    it a disagreement raises.
    '''
    eigenvalues = _spectrum(naive_covariance(state).full())
    threshold = tol * max(1.0, float(eigenvalues[-1]))
    psd_verdict = not float(eigenvalues[0]) >= -threshold
    form = schmidt(state, tol)
    verdict = form.rank >= 2
    if verdict != psd_verdict:
        alphas = np.linalg.svd(state.coeffs, compute_uv=False)
        second = float(alphas[1]) if alphas.size > 1 else 0.0
        cutoff = tol * float(alphas[0])
        if min(threshold, cutoff) / 2 <= second <= 2 * max(threshold, cutoff):
            env.logger.warning(
                f'Second Schmidt coefficient {second:.3g} is within the tolerance band of {threshold:.3g}, entanglement verdict taken from the Schmidt rank'
            )
        else:
            raise InternalConsistencyError(
                f'PSD test (lambda_min {eigenvalues[0]:.6g}) and Schmidt coefficients (alpha_2 {second:.6g}) disagree on entanglement',
                first=float(eigenvalues[0]),
                second=second)
    return verdict


def decompose(state: BipartiteState, eps: float,
              tol: float = PSD_TOL) -> FieldDecomposition:
    '''Split the field covariance into intrinsic part and background eps.

    Only possible for factorizable states.
    '''
    if eps < 0:
        raise ValidationError(f'Background strength must be >= 0, got {eps}')
    if entangled(state, tol):
        alphas = tuple(float(x) for x in schmidt(state, tol).alphas)
        raise InseparableBackground(
            f'Entangled state (Schmidt coefficients {alphas}) has no intrinsic field separable from the background',
            alphas=alphas)
    return FieldDecomposition(replace(naive_covariance(state), valid=True),
                              float(eps))


def schmidt_block_spectrum(state: BipartiteState) -> SchmidtBlocks:
    '''Naive covariance seen in the Schmidt frames.

    Coordinates x_i = (phi1, e_i1), y_i = (phi2, e_i2) interleaved as
    (x_1, y_1, x_2, y_2, ...); the result is block diagonal with blocks
    [[alpha_i^2, alpha_i], [alpha_i, alpha_i^2]].
    '''
    form = schmidt(state)
    n1, n2 = state.dims
    frame = np.zeros((n1 + n2, 2 * form.rank))
    frame[:n1, 0::2] = form.left_frame
    frame[n1:, 1::2] = form.right_frame
    conjugated = frame.T @ naive_covariance(state).full() @ frame
    eigenvalues = np.array([
        np.linalg.eigvalsh(conjugated[2 * i:2 * i + 2, 2 * i:2 * i + 2])
        for i in range(form.rank)
    ])
    return SchmidtBlocks(np.array(form.alphas), conjugated, eigenvalues)
