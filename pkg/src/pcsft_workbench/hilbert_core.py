#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Real finite-dimensional Hilbert space primitives.

A state of the composite system H1 (x) H2 is stored as its n1 x n2 coefficient
matrix C over the product basis e_i (x) f_j. Flattening is row-major, so the
vector index of e_i (x) f_j is i * n2 + j. The same matrix is the operator
representation of the state, the linear map H2 -> H1.
'''

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sos.utils import env

from .errors import ValidationError

__all__ = [
    'SymOperator', 'BipartiteState', 'SchmidtForm', 'hvector', 'sym_operator',
    'tensor_product', 'as_operator', 'reduced_density', 'schmidt',
    'operator_tensor', 'random_state', 'state_from_schmidt', 'bell_state',
    'swap', 'random_observable', 'load_state', 'save_state'
]

STATE_NORM_TOL = 1e-12
VECTOR_NORM_TOL = 1e-10
SYMMETRY_TOL = 1e-12
SCHMIDT_TOL = 1e-10
STATE_FILE_TOL = 1e-6


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def hvector(entries, normalized: bool = False) -> np.ndarray:
    '''Validate a real vector, optionally requiring unit norm.'''
    vec = np.asarray(entries, dtype=float)
    if vec.ndim != 1 or vec.size < 1:
        raise ValidationError(
            f'Expect a non-empty real vector, got an array of shape {vec.shape}'
        )
    if not np.all(np.isfinite(vec)):
        raise ValidationError('Vector entries must be finite')
    if normalized:
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > VECTOR_NORM_TOL:
            raise ValidationError(
                f'State vector must be normalized, got norm {norm:.15g}')
    return vec


@dataclass(frozen=True, eq=False)
class SymOperator:
    '''Real symmetric matrix: an observable or a covariance block.

    The stored matrix is symmetrized after validation, so products of
    operators stay exactly symmetric.
    '''
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValidationError(
                f'Expect a square matrix, got an array of shape {mat.shape}')
        if not np.all(np.isfinite(mat)):
            raise ValidationError('Operator entries must be finite')
        asym = np.max(np.abs(mat - mat.T))
        if asym > SYMMETRY_TOL:
            raise ValidationError(
                f'Operator is not symmetric (max asymmetry {asym:.3g})')
        object.__setattr__(self, 'matrix', _frozen((mat + mat.T) / 2))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f'SymOperator(dim={self.dim})'


def sym_operator(operator) -> SymOperator:
    '''Accept a SymOperator or anything numpy can turn into a square matrix.'''
    if isinstance(operator, SymOperator):
        return operator
    return SymOperator(operator)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    '''Normalized pure state of H1 (x) H2 given by its coefficient matrix.'''
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or min(coeffs.shape) < 1:
            raise ValidationError(
                f'Expect an n1 x n2 coefficient matrix, got shape {coeffs.shape}'
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValidationError('State coefficients must be finite')
        norm = np.linalg.norm(coeffs)
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise ValidationError(
                f'State is not normalized (Frobenius norm {norm:.15g})')
        object.__setattr__(self, 'coeffs', _frozen(coeffs))

    @classmethod
    def from_coeffs(cls, coeffs, normalize: bool = False):
        coeffs = np.asarray(coeffs, dtype=float)
        if normalize:
            norm = np.linalg.norm(coeffs)
            if norm == 0:
                raise ValidationError('Cannot normalize a zero state')
            coeffs = coeffs / norm
        return cls(coeffs)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.coeffs.shape

    @property
    def vector(self) -> np.ndarray:
        # row-major flattening, index i * n2 + j
        return self.coeffs.reshape(-1)

    def __repr__(self):
        return f'BipartiteState(dims={self.dims})'


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    alphas: np.ndarray
    left_frame: np.ndarray
    right_frame: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return (self.left_frame * self.alphas) @ self.right_frame.T

    @property
    def factorizable(self) -> bool:
        return self.rank == 1


def _check_dims(dims) -> Tuple[int, int]:
    try:
        n1, n2 = (int(x) for x in dims)
    except (TypeError, ValueError):
        raise ValidationError(f'Expect dims (n1, n2), got {dims!r}')
    if n1 < 1 or n2 < 1:
        raise ValidationError(f'Dimensions must be positive, got {dims!r}')
    return n1, n2


def tensor_product(psi1, psi2) -> BipartiteState:
    '''Factorizable state psi1 (x) psi2.'''
    psi1 = hvector(psi1, normalized=True)
    psi2 = hvector(psi2, normalized=True)
    coeffs = np.outer(psi1, psi2)
    # inputs are normalized to 1e-10, the state contract is 1e-12
    return BipartiteState.from_coeffs(coeffs, normalize=True)


def as_operator(state: BipartiteState) -> np.ndarray:
    '''Matrix of the map H2 -> H1, phi -> sum_j (phi, chi_j) psi_j.'''
    return state.coeffs


def reduced_density(state: BipartiteState, side: int) -> SymOperator:
    psi = as_operator(state)
    if side == 1:
        return SymOperator(psi @ psi.T)
    elif side == 2:
        return SymOperator(psi.T @ psi)
    raise ValidationError(f'Side must be 1 or 2, got {side!r}')


def schmidt(state: BipartiteState, tol: float = SCHMIDT_TOL) -> SchmidtForm:
    '''Schmidt decomposition from the SVD of the coefficient matrix.

    Singular values below tol times the largest one are dropped. Each left
    frame vector has its largest-magnitude entry positive; the matching right
    vector is flipped with it.
    '''
    if not 0 < tol <= 1e-6:
        raise ValidationError(f'Schmidt tolerance must be in (0, 1e-6], got {tol}')
    u, s, vt = np.linalg.svd(state.coeffs, full_matrices=False)
    keep = s > tol * s[0]
    left = u[:, keep]
    right = vt[keep].T
    cols = np.arange(left.shape[1])
    signs = np.sign(left[np.argmax(np.abs(left), axis=0), cols])
    signs[signs == 0] = 1.0
    return SchmidtForm(
        alphas=_frozen(np.minimum(s[keep], 1.0)),
        left_frame=_frozen(left * signs),
        right_frame=_frozen(right * signs),
        rank=int(keep.sum()))


def operator_tensor(op1, op2) -> SymOperator:
    '''A1 (x) A2 in the row-major product basis of BipartiteState.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    return SymOperator(np.kron(op1.matrix, op2.matrix))


def random_state(dims,
                 seed: int,
                 schmidt_rank: Optional[int] = None) -> BipartiteState:
    n1, n2 = _check_dims(dims)
    if schmidt_rank is not None and not 1 <= schmidt_rank <= min(n1, n2):
        raise ValidationError(
            f'Schmidt rank must be between 1 and {min(n1, n2)}, got {schmidt_rank}'
        )
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((n1, n2))
    if schmidt_rank is not None:
        u, s, vt = np.linalg.svd(coeffs, full_matrices=False)
        coeffs = (u[:, :schmidt_rank] * s[:schmidt_rank]) @ vt[:schmidt_rank]
    return BipartiteState.from_coeffs(coeffs, normalize=True)


def _random_frame(rng, n, r):
    q, rr = np.linalg.qr(rng.standard_normal((n, r)))
    # fix the QR sign freedom so frames are reproducible
    return q * np.where(np.diag(rr) < 0, -1.0, 1.0)


def state_from_schmidt(alphas: Sequence[float], dims,
                       seed: int = 0) -> BipartiteState:
    '''State with the given Schmidt coefficients and random orthonormal frames.'''
    n1, n2 = _check_dims(dims)
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size < 1 or alphas.size > min(n1, n2):
        raise ValidationError(
            f'Expect between 1 and {min(n1, n2)} Schmidt coefficients, got {alphas.size}'
        )
    if np.any(alphas <= 0):
        raise ValidationError('Schmidt coefficients must be positive')
    alphas = alphas / np.linalg.norm(alphas)
    rng = np.random.default_rng(seed)
    left = _random_frame(rng, n1, alphas.size)
    right = _random_frame(rng, n2, alphas.size)
    return BipartiteState.from_coeffs((left * alphas) @ right.T,
                                      normalize=True)


def bell_state(n: int = 2) -> BipartiteState:
    '''Maximally entangled state sum_i e_i (x) f_i / sqrt(n).'''
    if n < 1:
        raise ValidationError(f'Dimension must be positive, got {n}')
    return BipartiteState(np.eye(n) / np.sqrt(n))


def swap(state: BipartiteState) -> BipartiteState:
    '''The same state seen from H2 (x) H1.'''
    return BipartiteState(state.coeffs.T)


def random_observable(dim: int, seed: int) -> SymOperator:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim))
    return SymOperator((a + a.T) / 2)


def load_state(path) -> BipartiteState:
    '''Read a JSON state file {"dims": [n1, n2], "coeffs": [...]}.

    Coefficients within 1e-6 of unit norm are renormalized, others rejected.
    '''
    try:
        with open(path) as state_file:
            payload = json.load(state_file)
    except (OSError, ValueError) as e:
        raise ValidationError(f'Failed to read state file {path}: {e}')
    if not isinstance(payload, dict) or 'dims' not in payload or 'coeffs' not in payload:
        raise ValidationError(
            f'State file {path} must contain a JSON object with keys "dims" and "coeffs"'
        )
    n1, n2 = _check_dims(payload['dims'])
    try:
        coeffs = np.asarray(payload['coeffs'], dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f'Invalid coefficients in {path}: {e}')
    if coeffs.ndim != 1 or coeffs.size != n1 * n2:
        raise ValidationError(
            f'State file {path} declares dims ({n1}, {n2}) but lists {coeffs.size} coefficients'
        )
    if not np.all(np.isfinite(coeffs)):
        raise ValidationError(f'State file {path} contains non-finite coefficients')
    norm = np.linalg.norm(coeffs)
    if abs(norm - 1.0) > STATE_FILE_TOL:
        raise ValidationError(
            f'State in {path} is not normalized (norm {norm:.10g}, tolerance {STATE_FILE_TOL})'
        )
    env.logger.debug(f'Loaded state of dims ``({n1}, {n2})`` from {path}')
    return BipartiteState.from_coeffs(coeffs.reshape(n1, n2), normalize=True)


def save_state(state: BipartiteState, path) -> None:
    with open(path, 'w') as state_file:
        json.dump({
            'dims': list(state.dims),
            'coeffs': state.vector.tolist()
        },
                  state_file,
                  indent=2)
