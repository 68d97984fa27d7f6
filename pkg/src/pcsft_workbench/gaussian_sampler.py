#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Zero-mean Gaussian fields with a prescribed, possibly singular, covariance.

Square roots come from the symmetric eigendecomposition. Standard normals are
drawn in fixed-size chunks, chunk k from child k of the seed's SeedSequence, so
the batch does not depend on how many workers produce the chunks.
'''

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from sos.utils import env

from ._version import __report_version__
from .errors import (InternalConsistencyError, NotPositiveSemidefinite,
                     ValidationError)
from .pcsft_covariance import BlockCovariance, FieldDecomposition, is_psd

__all__ = [
    'CovarianceFactor', 'SampleBatch', 'factorize_covariance',
    'white_noise_factor', 'sample_fields', 'sample_decomposed',
    'empirical_covariance', 'second_moment_standard_errors', 'dispersion',
    'dispersion_standard_error', 'batch_means', 'batch_covariance',
    'write_batch', 'read_batch'
]

FACTOR_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
CHUNK_SIZE = 8192
DEFAULT_BATCHES = 200


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CovarianceFactor:
    '''Root L with L L^T equal to the source covariance.'''
    root: np.ndarray
    source_dims: Tuple[int, int]
    clip_report: Tuple[float, ...]
    covariance_id: str
    epsilon: float = 0.0

    @property
    def rank(self) -> int:
        return self.root.shape[1]


@dataclass(frozen=True, eq=False)
class SampleBatch:
    phi1: np.ndarray
    phi2: np.ndarray
    seed: int
    n: int
    covariance_id: str
    epsilon: float = 0.0

    def __post_init__(self):
        phi1, phi2 = _frozen(self.phi1), _frozen(self.phi2)
        if phi1.ndim != 2 or phi2.ndim != 2:
            raise ValidationError('Field samples must be 2-dimensional arrays')
        if phi1.shape[0] != phi2.shape[0] or phi1.shape[0] != self.n:
            raise ValidationError(
                f'Sample counts disagree: {phi1.shape[0]}, {phi2.shape[0]} and n = {self.n}'
            )
        if not (np.all(np.isfinite(phi1)) and np.all(np.isfinite(phi2))):
            raise ValidationError('Field samples must be finite')
        object.__setattr__(self, 'phi1', phi1)
        object.__setattr__(self, 'phi2', phi2)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.phi1.shape[1], self.phi2.shape[1]

    def fields(self) -> np.ndarray:
        return np.hstack([self.phi1, self.phi2])


def factorize_covariance(cov: BlockCovariance,
                         tol: float = FACTOR_TOL) -> CovarianceFactor:
    '''Eigendecomposition root; eigenvalues within tol of zero are dropped.

    The clip report lists the negative ones among them, the eigenvalues in
    [-tol scale, 0) that were clipped to zero.
    '''
    if not cov.valid:
        env.logger.debug('Factorizing a covariance that was not tagged valid')
    matrix = cov.full()
    eigenvalues, vectors = np.linalg.eigh(matrix)
    scale = max(1.0, float(eigenvalues[-1]))
    if eigenvalues[0] < -tol * scale:
        raise NotPositiveSemidefinite(
            f'Covariance has eigenvalue {eigenvalues[0]:.6g} below -{tol:g} x {scale:.6g}',
            lambda_min=float(eigenvalues[0]),
            deficit=float(-eigenvalues[0]))
    small = np.abs(eigenvalues) <= tol * scale
    keep = ~small
    root = vectors[:, keep] * np.sqrt(eigenvalues[keep])
    error = float(np.max(np.abs(root @ root.T - matrix)))
    if error > RECONSTRUCTION_TOL * scale:
        raise InternalConsistencyError(
            f'Covariance root reconstructs with error {error:.3g}',
            first=error,
            second=RECONSTRUCTION_TOL * scale)
    clipped = small & (eigenvalues < 0)
    if clipped.any():
        env.logger.debug(
            f'Clipped {int(clipped.sum())} eigenvalue(s) to zero: {eigenvalues[clipped].tolist()}'
        )
    return CovarianceFactor(
        root=_frozen(root),
        source_dims=cov.dims,
        clip_report=tuple(float(x) for x in eigenvalues[clipped]),
        covariance_id=cov.covariance_id,
        epsilon=cov.epsilon)


def white_noise_factor(dims, eps: float) -> CovarianceFactor:
    '''Factor sqrt(eps) I of the background field with covariance eps I.'''
    if eps < 0:
        raise ValidationError(f'Background strength must be >= 0, got {eps}')
    n1, n2 = dims
    background = BlockCovariance(eps * np.eye(n1), np.zeros((n1, n2)),
                                 np.zeros((n2, n1)), eps * np.eye(n2),
                                 epsilon=eps,
                                 valid=True)
    root = np.sqrt(eps) * np.eye(n1 + n2) if eps > 0 else np.zeros(
        (n1 + n2, 0))
    return CovarianceFactor(
        root=_frozen(root),
        source_dims=(n1, n2),
        clip_report=(),
        covariance_id=background.covariance_id,
        epsilon=eps)


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError(f'Seed must be a non-negative integer, got {seed!r}')
    return int(seed)


def _draw(root, n, entropy, workers):
    starts = list(range(0, n, CHUNK_SIZE))
    children = np.random.SeedSequence(entropy).spawn(len(starts))

    def draw_chunk(k):
        size = min(CHUNK_SIZE, n - starts[k])
        z = np.random.default_rng(children[k]).standard_normal(
            (size, root.shape[1]))
        return z @ root.T

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(draw_chunk, range(len(starts))))
    else:
        chunks = [draw_chunk(k) for k in range(len(starts))]
    return np.vstack(chunks)


def sample_fields(factor: CovarianceFactor,
                  n: int,
                  seed: int,
                  workers: int = 1) -> SampleBatch:
    '''n samples phi = L z, z standard normal, split into (phi1, phi2).'''
    if n < 1:
        raise ValidationError(f'Sample count must be >= 1, got {n}')
    seed = _check_seed(seed)
    fields = _draw(factor.root, n, seed, workers)
    n1 = factor.source_dims[0]
    env.logger.debug(
        f'Sampled {n} fields of covariance ``{factor.covariance_id[:8]}`` with seed {seed}'
    )
    return SampleBatch(fields[:, :n1], fields[:, n1:], seed, n,
                       factor.covariance_id, factor.epsilon)


def sample_decomposed(decomposition: FieldDecomposition,
                      n: int,
                      seed: int,
                      workers: int = 1) -> SampleBatch:
    '''Sum of an intrinsic field sample and an independent background sample.'''
    if n < 1:
        raise ValidationError(f'Sample count must be >= 1, got {n}')
    seed = _check_seed(seed)
    intrinsic, eps = decomposition
    dims = intrinsic.dims
    intrinsic_factor = factorize_covariance(intrinsic)
    background_factor = white_noise_factor(dims, eps)
    fields = _draw(intrinsic_factor.root, n, seed, workers) + _draw(
        background_factor.root, n, [seed, 1], workers)
    total = BlockCovariance(intrinsic.d11 + eps * np.eye(dims[0]), intrinsic.d12,
                            intrinsic.d21, intrinsic.d22 + eps * np.eye(dims[1]),
                            epsilon=eps)
    return SampleBatch(fields[:, :dims[0]], fields[:, dims[0]:], seed, n,
                       total.covariance_id, eps)


def empirical_covariance(batch: SampleBatch) -> BlockCovariance:
    '''Uncentered second moments E phi_a phi_b; the model fixes E phi = 0.'''
    if batch.n < 2:
        raise ValidationError(f'Need at least 2 samples, got {batch.n}')
    fields = batch.fields()
    moments = fields.T @ fields / batch.n
    moments = (moments + moments.T) / 2
    return BlockCovariance.from_matrix(
        moments, batch.dims, epsilon=batch.epsilon, valid=is_psd(moments)[0])


def second_moment_standard_errors(cov, n: int) -> np.ndarray:
    '''Per-entry standard error sqrt((C_aa C_bb + C_ab^2) / n).'''
    matrix = cov.full() if isinstance(cov, BlockCovariance) else np.asarray(
        cov, dtype=float)
    diag = np.diag(matrix)
    return np.sqrt((np.outer(diag, diag) + matrix**2) / n)


def dispersion(batch: SampleBatch) -> float:
    '''Mean of |phi|^2; Tr C for exact covariance C.'''
    if batch.n < 1:
        raise ValidationError('Empty batch')
    return float(np.mean(np.sum(batch.fields()**2, axis=1)))


def dispersion_standard_error(batch: SampleBatch,
                              n_batches: int = DEFAULT_BATCHES) -> float:
    return batch_means(np.sum(batch.fields()**2, axis=1), n_batches)[1]


def batch_means(series, n_batches: int = DEFAULT_BATCHES) -> Tuple[float, float]:
    '''Mean of a series and its batch-means standard error.'''
    series = np.asarray(series, dtype=float).reshape(-1)
    if series.size < 2:
        raise ValidationError(f'Need at least 2 values, got {series.size}')
    count = min(n_batches, series.size)
    means = np.array([chunk.mean() for chunk in np.array_split(series, count)])
    return float(series.mean()), float(np.std(means, ddof=1) / np.sqrt(count))


def batch_covariance(x, y, n_batches: int = DEFAULT_BATCHES) -> Tuple[float, float]:
    '''Sample covariance of two series and its batch-means standard error.'''
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise ValidationError(f'Series lengths differ: {x.size} and {y.size}')
    if x.size < 2:
        raise ValidationError(f'Need at least 2 samples, got {x.size}')
    cov = float(np.sum((x - x.mean()) * (y - y.mean())) / (x.size - 1))
    count = min(n_batches, x.size // 2)
    if count < 2:
        products = (x - x.mean()) * (y - y.mean())
        return cov, float(np.std(products, ddof=1) / np.sqrt(x.size))
    covs = np.array([
        np.sum((bx - bx.mean()) * (by - by.mean())) / (bx.size - 1)
        for bx, by in zip(np.array_split(x, count), np.array_split(y, count))
    ])
    return cov, float(np.std(covs, ddof=1) / np.sqrt(count))


def _metadata_file(csv_file):
    return os.path.splitext(csv_file)[0] + '.json'


def write_batch(batch: SampleBatch,
                out_dir,
                basename: str = 'samples',
                config_hash: str = ''):
    '''Write the batch as CSV plus a sidecar JSON with its provenance.'''
    os.makedirs(out_dir, exist_ok=True)
    n1, n2 = batch.dims
    columns = [f'phi1_{i + 1}' for i in range(n1)] + [f'phi2_{j + 1}' for j in range(n2)]
    frame = pd.DataFrame(batch.fields(), columns=columns)
    frame.insert(0, 'sample_index', np.arange(batch.n))
    csv_file = os.path.join(out_dir, f'{basename}.csv')
    frame.to_csv(csv_file, index=False, float_format='%.17g')
    meta_file = _metadata_file(csv_file)
    with open(meta_file, 'w') as meta:
        json.dump({
            'seed': batch.seed,
            'n': batch.n,
            'covariance_id': batch.covariance_id,
            'epsilon': batch.epsilon,
            'dims': [n1, n2],
            'config_hash': config_hash,
            'report_version': __report_version__
        },
                  meta,
                  indent=2)
    env.logger.info(f'Samples saved to {csv_file}')
    return csv_file, meta_file


def read_batch(csv_file) -> SampleBatch:
    try:
        with open(_metadata_file(csv_file)) as meta:
            metadata = json.load(meta)
        frame = pd.read_csv(csv_file)
        n1, n2 = metadata['dims']
        phi1 = frame[[f'phi1_{i + 1}' for i in range(n1)]].to_numpy()
        phi2 = frame[[f'phi2_{j + 1}' for j in range(n2)]].to_numpy()
        seed, n = metadata['seed'], metadata['n']
        covariance_id, epsilon = metadata['covariance_id'], metadata['epsilon']
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ValidationError(f'Failed to read sample batch {csv_file}: {e!r}')
    return SampleBatch(phi1, phi2, seed, n, covariance_id, epsilon)
