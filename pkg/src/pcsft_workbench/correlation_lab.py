#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Prequantum variables and the quantum-classical correspondence checks.

An observable A becomes the quadratic form f_A(phi) = (A phi, phi). For a
zero-mean Gaussian field

    E f_A1(phi1) f_A2(phi2) = Tr(D11 A1) Tr(D22 A2) + 2 Tr(D12 A2 D21 A1)

and with D12 = Psi the last term is twice the quantum product average. Every
check compares a Monte Carlo estimate with this analytic value (z-score) and
the analytic value with the quantum oracle (algebraic residual).
'''

from dataclasses import asdict, dataclass, replace
from itertools import product
from typing import Optional, Tuple

import numpy as np
from sos.utils import env

from .errors import InternalConsistencyError, ValidationError
from .gaussian_sampler import (SampleBatch, batch_covariance, batch_means,
                               factorize_covariance, sample_fields)
from .hilbert_core import BipartiteState, as_operator, hvector, reduced_density, sym_operator
from .pcsft_covariance import PSD_TOL, BlockCovariance, entangled, regularized_covariance
from .quantum_oracle import center, qm_average_product, qm_average_single, qm_covariance

__all__ = [
    'CorrelationReport', 'quadratic_form', 'quadratic_forms',
    'analytic_single_moment', 'analytic_product_moment',
    'fourth_moment_oracle', 'empirical_quadratic_covariance', 'verify_q1',
    'verify_t4', 'verify_t3', 'calibrated_average', 'cross_linear_correlation'
]

Z_THRESHOLD = 5.0
ALGEBRAIC_TOL = 1e-10
FACTORIZABLE_TOL = 1e-12
ORACLE_MAX_DIM = 12
IDENTITIES = ('Q1', 'T4', 'YY1', 'YY2', 'T3', 'CROSS')


@dataclass(frozen=True)
class CorrelationReport:
    identity: str
    classical_value: float
    standard_error: float
    analytic_classical: float
    quantum_value: float
    n: int
    seed: int
    epsilon: float
    covariance_id: str = ''
    label: str = ''

    @property
    def z_score(self) -> float:
        diff = abs(self.classical_value - self.analytic_classical)
        if self.standard_error > 0:
            return diff / self.standard_error
        return 0.0 if diff == 0 else float('inf')

    @property
    def significance(self) -> float:
        '''|classical value| in units of its standard error.'''
        if self.standard_error > 0:
            return abs(self.classical_value) / self.standard_error
        return 0.0 if self.classical_value == 0 else float('inf')

    @property
    def algebraic_residual(self) -> float:
        return abs(self.analytic_classical - self.quantum_value)

    @property
    def passed(self) -> bool:
        return self.z_score <= Z_THRESHOLD and self.algebraic_residual <= ALGEBRAIC_TOL * (
            1 + abs(self.quantum_value))

    def to_dict(self):
        info = asdict(self)
        info.update({
            'z_score': self.z_score,
            'algebraic_residual': self.algebraic_residual,
            'passed': self.passed
        })
        return info


def _side_fields(batch, side):
    if side == 1:
        return batch.phi1
    elif side == 2:
        return batch.phi2
    raise ValidationError(f'Side must be 1 or 2, got {side!r}')


def _check_dim(operator, n, what):
    if operator.dim != n:
        raise ValidationError(
            f'Observable of dimension {operator.dim} does not match {what} of dimension {n}'
        )


def quadratic_form(operator, phi) -> float:
    '''f_A(phi) = (A phi, phi).'''
    operator = sym_operator(operator)
    phi = hvector(phi)
    _check_dim(operator, phi.size, 'the field vector')
    return float(phi @ operator.matrix @ phi)


def quadratic_forms(operator, phis) -> np.ndarray:
    '''f_A evaluated on every row of phis.'''
    operator = sym_operator(operator)
    phis = np.asarray(phis, dtype=float)
    _check_dim(operator, phis.shape[1], 'the field samples')
    return np.sum((phis @ operator.matrix) * phis, axis=1)


def analytic_single_moment(cov: BlockCovariance, operator, side: int) -> float:
    '''E f_A(phi_side) = Tr(D_ii A).'''
    operator = sym_operator(operator)
    block = cov.d11 if side == 1 else cov.d22 if side == 2 else None
    if block is None:
        raise ValidationError(f'Side must be 1 or 2, got {side!r}')
    _check_dim(operator, block.shape[0], f'block D{side}{side}')
    return float(np.sum(block * operator.matrix))


def analytic_product_moment(cov: BlockCovariance, op1, op2) -> float:
    '''E f_A1(phi1) f_A2(phi2) from the Gaussian product-moment formula.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    return analytic_single_moment(cov, op1, 1) * analytic_single_moment(
        cov, op2, 2) + 2 * float(
            np.trace(cov.d12 @ op2.matrix @ cov.d21 @ op1.matrix))


def fourth_moment_oracle(cov: BlockCovariance, op1, op2) -> float:
    '''E f_A1(phi1) f_A2(phi2) summed index by index over Isserlis pairings.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    n1, n2 = cov.dims
    if n1 + n2 > ORACLE_MAX_DIM:
        raise ValidationError(
            f'Fourth-moment oracle is limited to total dimension {ORACLE_MAX_DIM}, got {n1 + n2}'
        )
    _check_dim(op1, n1, 'subsystem 1')
    _check_dim(op2, n2, 'subsystem 2')
    d = cov.full()
    a1, a2 = op1.matrix, op2.matrix
    total = 0.0
    for a, b in product(range(n1), repeat=2):
        for c, e in product(range(n2), repeat=2):
            k, l = n1 + c, n1 + e
            moment = d[a, b] * d[k, l] + d[a, k] * d[b, l] + d[a, l] * d[b, k]
            total += a1[a, b] * a2[c, e] * moment
    return total


def empirical_quadratic_covariance(batch: SampleBatch, op1, op2) -> Tuple[float, float]:
    '''Sample covariance of f_A1(phi1) and f_A2(phi2) with batch-means error.'''
    if batch.n < 2:
        raise ValidationError(f'Need at least 2 samples, got {batch.n}')
    return batch_covariance(
        quadratic_forms(op1, batch.phi1), quadratic_forms(op2, batch.phi2))


def _field_batch(state, cov, n, seed, batch, workers):
    if batch is None:
        return sample_fields(factorize_covariance(cov), n, seed, workers=workers)
    if batch.dims != state.dims:
        raise ValidationError(
            f'Batch of dims {batch.dims} does not belong to a state of dims {state.dims}'
        )
    if batch.covariance_id != cov.covariance_id:
        raise ValidationError(
            f'Batch was sampled from covariance {batch.covariance_id[:8]}, not {cov.covariance_id[:8]}'
        )
    return batch


def _log_report(report):
    if report.passed:
        env.logger.debug(
            f'{report.identity} {report.label}: classical {report.classical_value:.6g}, quantum {report.quantum_value:.6g}, z {report.z_score:.2f}'
        )
    else:
        env.logger.warning(
            f'{report.identity} {report.label} failed: classical {report.classical_value:.6g} +- {report.standard_error:.3g}, '
            f'analytic {report.analytic_classical:.6g}, quantum {report.quantum_value:.6g}')
    return report


def _covariance_report(identity, state, cov, op1, op2, quantum, n, seed,
                       batch, workers, label):
    batch = _field_batch(state, cov, n, seed, batch, workers)
    emp, se = empirical_quadratic_covariance(batch, op1, op2)
    analytic_cov = analytic_product_moment(cov, op1, op2) - analytic_single_moment(
        cov, op1, 1) * analytic_single_moment(cov, op2, 2)
    # real Hilbert spaces: classical covariance is twice the quantum value
    return CorrelationReport(
        identity=identity,
        classical_value=emp / 2,
        standard_error=se / 2,
        analytic_classical=analytic_cov / 2,
        quantum_value=quantum,
        n=batch.n,
        seed=batch.seed,
        epsilon=cov.epsilon,
        covariance_id=cov.covariance_id,
        label=label)


def verify_q1(state: BipartiteState,
              eps: float,
              op1,
              op2,
              n: int,
              seed: int,
              batch: Optional[SampleBatch] = None,
              workers: int = 1,
              label: str = '') -> CorrelationReport:
    '''1/2 cov(f_A1, f_A2) against <A1 (x) A2>_Psi.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    cov = regularized_covariance(state, eps)
    quantum = qm_average_product(op1, op2, state)
    return _log_report(
        _covariance_report('Q1', state, cov, op1, op2, quantum, n, seed, batch,
                           workers, label))


def verify_t4(state: BipartiteState,
              eps: float,
              op1,
              op2,
              n: int,
              seed: int,
              batch: Optional[SampleBatch] = None,
              workers: int = 1,
              label: str = '') -> CorrelationReport:
    '''1/2 cov(f_A01, f_A02) of centered observables against cov(A1, A2).'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    cov = regularized_covariance(state, eps)
    quantum = qm_covariance(op1, op2, state)
    return _log_report(
        _covariance_report('T4', state, cov,
                           center(op1, state, 1).centered,
                           center(op2, state, 2).centered, quantum, n, seed,
                           batch, workers, label))


def verify_t3(state: BipartiteState,
              eps: float,
              op1,
              op2,
              n: int,
              seed: int,
              batch: Optional[SampleBatch] = None,
              workers: int = 1,
              label: str = '',
              tol: float = PSD_TOL) -> CorrelationReport:
    '''Factorizable states: centered prequantum variables are uncorrelated.

    A state counts as factorizable when its Schmidt rank at tol is 1. The
    quantum covariance must then vanish up to the weight of the dropped
    Schmidt terms, and to 1e-12 for an exact product state.
    '''
    if entangled(state, tol):
        raise ValidationError('Uncorrelated centered variables require a factorizable state')
    report = verify_t4(state, eps, op1, op2, n, seed, batch, workers, label)
    alphas = np.linalg.svd(state.coeffs, compute_uv=False)
    residual = float(np.sqrt(np.sum(alphas[1:]**2)))
    bound = FACTORIZABLE_TOL + 16 * residual * np.linalg.norm(
        sym_operator(op1).matrix, 2) * np.linalg.norm(sym_operator(op2).matrix, 2)
    if abs(report.quantum_value) > bound:
        raise InternalConsistencyError(
            f'Quantum covariance {report.quantum_value!r} of a factorizable state is not zero',
            first=report.quantum_value,
            second=0.0)
    return replace(report, identity='T3')


def calibrated_average(batch: SampleBatch,
                       operator,
                       eps: float,
                       side: int,
                       state: BipartiteState,
                       label: str = '') -> CorrelationReport:
    '''E f_A(phi_side) - eps Tr A against <A>_Psi.'''
    operator = sym_operator(operator)
    if batch.n < 2:
        raise ValidationError(f'Need at least 2 samples, got {batch.n}')
    mean, se = batch_means(quadratic_forms(operator, _side_fields(batch, side)))
    shift = eps * float(np.trace(operator.matrix))
    block = reduced_density(state, side).matrix + eps * np.eye(operator.dim)
    return _log_report(
        CorrelationReport(
            identity='YY1' if side == 1 else 'YY2',
            classical_value=mean - shift,
            standard_error=se,
            analytic_classical=float(np.sum(block * operator.matrix)) - shift,
            quantum_value=qm_average_single(operator, state, side),
            n=batch.n,
            seed=batch.seed,
            epsilon=eps,
            covariance_id=batch.covariance_id,
            label=label))


def cross_linear_correlation(batch: SampleBatch,
                             u,
                             v,
                             state: BipartiteState,
                             label: str = '') -> CorrelationReport:
    '''E (u, phi1)(v, phi2) against (Psi v, u), the off-diagonal block.'''
    u, v = hvector(u), hvector(v)
    if (u.size, v.size) != batch.dims or batch.dims != state.dims:
        raise ValidationError(
            f'Probes of sizes ({u.size}, {v.size}) do not match batch dims {batch.dims} and state dims {state.dims}'
        )
    mean, se = batch_means((batch.phi1 @ u) * (batch.phi2 @ v))
    analytic = float(u @ as_operator(state) @ v)
    return _log_report(
        CorrelationReport(
            identity='CROSS',
            classical_value=mean,
            standard_error=se,
            analytic_classical=analytic,
            quantum_value=analytic,
            n=batch.n,
            seed=batch.seed,
            epsilon=batch.epsilon,
            covariance_id=batch.covariance_id,
            label=label))
