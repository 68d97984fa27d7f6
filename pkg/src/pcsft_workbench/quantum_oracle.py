#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Exact quantum averages and covariances of a pure bipartite state.

These values are the reference every classical estimate is compared against.
Product averages are always evaluated twice, as Tr(Psi A2 Psi* A1) and as the
inner product (A1 (x) A2 Psi, Psi), and the two must agree.
'''

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sos.utils import env

from .errors import InternalConsistencyError, ValidationError
from .hilbert_core import (BipartiteState, SymOperator, as_operator,
                           operator_tensor, reduced_density, sym_operator)

__all__ = [
    'CenteredObservable', 'ProductAverage', 'qm_average_single',
    'product_average_routes', 'qm_average_product', 'center', 'qm_covariance'
]

IDENTITY_TOL = 1e-10


class ProductAverage(NamedTuple):
    value: float
    trace_route: float
    inner_product_route: float


@dataclass(frozen=True, eq=False)
class CenteredObservable:
    original: SymOperator
    mean: float
    centered: SymOperator


def _check_side(operator, state, side):
    if side not in (1, 2):
        raise ValidationError(f'Side must be 1 or 2, got {side!r}')
    n = state.dims[side - 1]
    if operator.dim != n:
        raise ValidationError(
            f'Observable of dimension {operator.dim} does not act on subsystem {side} of dimension {n}'
        )


def _agree(a, b):
    return abs(a - b) <= IDENTITY_TOL * (1 + abs(b))


def qm_average_single(operator, state: BipartiteState, side: int) -> float:
    '''<A>_Psi for an observable on one subsystem, Tr(rho^(side) A).'''
    operator = sym_operator(operator)
    _check_side(operator, state, side)
    rho = reduced_density(state, side)
    return float(np.sum(rho.matrix * operator.matrix))


def product_average_routes(op1, op2, state: BipartiteState) -> ProductAverage:
    '''Both evaluations of <A1 (x) A2>_Psi.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    _check_side(op1, state, 1)
    _check_side(op2, state, 2)
    psi = as_operator(state)
    trace_route = float(np.trace(psi @ op2.matrix @ psi.T @ op1.matrix))
    vec = state.vector
    inner = float(vec @ (operator_tensor(op1, op2).matrix @ vec))
    if not _agree(trace_route, inner):
        raise InternalConsistencyError(
            f'Trace route {trace_route!r} and inner product route {inner!r} of the product average disagree',
            first=trace_route,
            second=inner)
    return ProductAverage(inner, trace_route, inner)


def qm_average_product(op1, op2, state: BipartiteState) -> float:
    routes = product_average_routes(op1, op2, state)
    env.logger.debug(
        f'Product average: trace route ``{routes.trace_route:.15g}``, inner product route ``{routes.inner_product_route:.15g}``'
    )
    return routes.value


def center(operator, state: BipartiteState, side: int) -> CenteredObservable:
    '''A_0 = A - <A>_Psi I, using the exact quantum mean.'''
    operator = sym_operator(operator)
    mean = qm_average_single(operator, state, side)
    centered = SymOperator(operator.matrix - mean * np.eye(operator.dim))
    return CenteredObservable(original=operator, mean=mean, centered=centered)


def qm_covariance(op1, op2, state: BipartiteState) -> float:
    '''<A1 (x) A2> - <A1><A2>, cross-checked against <A01 (x) A02>.'''
    op1, op2 = sym_operator(op1), sym_operator(op2)
    direct = qm_average_product(op1, op2, state) - qm_average_single(
        op1, state, 1) * qm_average_single(op2, state, 2)
    centered = qm_average_product(
        center(op1, state, 1).centered,
        center(op2, state, 2).centered, state)
    if not _agree(direct, centered):
        raise InternalConsistencyError(
            f'Quantum covariance {direct!r} differs from the product average of centered observables {centered!r}',
            first=direct,
            second=centered)
    return direct
