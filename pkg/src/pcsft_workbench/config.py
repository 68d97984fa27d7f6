#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.
'''Experiment configuration read from one JSON file.

Command line flags override values of the file. Everything a report needs to
be reproduced is in the resolved configuration, whose hash is written into
every report file.
'''

import json
import os
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator
from sos.targets import textMD5
from sos.utils import env

from .errors import ValidationError
from .hilbert_core import (BipartiteState, SymOperator, bell_state, load_state,
                           random_observable, random_state, state_from_schmidt)
from .pcsft_covariance import AUTO_EPSILON_MARGIN, default_epsilon

__all__ = [
    'StateSpec', 'ObservableSpec', 'ProbeSpec', 'ExperimentConfig',
    'load_config', 'alternating_diagonal'
]


def alternating_diagonal(dim: int) -> SymOperator:
    '''diag(1, -1, 1, -1, ...), the built-in observable.'''
    return SymOperator(np.diag([(-1.0)**i for i in range(dim)]))


class StateSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['random', 'bell', 'product', 'schmidt'] = 'random'
    dims: Tuple[int, int] = (2, 2)
    seed: int = Field(0, ge=0)
    schmidt_rank: Optional[int] = Field(None, ge=1)
    alphas: Optional[List[float]] = None

    def build(self) -> BipartiteState:
        if self.kind == 'bell':
            if self.dims[0] != self.dims[1]:
                raise ValidationError(
                    f'A Bell-like state needs equal dimensions, got {self.dims}')
            return bell_state(self.dims[0])
        if self.kind == 'product':
            return random_state(self.dims, self.seed, schmidt_rank=1)
        if self.kind == 'schmidt':
            if not self.alphas:
                raise ValidationError('State kind "schmidt" requires "alphas"')
            return state_from_schmidt(self.alphas, self.dims, self.seed)
        return random_state(self.dims, self.seed, self.schmidt_rank)


class ObservableSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str
    side: Literal[1, 2]
    kind: Literal['matrix', 'diag', 'random'] = 'diag'
    matrix: Optional[List[List[float]]] = None
    values: Optional[List[float]] = None
    seed: int = Field(0, ge=0)

    def build(self, dim: int) -> SymOperator:
        if self.kind == 'matrix':
            if self.matrix is None:
                raise ValidationError(f'Observable {self.name} of kind "matrix" has no "matrix"')
            operator = SymOperator(self.matrix)
        elif self.kind == 'random':
            operator = random_observable(dim, self.seed)
        elif self.values is not None:
            operator = SymOperator(np.diag(self.values))
        else:
            operator = alternating_diagonal(dim)
        if operator.dim != dim:
            raise ValidationError(
                f'Observable {self.name} has dimension {operator.dim}, subsystem {self.side} has dimension {dim}'
            )
        return operator


class ProbeSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    u: List[float]
    v: List[float]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    state: Union[str, StateSpec] = Field(default_factory=StateSpec)
    observables: List[ObservableSpec] = Field(default_factory=list)
    probes: Optional[ProbeSpec] = None
    epsilon: Union[Literal['auto'], float] = 'auto'
    n_samples: int = Field(200000, ge=100)
    seed: int = Field(0, ge=0)
    tol: float = Field(1e-10, gt=0, le=1e-6)
    output_dir: str = 'pcsft_reports'
    workers: int = Field(1, ge=1)

    @field_validator('epsilon')
    @classmethod
    def _non_negative(cls, value):
        if value != 'auto' and value < 0:
            raise ValueError(f'epsilon must be "auto" or >= 0, got {value}')
        return value

    @property
    def config_hash(self) -> str:
        # where reports go and how many threads draw samples do not change results
        return textMD5(
            json.dumps(
                self.model_dump(mode='json', exclude={'output_dir', 'workers'}),
                sort_keys=True))

    def resolve_state(self) -> BipartiteState:
        if isinstance(self.state, str):
            return load_state(self.state)
        return self.state.build()

    def resolve_observables(self, state: BipartiteState) -> List[Tuple[ObservableSpec, SymOperator]]:
        specs = self.observables or [
            ObservableSpec(name='Z1', side=1),
            ObservableSpec(name='Z2', side=2)
        ]
        return [(spec, spec.build(state.dims[spec.side - 1])) for spec in specs]

    def resolve_epsilon(self, state: BipartiteState) -> float:
        if self.epsilon == 'auto':
            eps = default_epsilon(state, AUTO_EPSILON_MARGIN)
            env.logger.info(f'Using background strength eps = ``{eps:.6g}``')
            return eps
        return float(self.epsilon)


def load_config(filename: Optional[str] = None, **overrides) -> ExperimentConfig:
    '''Read the JSON config file (if any) and apply non-None overrides.

    A relative state path in the file is taken relative to the file.
    '''
    payload = {}
    if filename is not None:
        try:
            with open(filename) as config_file:
                payload = json.load(config_file)
        except (OSError, ValueError) as e:
            raise ValidationError(f'Failed to read configuration {filename}: {e}')
        if not isinstance(payload, dict):
            raise ValidationError(f'Configuration {filename} must contain a JSON object')
        state = payload.get('state')
        if isinstance(state, str) and not os.path.isabs(state):
            payload['state'] = os.path.join(
                os.path.dirname(os.path.abspath(filename)), state)
    payload.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(payload)
    except pydantic.ValidationError as e:
        raise ValidationError(f'Invalid configuration: {e}')
