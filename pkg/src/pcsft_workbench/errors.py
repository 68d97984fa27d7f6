#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

__all__ = [
    'PCSFTError', 'ValidationError', 'NotPositiveSemidefinite',
    'InseparableBackground', 'InternalConsistencyError'
]


class PCSFTError(Exception):
    '''Base class of all errors raised by pcsft-workbench.'''


class ValidationError(PCSFTError, ValueError):
    '''Malformed input: non-normalized vectors, asymmetric operators,
    mismatching dimensions, unreadable state files.'''


class NotPositiveSemidefinite(PCSFTError, ValueError):
    '''A covariance operator has eigenvalues below the PSD tolerance.'''

    def __init__(self, msg, lambda_min=None, deficit=None):
        super(NotPositiveSemidefinite, self).__init__(msg)
        self.lambda_min = lambda_min
        # amount of background strength missing to reach PSD
        self.deficit = deficit


class InseparableBackground(PCSFTError, RuntimeError):
    '''The intrinsic field of an entangled state cannot be separated from
    the background field.'''

    def __init__(self, msg, alphas=None):
        super(InseparableBackground, self).__init__(msg)
        self.alphas = alphas


class InternalConsistencyError(PCSFTError, RuntimeError):
    '''Two independent evaluations of the same identity disagree.'''

    def __init__(self, msg, first=None, second=None):
        super(InternalConsistencyError, self).__init__(msg)
        self.first = first
        self.second = second
