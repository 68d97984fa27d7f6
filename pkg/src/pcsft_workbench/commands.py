#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import argparse
import json
import logging
import os
from itertools import product

import numpy as np
import pandas as pd
from sos.utils import env, get_traceback
from tabulate import tabulate

from ._version import PCSFT_FULL_VERSION, __report_version__
from .config import load_config
from .converter import EXPERIMENT_FILE, SUMMARY_FILE, SWEEP_FILE, ReportToNotebookConverter
from .correlation_lab import (calibrated_average, cross_linear_correlation,
                              verify_q1, verify_t3, verify_t4)
from .errors import (InseparableBackground, InternalConsistencyError,
                     NotPositiveSemidefinite, ValidationError)
from .gaussian_sampler import (dispersion, dispersion_standard_error,
                               factorize_covariance, sample_fields, write_batch)
from .hilbert_core import schmidt
from .pcsft_covariance import EPSILON_TOL, entangled, min_epsilon, regularized_covariance

VERBOSITY_LEVELS = {
    0: logging.ERROR,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
    4: logging.DEBUG,
    None: logging.INFO
}

SWEEP_MARGINS = (0.05, 0.1, 0.25, 0.5, 1.0)


def set_verbosity(verbosity):
    env.verbosity = verbosity
    env.logger.setLevel(VERBOSITY_LEVELS[verbosity])
    for handler in env.logger.handlers:
        handler.setLevel(VERBOSITY_LEVELS[verbosity])


def _epsilon(value):
    if value == 'auto':
        return value
    try:
        eps = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expect "auto" or a real number, got {value!r}')
    if eps < 0:
        raise argparse.ArgumentTypeError(f'background strength must be >= 0, got {value}')
    return eps


def _grid(value):
    try:
        return [_epsilon(float(x)) for x in value.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expect comma separated numbers, got {value!r}')


def _write_json(payload, filename):
    with open(filename, 'w') as output:
        json.dump(payload, output, indent=2)
    return filename


def _provenance(config, eps):
    return {
        'config_hash': config.config_hash,
        'seed': config.seed,
        'epsilon': eps,
        'report_version': __report_version__
    }


class PCSFT_Command(object):
    name = 'BaseCommand'
    help = ''

    def get_parser(self):
        raise RuntimeError(f'Unimplemented command {self.name}')

    def add_experiment_options(self, parser, sampling=True):
        parser.add_argument(
            '--config',
            help='''JSON experiment configuration. Options given on the command
                line override values of the file.''')
        parser.add_argument('--state', help='''JSON state file {"dims", "coeffs"}.''')
        parser.add_argument(
            '--out',
            help='''Output directory of reports, default to output_dir of the
                configuration (pcsft_reports).''')
        parser.add_argument(
            '--tol', type=float, help='''Tolerance of the PSD test, default 1e-10.''')
        if sampling:
            parser.add_argument('--seed', type=int, help='''Seed of the field sample.''')
            parser.add_argument(
                '--n', type=int, help='''Number of field samples (>= 100).''')
            parser.add_argument(
                '--epsilon',
                type=_epsilon,
                help='''Background strength, a number or "auto" for eps* + 0.05.''')
            parser.add_argument(
                '--workers', type=int, help='''Threads used to draw the samples.''')
        parser.add_argument(
            '-v',
            '--verbosity',
            type=int,
            choices=range(5),
            default=2,
            help='''Output error (0), warning (1), info (2) and debug (3, 4)
                information.''')

    def load_config(self, args):
        config = load_config(
            args.config,
            state=args.state,
            output_dir=args.out,
            tol=args.tol,
            seed=getattr(args, 'seed', None),
            n_samples=getattr(args, 'n', None),
            epsilon=getattr(args, 'epsilon', None),
            workers=getattr(args, 'workers', None))
        os.makedirs(config.output_dir, exist_ok=True)
        return config

    def apply(self, argv):
        parser = self.get_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return e.code
        set_verbosity(args.verbosity)
        try:
            return self.run(args)
        except ValidationError as e:
            env.logger.error(str(e))
            return 2
        except (NotPositiveSemidefinite, InternalConsistencyError,
                InseparableBackground) as e:
            env.logger.error(f'{e.__class__.__name__}: {e}')
            return 1
        except Exception as e:
            if env.verbosity > 2:
                env.logger.error(get_traceback())
            env.logger.error(f'Unexpected {e.__class__.__name__}: {e}')
            return 1

    def run(self, args):
        raise RuntimeError(f'Unimplemented command {self.name}')


class Verify_Command(PCSFT_Command):
    name = 'verify'
    help = 'Check the quantum-classical correspondence identities on one field sample'

    def get_parser(self):
        parser = argparse.ArgumentParser(
            prog='pcsft verify',
            description='''Sample the prequantum field of a state once and compare
                classical correlations of quadratic forms, calibrated averages
                and cross correlations with their quantum counterparts.''')
        self.add_experiment_options(parser)
        return parser

    def run(self, args):
        config = self.load_config(args)
        state = config.resolve_state()
        eps = config.resolve_epsilon(state)
        cov = regularized_covariance(state, eps)
        batch = sample_fields(
            factorize_covariance(cov), config.n_samples, config.seed,
            workers=config.workers)
        observables = config.resolve_observables(state)

        reports = []
        factorizable = not entangled(state, config.tol)
        side1 = [x for x in observables if x[0].side == 1]
        side2 = [x for x in observables if x[0].side == 2]
        for (spec1, op1), (spec2, op2) in product(side1, side2):
            label = f'{spec1.name},{spec2.name}'
            reports.append(verify_q1(state, eps, op1, op2, batch.n, batch.seed, batch=batch, label=label))
            reports.append(verify_t4(state, eps, op1, op2, batch.n, batch.seed, batch=batch, label=label))
            if factorizable:
                reports.append(verify_t3(state, eps, op1, op2, batch.n, batch.seed, batch=batch,
                                         label=label, tol=config.tol))
        for spec, op in observables:
            reports.append(calibrated_average(batch, op, eps, spec.side, state, label=spec.name))
        if config.probes is not None:
            u, v = config.probes.u, config.probes.v
        else:
            form = schmidt(state)
            u, v = form.left_frame[:, 0], form.right_frame[:, 0]
        reports.append(cross_linear_correlation(batch, u, v, state, label='probe'))

        provenance = _provenance(config, eps)
        report_dir = os.path.join(config.output_dir, 'reports')
        os.makedirs(report_dir, exist_ok=True)
        for idx, report in enumerate(reports):
            _write_json(
                dict(report.to_dict(), **provenance),
                os.path.join(report_dir, f'{idx:02d}_{report.identity}.json'))
        _write_json(
            dict(provenance,
                 n_samples=batch.n,
                 dims=list(state.dims),
                 config=config.model_dump(mode='json'),
                 version=PCSFT_FULL_VERSION),
            os.path.join(config.output_dir, EXPERIMENT_FILE))

        summary = pd.DataFrame([x.to_dict() for x in reports])
        summary['config_hash'] = config.config_hash
        summary.to_csv(os.path.join(config.output_dir, SUMMARY_FILE), index=False)
        print(
            tabulate(
                summary[[
                    'identity', 'label', 'classical_value', 'standard_error',
                    'quantum_value', 'z_score', 'passed'
                ]],
                headers='keys',
                showindex=False,
                floatfmt='.6g'))

        failed = [x for x in reports if not x.passed]
        if failed:
            env.logger.error('Failed checks: ' + ', '.join(
                f'{x.identity} {x.label} (z = {x.z_score:.2f}, residual {x.algebraic_residual:.3g})'
                for x in failed))
            return 1
        env.logger.info(f'All {len(reports)} checks passed, reports written to {config.output_dir}')
        return 0


class EntangleTest_Command(PCSFT_Command):
    name = 'entangle-test'
    help = 'Decide entanglement from the positivity of the naive covariance'

    def get_parser(self):
        parser = argparse.ArgumentParser(
            prog='pcsft entangle-test',
            description='''Print "entangled" or "separable" together with the
                smallest eigenvalue of the naive covariance, eps* and the Schmidt
                spectrum of the state.''')
        self.add_experiment_options(parser, sampling=False)
        return parser

    def run(self, args):
        config = self.load_config(args)
        state = config.resolve_state()
        verdict = entangled(state, config.tol)
        report = min_epsilon(state, config.tol)
        result = dict(
            report.to_dict(),
            verdict='entangled' if verdict else 'separable',
            dims=list(state.dims),
            tol=config.tol,
            config_hash=config.config_hash)
        print(result['verdict'])
        print(f'lambda_min: {report.lambda_min:.12g}')
        print(f'eps_star: {report.eps_star:.12g}')
        print('schmidt: ' + ' '.join(f'{x:.12g}' for x in report.schmidt_alphas))
        _write_json(result, os.path.join(config.output_dir, 'entangle_test.json'))
        return 0


class MinEps_Command(PCSFT_Command):
    name = 'min-eps'
    help = 'Print the smallest background strength of a state'

    def get_parser(self):
        parser = argparse.ArgumentParser(
            prog='pcsft min-eps',
            description='''Compute eps*, from the spectrum of the naive covariance
                and from the Schmidt coefficients.''')
        self.add_experiment_options(parser, sampling=False)
        return parser

    def run(self, args):
        config = self.load_config(args)
        report = dict(min_epsilon(config.resolve_state(), config.tol).to_dict(),
                      config_hash=config.config_hash)
        print(json.dumps(report, indent=2))
        _write_json(report, os.path.join(config.output_dir, 'min_eps.json'))
        return 0


class Sample_Command(PCSFT_Command):
    name = 'sample'
    help = 'Draw and export a sample of the prequantum field'

    def get_parser(self):
        parser = argparse.ArgumentParser(
            prog='pcsft sample',
            description='''Write samples of (phi1, phi2) as CSV with a sidecar JSON
                holding seed, background strength and covariance id.''')
        self.add_experiment_options(parser)
        return parser

    def run(self, args):
        config = self.load_config(args)
        state = config.resolve_state()
        eps = config.resolve_epsilon(state)
        batch = sample_fields(
            factorize_covariance(regularized_covariance(state, eps)),
            config.n_samples,
            config.seed,
            workers=config.workers)
        csv_file, meta_file = write_batch(
            batch, config.output_dir, config_hash=config.config_hash)
        print(csv_file)
        print(meta_file)
        return 0


class SweepEps_Command(PCSFT_Command):
    name = 'sweep-eps'
    help = 'Tabulate calibration error and dispersion against the background strength'

    def get_parser(self):
        parser = argparse.ArgumentParser(
            prog='pcsft sweep-eps',
            description='''Sample the field once per background strength of the grid
                and report calibration errors, dispersion and lambda_min. Grid
                points below eps* are reported as infeasible.''')
        parser.add_argument(
            '--grid',
            type=_grid,
            help='''Comma separated background strengths, default eps* plus
                0.05, 0.1, 0.25, 0.5 and 1.''')
        self.add_experiment_options(parser)
        return parser

    def run(self, args):
        config = self.load_config(args)
        state = config.resolve_state()
        observables = config.resolve_observables(state)
        report = min_epsilon(state, config.tol)
        grid = args.grid or [report.eps_star + x for x in SWEEP_MARGINS]

        rows = []
        for eps in grid:
            row = {
                'epsilon': eps,
                'feasible': eps >= report.eps_star - EPSILON_TOL,
                'lambda_min': report.lambda_min + eps
            }
            if not row['feasible']:
                env.logger.warning(
                    f'Background strength {eps:.6g} is below eps* = {report.eps_star:.6g}, not sampled')
                rows.append(row)
                continue
            batch = sample_fields(
                factorize_covariance(regularized_covariance(state, eps)),
                config.n_samples,
                config.seed,
                workers=config.workers)
            row['dispersion'] = dispersion(batch)
            row['dispersion_se'] = dispersion_standard_error(batch)
            for spec, op in observables:
                check = calibrated_average(batch, op, eps, spec.side, state, label=spec.name)
                row[f'error_{spec.name}'] = check.classical_value - check.quantum_value
                row[f'se_{spec.name}'] = check.standard_error
            rows.append(row)

        table = pd.DataFrame(rows)
        table['seed'] = config.seed
        table['config_hash'] = config.config_hash
        filename = os.path.join(config.output_dir, SWEEP_FILE)
        table.to_csv(filename, index=False)
        print(tabulate(table.drop(columns=['config_hash']), headers='keys',
                       showindex=False, floatfmt='.6g'))
        if not table['feasible'].any():
            env.logger.error(
                f'No grid point reaches eps* = {report.eps_star:.6g}, nothing sampled')
            return 1
        errors = [x for x in table.columns if x.startswith('error_')]
        z = np.abs(table.loc[table['feasible'], errors].to_numpy()) / table.loc[
            table['feasible'], [x.replace('error_', 'se_') for x in errors]].to_numpy()
        if np.any(z > 5):
            env.logger.warning(f'Calibration error exceeds 5 standard errors (max z {np.max(z):.2f})')
        env.logger.info(f'Sweep table written to {filename}')
        return 0


class Notebook_Command(PCSFT_Command):
    name = 'notebook'
    help = 'Export a report directory as a Jupyter notebook'

    def get_parser(self):
        parser = ReportToNotebookConverter().get_parser()
        parser.add_argument('-v', '--verbosity', type=int, choices=range(5), default=2)
        return parser

    def run(self, args):
        print(ReportToNotebookConverter().convert(args.report_dir, args.output))
        return 0


class PCSFT_Commands(object):
    commands = [
        Verify_Command, EntangleTest_Command, Sample_Command, MinEps_Command,
        SweepEps_Command, Notebook_Command
    ]
    names = [x.name for x in commands]

    def __init__(self):
        self._commands = {x.name: x() for x in self.commands}

    def get(self, name):
        return self._commands[name]

    def values(self):
        return self._commands.values()
