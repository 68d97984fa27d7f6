#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import argparse
import json
import os

import nbformat
import pandas as pd
from nbformat.v4 import new_code_cell, new_markdown_cell, new_notebook
from sos.utils import env
from tabulate import tabulate

from ._version import PCSFT_FULL_VERSION
from .errors import ValidationError

SUMMARY_FILE = 'summary.csv'
SWEEP_FILE = 'sweep_eps.csv'
EXPERIMENT_FILE = 'experiment.json'

SUMMARY_COLUMNS = [
    'identity', 'label', 'classical_value', 'standard_error',
    'analytic_classical', 'quantum_value', 'z_score', 'passed'
]


def _provenance(report_dir):
    filename = os.path.join(report_dir, EXPERIMENT_FILE)
    if not os.path.isfile(filename):
        return {}
    try:
        with open(filename) as experiment:
            return json.load(experiment)
    except ValueError as e:
        env.logger.warning(f'Ignoring unreadable {filename}: {e}')
        return {}


class ReportToNotebookConverter(object):

    def get_parser(self):
        parser = argparse.ArgumentParser(
            'pcsft notebook REPORT_DIR [OUTPUT]',
            description='''Export the summary, sweep table and provenance of a
                report directory as a Jupyter notebook (.ipynb).''')
        parser.add_argument('report_dir', help='''Directory written by pcsft verify
            or pcsft sweep-eps.''')
        parser.add_argument(
            'output',
            nargs='?',
            help='''Notebook to write, default to report.ipynb under REPORT_DIR.''')
        return parser

    def convert(self, report_dir, notebook_file=None, args=None, unknown_args=None):
        '''
        Convert a report directory to a notebook with the summary and sweep
        tables as markdown and code cells that reload the CSV files with pandas.
        Either table may be missing, not both.
        '''
        if unknown_args:
            raise ValidationError(f'Unrecognized parameter {unknown_args}')
        if not os.path.isdir(report_dir):
            raise ValidationError(f'Report directory {report_dir} does not exist')
        summary_file = os.path.join(report_dir, SUMMARY_FILE)
        sweep_file = os.path.join(report_dir, SWEEP_FILE)
        summary = pd.read_csv(summary_file) if os.path.isfile(summary_file) else None
        sweep = pd.read_csv(sweep_file) if os.path.isfile(sweep_file) else None
        if summary is None and sweep is None:
            raise ValidationError(
                f'No {SUMMARY_FILE} or {SWEEP_FILE} in report directory {report_dir}')
        if notebook_file is None:
            notebook_file = os.path.join(report_dir, 'report.ipynb')

        meta = _provenance(report_dir)
        abs_dir = os.path.abspath(report_dir)

        header = ['# PCSFT experiment report', '']
        for key in ('config_hash', 'seed', 'epsilon', 'n_samples', 'dims'):
            if key in meta:
                header.append(f'- **{key}**: `{meta[key]}`')
        table = summary if summary is not None else sweep
        for key in ('config_hash', 'seed'):
            if key not in meta and key in table.columns:
                header.append(f'- **{key}**: `{table[key].iloc[0]}`')
        if summary is not None:
            passed = int(summary['passed'].astype(bool).sum())
            header.append(f'- **checks passed**: {passed} of {len(summary)}')

        cells = [new_markdown_cell('\n'.join(header))]
        if summary is not None:
            columns = [x for x in SUMMARY_COLUMNS if x in summary.columns]
            cells.extend([
                new_markdown_cell(
                    tabulate(summary[columns], headers='keys', tablefmt='pipe',
                             showindex=False, floatfmt='.6g')),
                new_code_cell(
                    'import pandas as pd\n\n'
                    f'summary = pd.read_csv({os.path.join(abs_dir, SUMMARY_FILE)!r})\n'
                    'summary')
            ])

        if sweep is not None:
            errors = [x for x in sweep.columns if x.startswith('error_')]
            source = f'sweep = pd.read_csv({os.path.join(abs_dir, SWEEP_FILE)!r})\n'
            if summary is None:
                source = 'import pandas as pd\n\n' + source
            cells.extend([
                new_markdown_cell(
                    '## Calibration error against background strength\n\n' +
                    tabulate(sweep, headers='keys', tablefmt='pipe',
                             showindex=False, floatfmt='.6g')),
                new_code_cell(
                    source +
                    f'sweep[sweep.feasible].plot(x="epsilon", y={errors!r}, marker="o")')
            ])

        nb = new_notebook(
            cells=cells,
            metadata={
                'kernelspec': {
                    'display_name': 'Python 3',
                    'language': 'python',
                    'name': 'python3'
                },
                'pcsft_workbench': {
                    'version': PCSFT_FULL_VERSION
                }
            })
        with open(notebook_file, 'w') as notebook:
            nbformat.write(nb, notebook, 4)
        env.logger.info(f'Report {report_dir} exported to {notebook_file}')
        return notebook_file
