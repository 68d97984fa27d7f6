#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

import json
import os

import nbformat
import pandas as pd
import pytest

from pcsft_workbench.converter import ReportToNotebookConverter
from pcsft_workbench.errors import ValidationError
from pcsft_workbench.test_utils import run_pcsft


@pytest.fixture()
def report_dir(tmp_path):
    pd.DataFrame([{
        'identity': 'Q1',
        'label': 'Z1,Z2',
        'classical_value': 1.002,
        'standard_error': 0.004,
        'analytic_classical': 1.0,
        'quantum_value': 1.0,
        'z_score': 0.5,
        'passed': True,
        'config_hash': 'c0ffee'
    }]).to_csv(tmp_path / 'summary.csv', index=False)
    with open(tmp_path / 'experiment.json', 'w') as experiment:
        json.dump({'config_hash': 'c0ffee', 'seed': 11, 'epsilon': 0.3}, experiment)
    pd.DataFrame({
        'epsilon': [0.1, 0.5],
        'feasible': [False, True],
        'error_Z1': [None, 0.001],
        'se_Z1': [None, 0.003]
    }).to_csv(tmp_path / 'sweep_eps.csv', index=False)
    return tmp_path


def test_report_to_notebook(report_dir):
    output = ReportToNotebookConverter().convert(report_dir, report_dir / 'out.ipynb')
    nb = nbformat.read(str(output), as_version=4)
    nbformat.validate(nb)
    assert nb.cells[0].cell_type == 'markdown'
    assert 'c0ffee' in nb.cells[0].source
    assert 'checks passed**: 1 of 1' in nb.cells[0].source
    # pipe table of the summary
    assert '| identity' in nb.cells[1].source
    assert 'pd.read_csv' in nb.cells[2].source
    assert any('error_Z1' in cell.source for cell in nb.cells if cell.cell_type == 'code')


def test_default_output(report_dir):
    output = ReportToNotebookConverter().convert(report_dir)
    assert os.path.isfile(os.path.join(report_dir, 'report.ipynb'))
    assert output.endswith('report.ipynb')


def test_missing_summary(tmp_path):
    with pytest.raises(ValidationError):
        ReportToNotebookConverter().convert(tmp_path)
    with pytest.raises(ValidationError):
        ReportToNotebookConverter().convert(tmp_path / 'missing')


def test_sweep_only_directory(report_dir):
    os.remove(report_dir / 'summary.csv')
    os.remove(report_dir / 'experiment.json')
    output = ReportToNotebookConverter().convert(report_dir)
    nb = nbformat.read(str(output), as_version=4)
    nbformat.validate(nb)
    assert 'checks passed' not in nb.cells[0].source
    assert 'Calibration error' in nb.cells[1].source
    assert nb.cells[2].source.startswith('import pandas as pd')
    assert 'error_Z1' in nb.cells[2].source


def test_sweep_then_export(bell_file, tmp_path):
    out = tmp_path / 'sweep'
    result = run_pcsft('sweep-eps', '--state', bell_file, '--grid', '0.5,1.0', '--n', 2000,
                       '--out', out)
    assert result.returncode == 0, result.stderr
    result = run_pcsft('notebook', out, tmp_path / 'sweep.ipynb')
    assert result.returncode == 0, result.stderr
    nb = nbformat.read(str(tmp_path / 'sweep.ipynb'), as_version=4)
    assert any('sweep[sweep.feasible].plot' in cell.source for cell in nb.cells)


def test_notebook_command(report_dir, tmp_path):
    result = run_pcsft('notebook', report_dir, tmp_path / 'cmd.ipynb')
    assert result.returncode == 0, result.stderr
    assert os.path.isfile(tmp_path / 'cmd.ipynb')
    assert run_pcsft('notebook', tmp_path / 'missing').returncode == 2


def test_verify_then_export(bell_config, tmp_path):
    assert run_pcsft('verify', '--config', bell_config, '--n', 5000).returncode == 0
    result = run_pcsft('notebook', tmp_path / 'bell_reports')
    assert result.returncode == 0, result.stderr
    nb = nbformat.read(str(tmp_path / 'bell_reports' / 'report.ipynb'), as_version=4)
    assert 'CROSS' in nb.cells[1].source
