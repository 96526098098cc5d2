import numpy as np

from basis import pairing_sweep, stolz_grid, sweep_csv
from diagnostics import ritt_constant, ritt_grid_csv
from enums import BasisKind
from plots import plot_contour, plot_resolvent_grid, plot_sequence_decay, plot_sweep
from squarefn import SqfSequence, sequence_csv
from stolz import StolzDomain, build_contour

PNG = b"\x89PNG"


def test_plot_sweep(tmp_path):
    domain = StolzDomain(2.0)
    grid = stolz_grid(domain, 2, 2)
    tables = pairing_sweep(domain, 1, BasisKind.WINDOWS, grid) + pairing_sweep(domain, 1, BasisKind.CANONICAL, grid)
    buf = plot_sweep(sweep_csv(tables, str(tmp_path / "sweep.csv")))
    assert buf.getvalue().startswith(PNG)


def test_plot_contour(tmp_path):
    buf = plot_contour(build_contour(2.0).nodes_csv(str(tmp_path / "contour.csv")))
    assert buf.getvalue().startswith(PNG)


def test_plot_resolvent_grid(tmp_path, diag_operator):
    est = ritt_constant(diag_operator(0.5, 0.25))
    buf = plot_resolvent_grid(ritt_grid_csv(est, str(tmp_path / "grid.csv")))
    assert buf.getvalue().startswith(PNG)


def test_plot_sequence_decay(tmp_path, diag_operator):
    seq = SqfSequence(diag_operator(0.5, 0.25), np.array([1.0, 1.0]))
    buf = plot_sequence_decay(sequence_csv(seq, str(tmp_path / "sequence.csv")))
    assert buf.getvalue().startswith(PNG)
