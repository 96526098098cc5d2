"""
Plot recipes over the CSV side files. Each returns a PNG buffer.
"""
import csv
import io
import logging

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

logger = logging.getLogger(__name__)


def _read_csv(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def _to_png(fig):
    plt.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format='png', bbox_inches='tight', dpi=150)
    buf.seek(0)
    plt.close(fig)
    return buf


def plot_sweep(path):
    """Pairing l1 over the sweep grid, one panel per basis, colored on a log scale."""
    rows = _read_csv(path)
    kinds = sorted({r['basis'] for r in rows})
    fig, axes = plt.subplots(1, max(len(kinds), 1), figsize=(5 * max(len(kinds), 1), 4), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        sel = [r for r in rows if r['basis'] == kind and r['l1'] not in ('nan', '')]
        x = np.array([float(r['re_z']) for r in sel])
        y = np.array([float(r['im_z']) for r in sel])
        l1 = np.array([float(r['l1']) for r in sel])
        points = ax.scatter(x, y, c=np.log10(l1), s=8, cmap='viridis')
        fig.colorbar(points, ax=ax, label='log10 l1')
        ax.set_title(kind)
        ax.set_xlabel('Re z')
        ax.set_ylabel('Im z')
        ax.set_aspect('equal')
    return _to_png(fig)


def plot_contour(path):
    rows = _read_csv(path)
    x = [float(r['re_z']) for r in rows]
    y = [float(r['im_z']) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(x, y, '.', markersize=2)
    ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, ls='--', color='grey'))
    ax.set_aspect('equal')
    ax.set_title(f'Contour nodes ({len(rows)})')
    return _to_png(fig)


def plot_resolvent_grid(path):
    """|lambda - 1| * ||R(lambda, T)|| against |lambda|."""
    rows = _read_csv(path)
    lam = np.array([complex(float(r['re_lambda']), float(r['im_lambda'])) for r in rows])
    norms = np.array([float(r['norm']) for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(np.abs(lam) - 1.0, np.abs(lam - 1.0) * norms, '.', markersize=3)
    ax.set_xlabel('|lambda| - 1')
    ax.set_ylabel('|lambda - 1| ||R(lambda, T)||')
    return _to_png(fig)


def plot_sequence_decay(path):
    rows = _read_csv(path)
    k = np.array([float(r['k']) for r in rows])
    v = np.array([float(r['norm']) for r in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(k, np.maximum(v, 1e-300))
    ax.set_xlabel('k')
    ax.set_ylabel('||v_k||')
    return _to_png(fig)
