"""SVG figures for reports (matplotlib, non-interactive backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no date stamp keep the files byte-stable
plt.rcParams["svg.hashsalt"] = "bihilb"


def _save(fig, path):
    path = Path(path)
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def heatmap_svg(xs, vals, path, title="real spectral surface slice"):
    """Signed log-scaled Moore determinant over a coordinate plane, with its zero set."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    shown = np.sign(vals) * np.log1p(np.abs(vals))
    im = ax.pcolormesh(xs, xs, shown, cmap="RdBu_r", shading="auto")
    ax.contour(xs, xs, vals, levels=[0.0], colors="k", linewidths=0.8)
    fig.colorbar(im, ax=ax, label="sign(d) log(1 + |d|)")
    ax.set_xlabel("x_a")
    ax.set_ylabel("x_b")
    ax.set_title(title)
    return _save(fig, path)


def drift_svg(iso: dict, path):
    """Per-zeta drift of the characteristic coefficients of L(zeta)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    drift = np.asarray(iso["drift"], dtype=float)
    labels = [f"{z[0]:+.2f}{z[1]:+.2f}i" for z in iso["zeta"]]
    for j in range(drift.shape[1]):
        ax.semilogy(range(len(labels)), np.maximum(drift[:, j], 1e-18), "o-", label=f"coefficient {j + 1}")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, fontsize=7)
    ax.set_ylabel("max variation along the flow")
    ax.set_title("isospectral drift")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def profiles_svg(d, path):
    """f_a(t) = |T_a(t)| (Frobenius norm / sqrt 2) over the grid."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    norms = np.linalg.norm(d.samples, axis=(2, 3)) / np.sqrt(2)
    for a in range(4):
        ax.plot(d.grid, norms[:, a], label=f"T{a}")
    ax.set_xlabel("t")
    ax.set_ylabel("|T_a| / sqrt 2")
    ax.set_title(f"Nahm data, k = {d.k}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)
