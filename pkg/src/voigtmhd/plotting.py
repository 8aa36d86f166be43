"""Report figures, rendered off-screen to PNG files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _positive(values):
    v = np.asarray(values, dtype=float)
    return np.where(v > 0, v, np.nan)


def plot_relaxation(records, checkpoints, path):
    t = np.array([r.t for r in records])
    fig, (ax_e, ax_d) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    ax_e.plot(t, [r.e_u_alpha for r in records], label="kinetic (alpha-norm)")
    ax_e.plot(t, [r.e_b_alpha for r in records], label="magnetic (alpha-norm)")
    ax_e.plot(t, [r.dissipation_cum for r in records], "--", label="cumulative dissipation")
    ax_e.set_ylabel("energy")
    ax_e.legend(loc="best", fontsize=8)

    ax_d.semilogy(t, _positive([r.equilibrium_defect for r in records]), label="equilibrium defect")
    ax_d.semilogy(t, _positive([r.mhs_residual for r in records]), label="MHS residual")
    ax_d.semilogy(t, _positive([r.u_h1 for r in records]), label="||u||_1")
    if checkpoints:
        ax_d.semilogy([c.t for c in checkpoints], _positive([c.defect for c in checkpoints]),
                      "ko", label="window checkpoints")
    ax_d.set_xlabel("t")
    ax_d.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_growth(series, path, fit=None):
    t = np.asarray(series.t)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ok = ~np.asarray(series.aliased, dtype=bool)
    ax.semilogy(t[ok], series.axis_gradient[ok], label="axis gradient")
    ax.semilogy(t[ok], series.global_gradient[ok], "--", label="global max gradient")
    ax.semilogy(t, np.exp(t), ":", color="gray", label="exp(t)")
    if fit is not None:
        rate, pref, _ = fit
        ax.semilogy(t, pref * np.exp(rate * t), "k-", lw=0.8,
                    label=f"fit {pref:.3f} exp({rate:.4f} t)")
    if (~ok).any():
        ax.axvline(t[~ok][0], color="red", lw=0.8, label="aliasing cutoff")
    ax.set_xlabel("t")
    ax.set_ylabel("|grad B3|")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
