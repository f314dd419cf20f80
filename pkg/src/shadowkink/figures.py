"""Figure rendering for the CLI report path.

Every command that writes delimited output also renders a PNG next to it
(disable with --no-figures).  The Agg backend keeps rendering headless and
the Software metadata tag is stripped so repeated runs produce identical
bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE = dict(dpi=150, metadata={"Software": None})


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def profile_figure(x, v, path, title, zero=None, ylabel="v"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, v, lw=1.2)
    ax.axhline(0.0, color="0.7", lw=0.6)
    if zero is not None and np.isfinite(zero):
        ax.axvline(zero, color="tab:red", ls="--", lw=0.8, label=f"zero = {zero:.5f}")
        ax.legend(frameon=False)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def pii_figure(sol, path):
    fig, ax = plt.subplots(figsize=(7, 4))
    s = sol.grid.nodes
    ax.plot(s, sol.values, lw=1.2, label=f"branch {sol.branch}")
    ax.plot(s[s < 0], np.sqrt(-s[s < 0] / 2.0), color="0.6", ls=":", lw=0.8, label=r"$\pm\sqrt{-s/2}$")
    ax.plot(s[s < 0], -np.sqrt(-s[s < 0] / 2.0), color="0.6", ls=":", lw=0.8)
    ax.axhline(0.0, color="0.85", lw=0.6)
    ax.set_xlabel("s")
    ax.set_ylabel("y")
    ax.set_title(f"Painlevé-II profile, alpha = {sol.alpha:g}")
    ax.legend(frameon=False)
    return _save(fig, path)


def blowup_figure(s, rescaled, minus_y, path, title):
    fig, (ax, axe) = plt.subplots(2, 1, figsize=(7, 5.5), sharex=True, height_ratios=[2, 1])
    ax.plot(s, rescaled, lw=1.2, label="rescaled kink")
    ax.plot(s, minus_y, lw=1.0, ls="--", label="-Y (matched branch)")
    ax.set_ylabel("profile")
    ax.legend(frameon=False)
    ax.set_title(title)
    axe.plot(s, np.abs(rescaled - minus_y), lw=0.9, color="tab:red")
    axe.set_yscale("log")
    axe.set_xlabel("s")
    axe.set_ylabel("|error|")
    return _save(fig, path)


def scaling_figure(report, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    eps = np.asarray(report.eps_list)
    offs = np.asarray(report.offsets)
    ax.loglog(eps, offs, "o", label="|rho + xi|")
    grid = np.linspace(np.log(eps.min()), np.log(eps.max()), 50)
    anchor = np.log(offs[-1]) - report.fitted_exponent * np.log(eps[-1])
    ax.loglog(np.exp(grid), np.exp(report.fitted_exponent * grid + anchor), "-", lw=0.9,
              label=f"slope = {report.fitted_exponent:.3f}")
    if report.predicted_offsets:
        ax.loglog(eps, report.predicted_offsets, "x", label="profile-zero prediction")
    ax.set_xlabel("eps")
    ax.set_ylabel("zero offset")
    ax.set_title(f"zero-location scaling (R$^2$ = {report.fit_r2:.4f})")
    ax.legend(frameon=False)
    return _save(fig, path)


def division_figure(report, path, title):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(report.x, report.w, lw=1.0)
    ax.axhline(1.0, color="0.7", lw=0.6, ls=":")
    ax.axhline(-1.0, color="0.7", lw=0.6, ls=":")
    ax.set_xlabel("x")
    ax.set_ylabel("w = v / eta")
    ax.set_title(title)
    return _save(fig, path)


def spectrum_figure(report, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    vals = np.asarray(report.eigenvalues)
    ax.stem(np.arange(1, len(vals) + 1), vals)
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(f"linearization spectrum, branch {report.branch}, alpha = {report.alpha:g}")
    return _save(fig, path)


def tanh_figure(x, v, template, rho, path, title):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, v, lw=1.2, label="kink")
    ax.plot(x, template, ls="--", lw=1.0, label="tanh template")
    ax.axvline(rho, color="0.7", lw=0.6)
    ax.set_xlabel("x")
    ax.set_ylabel("v")
    ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)
