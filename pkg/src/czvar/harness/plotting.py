"""Figures rendered from a saved report (Agg backend, PNG files)."""
from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import ExperimentReport  # noqa: E402


def _save(fig, out_dir, name) -> str:
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_jump_profiles(report: ExperimentReport, out_dir) -> str | None:
    if not report.plotdata:
        return None
    curves = defaultdict(list)
    for r in report.plotdata:
        curves[(r["quantity"], r["points"], r["partition"], r["function"])].append(
            (r["lambda"], r["value"]))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    finest = max(k[1] for k in curves)
    for key, pts in sorted(curves.items(), key=lambda kv: str(kv[0])):
        if key[1] != finest:
            continue
        lam, val = np.array(sorted(pts)).T
        ladder = "dyadic" if key[2] is None else f"P={key[2]}"
        ax.semilogx(lam, val, lw=1, drawstyle="steps-post", label=f"f{key[3]} {ladder}")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\lambda\,\|\sqrt{N_\lambda}\|_2 / \|f\|_2$")
    ax.set_title(f"{report.experiment}, G={finest}")
    if len(curves) <= 24:
        ax.legend(fontsize=6, ncol=2)
    return _save(fig, out_dir, "jump_profiles.png")


def plot_refinement(report: ExperimentReport, out_dir) -> str | None:
    rows = [s for s in report.summary if "max_ratio" in s]
    if not rows:
        return None
    series = defaultdict(list)
    for s in rows:
        series[(s["quantity"], s["partition"])].append((s["points"], s["max_ratio"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for (q, p), pts in sorted(series.items(), key=lambda kv: str(kv[0])):
        g, v = np.array(sorted(pts)).T
        ax.semilogx(g, v, "o-", base=2, label=q if p is None else f"{q} P={p}")
    ax.set_xlabel("points per axis G")
    ax.set_ylabel("family-max ratio")
    ax.set_title(report.experiment)
    ax.legend(fontsize=7)
    return _save(fig, out_dir, "refinement.png")


def plot_surfaces(report: ExperimentReport, out_dir) -> list[str]:
    paths = []
    for entry in report.extra.get("surfaces", []):
        S = entry["surface"]
        m = np.array(S["values"])
        fig, axes = plt.subplots(1, 2, figsize=(11, 3.6))
        s = np.array(S["ss"])
        extent = (np.log2(s[0]), np.log2(s[-1]), S["js"][-1] + 0.5, S["js"][0] - 0.5)
        im = axes[0].imshow(m, aspect="auto", extent=extent)
        axes[0].set_title(f"{S['pair']} norms, G={entry['points']}")
        fig.colorbar(im, ax=axes[0])
        im = axes[1].imshow(np.array(entry["fit"]["ratios"]), aspect="auto", extent=extent)
        axes[1].set_title(f"entry / envelope, C={entry['fit']['constant']:.3g}")
        fig.colorbar(im, ax=axes[1])
        for ax in axes:
            ax.set_xlabel(r"$\log_2 s$")
            ax.set_ylabel("j")
        paths.append(_save(fig, out_dir, f"surface_{S['pair']}_{entry['points']}.png"))
    return paths


def plot_residuals(report: ExperimentReport, out_dir) -> str | None:
    canc = report.extra.get("cancellation")
    if not canc:
        return None
    h = np.array(canc["spacing"])
    r = np.array(canc["max_residual"])
    fig, ax = plt.subplots(figsize=(5, 4))
    if np.all(r > 0):
        ax.loglog(h, r, "o-", label="max |residual|")
        ax.loglog(h, r[0] * h / h[0], "k--", lw=0.8, label="first order")
        ax.legend()
    else:
        ax.plot(h, r, "o-")
    ax.set_xlabel("h")
    ax.set_ylabel("annulus residual")
    ax.set_title(report.config["kernel"]["id"])
    return _save(fig, out_dir, "residuals.png")


def plot_control(report: ExperimentReport, out_dir) -> str | None:
    ctl = report.extra.get("control")
    if not ctl:
        return None
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ctl["depths"], ctl["counts"], "o-")
    ax.set_xlabel("ladder depth m")
    ax.set_ylabel(rf"$N_{{{ctl['lambda']}}}$ at the center")
    ax.set_title(report.config["kernel"]["id"])
    return _save(fig, out_dir, "control.png")


def render_figures(report: ExperimentReport, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    out = [plot_jump_profiles(report, out_dir), plot_refinement(report, out_dir),
           plot_residuals(report, out_dir), plot_control(report, out_dir)]
    out.extend(plot_surfaces(report, out_dir))
    return [p for p in out if p]
