"""Delimited outputs and companion figures for the command-line reports.

Every report writes a CSV and renders a matplotlib figure next to it (same
stem, ``.png``).  The CSV is the machine contract; the figure is for eyes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _figure_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".png")


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_convergence(rows_by_case: dict, path) -> list[Path]:
    """Convergence table (one block of rows per case) plus an error plot."""
    path = _prepare(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        multi = len(rows_by_case) > 1
        header = ["N", "log10_err", "rate"]
        if multi:
            header = ["case"] + header
        writer.writerow(header)
        for case, rows in rows_by_case.items():
            for row in rows:
                rec = [row.n, f"{row.log10_error:.4f}", "" if row.rate is None else f"{row.rate:.2f}"]
                if multi:
                    rec = [case] + rec
                writer.writerow(rec)

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for case, rows in rows_by_case.items():
        ns = [row.n for row in rows]
        errs = [row.log10_error for row in rows]
        ax.plot(ns, errs, "o-", label=case)
    ns = [row.n for row in next(iter(rows_by_case.values()))]
    anchor = next(iter(rows_by_case.values()))[0].log10_error
    ref = [anchor - 3.0 * np.log10(n / ns[0]) for n in ns]
    ax.plot(ns, ref, "k--", lw=0.8, label="slope 3")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("boundary-layer spacings N")
    ax.set_ylabel(r"$\log_{10}\|e\|_\infty$")
    ax.legend()
    fig.tight_layout()
    fig_path = _figure_path(path)
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [path, fig_path]


def write_audit(reports, path) -> list[Path]:
    """Per-sample eigenvalue extremes of the two energy matrices."""
    path = _prepare(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "lambda_max_energy", "lambda_max_ref", "pass"])
        for rep in reports:
            writer.writerow(
                [
                    f"{rep.t:.6f}",
                    f"{rep.lambda_max_energy:.6e}",
                    f"{rep.lambda_max_ref:.6e}",
                    "PASS" if rep.passed else "FAIL",
                ]
            )

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ts = [rep.t for rep in reports]
    ax.plot(ts, [rep.lambda_max_energy for rep in reports], "o-", label=r"$\lambda_{max}$ (physical)")
    ax.plot(ts, [rep.lambda_max_ref for rep in reports], "s--", label=r"$\lambda_{max}$ (reference)")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("largest eigenvalue")
    ax.legend()
    fig.tight_layout()
    fig_path = _figure_path(path)
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [path, fig_path]


def write_freestream(results, histories, path) -> list[Path]:
    """Free-stream deviations per run plus deviation-over-time traces."""
    path = _prepare(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case", "u_inf", "filtered", "max_deviation", "pass"])
        for res in results:
            writer.writerow(
                [
                    res.case,
                    res.u_inf,
                    int(res.filtered),
                    f"{res.max_deviation:.3e}",
                    "PASS" if res.passed else "FAIL",
                ]
            )

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for label, hist in histories.items():
        if hist:
            ts, devs = zip(*hist)
            ax.semilogy(ts, np.maximum(devs, 1e-18), label=label)
    ax.axhline(1e-12, color="k", lw=0.8, ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|u - u_\infty\|_\infty$")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig_path = _figure_path(path)
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [path, fig_path]


def write_curvilinear(rows, path) -> Path:
    """Mapping-by-mapping divergence discrepancy and free-stream deviation."""
    path = _prepare(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mapping", "mode", "discrepancy", "fsp_deviation"])
        for rec in rows:
            writer.writerow(rec)
    return path


def write_sbp_report(entries, path) -> list[Path]:
    """SBP residuals per operator, with a bar chart."""
    path = _prepare(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["operator", "nodes", "sbp_residual"])
        for name, n, res in entries:
            writer.writerow([name, n, f"{res:.3e}"])

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    names = [e[0] for e in entries]
    ax.bar(names, [max(e[2], 1e-18) for e in entries])
    ax.set_yscale("log")
    ax.axhline(1e-13, color="k", lw=0.8, ls=":")
    ax.set_ylabel("SBP residual (max norm)")
    fig.tight_layout()
    fig_path = _figure_path(path)
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    return [path, fig_path]
