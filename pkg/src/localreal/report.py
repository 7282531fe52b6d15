"""Run reports: delimited output, JSON summaries, and companion figures.

CSV files are the reproducibility contract: floats are written with 17
significant digits so re-running a scenario reproduces them byte for byte.
Figures are best-effort companions and carry no determinism guarantee.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class RunReport:
    scenario: dict
    version: str
    tables: dict[str, Table] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    wall_clock_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, table: Table) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def write_summary(path: Path, report: RunReport) -> None:
    payload = {
        "scenario": _jsonable(report.scenario),
        "version": report.version,
        "results": _jsonable(report.results),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in report.checks],
        "wall_clock_s": report.wall_clock_s,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_report(report: RunReport, out_dir: Path, stem: str, plots: bool = True) -> list[Path]:
    """Write all tables, the summary, and (optionally) one figure; returns the paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in report.tables.items():
        suffix = "" if name == "main" else f"_{name}"
        path = out_dir / f"{stem}{suffix}.csv"
        write_csv(path, table)
        written.append(path)
    summary_path = out_dir / f"{stem}_summary.json"
    write_summary(summary_path, report)
    written.append(summary_path)
    if plots:
        figure_path = out_dir / f"{stem}.png"
        render_figure(report, figure_path)
        written.append(figure_path)
    return written


def _column(table: Table, name: str) -> np.ndarray:
    return np.array([row[table.columns.index(name)] for row in table.rows], dtype=float)


def render_figure(report: RunReport, path: Path) -> None:
    """One diagnostic figure per scenario kind, saved as PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kind = report.scenario.get("kind", "")
    main = report.tables.get("main")
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")

    if kind == "spin-corr" and main is not None:
        x = _column(main, "inner_product")
        y = _column(main, "quantum")
        ax.plot([-1, 1], [1, -1], lw=1, color="0.6", label="negated inner product")
        ax.plot(x, y, ".", ms=3, label="operator expectation")
        ax.set_xlabel("a . b")
        ax.set_ylabel("correlation")
        ax.legend()
    elif kind == "chsh" and main is not None:
        labels = ["(a,b)", "(a,b')", "(a',b)", "(a',b')"]
        values = [_column(main, c)[0] for c in ("corr_ab", "corr_ab_prime", "corr_a_prime_b", "corr_a_prime_b_prime")]
        ax.bar(labels, values, color="steelblue")
        ax.axhline(0.0, color="0.3", lw=0.8)
        ax.set_ylabel("correlation")
        ax.set_title(f"CHSH value {report.results.get('value', float('nan')):.9f}")
    elif kind == "lhv-verify" and main is not None:
        values = _column(main, "chsh")
        ax.hist(values, bins=min(40, max(5, len(values) // 3)), color="steelblue")
        ax.axvline(2.0, color="crimson", lw=1.2, label="classical bound")
        ax.set_xlabel("CHSH value")
        ax.set_ylabel("settings count")
        ax.legend()
    elif kind == "epr-construct" and main is not None:
        n = int(round(math.sqrt(len(main.rows))))
        diff = np.abs(_column(main, "difference")).reshape(n, n)
        im = ax.imshow(diff, origin="lower", aspect="auto", cmap="viridis")
        fig.colorbar(im, ax=ax, label="|process - rotated|")
        ax.set_xlabel("alpha2 grid index")
        ax.set_ylabel("alpha1 grid index")
    elif kind == "epr-sample" and main is not None:
        mean = _column(main, "mean")[0]
        se = _column(main, "std_error")[0]
        analytic = _column(main, "analytic")[0]
        ax.errorbar([0], [mean], yerr=[4 * se], fmt="o", capsize=6, label="estimate (4 s.e.)")
        ax.axhline(analytic, color="crimson", lw=1.2, label="analytic")
        ax.set_xticks([])
        ax.set_ylabel("correlation")
        ax.legend()
    elif kind == "spatial-scan" and main is not None:
        d = _column(main, "distance")
        floor = 1e-300
        ax.semilogy(d, np.maximum(_column(main, "g"), floor), "o-", label="g")
        ax.semilogy(d, np.maximum(_column(main, "residual"), floor), "s--", label="residual")
        ax.set_xlabel("shift distance")
        ax.set_ylabel("value")
        ax.legend()
    elif kind == "theorem4" and main is not None:
        product = _column(main, "product")
        diff = np.abs(_column(main, "difference"))
        ok = _column(main, "product_ok") > 0.5
        ax.semilogy(product[ok], np.maximum(diff[ok], 1e-18), "o", label="bounded")
        if np.any(~ok):
            ax.semilogy(product[~ok], np.maximum(diff[~ok], 1e-18), "x", color="crimson", label="unbounded")
        ax.axvline(1.0 / 3.0, color="0.4", lw=1, ls=":")
        ax.set_xlabel("g1 * g2")
        ax.set_ylabel("|model - localized|")
        ax.legend()
    elif kind == "context-check" and main is not None:
        labels = [str(row[main.columns.index("family")]) for row in main.rows]
        norms = np.maximum(_column(main, "worst_norm"), 1e-18)
        ax.barh(labels, norms, color="steelblue", log=True)
        ax.axvline(_column(main, "tolerance")[0], color="crimson", lw=1.2, label="tolerance")
        ax.set_xlabel("worst commutator norm")
        ax.legend()
    else:
        ax.text(0.5, 0.5, kind or "no table", ha="center", va="center")
        ax.set_axis_off()

    fig.savefig(path, dpi=120)
    plt.close(fig)
