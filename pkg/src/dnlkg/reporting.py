"""Run persistence: config echo, delimited timeseries, summary and figures.

A run directory holds config.json, timeseries.csv (spec'd column order),
summary.json, and a figures/ subdirectory with matplotlib renderings of
the tracked quantities.  Floats are written with shortest round-trip
formatting so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import RunConfig, RunRecord, timeseries_columns  # noqa: E402


def _fmt(x: float) -> str:
    return repr(float(x))


def write_timeseries(path: Path, columns: list[str], rows: np.ndarray):
    lines = [",".join(columns)]
    for row in np.atleast_2d(rows):
        if row.size:
            lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_timeseries(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, rows


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def dump_json(path: Path, payload: dict):
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    )


def write_run(record: RunRecord, out_dir) -> Path:
    """Persist one record; returns the run directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(out / "config.json", record.config.as_dict())
    write_timeseries(out / "timeseries.csv", record.columns, record.rows)
    dump_json(out / "summary.json", dict(record.summary, meta=_clean_meta(record.meta)))
    return out


def _clean_meta(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if not isinstance(v, np.ndarray)}


def load_record(run_dir) -> RunRecord:
    """Rebuild a record from a persisted run directory."""
    run_dir = Path(run_dir)
    config = RunConfig.from_dict(json.loads((run_dir / "config.json").read_text()))
    columns, rows = read_timeseries(run_dir / "timeseries.csv")
    summary = {}
    meta = {}
    summary_path = run_dir / "summary.json"
    if summary_path.exists():
        summary = json.loads(summary_path.read_text())
        meta = summary.pop("meta", {})
    K = sum(1 for c in columns if c.startswith("z_"))
    return RunRecord(config=config, K=K, columns=columns, rows=rows, meta=meta, summary=summary)


def validate_record(run_dir) -> list[str]:
    """Schema checks for a persisted run; returns a list of problems."""
    problems = []
    run_dir = Path(run_dir)
    for name in ("config.json", "timeseries.csv", "summary.json"):
        if not (run_dir / name).exists():
            problems.append(f"missing {name}")
    if problems:
        return problems
    record = load_record(run_dir)
    expected = timeseries_columns(record.K)
    if record.columns != expected:
        problems.append(f"unexpected columns {record.columns}")
    if record.rows.size:
        t = record.column("t")
        if not np.all(np.diff(t) > 0):
            problems.append("sample times are not strictly increasing")
        if record.rows.shape[1] != len(expected):
            problems.append("row width does not match the header")
    return problems


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def render_figures(record: RunRecord, out_dir) -> list[Path]:
    """Render overview figures next to the delimited output."""
    out = Path(out_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)
    made = []
    if record.rows.size == 0:
        return made
    t = record.column("t")

    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5))
    ax = axes[0, 0]
    if record.K >= 1:
        for k in range(1, record.K + 1):
            ax.plot(t, record.column(f"z_{k}"), label=f"z_{k}")
        ax.set_ylabel("centers")
        ax.legend(fontsize=8)
    else:
        ax.semilogy(t, np.maximum(record.column("N"), 1e-300))
        ax.set_ylabel("state norm")
    ax.set_xlabel("t")

    ax = axes[0, 1]
    n = record.column("N")
    pos = n > 0
    if np.any(pos):
        ax.semilogy(t[pos], n[pos], label="N")
        ax.semilogy(t[pos], n[pos] * t[pos], label="N*t", ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("residual norm")
    ax.legend(fontsize=8)

    ax = axes[1, 0]
    ax.plot(t, record.column("E"))
    ax.set_xlabel("t")
    ax.set_ylabel("energy")

    ax = axes[1, 1]
    if record.K >= 1:
        for k in range(1, record.K + 1):
            a = np.abs(record.column(f"a_plus_{k}"))
            ax.semilogy(t, np.maximum(a, 1e-300), label=f"|a+_{k}|")
        ax.legend(fontsize=8)
        ax.set_ylabel("unstable amplitudes")
    else:
        ax.plot(t, record.column("dtu_L2"))
        ax.set_ylabel("||du/dt||")
    ax.set_xlabel("t")
    fig.tight_layout()
    p = out / "timeseries.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    made.append(p)

    if record.K >= 2:
        gaps = record.gaps()
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        for k in range(record.K - 1):
            ax1.plot(np.log(t[t > 0]), gaps[t > 0, k], label=f"gap {k + 1}")
            ax2.plot(t, np.exp(gaps[:, k]), label=f"exp(gap {k + 1})")
        fits = record.summary.get("fits", {}) if record.summary else {}
        slopes = fits.get("exp_gap_vs_t_slope")
        if slopes:
            ax2.set_title(f"d(exp gap)/dt ~ {slopes[0]:.3g}")
        ax1.set_xlabel("log t")
        ax1.set_ylabel("gap")
        ax1.legend(fontsize=8)
        ax2.set_xlabel("t")
        ax2.legend(fontsize=8)
        fig.tight_layout()
        p = out / "separation_law.png"
        fig.savefig(p, dpi=110)
        plt.close(fig)
        made.append(p)

    if record.K == 0:
        fig, ax = plt.subplots(figsize=(6, 3.6))
        pos = record.column("N") > 1e-300
        ax.semilogy(t[pos], record.column("N")[pos])
        fits = record.summary.get("fits", {}) if record.summary else {}
        rate = fits.get("envelope_rate")
        if rate is not None:
            ax.set_title(f"envelope decay rate ~ {rate:.3g}")
        ax.set_xlabel("t")
        ax.set_ylabel("state norm")
        fig.tight_layout()
        p = out / "decay.png"
        fig.savefig(p, dpi=110)
        plt.close(fig)
        made.append(p)
    return made
