"""Writing run artefacts: trajectory CSVs, check reports, plots, manifest.

All files are deterministic for fixed inputs: CSV floats use repr, the
manifest has no timestamps, and SVG output uses a fixed hash salt with the
date metadata removed.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import ExperimentResult
from .montecarlo import McResult


def _cell(v):
    if isinstance(v, np.generic):
        v = v.item()
    return repr(v) if isinstance(v, float) else v


def _write_rows(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(v) for k, v in r.items()})
    path.write_text(buf.getvalue(), encoding="ascii")


def _plot(result: ExperimentResult, out: Path, formats) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fc = result.trajectories.get("fold_change")
    if fc is None:
        tr = result.trajectories.get("channel")
        if tr is None:
            return []
        fc, ylabel, xlabel, scale = tr, "alpha-factor at receiver (nM)", "time (s)", 60.0
    else:
        ylabel, xlabel, scale = "fold change over basal", "time (min)", 1.0
    with plt.rc_context({"svg.hashsalt": "yeastmc", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(len(fc.species_names), 1, sharex=True,
                                 figsize=(7, 2.6 * len(fc.species_names)), squeeze=False)
        segs = result.stimulus.segments
        for ax, name in zip(axes[:, 0], fc.species_names):
            # induction windows green, repression windows grey
            for i, (a, b, _) in enumerate(segs):
                ax.axvspan(a * scale, b * scale, color="tab:green", alpha=0.25, lw=0)
                nxt = segs[i + 1][0] if i + 1 < len(segs) else fc.times[-1]
                if nxt > b:
                    ax.axvspan(b * scale, nxt * scale, color="0.85", alpha=0.5, lw=0)
            ax.plot(fc.times * scale, fc.column(name), color="tab:blue", lw=1.2)
            if result.events is not None and name == result.config.events.species:
                for t in result.events.event_times:
                    ax.axvline(t * scale, color="tab:red", lw=0.8, ls="--")
            ax.set_ylabel(f"{name}\n{ylabel}")
        axes[-1, 0].set_xlabel(xlabel)
        axes[0, 0].set_title(f"{result.config.scenario} / {result.config.strain}")
        fig.tight_layout()
        paths = []
        for fmt in formats:
            p = out / f"fold_change.{fmt}"
            meta = {"Date": None} if fmt == "svg" else ({"Software": None} if fmt == "png" else None)
            fig.savefig(p, format=fmt, metadata=meta)
            paths.append(p)
        plt.close(fig)
    return paths


def build_manifest(result: ExperimentResult, files: list[str]) -> dict:
    cfg = result.config
    import scipy
    return {
        "yeastmc_version": __version__,
        "scenario": cfg.scenario,
        "strain": cfg.strain,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "config": cfg.to_dict(),
        "parameter_files": [{"path": pf.path, "version": pf.version, "sha256": pf.sha256}
                            for pf in result.param_files],
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
        "checks_passed": result.passed,
        "files": sorted(files),
    }


def emit_outputs(result: ExperimentResult, out_dir=None) -> list[Path]:
    """Write every artefact of ``result`` into ``out_dir`` (config default).

    Returns the written paths. Raises ``OSError`` naming the path when the
    directory cannot be written.
    """
    cfg = result.config
    out = Path(out_dir if out_dir is not None else cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    written: list[Path] = []
    try:
        for name, traj in result.trajectories.items():
            p = out / f"{name}.csv"
            traj.to_csv(p)
            written.append(p)
        for name, table in result.tables.items():
            p = out / f"{name}.csv"
            if isinstance(table, McResult):
                table.to_csv(p)
            elif table:
                _write_rows(p, table)
            else:
                continue
            written.append(p)
        if result.checks:
            p = out / "checks.csv"
            _write_rows(p, [c.as_row() for c in result.checks])
            written.append(p)
        if result.events is not None:
            p = out / "events.csv"
            ev = result.events
            _write_rows(p, [{"event": i + 1, "time_min": t} for i, t in enumerate(ev.event_times)]
                        or [{"event": 0, "time_min": ""}])
            written.append(p)
        for name, diag in result.diagnostics.items():
            if diag is not None:
                p = out / f"solver_diagnostics_{name}.csv"
                diag.to_csv(p)
                written.append(p)
        if cfg.output.plots:
            written += _plot(result, out, cfg.output.plot_formats)
        p = out / "manifest.json"
        man = build_manifest(result, [q.name for q in written])
        if result.events is not None:
            man["events"] = {"count": result.events.event_count,
                             "rate_per_hour": result.events.rate_per_hour,
                             "times_min": list(result.events.event_times)}
        p.write_text(json.dumps(man, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    except OSError as exc:
        raise OSError(f"cannot write outputs in {out}: {exc}") from exc
    return written
