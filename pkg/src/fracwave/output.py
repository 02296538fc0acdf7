"""File writers: wave and branch JSON, CSV summaries, event tables, gnuplot scripts.

All writers are deterministic: floats are written with ``repr`` precision
and keys in a fixed order, so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .continuation import Branch, BranchEvent, BranchSample
from .spectral import functionals
from .wave import WaveProfile, decompose

CSV_COLUMNS = ("c", "b", "a", "omega", "beta", "F", "sigma0", "n_L", "z_L", "s0", "verdict")
N_EIGS = 4


def jsonable(obj):
    """Recursively convert numpy scalars and arrays to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(data) -> str:
    return json.dumps(jsonable(data), indent=1) + "\n"


# waves -----------------------------------------------------------------------

def wave_summary(wave: WaveProfile) -> dict:
    """Scalars describing a wave: parameters, decomposition and functionals."""
    zm = decompose(wave)
    fn = functionals(wave.field, wave.alpha, wave.c)
    return {
        "family": wave.family,
        "alpha": wave.alpha,
        "c": wave.c,
        "b": wave.b,
        "a": zm.a,
        "omega": zm.omega,
        "beta": zm.beta,
        "F": fn.momentum,
        "E": fn.energy,
        "M": fn.mass,
        "residual": wave.residual_l2,
        "n_modes": wave.n_modes,
    }


def format_summary(summary: dict) -> str:
    lines = []
    for key, val in summary.items():
        if isinstance(val, float):
            lines.append(f"{key:>9s} = {val: .12g}")
        else:
            lines.append(f"{key:>9s} = {val}")
    return "\n".join(lines) + "\n"


def write_wave(wave: WaveProfile, path: Path) -> Path:
    data = wave.to_dict()
    data["summary"] = wave_summary(wave)
    path.write_text(dumps(data))
    return path


# branches --------------------------------------------------------------------

def sample_row(sample: BranchSample) -> dict:
    row = sample.row()
    return {k: row[k] for k in CSV_COLUMNS}


def event_dict(ev: BranchEvent) -> dict:
    return {"kind": ev.kind, "location": ev.location, "bracket": ev.bracket,
            "between": list(ev.between), "witness": ev.witness}


def branch_dict(branch: Branch, coefficients: bool = True) -> dict:
    samples = []
    for smp in branch.samples:
        entry = dict(sample_row(smp))
        entry["s"] = smp.s
        entry["dc_ds"] = smp.dc_ds
        entry["mode"] = smp.mode
        if smp.report is not None:
            entry["lowest_eigenvalues"] = smp.report.eigenvalues[:N_EIGS]
            entry["one_in_range"] = smp.report.one_in_range
        if smp.verdict is not None:
            entry["criterion_path"] = smp.verdict.criterion_path
        if coefficients:
            entry["coeffs"] = smp.wave.field.coefficient_triples()
        samples.append(entry)
    return {
        "header": {"alpha": branch.alpha, "family": branch.family, "n_modes": branch.n_modes,
                   "status": branch.status, "diagnostics": branch.diagnostics.strip()},
        "samples": samples,
        "events": [event_dict(e) for e in branch.events],
    }


def _fmt(val) -> str:
    if val is None:
        return ""
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    return str(val)


def branch_csv(branch: Branch) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for smp in branch.samples:
        row = sample_row(smp)
        writer.writerow([_fmt(row[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def events_table(events: list) -> str:
    lines = [f"{'kind':<18s} {'location':>14s} {'bracket':>10s}"]
    for ev in events:
        lines.append(f"{ev.kind:<18s} {ev.location:>14.8f} {ev.bracket:>10.2e}")
    if not events:
        lines.append("(no events)")
    return "\n".join(lines) + "\n"


def _dat_value(val) -> str:
    if val is None or (isinstance(val, float) and not math.isfinite(val)):
        return "NaN"
    return repr(float(val))


def write_branch(branch: Branch, out_dir: Path, stem: str, plots: bool = False) -> list[Path]:
    """Write ``<stem>.json``, ``<stem>.csv``, ``<stem>_events.txt`` and optionally plot files."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    p = out_dir / f"{stem}.json"
    p.write_text(dumps(branch_dict(branch)))
    paths.append(p)
    p = out_dir / f"{stem}.csv"
    p.write_text(branch_csv(branch))
    paths.append(p)
    p = out_dir / f"{stem}_events.txt"
    p.write_text(events_table(branch.events))
    paths.append(p)
    if plots:
        paths.extend(write_plot_files(branch, out_dir, stem))
    return paths


# gnuplot ---------------------------------------------------------------------

def _plot_data(branch: Branch) -> str:
    """Whitespace table: c b F sigma0 s0 omega phi2 and the lowest eigenvalues."""
    lines = ["# c b F sigma0 s0 omega phi_norm_sq " + " ".join(f"lam{i}" for i in range(N_EIGS))]
    for smp in branch.samples:
        row = smp.row()
        eigs = list(smp.report.eigenvalues[:N_EIGS]) if smp.report is not None else []
        eigs += [None] * (N_EIGS - len(eigs))
        vals = [row["c"], row["b"], row["F"], row["sigma0"], row["s0"], row["omega"],
                smp.zm.phi_norm_sq()] + eigs
        lines.append(" ".join(_dat_value(v) for v in vals))
    return "\n".join(lines) + "\n"


def _profile_data(branch: Branch, count: int = 5) -> str:
    """Profiles of ``count`` evenly spaced samples, one gnuplot data block each."""
    smp = branch.samples
    picks = sorted({int(round(i)) for i in np.linspace(0, len(smp) - 1, min(count, len(smp)))})
    blocks = []
    for i in picks:
        w = smp[i].wave
        x = np.linspace(-math.pi, math.pi, 257)
        y = w.field.evaluate(x)
        body = "\n".join(f"{xi!r} {float(yi)!r}" for xi, yi in zip(x, y))
        blocks.append(f"# c = {w.c!r}\n{body}")
    return "\n\n\n".join(blocks) + "\n"


def gnuplot_script(branch: Branch, stem: str) -> str:
    """Panel layout: profiles, b–c (or ‖φ‖²–ω for even families), F–c, σ₀–c (or s₀–c), eigenvalues–c."""
    even = branch.family == "even-b0"
    lines = [
        f"# {branch.family} branch, alpha = {branch.alpha!r}",
        "set terminal pngcairo size 1500,900",
        f"set output '{stem}.png'",
        "set multiplot layout 2,3",
        "set key off",
        "set xlabel 'x'; set ylabel 'psi'",
        f"plot for [i=0:*] '{stem}_profiles.dat' index i with lines",
    ]
    if even:
        lines += ["set xlabel 'omega'; set ylabel '||phi||^2'",
                  f"plot '{stem}_plot.dat' using 6:7 with linespoints pt 7 ps 0.4"]
    else:
        lines += ["set xlabel 'c'; set ylabel 'b'",
                  f"plot '{stem}_plot.dat' using 1:2 with linespoints pt 7 ps 0.4"]
    lines += ["set xlabel 'c'; set ylabel 'F'",
              f"plot '{stem}_plot.dat' using 1:3 with linespoints pt 7 ps 0.4"]
    if even:
        lines += ["set xlabel 'c'; set ylabel 's0'",
                  f"plot '{stem}_plot.dat' using 1:5 with linespoints pt 7 ps 0.4"]
    else:
        lines += ["set xlabel 'c'; set ylabel 'sigma0'", "set yrange [-10:10]",
                  f"plot '{stem}_plot.dat' using 1:4 with linespoints pt 7 ps 0.4",
                  "set autoscale y"]
    lines += ["set xlabel 'c'; set ylabel 'lowest eigenvalues of L'",
              f"plot for [j=8:{7 + N_EIGS}] '{stem}_plot.dat' using 1:j with lines",
              "unset multiplot"]
    return "\n".join(lines) + "\n"


def write_plot_files(branch: Branch, out_dir: Path, stem: str) -> list[Path]:
    files = {
        f"{stem}_plot.dat": _plot_data(branch),
        f"{stem}_profiles.dat": _profile_data(branch),
        f"{stem}.gp": gnuplot_script(branch, stem),
    }
    paths = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text)
        paths.append(p)
    return paths
