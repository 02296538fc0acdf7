"""Command-line front end.

Commands
--------
solve      converged wave at one speed, written as JSON plus a summary
branch     continuation over a speed range with events, CSV and plot scripts
analyze    linearization and stability verdicts at one or more speeds
validate   cross-oracle suites (elliptic, stokes, variational)

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation failure. Options may also be given in a ``key=value`` file via
``--config``; command-line flags take precedence. The output directory is
``--out``, else ``out`` from the config file, else ``$FRACWAVE_OUT``, else
``./fracwave_out``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .continuation import (
    Branch,
    ContinuationOptions,
    analyze_wave,
    branch_switch,
    continue_in_c,
    find_events,
    merge_branches,
    trace_family,
    wave_at_c,
)
from .errors import FracwaveError
from .linops import kdv_spectrum
from .output import dumps, format_summary, wave_summary, write_branch, write_wave
from .solver import NewtonOptions, newton_solve
from .validate import all_passed, validate_elliptic, validate_stokes, validate_variational

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

FAMILIES = {"odd": "odd-b0", "even": "even-b0", "bnz": "asymmetric-bnz"}

DEFAULTS = {
    "n_modes": 256,
    "tol": 1e-10,
    "dc": 0.02,
    "sign": 1,
    "jobs": 1,
    "k": 0.5,
    "A": 0.05,
    "plots": False,
}


class ConfigError(Exception):
    """Invalid command-line or config-file input."""


@dataclass
class RunConfig:
    command: str
    alphas: list = field(default_factory=list)
    family: str | None = None
    c_values: list = field(default_factory=list)
    c_range: tuple | None = None
    n_modes: int = 256
    tol: float = 1e-10
    dc: float = 0.02
    sign: int = 1
    out: Path = Path("fracwave_out")
    plots: bool = False
    jobs: int = 1
    suite: str | None = None
    k: float = 0.5
    A: float = 0.05


# parsing ---------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracwave", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"fracwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family=True):
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--alpha", help="fractional order in (1/2, 2]; comma list for branch")
        if family:
            sp.add_argument("--family", choices=sorted(FAMILIES), help="wave family")
        sp.add_argument("--n-modes", dest="n_modes", type=int, help="grid size (even)")
        sp.add_argument("--tol", type=float, help="Newton residual tolerance")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("solve", help="solve for one wave")
    common(sp)
    sp.add_argument("--c", help="wave speed")
    sp.add_argument("--sign", type=int, choices=(1, -1), help="sign of b for bnz")

    sp = sub.add_parser("branch", help="trace a branch over a speed range")
    common(sp)
    sp.add_argument("--c-range", dest="c_range", help="lo:hi")
    sp.add_argument("--dc", type=float, help="initial speed step")
    sp.add_argument("--sign", type=int, choices=(1, -1), help="sign of b for bnz")
    sp.add_argument("--plots", action="store_true", default=None, help="emit gnuplot files")
    sp.add_argument("--jobs", type=int, help="parallel alpha sweeps")

    sp = sub.add_parser("analyze", help="stability table at given speeds")
    common(sp)
    sp.add_argument("--c", help="speed or comma list of speeds")
    sp.add_argument("--sign", type=int, choices=(1, -1), help="sign of b for bnz")

    sp = sub.add_parser("validate", help="run a cross-oracle suite")
    sp.add_argument("suite", choices=("elliptic", "stokes", "variational"))
    common(sp, family=False)
    sp.add_argument("--k", type=float, help="elliptic modulus")
    sp.add_argument("--A", type=float, help="Stokes amplitude")
    sp.add_argument("--c", help="speed (variational)")
    return p


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    data = {}
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        data[key.replace("-", "_")] = val
    return data


def _float(name: str, text) -> float:
    try:
        val = float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number, got {text!r}") from exc
    if not math.isfinite(val):
        raise ConfigError(f"{name} must be finite")
    return val


def _alpha(text) -> float:
    a = _float("alpha", text)
    if not 0.5 < a <= 2.0:
        raise ConfigError("alpha must exceed 0.5 and be at most 2")
    return a


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file, environment and defaults, then validate."""
    values = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        file_vals = read_config_file(args.config)
        for key, val in file_vals.items():
            values.setdefault(key, val)
    for key, val in DEFAULTS.items():
        values.setdefault(key, val)
    out = values.get("out") or os.environ.get("FRACWAVE_OUT") or "fracwave_out"
    cfg = RunConfig(command=args.command, out=Path(out))
    cmd = args.command

    if "alpha" not in values:
        if not (cmd == "validate" and values.get("suite") == "elliptic"):
            raise ConfigError("--alpha is required")
        values["alpha"] = "2"
    alphas = [_alpha(a) for a in str(values["alpha"]).split(",") if a.strip()]
    if not alphas:
        raise ConfigError("--alpha is required")
    if len(alphas) > 1 and cmd != "branch":
        raise ConfigError("several alpha values are accepted by 'branch' only")
    cfg.alphas = alphas

    n = values["n_modes"]
    try:
        n = int(n)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"n_modes must be an integer, got {n!r}") from exc
    if n < 16 or n % 2:
        raise ConfigError("n_modes must be an even integer >= 16")
    cfg.n_modes = n
    cfg.tol = _float("tol", values["tol"])
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    cfg.sign = int(values["sign"])
    if cfg.sign not in (1, -1):
        raise ConfigError("sign must be 1 or -1")
    cfg.plots = str(values["plots"]).lower() in ("1", "true", "yes")
    try:
        cfg.jobs = max(1, int(values["jobs"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError("jobs must be an integer") from exc

    if cmd in ("solve", "branch", "analyze"):
        fam = values.get("family")
        if fam not in FAMILIES:
            raise ConfigError(f"--family must be one of {', '.join(sorted(FAMILIES))}")
        cfg.family = fam
    if cmd in ("solve", "analyze") or (cmd == "validate" and values.get("suite") == "variational"):
        if "c" not in values:
            raise ConfigError("--c is required")
        cfg.c_values = [_float("c", t) for t in str(values["c"]).split(",") if t.strip()]
        if cmd != "analyze" and len(cfg.c_values) != 1:
            raise ConfigError("a single --c value is expected")
    if cmd == "branch":
        text = values.get("c_range")
        if not text or ":" not in str(text):
            raise ConfigError("--c-range lo:hi is required")
        lo, hi = (_float("c-range", t) for t in str(text).split(":", 1))
        if hi <= lo:
            raise ConfigError("c-range needs lo < hi")
        cfg.c_range = (lo, hi)
        cfg.dc = _float("dc", values["dc"])
        if not cfg.dc > 0:
            raise ConfigError("dc must be positive")
    if cmd == "validate":
        cfg.suite = values["suite"]
        cfg.k = _float("k", values["k"])
        cfg.A = _float("A", values["A"])
        if cfg.suite == "elliptic":
            if cfg.alphas != [2.0]:
                raise ConfigError("the elliptic suite needs alpha = 2")
            if not 0.0 < cfg.k < 1.0:
                raise ConfigError("k must lie in (0, 1)")
        if cfg.suite == "stokes" and not cfg.A > 0:
            raise ConfigError("A must be positive")
    return cfg


# commands --------------------------------------------------------------------

def _stem(family: str, alpha: float, extra: str = "") -> str:
    return f"{family}_alpha{alpha:g}{extra}"


def cmd_solve(cfg: RunConfig) -> int:
    alpha, c = cfg.alphas[0], cfg.c_values[0]
    wave = wave_at_c(cfg.family, alpha, c, cfg.n_modes, cfg.sign)
    if wave.family != "constant":
        # final solve at the requested tolerance from the continued wave
        b = None if wave.family == "asymmetric-bnz" else 0.0
        wave = newton_solve(wave.field, alpha, c, b, NewtonOptions(tol=cfg.tol),
                            family=wave.family)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = write_wave(wave, cfg.out / f"wave_{_stem(cfg.family, alpha, f'_c{c:g}')}.json")
    summary = wave_summary(wave)
    text = format_summary(summary)
    (path.with_suffix(".txt")).write_text(text)
    sys.stdout.write(text)
    if wave.residual_l2 > 1e3 * cfg.tol:
        sys.stderr.write("warning: residual including the Nyquist mode is large; "
                         "increase --n-modes\n")
    sys.stdout.write(f"wrote {path}\n")
    return EXIT_OK


def run_branch(family: str, alpha: float, c_range: tuple, n_modes: int, dc: float,
               sign: int) -> Branch:
    """Trace one branch; ``bnz`` branches are traced both ways from ``c_range[0]``."""
    opts = ContinuationOptions(dc=dc, newton=NewtonOptions(normalize=False))
    lo, hi = c_range
    fam = FAMILIES[family]
    if fam != "asymmetric-bnz":
        return trace_family(fam, alpha, hi, n_modes, opts)
    odd = wave_at_c("odd", alpha, lo, n_modes)
    start = branch_switch(odd, sign)
    quiet = replace(opts, detect_events=False)
    up = continue_in_c(start, hi, quiet)
    down = continue_in_c(start, -1.0, replace(quiet, on_stuck="stop"),
                         stop_when=lambda w: abs(w.b) < 1e-8)
    merged = merge_branches(down, up)
    find_events(merged)
    return merged


def _branch_job(args):
    family, alpha, c_range, n_modes, dc, sign, out, plots = args
    branch = run_branch(family, alpha, c_range, n_modes, dc, sign)
    paths = write_branch(branch, out, _stem(family, alpha), plots)
    return branch, paths


def cmd_branch(cfg: RunConfig) -> int:
    jobs = [(cfg.family, a, cfg.c_range, cfg.n_modes, cfg.dc, cfg.sign, cfg.out, cfg.plots)
            for a in cfg.alphas]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_branch_job, jobs))
    else:
        results = [_branch_job(j) for j in jobs]
    for (branch, paths), job in zip(results, jobs):
        sys.stdout.write(f"alpha = {job[1]:g}, family = {branch.family}, "
                         f"{len(branch.samples)} samples, status {branch.status}\n")
        for ev in branch.events:
            sys.stdout.write(f"  {ev.kind:<18s} c = {ev.location:.6f}  (bracket {ev.bracket:.1e})\n")
        for p in paths:
            sys.stdout.write(f"  wrote {p}\n")
    return EXIT_OK


def cmd_analyze(cfg: RunConfig) -> int:
    alpha = cfg.alphas[0]
    rows = []
    header = f"{'c':>10s} {'b':>10s} {'n(L)':>5s} {'z(L)':>5s} {'sigma0':>12s} {'verdict':>13s} {'kdv max Re':>11s}"
    lines = [header]
    for c in cfg.c_values:
        wave = wave_at_c(cfg.family, alpha, c, cfg.n_modes, cfg.sign)
        if wave.family == "constant":
            lines.append(f"{c:10.5f} {'constant wave: no analysis':>40s}")
            continue
        smp = analyze_wave(wave)
        kdv = kdv_spectrum(wave)
        rep = smp.report
        verdict = smp.verdict.verdict if smp.verdict else "none"
        sig = "unbounded" if rep.sigma0 is None else f"{rep.sigma0:.6g}"
        lines.append(f"{c:10.5f} {wave.b:10.5f} {rep.n_L:5d} {rep.z_L:5d} {sig:>12s} "
                     f"{verdict:>13s} {kdv.max_real:11.3e}")
        rows.append({"c": c, "b": wave.b, "report": rep.to_dict(),
                     "verdict": None if smp.verdict is None else {
                         "verdict": smp.verdict.verdict, "path": smp.verdict.criterion_path,
                         "data": smp.verdict.data},
                     "kdv_max_real": kdv.max_real, "kdv_scale": kdv.scale,
                     "kdv_positive_real": kdv.positive_real})
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = _stem(cfg.family, alpha)
    (cfg.out / f"analysis_{stem}.json").write_text(dumps(rows))
    (cfg.out / f"analysis_{stem}.txt").write_text(text)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    alpha = cfg.alphas[0]
    if cfg.suite == "elliptic":
        checks = validate_elliptic(cfg.k, cfg.n_modes)
    elif cfg.suite == "stokes":
        checks = validate_stokes(alpha, cfg.A, cfg.n_modes)
    else:
        n = min(cfg.n_modes, 64)
        checks = validate_variational(alpha, cfg.c_values[0], n)
    for ch in checks:
        sys.stdout.write(ch.line() + "\n")
    return EXIT_OK if all_passed(checks) else EXIT_VALIDATION


COMMANDS = {"solve": cmd_solve, "branch": cmd_branch, "analyze": cmd_analyze,
            "validate": cmd_validate}


_VALUE_FLAGS = ("--c", "--c-range", "--alpha", "--k", "--A", "--dc", "--tol")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--c -0.5`` as ``--c=-0.5`` so argparse does not read a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _VALUE_FLAGS and nxt and nxt.startswith("-") and len(nxt) > 1 \
                and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        sys.stderr.write(f"fracwave: error: {exc}\n")
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg)
    except FracwaveError as exc:
        sys.stderr.write(f"fracwave: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
