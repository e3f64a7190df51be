"""Command-line front end.

Usage::

    tfse table1 --alpha 0.3,0.5,0.7 --nsteps 512,1024,2048,4096 --out t1.csv --plot
    tfse two-mesh --example 2 --alpha 0.5 --nsteps 256 --mgrid 50

Settings may also come from a flat ``key=value`` file (``--config``, or
``tfse.conf`` in the working directory); command-line flags win.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from tfse import experiments as ex
from tfse import report
from tfse.errors import TfseError
from tfse.grid import interior_l2
from tfse.linsolve import DENSE_MAX_M
from tfse.stepper import DEFAULT_MEMORY_CAP, run

log = logging.getLogger("tfse")

COMMANDS = ("solve", "table1", "table2", "two-mesh", "stability", "probe-kernel")
EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 2, 3, 4
CONFIG_NAME = "tfse.conf"
EXTENDED_N = 8192
TWO_MESH_M = 50
STABILITY_M = 32


class UsageError(Exception):
    exit_code = EXIT_USAGE


@dataclass
class RunConfig:
    command: str
    alpha: list[float] = field(default_factory=lambda: [0.5])
    nsteps: list[int] = field(default_factory=lambda: [512])
    mgrid: int | None = None
    example: int = 1
    backend: str = "dst"
    out: str | None = None
    plot: bool = False
    extended: bool = False
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP
    epsilon: list[float] = field(default_factory=lambda: [1e-6])
    gamma: float | None = None
    pairs: list[tuple[float, float]] = field(default_factory=lambda: list(ex.DEFAULT_GRID_PAIRS))

    def m_for(self, N: int) -> int:
        if self.mgrid is not None:
            return self.mgrid
        if self.command in ("two-mesh",) or (self.command == "solve" and self.example != 1):
            return TWO_MESH_M
        if self.command == "stability":
            return STABILITY_M
        return ex.default_m(N)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        tau, h = item.split(":")
        out.append((float(tau), float(h)))
    return out


PARSERS = {
    "alpha": _floats,
    "nsteps": _ints,
    "mgrid": int,
    "example": int,
    "backend": str.strip,
    "out": str.strip,
    "plot": _bool,
    "extended": _bool,
    "memory_cap_bytes": int,
    "epsilon": _floats,
    "gamma": float,
    "pairs": _pairs,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfse", description="Linearised L1 scheme for the 2-D time-fractional NLS equation.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config")
    p.add_argument("--alpha", help="comma-separated fractional orders in (0, 1)")
    p.add_argument("--nsteps", help="comma-separated time step counts N")
    p.add_argument("--mgrid", help="spatial subdivisions M (default depends on command)")
    p.add_argument("--example", help="test problem 1, 2 or 3")
    p.add_argument("--backend", help="dst (default) or dense")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--plot", action="store_const", const="1", help="also write an SVG next to the CSV")
    p.add_argument("--extended", action="store_const", const="1", help="add the N=8192 rows to table1")
    p.add_argument("--memory-cap-bytes", dest="memory_cap_bytes")
    p.add_argument("--epsilon", help="stability perturbation sizes")
    p.add_argument("--gamma", help="exponent of the probe function t^gamma (default alpha)")
    p.add_argument("--pairs", help="table2 step pairs tau:h,tau:h,...")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in PARSERS:
            raise UsageError(f"unknown config key '{key}'")
        values[key] = value
    return values


def parse_config(argv: Sequence[str], config: str | Path | None = None) -> RunConfig:
    """Merge an optional config file with command-line flags and validate."""
    ns = _build_parser().parse_args(list(argv))
    path = ns.config or config
    if path is None and Path(CONFIG_NAME).is_file():
        path = CONFIG_NAME
    raw: dict[str, str] = {}
    if path is not None:
        try:
            raw.update(read_config_file(path))
        except OSError as exc:
            raise UsageError(f"cannot read config '{path}': {exc.strerror}") from exc
    for key in PARSERS:
        flag = getattr(ns, key, None)
        if flag is not None:
            raw[key] = flag

    cfg = RunConfig(ns.command)
    explicit = set(raw)
    for key, text in raw.items():
        try:
            setattr(cfg, key, PARSERS[key](text))
        except ValueError as exc:
            raise UsageError(f"bad value for '{key}': {text!r}") from exc
    if cfg.command == "two-mesh" and "example" not in explicit:
        cfg.example = 2
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not cfg.alpha or any(not 0.0 < a < 1.0 for a in cfg.alpha):
        raise UsageError(f"'alpha' values must lie in (0, 1): {cfg.alpha}")
    if not cfg.nsteps or any(n < 1 for n in cfg.nsteps):
        raise UsageError(f"'nsteps' values must be >= 1: {cfg.nsteps}")
    if cfg.example not in ex.EXAMPLES:
        raise UsageError(f"'example' must be one of {ex.EXAMPLES}, got {cfg.example}")
    if cfg.backend not in ("dst", "dense"):
        raise UsageError(f"'backend' must be dst or dense, got {cfg.backend!r}")
    if cfg.mgrid is not None and cfg.mgrid < 2:
        raise UsageError("'mgrid' must be >= 2")
    if cfg.memory_cap_bytes <= 0:
        raise UsageError("'memory_cap_bytes' must be positive")
    if any(e < 0 for e in cfg.epsilon):
        raise UsageError("'epsilon' values must be non-negative")
    if cfg.gamma is not None and cfg.gamma <= 0:
        raise UsageError("'gamma' must be positive")
    if cfg.command == "table1":
        if cfg.example != 1:
            raise UsageError("'example': table1 runs the manufactured problem (example 1)")
        if cfg.extended and EXTENDED_N not in cfg.nsteps:
            cfg.nsteps = cfg.nsteps + [EXTENDED_N]
        if not cfg.extended and max(cfg.nsteps) >= EXTENDED_N:
            raise UsageError(f"'nsteps' >= {EXTENDED_N} in table1 needs --extended")
    if cfg.command == "two-mesh" and cfg.example == 1:
        raise UsageError("'example': two-mesh applies to examples 2 and 3")
    if cfg.command == "table2":
        try:
            for tau, _ in cfg.pairs:
                ex.steps_for(1.0, tau)
            table2_ms = [ex.steps_for(1.0, h) for _, h in cfg.pairs]
        except ValueError as exc:
            raise UsageError(f"'pairs': {exc}") from exc
    if cfg.backend == "dense":
        if cfg.command == "table2":
            ms = table2_ms
        elif cfg.command == "probe-kernel":
            ms = []
        else:
            ms = [cfg.m_for(n) for n in cfg.nsteps]
        if any(m > DENSE_MAX_M for m in ms):
            raise UsageError(f"'backend': dense is limited to M <= {DENSE_MAX_M}")


def _solve_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    for alpha in cfg.alpha:
        for N in cfg.nsteps:
            M = cfg.m_for(N)
            row = {"example": cfg.example, "alpha": alpha, "N": N, "M": M}
            hist = run(ex.make_problem(cfg.example, alpha, N, M), cfg.backend, cfg.memory_cap_bytes)
            if cfg.example == 1:
                errs = ex.history_errors(hist, alpha)
                row.update(E_l=float(errs[-1]), E_g=float(np.max(errs[1:])))
            row["l2_final"] = interior_l2(hist.final, 1.0 / M)
            row["linf_max"] = float(np.max(np.abs(hist.levels)))
            rows.append(row)
    return rows


def _table1_rows(cfg: RunConfig) -> list[dict]:
    reps = ex.convergence_table(cfg.alpha, cfg.nsteps, cfg.backend, cfg.memory_cap_bytes, m=cfg.mgrid)
    return [
        {"alpha": r.alpha, "N": r.N, "M": r.M, "E_l": r.local_error, "rate_l": r.rate_local, "E_g": r.global_error, "rate_g": r.rate_global}
        for r in reps
    ]


def _table2_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    for alpha in cfg.alpha:
        for r in ex.grid_ratio_study(alpha, cfg.pairs, cfg.backend, cfg.memory_cap_bytes):
            rows.append({"alpha": r.alpha, "tau": r.tau, "h": r.h, "N": r.N, "M": r.M, "E_l": r.local_error})
    return rows


def _two_mesh_rows(cfg: RunConfig) -> list[dict]:
    M = cfg.m_for(cfg.nsteps[0])
    reps = ex.two_mesh_table(cfg.example, cfg.alpha, cfg.nsteps, M, cfg.backend, cfg.memory_cap_bytes)
    return report.rows_as_dicts(reps)


def _stability_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    for alpha in cfg.alpha:
        for eps in cfg.epsilon:
            for N in cfg.nsteps:
                M = cfg.m_for(N)
                amp = ex.stability_experiment(alpha, N, M, eps, cfg.backend, cfg.memory_cap_bytes)
                rows.append({"alpha": alpha, "N": N, "M": M, "epsilon": eps, "amplification": amp})
    return rows


def _probe_rows(cfg: RunConfig) -> list[dict]:
    return report.rows_as_dicts(ex.probe_table(cfg.alpha, cfg.nsteps, cfg.gamma))


DISPATCH = {
    "solve": _solve_rows,
    "table1": _table1_rows,
    "table2": _table2_rows,
    "two-mesh": _two_mesh_rows,
    "stability": _stability_rows,
    "probe-kernel": _probe_rows,
}


def compute_rows(cfg: RunConfig) -> list[dict]:
    rows = DISPATCH[cfg.command](cfg)
    for row in rows:
        for key, value in row.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise FloatingPointError(f"non-finite {key} in {cfg.command} output")
    return rows


def plot_path(cfg: RunConfig) -> Path:
    if cfg.out:
        return Path(cfg.out).with_suffix(".svg")
    return Path(f"{cfg.command}.svg")


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"tfse: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows = compute_rows(cfg)
    except (TfseError, ArithmeticError, MemoryError) as exc:
        print(f"tfse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        report.emit_csv(cfg.command, rows, cfg.out)
        if cfg.plot:
            report.emit_plot(cfg.command, rows, plot_path(cfg))
    except OSError as exc:
        print(f"tfse: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
