"""Convergence, grid-ratio, two-mesh and stability experiments.

Three test problems on the unit square with ``T = 1`` and cubic ``f``:

1. manufactured solution ``u = (t^alpha - 1)(1 + i) sin(pi x) sin(pi y)``
   with the matching source term;
2. ``u0 = sin(pi x) sin(pi y)``, no source;
3. ``u0 = x sin(pi y)`` for ``x <= 1/2`` and 0 beyond, no source.

Rates are ``log2(E(N) / E(2N))`` between consecutive rows of a doubling ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from tfse.caputo import truncation_probe
from tfse.grid import MeshSpec, interior_l2, sample
from tfse.stepper import DEFAULT_MEMORY_CAP, Nonlinearity, SchrodingerProblem, interior_coordinates, run

EXAMPLES = (1, 2, 3)


def manufactured_exact(alpha: float):
    def u(x, y, t):
        return (t**alpha - 1.0) * (1.0 + 1.0j) * np.sin(np.pi * x) * np.sin(np.pi * y)

    return u


def manufactured_forcing(alpha: float):
    """Source ``g = i D_t u + Delta u + |u|^2 u`` for the manufactured solution."""
    g1 = math.gamma(1.0 + alpha)

    def g(x, y, t):
        S = np.sin(np.pi * x) * np.sin(np.pi * y)
        c = t**alpha - 1.0
        return g1 * (1.0j - 1.0) * S - 2.0 * np.pi**2 * c * (1.0 + 1.0j) * S + 2.0 * c**3 * (1.0 + 1.0j) * S**3

    return g


def smooth_initial(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def kinked_initial(x, y):
    # x = 0.5 belongs to the left branch
    return np.where(x <= 0.5, x * np.sin(np.pi * y), 0.0)


def make_problem(example: int, alpha: float, N: int, M: int, L: float = 1.0, T: float = 1.0) -> SchrodingerProblem:
    mesh = MeshSpec(alpha, L, T, M, N)
    if example == 1:
        exact = manufactured_exact(alpha)
        u0 = sample(lambda x, y: exact(x, y, 0.0), mesh)
        return SchrodingerProblem(mesh, u0, Nonlinearity.cubic(), manufactured_forcing(alpha))
    if example == 2:
        return SchrodingerProblem(mesh, sample(smooth_initial, mesh), Nonlinearity.cubic())
    if example == 3:
        return SchrodingerProblem(mesh, sample(kinked_initial, mesh), Nonlinearity.cubic())
    raise ValueError(f"unknown example {example!r}; expected one of {EXAMPLES}")


def _example_id(problem_id) -> int:
    if isinstance(problem_id, str):
        problem_id = problem_id.removeprefix("example")
    return int(problem_id)


def default_m(N: int) -> int:
    """Spatial resolution that keeps the temporal error dominant."""
    return math.isqrt(N - 1) + 1 if N > 1 else 2


def log2_rate(coarse: float, fine: float) -> float | None:
    if coarse > 0 and fine > 0:
        return math.log2(coarse / fine)
    return None


@dataclass(frozen=True)
class ErrorReport:
    alpha: float
    N: int
    M: int
    local_error: float
    global_error: float
    rate_local: float | None = None
    rate_global: float | None = None


@dataclass(frozen=True)
class TwoMeshReport:
    example: int
    alpha: float
    N: int
    M: int
    e_L: float
    rate: float | None = None


def history_errors(history, alpha: float) -> np.ndarray:
    """``||u(t_n) - U^n||`` for every stored level of a manufactured-problem run."""
    mesh = history.mesh
    X, Y = interior_coordinates(mesh)
    exact = manufactured_exact(alpha)
    return np.array([interior_l2(exact(X, Y, mesh.t(n)) - history.block(n), mesh.h) for n in range(len(history))])


def error_profile(alpha: float, N: int, M: int | None = None, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> np.ndarray:
    """``||u(t_n) - U^n||`` for ``n = 0..N`` on the manufactured problem."""
    M = default_m(N) if M is None else M
    return history_errors(run(make_problem(1, alpha, N, M), backend, memory_cap), alpha)


def manufactured_errors(alpha: float, N: int, M: int, **kw) -> ErrorReport:
    errs = error_profile(alpha, N, M, **kw)
    return ErrorReport(alpha, N, M, float(errs[-1]), float(np.max(errs[1:])))


def _with_rates(rows: list[ErrorReport]) -> list[ErrorReport]:
    out = rows[:1]
    for prev, cur in zip(rows, rows[1:]):
        out.append(
            replace(
                cur,
                rate_local=log2_rate(prev.local_error, cur.local_error),
                rate_global=log2_rate(prev.global_error, cur.global_error),
            )
        )
    return out


def convergence_table(
    alpha_list: Iterable[float],
    N_list: Sequence[int],
    backend: str = "dst",
    memory_cap: int = DEFAULT_MEMORY_CAP,
    m: int | None = None,
) -> list[ErrorReport]:
    """Local and global errors on the manufactured problem.

    ``M = ceil(sqrt(N))`` unless a fixed ``m`` is given.
    """
    table = []
    for alpha in alpha_list:
        rows = [manufactured_errors(alpha, N, m or default_m(N), backend=backend, memory_cap=memory_cap) for N in N_list]
        table.extend(_with_rates(rows))
    return table


DEFAULT_GRID_PAIRS = ((0.01, 0.1), (0.005, 0.05), (0.1, 0.01), (0.05, 0.005))


def steps_for(length: float, size: float) -> int:
    n = round(length / size)
    if n < 1 or not math.isclose(n * size, length, rel_tol=1e-12):
        raise ValueError(f"step {size} does not divide {length}")
    return n


@dataclass(frozen=True)
class GridRatioRow:
    alpha: float
    tau: float
    h: float
    N: int
    M: int
    local_error: float

    @property
    def ratio(self) -> float:
        return self.tau / self.h


def grid_ratio_study(alpha: float, pairs: Iterable[tuple[float, float]] = DEFAULT_GRID_PAIRS, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> list[GridRatioRow]:
    rows = []
    for tau, h in pairs:
        N, M = steps_for(1.0, tau), steps_for(1.0, h)
        rep = manufactured_errors(alpha, N, M, backend=backend, memory_cap=memory_cap)
        rows.append(GridRatioRow(alpha, tau, h, N, M, rep.local_error))
    return rows


def final_level(example: int, alpha: float, N: int, M: int, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> np.ndarray:
    return run(make_problem(example, alpha, N, M), backend, memory_cap).final.copy()


def two_mesh(problem_id, alpha: float, N: int, M: int = 50, refine: int = 2, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> TwoMeshReport:
    """Final-time difference between runs with ``N`` and ``refine * N`` steps."""
    example = _example_id(problem_id)
    coarse = final_level(example, alpha, N, M, backend, memory_cap)
    fine = coarse if refine == 1 else final_level(example, alpha, refine * N, M, backend, memory_cap)
    return TwoMeshReport(example, alpha, N, M, interior_l2(coarse - fine, 1.0 / M))


def two_mesh_table(problem_id, alpha_list: Iterable[float], N_list: Sequence[int], M: int = 50, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> list[TwoMeshReport]:
    """Two-mesh errors and rates; runs shared by neighbouring rows are reused."""
    example = _example_id(problem_id)
    table = []
    for alpha in alpha_list:
        cache: dict[int, np.ndarray] = {}

        def level(n: int) -> np.ndarray:
            if n not in cache:
                cache[n] = final_level(example, alpha, n, M, backend, memory_cap)
            return cache[n]

        rows = []
        for N in N_list:
            e = interior_l2(level(N) - level(2 * N), 1.0 / M)
            rate = log2_rate(rows[-1].e_L, e) if rows else None
            rows.append(TwoMeshReport(example, alpha, N, M, e, rate))
        table.extend(rows)
    return table


def stability_experiment(alpha: float, N: int, M: int = 32, epsilon: float = 1e-6, backend: str = "dst", memory_cap: int = DEFAULT_MEMORY_CAP) -> float:
    """``max_n ||U^n - V^n|| / ||u0 - v0||`` for ``v0 = (1 + epsilon) u0`` on problem 2.

    The maximum runs over ``n = 1..N``.  Returns 0 when ``epsilon`` is 0.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if epsilon == 0:
        return 0.0
    base = make_problem(2, alpha, N, M)
    perturbed = replace(base, u0=base.u0 * (1.0 + epsilon))
    a = run(base, backend, memory_cap)
    b = run(perturbed, backend, memory_cap)
    h = base.mesh.h
    denom = interior_l2(base.u0.interior - perturbed.u0.interior, h)
    diff = max(interior_l2(a.block(n) - b.block(n), h) for n in range(1, N + 1))
    return diff / denom


@dataclass(frozen=True)
class ProbeRow:
    alpha: float
    gamma: float
    N: int
    error: float
    rate: float | None = None


def probe_table(alpha_list: Iterable[float], N_list: Sequence[int], gamma: float | None = None, T: float = 1.0) -> list[ProbeRow]:
    """L1 truncation error for ``t^gamma`` at ``t = T``; ``gamma`` defaults to ``alpha``."""
    table = []
    for alpha in alpha_list:
        g = alpha if gamma is None else gamma
        rows: list[ProbeRow] = []
        for N in N_list:
            err = truncation_probe(alpha, g, T, N)
            rate = log2_rate(rows[-1].error, err) if rows else None
            rows.append(ProbeRow(alpha, g, N, err, rate))
        table.extend(rows)
    return table
