"""Time marching for the linearised L1 / five-point scheme.

At each level ``n >= 1`` the unknown ``U^n`` solves

    (i a_0/mu) U^n + Delta_h U^n
        = (i/mu) (sum_{i=1}^{n-1} (a_{n-i-1} - a_{n-i}) U^i + a_{n-1} U^0)
          - f(|U^{n-1}|^2) U^{n-1} + g^n

so the nonlinearity is lagged and every step is one linear solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tfse.caputo import L1Kernel, caputo_l1_apply, l1_weights
from tfse.errors import HistoryIncomplete, MemoryBudgetExceeded
from tfse.grid import ComplexField, MeshSpec, interior_l2, laplacian_interior
from tfse.linsolve import ShiftedLaplacian, make_solver

log = logging.getLogger(__name__)

DEFAULT_MEMORY_CAP = 4 * 2**30

Forcing = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Nonlinearity:
    """Real coefficient ``f`` in the term ``f(|u|^2) u``."""

    f: Callable[[np.ndarray], np.ndarray] = field(default=lambda s: s)
    name: str = "cubic"

    @classmethod
    def cubic(cls) -> Nonlinearity:
        return cls(lambda s: s, "cubic")

    @classmethod
    def zero(cls) -> Nonlinearity:
        return cls(np.zeros_like, "zero")

    def term(self, u: np.ndarray) -> np.ndarray:
        """``f(|u|^2) u`` with ``|u|^2`` formed as ``re^2 + im^2``."""
        s = u.real * u.real + u.imag * u.imag
        return self.f(s) * u


@dataclass(frozen=True)
class SchrodingerProblem:
    mesh: MeshSpec
    u0: ComplexField
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity.cubic)
    forcing: Forcing | None = None

    def __post_init__(self) -> None:
        if self.u0.m != self.mesh.M:
            raise ValueError(f"initial data has M={self.u0.m}, mesh has M={self.mesh.M}")
        if not self.u0.homogeneous:
            raise ValueError("initial data must have a zero boundary")


class History:
    """Solution levels ``U^0 .. U^n`` stored as contiguous interior blocks."""

    def __init__(self, mesh: MeshSpec, capacity: int | None = None):
        self.mesh = mesh
        capacity = mesh.N + 1 if capacity is None else capacity
        k = mesh.M - 1
        self.levels = np.zeros((capacity, k, k), dtype=np.complex128)
        self.count = 0

    def __len__(self) -> int:
        return self.count

    def append(self, block: np.ndarray | ComplexField) -> None:
        if isinstance(block, ComplexField):
            block = block.interior
        if self.count == len(self.levels):
            raise IndexError("history is full")
        self.levels[self.count] = block
        self.count += 1

    def block(self, n: int) -> np.ndarray:
        if not 0 <= n < self.count:
            raise IndexError(f"level {n} not stored (have {self.count})")
        return self.levels[n]

    def field(self, n: int) -> ComplexField:
        return ComplexField.from_interior(self.block(n), self.mesh.L)

    @property
    def final(self) -> np.ndarray:
        return self.block(self.count - 1)

    def weighted_sum(self, w: np.ndarray) -> np.ndarray:
        """``sum_i w[i] U^i`` over the first ``len(w)`` levels, ``w`` real."""
        n = len(w)
        k = self.levels.shape[1]
        flat = self.levels[:n].reshape(n, k * k).view(np.float64)
        return np.dot(w, flat).view(np.complex128).reshape(k, k)


def interior_coordinates(mesh: MeshSpec) -> tuple[np.ndarray, np.ndarray]:
    x = mesh.x()[1:-1]
    return np.meshgrid(x, x, indexing="ij")


def _forcing_block(forcing, n: int, mesh: MeshSpec, coords) -> np.ndarray | None:
    if forcing is None:
        return None
    if isinstance(forcing, np.ndarray):
        return forcing[n]
    X, Y = coords
    return np.asarray(forcing(X, Y, mesh.t(n)), dtype=np.complex128)


def _rhs_block(n, history, kernel, nl, forcing, mesh, coords) -> np.ndarray:
    if n < 1 or len(history) < n:
        raise HistoryIncomplete(f"level {n} needs levels 0..{n - 1}, history has {len(history)}")
    w = kernel.history_weights(n)
    past = history.weighted_sum(w)
    rhs = (1j / kernel.mu) * past - nl.term(history.block(n - 1))
    g = _forcing_block(forcing, n, mesh, coords)
    if g is not None:
        rhs = rhs + g
    return rhs


def assemble_rhs(n: int, history: History, kernel: L1Kernel, nl: Nonlinearity, forcing, mesh: MeshSpec) -> ComplexField:
    """Right-hand side of the level-``n`` linear system.

    ``forcing`` is ``None``, a callable ``g(x, y, t)`` or an array of
    precomputed interior blocks indexed by level.
    """
    block = _rhs_block(n, history, kernel, nl, forcing, mesh, interior_coordinates(mesh))
    return ComplexField.from_interior(block, mesh.L)


def shifted_operator(kernel: L1Kernel, mesh: MeshSpec) -> ShiftedLaplacian:
    return ShiftedLaplacian(1j * kernel.a[0] / kernel.mu, mesh)


def step(n: int, history: History, kernel: L1Kernel, nl: Nonlinearity, forcing, solver) -> ComplexField:
    """Compute ``U^n`` from levels ``0..n-1``; the caller appends it.

    ``solver`` maps an interior right-hand side block to the solution block,
    see :func:`tfse.linsolve.make_solver`.
    """
    mesh = history.mesh
    rhs = _rhs_block(n, history, kernel, nl, forcing, mesh, interior_coordinates(mesh))
    return ComplexField.from_interior(solver(rhs), mesh.L)


def check_memory(mesh: MeshSpec, cap: int = DEFAULT_MEMORY_CAP) -> int:
    need = (mesh.N + 1) * (mesh.M - 1) ** 2 * 16
    if need > cap:
        raise MemoryBudgetExceeded(f"history needs {need} bytes, cap is {cap}")
    return need


def run(
    problem: SchrodingerProblem,
    backend: str = "dst",
    memory_cap: int = DEFAULT_MEMORY_CAP,
    precompute_forcing: bool = False,
) -> History:
    mesh = problem.mesh
    check_memory(mesh, memory_cap)
    kernel = l1_weights(mesh.alpha, mesh.tau, mesh.N)
    solver = make_solver(shifted_operator(kernel, mesh), backend)
    coords = interior_coordinates(mesh)

    forcing = problem.forcing
    if precompute_forcing and forcing is not None:
        blocks = np.zeros((mesh.N + 1,) + coords[0].shape, dtype=np.complex128)
        for n in range(1, mesh.N + 1):
            blocks[n] = forcing(*coords, mesh.t(n))
        forcing = blocks

    history = History(mesh)
    history.append(problem.u0.interior)
    for n in range(1, mesh.N + 1):
        rhs = _rhs_block(n, history, kernel, problem.nonlinearity, forcing, mesh, coords)
        history.append(solver(rhs))
    if not np.all(np.isfinite(history.final)):
        raise FloatingPointError("non-finite values in the final level")
    log.debug("run alpha=%g N=%d M=%d done", mesh.alpha, mesh.N, mesh.M)
    return history


def discrete_derivatives(history: History, kernel: L1Kernel) -> np.ndarray:
    """``D_tau U^n`` for ``n = 1..len-1`` as a stacked array of interior blocks."""
    out = np.empty((len(history) - 1,) + history.levels.shape[1:], dtype=np.complex128)
    for n in range(1, len(history)):
        past = history.weighted_sum(kernel.history_weights(n))
        out[n - 1] = (kernel.a[0] * history.block(n) - past) / kernel.mu
    return out


def derivative_bound_ratio(history: History, kernel: L1Kernel) -> float:
    """Largest ``||D U^n|| / (2 / (tau^alpha Gamma(2-alpha)) * max_{s<=n} ||U^s||)``.

    A value ``<= 1`` means the discrete derivative bound holds at every level.
    """
    h = history.mesh.h
    norms = np.array([interior_l2(history.block(s), h) for s in range(len(history))])
    running = np.maximum.accumulate(norms)
    const = 2.0 / kernel.mu
    worst = 0.0
    for n, d in enumerate(discrete_derivatives(history, kernel), start=1):
        bound = const * running[n]
        dn = interior_l2(d, h)
        if bound == 0.0:
            if dn > 0.0:
                return np.inf
            continue
        worst = max(worst, dn / bound)
    return worst


def scheme_residual(history: History, problem: SchrodingerProblem, n: int) -> tuple[float, float]:
    """Residual of the discrete equation at level ``n``, plus its scale.

    The residual ``i D U^n + Delta_h U^n + f(|U^{n-1}|^2) U^{n-1} - g^n`` is
    rebuilt from the stored levels with :func:`caputo_l1_apply`; the scale
    is ``||U^n|| + ||rhs||``.
    """
    mesh = problem.mesh
    kernel = l1_weights(mesh.alpha, mesh.tau, mesh.N)
    coords = interior_coordinates(mesh)
    U = history.block(n)
    res = 1j * caputo_l1_apply(kernel, history.levels[: n + 1]) + laplacian_interior(U, mesh.h)
    res = res + problem.nonlinearity.term(history.block(n - 1))
    g = _forcing_block(problem.forcing, n, mesh, coords)
    if g is not None:
        res = res - g
    rhs = _rhs_block(n, history, kernel, problem.nonlinearity, problem.forcing, mesh, coords)
    return interior_l2(res, mesh.h), interior_l2(U, mesh.h) + interior_l2(rhs, mesh.h)
