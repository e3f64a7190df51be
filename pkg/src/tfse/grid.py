"""Uniform space-time mesh, complex grid functions and discrete operators.

Fields are stored on the full ``(M+1) x (M+1)`` lattice, row-major, with
``values[j, k]`` the value at ``(x_j, y_k) = (j*h, k*h)``.  The first index
runs along ``x``.  Norms and inner products sum over interior nodes only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tfse.errors import DomainError, MeshMismatch, NonVanishingBoundary

#: boundary samples below this modulus are snapped to exact zero
BOUNDARY_SNAP = 1e-14


@dataclass(frozen=True)
class MeshSpec:
    """Uniform discretisation of ``[0, L]^2 x [0, T]``."""

    alpha: float
    L: float = 1.0
    T: float = 1.0
    M: int = 2
    N: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.L > 0 and self.T > 0):
            raise DomainError("L and T must be positive")
        if int(self.M) != self.M or self.M < 2:
            raise DomainError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def tau(self) -> float:
        return self.T / self.N

    def x(self) -> np.ndarray:
        """Node coordinates ``x_j = j*h`` for ``j = 0..M`` (also used for ``y``)."""
        return np.arange(self.M + 1) * self.h

    def t(self, n: int) -> float:
        return n * self.tau

    def with_steps(self, N: int) -> MeshSpec:
        return MeshSpec(self.alpha, self.L, self.T, self.M, N)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex grid function on the closed lattice of an ``m x m`` mesh.

    ``homogeneous=True`` declares membership in the zero-boundary space and
    is checked on construction.  The stored array is read-only.
    """

    values: np.ndarray
    L: float = 1.0
    homogeneous: bool = True
    m: int = field(init=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.complex128)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] < 3:
            raise ValueError(f"expected a square (M+1, M+1) array, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite entries")
        if self.homogeneous and np.any(_boundary(vals)):
            raise NonVanishingBoundary("boundary values of a zero-boundary field must be 0")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m", vals.shape[0] - 1)

    @property
    def h(self) -> float:
        return self.L / self.m

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    @classmethod
    def zeros(cls, m: int, L: float = 1.0) -> ComplexField:
        return cls(np.zeros((m + 1, m + 1), dtype=np.complex128), L)

    @classmethod
    def from_interior(cls, block: np.ndarray, L: float = 1.0) -> ComplexField:
        block = np.asarray(block)
        m = block.shape[0] + 1
        full = np.zeros((m + 1, m + 1), dtype=np.complex128)
        full[1:-1, 1:-1] = block
        return cls(full, L)

    def __add__(self, other: ComplexField) -> ComplexField:
        _check_same(self, other)
        return ComplexField(self.values + other.values, self.L, self.homogeneous and other.homogeneous)

    def __sub__(self, other: ComplexField) -> ComplexField:
        _check_same(self, other)
        return ComplexField(self.values - other.values, self.L, self.homogeneous and other.homogeneous)

    def __mul__(self, scalar: complex) -> ComplexField:
        return ComplexField(self.values * scalar, self.L, self.homogeneous)

    __rmul__ = __mul__


def _boundary(vals: np.ndarray) -> np.ndarray:
    return np.concatenate([vals[0, :], vals[-1, :], vals[1:-1, 0], vals[1:-1, -1]])


def _check_same(u: ComplexField, v: ComplexField) -> None:
    if u.m != v.m or u.L != v.L:
        raise MeshMismatch(f"fields live on different meshes: M={u.m}, L={u.L} vs M={v.m}, L={v.L}")


def sample(f: Callable, mesh: MeshSpec, homogeneous: bool = True) -> ComplexField:
    """Evaluate ``f(x, y)`` at every lattice node.

    ``f`` is called once with broadcast 2-D coordinate arrays.  For a
    zero-boundary target, boundary samples must vanish to within
    ``BOUNDARY_SNAP``; they are then stored as exact zeros.
    """
    x = mesh.x()
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = np.array(np.broadcast_to(f(X, Y), X.shape), dtype=np.complex128)
    if homogeneous:
        worst = np.max(np.abs(_boundary(vals)))
        if worst > BOUNDARY_SNAP:
            raise NonVanishingBoundary(f"|f| reaches {worst:.3e} on the boundary")
        vals[0, :] = vals[-1, :] = vals[:, 0] = vals[:, -1] = 0.0
    return ComplexField(vals, mesh.L, homogeneous)


def laplacian_interior(block: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian of a zero-padded interior block, interior output."""
    p = np.pad(block, 1)
    return (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * block) / (h * h)


def laplacian_5pt(u: ComplexField, h: float | None = None) -> ComplexField:
    if h is None:
        h = u.h
    return ComplexField.from_interior(laplacian_interior(u.interior, h), u.L)


def inner_product(u: ComplexField, v: ComplexField) -> complex:
    """``h^2 sum u conj(v)`` over interior nodes."""
    _check_same(u, v)
    a, b = u.interior, v.interior
    # split form keeps (u, u) exactly real
    re = np.sum(a.real * b.real + a.imag * b.imag)
    im = np.sum(a.imag * b.real - a.real * b.imag)
    return complex(u.h**2 * re, u.h**2 * im)


def l2_norm(u: ComplexField) -> float:
    return interior_l2(u.interior, u.h)


def interior_l2(block: np.ndarray, h: float) -> float:
    """Discrete L2 norm of an interior block, ``h * sqrt(sum |u|^2)``."""
    return h * math.sqrt(float(np.sum(block.real**2 + block.imag**2)))


def linf_norm(u: ComplexField) -> float:
    return float(np.max(np.abs(u.interior)))


def seminorm_h2(u: ComplexField, h: float | None = None) -> float:
    return l2_norm(laplacian_5pt(u, h))


def sine_mode(p: int, q: int, m: int, L: float = 1.0) -> ComplexField:
    """Grid function ``sin(p*pi*j/M) * sin(q*pi*k/M)``."""
    j = np.arange(m + 1)
    sx = np.sin(p * np.pi * j / m)
    sy = np.sin(q * np.pi * j / m)
    vals = np.outer(sx, sy)
    vals[0, :] = vals[-1, :] = vals[:, 0] = vals[:, -1] = 0.0
    return ComplexField(vals.astype(np.complex128), L)


def laplacian_eigenvalue(p: int, q: int, m: int, h: float) -> float:
    return -(4.0 / h**2) * (math.sin(p * math.pi / (2 * m)) ** 2 + math.sin(q * math.pi / (2 * m)) ** 2)
