"""Direct solvers for ``(sigma I + Delta_h) U = b`` on the interior nodes.

The fast path diagonalises the five-point Laplacian with a 2-D type-I sine
transform, applied as two products with a precomputed ``(M-1) x (M-1)``
sine matrix.  A dense LU solve serves as a reference for small meshes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from tfse.errors import NearSingular, SingularShift, TooLarge
from tfse.grid import ComplexField, MeshSpec, laplacian_interior

DENSE_MAX_M = 24


def sine_matrix(m: int) -> np.ndarray:
    """``S[j-1, p-1] = sin(j p pi / M)`` for ``1 <= j, p <= M-1``."""
    j = np.arange(1, m)
    return np.sin(np.outer(j, j) * (np.pi / m))


def dst1_forward(block: np.ndarray, S: np.ndarray | None = None) -> np.ndarray:
    """Unnormalised 2-D sine transform of an interior block."""
    if S is None:
        S = sine_matrix(block.shape[0] + 1)
    return S @ block @ S


def dst1_inverse(coeffs: np.ndarray, S: np.ndarray | None = None) -> np.ndarray:
    m = coeffs.shape[0] + 1
    if S is None:
        S = sine_matrix(m)
    return (S @ coeffs @ S) * (2.0 / m) ** 2


def eigenvalue_table(m: int, h: float) -> np.ndarray:
    """``lambda[p-1, q-1]`` of ``Delta_h`` for the sine mode ``(p, q)``."""
    s = np.sin(np.arange(1, m) * np.pi / (2 * m)) ** 2
    return -(4.0 / h**2) * (s[:, None] + s[None, :])


@dataclass(frozen=True, eq=False)
class ShiftedLaplacian:
    sigma: complex
    mesh: MeshSpec

    @cached_property
    def sines(self) -> np.ndarray:
        return sine_matrix(self.mesh.M)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalue_table(self.mesh.M, self.mesh.h)

    @cached_property
    def symbol(self) -> np.ndarray:
        """``sigma + lambda_{p,q}``, checked against singularity."""
        d = self.sigma + self.eigenvalues
        smallest = np.min(np.abs(d))
        if smallest < 1e-300:
            raise SingularShift(f"sigma = {self.sigma} hits an eigenvalue (|d| = {smallest:.3e})")
        return d

    def apply_interior(self, block: np.ndarray) -> np.ndarray:
        return self.sigma * block + laplacian_interior(block, self.mesh.h)

    def apply(self, u: ComplexField) -> ComplexField:
        return ComplexField.from_interior(self.apply_interior(u.interior), u.L)

    def solve_interior(self, b: np.ndarray) -> np.ndarray:
        """Fast solve on a bare interior block."""
        coeffs = dst1_forward(b, self.sines)
        return dst1_inverse(coeffs / self.symbol, self.sines)

    def dense_matrix(self) -> np.ndarray:
        """Assembled ``sigma I + Delta_h`` over interior nodes in row-major order."""
        m = self.mesh.M
        if m > DENSE_MAX_M:
            raise TooLarge(f"dense reference limited to M <= {DENSE_MAX_M}, got {m}")
        n = m - 1
        t = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / self.mesh.h**2
        eye = np.eye(n)
        return self.sigma * np.eye(n * n) + np.kron(t, eye) + np.kron(eye, t)


def solve_dst(op: ShiftedLaplacian, b: ComplexField) -> ComplexField:
    return ComplexField.from_interior(op.solve_interior(b.interior), b.L)


def _dense_lu(op: ShiftedLaplacian):
    # LAPACK getrf: Gaussian elimination with partial pivoting
    lu, piv = scipy.linalg.lu_factor(op.dense_matrix())
    pivot = np.min(np.abs(np.diag(lu)))
    if pivot < 1e-250:
        raise NearSingular(f"smallest pivot {pivot:.3e}")
    return lu, piv


def solve_dense_reference(op: ShiftedLaplacian, b: ComplexField) -> ComplexField:
    x = scipy.linalg.lu_solve(_dense_lu(op), b.interior.ravel())
    return ComplexField.from_interior(x.reshape(b.interior.shape), b.L)


BACKENDS = {"dst": solve_dst, "dense": solve_dense_reference}


def make_solver(op: ShiftedLaplacian, backend: str = "dst"):
    """Interior-block solver ``b -> U`` for the chosen backend."""
    if backend == "dst":
        op.symbol  # fail early on a singular shift
        return op.solve_interior
    if backend == "dense":
        factors = _dense_lu(op)

        def solve(b: np.ndarray) -> np.ndarray:
            return scipy.linalg.lu_solve(factors, b.ravel()).reshape(b.shape)

        return solve
    raise ValueError(f"unknown backend {backend!r}")
