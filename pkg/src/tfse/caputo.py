"""L1 approximation of the Caputo derivative on a uniform time grid.

The discrete derivative at level ``n`` is

    D u^n = (a_0 u^n - sum_{i=1}^{n-1} (a_{n-i-1} - a_{n-i}) u^i - a_{n-1} u^0) / mu

with ``a_i = (i+1)^(1-alpha) - i^(1-alpha)`` and ``mu = tau^alpha Gamma(2-alpha)``.
The complementary multipliers ``theta`` invert it:
``sum_{i=1}^n theta_{n-i} D u^i = u^n - u^0``.

Gamma values come from :func:`math.gamma` (libm ``tgamma``), which is
accurate to a few ulp on ``(1, 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tfse.errors import DomainError, HistoryTooShort
from tfse.grid import ComplexField


@dataclass(frozen=True, eq=False)
class L1Kernel:
    alpha: float
    tau: float
    mu: float
    a: np.ndarray

    @property
    def N(self) -> int:
        return len(self.a)

    def history_weights(self, n: int) -> np.ndarray:
        """Weights ``w`` such that ``mu * D u^n = a_0 u^n - w @ (u^0, ..., u^{n-1})``."""
        if not 1 <= n <= self.N:
            raise HistoryTooShort(f"level {n} outside 1..{self.N}")
        a = self.a
        w = np.empty(n)
        w[0] = a[n - 1]
        i = np.arange(1, n)
        w[1:] = a[n - 1 - i] - a[n - i]
        return w


def l1_weights(alpha: float, tau: float, N: int) -> L1Kernel:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if tau <= 0 or N < 1:
        raise DomainError("need tau > 0 and N >= 1")
    i = np.arange(N, dtype=np.float64)
    a = (i + 1.0) ** (1.0 - alpha) - i ** (1.0 - alpha)
    a.flags.writeable = False
    mu = tau**alpha * math.gamma(2.0 - alpha)
    return L1Kernel(alpha, tau, mu, a)


def _stack(history: Sequence) -> tuple[np.ndarray, ComplexField | None]:
    if len(history) and isinstance(history[0], ComplexField):
        proto = history[0]
        return np.stack([f.values for f in history]), proto
    return np.asarray(history), None


def _wrap(value: np.ndarray, proto: ComplexField | None):
    if proto is None:
        return value[()] if isinstance(value, np.ndarray) and value.ndim == 0 else value
    return ComplexField(value, proto.L, proto.homogeneous)


def caputo_l1_apply(kernel: L1Kernel, history: Sequence):
    """L1 derivative at the last level of ``history = (u^0, ..., u^n)``.

    Entries may be scalars, arrays or :class:`ComplexField` (applied nodewise).
    """
    n = len(history) - 1
    if n < 1:
        raise HistoryTooShort("need at least two levels u^0, u^1")
    data, proto = _stack(history)
    w = kernel.history_weights(n)
    past = np.tensordot(w, data[:n], axes=(0, 0))
    return _wrap((kernel.a[0] * data[n] - past) / kernel.mu, proto)


@dataclass(frozen=True, eq=False)
class ThetaKernel:
    alpha: float
    tau: float
    theta: np.ndarray

    def partial_sum(self, n: int) -> float:
        """``sum_{i=1}^n theta_{n-i}``, the response of the summation operator to ones."""
        return float(np.sum(self.theta[:n]))


def theta_multipliers(kernel: L1Kernel, N: int | None = None) -> ThetaKernel:
    """Multipliers ``theta_0 .. theta_{N-1}`` by the forward recurrence."""
    if N is None:
        N = kernel.N
    if N > kernel.N:
        raise DomainError(f"kernel holds {kernel.N} weights, asked for {N} multipliers")
    a = kernel.a
    da = a[:-1] - a[1:]  # da[i-1] = a_{i-1} - a_i
    theta = np.empty(N)
    theta[0] = kernel.mu / a[0]
    for n in range(1, N):
        # sum_{i=1}^n (a_{i-1} - a_i) theta_{n-i}
        theta[n] = np.dot(da[:n], theta[n - 1 :: -1]) / a[0]
    theta.flags.writeable = False
    return ThetaKernel(kernel.alpha, kernel.tau, theta)


def e_alpha_apply(theta: ThetaKernel, history: Sequence):
    """Discrete summation ``sum_{i=1}^n theta_{n-i} v^i`` for ``history = (v^1, ..., v^n)``.

    An empty history (``n = 0``) gives 0.
    """
    n = len(history)
    if n == 0:
        return 0.0
    data, proto = _stack(history)
    w = theta.theta[n - 1 :: -1]
    return _wrap(np.tensordot(w, data, axes=(0, 0)), proto)


def caputo_power_exact(alpha: float, gamma: float, t: float) -> float:
    """Caputo derivative of ``t^gamma`` (``gamma > 0``)."""
    return math.gamma(gamma + 1.0) / math.gamma(gamma + 1.0 - alpha) * t ** (gamma - alpha)


def truncation_probe(alpha: float, gamma: float, T: float, N: int) -> float:
    """``|D_tau u(t_N) - D_t u(t_N)|`` for ``u(t) = t^gamma``."""
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    kernel = l1_weights(alpha, T / N, N)
    t = np.arange(N + 1) * (T / N)
    approx = caputo_l1_apply(kernel, t**gamma)
    return abs(float(approx) - caputo_power_exact(alpha, gamma, T))


def fit_slope(ns: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log2(error)`` against ``log2(N)``."""
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def probe_order(alpha: float, gamma: float, T: float = 1.0, ns: Sequence[int] = (64, 128, 256, 512, 1024)) -> float:
    """Observed convergence order of the truncation error (positive for decay)."""
    return -fit_slope(ns, [truncation_probe(alpha, gamma, T, n) for n in ns])
