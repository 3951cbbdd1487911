"""
Legendre submanifolds and 1-jet sections.

A generator ``F`` takes one mixed vector ``y`` of length n with
``y[i] = q^i`` for ``i`` in ``I`` and ``y[j] = p_j`` for ``j`` in ``J``.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geometry import (
    ContactHamiltonian,
    EvaluationError,
    PhasePoint,
    contact_vector_field,
    finite_difference_gradient,
)


class LegendreGenerator:
    """
    Generating function ``F(q^I, p_J)`` of a Legendre submanifold.

    Parameters
    ----------
    F : callable
        Maps the mixed vector ``y`` to a real number.
    n : int
        Number of conjugate pairs.
    J : sequence of int, optional
        Indices whose momentum (rather than coordinate) is an argument of F.
    grad : callable, optional
        Closed-form gradient of F in ``y``. Finite differences otherwise.
    """

    def __init__(self, F: Callable[[np.ndarray], float], n: int,
                 J: Sequence[int] = (), grad: Optional[Callable] = None,
                 name: str = "F", fd_rel_step: float = 1e-6):
        J = tuple(sorted(set(int(j) for j in J)))
        if any(j < 0 or j >= n for j in J):
            raise ValueError(f"J indices out of range for n={n}: {J}")
        self.F = F
        self.n = n
        self.J = J
        self.I = tuple(i for i in range(n) if i not in J)
        self._grad = grad
        self.name = name
        self.fd_rel_step = fd_rel_step

    @property
    def partition(self):
        return self.I, self.J

    def value(self, y) -> float:
        return float(self.F(np.asarray(y, dtype=float)))

    def gradient(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(y), dtype=float)
        return finite_difference_gradient(self.F, y, self.fd_rel_step)


class SectionSigma:
    """1-jet section ``q -> (q, grad sigma_s(q), sigma_s(q))``."""

    def __init__(self, sigma_s: Callable[[np.ndarray], float],
                 grad: Optional[Callable] = None, name: str = "sigma",
                 fd_rel_step: float = 1e-6):
        self.sigma_s = sigma_s
        self._grad = grad
        self.name = name
        self.fd_rel_step = fd_rel_step

    def value(self, q) -> float:
        return float(self.sigma_s(np.asarray(q, dtype=float)))

    def sigma_j(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(q), dtype=float)
        return finite_difference_gradient(self.sigma_s, q, self.fd_rel_step)


def legendre_embed(gen: LegendreGenerator, base) -> PhasePoint:
    y = np.asarray(base, dtype=float)
    if y.size != gen.n:
        raise ValueError(f"base has length {y.size}, generator expects {gen.n}")
    try:
        F = gen.value(y)
        dF = gen.gradient(y)
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationError(f"generator {gen.name} failed at {y}") from exc
    if not (np.isfinite(F) and np.all(np.isfinite(dF))):
        raise EvaluationError(f"generator {gen.name} is not finite at {y}")
    q = np.empty(gen.n)
    p = np.empty(gen.n)
    s = F
    for i in gen.I:
        q[i] = y[i]
        p[i] = dF[i]
    for j in gen.J:
        p[j] = y[j]
        q[j] = -dF[j]
        s -= y[j] * dF[j]
    return PhasePoint(s, q, p)


def on_submanifold_residual(gen: LegendreGenerator, x: PhasePoint) -> float:
    """Sup-norm defect of ``s = F(q)``, ``p = grad F(q)``; only for ``J`` empty."""
    if gen.J:
        raise ValueError("on_submanifold_residual supports only generators with J empty")
    return float(max(abs(x.s - gen.value(x.q)),
                     np.max(np.abs(x.p - gen.gradient(x.q)))))


def restriction_residual(h: ContactHamiltonian, gen: LegendreGenerator,
                         grid: Iterable) -> float:
    return max((abs(h(legendre_embed(gen, y))) for y in grid), default=0.0)


def default_grid(center, rel: float = 0.1) -> list:
    """
    The 3^n points ``center_i + {-d_i, 0, d_i}`` with ``d_i = rel * |center_i|``.

    Zero components get an absolute offset ``rel`` instead.
    """
    c = np.asarray(center, dtype=float)
    d = np.where(c != 0.0, rel * np.abs(c), rel)
    axes = [(ci - di, ci, ci + di) for ci, di in zip(c, d)]
    return [np.array(pt) for pt in itertools.product(*axes)]


def section_lift(sec: SectionSigma, q) -> PhasePoint:
    q = np.asarray(q, dtype=float)
    try:
        return PhasePoint(sec.value(q), q, sec.sigma_j(q))
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationError(f"section {sec.name} failed at {q}") from exc


def geometric_hj_residual(h: ContactHamiltonian, sec: SectionSigma, grid: Iterable,
                          k: float = 0.0) -> float:
    """Max over the grid of ``|h(sigma(q)) - k|``."""
    return max((abs(h(section_lift(sec, q)) - k) for q in grid), default=0.0)


def projected_field(h: ContactHamiltonian, sec: SectionSigma, q) -> np.ndarray:
    return np.array(contact_vector_field(h, section_lift(sec, q)).dq)
