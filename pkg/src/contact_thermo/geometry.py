"""
Darboux-chart contact geometry.

A point of the (2n+1)-dimensional phase space is stored as ``(s, q, p)``
with contact form ``eta = ds - p_i dq^i`` and Reeb field ``d/ds``.
Flat vectors are laid out as ``[s, q_1..q_n, p_1..p_n]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Optional, Tuple

import numpy as np

Gradient = Tuple[float, np.ndarray, np.ndarray]


class EvaluationError(RuntimeError):
    """A Hamiltonian or generator could not be evaluated at a point."""


def _frozen(v) -> np.ndarray:
    a = np.array(v, dtype=float).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ContactChart:
    n: int
    coordinate_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("chart needs n >= 1")
        labels = tuple(self.coordinate_labels) or default_labels(self.n)
        if len(labels) != 2 * self.n + 1:
            raise ValueError(f"expected {2 * self.n + 1} labels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError("coordinate labels must be unique")
        object.__setattr__(self, "coordinate_labels", labels)


def default_labels(n: int) -> Tuple[str, ...]:
    return ("s",) + tuple(f"q{i + 1}" for i in range(n)) + tuple(f"p{i + 1}" for i in range(n))


ENERGY_CHART = ContactChart(3, ("U", "S", "V", "N", "T", "-P", "mu"))
ENTROPY_CHART = ContactChart(3, ("S", "U", "V", "N", "beta", "beta*P", "-beta*mu"))


@dataclass(frozen=True)
class PhasePoint:
    s: float
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "q", _frozen(self.q))
        object.__setattr__(self, "p", _frozen(self.p))
        if self.q.shape != self.p.shape:
            raise ValueError(f"q and p lengths differ: {self.q.size} != {self.p.size}")

    @property
    def n(self) -> int:
        return self.q.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.s], self.q, self.p))

    @classmethod
    def from_vector(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        if z.size % 2 != 1:
            raise ValueError("phase vector must have odd length 2n+1")
        n = (z.size - 1) // 2
        return cls(z[0], z[1:n + 1], z[n + 1:])

    def replace(self, s=None, q=None, p=None) -> "PhasePoint":
        return PhasePoint(self.s if s is None else s,
                          self.q if q is None else q,
                          self.p if p is None else p)


@dataclass(frozen=True)
class TangentVector:
    ds: float
    dq: np.ndarray
    dp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ds", float(self.ds))
        object.__setattr__(self, "dq", _frozen(self.dq))
        object.__setattr__(self, "dp", _frozen(self.dp))
        if self.dq.shape != self.dp.shape:
            raise ValueError("dq and dp lengths differ")

    @property
    def n(self) -> int:
        return self.dq.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.ds], self.dq, self.dp))

    @classmethod
    def from_vector(cls, z) -> "TangentVector":
        z = np.asarray(z, dtype=float)
        n = (z.size - 1) // 2
        return cls(z[0], z[1:n + 1], z[n + 1:])


def reeb_vector(n: int) -> TangentVector:
    return TangentVector(1.0, np.zeros(n), np.zeros(n))


def fd_step(x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    return rel_step * np.maximum(1.0, np.abs(x))


def finite_difference_gradient(f: Callable[[np.ndarray], float], x,
                               rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with step ``rel_step * max(1, |x_i|)``."""
    x = np.array(x, dtype=float)
    steps = fd_step(x, rel_step)
    g = np.empty_like(x)
    for i, h in enumerate(steps):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


class ContactHamiltonian:
    """
    Evaluator for a contact Hamiltonian ``h(s, q, p)`` and its partials.

    ``func(s, q, p)`` returns the value. ``grad(s, q, p)`` returns
    ``(dh/ds, dh/dq, dh/dp)``; when omitted the gradient is taken by
    central finite differences.
    """

    def __init__(self, func: Callable[[float, np.ndarray, np.ndarray], float],
                 grad: Optional[Callable[[float, np.ndarray, np.ndarray], Gradient]] = None,
                 name: str = "h", fd_rel_step: float = 1e-6):
        self.func = func
        self._grad = grad
        self.name = name
        self.fd_rel_step = fd_rel_step

    def __repr__(self):
        kind = "closed-form" if self._grad is not None else "fd"
        return f"ContactHamiltonian({self.name!r}, grad={kind})"

    @property
    def has_closed_form_grad(self) -> bool:
        return self._grad is not None

    def value(self, s: float, q: np.ndarray, p: np.ndarray) -> float:
        return float(self.func(s, q, p))

    def __call__(self, x: PhasePoint) -> float:
        return self.value(x.s, x.q, x.p)

    def partials(self, s: float, q: np.ndarray, p: np.ndarray) -> Gradient:
        if self._grad is None:
            return self._fd_partials(s, q, p)
        hs, hq, hp = self._grad(s, q, p)
        return float(hs), np.asarray(hq, dtype=float), np.asarray(hp, dtype=float)

    def gradient(self, x: PhasePoint) -> Gradient:
        return self.partials(x.s, x.q, x.p)

    def _fd_partials(self, s, q, p) -> Gradient:
        n = len(q)
        z = np.concatenate(([s], q, p))
        g = finite_difference_gradient(
            lambda v: self.func(v[0], v[1:n + 1], v[n + 1:]), z, self.fd_rel_step)
        return g[0], g[1:n + 1], g[n + 1:]

    def fd_gradient(self, x: PhasePoint) -> Gradient:
        return self._fd_partials(x.s, x.q, x.p)

    @classmethod
    def zero(cls) -> "ContactHamiltonian":
        return cls(lambda s, q, p: 0.0,
                   lambda s, q, p: (0.0, np.zeros(len(q)), np.zeros(len(p))),
                   name="zero")


def _check_dims(x: PhasePoint, v: TangentVector):
    if x.n != v.n:
        raise ValueError(f"dimension mismatch: point has n={x.n}, vector has n={v.n}")


def contact_form_apply(x: PhasePoint, v: TangentVector) -> float:
    """``eta_x(v) = v.ds - p . v.dq``."""
    _check_dims(x, v)
    return v.ds - float(np.dot(x.p, v.dq))


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a skew-symmetric matrix (Parlett-Reid elimination with pivoting)."""
    a = np.array(a, dtype=float)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("pfaffian needs a square matrix")
    if m % 2:
        return 0.0
    pf = 1.0
    for k in range(0, m - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < m:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def _interleaved_order(n: int) -> list:
    # flat index of s, q1, p1, q2, p2, ...
    order = [0]
    for i in range(n):
        order += [1 + i, 1 + n + i]
    return order


def contact_form_components(x: PhasePoint) -> np.ndarray:
    """Components of eta in the flat basis ``(ds, dq, dp)``."""
    return np.concatenate(([1.0], -x.p, np.zeros(x.n)))


def d_eta_matrix(n: int) -> np.ndarray:
    """Skew matrix of ``d eta = sum_i dq^i ^ dp_i`` in the flat basis."""
    w = np.zeros((2 * n + 1, 2 * n + 1))
    for i in range(n):
        w[1 + i, 1 + n + i] = 1.0
        w[1 + n + i, 1 + i] = -1.0
    return w


def volume_form_coefficient(x: PhasePoint) -> float:
    """
    Coefficient c of ``eta ^ (d eta)^n = c ds^dq1^dp1^...^dqn^dpn``.

    The top form ``a ^ w^n`` equals ``n! Pf(B)`` times the volume element,
    where ``B`` is ``w`` bordered by the components of ``a``.
    """
    n = x.n
    order = _interleaved_order(n)
    a = contact_form_components(x)[order]
    w = d_eta_matrix(n)[np.ix_(order, order)]
    m = 2 * n + 1
    b = np.zeros((m + 1, m + 1))
    b[0, 1:] = a
    b[1:, 0] = -a
    b[1:, 1:] = w
    c = factorial(n) * pfaffian(b)
    if not np.isfinite(c):
        # determinant fallback fixes the magnitude only
        c = factorial(n) * np.sqrt(abs(np.linalg.det(b)))
    return float(c)


def contact_vector_field(h: ContactHamiltonian, x: PhasePoint) -> TangentVector:
    try:
        hs, hq, hp = h.gradient(x)
        hval = h(x)
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationError(f"cannot evaluate {h.name} at {x}") from exc
    ds = float(np.dot(x.p, hp)) - hval
    dp = -(x.p * hs + hq)
    return TangentVector(ds, hp, dp)


def contact_vector_field_flat(h: ContactHamiltonian, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Same field as :func:`contact_vector_field` acting on flat vectors."""
    def field(z: np.ndarray) -> np.ndarray:
        s, q, p = z[0], z[1:n + 1], z[n + 1:]
        hs, hq, hp = h.partials(s, q, p)
        out = np.empty_like(z)
        out[0] = np.dot(p, hp) - h.value(s, q, p)
        out[1:n + 1] = hp
        out[n + 1:] = -(p * hs + hq)
        return out
    return field


def reeb_defect(h: ContactHamiltonian, x: PhasePoint) -> Tuple[float, float]:
    """Returns ``(eta(X_h) + h, eta(xi) - 1)``; both vanish identically."""
    xh = contact_vector_field(h, x)
    return (contact_form_apply(x, xh) + h(x),
            contact_form_apply(x, reeb_vector(x.n)) - 1.0)
