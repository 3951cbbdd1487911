"""
GENERIC / Onsager-Casimir dynamics ``q' = J grad E + M grad S`` and its
contact-Hamiltonian lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .dynamics import IntegratorConfig, Monitor, Trajectory, integrate_characteristics
from .geometry import ContactHamiltonian, finite_difference_gradient
from .submanifold import SectionSigma, geometric_hj_residual

DEGENERACY_TOL = 1e-10
PSD_FLOOR = -1e-12


class OCSystemError(ValueError):
    pass


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticForm:
    """``f(q) = 1/2 q.A.q + b.q + c`` with exact gradient and Hessian."""
    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape != (b.size, b.size):
            raise OCSystemError(f"quadratic part has shape {A.shape}, linear part length {b.size}")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def linear(cls, b, c: float = 0.0) -> "QuadraticForm":
        b = np.asarray(b, dtype=float)
        return cls(np.zeros((b.size, b.size)), b, c)

    def __call__(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return float(0.5 * q @ self.A @ q + self.b @ q + self.c)

    def grad(self, q) -> np.ndarray:
        return self.A @ np.asarray(q, dtype=float) + self.b

    def hessian(self, q=None) -> np.ndarray:
        return np.array(self.A)


class _Scalar:
    """Wraps a plain callable with FD gradient and Hessian."""

    def __init__(self, f: Callable, grad: Optional[Callable] = None):
        self.f = f
        self._grad = grad

    def __call__(self, q) -> float:
        return float(self.f(np.asarray(q, dtype=float)))

    def grad(self, q) -> np.ndarray:
        if self._grad is not None:
            return np.asarray(self._grad(np.asarray(q, dtype=float)), dtype=float)
        return finite_difference_gradient(self.f, q)

    def hessian(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        rows = [finite_difference_gradient(lambda v, i=i: self.grad(v)[i], q, 1e-5)
                for i in range(q.size)]
        h = np.array(rows)
        return 0.5 * (h + h.T)


def _as_scalar(f):
    return f if hasattr(f, "grad") and hasattr(f, "hessian") else _Scalar(f)


@dataclass(frozen=True)
class OCSystem:
    dim: int
    J: np.ndarray
    M: np.ndarray
    E: Callable
    S: Callable
    beta: float = 1.0

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        M = np.array(self.M, dtype=float)
        d = self.dim
        if d < 1:
            raise OCSystemError("dim must be positive")
        for name, m in (("J", J), ("M", M)):
            if m.shape != (d, d):
                raise OCSystemError(f"{name} must be {d}x{d}, got shape {m.shape}")
        if np.max(np.abs(J + J.T)) > 1e-12:
            raise OCSystemError("J must be antisymmetric")
        if np.max(np.abs(M - M.T)) > 1e-12:
            raise OCSystemError("M must be symmetric")
        if np.min(np.linalg.eigvalsh(M)) < PSD_FLOOR:
            raise OCSystemError("M must be positive semidefinite")
        if not self.beta > 0:
            raise OCSystemError("beta must be positive")
        J.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "E", _as_scalar(self.E))
        object.__setattr__(self, "S", _as_scalar(self.S))


@dataclass(frozen=True)
class OCPotential:
    """``Phi = -S + beta E``."""
    system: OCSystem

    def __call__(self, q) -> float:
        return -self.system.S(q) + self.system.beta * self.system.E(q)

    def grad(self, q) -> np.ndarray:
        return -self.system.S.grad(q) + self.system.beta * self.system.E.grad(q)

    def hessian(self, q) -> np.ndarray:
        return -self.system.S.hessian(q) + self.system.beta * self.system.E.hessian(q)

    def section(self) -> SectionSigma:
        return SectionSigma(self, self.grad, name="Phi")


def oc3(m: float = 0.5, beta: float = 1.0) -> OCSystem:
    """Reference system: rotation in (q1, q2) with constant entropy production m."""
    J = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    M = np.diag([0.0, 0.0, m])
    E = QuadraticForm(np.diag([1.0, 1.0, 0.0]), np.zeros(3))
    S = QuadraticForm.linear([0.0, 0.0, 1.0])
    return OCSystem(3, J, M, E, S, beta)


def degeneracy_residual(sys: OCSystem, q):
    q = np.asarray(q, dtype=float)
    return (float(np.max(np.abs(sys.J @ sys.S.grad(q)))),
            float(np.max(np.abs(sys.M @ sys.E.grad(q)))))


def oc_vector_field(sys: OCSystem, q, tol: float = 1e-8) -> np.ndarray:
    """``beta^-1 J grad Phi - M grad Phi``; requires the degeneracy conditions at q."""
    q = np.asarray(q, dtype=float)
    r = max(degeneracy_residual(sys, q))
    if r > tol:
        raise DegeneracyError(f"degeneracy conditions violated at q={q} (residual {r:.3e})")
    g = OCPotential(sys).grad(q)
    return sys.J @ g / sys.beta - sys.M @ g


def oc_contact_hamiltonian(sys: OCSystem) -> ContactHamiltonian:
    """``h = -1/2 p.M.p + 1/2 gPhi.M.gPhi + beta^-1 p.J.gPhi`` with ``gPhi = grad Phi(q)``."""
    phi = OCPotential(sys)
    M, J, b = sys.M, sys.J, sys.beta

    def h(s, q, p):
        g = phi.grad(q)
        return -0.5 * p @ M @ p + 0.5 * g @ M @ g + p @ J @ g / b

    def grad(s, q, p):
        g = phi.grad(q)
        H = phi.hessian(q)
        hq = H @ (M @ g) + H @ (J.T @ p) / b
        hp = -M @ p + J @ g / b
        return 0.0, hq, hp

    return ContactHamiltonian(h, grad, name="onsager-casimir")


def oc_integrate(sys: OCSystem, q0, cfg: IntegratorConfig = IntegratorConfig(),
                 check_degeneracy: bool = True) -> Trajectory:
    """Integrate the Onsager-Casimir system; monitors ``E`` and ``S``."""
    if check_degeneracy:
        field_ = lambda q, t: oc_vector_field(sys, q)
    else:
        phi = OCPotential(sys)
        field_ = lambda q, t: sys.J @ phi.grad(q) / sys.beta - sys.M @ phi.grad(q)
    return integrate_characteristics(field_, q0, cfg,
                                     monitors=[Monitor("E", sys.E), Monitor("S", sys.S)])


def oc_geometric_hj_residual(sys: OCSystem, grid: Iterable,
                             sec: Optional[SectionSigma] = None) -> float:
    """Geometric HJ defect of the lifted Hamiltonian; the section defaults to ``Phi``."""
    sec = sec or OCPotential(sys).section()
    return geometric_hj_residual(oc_contact_hamiltonian(sys), sec, grid)
