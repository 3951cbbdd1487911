"""
Ideal-gas thermodynamics on the contact phase space (k_B = 1).

Energy chart:  s = U, q = (S, V, N), p = (T, -P, mu)
Entropy chart: s = S, q = (U, V, N), p = (beta, beta*P, -beta*mu)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .geometry import ContactHamiltonian, PhasePoint
from .submanifold import LegendreGenerator

SINGULAR_DET = 1e-10
SINGULAR_MOMENTUM = 1e-12


class ThermoDomainError(ValueError):
    pass


class SingularRepresentationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class IdealGasParams:
    """
    Constants of the ideal-gas fundamental relations.

    ``K`` defaults to ``A**(-C) * exp(-(C+1))``, the value that makes the
    energy and entropy relations describe the same submanifold.
    """
    A: float = 1.0
    C: float = 1.5
    K: Optional[float] = None

    def __post_init__(self):
        if not (self.A > 0 and self.C > 0):
            raise ValueError(f"A and C must be positive, got A={self.A}, C={self.C}")
        if self.K is None:
            object.__setattr__(self, "K", self.A ** (-self.C) * math.exp(-(self.C + 1.0)))
        elif not self.K > 0:
            raise ValueError(f"K must be positive, got {self.K}")

    @property
    def gamma(self) -> float:
        return (1.0 + self.C) / self.C

    @property
    def consistent(self) -> bool:
        k = self.A ** (-self.C) * math.exp(-(self.C + 1.0))
        return math.isclose(self.K, k, rel_tol=1e-12)


@dataclass(frozen=True)
class GasState:
    U: float
    S: float
    V: float
    N: float
    T: float
    P: float
    mu: float

    @property
    def beta(self) -> float:
        return 1.0 / self.T

    def as_dict(self) -> dict:
        return {"U": self.U, "S": self.S, "V": self.V, "N": self.N,
                "T": self.T, "P": self.P, "mu": self.mu}

    def replace(self, **changes) -> "GasState":
        return replace(self, **changes)


@dataclass(frozen=True)
class InteractionParams:
    a: float
    t: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"interaction strength must be nonnegative, got {self.a}")


# -- fundamental relations ---------------------------------------------------

def _energy(S, V, N, params: IdealGasParams):
    C = params.C
    return params.A * np.exp(S / (C * N)) * V ** (-1.0 / C) * N ** (1.0 + 1.0 / C)


def energy_fundamental(S: float, V: float, N: float,
                       params: IdealGasParams = IdealGasParams()) -> GasState:
    if V <= 0 or N <= 0:
        raise ThermoDomainError(f"need V > 0 and N > 0, got V={V}, N={N}")
    C = params.C
    U = float(_energy(S, V, N, params))
    T = U / (C * N)
    P = U / (C * V)
    mu = U * ((1.0 + 1.0 / C) / N - S / (C * N * N))
    return GasState(U, float(S), float(V), float(N), T, P, mu)


def energy_hessian(S: float, V: float, N: float,
                   params: IdealGasParams = IdealGasParams()) -> np.ndarray:
    """Closed-form Hessian of U(S, V, N)."""
    C = params.C
    U = float(_energy(S, V, N, params))
    g = np.array([1.0 / (C * N), -1.0 / (C * V), (1.0 + 1.0 / C) / N - S / (C * N * N)])
    hl = np.zeros((3, 3))
    hl[0, 2] = hl[2, 0] = -1.0 / (C * N * N)
    hl[1, 1] = 1.0 / (C * V * V)
    hl[2, 2] = 2.0 * S / (C * N ** 3) - (1.0 + 1.0 / C) / (N * N)
    return U * (np.outer(g, g) + hl)


def _entropy(U, V, N, params: IdealGasParams):
    C = params.C
    return N * np.log(params.K * V * U ** C / N ** (C + 1.0)) + (C + 1.0) * N


def entropy_fundamental(U: float, V: float, N: float,
                        params: IdealGasParams = IdealGasParams()) -> GasState:
    if U <= 0 or V <= 0 or N <= 0:
        raise ThermoDomainError(f"need U, V, N > 0, got U={U}, V={V}, N={N}")
    C = params.C
    S = float(_entropy(U, V, N, params))
    T = U / (C * N)
    P = N * T / V
    # dS/dN = S/N - (C + 1)
    mu = -T * (S / N - (C + 1.0))
    return GasState(float(U), S, float(V), float(N), T, P, mu)


def euler_residual(st: GasState) -> float:
    return st.U - st.T * st.S + st.P * st.V - st.mu * st.N


def gas_law_residuals(st: GasState, params: IdealGasParams = IdealGasParams()) -> Tuple[float, float]:
    return (st.P * st.V - st.N * st.T, st.U - params.C * st.N * st.T)


def massieu_potential(T: float, V: float, N: float, params: IdealGasParams = IdealGasParams()):
    """
    Helmholtz-Massieu potential ``Psi = S - U/T`` of the ideal gas.

    Returns ``(Psi, (U, P, mu))`` with the conjugates taken from
    ``U = T^2 dPsi/dT``, ``P = T dPsi/dV``, ``mu = -T dPsi/dN``.
    """
    if T <= 0 or V <= 0 or N <= 0:
        raise ThermoDomainError(f"need T, V, N > 0, got T={T}, V={V}, N={N}")
    C = params.C
    log_arg = math.log(params.K * C ** C * V * T ** C / N)
    psi = N * log_arg + N
    return psi, (C * N * T, N * T / V, -T * log_arg)


def legendre_regularity(block) -> Tuple[float, bool]:
    """Determinant of the swapped-index Hessian block and whether it is nonsingular."""
    m = np.atleast_2d(np.asarray(block, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Hessian block must be square, got shape {m.shape}")
    det = float(np.linalg.det(m))
    return det, abs(det) > SINGULAR_DET


def interacting_state(base: GasState, ip: InteractionParams) -> GasState:
    at = ip.a * ip.t
    return base.replace(U=base.U - at / base.V, P=base.P - at / base.V ** 2)


# -- chart maps ----------------------------------------------------------------

def energy_point(st: GasState) -> PhasePoint:
    return PhasePoint(st.U, (st.S, st.V, st.N), (st.T, -st.P, st.mu))


def state_from_energy_point(x: PhasePoint) -> GasState:
    S, V, N = map(float, x.q)
    T, mP, mu = map(float, x.p)
    return GasState(x.s, S, V, N, T, -mP, mu)


def entropy_point(st: GasState) -> PhasePoint:
    b = st.beta
    return PhasePoint(st.S, (st.U, st.V, st.N), (b, b * st.P, -b * st.mu))


def state_from_entropy_point(x: PhasePoint) -> GasState:
    U, V, N = map(float, x.q)
    b, bP, mbmu = map(float, x.p)
    T = 1.0 / b
    return GasState(U, x.s, V, N, T, bP * T, -mbmu * T)


def energy_generator(params: IdealGasParams = IdealGasParams()) -> LegendreGenerator:
    C = params.C

    def grad(y):
        S, V, N = y
        U = _energy(S, V, N, params)
        return np.array([U / (C * N), -U / (C * V), U * ((1 + 1 / C) / N - S / (C * N * N))])

    return LegendreGenerator(lambda y: _energy(y[0], y[1], y[2], params), 3,
                             grad=grad, name="U(S,V,N)")


def entropy_generator(params: IdealGasParams = IdealGasParams()) -> LegendreGenerator:
    C = params.C

    def grad(y):
        U, V, N = y
        S = _entropy(U, V, N, params)
        return np.array([C * N / U, N / V, S / N - (C + 1.0)])

    return LegendreGenerator(lambda y: _entropy(y[0], y[1], y[2], params), 3,
                             grad=grad, name="S(U,V,N)")


# -- catalog Hamiltonians ----------------------------------------------------

def isochoric_hamiltonian(params: IdealGasParams = IdealGasParams()) -> ContactHamiltonian:
    """``h = TS + mu N - gamma U`` in the energy chart."""
    g = params.gamma

    def h(s, q, p):
        return p[0] * q[0] + p[2] * q[2] - g * s

    def grad(s, q, p):
        return -g, np.array([p[0], 0.0, p[2]]), np.array([q[0], 0.0, q[2]])

    return ContactHamiltonian(h, grad, name="isochoric")


def isothermal_hamiltonian() -> ContactHamiltonian:
    """``h = TS - NT + mu N - U`` in the energy chart."""
    def h(s, q, p):
        return p[0] * (q[0] - q[2]) + p[2] * q[2] - s

    def grad(s, q, p):
        return -1.0, np.array([p[0], 0.0, p[2] - p[0]]), np.array([q[0] - q[2], 0.0, q[2]])

    return ContactHamiltonian(h, grad, name="isochoric-isothermal")


def interaction_hamiltonian(a: float) -> ContactHamiltonian:
    """``h = a/V`` in the energy chart."""
    def h(s, q, p):
        return a / q[1]

    def grad(s, q, p):
        return 0.0, np.array([0.0, -a / q[1] ** 2, 0.0]), np.zeros(3)

    return ContactHamiltonian(h, grad, name=f"a/V(a={a})")


def isochoric_entropy_hamiltonian(params: IdealGasParams = IdealGasParams()) -> ContactHamiltonian:
    """``h = -S - beta mu N + gamma beta U`` in the entropy chart."""
    g = params.gamma

    def h(s, q, p):
        return -s + p[2] * q[2] + g * p[0] * q[0]

    def grad(s, q, p):
        return -1.0, np.array([g * p[0], 0.0, p[2]]), np.array([g * q[0], 0.0, q[2]])

    return ContactHamiltonian(h, grad, name="isochoric (entropy chart)")


def interaction_entropy_hamiltonian(a: float) -> ContactHamiltonian:
    """``h = -beta a / V`` in the entropy chart."""
    def h(s, q, p):
        return -a * p[0] / q[1]

    def grad(s, q, p):
        return 0.0, np.array([0.0, a * p[0] / q[1] ** 2, 0.0]), np.array([-a / q[1], 0.0, 0.0])

    return ContactHamiltonian(h, grad, name=f"-beta a/V(a={a})")


# -- change of representation --------------------------------------------------

@dataclass(frozen=True)
class RepresentationChange:
    """
    Chart change making coordinate ``k`` the new potential.

    New chart: ``s' = q^k``, ``Q = (s, q^j for j != k)``,
    ``P = (1/p_k, -p_j/p_k for j != k)``.
    """
    n: int
    k: int
    others: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not 0 <= self.k < self.n:
            raise ValueError(f"k={self.k} out of range for n={self.n}")
        object.__setattr__(self, "others", tuple(j for j in range(self.n) if j != self.k))

    def to_new(self, x: PhasePoint) -> PhasePoint:
        pk = x.p[self.k]
        if abs(pk) < SINGULAR_MOMENTUM:
            raise SingularRepresentationError(f"p_{self.k} = {pk} is singular")
        o = list(self.others)
        return PhasePoint(x.q[self.k],
                          np.concatenate(([x.s], x.q[o])),
                          np.concatenate(([1.0 / pk], -x.p[o] / pk)))

    def _pk(self, P0: float) -> float:
        if P0 == 0.0 or abs(1.0 / P0) < SINGULAR_MOMENTUM:
            raise SingularRepresentationError(f"new momentum P_1 = {P0} is singular")
        return 1.0 / P0

    def to_old(self, x: PhasePoint) -> PhasePoint:
        pk = self._pk(x.p[0])
        n, o = self.n, list(self.others)
        q = np.empty(n)
        p = np.empty(n)
        q[self.k] = x.s
        q[o] = x.q[1:]
        p[self.k] = pk
        p[o] = -x.p[1:] * pk
        return PhasePoint(x.q[0], q, p)

    def jacobian_to_old(self, x: PhasePoint) -> np.ndarray:
        """d(old flat vector)/d(new flat vector) at new-chart point x."""
        n, k = self.n, self.k
        P0 = x.p[0]
        self._pk(P0)
        jac = np.zeros((2 * n + 1, 2 * n + 1))
        jac[0, 1] = 1.0
        jac[1 + k, 0] = 1.0
        jac[1 + n + k, 1 + n] = -1.0 / P0 ** 2
        for m, j in enumerate(self.others, start=1):
            jac[1 + j, 1 + m] = 1.0
            jac[1 + n + j, 1 + n + m] = -1.0 / P0
            jac[1 + n + j, 1 + n] = x.p[m] / P0 ** 2
        return jac


def transform_hamiltonian_representation(h: ContactHamiltonian, k: int,
                                         n: int = 3) -> ContactHamiltonian:
    """
    Hamiltonian ``-h/p_k`` written in the chart where ``q^k`` is the potential.

    The returned evaluator carries the chart change as ``.chart_change``.
    """
    change = RepresentationChange(n, k)

    def func(s, q, p):
        x = PhasePoint(s, q, p)
        old = change.to_old(x)
        return -h(old) * x.p[0]

    def grad(s, q, p):
        x = PhasePoint(s, q, p)
        old = change.to_old(x)
        hs, hq, hp = h.gradient(old)
        g_old = np.concatenate(([hs], hq, hp))
        g = -x.p[0] * (change.jacobian_to_old(x).T @ g_old)
        g[1 + n] -= h(old)
        return g[0], g[1:n + 1], g[n + 1:]

    out = ContactHamiltonian(func, grad, name=f"-({h.name})/p{k + 1}")
    out.chart_change = change
    return out
