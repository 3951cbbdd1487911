import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contact_thermo.dynamics import IntegratorConfig, integrate_contact_flow
from contact_thermo.geometry import PhasePoint, finite_difference_gradient
from contact_thermo.thermo import (
    GasState,
    IdealGasParams,
    InteractionParams,
    RepresentationChange,
    SingularRepresentationError,
    ThermoDomainError,
    energy_fundamental,
    energy_hessian,
    energy_point,
    entropy_fundamental,
    entropy_point,
    euler_residual,
    gas_law_residuals,
    interaction_entropy_hamiltonian,
    interaction_hamiltonian,
    interacting_state,
    isochoric_entropy_hamiltonian,
    isochoric_hamiltonian,
    legendre_regularity,
    massieu_potential,
    state_from_energy_point,
    state_from_entropy_point,
    transform_hamiltonian_representation,
)


def test_reference_state(r0):
    assert r0.U == pytest.approx(1.0, rel=1e-15)
    assert (r0.T, r0.P, r0.mu) == pytest.approx((2 / 3, 2 / 3, 5 / 3), rel=1e-14)


def test_k_from_a(params):
    assert params.K == pytest.approx(math.exp(-2.5), rel=1e-15)
    assert params.consistent
    assert not IdealGasParams(K=1.0).consistent
    assert params.gamma == pytest.approx(5 / 3)
    with pytest.raises(ValueError):
        IdealGasParams(A=-1.0)


def test_sackur_tetrode_at_r0(r0):
    st_ = entropy_fundamental(1.0, 1.0, 1.0)
    assert st_.S == pytest.approx(0.0, abs=1e-15)
    assert st_.beta == pytest.approx(1.5)
    assert st_.mu == pytest.approx(5 / 3, rel=1e-14)


def test_domain_errors():
    with pytest.raises(ThermoDomainError):
        energy_fundamental(0.0, 0.0, 1.0)
    with pytest.raises(ThermoDomainError):
        entropy_fundamental(-1.0, 1.0, 1.0)
    with pytest.raises(ThermoDomainError):
        massieu_potential(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        InteractionParams(-0.1)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_homogeneity(lam, rng):
    for _ in range(20):
        S, V, N = rng.normal(), rng.uniform(0.5, 2), rng.uniform(0.5, 2)
        a = energy_fundamental(S, V, N)
        b = energy_fundamental(lam * S, lam * V, lam * N)
        assert abs(b.U - lam * a.U) / abs(lam * a.U) <= 1e-12
        for k in ("T", "P", "mu"):
            assert abs(getattr(b, k) - getattr(a, k)) / max(1.0, abs(getattr(a, k))) <= 1e-12
        c = entropy_fundamental(a.U, V, N)
        d = entropy_fundamental(lam * a.U, lam * V, lam * N)
        assert abs(d.S - lam * c.S) <= 1e-12 * max(1.0, abs(lam * c.S))


def test_round_trip(rng):
    for _ in range(100):
        S, V, N = rng.uniform(-2, 2), rng.uniform(0.2, 5), rng.uniform(0.2, 5)
        a = energy_fundamental(S, V, N)
        b = entropy_fundamental(a.U, V, N)
        for k in ("S", "T", "P", "mu"):
            assert abs(getattr(a, k) - getattr(b, k)) / max(1.0, abs(getattr(a, k))) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10), st.floats(0.1, 10))
def test_euler_and_gas_laws(S, V, N):
    s = energy_fundamental(S, V, N)
    scale = max(1.0, abs(s.U), abs(s.T * s.S), abs(s.mu * s.N))
    assert abs(euler_residual(s)) <= 1e-12 * scale
    pv, eq = gas_law_residuals(s)
    assert abs(pv) <= 1e-12 * scale and abs(eq) <= 1e-12 * scale


def test_chart_round_trips(r0):
    assert state_from_energy_point(energy_point(r0)) == r0
    back = state_from_entropy_point(entropy_point(r0))
    for k, v in r0.as_dict().items():
        assert getattr(back, k) == pytest.approx(v, rel=1e-15)
    assert isinstance(back.T, float)


def test_entropy_point_values(r0):
    x = entropy_point(r0)
    assert np.allclose(x.p, [1.5, 1.0, -2.5], rtol=1e-14)


def test_massieu_conjugates():
    T, V, N = 0.8, 1.3, 1.1
    psi, (U, P, mu) = massieu_potential(T, V, N)
    g = finite_difference_gradient(lambda v: massieu_potential(*v)[0], [T, V, N])
    assert U == pytest.approx(T ** 2 * g[0], rel=1e-7)
    assert P == pytest.approx(T * g[1], rel=1e-7)
    assert mu == pytest.approx(-T * g[2], rel=1e-7)
    # Psi = S - U/T against the fundamental relation
    st_ = entropy_fundamental(U, V, N)
    assert psi == pytest.approx(st_.S - U / T, rel=1e-12)
    assert (st_.T, st_.P, st_.mu) == pytest.approx((T, P, mu), rel=1e-12)


def test_energy_hessian_closed_form_vs_fd():
    S, V, N = 0.3, 1.2, 0.9
    hess = energy_hessian(S, V, N)
    fd = np.array([finite_difference_gradient(
        lambda v, i=i: [energy_fundamental(*v).T, -energy_fundamental(*v).P,
                        energy_fundamental(*v).mu][i], [S, V, N], 1e-5) for i in range(3)])
    assert np.allclose(hess, fd, rtol=1e-6, atol=1e-8)
    assert np.allclose(hess, hess.T)


def test_regularity_at_r0():
    det, ok = legendre_regularity(energy_hessian(0.0, 1.0, 1.0)[:1, :1])
    assert det == pytest.approx(4 / 9, abs=1e-9)
    assert ok


def test_regularity_rejects_singular():
    det, ok = legendre_regularity([[1.0, 2.0], [2.0, 4.0]])
    assert abs(det) <= 1e-12 and not ok
    # the full Hessian of a degree-1 homogeneous function is singular
    assert not legendre_regularity(energy_hessian(0.0, 1.0, 1.0))[1]
    with pytest.raises(ValueError):
        legendre_regularity(np.zeros((2, 3)))


def test_interacting_state(r0):
    s = interacting_state(r0, InteractionParams(0.1, 2.0))
    assert s.U == pytest.approx(0.8, abs=1e-15)
    assert s.P == pytest.approx(2 / 3 - 0.2, abs=1e-15)
    assert (s.S, s.V, s.N, s.T, s.mu) == (r0.S, r0.V, r0.N, r0.T, r0.mu)


def test_representation_change_round_trip(rng):
    ch = RepresentationChange(3, 0)
    for _ in range(20):
        x = PhasePoint(rng.normal(), rng.normal(size=3), rng.uniform(0.5, 2, 3))
        y = ch.to_old(ch.to_new(x))
        assert np.allclose(y.as_vector(), x.as_vector(), rtol=1e-14)
    with pytest.raises(SingularRepresentationError):
        ch.to_new(PhasePoint(0.0, [1, 1, 1], [0.0, 1, 1]))
    with pytest.raises(ValueError):
        RepresentationChange(3, 3)


def test_energy_to_entropy_chart_is_representation_change(r0):
    ch = RepresentationChange(3, 0)
    assert np.allclose(ch.to_new(energy_point(r0)).as_vector(),
                       entropy_point(r0).as_vector(), rtol=1e-14)


def test_transform_matches_catalog_entropy_hamiltonians(rng):
    pairs = [(isochoric_hamiltonian(), isochoric_entropy_hamiltonian()),
             (interaction_hamiltonian(0.3), interaction_entropy_hamiltonian(0.3))]
    for h, expected in pairs:
        ht = transform_hamiltonian_representation(h, 0)
        for _ in range(20):
            x = PhasePoint(rng.normal(), rng.uniform(0.5, 2, 3), rng.uniform(0.5, 2, 3))
            assert ht(x) == pytest.approx(expected(x), rel=1e-12, abs=1e-12)
            for a, b in zip(ht.gradient(x), expected.gradient(x)):
                assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_entropy_isochoric_at_r0(r0):
    x = entropy_point(r0)
    assert isochoric_entropy_hamiltonian()(x) == pytest.approx(0.0, abs=1e-14)


def test_transform_flow_equivalence(r0):
    """The transformed flow keeps equilibrium states on the entropy submanifold."""
    ht = transform_hamiltonian_representation(isochoric_hamiltonian(), 0)
    cfg = IntegratorConfig(dt=1e-3, t_end=1.0)
    tr = integrate_contact_flow(ht, entropy_point(r0), cfg)
    for x in tr.points[::100]:
        s = state_from_entropy_point(x)
        ref = entropy_fundamental(s.U, s.V, s.N)
        assert abs(s.S - ref.S) <= 1e-8
        assert abs(s.T - ref.T) <= 1e-8


def test_state_values_are_plain_floats(r0):
    s = state_from_energy_point(energy_point(r0))
    assert all(type(v) is float for v in s.as_dict().values())
    assert isinstance(GasState(1, 0, 1, 1, 1, 1, 1).beta, float)
