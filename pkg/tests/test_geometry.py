import itertools
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contact_thermo.geometry import (
    ContactChart,
    ContactHamiltonian,
    PhasePoint,
    TangentVector,
    contact_form_apply,
    contact_vector_field,
    finite_difference_gradient,
    pfaffian,
    reeb_defect,
    reeb_vector,
    volume_form_coefficient,
)
from contact_thermo.generic_oc import oc3, oc_contact_hamiltonian
from contact_thermo.thermo import (
    energy_point,
    interaction_entropy_hamiltonian,
    interaction_hamiltonian,
    isochoric_entropy_hamiltonian,
    isochoric_hamiltonian,
    isothermal_hamiltonian,
    transform_hamiltonian_representation,
)


def _perm_sign(perm):
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= (-1) ** (length - 1)
    return sign


def brute_force_top_form(x: PhasePoint) -> float:
    """(eta ^ (d eta)^n)(e_s, e_q1, e_p1, ..., e_qn, e_pn) by summing over all permutations."""
    n = x.n
    m = 2 * n + 1
    order = [0]
    for i in range(n):
        order += [1 + i, 1 + n + i]
    eta = np.concatenate(([1.0], -x.p, np.zeros(n)))
    omega = np.zeros((m, m))
    for i in range(n):
        omega[1 + i, 1 + n + i], omega[1 + n + i, 1 + i] = 1.0, -1.0
    basis = order  # flat indices of the ordered basis vectors
    total = 0.0
    for perm in itertools.permutations(range(m)):
        v = [basis[k] for k in perm]
        term = eta[v[0]]
        for k in range(n):
            term *= omega[v[1 + 2 * k], v[2 + 2 * k]]
            if term == 0.0:
                break
        total += _perm_sign(perm) * term
    return total / (2 ** n)


def catalog():
    hs = [isochoric_hamiltonian(), isothermal_hamiltonian(), interaction_hamiltonian(0.3),
          isochoric_entropy_hamiltonian(), interaction_entropy_hamiltonian(0.3),
          transform_hamiltonian_representation(isochoric_hamiltonian(), 0),
          oc_contact_hamiltonian(oc3())]
    return hs


def test_chart_labels():
    c = ContactChart(2)
    assert c.coordinate_labels == ("s", "q1", "q2", "p1", "p2")
    with pytest.raises(ValueError):
        ContactChart(0)
    with pytest.raises(ValueError):
        ContactChart(1, ("s", "q", "q"))


def test_phase_point_is_immutable():
    x = PhasePoint(1.0, [1, 2], [3, 4])
    with pytest.raises(ValueError):
        x.q[0] = 5.0
    with pytest.raises(ValueError):
        PhasePoint(0.0, [1, 2], [3])
    assert np.array_equal(PhasePoint.from_vector(x.as_vector()).p, x.p)


def test_contact_form_examples(r0):
    x = PhasePoint(0.0, [0.5], [2.0])
    assert contact_form_apply(x, reeb_vector(1)) == 1.0
    assert contact_form_apply(x, TangentVector(0.0, [1.0], [0.0])) == -2.0
    v = TangentVector(1.0, [1, 1, 1], [0, 0, 0])
    assert contact_form_apply(energy_point(r0), v) == pytest.approx(-2.0 / 3.0, abs=1e-15)


def test_contact_form_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        contact_form_apply(PhasePoint(0, [1], [1]), reeb_vector(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_volume_form_matches_brute_force(n, rng):
    for _ in range(3):
        x = PhasePoint(rng.normal(), rng.normal(size=n), rng.normal(size=n))
        c = volume_form_coefficient(x)
        assert c == pytest.approx(brute_force_top_form(x), abs=1e-12)
        assert abs(c) == pytest.approx(factorial(n))


def test_pfaffian_known_values(rng):
    a = np.array([[0, 2.0], [-2.0, 0]])
    assert pfaffian(a) == 2.0
    b = rng.normal(size=(6, 6))
    b = b - b.T
    assert pfaffian(b) ** 2 == pytest.approx(np.linalg.det(b), rel=1e-10)
    assert pfaffian(np.zeros((3, 3))) == 0.0


def test_zero_hamiltonian_field():
    x = PhasePoint(1.0, [1, 2, 3], [4, 5, 6])
    v = contact_vector_field(ContactHamiltonian.zero(), x)
    assert np.all(v.as_vector() == 0.0)
    assert reeb_defect(ContactHamiltonian.zero(), x) == (0.0, 0.0)


def test_a_over_v_field():
    x = PhasePoint(1.0, [0.0, 1.0, 1.0], [2 / 3, -2 / 3, 5 / 3])
    v = contact_vector_field(interaction_hamiltonian(1.0), x)
    assert v.ds == -1.0
    assert np.array_equal(v.dq, np.zeros(3))
    assert np.array_equal(v.dp, [0.0, 1.0, 0.0])
    x2 = x.replace(q=[0.0, 2.0, 1.0])
    assert reeb_defect(interaction_hamiltonian(1.0), x2) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_isochoric_field_at_r0(r0):
    x = energy_point(r0)
    h = isochoric_hamiltonian()
    v = contact_vector_field(h, x)
    assert np.allclose(v.dq, [0, 0, 1], atol=1e-15)
    assert v.ds == pytest.approx(5 / 3, rel=1e-14)
    assert np.allclose(v.dp, [4 / 9, -10 / 9, 10 / 9], rtol=1e-14)
    assert reeb_defect(h, x) == pytest.approx((0.0, 0.0), abs=1e-14)


@pytest.mark.parametrize("h", catalog(), ids=lambda h: h.name)
def test_eta_of_field_is_minus_h(h, rng):
    for _ in range(100):
        x = PhasePoint(rng.normal(), rng.uniform(0.5, 2.0, 3), rng.uniform(0.5, 2.0, 3))
        d1, d2 = reeb_defect(h, x)
        assert abs(d1) <= 1e-10
        assert d2 == 0.0


@pytest.mark.parametrize("h", catalog(), ids=lambda h: h.name)
def test_closed_form_grad_matches_fd(h, rng):
    for _ in range(20):
        x = PhasePoint(rng.normal(), rng.uniform(0.5, 2.0, 3), rng.uniform(0.5, 2.0, 3))
        exact = np.concatenate([np.atleast_1d(g) for g in h.gradient(x)])
        fd = np.concatenate([np.atleast_1d(g) for g in h.fd_gradient(x)])
        scale = max(1.0, np.max(np.abs(exact)))
        assert np.max(np.abs(exact - fd)) / scale <= 1e-6


def test_fd_backed_hamiltonian_used_when_grad_missing(rng):
    h = ContactHamiltonian(lambda s, q, p: s * q[0] ** 2 + p[0] * q[0])
    x = PhasePoint(0.7, [1.3], [0.4])
    hs, hq, hp = h.gradient(x)
    assert hs == pytest.approx(1.69, rel=1e-8)
    assert hq[0] == pytest.approx(2 * 0.7 * 1.3 + 0.4, rel=1e-8)
    assert hp[0] == pytest.approx(1.3, rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6))
def test_fd_gradient_of_quadratic(xs):
    x = np.array(xs)
    g = finite_difference_gradient(lambda v: 0.5 * v @ v, x)
    assert np.allclose(g, x, atol=1e-6)
