import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relgreen.errors import SingularJacobianError
from relgreen.geometry import (CoordinateMap, SlicedPathState, connection, covariant_divergence, frame,
                               identity_coordinates, induced_metric, initial_measure, polar_coordinates,
                               raised_contraction_direct, slice_measure, sliced_action, sliced_action_term,
                               spherical_coordinates)

from oracles import polar_action_term

POLAR = polar_coordinates()


def square_1d():
    return CoordinateMap(1, lambda q: np.array([q[0] ** 2]), lambda q: np.array([[2 * q[0]]]),
                         lambda q: np.array([[[2.0]]]), lower=(0.0,), name="square")


def test_identity_frame_metric_connection():
    for dim in (1, 2, 3):
        q = np.linspace(-1, 1, dim)
        m = identity_coordinates(dim)
        assert np.array_equal(frame(m, q).matrix, np.eye(dim))
        met = induced_metric(frame(m, q))
        assert np.array_equal(met.g, np.eye(dim)) and met.sqrt_g == 1.0
        c = connection(m, q)
        assert not c.gamma.any() and not c.trace.any() and not c.raised.any()


def test_polar_frame_and_metric():
    assert np.array_equal(frame(POLAR, [2.0, 0.0]).matrix, [[1.0, 0.0], [0.0, 2.0]])
    met = induced_metric(frame(POLAR, [2.0, 0.0]))
    assert np.array_equal(met.g, np.diag([1.0, 4.0])) and met.sqrt_g == 2.0


@pytest.mark.parametrize("q", [[1.0, 0.3], [2.5, -1.2], [0.4, 2.9]])
def test_polar_fd_agreement(q):
    num = POLAR.numerical()
    assert np.allclose(frame(num, q).matrix, frame(POLAR, q).matrix, atol=1e-6, rtol=0)
    ca, cn = connection(POLAR, q), connection(num, q)
    assert np.allclose(cn.trace, ca.trace, atol=1e-6, rtol=0)
    assert np.allclose(cn.raised, ca.raised, atol=1e-6, rtol=0)


def test_polar_connection_values():
    r = 1.7
    c = connection(POLAR, [r, 0.4])
    assert c.gamma[0, 1, 1] == pytest.approx(1 / r) and c.gamma[1, 0, 1] == pytest.approx(1 / r)
    assert c.gamma[1, 1, 0] == pytest.approx(-r)
    assert c.trace == pytest.approx([1 / r, 0.0], abs=1e-15)
    assert c.raised == pytest.approx([-1 / r, 0.0], abs=1e-15)


def test_square_map_connection():
    for q in (0.5, 1.0, 3.0):
        assert connection(square_1d(), [q]).gamma[0, 0, 0] == pytest.approx(1 / q, rel=1e-15)
        assert connection(square_1d().numerical(), [q]).gamma[0, 0, 0] == pytest.approx(1 / q, rel=1e-7)


@pytest.mark.parametrize("m, q", [(POLAR, [1.3, 0.7]), (spherical_coordinates(), [1.2, 0.9, 0.4]),
                                  (square_1d(), [0.8])])
def test_contraction_identity(m, q):
    assert np.allclose(connection(m, q).raised, raised_contraction_direct(m, q), rtol=0, atol=1e-12)


def test_singular_jacobian():
    with pytest.raises(SingularJacobianError):
        frame(POLAR, [0.0, 0.3])


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
@settings(max_examples=40)
def test_metric_symmetric_positive(entries):
    e = np.array(entries).reshape(3, 3) + 3 * np.eye(3)
    m = CoordinateMap(3, lambda q: e @ q, lambda q: e)
    met = induced_metric(frame(m, np.zeros(3)))
    assert np.allclose(met.g, met.g.T)
    assert np.all(np.linalg.eigvalsh(met.g) > 0)
    assert met.sqrt_g == pytest.approx(math.sqrt(np.linalg.det(met.g)), rel=1e-10)


def test_divergence_examples():
    flat = identity_coordinates(2)
    q = np.array([0.3, -0.2])
    assert covariant_divergence(lambda t: np.array([1.0, 2.0]), connection(flat, q), q) == pytest.approx(0, abs=1e-10)
    qp = np.array([1.4, 0.6])
    radial = lambda t: np.array([t[0], 0.0])
    assert covariant_divergence(radial, connection(POLAR, qp), qp) == pytest.approx(2.0, rel=1e-9)


def test_divergence_linear():
    qp = np.array([1.1, 0.2])
    c = connection(POLAR, qp)
    A = lambda t: np.array([t[0] ** 2, math.sin(t[1])])
    B = lambda t: np.array([math.cos(t[1]), t[0]])
    lhs = covariant_divergence(lambda t: 2 * A(t) - 3 * B(t), c, qp)
    assert lhs == pytest.approx(2 * covariant_divergence(A, c, qp) - 3 * covariant_divergence(B, c, qp), rel=1e-9)


def test_flat_action_examples():
    m = identity_coordinates(1)
    st_ = SlicedPathState([[0.0], [0.3]], [1.0], 0.1)
    assert sliced_action_term(st_, 1, m) == pytest.approx(0.09 / 0.2 + 0.05, rel=1e-15)
    still = SlicedPathState([[0.3], [0.3]], [2.0], 0.1, energy=0.5, potential=lambda x: 0.1)
    assert sliced_action_term(still, 1, m) == pytest.approx(0.2 * (0.5 - 0.16 / 2), rel=1e-14)


def test_polar_action_matches_term_by_term_oracle():
    rng = np.random.default_rng(11)
    A = lambda q: np.array([0.4 * q[0], -0.3 * math.sin(q[1])])
    V = lambda x: 0.2 * x[0] - 0.1 * x[1] ** 2
    for _ in range(5):
        q0 = np.array([rng.uniform(0.5, 2.0), rng.uniform(-1, 1)])
        q1 = q0 + rng.normal(scale=0.05, size=2)
        s = SlicedPathState([q0, q1], [1.3], 0.05, 0.6, A, V, charge=0.8)
        got = sliced_action_term(s, 1, POLAR)
        ref = polar_action_term(q0, q1, 0.05, 1.3, 0.6, charge=0.8, A_cov=True, A_coef=(0.4, -0.3),
                                V=lambda x, y: 0.2 * x - 0.1 * y * y)
        assert abs(got - ref) <= 1e-9 * abs(ref)


def test_kinetic_term_coordinate_invariance():
    q = np.array([1.3, 0.4])
    d = np.array([0.03, -0.02])
    g = induced_metric(frame(POLAR, q)).g
    rem = []
    for k in range(4):
        dq = d / 2 ** k
        dx = POLAR.position(q) - POLAR.position(q - dq)
        rem.append(abs(dx @ dx - dq @ g @ dq))
    ratios = [rem[i] / rem[i + 1] for i in range(3)]
    assert all(7.0 < r < 9.0 for r in ratios)


def test_sliced_action_sums_terms():
    s = SlicedPathState([[1.0, 0.0], [1.1, 0.1], [1.15, 0.12]], [1.0, 1.0], 0.1, 0.3)
    total = sliced_action_term(s, 1, POLAR) + sliced_action_term(s, 2, POLAR)
    assert sliced_action(s, POLAR) == pytest.approx(total)


def test_measure_factors():
    m = identity_coordinates(2)
    eps = 0.05
    assert slice_measure(m, [0.1, 0.2], eps) == pytest.approx(1 / (2 * math.pi * eps))
    assert slice_measure(POLAR, [2.0, 0.2], eps) == pytest.approx(2 / (2 * math.pi * eps))
    assert initial_measure(eps, 1.0, 1.0, 1) == pytest.approx((2 * math.pi * eps) ** -0.5)


def test_rest_mass_toggle():
    s = SlicedPathState([[0.0], [0.0]], [1.0], 0.2)
    m = identity_coordinates(1)
    assert sliced_action_term(s, 1, m) - sliced_action_term(s, 1, m, include_rest_mass=False) == pytest.approx(0.1)
