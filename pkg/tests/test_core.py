import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relgreen import ParticleConfig, Potential, free_amplitude_1d, kappa, resolvent_1d
from relgreen.core import effective_generator, solve_homogeneous
from relgreen.errors import NonDecayingSolutionError, ThresholdEnergyError

from oracles import free_L_integral

sub_threshold = st.floats(-0.95, 0.95)
separation = st.floats(0.0, 4.0)


@pytest.mark.parametrize("E, expected", [(0.0, 1.0), (1.0, 0.0), (math.sqrt(2), 1j)])
def test_kappa_examples(E, expected):
    assert kappa(E) == pytest.approx(expected, abs=1e-15)


def test_kappa_branch_below_and_above_threshold():
    assert kappa(-0.3).imag == 0 and kappa(-0.3).real > 0
    k = kappa(-1.7)
    assert k.real == 0 and k.imag > 0


def test_kappa_units():
    p = ParticleConfig(mass=2.0, light_speed=3.0, hbar=0.5)
    E = 7.0
    assert kappa(E, p) == pytest.approx(math.sqrt(18.0 ** 2 - 49.0) / 1.5)


def test_particle_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        ParticleConfig(mass=0.0)


def test_free_examples():
    assert free_amplitude_1d(0.0, 0.0, 0.0) == pytest.approx(0.5j, rel=1e-15)
    assert free_amplitude_1d(1.0, 0.0, 0.0) == pytest.approx(0.5j * math.exp(-1), rel=1e-15)


def test_free_threshold_raises():
    with pytest.raises(ThresholdEnergyError):
        free_amplitude_1d(0.0, 1.0, 1.0)


@given(sub_threshold, separation)
@settings(max_examples=25, deadline=None)
def test_free_matches_L_quadrature(E, dx):
    assert abs(free_amplitude_1d(dx, 0.0, E) - free_L_integral(dx, E)) <= 1e-8 * abs(free_L_integral(dx, E))


def test_free_quadrature_in_other_units():
    M, c, hbar = 2.0, 3.0, 0.7
    p = ParticleConfig(M, c, hbar)
    got = free_amplitude_1d(0.4, 0.0, 11.0, p)
    assert got == pytest.approx(free_L_integral(0.4, 11.0, M, c, hbar), rel=1e-8)


@given(sub_threshold, st.floats(-3, 3), st.floats(-3, 3))
def test_free_symmetry(E, xb, xa):
    assert free_amplitude_1d(xb, xa, E) == free_amplitude_1d(xa, xb, E)


@given(sub_threshold, st.floats(0.01, 5.0))
def test_free_exponential_decay(E, ell):
    ratio = free_amplitude_1d(2 * ell, 0.0, E) / free_amplitude_1d(ell, 0.0, E)
    assert ratio == pytest.approx(cmath.exp(-kappa(E) * ell), rel=1e-10)


def test_resolvent_zero_potential_matches_free():
    for E, xb, xa in [(0.0, 1.0, 0.0), (0.7, -0.3, 2.1), (-0.5, 0.2, 0.2)]:
        assert resolvent_1d(Potential.zero(), E, xb, xa) == pytest.approx(free_amplitude_1d(xb, xa, E), rel=1e-8)


def test_resolvent_constant_shift():
    V = Potential.constant(0.4)
    for E in (0.0, 0.9, -0.3):
        assert resolvent_1d(V, E, 1.3, 0.1) == pytest.approx(free_amplitude_1d(1.3, 0.1, E - 0.4), rel=1e-8)


def test_resolvent_complex_energy():
    E = 0.5 + 0.2j
    assert resolvent_1d(Potential.zero(), E, 0.7, 0.0) == pytest.approx(free_amplitude_1d(0.7, 0.0, E), rel=1e-8)


@pytest.mark.parametrize("xb, xa", [(0.3, -0.8), (1.5, 0.2), (-2.0, 2.5)])
def test_resolvent_symmetry_square_well(xb, xa):
    V = Potential.square_well(-0.5, -1.0, 1.0)
    assert resolvent_1d(V, 0.2, xb, xa) == pytest.approx(resolvent_1d(V, 0.2, xa, xb), rel=1e-8)


def test_resolvent_continuum_raises():
    with pytest.raises(NonDecayingSolutionError):
        resolvent_1d(Potential.zero(), 1.3, 0.0, 1.0)


def test_wronskian_constancy():
    V = Potential.tabulated(np.linspace(-2, 2, 21), 0.3 * np.cos(np.linspace(-2, 2, 21)))
    pair = solve_homogeneous(V, 0.1, -3.0, 3.0)
    assert pair.wronskian_drift < 1e-6


def test_effective_operator_annihilates_resolvent():
    """-(hbar^2/2M) G'' + U G = 0 for x_b away from x_a; second differences converge as h^2."""
    V = Potential.square_well(-0.4, -1.0, 1.0)
    E, xa, xb = 0.3, -2.0, 0.3
    U = effective_generator(V, E)
    G = lambda x: resolvent_1d(V, E, x, xa)
    residuals = []
    for h in (0.04, 0.02):
        second = (G(xb + h) - 2 * G(xb) + G(xb - h)) / h ** 2
        residuals.append(abs(-0.5 * second + U(xb) * G(xb)) / abs(G(xb)))
    assert residuals[1] < 1e-3
    assert residuals[0] / residuals[1] == pytest.approx(4.0, rel=0.1)
