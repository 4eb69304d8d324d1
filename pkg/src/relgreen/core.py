"""Relativistic fixed-energy Green functions in one dimension.

With the worldline scale fixed to unity, the fixed-energy amplitude is

    G(x_b, x_a; E) = (i hbar / 2Mc) * int_0^inf dL  K_L(x_b, x_a),

where K_L is the Euclidean heat kernel of the effective operator

    H_eff = -(hbar^2/2M) d^2/dx^2 + Mc^2/2 - (E - V(x))^2 / (2Mc^2).

The L-integral turns K_L into hbar * H_eff^{-1}, so the amplitude is
``(i hbar^2 / 2Mc)`` times the ordinary Green function of ``H_eff``.  For
V = 0 the Gaussian/Laplace reduction gives the closed form
``i exp(-kappa |x_b - x_a|) / (2 c kappa)``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    NonDecayingSolutionError,
    ThresholdEnergyError,
    WronskianDegeneracyError,
    WronskianMismatchWarning,
)
from .potentials import Potential

# Re(kappa) below this fraction of |kappa| counts as oscillatory.
_DECAY_FLOOR = 1e-12
_WRONSKIAN_FLOOR = 1e-12
_WRONSKIAN_DRIFT = 1e-6
# Homogeneous solutions are renormalised after growing by about e^_CHUNK_GROWTH.
_CHUNK_GROWTH = 25.0


@dataclass(frozen=True)
class ParticleConfig:
    """Unit system: mass M, light speed c and reduced Planck constant hbar."""

    mass: float = 1.0
    light_speed: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "light_speed", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")

    @property
    def rest_energy(self) -> float:
        return self.mass * self.light_speed ** 2

    @property
    def prefactor(self) -> complex:
        """The overall i*hbar/(2Mc) in front of the L-integral."""
        return 1j * self.hbar / (2.0 * self.mass * self.light_speed)


NATURAL_UNITS = ParticleConfig()


def as_energy(E) -> complex:
    """Coerce E to a finite complex number."""
    z = complex(E)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"energy must be finite, got {E!r}")
    return z


def kappa(E, p: ParticleConfig = NATURAL_UNITS) -> complex:
    """Decay constant sqrt(M^2c^4 - E^2)/(hbar c), principal branch.

    Real E below threshold gives a positive real value; real E above
    threshold gives ``+i sqrt(E^2 - M^2c^4)/(hbar c)``.
    """
    E = as_energy(E)
    mc2 = p.rest_energy
    # factored form avoids cancellation close to threshold
    z = (mc2 - E) * (mc2 + E)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)  # drop a signed zero so the cut maps to +i
    return cmath.sqrt(z) / (p.hbar * p.light_speed)


def free_amplitude_1d(x_b: float, x_a: float, E, p: ParticleConfig = NATURAL_UNITS) -> complex:
    """Closed-form free amplitude ``i exp(-kappa|x_b - x_a|) / (2 c kappa)``."""
    k = kappa(E, p)
    if k == 0:
        raise ThresholdEnergyError(f"E = {E!r} is at threshold; the L-integral diverges")
    return 1j * cmath.exp(-k * abs(x_b - x_a)) / (2.0 * p.light_speed * k)


def effective_generator(V: Potential, E, p: ParticleConfig = NATURAL_UNITS):
    """Return U(x) = Mc^2/2 - (E - V(x))^2/(2Mc^2), the potential part of H_eff."""
    E = as_energy(E)
    mc2 = p.rest_energy

    def U(x):
        w = E - np.asarray(V(x), dtype=complex)
        return 0.5 * mc2 - w * w / (2.0 * mc2)

    return U


@dataclass(frozen=True)
class HomogeneousPair:
    """Decaying homogeneous solutions of H_eff u = 0 sampled at knots.

    ``left`` and ``right`` hold (u, u') at each knot, with the accumulated
    log renormalisation in ``log_left`` / ``log_right``, so the true value is
    ``exp(log) * y``.
    """

    knots: np.ndarray
    left: np.ndarray
    right: np.ndarray
    log_left: np.ndarray
    log_right: np.ndarray

    def index(self, x: float) -> int:
        hits = np.flatnonzero(self.knots == x)
        if not hits.size:
            raise KeyError(x)
        return int(hits[0])

    def scaled_wronskian(self, i: int) -> complex:
        uL, dL = self.left[i]
        uR, dR = self.right[i]
        return uL * dR - dL * uR

    def log_wronskian(self, i: int) -> complex:
        """log of the true Wronskian at knot i."""
        return cmath.log(self.scaled_wronskian(i)) + self.log_left[i] + self.log_right[i]

    @property
    def wronskian_drift(self) -> float:
        """Relative change of the Wronskian between the two interval ends."""
        if self.knots.size < 2:
            return 0.0
        d = self.log_wronskian(-1) - self.log_wronskian(0)
        return abs(cmath.exp(d) - 1.0)


def _integration_knots(V: Potential, x_lo: float, x_hi: float, extra) -> np.ndarray:
    pts = {x_lo, x_hi, *extra}
    pts.update(b for b in V.breakpoints if x_lo < b < x_hi)
    return np.array(sorted(pts))


def _growth_scale(V: Potential, E, p: ParticleConfig, x_lo: float, x_hi: float) -> float:
    U = effective_generator(V, E, p)
    xs = np.linspace(x_lo, x_hi, 257) if x_hi > x_lo else np.array([x_lo])
    k2 = np.abs(2.0 * p.mass * U(xs)) / p.hbar ** 2
    return float(np.sqrt(k2.max()))


def _propagate(rhs, knots, y0, rtol, chunk):
    """Carry y = (u, u') through the knots in order, renormalising as it grows."""
    ys = np.empty((len(knots), 2), dtype=complex)
    logs = np.zeros(len(knots), dtype=complex)
    y = np.asarray(y0, dtype=complex)
    log = 0.0 + 0.0j
    ys[0] = y
    for i in range(1, len(knots)):
        a, b = knots[i - 1], knots[i]
        n_sub = max(1, int(math.ceil(abs(b - a) / chunk)))
        for s0, s1 in zip(np.linspace(a, b, n_sub + 1)[:-1], np.linspace(a, b, n_sub + 1)[1:]):
            sol = solve_ivp(rhs, (s0, s1), y, method="DOP853", rtol=rtol, atol=rtol * 1e-12)
            if not sol.success:
                raise ArithmeticError(f"homogeneous integration failed: {sol.message}")
            y = sol.y[:, -1]
            norm = abs(y[0]) + abs(y[1])
            if norm > 0:
                y = y / norm
                log += math.log(norm)
        ys[i] = y
        logs[i] = log
    return ys, logs


def solve_homogeneous(V: Potential, E, x_lo: float, x_hi: float, p: ParticleConfig = NATURAL_UNITS,
                      tol: float = 1e-10, extra_knots=()) -> HomogeneousPair:
    """Integrate the left- and right-decaying solutions across [x_lo, x_hi].

    Both start from the exact exponential valid in the constant region
    beyond each end and are integrated inward with DOP853.
    """
    E = as_energy(E)
    v_left, v_right = V.asymptotic_values
    if V.domain is not None:
        x_lo = min(x_lo, V.domain[0])
        x_hi = max(x_hi, V.domain[1])
    k_left, k_right = kappa(E - v_left, p), kappa(E - v_right, p)
    for side, k in (("left", k_left), ("right", k_right)):
        if k == 0 or k.real <= _DECAY_FLOOR * abs(k):
            raise NonDecayingSolutionError(
                f"no decaying solution toward the {side} (kappa = {k:.6g}); E lies in the continuum")

    U = effective_generator(V, E, p)
    c = 2.0 * p.mass / p.hbar ** 2

    def rhs(x, y):
        return np.array([y[1], c * U(x) * y[0]])

    knots = _integration_knots(V, x_lo, x_hi, extra_knots)
    chunk = _CHUNK_GROWTH / max(_growth_scale(V, E, p, x_lo, x_hi), 1e-300)
    rtol = max(tol * 0.1, 1e-13)
    left, log_left = _propagate(rhs, knots, (1.0, k_left), rtol, chunk)
    right_rev, log_right_rev = _propagate(rhs, knots[::-1], (1.0, -k_right), rtol, chunk)
    return HomogeneousPair(knots, left, right_rev[::-1], log_left, log_right_rev[::-1])


def resolvent_1d(V: Potential, E, x_b: float, x_a: float, p: ParticleConfig = NATURAL_UNITS,
                 tol: float = 1e-10, pair: Optional[HomogeneousPair] = None) -> complex:
    """Fixed-energy amplitude for an arbitrary piecewise-smooth potential.

    Built from the two decaying homogeneous solutions:
    ``G = (i hbar^2/2Mc) * (-2M/hbar^2) u_L(x_<) u_R(x_>) / W``.

    Raises NonDecayingSolutionError when E is in the continuum of the
    asymptotic potential and WronskianDegeneracyError when E is on an
    eigenvalue.  A WronskianMismatchWarning signals integrator trouble.
    """
    lo, hi = min(x_a, x_b), max(x_a, x_b)
    if pair is None:
        pair = solve_homogeneous(V, E, lo, hi, p, tol, extra_knots=(lo, hi))
    i, j = pair.index(lo), pair.index(hi)
    uL, dL = pair.left[i]
    uR_lo, dR_lo = pair.right[i]
    w = uL * dR_lo - dL * uR_lo
    if abs(w) <= _WRONSKIAN_FLOOR * (abs(uL * dR_lo) + abs(dL * uR_lo)):
        raise WronskianDegeneracyError(f"Wronskian vanishes at E = {E!r}; E is on an eigenvalue")
    drift = pair.wronskian_drift
    if drift > _WRONSKIAN_DRIFT:
        warnings.warn(f"Wronskian drifted by {drift:.3g} across the interval",
                      WronskianMismatchWarning, stacklevel=2)
    uR_hi = pair.right[j][0] * cmath.exp(pair.log_right[j] - pair.log_right[i])
    return -1j / p.light_speed * uL * uR_hi / w
