"""Duru-Kleinert radial machinery.

A radial problem is rewritten through r = h(q) with profile f = h'(q)^2.
The coordinate change leaves behind an effective potential built from the
derivatives of h, and the angular part separates into partial waves with a
centrifugal coefficient (l + D/2 - 1)^2 - 1/4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import eval_legendre

from ._numdiff import central_derivative
from .boundary import ResolventGreen, wall_amplitude
from .core import NATURAL_UNITS, ParticleConfig, as_energy
from .errors import DerivativeUnavailableError, DomainError, UnsupportedChannelError, UnsupportedDimensionError
from .potentials import Potential

Scalar = Callable[[float], float]


@dataclass(frozen=True)
class DKMap:
    """r = h(q) on ``domain`` with optional analytic derivatives.

    Missing derivatives fall back to Richardson central differences of the
    highest analytic lower derivative, unless ``fd_fallback`` is False.
    """

    h: Scalar
    dh: Optional[Scalar] = None
    d2h: Optional[Scalar] = None
    d3h: Optional[Scalar] = None
    domain: Tuple[float, float] = (-math.inf, math.inf)
    fd_fallback: bool = True
    fd_step: float = 1e-2
    name: str = "custom"

    def check(self, q: float) -> None:
        lo, hi = self.domain
        if not lo <= q <= hi:
            raise DomainError(f"q = {q} outside the map domain {self.domain}")

    def derivative(self, order: int, q: float) -> float:
        self.check(q)
        chain = (self.h, self.dh, self.d2h, self.d3h)
        if chain[order] is not None:
            return float(chain[order](q))
        if not self.fd_fallback:
            raise DerivativeUnavailableError(
                f"map {self.name!r} has no analytic derivative of order {order} and fd_fallback is off")
        base = max(m for m in range(order) if chain[m] is not None)
        step = self.fd_step * max(abs(q), 1.0)
        return float(central_derivative(chain[base], q, order - base, step))

    def without_derivatives(self) -> "DKMap":
        return DKMap(self.h, domain=self.domain, fd_fallback=True, fd_step=self.fd_step, name=self.name + "-fd")

    def scaled(self, s: float) -> "DKMap":
        """The map q -> h(s q), with analytic derivatives by the chain rule."""
        def wrap(fn, k):
            return None if fn is None else (lambda q: s ** k * fn(s * q))
        lo, hi = self.domain
        dom = tuple(sorted((lo / s, hi / s)))
        return DKMap(wrap(self.h, 0), wrap(self.dh, 1), wrap(self.d2h, 2), wrap(self.d3h, 3),
                     dom, self.fd_fallback, self.fd_step, f"{self.name}*{s:g}")


def identity_map() -> DKMap:
    return DKMap(lambda q: q, lambda q: 1.0, lambda q: 0.0, lambda q: 0.0, name="identity")


def square_map() -> DKMap:
    return DKMap(lambda q: q * q, lambda q: 2 * q, lambda q: 2.0, lambda q: 0.0,
                 domain=(0.0, math.inf), name="square")


def exponential_map() -> DKMap:
    return DKMap(math.exp, math.exp, math.exp, math.exp, name="exponential")


BUILTIN_MAPS = {"identity": identity_map, "square": square_map, "exponential": exponential_map}


@dataclass(frozen=True)
class AngularChannel:
    l: int
    D: int

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 0:
            raise ValueError(f"l must be a nonnegative integer, got {self.l!r}")
        if int(self.D) != self.D or self.D < 2:
            raise ValueError(f"D must be an integer >= 2, got {self.D!r}")


@dataclass(frozen=True)
class RadialSlicedPath:
    """Slice points q_0..q_N, one rho per slice (post-point), slice width eps."""

    q: Tuple[float, ...]
    rho: Tuple[float, ...]
    eps: float
    channel: AngularChannel

    def __post_init__(self):
        if len(self.q) < 2:
            raise ValueError("a sliced path needs at least two points")
        if len(self.rho) != len(self.q) - 1:
            raise ValueError("need one rho per slice")
        if any(r <= 0 for r in self.rho):
            raise ValueError("rho must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def profile_function(m: DKMap, q: float) -> float:
    """f = h'(q)^2."""
    return m.derivative(1, q) ** 2


def effective_potential(m: DKMap, q: float, rho: float = 1.0, p: ParticleConfig = NATURAL_UNITS) -> float:
    """-(rho hbar^2/M) [ h'''/(4 h') - (3/8) (h''/h')^2 ]."""
    d1 = m.derivative(1, q)
    if d1 == 0:
        raise DomainError(f"h'(q) vanishes at q = {q}; the map is not invertible there")
    d2, d3 = m.derivative(2, q), m.derivative(3, q)
    return -rho * p.hbar ** 2 / p.mass * (0.25 * d3 / d1 - 0.375 * (d2 / d1) ** 2)


def centrifugal_coefficient(ch: AngularChannel) -> float:
    """(l + D/2 - 1)^2 - 1/4."""
    return (ch.l + ch.D / 2 - 1) ** 2 - 0.25


def dk_radial_action(path: RadialSlicedPath, m: DKMap, V: Potential, E,
                     p: ParticleConfig = NATURAL_UNITS):
    """Sliced transformed radial action, every term at the post-point.

    Returns a float for real E and a complex number otherwise.
    """
    E = as_energy(E)
    M, c, hbar = p.mass, p.light_speed, p.hbar
    coeff = centrifugal_coefficient(path.channel)
    eps = path.eps
    total = 0.0 + 0.0j
    for n in range(1, len(path.q)):
        q, rho = path.q[n], path.rho[n - 1]
        dq = q - path.q[n - 1]
        m.check(q)
        r = m.h(q)
        bracket = hbar ** 2 / (2 * M) * coeff / r ** 2 - (E - V(r)) ** 2 / (2 * M * c ** 2) + M * c ** 2 / 2
        total += eps * (M / (2 * rho) * (dq / eps) ** 2
                        + rho * profile_function(m, q) * bracket
                        + effective_potential(m, q, rho, p))
    return total.real if E.imag == 0 else total


def dk_radial_amplitude(m: DKMap, q_b: float, q_a: float, G_q: complex,
                        p: ParticleConfig = NATURAL_UNITS) -> complex:
    """Radial amplitude from the transformed one: (i hbar/2Mc) f_b^(1/4) f_a^(1/4) G(q_b, q_a)."""
    fb, fa = profile_function(m, q_b), profile_function(m, q_a)
    return p.prefactor * fb ** 0.25 * fa ** 0.25 * G_q


def radial_wall_amplitude(V: Potential, E, ch: AngularChannel, r_b: float, r_a: float,
                          p: ParticleConfig = NATURAL_UNITS, tol: float = 1e-10) -> complex:
    """Radial amplitude for a channel without centrifugal term (l = 0, D = 3).

    That channel is the half-line problem with a wall at the origin, so it
    is exactly the wall formula applied to the one-dimensional resolvent.
    """
    if centrifugal_coefficient(ch) != 0:
        raise UnsupportedChannelError(
            f"channel l={ch.l}, D={ch.D} has centrifugal coefficient {centrifugal_coefficient(ch)} != 0")
    if r_b < 0 or r_a < 0:
        raise DomainError("radial coordinates must be nonnegative")
    return wall_amplitude(ResolventGreen(V, p, tol), 0.0, r_b, r_a, E)


def addition_kernel(l: int, angle: float, D: int) -> float:
    """Sum over m of Y_lm(x_b) Y*_lm(x_a) as a function of the angle between them."""
    if D == 3:
        return (2 * l + 1) / (4 * math.pi) * float(eval_legendre(l, math.cos(angle)))
    if D == 2:
        return 1 / (2 * math.pi) if l == 0 else math.cos(l * angle) / math.pi
    raise UnsupportedDimensionError(f"addition kernels are implemented for D in {{2, 3}}, got D={D}")


def partial_wave_sum(radial: Sequence[complex], angle: float, r_b: float, r_a: float, D: int) -> complex:
    """Reassemble the D-dimensional amplitude from radial amplitudes l = 0..len-1."""
    if D not in (2, 3):
        raise UnsupportedDimensionError(f"partial-wave sums are implemented for D in {{2, 3}}, got D={D}")
    s = sum(g * addition_kernel(l, angle, D) for l, g in enumerate(radial))
    return s / (r_b * r_a) ** ((D - 1) / 2)
