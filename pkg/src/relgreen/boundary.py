"""Dirichlet walls and boxes from determinant ratios of a base amplitude.

Summing the perturbation series of an infinitely strong point interaction
gives, for a wall at ``a``,

    G_wall(x_b, x_a) = G0(x_b, x_a) - G0(x_b, a) G0(a, x_a) / G0(a, a)

and, for the box a < x < b, the ratio of the bordered 3x3 determinant of
G0 values to the 2x2 determinant built on the wall coordinates.  Zeros of
that 2x2 denominator on the real axis above threshold are the box spectrum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Tuple

import numpy as np

from .core import NATURAL_UNITS, ParticleConfig, as_energy, free_amplitude_1d, kappa, resolvent_1d
from .errors import DivisionDegeneracyError, PoleError, ScanResolutionWarning, ThresholdEnergyError
from .potentials import Potential

WALL_FLOOR = 1e-300
POLE_FLOOR = 1e-12
SCAN_POINTS_PER_SPACING = 64


class GreenEvaluator(Protocol):
    """Anything that maps (x_b, x_a, E) to an amplitude, symmetric in x_b, x_a."""

    particle: ParticleConfig

    def __call__(self, x_b: float, x_a: float, E) -> complex: ...


@dataclass(frozen=True)
class FreeGreen:
    """Free amplitude, optionally inside a constant potential v0.

    Since the dynamics depends on E - V only, the constant case is the free
    closed form at E - v0; it continues analytically above threshold.
    """

    particle: ParticleConfig = NATURAL_UNITS
    v0: float = 0.0

    def __call__(self, x_b, x_a, E):
        return free_amplitude_1d(x_b, x_a, as_energy(E) - self.v0, self.particle)

    def kappa(self, E):
        return kappa(as_energy(E) - self.v0, self.particle)

    @property
    def threshold(self) -> float:
        return self.particle.rest_energy + self.v0


@dataclass(frozen=True)
class ResolventGreen:
    """ODE resolvent of a general potential (sub-threshold energies only)."""

    potential: Potential
    particle: ParticleConfig = NATURAL_UNITS
    tol: float = 1e-10

    def __call__(self, x_b, x_a, E):
        return resolvent_1d(self.potential, E, x_b, x_a, self.particle, self.tol)


@dataclass(frozen=True)
class WallGreen:
    """A base evaluator with an impenetrable wall at ``a``; composable."""

    base: GreenEvaluator
    a: float

    @property
    def particle(self):
        return self.base.particle

    def __call__(self, x_b, x_a, E):
        return wall_amplitude(self.base, self.a, x_b, x_a, E)


@dataclass(frozen=True)
class BoxGeometry:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"box needs a < b, got a={self.a}, b={self.b}")

    @property
    def length(self) -> float:
        return self.b - self.a


def wall_amplitude(g0: GreenEvaluator, a: float, x_b: float, x_a: float, E) -> complex:
    """Amplitude with a Dirichlet wall at ``a``; x_b and x_a on one side of it."""
    if (x_b - a) * (x_a - a) < 0:
        raise ValueError("x_b and x_a must lie on the same side of the wall")
    gaa = g0(a, a, E)
    if abs(gaa) <= WALL_FLOOR:
        raise DivisionDegeneracyError(f"G0(a, a; E) = {gaa!r} is too small to divide by")
    return g0(x_b, x_a, E) - g0(x_b, a, E) * g0(a, x_a, E) / gaa


def _det2(m00, m01, m10, m11):
    return m00 * m11 - m01 * m10


def _box_values(g0, box, x_b, x_a, E):
    a, b = box.a, box.b
    return (
        (g0(x_b, x_a, E), g0(x_b, b, E), g0(x_b, a, E)),
        (g0(b, x_a, E), g0(b, b, E), g0(b, a, E)),
        (g0(a, x_a, E), g0(a, b, E), g0(a, a, E)),
    )


def _denominator_from(m) -> Tuple[complex, float]:
    (_, _, _), (_, gbb, gba), (_, gab, gaa) = m
    return _det2(gbb, gba, gab, gaa), abs(gbb * gaa) + abs(gba * gab)


def box_denominator(g0: GreenEvaluator, box: BoxGeometry, E) -> complex:
    """``G0(b,b) G0(a,a) - G0(b,a) G0(a,b)``."""
    a, b = box.a, box.b
    return _det2(g0(b, b, E), g0(b, a, E), g0(a, b, E), g0(a, a, E))


def box_amplitude(g0: GreenEvaluator, box: BoxGeometry, x_b: float, x_a: float, E) -> complex:
    """Dirichlet-Dirichlet amplitude inside [a, b] as a determinant ratio.

    The 3x3 numerator is expanded by cofactors along its first row.  Raises
    PoleError when the denominator is below ``POLE_FLOOR`` of its own scale.
    """
    if not (box.a <= x_b <= box.b and box.a <= x_a <= box.b):
        raise ValueError("x_b and x_a must lie inside the box")
    m = _box_values(g0, box, x_b, x_a, E)
    den, scale = _denominator_from(m)
    if abs(den) <= POLE_FLOOR * scale:
        raise PoleError(f"E = {E!r} is at a pole of the box amplitude")
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = m
    num = (m00 * _det2(m11, m12, m21, m22)
           - m01 * _det2(m10, m12, m20, m22)
           + m02 * _det2(m10, m11, m20, m21))
    return num / den


def box_spectral_sum(box: BoxGeometry, x_b: float, x_a: float, E, p: ParticleConfig = NATURAL_UNITS,
                     v0: float = 0.0, n_terms: int = 1_000_000) -> complex:
    """Eigenfunction expansion of the free (or constant-v0) box amplitude.

    Independent of the determinant route: sums the sine modes of the
    Dirichlet effective operator directly.
    """
    E = as_energy(E) - v0
    L = box.length
    mc2 = p.rest_energy
    n = np.arange(1, n_terms + 1, dtype=float)
    eps_n = p.hbar ** 2 * (n * math.pi / L) ** 2 / (2 * p.mass)
    phi = (2.0 / L) * np.sin(n * math.pi * (x_b - box.a) / L) * np.sin(n * math.pi * (x_a - box.a) / L)
    terms = phi / (eps_n + 0.5 * mc2 - E * E / (2 * mc2))
    # sum smallest terms first
    return 1j * p.hbar ** 2 / (2 * p.mass * p.light_speed) * complex(np.sum(terms[::-1]))


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    energy: float
    residual: float


@dataclass
class Spectrum:
    """Box poles in increasing order; ``residual`` is |D/D'|/E at each root."""

    entries: List[SpectrumEntry] = field(default_factory=list)
    note: Optional[str] = None

    @property
    def energies(self) -> np.ndarray:
        return np.array([e.energy for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _scan_points(g0, box, lo, hi, n_scan):
    """Uniform grid size: at least n_scan and 64 points per expected zero spacing."""
    kfun = getattr(g0, "kappa", None) or (lambda E: kappa(E, g0.particle))
    k_lo, k_hi = abs(kfun(lo)), abs(kfun(hi))
    n_zeros = abs(k_hi - k_lo) * box.length / math.pi
    return max(int(n_scan), int(math.ceil(SCAN_POINTS_PER_SPACING * n_zeros)) + 1, 2)


def _normalised_denominator(g0, box, E) -> float:
    a, b = box.a, box.b
    try:
        gbb, gba, gab, gaa = g0(b, b, E), g0(b, a, E), g0(a, b, E), g0(a, a, E)
    except ThresholdEnergyError:
        return math.nan
    scale = abs(gbb * gaa) + abs(gba * gab)
    return abs(_det2(gbb, gba, gab, gaa)) / scale if scale else math.nan


def _valley_brackets(values):
    """Index triples (i-1, i, i+1) around local minima of the sampled |D|."""
    v = np.where(np.isnan(values), np.inf, values)
    n = len(v)
    out = []
    for i in range(n):
        left = v[i - 1] if i > 0 else np.inf
        right = v[i + 1] if i < n - 1 else np.inf
        if np.isfinite(v[i]) and v[i] <= left and v[i] < right:
            out.append((max(i - 1, 0), min(i + 1, n - 1)))
    return out


def _refine(fun, lo, hi, xtol):
    """Bracketed search for the minimum of a V-shaped |D| (halves the bracket each step)."""
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        d = 0.25 * (hi - lo) * 0.5
        if fun(mid - d) <= fun(mid + d):
            hi = mid + d
        else:
            lo = mid - d
        if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            break
    return 0.5 * (lo + hi)


def find_box_poles(g0: GreenEvaluator, box: BoxGeometry, E_range: Tuple[float, float],
                   n_scan: int = 256, tol: float = 1e-12) -> Spectrum:
    """Real-axis zeros of the box denominator inside ``E_range``.

    Scans |D| (normalised by its own scale) on a uniform grid, refines each
    valley by bracketed search to relative width ``tol`` and keeps roots
    whose Newton-step residual ``|D/D'|/E`` is below ``tol``.
    """
    lo, hi = map(float, E_range)
    threshold = getattr(g0, "threshold", g0.particle.rest_energy)
    if hi <= lo:
        return Spectrum(note="empty energy range")
    if hi <= threshold:
        return Spectrum(note=f"range lies at or below threshold {threshold:g}; no poles")
    lo = max(lo, threshold)
    n = _scan_points(g0, box, lo, hi, n_scan)
    grid = np.linspace(lo, hi, n)
    vals = np.array([_normalised_denominator(g0, box, E) for E in grid])
    cell = grid[1] - grid[0]

    def absd(E):
        return _normalised_denominator(g0, box, E)

    roots = []
    for i0, i1 in _valley_brackets(vals):
        a_, b_ = grid[i0], grid[i1]
        mid = 0.5 * (a_ + b_)
        E0 = _refine(absd, a_, b_, tol * abs(mid))
        if not (lo < E0 <= hi):
            continue
        d0 = box_denominator(g0, box, E0)
        h = 1e-6 * max(abs(E0), cell)
        dprime = (box_denominator(g0, box, E0 + h) - box_denominator(g0, box, E0 - h)) / (2 * h)
        residual = abs(d0 / dprime) / abs(E0) if dprime != 0 else math.inf
        if residual < tol:
            roots.append((E0, residual))

    roots.sort()
    for (e1, _), (e2, _) in zip(roots, roots[1:]):
        if e2 - e1 < 2 * cell:
            warnings.warn(f"poles at {e1:.12g} and {e2:.12g} share neighbouring scan cells; "
                          "increase n_scan", ScanResolutionWarning, stacklevel=2)
    entries = [SpectrumEntry(k + 1, float(E), float(r)) for k, (E, r) in enumerate(roots)]
    return Spectrum(entries)
