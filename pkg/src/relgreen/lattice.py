"""Brute-force realisations used as oracles.

``transfer_matrix_amplitude`` composes the one-slice Euclidean kernel

    sqrt(M / 2 pi hbar eps) exp(-M dx^2 / 2 hbar eps - eps U / hbar)

on a uniform grid and integrates over L: the first slice exactly, the rest by
the trapezoid rule on L = n * eps.  It never touches the closed forms or the
ODE resolvent.  ``dirichlet_operator_spectrum`` is the
matching oracle for box spectra.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy import integrate

from .core import NATURAL_UNITS, ParticleConfig, as_energy, effective_generator, kappa
from .errors import TruncationBoundError
from .potentials import Potential

MARGIN_DECAY_LENGTHS = 5.0
DEFAULT_EPS_SCALE = 0.02
SEPARATION_EPS_SCALE = 0.1
MIN_EPS_SCALE = 1e-3


@dataclass(frozen=True)
class GridSpec:
    """Spatial grid. ``extent`` (lo, hi) defaults to the endpoints plus the margin rule."""

    spacing: Optional[float] = None
    extent: Optional[Tuple[float, float]] = None
    margin: float = MARGIN_DECAY_LENGTHS


@dataclass(frozen=True)
class SlicingSpec:
    """Slice width eps^s and optional truncation L_max of the L-sum."""

    eps: Optional[float] = None
    L_max: Optional[float] = None


@dataclass(frozen=True)
class Lattice:
    """Cell-centred grid between reflecting walls at lo and hi."""

    nodes: np.ndarray
    spacing: float
    lo: float
    hi: float
    eps: float


def _asymptotic_decay(V: Potential, E, p: ParticleConfig) -> float:
    v_l, v_r = V.asymptotic_values
    return min(kappa(E - v_l, p).real, kappa(E - v_r, p).real)


def _local_wavenumber(V: Potential, E, p: ParticleConfig, lo: float, hi: float) -> float:
    U = effective_generator(V, E, p)
    xs = np.linspace(lo, hi, 513)
    return float(np.sqrt(np.max(np.abs(2 * p.mass * U(xs))) / p.hbar ** 2))


def build_lattice(V: Potential, E, x_b: float, x_a: float, p: ParticleConfig = NATURAL_UNITS,
                  grid: GridSpec = GridSpec(), slicing: SlicingSpec = SlicingSpec()) -> Lattice:
    E = as_energy(E)
    k_decay = _asymptotic_decay(V, E, p)
    if k_decay <= 0:
        raise TruncationBoundError("E is in the asymptotic continuum; no finite margin bounds the truncation")
    need = grid.margin / k_decay
    inner_lo, inner_hi = min(x_a, x_b), max(x_a, x_b)
    if V.domain is not None:
        inner_lo, inner_hi = min(inner_lo, V.domain[0]), max(inner_hi, V.domain[1])
    if grid.extent is None:
        lo, hi = inner_lo - need, inner_hi + need
    else:
        lo, hi = map(float, grid.extent)
        if min(x_a, x_b) - lo < need or hi - max(x_a, x_b) < need:
            raise TruncationBoundError(
                f"grid extent {grid.extent} leaves less than {grid.margin} decay lengths "
                f"({need:.4g}) around the endpoints")
    k_scale = max(_local_wavenumber(V, E, p, lo, hi), k_decay)
    if slicing.eps is not None:
        eps = slicing.eps
    else:
        # short separations need eps below the L ~ M dx^2/hbar peak of the integrand
        eps_k = p.mass / (p.hbar * k_scale ** 2)
        eps_dx = SEPARATION_EPS_SCALE * p.mass * (x_b - x_a) ** 2 / p.hbar
        eps = min(DEFAULT_EPS_SCALE * eps_k, max(eps_dx, MIN_EPS_SCALE * eps_k))
    sigma = math.sqrt(p.hbar * eps / p.mass)
    dx = grid.spacing if grid.spacing is not None else 0.5 * sigma
    jumps = [b for b in V.breakpoints if lo < b < hi] if V.kind == "square-well" else []
    if jumps:
        # cell faces on the jumps, so no cell straddles a discontinuity
        span = jumps[-1] - jumps[0]
        if span > 0:
            dx = span / max(1, int(math.ceil(span / dx)))
        lo = jumps[0] - math.ceil((jumps[0] - lo) / dx - 1e-9) * dx
        hi = jumps[-1] + math.ceil((hi - jumps[-1]) / dx - 1e-9) * dx
    n = max(2, int(round((hi - lo) / dx)))
    dx = (hi - lo) / n
    nodes = lo + dx * (np.arange(n) + 0.5)
    return Lattice(nodes, dx, lo, hi, eps)


def _free_kernel(d, eps, p):
    s = p.hbar * eps / p.mass
    return np.exp(-d * d / (2.0 * s)) / np.sqrt(2.0 * math.pi * s)


def _reflected_kernel(x, y, lat: Lattice, eps, p):
    return (_free_kernel(x - y, eps, p)
            + _free_kernel(x + y - 2 * lat.lo, eps, p)
            + _free_kernel(x + y - 2 * lat.hi, eps, p))


def _slice_pieces(V, E, x_b, x_a, lat: Lattice, eps, p):
    """Grid matrix A (with dx weights), first-slice column and last-slice row."""
    U = effective_generator(V, E, p)
    x = lat.nodes
    half = np.exp(-0.5 * eps * U(x) / p.hbar)
    half_a = np.exp(-0.5 * eps * U(np.array([x_a])) / p.hbar)[0]
    half_b = np.exp(-0.5 * eps * U(np.array([x_b])) / p.hbar)[0]
    A = lat.spacing * _reflected_kernel(x[:, None], x[None, :], lat, eps, p) * half[:, None] * half[None, :]
    col = _reflected_kernel(x, x_a, lat, eps, p) * half * half_a
    row = lat.spacing * _reflected_kernel(x_b, x, lat, eps, p) * half * half_b
    direct = complex(_reflected_kernel(x_b, x_a, lat, eps, p) * half_a * half_b)
    return A, col, row, direct


def _first_slice_integral(V, E, x_b, x_a, lat: Lattice, p) -> complex:
    """int_0^eps of the single-slice kernel of width L, in t = sqrt(L)."""
    U = effective_generator(V, E, p)
    u = 0.5 * complex(U(np.array([x_a]))[0] + U(np.array([x_b]))[0]) / p.hbar

    def integrand(t):
        if t == 0.0:
            return 0.0j
        L = t * t
        return 2 * t * complex(_reflected_kernel(x_b, x_a, lat, L, p)) * cmath.exp(-L * u)

    t_hi = math.sqrt(lat.eps)
    t_peak = min(t_hi, math.sqrt(p.mass / p.hbar) * abs(x_b - x_a) / math.sqrt(2.0))
    points = [t_peak] if 0 < t_peak < t_hi else None
    return complex(integrate.quad(integrand, 0.0, t_hi, complex_func=True, points=points,
                                  epsabs=0.0, epsrel=1e-12, limit=200)[0])


def _eigen(A):
    if np.isrealobj(A) or np.allclose(A.imag, 0.0):
        lam, Q = sla.eigh(A.real)
        return lam.astype(complex), Q, Q.T
    lam, Q = sla.eig(A)
    return lam, Q, sla.inv(Q)


def sliced_kernel(V: Potential, E, x_b: float, x_a: float, L: float, n_slices: int,
                  p: ParticleConfig = NATURAL_UNITS, grid: GridSpec = GridSpec()) -> complex:
    """K_L(x_b, x_a) from ``n_slices`` equal slices of width L / n_slices."""
    eps = L / n_slices
    lat = build_lattice(V, E, x_b, x_a, p, grid, SlicingSpec(eps=eps))
    A, col, row, direct = _slice_pieces(V, E, x_b, x_a, lat, eps, p)
    if n_slices == 1:
        return direct
    v = col.astype(complex)
    for _ in range(n_slices - 2):
        v = A @ v
    return complex(row @ v)


@dataclass(frozen=True)
class TransferMatrixResult:
    value: complex
    tail: float
    L_max: float
    spacing: float
    eps: float
    n_nodes: int


def transfer_matrix_solve(V: Potential, E, x_b: float, x_a: float, p: ParticleConfig = NATURAL_UNITS,
                          grid: GridSpec = GridSpec(), slicing: SlicingSpec = SlicingSpec(),
                          tol: float = 1e-8) -> TransferMatrixResult:
    """Sliced path integral on a grid followed by the L-sum (details included)."""
    E = as_energy(E)
    lat = build_lattice(V, E, x_b, x_a, p, grid, slicing)
    eps = lat.eps
    A, col, row, direct = _slice_pieces(V, E, x_b, x_a, lat, eps, p)
    lam, Q, Qinv = _eigen(A)
    if np.max(np.abs(lam)) >= 1.0:
        raise TruncationBoundError("slice matrix has an eigenvalue >= 1: the L-integral does not converge")
    left = row @ Q
    right = Qinv @ col
    weights = left * right
    # (0, eps]: one-slice kernel integrated exactly; [eps, inf): trapezoid on L = n eps,
    # with sum_{n>=2} K_{n eps} = sum_k w_k lam_k^(n-2) summed in closed form
    first = _first_slice_integral(V, E, x_b, x_a, lat, p)
    total_inf = first + eps * (0.5 * direct + np.sum(weights / (1.0 - lam)))
    if slicing.L_max is None:
        decay = -math.log(np.max(np.abs(lam))) / eps
        L_max = max(2 * eps, math.log(1.0 / tol) / decay)
    else:
        L_max = float(slicing.L_max)
    n_max = max(1, int(math.floor(L_max / eps)))
    tail_terms = eps * np.sum(weights * lam ** (n_max - 1) / (1.0 - lam)) if n_max >= 2 else total_inf - first
    total = total_inf - tail_terms
    tail = abs(tail_terms) / max(abs(total), 1e-300)
    if slicing.L_max is not None and tail > tol:
        raise TruncationBoundError(f"L tail beyond L_max={L_max:g} is {tail:.3g} of the sum (> tol {tol:g})")
    value = p.prefactor * total
    return TransferMatrixResult(complex(value), float(tail), float(n_max * eps), lat.spacing, eps, lat.nodes.size)


def transfer_matrix_amplitude(V: Potential, E, x_b: float, x_a: float, p: ParticleConfig = NATURAL_UNITS,
                              grid: GridSpec = GridSpec(), slicing: SlicingSpec = SlicingSpec(),
                              tol: float = 1e-8) -> complex:
    """Fixed-energy amplitude from the grid-composed sliced path integral.

    The L-integral over (0, eps] uses the one-slice kernel directly; beyond
    that it is the trapezoid sum over the slice lattice L = n eps, truncated at L_max (its remainder is evaluated exactly from the slice
    matrix spectrum; an explicit L_max whose remainder exceeds ``tol``
    raises TruncationBoundError).
    """
    return transfer_matrix_solve(V, E, x_b, x_a, p, grid, slicing, tol).value


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    spacing: float
    eps: float
    value: complex
    error: Optional[float]
    delta: Optional[float]
    ratio: Optional[float]


def convergence_study(V: Potential, E, x_b: float, x_a: float, p: ParticleConfig = NATURAL_UNITS,
                      levels: int = 3, reference: Optional[complex] = None,
                      grid: GridSpec = GridSpec(), slicing: SlicingSpec = SlicingSpec()) -> List[ConvergenceRow]:
    """Halve grid spacing and slice width together, ``levels`` times.

    ``delta`` is |A_k - A_{k-1}|; ``ratio`` is delta_{k-1} / delta_k, the
    self-convergence factor (4 for a second-order scheme).
    """
    base = build_lattice(V, E, x_b, x_a, p, grid, slicing)
    rows: List[ConvergenceRow] = []
    prev_value, prev_delta = None, None
    for k in range(levels):
        g = replace(grid, spacing=base.spacing / 2 ** k, extent=(base.lo, base.hi))
        s = replace(slicing, eps=base.eps / 2 ** k)
        value = transfer_matrix_amplitude(V, E, x_b, x_a, p, g, s)
        err = abs(value - reference) / abs(reference) if reference is not None else None
        delta = abs(value - prev_value) if prev_value is not None else None
        ratio = prev_delta / delta if (prev_delta is not None and delta) else None
        rows.append(ConvergenceRow(k, g.spacing, s.eps, value, err, delta, ratio))
        prev_value, prev_delta = value, delta
    return rows


def dirichlet_operator_spectrum(length: float, n_modes: int, p: ParticleConfig = NATURAL_UNITS,
                                v0: float = 0.0, n_points: int = 400, levels: int = 3) -> np.ndarray:
    """Box energies from the Dirichlet second-difference operator, Richardson-extrapolated.

    Diagonalises -d^2/dx^2 on ``n_points * 2**j`` interior points, extrapolates
    the k_n^2 in h^2, then maps hbar^2 k^2/2M = (E^2 - M^2c^4)/2Mc^2 to E.
    """
    from scipy.linalg import eigh_tridiagonal

    table = []
    for j in range(levels):
        n = n_points * 2 ** j
        h = length / (n + 1)
        d = np.full(n, 2.0 / h ** 2)
        e = np.full(n - 1, -1.0 / h ** 2)
        table.append(eigh_tridiagonal(d, e, select="i", select_range=(0, n_modes - 1), eigvals_only=True))
    # Richardson in h^2: levels differ by a factor 2 in h
    for order in range(1, levels):
        f = 4.0 ** order
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    k2 = table[0]
    mc2 = p.rest_energy
    return v0 + np.sqrt(mc2 ** 2 + (p.hbar * p.light_speed) ** 2 * k2)
