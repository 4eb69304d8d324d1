"""Frames, induced metric, connections and the sliced action in affine coordinates.

Index conventions used throughout:

* ``frame[i, mu]``       = d h^i / d q^mu
* ``gamma[lam, kap, mu]`` = Gamma_{lam kap}^mu = e_i^mu d_lam e^i_kap
* ``trace[nu]``          = Gamma_{mu nu}^mu   (the contraction entering the kinetic correction)
* ``raised[nu]``         = g^{mu lam} Gamma_{mu lam}^nu

All geometric data is evaluated at the post-point of a slice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._numdiff import partial
from .core import NATURAL_UNITS, ParticleConfig, as_energy
from .errors import DomainError, SingularJacobianError

_SINGULAR = 1e-12


@dataclass(frozen=True)
class CoordinateMap:
    """x = h(q) in D dimensions with optional analytic jacobian and hessian.

    ``hess(q)[i, lam, kap]`` is d_lam d_kap h^i.  Missing derivatives are
    taken by Richardson central differences with base step
    ``fd_step * max(1, |q|)``.
    """

    dim: int
    h: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lower: Optional[Sequence[float]] = None
    upper: Optional[Sequence[float]] = None
    fd_step: float = 1e-3
    name: str = "custom"

    def _point(self, q) -> np.ndarray:
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if q.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}, got shape {q.shape}")
        if self.lower is not None and np.any(q < np.asarray(self.lower)):
            raise DomainError(f"q = {q} below the map domain")
        if self.upper is not None and np.any(q > np.asarray(self.upper)):
            raise DomainError(f"q = {q} above the map domain")
        return q

    def _step(self, q):
        return self.fd_step * max(1.0, float(np.max(np.abs(q))))

    def position(self, q) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.h(self._point(q)), dtype=float))

    def jacobian(self, q) -> np.ndarray:
        q = self._point(q)
        if self.jac is not None:
            return np.atleast_2d(np.asarray(self.jac(q), dtype=float))
        step = self._step(q)
        cols = [partial(lambda t: np.atleast_1d(self.h(t)), q, mu, 1, step) for mu in range(self.dim)]
        return np.stack(cols, axis=1)

    def hessian(self, q) -> np.ndarray:
        q = self._point(q)
        if self.hess is not None:
            return np.asarray(self.hess(q), dtype=float).reshape(self.dim, self.dim, self.dim)
        step = self._step(q)
        out = np.empty((self.dim, self.dim, self.dim))
        if self.jac is not None:
            # d_lam of the analytic columns e^i_kap
            for lam in range(self.dim):
                out[:, lam, :] = partial(lambda t: np.atleast_2d(self.jac(t)), q, lam, 1, step)
            return out
        f = lambda t: np.atleast_1d(self.h(t))
        for lam in range(self.dim):
            out[:, lam, lam] = partial(f, q, lam, 2, step)
            for kap in range(lam + 1, self.dim):
                e = np.zeros(self.dim)
                e[lam] = e[kap] = 1.0
                mixed = partial(lambda s: f(q + s * e), np.zeros(1), 0, 2, step)
                out[:, lam, kap] = out[:, kap, lam] = 0.5 * (mixed - out[:, lam, lam] - out[:, kap, kap])
        return out

    def numerical(self) -> "CoordinateMap":
        """The same map with all derivatives by finite differences."""
        return CoordinateMap(self.dim, self.h, lower=self.lower, upper=self.upper,
                             fd_step=self.fd_step, name=self.name + "-fd")


def identity_coordinates(dim: int = 1) -> CoordinateMap:
    return CoordinateMap(dim, lambda q: np.array(q, dtype=float), lambda q: np.eye(dim),
                         lambda q: np.zeros((dim, dim, dim)), name="identity")


def polar_coordinates() -> CoordinateMap:
    """(r, theta) -> (r cos theta, r sin theta)."""
    def h(q):
        r, t = q
        return np.array([r * math.cos(t), r * math.sin(t)])

    def jac(q):
        r, t = q
        c, s = math.cos(t), math.sin(t)
        return np.array([[c, -r * s], [s, r * c]])

    def hess(q):
        r, t = q
        c, s = math.cos(t), math.sin(t)
        return np.array([[[0.0, -s], [-s, -r * c]],
                         [[0.0, c], [c, -r * s]]])

    return CoordinateMap(2, h, jac, hess, lower=(0.0, -math.inf), name="polar")


def spherical_coordinates() -> CoordinateMap:
    """(r, theta, phi) -> Cartesian, theta the polar angle."""
    def h(q):
        r, t, f = q
        return np.array([r * math.sin(t) * math.cos(f), r * math.sin(t) * math.sin(f), r * math.cos(t)])

    def jac(q):
        r, t, f = q
        st, ct, sf, cf = math.sin(t), math.cos(t), math.sin(f), math.cos(f)
        return np.array([[st * cf, r * ct * cf, -r * st * sf],
                         [st * sf, r * ct * sf, r * st * cf],
                         [ct, -r * st, 0.0]])

    return CoordinateMap(3, h, jac, lower=(0.0, 0.0, -math.inf), name="spherical")


BUILTIN_COORDINATES = {
    "identity": identity_coordinates,
    "polar": polar_coordinates,
    "spherical": spherical_coordinates,
}


@dataclass(frozen=True)
class Frame:
    matrix: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        """e_i^mu, indexed [mu, i]."""
        return np.linalg.inv(self.matrix)


@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    sqrt_g: float

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)


@dataclass(frozen=True)
class ConnectionData:
    gamma: np.ndarray
    trace: np.ndarray
    raised: np.ndarray
    metric: MetricData


def _check_frame(e: np.ndarray, q) -> None:
    scale = np.prod(np.linalg.norm(e, axis=0))
    if scale == 0 or abs(np.linalg.det(e)) <= _SINGULAR * scale:
        raise SingularJacobianError(f"frame is singular at q = {q}")


def frame(m: CoordinateMap, q) -> Frame:
    e = m.jacobian(q)
    _check_frame(e, q)
    return Frame(e)


def induced_metric(fr: Frame) -> MetricData:
    e = fr.matrix
    return MetricData(e.T @ e, float(abs(np.linalg.det(e))))


def connection(m: CoordinateMap, q) -> ConnectionData:
    fr = frame(m, q)
    met = induced_metric(fr)
    d2 = m.hessian(q)  # [i, lam, kap]
    gamma = np.einsum("mi,ilk->lkm", fr.inverse, d2)
    trace = np.einsum("mnm->n", gamma)
    raised = np.einsum("ml,mln->n", met.inverse, gamma)
    return ConnectionData(gamma, trace, raised, met)


def raised_contraction_direct(m: CoordinateMap, q) -> np.ndarray:
    """g^{mu lam} Gamma_{mu lam}^nu via the inverse frame acting on g^{mu lam} d_mu d_lam h^i.

    Contracts the metric with the hessian first, so it shares no
    intermediate with ``connection``.
    """
    e = m.jacobian(q)
    g_inv = np.linalg.inv(e.T @ e)
    lap = np.einsum("ml,iml->i", g_inv, m.hessian(q))
    return np.linalg.solve(e, lap)


def covariant_divergence(A: Callable[[np.ndarray], np.ndarray], conn: ConnectionData, q,
                         step: float = 1e-4) -> float:
    """d_mu A^mu + Gamma_{mu lam}^mu A^lam for a contravariant field A."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    div = sum(float(np.atleast_1d(partial(lambda t: np.atleast_1d(A(t)), q, mu, 1, step))[mu])
              for mu in range(q.size))
    return div + float(conn.trace @ np.atleast_1d(A(q)))


@dataclass(frozen=True)
class SlicedPathState:
    """Slice points q_0..q_N (shape (N+1, D)), one rho per slice, slice width eps.

    ``vector_potential`` returns covariant components A_mu(q); ``potential``
    is V as a function of the Cartesian position x = h(q).
    """

    q: np.ndarray
    rho: np.ndarray
    eps: float
    energy: complex = 0.0
    vector_potential: Optional[Callable[[np.ndarray], np.ndarray]] = None
    potential: Optional[Callable] = None
    charge: float = 1.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float).reshape(-1))
        object.__setattr__(self, "energy", as_energy(self.energy))
        if q.shape[0] < 2:
            raise ValueError("a sliced path needs at least two points")
        if self.rho.size != q.shape[0] - 1:
            raise ValueError("need one rho per slice")
        if np.any(self.rho <= 0) or not self.eps > 0:
            raise ValueError("rho and eps must be positive")

    @property
    def n_slices(self) -> int:
        return self.q.shape[0] - 1


def _potential_at(V, x) -> complex:
    if V is None:
        return 0.0
    val = np.asarray(V(x if x.size > 1 else x[0]))
    return complex(val.reshape(-1)[0])


def sliced_action_term(state: SlicedPathState, n: int, m: CoordinateMap,
                       p: ParticleConfig = NATURAL_UNITS, f: Optional[Callable] = None,
                       include_rest_mass: bool = True):
    """Action of slice n (from q_{n-1} to q_n) with geometry at the post-point.

    ``f`` is the space-time transformation function of q (default 1).  The
    rest-mass term eps rho f Mc^2/2 is included unless ``include_rest_mass``
    is False.  Complex when a vector potential or complex energy is present.
    """
    if not 1 <= n <= state.n_slices:
        raise IndexError(f"slice index {n} outside 1..{state.n_slices}")
    M, c, hbar = p.mass, p.light_speed, p.hbar
    q = state.q[n]
    dq = q - state.q[n - 1]
    conn = connection(m, q)
    g, g_inv = conn.metric.g, conn.metric.inverse
    fn = 1.0 if f is None else float(f(q if q.size > 1 else q[0]))
    s = state.eps * state.rho[n - 1] * fn

    term = (M / (2 * s) * dq @ g @ dq
            - 0.5 * hbar * conn.trace @ dq
            + s * hbar ** 2 / (8 * M) * conn.trace @ g_inv @ conn.trace)
    if state.vector_potential is not None:
        A_low = np.atleast_1d(state.vector_potential(q))

        def A_up(t):
            e = m.jacobian(t)
            return np.linalg.solve(e.T @ e, np.atleast_1d(state.vector_potential(t)))

        div = covariant_divergence(A_up, conn, q)
        term = term - 1j * state.charge / c * (A_low @ dq - s * hbar / (2 * M) * (A_low @ conn.raised + div))
    V = _potential_at(state.potential, m.position(q))
    term = term - s * (state.energy - V) ** 2 / (2 * M * c ** 2)
    if include_rest_mass:
        term = term + s * M * c ** 2 / 2
    term = complex(term)
    return term.real if term.imag == 0 else term


def sliced_action(state: SlicedPathState, m: CoordinateMap, p: ParticleConfig = NATURAL_UNITS,
                  f: Optional[Callable] = None, include_rest_mass: bool = True):
    return sum(sliced_action_term(state, n, m, p, f, include_rest_mass) for n in range(1, state.n_slices + 1))


def slice_measure(m: CoordinateMap, q, eps: float, rho: float = 1.0, f: float = 1.0,
                  p: ParticleConfig = NATURAL_UNITS) -> float:
    """sqrt(g(q)) / (2 pi hbar eps rho f / M)^(D/2) for an interior slice point."""
    sqrt_g = induced_metric(frame(m, q)).sqrt_g
    return sqrt_g / (2 * math.pi * p.hbar * eps * rho * f / p.mass) ** (m.dim / 2)


def initial_measure(eps_b: float, rho_b: float, f_a: float, dim: int,
                    p: ParticleConfig = NATURAL_UNITS) -> float:
    """f(q_a) / (2 pi hbar eps_b rho_b f(q_a) / M)^(D/2), the leading prefactor as printed."""
    return f_a / (2 * math.pi * p.hbar * eps_b * rho_b * f_a / p.mass) ** (dim / 2)
