"""Central finite differences with Richardson extrapolation."""
from __future__ import annotations

import numpy as np

# central stencils (offsets in units of the step, weights, power of the step)
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5), 1),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0), 2),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5), 3),
}


def central_derivative(f, x, order=1, step=1e-3, levels=3):
    """d^order f / dx^order at x, Richardson-extrapolated over ``levels`` halvings.

    ``f`` may return arrays; the derivative is taken componentwise.  Every
    stencil here has an even error expansion in the step.
    """
    offsets, weights, power = _STENCILS[order]

    def estimate(h):
        return sum(w * np.asarray(f(x + o * h)) for o, w in zip(offsets, weights)) / h ** power

    table = [estimate(step / 2 ** k) for k in range(levels)]
    for j in range(1, levels):
        fac = 4.0 ** j
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return table[0]


def partial(f, q, axis, order=1, step=1e-3, levels=3):
    """Partial derivative of f(q) along one axis of the point q."""
    q = np.asarray(q, dtype=float)
    e = np.zeros_like(q)
    e[axis] = 1.0
    return central_derivative(lambda t: f(q + t * e), 0.0, order, step, levels)
