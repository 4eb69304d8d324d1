"""Scalar potentials V(x) for one-dimensional problems.

Every potential is constant outside its declared domain, which is what lets
the resolvent start its homogeneous solutions from exact exponentials.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

KINDS = ("zero", "constant", "square-well", "tabulated")


@dataclass(frozen=True)
class Potential:
    """Descriptor of a scalar potential.

    Use the constructors (``zero``, ``constant``, ``square_well``,
    ``tabulated``) rather than building instances by hand.
    """

    kind: str
    params: Tuple[float, ...] = ()
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "square-well":
            _, left, right, _ = self.params
            if not left < right:
                raise ValueError("square well needs left < right")
        if self.kind == "tabulated":
            x, v = (np.asarray(t, dtype=float) for t in self.table)
            if x.ndim != 1 or x.size < 2 or x.shape != v.shape:
                raise ValueError("tabulated potential needs matching 1D x and V arrays")
            if np.any(np.diff(x) <= 0):
                raise ValueError("tabulated x samples must be strictly increasing")
            if not np.all(np.isfinite(v)):
                raise ValueError("tabulated V samples must be finite")
            object.__setattr__(self, "_interp", PchipInterpolator(x, v, extrapolate=False))

    @classmethod
    def zero(cls) -> "Potential":
        return cls("zero")

    @classmethod
    def constant(cls, v0: float) -> "Potential":
        return cls("constant", (float(v0),))

    @classmethod
    def square_well(cls, v_in: float, left: float, right: float, v_out: float = 0.0) -> "Potential":
        """V = v_in on [left, right] and v_out elsewhere."""
        return cls("square-well", (float(v_in), float(left), float(right), float(v_out)))

    @classmethod
    def tabulated(cls, x, v) -> "Potential":
        """Monotone cubic (PCHIP) interpolation through the samples."""
        x = tuple(float(t) for t in x)
        v = tuple(float(t) for t in v)
        return cls("tabulated", table=(x, v))

    @property
    def domain(self) -> Optional[Tuple[float, float]]:
        """Finite interval outside which V is constant, or None if V is constant everywhere."""
        if self.kind == "square-well":
            return self.params[1], self.params[2]
        if self.kind == "tabulated":
            x = self.table[0]
            return x[0], x[-1]
        return None

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Points where V or its derivatives may jump."""
        if self.kind == "square-well":
            return self.params[1], self.params[2]
        if self.kind == "tabulated":
            return tuple(self.table[0])
        return ()

    @property
    def asymptotic_values(self) -> Tuple[float, float]:
        """Values of V to the left and to the right of the domain."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "constant":
            return self.params[0], self.params[0]
        if self.kind == "square-well":
            return self.params[3], self.params[3]
        v = self.table[1]
        return v[0], v[-1]

    @property
    def is_constant(self) -> bool:
        return self.kind in ("zero", "constant")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(x)
        elif self.kind == "constant":
            out = np.full_like(x, self.params[0])
        elif self.kind == "square-well":
            v_in, left, right, v_out = self.params
            out = np.where((x >= left) & (x <= right), v_in, v_out)
        else:
            xs, vs = self.table
            out = self._interp(x)
            out = np.where(x < xs[0], vs[0], out)
            out = np.where(x > xs[-1], vs[-1], out)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.params[0]
        elif self.kind == "square-well":
            d.update(zip(("v_in", "left", "right", "v_out"), self.params))
        elif self.kind == "tabulated":
            d["x"], d["v"] = list(self.table[0]), list(self.table[1])
        return d
