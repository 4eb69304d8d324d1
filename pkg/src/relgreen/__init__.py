"""Relativistic fixed-energy Green functions from the sliced worldline path integral.

The public surface is re-exported here; see the submodules for details.
"""
__version__ = "0.1.0"

from .core import ParticleConfig, NATURAL_UNITS, kappa, free_amplitude_1d, effective_generator, resolvent_1d
from .potentials import Potential
from .boundary import (BoxGeometry, FreeGreen, ResolventGreen, WallGreen, box_amplitude, box_denominator,
                       box_spectral_sum, find_box_poles, wall_amplitude)
from .lattice import GridSpec, SlicingSpec, convergence_study, transfer_matrix_amplitude
from .dk import (AngularChannel, DKMap, addition_kernel, centrifugal_coefficient, dk_radial_action,
                 dk_radial_amplitude, effective_potential, partial_wave_sum, profile_function)
from .geometry import CoordinateMap, SlicedPathState, connection, frame, induced_metric, sliced_action_term

__all__ = [name for name in dir() if not name.startswith("_")]
