"""Babai nearest-plane decoding for low-dimensional lattices.

Distributed computation of the Babai point from per-coordinate messages,
and the probability that the Babai point is not the nearest lattice point.
"""

from .babai import BatchDecoder, babai_nearest_plane, closest_point, nearest_integer, shortest_vector
from .basis import LatticeBasis
from .bounds import BoundInputs, an_condition_check, chebyshev_bound, combined_bound, exclusion_bound, gaussian_threshold
from .catalog import catalog_lookup
from .errorprob import (
    ErrorProbabilityReport,
    min_perr_given_density_2d,
    perr_2d_closed_form,
    perr_3d_polyhedral,
    perr_mc_gaussian,
    perr_mc_uniform,
)
from .lattice import gram, minkowski_reduce, obtuse_superbase, packing_density, voronoi_cell
from .protocol import decode, encode, rate_exact_uniform, rate_monte_carlo, ratio_rows, reachable_sets, simulate

__version__ = "0.1.0"
