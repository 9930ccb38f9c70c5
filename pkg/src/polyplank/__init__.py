"""Witness points for polynomial plank problems in complex balls and real spheres."""

from .homogenization import homogenized_log_objective, convergence_report, limit_log_objective, make_grid
from .bernstein import bernstein_inequality_check, lemma_bounds, locate_max, verify_lemma
from .corollaries import (VectorConfig, dual_basis, many_vectors_witness, polarization_witness,
                          span_avoidance_witness, steinhaus_witness)
from .covering import Cylinder, membership, uncovered_witness
from .distance import (DistanceConfig, angular_distance_on_sphere, brute_force_bounds, brute_force_distance,
                       closest_point, closest_point_on_sphere, distance_to_common_zero_set, distance_to_zero_set)
from .errors import PlankError
from .maximizer import MaximizerConfig, WitnessReport, find_witness, maximize_log_product
from .objective import PlankInstance, log_objective, log_objective_gradient
from .poly import MultiPoly, TrigPoly, evaluate, gradient, homogenize, restrict_to_complex_line, restrict_to_great_circle

__all__ = [name for name in dir() if not name.startswith("_")]
