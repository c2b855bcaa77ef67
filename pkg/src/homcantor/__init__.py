"""Interval certificates for differences of perturbed homogeneous Cantor sets."""
from .baselines import brute_sumset, classify_region, region_grid, thickness
from .configuration import ConfigSpace, intersect_certify, is_linked, orbit_frontier, renormalize
from .ifs import (ConstantsConfig, HomogeneousIFS, closeness, common_ratio, middle_alpha,
                  perturb, refine, validate)
from .intervals import IntervalUnion
from .kernels import BACKEND
from .recurrent import build_E, build_L0, select_partitions, select_partitions_selfsum
from .search import Certificate, delta_net, replay, search_omega, verify_recurrent

__all__ = [
    "BACKEND", "Certificate", "ConfigSpace", "ConstantsConfig", "HomogeneousIFS",
    "IntervalUnion", "brute_sumset", "build_E", "build_L0", "classify_region", "closeness",
    "common_ratio", "delta_net", "intersect_certify", "is_linked", "middle_alpha",
    "orbit_frontier", "perturb", "refine", "region_grid", "renormalize", "replay",
    "search_omega", "select_partitions", "select_partitions_selfsum", "thickness",
    "validate", "verify_recurrent",
]
__version__ = "0.1.0"
