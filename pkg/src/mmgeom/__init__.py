"""Discrete verification of volume-comparison geometry on metric measure spaces."""

from .bishop_gromov import (BGReport, SamplingPlan, bg_ratio, check_bg, check_usual_bg,
                            doubling_estimate, estimate_min_C)
from .cuts import (CutProfile, LineArrangement, branch_point_test, cut_profile,
                   cut_set_accumulation_check, diam_check, ends_at_scale, is_r_cut_point,
                   stands_in_line, weak_branch_test)
from .dimension import (covering_number, dimension_estimate, gh_distance_small,
                        hausdorff_distance, hausdorff_measure_estimate, maximal_separated_set)
from .poincare import (estimate_CP, local_slope, poincare_ratio, thmB_witness,
                       verify_upper_gradient, volume_decay_exponent)
from .space import DiscreteSpace, Region, ShadowParams, geodesic_shadow, region
from .volumes import delta_threshold, volume, volume_ratio
from .zoo import ZooSpec, generate

__version__ = "0.1.0"
