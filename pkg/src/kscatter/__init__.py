"""Sorting diagrams on covering Kronecker quivers, quiver-weighted tropical
curves, and Euler characteristics of framed moduli spaces."""

from .quiver import (DimVec, EquivClass, Quiver, QuiverError,
                     build_covering_fragment, enumerate_compatible_classes,
                     fragment_shapes, ind, make_quiver, pad_to_sink_boundary,
                     primitive_part)
from .series import SeriesRing, TruncSeries, SeriesError
from .operators import (AssumptionViolation, ElemAuto, WeightFunction,
                        apply_op, brute_force_product, commutator,
                        compose_same_slope, factor_initial, naive_commutator,
                        naive_op, nil_op)
from .sorting import SortingDiagram, SortingTree, TreeAssumptionError, \
    build_trees, stabilize
from .tropical import (CurveCatalog, GeometryError, LineArrangement,
                       TropicalCurve, WeightVector, build_arrangement,
                       counts_by_weight_vector, curve_multiplicity,
                       marked_counts, tropical_count)
from .extraction import (CapExceeded, ChiReport, EpsilonVector, ThetaSeries,
                         closed_form_K2, closed_form_K2_coeff, epsilon,
                         euler_char_framed, kronecker_euler,
                         kronecker_euler_on_fragment, theta_direct,
                         theta_from_counts, theta_sources_direct)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
