"""Orlicz norms on atomic measure spaces and expansivity of composition operators."""
__version__ = "0.1.0"

from .verdict import FAILS, HOLDS, UNDETERMINED, PreconditionError, Status, Verdict, WindowEscape
from .young import YoungFunction, check_delta2, check_delta_prime, conjugate
from .space import AtomicMeasureSpace, SimpleFunction, TailModel
from .transform import AtomTransformation
from .norms import (
    gauge_norm,
    indicator_norm,
    modular,
    modular_convergence_check,
    norm_report,
    orlicz_norm_amemiya,
    orlicz_norm_dual_grid,
)
from .dynamics import CompositionSystem, boundedness_check, compose_power, expansivity_probe, orbit_gauge_norms
from .dissipative import DissipativeStructure, distortion_constant, generalized_distortion, verify_dissipative
from .classifiers import (
    expansive_dissipative,
    expansive_general,
    exponent_estimates,
    positively_expansive_dissipative,
    positively_expansive_general,
    strong_structural_stability,
    structural_instability,
    uniformly_expansive_dissipative,
    uniformly_positively_expansive_dissipative,
)
