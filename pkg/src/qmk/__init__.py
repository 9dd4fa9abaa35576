"""Transport pseudo-distance between density operators, with phase-space
transforms, two-sided classical bounds, and a two-particle mean-field check.
"""

from .errors import (ConfigError, ConvergenceError, QMKError, ResolutionError,
                     TruncationError, ValidationError)
from .linalg import DensityOperator, density_from_matrix, partial_trace
from .oscillator import (OscillatorRep, coherent_state, cost_operator,
                         displace_density, fock_state, ground_state,
                         momentum_operator, position_operator, pure_density,
                         translated_scaled_density, weyl_translate)
from .phasespace import (DiscreteMeasure, PhaseSpaceField, PhaseSpaceGrid,
                         check_resolution_identity, default_grid,
                         default_reference, husimi, measure, toeplitz_quantize,
                         wigner, wigner_pairing)
from .classical_ot import W2Result, field_to_measure, w2, w2_bruteforce
from .quantum_ot import (Coupling, MKResult, SolverConfig, first_moments,
                         mk_closed_form_displaced, mk_translation_formula,
                         solve_mk, tensor_power_bound)
from .bounds import (lower_bound_husimi, schatten_distance,
                     semiclassical_contrast_report, upper_bound_toeplitz,
                     wigner_product_upper_bound)
from .meanfield import (EvolutionConfig, PairPotential, convergence_rate_check,
                        default_potential, evolve_hartree, evolve_nbody,
                        hartree_energy, marginal, two_body_hamiltonian)
from .verify import run_suite, render_report, suite_passed

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "QMKError", "ResolutionError",
    "TruncationError", "ValidationError",
    "DensityOperator", "density_from_matrix", "partial_trace",
    "OscillatorRep", "coherent_state", "cost_operator", "displace_density",
    "fock_state", "ground_state", "momentum_operator", "position_operator",
    "pure_density", "translated_scaled_density", "weyl_translate",
    "DiscreteMeasure", "PhaseSpaceField", "PhaseSpaceGrid",
    "check_resolution_identity", "default_grid", "default_reference",
    "husimi", "measure", "toeplitz_quantize", "wigner", "wigner_pairing",
    "W2Result", "field_to_measure", "w2", "w2_bruteforce",
    "Coupling", "MKResult", "SolverConfig", "first_moments",
    "mk_closed_form_displaced", "mk_translation_formula", "solve_mk",
    "tensor_power_bound",
    "lower_bound_husimi", "schatten_distance", "semiclassical_contrast_report",
    "upper_bound_toeplitz", "wigner_product_upper_bound",
    "EvolutionConfig", "PairPotential", "convergence_rate_check",
    "default_potential", "evolve_hartree", "evolve_nbody", "hartree_energy",
    "marginal", "two_body_hamiltonian",
    "run_suite", "render_report", "suite_passed",
    "__version__",
]
