"""Response probability and response measure in the Standard Binary Tree for
Ordered Processes: forward model, condition checks, admissible
transformations, parameter recovery and Monte Carlo simulation."""
from .checker import (CheckReport, IdentifiabilityError, check_binary_tree, check_condition3,
                      check_theorem1, check_theorem5, check_three_arc, estimate_k,
                      estimate_ratios, select_n)
from .recovery import RecoveredModel, RecoveryError, degrees_of_freedom, recover_parameters
from .simulator import EmpiricalTriple, TrialRecord, simulate_design, simulate_trial
from .transforms import (AdmissibilityError, InvarianceReport, ScalingParams, apply_transform,
                         coupled_incorrect_scaling, feasible_c_range, feasible_offset_ranges,
                         solve_scaling, verify_invariance)
from .tree_model import (DataTriple, EffectivenessReport, FactorDesign, SbtopParams,
                         correct_measure_product, incorrect_measure_product, predict,
                         response_probability, validate_effectiveness, validate_params)

__version__ = "0.1.0"
