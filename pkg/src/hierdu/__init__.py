"""Hierarchically solvable brickwork circuits: gates, checks, membranes, operator growth and quenches."""

import types as _types

__version__ = "0.1.0"

from ._config import BudgetError
from .analysis import (Check, EntanglingMeasures, HierarchyReport, b1_from_schmidt, classify_hierarchy,
                       ep_gt, local_dress, purity_B, verify_dual_unitary, verify_Lk, verify_Lk_replicas,
                       verify_t_dual, verify_unitary)
from .gates import (NAMED_GATES, block_diagonal_gate, complex_hadamard, controlled_flags, controlled_unitary,
                    dress_legs, dual_unitary_gate, gate_from_recipe, hadamard_gate, named_gate,
                    permutation_gate, permutation_search_L2, qubit_L2, qubit_L3, random_dephased_hadamard,
                    random_qubit_L2, random_qubit_L3, tensor_product_gate)
from .membrane import (elt_scan, im_area_law_check, influence_matrix, ve_bounds, ve_from_rank, z2_closed_form,
                       z_alpha_exact)
from .opdyn import (jordan_profile, lctm_build, leading_multiplicity, otoc, otoc_profile, staircase_basis,
                    staircase_overlaps, tripartite_info)
from .quench import (correlator, correlator_map, entanglement_growth, evolve_brickwork, random_product_state,
                     renyi_entropy)
from .tensor_core import (UnitaryGate, boundary_vector, fold, haar_gate, haar_unitary, hermitian_basis,
                          schmidt_decompose, schmidt_values)

__all__ = sorted(n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _types.ModuleType))
