"""Loopy belief propagation with certified convergence bounds."""

__version__ = "0.1.0"

from .certificate import Certificate
from .certify_binary import (build_matrix_binary, cavity_intervals,
                             certify_improved, certify_spectral_binary,
                             improved_matrix, l1_condition_binary,
                             linfty_condition)
from .certify_general import (build_matrix_general, certify_spectral_general,
                              l1_condition_general)
from .engine import (BPResult, beliefs, beliefs_binary, init_messages,
                     init_messages_binary, jacobian_binary, run, run_binary,
                     update_parallel, update_parallel_binary)
from .factor_graph import (FactorGraph, Factor, FormatError, ModelError,
                           check_zero_support, exact_marginals, load_model,
                           save_model)
from .ising import BinaryPairwiseModel, from_ising, to_binary_pairwise
from .rivals import (dobrushin_condition, dobrushin_matrix, heskes_condition,
                     simon_condition)
from .spectral import BoundMatrix, spectral_radius, spectral_radius_info
from .strength import (heskes_sigma, ihler_strength, mixture_gain_supremum,
                       potential_strength, simon_strength)

__all__ = [name for name in dir() if not name.startswith("_")]
