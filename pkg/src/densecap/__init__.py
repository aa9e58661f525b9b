"""Dense-coding capacity with and without a quantum memory on the receiver's side."""

__version__ = "0.1.0"

from .capacity import (capacity_decomposed, capacity_direct, capacity_measured, memory_gap,
                       private_lower_bound, stein_exponent)
from .channels import MeasurementBasis, cnot_extend, gram, measure_channel, twirl
from .checks import (check_A2, check_C1, check_max_entangled_C1, classify, gram_decompose,
                     recovery_map_check, usefulness_witness, verify_six_item)
from .config import DEFAULT_TOL, Tolerances
from .errors import DensecapError, DimensionError, NumericalError, ParseError
from .groups import (Representation, IrrepDecomposition, build_cyclic_shift_rep,
                     build_diagonal_character_rep, decompose_abelian, verify_decomposition)
from .symplectic import count_commutative_subgroups, enumerate_commutative_subgroups
