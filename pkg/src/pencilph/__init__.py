"""pencilph: stability analysis and port-Hamiltonian recasting of linear DAEs.

The package analyzes matrix pencils s*E - A and descriptor systems
[E, A, B]: it certifies stability through restricted Lyapunov inequalities,
rewrites stable pencils in dissipative-Hamiltonian form and stabilizable
descriptor systems in port-Hamiltonian form, and exposes the equivalent
composition of dissipative and Lagrangian subspaces.
"""

from .config import DEFAULT_TOL, ToleranceConfig
from ._kernels import backend_name
from .errors import PencilPHError
from .pencil import (DescriptorSystem, MatrixPencil, index_of, is_regular,
                     quasi_kronecker, spectrum, system_space)
from .subspace import Subspace, compare_on
from .stability import check_stability, solve_lyapunov_inequality
from .dh import dh_stability_check, recast_dh, recast_dh_index1, validate_dh
from .stabilize import (build_certificates, is_behaviorally_stabilizable,
                        recast_ph, refined_decomposition, solve_bernoulli,
                        zero_output_interconnection)
from .geometry import (compose_dl, embed_ph, from_dh, geometric_stability_check,
                       normalize_structures, validate_structures)
from .oracle import check_energy_decay, exact_regularity, simulate

__version__ = "0.1.0"

__all__ = [
    "ToleranceConfig", "DEFAULT_TOL", "backend_name", "PencilPHError",
    "MatrixPencil", "DescriptorSystem", "quasi_kronecker", "is_regular",
    "spectrum", "index_of", "system_space", "Subspace", "compare_on",
    "check_stability", "solve_lyapunov_inequality",
    "validate_dh", "dh_stability_check", "recast_dh", "recast_dh_index1",
    "refined_decomposition", "is_behaviorally_stabilizable", "solve_bernoulli",
    "build_certificates", "recast_ph", "zero_output_interconnection",
    "validate_structures", "normalize_structures", "compose_dl",
    "geometric_stability_check", "from_dh", "embed_ph",
    "simulate", "check_energy_decay", "exact_regularity",
    "__version__",
]
