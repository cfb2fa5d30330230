from budgetgraph.hampower.absorbers import Absorber, absorb, build_absorber_template, smallest_admissible_ell
from budgetgraph.hampower.linkages import (
    EndsequencePair,
    Linkage,
    estimate_sparseness,
    find_linkage,
    find_linkage_family,
    sparse_partition_match,
)
from budgetgraph.hampower.params import derive_params
from budgetgraph.hampower.strategy import HamPowerStrategy, make_ham_power_strategy

__all__ = [
    "Absorber",
    "EndsequencePair",
    "HamPowerStrategy",
    "Linkage",
    "absorb",
    "build_absorber_template",
    "derive_params",
    "estimate_sparseness",
    "find_linkage",
    "find_linkage_family",
    "make_ham_power_strategy",
    "smallest_admissible_ell",
    "sparse_partition_match",
]
