"""Non-redundant typability: extended multisystems, occurrence saturation and
bounded witness search."""

from .occurrence import Saturation, occ_saturate
from .search import (
    Decision, Instance, Witness, build_instance, concrete_values, decide_nonredundant,
    essential_places, evaluate_scheme, search_witness, shrink,
)
from .system import (
    ERASED, NRSystem, OccAtom, Occurrence, VariableTagging, associated_multisystem_nr,
    constraints, reduce_nr, terminals, var_tag,
)

__all__ = [
    "Saturation", "occ_saturate", "Decision", "Instance", "Witness", "build_instance",
    "concrete_values", "decide_nonredundant", "essential_places", "evaluate_scheme",
    "search_witness", "shrink", "ERASED", "NRSystem", "OccAtom", "Occurrence",
    "VariableTagging", "associated_multisystem_nr", "constraints", "reduce_nr",
    "terminals", "var_tag",
]
