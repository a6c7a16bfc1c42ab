"""Finite-dimensional simulation of quantum preparation.

Composite object-plus-preparator states, triggering events, conditional
(prepared) states and factorized evolution, with numerical checks of the
selective Lüders rule, localization and retroactive apparent ideal
occurrence (RAIO).
"""

__version__ = "0.1.0"

from .collapse import (
    ConditionalStateResult,
    conditional_state,
    event_probability,
    luders_collapse,
    reduced_state,
    verify_coincidence_factorization,
)
from .estimators import LudersCollapse, Preparator, RaioVerifier
from .exceptions import (
    DimensionError,
    ImpossibleEventError,
    ImplicationError,
    OperatorValidationError,
    PrepsimError,
    ScenarioError,
)
from .preparators import (
    GridGeometry,
    PreparationResult,
    PreparatorSpec,
    build_hole,
    build_sg,
    make_half_space_projector,
    run_preparation,
)
from .raio import (
    RaioInstance,
    RaioReport,
    build_twin_instance,
    check_localization_lemma,
    check_raio_conditions,
    check_raio_equality,
    evolve_prepared_two_routes,
)
from .scenario import dump_scenario, load_scenario, parse_scenario
from .tensor import (
    DimensionSignature,
    Distance,
    Operator,
    Tolerances,
    embed,
    from_record,
    identity,
    operator_distance,
    partial_trace,
    tensor_product,
    to_record,
)

__all__ = [
    "__version__",
    "ConditionalStateResult",
    "conditional_state",
    "event_probability",
    "luders_collapse",
    "reduced_state",
    "verify_coincidence_factorization",
    "LudersCollapse",
    "Preparator",
    "RaioVerifier",
    "DimensionError",
    "ImpossibleEventError",
    "ImplicationError",
    "OperatorValidationError",
    "PrepsimError",
    "ScenarioError",
    "GridGeometry",
    "PreparationResult",
    "PreparatorSpec",
    "build_hole",
    "build_sg",
    "make_half_space_projector",
    "run_preparation",
    "RaioInstance",
    "RaioReport",
    "build_twin_instance",
    "check_localization_lemma",
    "check_raio_conditions",
    "check_raio_equality",
    "evolve_prepared_two_routes",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
    "DimensionSignature",
    "Distance",
    "Operator",
    "Tolerances",
    "embed",
    "from_record",
    "identity",
    "operator_distance",
    "partial_trace",
    "tensor_product",
    "to_record",
]
