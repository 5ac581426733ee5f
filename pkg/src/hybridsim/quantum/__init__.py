"""Operator algebra, Lindblad propagation and state utilities."""
from .layout import (HilbertLayout, LayoutError, QOperator, SpinOperators, Subsystem,
                     SPIN_MINUS1, SPIN_ZERO, create, destroy, identity, number, projector,
                     spin_ops)
from .lindblad import (CollapseTerm, DegenerateSteadyState, DriveTerm, EvolutionResult,
                       IntegrationError, LindbladModel, RunLog, RunRecord,
                       SteadyStateResult, TimeSeries, evolve,
                       liouvillian, propagate_expm, recording, steady_state)
from .measures import expectation, fidelity, partial_trace, trace_distance
from .states import (DensityMatrix, InvariantViolation, basis_projector, basis_state,
                     ket_projector, product_state, thermal_populations, thermal_state)

__all__ = [
    "HilbertLayout", "LayoutError", "QOperator", "SpinOperators", "Subsystem", "SPIN_MINUS1",
    "SPIN_ZERO", "create", "destroy", "identity", "number", "projector", "spin_ops",
    "CollapseTerm", "DegenerateSteadyState", "DriveTerm", "EvolutionResult", "IntegrationError",
    "LindbladModel", "RunLog", "RunRecord", "SteadyStateResult", "TimeSeries", "evolve", "liouvillian",
    "propagate_expm", "recording", "steady_state", "expectation", "fidelity", "partial_trace",
    "trace_distance", "DensityMatrix", "InvariantViolation", "basis_projector", "basis_state",
    "ket_projector", "product_state", "thermal_populations", "thermal_state",
]
