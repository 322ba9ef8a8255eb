"""Error tracing through linear and concatenated quantum circuits."""

from .circuit import Circuit, GateKind, GateOp, gate_count, load_qasm, parse_qasm, to_qasm
from .concat import (
    CodeId,
    ConcatTable,
    DelayScaledMemory,
    ZeroMemory,
    base_table,
    concat_table,
    logical_gate_error,
    orig_blocks,
    trace_concat,
)
from .decompose import decompose_to_fts, is_primitive
from .scheduler import Schedule, compute_slice, idle_slices, schedule
from .techdb import RateProfile, TechDB, TechnologyId, default_rates, gate_time, primitive_exponent
from .tracer import EcPolicy, ErrorState, TraceResult, merge_two_qubit, trace_linear
from .report import SweepConfig, run_sweep, savings

__all__ = [
    "Circuit", "GateKind", "GateOp", "gate_count", "load_qasm", "parse_qasm", "to_qasm",
    "CodeId", "ConcatTable", "DelayScaledMemory", "ZeroMemory", "base_table", "concat_table",
    "logical_gate_error", "orig_blocks", "trace_concat", "decompose_to_fts", "is_primitive",
    "Schedule", "compute_slice", "idle_slices", "schedule", "RateProfile", "TechDB",
    "TechnologyId", "default_rates", "gate_time", "primitive_exponent", "EcPolicy",
    "ErrorState", "TraceResult", "merge_two_qubit", "trace_linear", "SweepConfig",
    "run_sweep", "savings",
]
