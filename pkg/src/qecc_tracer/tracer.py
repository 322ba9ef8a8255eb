"""Per-qubit error tracing through a scheduled circuit.

Each qubit carries the probability that it is still error-free.  Before a
gate the idle time its operands waited is charged as memory error; the gate
then multiplies in its own no-error factor.  A two-qubit gate first gives
both operands the worse of their two states.  Whenever a qubit's error
exceeds the threshold right after a gate, an EC block is recorded there and
the qubit restarts from the EC block's residual error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .circuit import Circuit, GateKind, gate_count
from .errors import InvalidPolicy
from .scheduler import Schedule, schedule
from .techdb import RateProfile, TechDB, default_db


@dataclass(frozen=True)
class ErrorState:
    p_noerr: float = 1.0
    # (a, b) meaning (1-w)**a * w0**b, where w0 is the per-slice idle factor
    monomial: tuple[int, int] | None = (0, 0)

    @property
    def p_err(self) -> float:
        return 1.0 - self.p_noerr

    def evaluate(self, rates: RateProfile, slice_ns: int) -> float | None:
        if self.monomial is None:
            return None
        a, b = self.monomial
        return (1.0 - rates.w) ** a * rates.idle_noerr(slice_ns) ** b


FRESH = ErrorState()


@dataclass(frozen=True)
class EcPolicy:
    threshold: float
    p_after_ec: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidPolicy(f"threshold {self.threshold} outside (0, 1]")
        if not 0.0 <= self.p_after_ec < self.threshold:
            raise InvalidPolicy(
                f"post-EC error {self.p_after_ec} must be in [0, threshold={self.threshold})"
            )


@dataclass(frozen=True)
class TraceStep:
    op_index: int
    qubit: int
    p_noerr_before: float
    p_noerr_after: float
    ec_inserted: bool
    monomial: tuple[int, int] | None = None


@dataclass(frozen=True)
class TraceResult:
    final_states: tuple[ErrorState, ...]
    ec_insertions: tuple[tuple[int, tuple[int, ...]], ...]
    orig_count: int
    steps: tuple[TraceStep, ...] = field(default=(), repr=False, compare=False)

    @property
    def ec_count(self) -> int:
        return len(self.ec_insertions)

    def steps_json(self, symbolic: bool = False) -> str:
        rows = []
        for s in self.steps:
            row = {
                "op_index": s.op_index,
                "qubit": s.qubit,
                "p_noerr_before": s.p_noerr_before,
                "p_noerr_after": s.p_noerr_after,
                "ec_inserted": s.ec_inserted,
            }
            if symbolic:
                row["monomial"] = list(s.monomial) if s.monomial is not None else None
            rows.append(row)
        return json.dumps(rows, indent=1)


def gate_noerr_factor(tech, gate: GateKind, w: float, db: TechDB | None = None) -> float:
    k = (db or default_db()).primitive_exponent(tech, gate)
    return (1.0 - w) ** k


def memory_noerr_factor(m: float, idle_ns: int) -> float:
    if idle_ns < 0:
        raise ValueError("idle time cannot be negative")
    return (1.0 - m) ** idle_ns


def merge_two_qubit(a: ErrorState, b: ErrorState, rates: RateProfile | None = None) -> ErrorState:
    """The state with the lower no-error probability; ties keep ``a``."""
    return b if b.p_noerr < a.p_noerr else a


def walk(
    circuit: Circuit,
    sched: Schedule,
    gate_noerr: Callable[[GateKind], float],
    idle_noerr: Callable[[int], float],
    policy: EcPolicy,
    gate_exponent: Callable[[GateKind], int] | None = None,
    orig_count: int | None = None,
) -> TraceResult:
    """Shared tracing loop.

    ``gate_noerr`` maps a gate to its no-error factor and ``idle_noerr`` maps
    a number of idle levels to the memory factor.  ``gate_exponent`` turns on
    monomial tracking.
    """
    symbolic = gate_exponent is not None
    states = [ErrorState(1.0, (0, 0) if symbolic else None)] * circuit.num_qubits
    reset_mono = (0, 0) if symbolic and policy.p_after_ec == 0.0 else None
    insertions = []
    steps = []
    for i, op in enumerate(circuit.ops):
        before = {q: states[q] for q in op.operands}
        for q in op.operands:
            idle = sched.idle_before.get((i, q), 0)
            if idle:
                s = states[q]
                mono = (s.monomial[0], s.monomial[1] + idle) if s.monomial else None
                states[q] = ErrorState(s.p_noerr * idle_noerr(idle), mono)
        if len(op.operands) == 2:
            qa, qb = op.operands
            merged = merge_two_qubit(states[qa], states[qb])
            states[qa] = states[qb] = merged
        factor = gate_noerr(op.kind)
        k = gate_exponent(op.kind) if symbolic else 0
        for q in op.operands:
            s = states[q]
            mono = (s.monomial[0] + k, s.monomial[1]) if s.monomial else None
            states[q] = ErrorState(s.p_noerr * factor, mono)

        crossed = tuple(q for q in op.operands if 1.0 - states[q].p_noerr > policy.threshold)
        if crossed:
            insertions.append((i, crossed))
        for q in op.operands:
            after = states[q]
            steps.append(TraceStep(i, q, before[q].p_noerr, after.p_noerr, q in crossed, after.monomial))
            if op.kind.is_measurement:
                # a measured qubit starts over regardless of any EC block
                states[q] = ErrorState(1.0, (0, 0) if symbolic else None)
            elif q in crossed:
                states[q] = ErrorState(1.0 - policy.p_after_ec, reset_mono)
    return TraceResult(
        final_states=tuple(states),
        ec_insertions=tuple(insertions),
        orig_count=gate_count(circuit) if orig_count is None else orig_count,
        steps=tuple(steps),
    )


def trace_linear(
    circuit: Circuit,
    tech,
    rates: RateProfile | None = None,
    policy: EcPolicy | None = None,
    symbolic: bool = False,
    db: TechDB | None = None,
    sched: Schedule | None = None,
) -> TraceResult:
    db = db or default_db()
    rates = rates or db.default_rates(tech)
    policy = policy or EcPolicy(1.0)
    sched = sched or schedule(circuit, tech, db)
    w0 = rates.idle_noerr(sched.slice_ns)
    factors: dict[GateKind, float] = {}
    exponents: dict[GateKind, int] = {}

    def exponent(kind):
        if kind not in exponents:
            exponents[kind] = db.primitive_exponent(tech, kind)
        return exponents[kind]

    def gate_noerr(kind):
        if kind not in factors:
            factors[kind] = (1.0 - rates.w) ** exponent(kind)
        return factors[kind]

    return walk(
        circuit,
        sched,
        gate_noerr,
        lambda idle: w0 ** idle,
        policy,
        gate_exponent=exponent if symbolic else None,
    )


def write_trace_json(result: TraceResult, path: str | Path, symbolic: bool = False) -> None:
    Path(path).write_text(result.steps_json(symbolic) + "\n", encoding="utf-8")
