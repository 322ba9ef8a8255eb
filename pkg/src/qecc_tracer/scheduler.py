"""Greedy ASAP placement of gates on a common time grid.

The grid step (the *slice*) is the GCD of the gate latencies involved, so
every gate occupies a whole number of levels.  A one-qubit gate starts right
after its qubit's current level; a two-qubit gate starts after the later of
its two qubits, and the earlier one sits idle until then.  Idle time after
a qubit's last gate is not charged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

from .circuit import Circuit
from .errors import BadQubitIndex, DataError
from .techdb import TechDB, default_db


@dataclass(frozen=True)
class Slice:
    qubit: int
    start_level: int
    end_level: int
    op_index: int | None = None  # None marks an idle stretch

    @property
    def idle(self) -> bool:
        return self.op_index is None

    @property
    def length(self) -> int:
        return self.end_level - self.start_level + 1


@dataclass(frozen=True)
class Schedule:
    slice_ns: int
    lanes: tuple[tuple[Slice, ...], ...]
    final_level: tuple[int, ...]
    # idle levels each operand waited right before op i: {(i, qubit): levels}
    idle_before: dict
    op_start: tuple[int, ...]

    @property
    def num_qubits(self) -> int:
        return len(self.lanes)

    def depth_ns(self) -> int:
        return max(self.final_level, default=0) * self.slice_ns


def compute_slice(tech, circuit: Circuit, db: TechDB | None = None, whole_pmd: bool = False) -> int:
    db = db or default_db()
    if whole_pmd or not circuit.ops:
        return db.pmd_slice(tech)
    times = [db.gate_time(tech, k) for k in sorted(circuit.gate_kinds())]
    return reduce(math.gcd, times)


def schedule(circuit: Circuit, tech, db: TechDB | None = None, whole_pmd: bool = False) -> Schedule:
    db = db or default_db()
    slice_ns = compute_slice(tech, circuit, db, whole_pmd)
    level = [0] * circuit.num_qubits
    lanes: list[list[Slice]] = [[] for _ in range(circuit.num_qubits)]
    idle_before = {}
    op_start = []
    for i, op in enumerate(circuit.ops):
        t = db.gate_time(tech, op.kind)
        if t % slice_ns:
            raise DataError(f"slice {slice_ns} ns does not divide latency {t} ns of {op.kind}")
        sn = t // slice_ns
        start = max(level[q] for q in op.operands)
        for q in op.operands:
            wait = start - level[q]
            idle_before[(i, q)] = wait
            if wait:
                lanes[q].append(Slice(q, level[q] + 1, start))
            lanes[q].append(Slice(q, start + 1, start + sn, i))
            level[q] = start + sn
        op_start.append(start + 1)
    return Schedule(
        slice_ns=slice_ns,
        lanes=tuple(tuple(lane) for lane in lanes),
        final_level=tuple(level),
        idle_before=idle_before,
        op_start=tuple(op_start),
    )


def idle_slices(sched: Schedule, qubit: int) -> int:
    if not 0 <= qubit < sched.num_qubits:
        raise BadQubitIndex(0, f"qubit q{qubit} not in schedule of {sched.num_qubits}")
    return sum(s.length for s in sched.lanes[qubit] if s.idle)


def schedule_csv(sched: Schedule, circuit: Circuit) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["qubit", "start_level", "end_level", "label"])
    for lane in sched.lanes:
        for s in lane:
            label = "idle" if s.idle else f"{circuit.ops[s.op_index].kind.mnemonic}#{s.op_index}"
            writer.writerow([s.qubit, s.start_level, s.end_level, label])
    return buf.getvalue()


def write_schedule_csv(sched: Schedule, circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(schedule_csv(sched, circuit), encoding="utf-8")
