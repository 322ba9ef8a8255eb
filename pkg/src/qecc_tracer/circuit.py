"""Circuit IR and the line-oriented QASM subset reader/writer.

Grammar (one statement per line, ``#`` starts a comment)::

    qubit <N>
    <gate> q<i>[,q<j>]

Gate mnemonics are lowercase: ``rx<k> ry<k> rz<k>`` (angle k*pi/4, k in 1..7),
``x y z h s sdg t tdg``, ``cnot cz swap zeno``, ``geo<k>`` (angle k*pi/4,
k in {2,3,4,5,6}), ``mx mz``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArityMismatch, BadQubitIndex, EmptyCircuit, ParseError, UnknownGate

ROTATIONS = ("rx", "ry", "rz")
ONE_QUBIT = ("x", "y", "z", "h", "s", "sdg", "t", "tdg")
TWO_QUBIT = ("cnot", "cz", "swap", "zeno")
MEASUREMENTS = ("mx", "mz")
GEO_STEPS = (2, 3, 4, 5, 6)

_PARAM_RE = re.compile(r"^(rx|ry|rz|geo)(\d+)$")


@dataclass(frozen=True, order=True)
class GateKind:
    name: str
    k: int | None = None

    def __post_init__(self):
        if self.name in ROTATIONS:
            if self.k is None or not 1 <= self.k <= 7:
                raise ValueError(f"rotation step must be in 1..7, got {self.k}")
        elif self.name == "geo":
            if self.k not in GEO_STEPS:
                raise ValueError(f"geo step must be one of {GEO_STEPS}, got {self.k}")
        elif self.name in ONE_QUBIT + TWO_QUBIT + MEASUREMENTS:
            if self.k is not None:
                raise ValueError(f"{self.name} takes no angle")
        else:
            raise ValueError(f"unknown gate {self.name!r}")

    @classmethod
    def parse(cls, mnemonic: str) -> GateKind:
        m = _PARAM_RE.match(mnemonic)
        if m:
            return cls(m.group(1), int(m.group(2)))
        return cls(mnemonic)

    @property
    def mnemonic(self) -> str:
        return self.name if self.k is None else f"{self.name}{self.k}"

    @property
    def table_key(self) -> str:
        """Row key in the per-technology tables (rotations share one row)."""
        if self.name in ROTATIONS:
            return self.name
        return self.mnemonic

    @property
    def arity(self) -> int:
        return 2 if self.name in TWO_QUBIT or self.name == "geo" else 1

    @property
    def is_measurement(self) -> bool:
        return self.name in MEASUREMENTS

    def __str__(self):
        return self.mnemonic


def all_gate_kinds() -> list[GateKind]:
    kinds = [GateKind(r, k) for r in ROTATIONS for k in range(1, 8)]
    kinds += [GateKind(n) for n in ONE_QUBIT + TWO_QUBIT]
    kinds += [GateKind("geo", k) for k in GEO_STEPS]
    kinds += [GateKind(n) for n in MEASUREMENTS]
    return kinds


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    operands: tuple[int, ...]
    source_line: int = 0

    def __post_init__(self):
        if len(self.operands) != self.kind.arity:
            raise ValueError(f"{self.kind} expects {self.kind.arity} operands")
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"{self.kind} operands must be distinct")
        if any(q < 0 for q in self.operands):
            raise ValueError("negative qubit index")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if max(op.operands) >= self.num_qubits:
                raise ValueError(f"operand of {op.kind} outside register of {self.num_qubits}")

    def __len__(self):
        return len(self.ops)

    def gate_kinds(self) -> set[GateKind]:
        return {op.kind for op in self.ops}

    def same_ops(self, other: Circuit) -> bool:
        """Structural equality ignoring source line numbers."""
        return self.num_qubits == other.num_qubits and [
            (o.kind, o.operands) for o in self.ops
        ] == [(o.kind, o.operands) for o in other.ops]


def gate_count(circuit: Circuit) -> int:
    return len(circuit.ops)


def _parse_qubit(tok: str, lineno: int) -> int:
    tok = tok.strip()
    if not re.fullmatch(r"q\d+", tok):
        raise ParseError(lineno, f"bad qubit reference {tok!r}")
    return int(tok[1:])


def parse_qasm(text: str) -> Circuit:
    declared = None
    ops = []
    max_index = -1
    seen_statement = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        seen_statement = True
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "qubit":
            if declared is not None or ops:
                raise ParseError(lineno, "register must be declared once, before any gate")
            if not rest.isdigit() or int(rest) < 1:
                raise ParseError(lineno, f"bad register size {rest!r}")
            declared = int(rest)
            continue
        try:
            kind = GateKind.parse(head)
        except ValueError:
            raise UnknownGate(lineno, f"unknown gate {head!r}") from None
        qubits = [_parse_qubit(t, lineno) for t in rest.split(",")] if rest else []
        if len(qubits) != kind.arity:
            raise ArityMismatch(lineno, f"{head} takes {kind.arity} operand(s), got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise ParseError(lineno, f"{head} operands must be distinct")
        if declared is not None and max(qubits) >= declared:
            raise BadQubitIndex(lineno)
        max_index = max(max_index, *qubits)
        ops.append(GateOp(kind, tuple(qubits), lineno))
    if not seen_statement:
        raise EmptyCircuit()
    num_qubits = declared if declared is not None else max_index + 1
    return Circuit(num_qubits, tuple(ops))


def load_qasm(path: str | Path) -> Circuit:
    return parse_qasm(Path(path).read_text(encoding="utf-8"))


def to_qasm(circuit: Circuit) -> str:
    lines = [f"qubit {circuit.num_qubits}"]
    for op in circuit.ops:
        lines.append(f"{op.kind.mnemonic} " + ",".join(f"q{q}" for q in op.operands))
    return "\n".join(lines) + "\n"
