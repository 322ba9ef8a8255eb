"""Rewrite circuits into the gate set a technology prices directly."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .circuit import Circuit, GateKind, GateOp
from .errors import DataError, NoDecomposition
from .techdb import TechDB, TechnologyId, default_db

MAX_DEPTH = 16


@dataclass(frozen=True)
class Step:
    kind: GateKind
    slots: tuple[int, ...]


class DecompositionTable:
    """Gate rewrite rules; a technology-specific rule shadows the ``*`` rule."""

    def __init__(self, rules: dict[str, dict[str, list[str]]], source: str = "<dict>"):
        self.source = source
        self._rules: dict[str, dict[GateKind, tuple[Step, ...]]] = {}
        for scope, table in rules.items():
            if scope != "*":
                scope = TechnologyId.coerce(scope).value
            parsed = {}
            for mnemonic, seq in table.items():
                try:
                    kind = GateKind.parse(mnemonic)
                    steps = tuple(_parse_step(s) for s in seq)
                except ValueError as exc:
                    raise DataError(f"{source}: bad rule for {mnemonic!r}: {exc}") from exc
                if not steps:
                    raise DataError(f"{source}: empty rule for {mnemonic!r}")
                for st in steps:
                    if max(st.slots) >= kind.arity:
                        raise DataError(f"{source}: rule for {mnemonic!r} uses slot beyond arity")
                parsed[kind] = steps
            self._rules[scope] = parsed

    @classmethod
    def load(cls, path: str | Path | None = None) -> DecompositionTable:
        if path is None:
            text = resources.files("qecc_tracer").joinpath("data/decompositions.json").read_text()
            source = "decompositions.json"
        else:
            text = Path(path).read_text(encoding="utf-8")
            source = str(path)
        return cls(json.loads(text)["rules"], source)

    def rule(self, tech, kind: GateKind) -> tuple[Step, ...] | None:
        tech = TechnologyId.coerce(tech).value
        for scope in (tech, "*"):
            steps = self._rules.get(scope, {}).get(kind)
            if steps is not None:
                return steps
        return None

    def rules(self, scope: str = "*") -> dict[GateKind, tuple[Step, ...]]:
        return dict(self._rules.get(scope, {}))

    def scopes(self) -> list[str]:
        return list(self._rules)


def _parse_step(text: str) -> Step:
    name, _, slots = text.strip().partition(" ")
    return Step(GateKind.parse(name), tuple(int(s) for s in slots.split(",")))


@lru_cache(maxsize=1)
def default_table() -> DecompositionTable:
    return DecompositionTable.load()


def is_primitive(tech, kind: GateKind, db: TechDB | None = None,
                 table: DecompositionTable | None = None) -> bool:
    """True when the gate is priced for ``tech`` and no rewrite applies to it."""
    db = db or default_db()
    table = table or default_table()
    return (table.rule(tech, kind) is None
            and db.has_exponent(tech, kind) and db.has_latency(tech, kind))


def expand(tech, kind: GateKind, db: TechDB | None = None,
           table: DecompositionTable | None = None) -> list[Step]:
    """Fully expand one gate into primitive steps over its own operand slots."""
    db = db or default_db()
    table = table or default_table()
    tech = TechnologyId.coerce(tech)

    def go(kind, slots, depth):
        if depth > MAX_DEPTH:
            raise DataError(f"decomposition of {kind} for {tech} does not terminate")
        steps = table.rule(tech, kind)
        if steps is None:
            if not is_primitive(tech, kind, db, table):
                raise NoDecomposition(kind.mnemonic, tech.value)
            return [Step(kind, slots)]
        out = []
        for st in steps:
            out += go(st.kind, tuple(slots[i] for i in st.slots), depth + 1)
        return out

    return go(kind, tuple(range(kind.arity)), 0)


def decompose_to_fts(circuit: Circuit, tech, db: TechDB | None = None,
                     table: DecompositionTable | None = None) -> Circuit:
    ops = []
    cache: dict[GateKind, list[Step]] = {}
    for op in circuit.ops:
        if op.kind not in cache:
            cache[op.kind] = expand(tech, op.kind, db, table)
        for st in cache[op.kind]:
            ops.append(GateOp(st.kind, tuple(op.operands[i] for i in st.slots), op.source_line))
    return Circuit(circuit.num_qubits, tuple(ops))
