"""Logical gate failure probabilities for concatenated tile codes.

A logical gate at level n is a fixed collection of level n-1 gates (SWAP
chains moving qubits across the tile plus the transversal parts).  A single
failure is corrected unless it hits one of the non-tolerated constituents;
two or more failures always break the block.  The formulas are kept as data
(``Formula``) so the same structure feeds both the closed-form evaluator
here and the enumeration oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Protocol

from .circuit import Circuit, GateKind, gate_count
from .errors import DataError, MissingFormula
from .scheduler import schedule
from .techdb import RateProfile, TechDB, TechnologyId, default_db, g0
from .tracer import EcPolicy, TraceResult, trace_linear, walk


class CodeId(str, Enum):
    BaconShor = "BaconShor"
    Steane = "Steane"
    Knill = "Knill"

    @classmethod
    def coerce(cls, value) -> CodeId:
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        for code, names in _CODE_NAMES.items():
            if key in names:
                return code
        raise ValueError(f"unknown code {value!r}")

    @property
    def short(self) -> str:
        return {"BaconShor": "bs", "Steane": "steane", "Knill": "knill"}[self.value]

    def __str__(self):
        return self.value


_CODE_NAMES = {
    CodeId.BaconShor: {"baconshor", "bacon-shor", "bs"},
    CodeId.Steane: {"steane", "s"},
    CodeId.Knill: {"knill", "k"},
}

BLOCK_FACTOR = {CodeId.BaconShor: 9, CodeId.Steane: 7, CodeId.Knill: 4}


@dataclass(frozen=True)
class Term:
    slot: str
    count: int
    tolerated: int

    def __post_init__(self):
        if self.count < 1 or not 0 <= self.tolerated <= self.count:
            raise ValueError(f"bad term {self}")


@dataclass(frozen=True)
class Formula:
    gate: str
    terms: tuple[Term, ...]
    memory: bool = False
    same_level: bool = False
    extension: bool = False

    @property
    def constituents(self) -> int:
        return sum(t.count for t in self.terms)


def failure_probability(terms, values: Mapping[str, float], memory: float | None = None) -> float:
    """1 - P(no failure) - P(exactly one tolerated failure), memory included.

    ``memory`` is the probability of the logical memory event; it behaves as
    one extra tolerated constituent.
    """
    log_ok = 0.0
    for t in terms:
        log_ok += t.count * math.log1p(-values[t.slot]) if values[t.slot] < 1.0 else -math.inf
    p_any = -math.expm1(log_ok)  # 1 - P(no constituent fails)
    p_one = 0.0
    for i, t in enumerate(terms):
        if not t.tolerated:
            continue
        p = values[t.slot]
        rest = (1.0 - p) ** (t.count - 1)
        for j, u in enumerate(terms):
            if j != i:
                rest *= (1.0 - values[u.slot]) ** u.count
        p_one += t.tolerated * p * rest
    if memory is not None:
        p_one *= 1.0 - memory
    return min(1.0, max(0.0, p_any - p_one))


class FormulaSet:
    def __init__(self, doc: dict, source: str = "<dict>"):
        self.source = source
        self.aliases = MappingProxyType(dict(doc.get("aliases", {})))
        self._formulas: dict[CodeId, dict[str, Formula]] = {}
        self._block: dict[CodeId, int] = {}
        self.idle_coefficients = {
            CodeId.coerce(c): MappingProxyType(dict(v))
            for c, v in doc.get("idle_coefficients", {}).items()
        }
        try:
            for name, entry in doc["codes"].items():
                code = CodeId.coerce(name)
                self._block[code] = int(entry["block_factor"])
                self._formulas[code] = {
                    gate: Formula(
                        gate=gate,
                        terms=tuple(Term(*t) for t in f["terms"]),
                        memory=bool(f.get("memory", False)),
                        same_level=f.get("level", "prev") == "same",
                        extension=bool(f.get("extension", False)),
                    )
                    for gate, f in entry["gates"].items()
                }
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed formula data in {source}: {exc}") from exc
        for code in self._formulas:
            self.evaluation_order(code)  # rejects cyclic same-level references

    @classmethod
    def load(cls, path: str | Path | None = None) -> FormulaSet:
        if path is None:
            text = resources.files("qecc_tracer").joinpath("data/concat_formulas.json").read_text()
            source = "concat_formulas.json"
        else:
            text = Path(path).read_text(encoding="utf-8")
            source = str(path)
        try:
            return cls(json.loads(text), source)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source}: {exc}") from exc

    def codes(self) -> list[CodeId]:
        return list(self._formulas)

    def block_factor(self, code) -> int:
        return self._block[CodeId.coerce(code)]

    def formula(self, code, gate: str) -> Formula:
        code = CodeId.coerce(code)
        try:
            return self._formulas[code][gate]
        except KeyError:
            raise MissingFormula(code.value, gate) from None

    def formulas(self, code) -> dict[str, Formula]:
        return dict(self._formulas[CodeId.coerce(code)])

    def logical_key(self, code, kind: GateKind | str) -> str:
        key = kind.table_key if isinstance(kind, GateKind) else kind
        key = self.aliases.get(key, key)
        if key not in self._formulas[CodeId.coerce(code)]:
            raise MissingFormula(CodeId.coerce(code).value, key)
        return key

    def evaluation_order(self, code) -> list[str]:
        """Gate keys ordered so same-level references are computed first."""
        formulas = self._formulas[CodeId.coerce(code)]
        order, state = [], {}

        def visit(g):
            if state.get(g) == "done":
                return
            if state.get(g) == "open":
                raise DataError(f"cyclic same-level formula involving {g!r}")
            state[g] = "open"
            f = formulas[g]
            if f.same_level:
                for t in f.terms:
                    if t.slot not in formulas:
                        raise MissingFormula(CodeId.coerce(code).value, t.slot)
                    visit(t.slot)
            state[g] = "done"
            order.append(g)

        for g in formulas:
            visit(g)
        return order


@lru_cache(maxsize=1)
def default_formulas() -> FormulaSet:
    return FormulaSet.load()


# -- memory models ---------------------------------------------------------


class MemoryModel(Protocol):
    def value(self, code: CodeId, gate: str, level: int) -> float: ...


class ZeroMemory:
    """No logical memory error at any level."""

    def value(self, code, gate, level):
        return 0.0


@dataclass(frozen=True)
class DelayScaledMemory:
    """M_n = 1 - (1 - m) ** (scale * idle_coeff * t_swap * b ** (n - 1)).

    ``idle_coeff`` gives, per (code, gate), how many SWAP-times the block sits
    idle during one logical gate; unknown pairs default to 0.
    """

    m: float
    t_swap_ns: int
    idle_coeff: Mapping = field(default_factory=dict)
    scale: float = 1.0

    def value(self, code, gate, level):
        if level < 1:
            return 0.0
        code = CodeId.coerce(code)
        coeff = self.idle_coeff.get(code, {}).get(gate, 0.0)
        exposure = self.scale * coeff * self.t_swap_ns * BLOCK_FACTOR[code] ** (level - 1)
        return -math.expm1(exposure * math.log1p(-self.m)) if self.m < 1.0 else float(exposure > 0)

    @classmethod
    def for_tech(cls, tech, rates: RateProfile | None = None, db: TechDB | None = None,
                 formulas: FormulaSet | None = None, scale: float = 1.0) -> DelayScaledMemory:
        db = db or default_db()
        formulas = formulas or default_formulas()
        rates = rates or db.default_rates(tech)
        return cls(rates.m, db.gate_time(tech, "swap"), formulas.idle_coefficients, scale)


def logical_delay(t0_ns: float, formula: Formula, level: int, factor: float | None = None) -> float:
    """Gate delay at ``level`` when each level multiplies the critical path.

    The default per-level factor is the formula's constituent count.
    """
    factor = formula.constituents if factor is None else factor
    return t0_ns * factor ** level


# -- tables ----------------------------------------------------------------


@dataclass(frozen=True)
class ConcatTable:
    code: CodeId | None
    level: int
    g: Mapping[str, float]
    M: Mapping[str, float] = field(default_factory=dict)

    def probability(self, kind: GateKind, formulas: FormulaSet | None = None) -> float:
        if self.level == 0:
            key = kind.table_key if kind.table_key in self.g else kind.mnemonic
            if key not in self.g:
                raise MissingFormula("level-0", kind.mnemonic)
            return self.g[key]
        key = (formulas or default_formulas()).logical_key(self.code, kind)
        return self.g[key]


def base_table(tech, rates: RateProfile | None = None, db: TechDB | None = None) -> ConcatTable:
    """Level-0 gate failure probabilities from the technology's exponents."""
    db = db or default_db()
    tech = TechnologyId.coerce(tech)
    rates = rates or db.default_rates(tech)
    g = {}
    for key in ("rx", "ry", "rz", "x", "y", "z", "h", "s", "sdg", "t", "tdg", "cnot",
                "cz", "swap", "zeno", "geo2", "geo3", "geo4", "geo5", "geo6", "mx", "mz"):
        if db.has_exponent(tech, key):
            g[key] = g0(db.primitive_exponent(tech, key), rates.w)
    return ConcatTable(None, 0, MappingProxyType(g))


def logical_gate_error(code, gate: str, prev: ConcatTable, mem: MemoryModel | None = None,
                       current: Mapping[str, float] | None = None,
                       formulas: FormulaSet | None = None) -> float:
    formulas = formulas or default_formulas()
    code = CodeId.coerce(code)
    f = formulas.formula(code, gate)
    level = prev.level + 1
    source = current if f.same_level else prev.g
    if source is None or any(t.slot not in source for t in f.terms):
        raise MissingFormula(code.value, gate)
    m = (mem or ZeroMemory()).value(code, gate, level) if f.memory else None
    return failure_probability(f.terms, source, m)


def concat_table(code, base: ConcatTable, level: int, mem: MemoryModel | None = None,
                 formulas: FormulaSet | None = None) -> ConcatTable:
    if base.level != 0:
        raise ValueError("base table must be level 0")
    if level < 0:
        raise ValueError("level must be non-negative")
    table = base
    for _ in range(level):
        table = next_level(code, table, mem, formulas)
    return table


def next_level(code, prev: ConcatTable, mem: MemoryModel | None = None,
               formulas: FormulaSet | None = None) -> ConcatTable:
    formulas = formulas or default_formulas()
    mem = mem or ZeroMemory()
    code = CodeId.coerce(code)
    level = prev.level + 1
    g: dict[str, float] = {}
    M: dict[str, float] = {}
    for key in formulas.evaluation_order(code):
        f = formulas.formula(code, key)
        source = g if f.same_level else prev.g
        if any(t.slot not in source for t in f.terms):
            continue  # not derivable from the level below; lookups raise MissingFormula
        if f.memory:
            M[key] = mem.value(code, key, level)
        g[key] = logical_gate_error(code, key, prev, mem, g, formulas)
    return ConcatTable(code, level, MappingProxyType(g), MappingProxyType(M))


def orig_blocks(count0: int, code, level: int) -> int:
    if count0 < 0 or level < 0:
        raise ValueError("count and level must be non-negative")
    return count0 * BLOCK_FACTOR[CodeId.coerce(code)] ** level


def trace_concat(
    circuit: Circuit,
    tech,
    code,
    level: int,
    policy: EcPolicy,
    mem: MemoryModel | None = None,
    rates: RateProfile | None = None,
    db: TechDB | None = None,
    formulas: FormulaSet | None = None,
) -> TraceResult:
    """Threshold tracing with logical gate failures at ``level``.

    Level 0 is exactly the linear trace.  Above it, idle periods between
    logical gates are not charged separately; decoherence enters through the
    formulas' memory terms.
    """
    db = db or default_db()
    formulas = formulas or default_formulas()
    code = CodeId.coerce(code)
    if level == 0:
        return trace_linear(circuit, tech, rates, policy, db=db)
    table = concat_table(code, base_table(tech, rates, db), level, mem, formulas)
    sched = schedule(circuit, tech, db)
    factors = {}

    def gate_noerr(kind):
        if kind not in factors:
            factors[kind] = 1.0 - table.probability(kind, formulas)
        return factors[kind]

    for kind in circuit.gate_kinds():
        gate_noerr(kind)  # fail before tracing if any gate lacks a formula
    return walk(
        circuit,
        sched,
        gate_noerr,
        lambda idle: 1.0,
        policy,
        orig_count=orig_blocks(gate_count(circuit), code, level),
    )
