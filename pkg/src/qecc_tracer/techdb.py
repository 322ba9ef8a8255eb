"""Per-technology constants: gate-error exponents, latencies and error rates.

Everything is read from a JSON document (``data/tech_defaults.json`` by
default) so that measured values can replace the shipped ones.  A loaded
``TechDB`` is never mutated; loading another file gives a new object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache, reduce
from importlib import resources
from pathlib import Path
from types import MappingProxyType

from .circuit import GateKind
from .errors import DataError, MissingEntry


class TechnologyId(str, Enum):
    QD = "QD"  # quantum dot
    NA = "NA"  # neutral atom
    LP = "LP"  # linear photonics
    NP = "NP"  # non-linear photonics
    SC = "SC"  # superconductor
    IT = "IT"  # ion trap

    @classmethod
    def coerce(cls, value: str | TechnologyId) -> TechnologyId:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown technology {value!r}") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RateProfile:
    """Worst-gate error ``w`` and memory error ``m`` per nanosecond."""

    w: float
    m: float

    def __post_init__(self):
        for name in ("w", "m"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")

    def idle_noerr(self, slice_ns: int) -> float:
        """No-memory-error factor for one idle slice of ``slice_ns``."""
        return (1.0 - self.m) ** slice_ns


def g0(k: int, w: float) -> float:
    """Level-0 failure probability of a gate built from k primitives."""
    return 1.0 - (1.0 - w) ** k


class TechDB:
    def __init__(self, doc: dict, source: str = "<dict>"):
        self.source = source
        try:
            self.technologies = tuple(TechnologyId.coerce(t) for t in doc["technologies"])
            self._exponents = _freeze(doc["exponents"])
            self._exponent_ext = _freeze(doc.get("exponent_extensions", {}))
            self._latencies = _freeze(doc["latencies_ns"])
            self._derived_latencies = _freeze(doc.get("derived_latencies_ns", {}))
            self.latency_recipes = _freeze(doc.get("latency_recipes", {}))
            self.primitives = _freeze(doc.get("primitives", {}))
            self._rates = {
                TechnologyId.coerce(t): RateProfile(float(r["w"]), float(r["m"]))
                for t, r in doc["rates"].items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed technology data in {source}: {exc}") from exc
        for table in (self._exponents, self._latencies):
            for t, row in table.items():
                for g, v in row.items():
                    if not isinstance(v, int) or v < 1:
                        raise DataError(f"{source}: entry ({t}, {g}) = {v!r} must be a positive integer")

    @classmethod
    def load(cls, path: str | Path | None = None) -> TechDB:
        if path is None:
            text = resources.files("qecc_tracer").joinpath("data/tech_defaults.json").read_text()
            source = "tech_defaults.json"
        else:
            text = Path(path).read_text(encoding="utf-8")
            source = str(path)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source}: {exc}") from exc
        return cls(doc, source)

    def primitive_exponent(self, tech, gate: GateKind | str) -> int:
        tech = TechnologyId.coerce(tech)
        key = _key(gate)
        for table in (self._exponents, self._exponent_ext):
            row = table.get(tech.value, {})
            if key in row:
                return row[key]
        raise MissingEntry(tech.value, key, "exponent table")

    def has_exponent(self, tech, gate) -> bool:
        try:
            self.primitive_exponent(tech, gate)
        except MissingEntry:
            return False
        return True

    def gate_time(self, tech, gate: GateKind | str) -> int:
        tech = TechnologyId.coerce(tech)
        key = gate.mnemonic if isinstance(gate, GateKind) else gate
        for table in (self._latencies, self._derived_latencies):
            row = table.get(tech.value, {})
            if key in row:
                return row[key]
        raise MissingEntry(tech.value, key, "latency table")

    def has_latency(self, tech, gate) -> bool:
        try:
            self.gate_time(tech, gate)
        except MissingEntry:
            return False
        return True

    def latencies(self, tech) -> dict[str, int]:
        tech = TechnologyId.coerce(tech).value
        out = dict(self._derived_latencies.get(tech, {}))
        out.update(self._latencies.get(tech, {}))
        return out

    def pmd_slice(self, tech) -> int:
        """GCD of every latency the technology prices."""
        return reduce(math.gcd, self.latencies(tech).values())

    def default_rates(self, tech) -> RateProfile:
        tech = TechnologyId.coerce(tech)
        try:
            return self._rates[tech]
        except KeyError:
            raise MissingEntry(tech.value, "*", "rate table") from None

    def exponent_table(self) -> dict[str, dict[str, int]]:
        """The published exponent table only, without extensions."""
        return {t: dict(row) for t, row in self._exponents.items()}


def _key(gate) -> str:
    if isinstance(gate, GateKind):
        return gate.table_key
    try:
        return GateKind.parse(str(gate)).table_key
    except ValueError:
        return str(gate)  # a bare row key such as "rx"


def _freeze(d):
    if isinstance(d, dict):
        return MappingProxyType({k: _freeze(v) for k, v in d.items()})
    if isinstance(d, list):
        return tuple(_freeze(v) for v in d)
    return d


@lru_cache(maxsize=1)
def default_db() -> TechDB:
    return TechDB.load()


def primitive_exponent(tech, gate) -> int:
    return default_db().primitive_exponent(tech, gate)


def gate_time(tech, gate) -> int:
    return default_db().gate_time(tech, gate)


def default_rates(tech) -> RateProfile:
    return default_db().default_rates(tech)
