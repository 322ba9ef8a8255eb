"""Threshold sweeps over technology x code x level and their report formats."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import Circuit, gate_count, load_qasm
from .concat import CodeId, DelayScaledMemory, FormulaSet, ZeroMemory, default_formulas, orig_blocks, trace_concat
from .decompose import DecompositionTable, decompose_to_fts, default_table
from .errors import ConfigError, TracerError, ZeroOrig
from .techdb import RateProfile, TechDB, TechnologyId, default_db
from .tracer import EcPolicy

DEFAULT_THRESHOLDS = (0.001, 0.01, 0.1)


def savings(orig: int, used: int) -> float:
    """Percentage of the one-block-per-gate baseline left unused."""
    if orig <= 0:
        raise ZeroOrig()
    if not 0 <= used <= orig:
        raise ValueError(f"used={used} outside [0, orig={orig}]")
    return 100.0 * (orig - used) / orig


@dataclass(frozen=True)
class SweepConfig:
    circuit_path: str | Path | None
    technologies: tuple[str, ...] = ("IT",)
    codes: tuple[str, ...] = ("BaconShor", "Steane", "Knill")
    levels: tuple[int, ...] = (0,)
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    w: float | None = None
    mem: float | None = None
    mem_model: str = "zero"
    p_after_ec: float = 0.0
    decompose: bool = True
    tech_db: str | Path | None = None
    formulas: str | Path | None = None
    decompositions: str | Path | None = None
    jobs: int = 4
    circuit: Circuit | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.technologies or not self.codes or not self.levels or not self.thresholds:
            raise ConfigError("technologies, codes, levels and thresholds must be non-empty")
        for th in self.thresholds:
            if not 0.0 < th <= 1.0:
                raise ConfigError(f"threshold {th} outside (0, 1]")
        if any(lv < 0 for lv in self.levels):
            raise ConfigError("levels must be non-negative")
        if self.mem_model not in ("zero", "delay"):
            raise ConfigError(f"unknown memory model {self.mem_model!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            object.__setattr__(self, "technologies",
                               tuple(TechnologyId.coerce(t) for t in self.technologies))
            object.__setattr__(self, "codes", tuple(CodeId.coerce(c) for c in self.codes))
            RateProfile(self.w or 0.0, self.mem or 0.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ThresholdCell:
    theta: float
    used: int
    save_pct: float


@dataclass(frozen=True)
class ReportRow:
    tech: str
    code: str
    level: int
    orig: int
    cells: tuple[ThresholdCell, ...]


@dataclass
class SweepReport:
    rows: list[ReportRow]
    skipped: list[str] = field(default_factory=list)


class SweepCellError(TracerError):
    def __init__(self, context: str, cause: TracerError):
        super().__init__(f"{context}: {cause}")
        self.cause = cause


def run_sweep(cfg: SweepConfig, db: TechDB | None = None, formulas: FormulaSet | None = None,
              table: DecompositionTable | None = None) -> SweepReport:
    db = db or (TechDB.load(cfg.tech_db) if cfg.tech_db else default_db())
    formulas = formulas or (FormulaSet.load(cfg.formulas) if cfg.formulas else default_formulas())
    table = table or (DecompositionTable.load(cfg.decompositions) if cfg.decompositions else default_table())
    circuit = cfg.circuit if cfg.circuit is not None else load_qasm(cfg.circuit_path)
    policies = [EcPolicy(th, cfg.p_after_ec) for th in cfg.thresholds]

    prepared = {}
    for tech in cfg.technologies:
        try:
            c = decompose_to_fts(circuit, tech, db, table) if cfg.decompose else circuit
        except TracerError as exc:
            raise SweepCellError(f"tech={tech}", exc) from exc
        base = db.default_rates(tech)
        rates = RateProfile(base.w if cfg.w is None else cfg.w, base.m if cfg.mem is None else cfg.mem)
        if cfg.mem_model == "delay":
            mem = DelayScaledMemory.for_tech(tech, rates, db, formulas)
        else:
            mem = ZeroMemory()
        prepared[tech] = (c, rates, mem)

    cells = [(t, c, lv) for t in cfg.technologies for c in cfg.codes for lv in cfg.levels]
    cells.sort(key=lambda k: (k[0].value, k[1].value, k[2]))

    def run_cell(key):
        tech, code, level = key
        circ, rates, mem = prepared[tech]
        orig = orig_blocks(gate_count(circ), code, level)
        if orig == 0:
            return None
        out = []
        try:
            for pol in policies:
                res = trace_concat(circ, tech, code, level, pol, mem, rates, db, formulas)
                out.append(ThresholdCell(pol.threshold, res.ec_count, savings(res.orig_count, res.ec_count)))
        except TracerError as exc:
            raise SweepCellError(f"tech={tech} code={code} level={level}", exc) from exc
        return ReportRow(tech.value, code.value, level, orig, tuple(out))

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        results = list(pool.map(run_cell, cells))

    report = SweepReport([])
    for key, row in zip(cells, results):
        if row is None:
            tech, code, level = key
            report.skipped.append(f"tech={tech} code={code} level={level}: {ZeroOrig()}")
        else:
            report.rows.append(row)
    return report


# -- rendering ----------------------------------------------------------------


def _pct(x: float) -> float:
    return round(x, 2)


def to_json(report: SweepReport) -> str:
    doc = {
        "rows": [
            {
                "tech": r.tech,
                "code": r.code,
                "level": r.level,
                "orig": r.orig,
                "thresholds": [
                    {"theta": c.theta, "used": c.used, "save_pct": _pct(c.save_pct)} for c in r.cells
                ],
            }
            for r in report.rows
        ]
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def to_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tech", "code", "level", "orig", "theta", "used", "save_pct"])
    for r in report.rows:
        for c in r.cells:
            writer.writerow([r.tech, r.code, r.level, r.orig, c.theta, c.used, f"{c.save_pct:.2f}"])
    return buf.getvalue()


def to_table(report: SweepReport) -> str:
    if not report.rows:
        return "(no rows)\n"
    thetas = [c.theta for c in report.rows[0].cells]
    header = ["Tech", "Code", "Level", "Orig"]
    for th in thetas:
        header += [f"Th={th:g}", "% save"]
    body = []
    for r in report.rows:
        line = [r.tech, r.code, str(r.level), str(r.orig)]
        for c in r.cells:
            line += [str(c.used), f"{c.save_pct:.2f}%"]
        body.append(line)
    widths = [max(len(x[i]) for x in [header] + body) for i in range(len(header))]
    fmt = lambda cols: "  ".join(s.rjust(w) for s, w in zip(cols, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])] + [fmt(b) for b in body]
    return "\n".join(lines) + "\n"


RENDERERS = {"table": to_table, "csv": to_csv, "json": to_json}
