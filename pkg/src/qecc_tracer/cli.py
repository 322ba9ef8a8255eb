"""``qecc-tracer`` command line.

Exit status: 0 on success, 1 for bad arguments or unreadable/invalid input,
2 when a data table lacks an entry the run needs.
"""

from __future__ import annotations

import argparse
import sys

from .circuit import load_qasm
from .concat import CodeId
from .decompose import DecompositionTable, decompose_to_fts, default_table
from .errors import ConfigError, DataError, TracerError
from .report import DEFAULT_THRESHOLDS, RENDERERS, SweepCellError, SweepConfig, run_sweep
from .scheduler import schedule, write_schedule_csv
from .techdb import RateProfile, TechDB, TechnologyId, default_db
from .tracer import EcPolicy, trace_linear, write_trace_json

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2

CODE_CHOICES = {"bs": CodeId.BaconShor, "steane": CodeId.Steane, "knill": CodeId.Knill}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qecc-tracer", description="Threshold-driven EC block placement.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("trace", help="trace a circuit and report EC-block savings")
    p.add_argument("--circuit", required=True, metavar="FILE")
    p.add_argument("--tech", action="append", required=True,
                   choices=[t.value.lower() for t in TechnologyId],
                   help="technology; repeat to sweep several")
    p.add_argument("--code", action="append", choices=sorted(CODE_CHOICES),
                   help="code; repeat for several (default: all three)")
    p.add_argument("--level", type=int, default=0, metavar="N",
                   help="report concatenation levels 0..N (default 0)")
    p.add_argument("--threshold", action="append", type=float, metavar="P",
                   help=f"EC threshold; repeatable (default {' '.join(map(str, DEFAULT_THRESHOLDS))})")
    p.add_argument("--w", type=float, help="override worst-gate error rate")
    p.add_argument("--mem", type=float, help="override memory error rate per ns")
    p.add_argument("--mem-model", choices=["zero", "delay"], default="zero")
    p.add_argument("--p-after-ec", type=float, default=0.0)
    p.add_argument("--symbolic", action="store_true", help="include monomials in --dump-trace")
    p.add_argument("--format", choices=sorted(RENDERERS), default="table")
    p.add_argument("--dump-schedule", metavar="FILE", help="CSV schedule of the first --tech")
    p.add_argument("--dump-trace", metavar="FILE",
                   help="JSON level-0 trace of the first --tech at the first threshold")
    p.add_argument("--tech-db", metavar="FILE")
    p.add_argument("--formulas", metavar="FILE")
    p.add_argument("--decompositions", metavar="FILE")
    p.add_argument("--no-decompose", action="store_true",
                   help="trace the circuit as written, without gate rewriting")
    p.add_argument("--jobs", type=int, default=4)
    return parser


def _dumps(args, cfg: SweepConfig, db: TechDB, table: DecompositionTable):
    tech = cfg.technologies[0]
    circuit = load_qasm(args.circuit)
    if cfg.decompose:
        circuit = decompose_to_fts(circuit, tech, db, table)
    sched = schedule(circuit, tech, db)
    if args.dump_schedule:
        write_schedule_csv(sched, circuit, args.dump_schedule)
    if args.dump_trace:
        base = db.default_rates(tech)
        rates = RateProfile(base.w if cfg.w is None else cfg.w, base.m if cfg.mem is None else cfg.mem)
        policy = EcPolicy(cfg.thresholds[0], cfg.p_after_ec)
        res = trace_linear(circuit, tech, rates, policy, args.symbolic, db, sched)
        write_trace_json(res, args.dump_trace, args.symbolic)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.level < 0:
            raise ConfigError("--level must be >= 0")
        db = TechDB.load(args.tech_db) if args.tech_db else default_db()
        table = DecompositionTable.load(args.decompositions) if args.decompositions else default_table()
        codes = [CODE_CHOICES[c] for c in args.code] if args.code else list(CodeId)
        cfg = SweepConfig(
            circuit_path=args.circuit,
            technologies=tuple(dict.fromkeys(args.tech)),
            codes=tuple(dict.fromkeys(codes)),
            levels=tuple(range(args.level + 1)),
            thresholds=tuple(args.threshold) if args.threshold else DEFAULT_THRESHOLDS,
            w=args.w,
            mem=args.mem,
            mem_model=args.mem_model,
            p_after_ec=args.p_after_ec,
            decompose=not args.no_decompose,
            tech_db=args.tech_db,
            formulas=args.formulas,
            decompositions=args.decompositions,
            jobs=args.jobs,
        )
        report = run_sweep(cfg, db=db, table=table)
        if args.dump_schedule or args.dump_trace:
            _dumps(args, cfg, db, table)
    except OSError as exc:
        print(f"qecc-tracer: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TracerError as exc:
        cause = exc.cause if isinstance(exc, SweepCellError) else exc
        print(f"qecc-tracer: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(cause, DataError) else EXIT_CONFIG
    for msg in report.skipped:
        print(f"warning: skipped {msg}", file=sys.stderr)
    sys.stdout.write(RENDERERS[args.format](report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
