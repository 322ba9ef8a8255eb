import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qecc_tracer.circuit import (
    Circuit,
    GateKind,
    GateOp,
    all_gate_kinds,
    gate_count,
    load_qasm,
    parse_qasm,
    to_qasm,
)
from qecc_tracer.decompose import DecompositionTable, decompose_to_fts, default_table, expand, is_primitive
from qecc_tracer.errors import ArityMismatch, BadQubitIndex, EmptyCircuit, NoDecomposition, ParseError, UnknownGate
from qecc_tracer.techdb import TechDB, TechnologyId

from conftest import WORKED_EXAMPLE

# -- parsing ----------------------------------------------------------------


def test_parse_worked_example(worked_circuit):
    c = worked_circuit
    assert c.num_qubits == 2
    assert [(op.kind.mnemonic, op.operands) for op in c.ops] == [
        ("h", (0,)), ("x", (1,)), ("cnot", (0, 1)), ("x", (1,)), ("cnot", (0, 1)),
    ]
    assert [op.source_line for op in c.ops] == [2, 3, 4, 5, 6]


def test_register_only_is_empty_circuit():
    c = parse_qasm("qubit 1")
    assert c.num_qubits == 1 and c.ops == ()
    assert gate_count(c) == 0


def test_unknown_gate_reports_line():
    with pytest.raises(UnknownGate) as exc:
        parse_qasm("qubit 1\nfoo q0")
    assert exc.value.line == 2


@pytest.mark.parametrize("text,err,line", [
    ("qubit 2\ncnot q0", ArityMismatch, 2),
    ("qubit 1\nh q0,q1", ArityMismatch, 2),
    ("qubit 2\n\nh q2", BadQubitIndex, 3),
    ("qubit 2\nrx8 q0", UnknownGate, 2),
    ("qubit 2\ngeo1 q0,q1", UnknownGate, 2),
    ("qubit 2\ncnot q1,q1", ParseError, 2),
    ("qubit 2\nh 0", ParseError, 2),
])
def test_parse_errors(text, err, line):
    with pytest.raises(err) as exc:
        parse_qasm(text)
    assert exc.value.line == line


@pytest.mark.parametrize("text", ["", "\n\n", "# nothing\n   # here\n"])
def test_no_statements_is_empty_circuit_error(text):
    with pytest.raises(EmptyCircuit):
        parse_qasm(text)


def test_register_size_inferred_without_declaration():
    c = parse_qasm("h q0\ncnot q3,q1  # trailing comment\n")
    assert c.num_qubits == 4
    assert len(c) == 2


def test_declared_register_wins_over_max_index():
    assert parse_qasm("qubit 5\nh q0").num_qubits == 5


def test_gate_kind_domain():
    kinds = all_gate_kinds()
    assert len(kinds) == 3 * 7 + 8 + 4 + 5 + 2
    assert {k.arity for k in kinds if k.name in ("cnot", "cz", "swap", "zeno", "geo")} == {2}
    assert all(k.arity == 1 for k in kinds if k.name in ("mx", "mz", "rx", "h", "tdg"))
    for bad in [("rx", 0), ("rz", 8), ("geo", 1), ("geo", 7), ("h", 1), ("ccx", None)]:
        with pytest.raises(ValueError):
            GateKind(*bad)
    assert GateKind.parse("ry3").table_key == "ry"
    assert GateKind.parse("geo4").table_key == "geo4"


def test_circuit_rejects_out_of_range_operand():
    with pytest.raises(ValueError):
        Circuit(1, (GateOp(GateKind("cnot"), (0, 1)),))


def test_load_shipped_benchmarks(bench_dir):
    files = sorted(bench_dir.glob("*.qasm"))
    assert {f.stem for f in files} >= {"worked_example", "bv3", "grover2", "adder4"}
    assert load_qasm(bench_dir / "worked_example.qasm").same_ops(parse_qasm(WORKED_EXAMPLE))
    for f in files:
        assert gate_count(load_qasm(f)) > 0


# -- round trip ---------------------------------------------------------------


@st.composite
def circuits(draw, max_qubits=6, max_ops=30):
    n = draw(st.integers(1, max_qubits))
    kinds = [k for k in all_gate_kinds() if k.arity == 1 or n >= 2]
    ops = []
    for _ in range(draw(st.integers(0, max_ops))):
        k = draw(st.sampled_from(kinds))
        qs = draw(st.permutations(range(n)))[: k.arity]
        ops.append(GateOp(k, tuple(qs)))
    return Circuit(n, tuple(ops))


@given(circuits())
def test_round_trip(c):
    back = parse_qasm(to_qasm(c))
    assert back.same_ops(c)
    assert to_qasm(back) == to_qasm(c)


# -- decomposition ------------------------------------------------------------


def test_swap_on_lp_is_three_cnots():
    c = parse_qasm("qubit 3\nswap q2,q0")
    out = decompose_to_fts(c, "LP")
    assert [(op.kind.mnemonic, op.operands) for op in out.ops] == [
        ("cnot", (2, 0)), ("cnot", (0, 2)), ("cnot", (2, 0)),
    ]


def test_swap_elsewhere_is_kept():
    c = parse_qasm("qubit 2\nswap q0,q1")
    for tech in ("IT", "QD", "SC", "NA", "NP"):
        assert decompose_to_fts(c, tech).same_ops(c)


def test_rz1_becomes_t():
    out = decompose_to_fts(parse_qasm("rz1 q0"), "QD")
    assert [op.kind.mnemonic for op in out.ops] == ["t"]


@pytest.mark.parametrize("tech", list(TechnologyId))
def test_every_gate_decomposes_to_primitives(tech):
    for kind in all_gate_kinds():
        steps = expand(tech, kind)
        assert steps
        assert all(is_primitive(tech, s.kind) for s in steps)


@settings(max_examples=60)
@given(circuits(), st.sampled_from(list(TechnologyId)))
def test_decomposition_laws(c, tech):
    out = decompose_to_fts(c, tech)
    assert all(is_primitive(tech, op.kind) for op in out.ops)
    assert gate_count(out) >= gate_count(c)
    assert gate_count(out) == sum(len(expand(tech, op.kind)) for op in c.ops)
    # idempotent once primitive
    assert decompose_to_fts(out, tech).same_ops(out)
    # operands of each expansion stay within the original gate's operands
    assert out.num_qubits == c.num_qubits


def test_missing_price_raises_no_decomposition():
    doc = {
        "technologies": ["QD"],
        "exponents": {"QD": {"h": 7}},
        "latencies_ns": {"QD": {"h": 12}},
        "rates": {"QD": {"w": 0.1, "m": 0.0}},
    }
    db = TechDB(doc)
    empty = DecompositionTable({})
    assert decompose_to_fts(parse_qasm("h q0"), "QD", db, empty).same_ops(parse_qasm("h q0"))
    with pytest.raises(NoDecomposition) as exc:
        decompose_to_fts(parse_qasm("qubit 2\nzeno q0,q1"), "QD", db, empty)
    assert "zeno" in str(exc.value) and "QD" in str(exc.value)


def test_tech_scope_overrides_wildcard():
    table = DecompositionTable({"*": {"x": ["z 0"]}, "IT": {"x": ["y 0"]}})
    assert [s.kind.mnemonic for s in expand("IT", GateKind("x"), table=table)] == ["y"]
    assert [s.kind.mnemonic for s in expand("SC", GateKind("x"), table=table)] == ["z"]


def test_cyclic_rules_are_rejected():
    table = DecompositionTable({"*": {"x": ["z 0"], "z": ["x 0"]}})
    with pytest.raises(Exception, match="terminate"):
        expand("IT", GateKind("x"), table=table)


# -- unitary oracle for the shipped rewrite rules -------------------------------

_I2 = np.eye(2, dtype=complex)
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_ONE = {
    **_PAULI,
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, cmath.exp(-1j * math.pi / 4)]),
}


def _rotation(axis: str, k: int) -> np.ndarray:
    theta = k * math.pi / 4
    return math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * _PAULI[axis[1]]


def _equal_up_to_phase(a, b):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[idx] / b[idx]
    return abs(abs(phase) - 1) < 1e-12 and np.allclose(a, phase * b, atol=1e-12)


def _two_qubit(name, slots):
    # basis |q0 q1>, q0 most significant
    if name != "cnot":
        raise AssertionError(name)
    u = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        bits = [(b >> 1) & 1, b & 1]
        if bits[slots[0]]:
            bits[slots[1]] ^= 1
        u[bits[0] * 2 + bits[1], b] = 1
    return u


@pytest.mark.parametrize("kind", [k for k in all_gate_kinds() if k.name in ("rx", "ry", "rz")],
                         ids=lambda k: k.mnemonic)
def test_rotation_rules_implement_the_rotation(kind):
    steps = default_table().rule("IT", kind)
    u = _I2
    for s in steps:  # listed in time order
        u = _ONE[s.kind.mnemonic] @ u
    assert _equal_up_to_phase(u, _rotation(kind.name, kind.k))


def test_lp_swap_rule_is_a_swap():
    u = np.eye(4, dtype=complex)
    for s in default_table().rule("LP", GateKind("swap")):
        u = _two_qubit(s.kind.mnemonic, s.slots) @ u
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(u, swap)
