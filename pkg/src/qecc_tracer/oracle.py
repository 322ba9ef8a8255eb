"""Slow reference computations over independent failure events.

These exist to check the closed forms elsewhere in the package, so they
avoid sharing arithmetic with them: ``exact_probability`` sums the weight of
every subset of events, ``exact_probability_grouped`` sums over every vector
of per-class failure counts, and ``monte_carlo`` samples.

The default outcome rule is the one used for logical gates: the block fails
when two or more events fire, or when exactly one fires and it is not
tolerated.  ``any_failure`` and ``at_least_two`` are the two extremes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Context, Decimal
from typing import Callable, Mapping, Sequence

import numpy as np
from numba import njit

from .errors import TooManyEvents
from .techdb import TechDB, default_db

MAX_EVENTS = 30
MAX_GROUPED_CELLS = 20_000_000
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class Event:
    label: str
    p: float
    tolerated: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"event {self.label!r} has probability {self.p}")


@dataclass(frozen=True)
class FailureEventSet:
    events: tuple[Event, ...]
    # custom rule over the tuple of fired flags; None means the default rule
    predicate: Callable[[tuple[bool, ...]], bool] | None = None

    def __len__(self):
        return len(self.events)

    def fails(self, fired: Sequence[bool]) -> bool:
        if self.predicate is not None:
            return bool(self.predicate(tuple(fired)))
        hits = [e for e, f in zip(self.events, fired) if f]
        return len(hits) >= 2 or (len(hits) == 1 and not hits[0].tolerated)

    def permuted(self, order: Sequence[int]) -> FailureEventSet:
        if self.predicate is not None:
            raise ValueError("custom predicates cannot be permuted safely")
        return FailureEventSet(tuple(self.events[i] for i in order))


def any_failure(ps: Sequence[float]) -> FailureEventSet:
    return FailureEventSet(tuple(Event(f"e{i}", p) for i, p in enumerate(ps)))


def at_least_two(ps: Sequence[float]) -> FailureEventSet:
    return FailureEventSet(tuple(Event(f"e{i}", p, True) for i, p in enumerate(ps)))


def from_formula(formula, values: Mapping[str, float], memory: float | None = None) -> FailureEventSet:
    """Expand a concat ``Formula`` into its individual constituent events."""
    events = []
    for term in formula.terms:
        p = values[term.slot]
        for i in range(term.count):
            events.append(Event(f"{term.slot}[{i}]", p, i < term.tolerated))
    if formula.memory:
        events.append(Event("M", 0.0 if memory is None else memory, True))
    return FailureEventSet(tuple(events))


# -- brute force ------------------------------------------------------------


def _half_tables(events: Sequence[Event]):
    """Weight, fired count and non-tolerated fired count for every subset."""
    n = len(events)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    p = np.array([e.p for e in events], dtype=np.float64)
    crit = np.array([not e.tolerated for e in events], dtype=bool)
    weight = np.where(bits, p, 1.0 - p).prod(axis=1) if n else np.ones(1)
    count = bits.sum(axis=1).astype(np.int64)
    ncrit = (bits & crit).sum(axis=1).astype(np.int64)
    return weight, count, ncrit


@njit(cache=True)
def _pair_sum(wa, ca, ka, wb, cb, kb):
    # Neumaier-compensated sum of wa[i]*wb[j] over failing (i, j) pairs
    total = 0.0
    comp = 0.0
    for i in range(wa.shape[0]):
        inner = 0.0
        icomp = 0.0
        for j in range(wb.shape[0]):
            c = ca[i] + cb[j]
            if c >= 2 or (c == 1 and ka[i] + kb[j] == 1):
                x = wb[j]
                t = inner + x
                if abs(inner) >= abs(x):
                    icomp += (inner - t) + x
                else:
                    icomp += (x - t) + inner
                inner = t
        x = wa[i] * (inner + icomp)
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def exact_probability(es: FailureEventSet) -> float:
    """Sum of P(subset) over every failing subset of events (2**n subsets)."""
    n = len(es)
    if n > MAX_EVENTS:
        raise TooManyEvents(f"{n} events exceeds the enumeration limit of {MAX_EVENTS}")
    if es.predicate is not None:
        total = []
        for fired in itertools.product((False, True), repeat=n):
            if es.fails(fired):
                w = 1.0
                for e, f in zip(es.events, fired):
                    w *= e.p if f else 1.0 - e.p
                total.append(w)
        return math.fsum(total)
    half = n // 2
    wa, ca, ka = _half_tables(es.events[:half])
    wb, cb, kb = _half_tables(es.events[half:])
    return float(_pair_sum(wa, ca, ka, wb, cb, kb))


def exact_probability_grouped(es: FailureEventSet) -> float:
    """Exact sum over per-class failure counts.

    Events with equal probability and tolerance are exchangeable, so every
    subset is represented by its count vector weighted by the number of
    subsets it stands for.  Handles the large logical-gate event sets.
    """
    if es.predicate is not None:
        raise ValueError("grouped enumeration supports only the default rule")
    classes: dict[tuple[float, bool], int] = {}
    for e in es.events:
        classes[(e.p, e.tolerated)] = classes.get((e.p, e.tolerated), 0) + 1
    keys = list(classes)
    cells = math.prod(classes[k] + 1 for k in keys)
    if cells > MAX_GROUPED_CELLS:
        raise TooManyEvents(f"{cells} count vectors exceeds {MAX_GROUPED_CELLS}")
    weight = np.ones(1)
    count = np.zeros(1, dtype=np.int64)
    ncrit = np.zeros(1, dtype=np.int64)
    for p, tolerated in keys:
        size = classes[(p, tolerated)]
        c = np.arange(size + 1)
        pmf = np.array([math.comb(size, int(k)) * p**k * (1.0 - p) ** (size - k) for k in c])
        weight = np.multiply.outer(weight, pmf).ravel()
        count = np.add.outer(count, c).ravel()
        ncrit = np.add.outer(ncrit, np.zeros_like(c) if tolerated else c).ravel()
    failing = (count >= 2) | ((count == 1) & (ncrit == 1))
    return math.fsum(weight[failing])


# -- sampling ---------------------------------------------------------------


def monte_carlo(es: FailureEventSet, trials: int, seed: int) -> tuple[float, float]:
    """Estimate of the failure probability and its standard error.

    Trials are drawn in fixed-size chunks, each from its own PCG64 stream
    spawned from ``seed``; the result depends only on (events, trials, seed).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = np.array([e.p for e in es.events], dtype=np.float64)
    crit = np.array([not e.tolerated for e in es.events], dtype=bool)
    n_chunks = -(-trials // MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    failures = 0
    for k, ss in enumerate(streams):
        m = min(MC_CHUNK, trials - k * MC_CHUNK)
        rng = np.random.Generator(np.random.PCG64(ss))
        fired = rng.random((m, len(p))) < p
        if es.predicate is None:
            count = fired.sum(axis=1)
            ncrit = (fired & crit).sum(axis=1)
            failures += int(np.count_nonzero((count >= 2) | ((count == 1) & (ncrit == 1))))
        else:
            failures += sum(es.fails(row) for row in fired.tolist())
    est = failures / trials
    return est, math.sqrt(est * (1.0 - est) / trials)


# -- trace replay -----------------------------------------------------------


@dataclass(frozen=True)
class ReplayResult:
    ec_insertions: tuple[tuple[int, tuple[int, ...]], ...]
    final_noerr: tuple[Decimal, ...]


def replay_trace(circuit, tech, w: float, m: float, threshold: float, p_after_ec: float = 0.0,
                 db: TechDB | None = None, prec: int = 80) -> ReplayResult:
    """Threshold trace in ``prec``-digit decimal arithmetic.

    Keeps its own nanosecond clock per qubit instead of a slice grid, so it
    shares neither the scheduler nor the float arithmetic of the tracer.
    """
    db = db or default_db()
    ctx = Context(prec=prec)
    one = Decimal(1)
    gate_ok = ctx.subtract(one, Decimal(repr(w)))
    idle_ok = ctx.subtract(one, Decimal(repr(m)))
    theta = Decimal(repr(threshold))
    after_ec = ctx.subtract(one, Decimal(repr(p_after_ec)))
    ready = [0] * circuit.num_qubits
    state = [one] * circuit.num_qubits
    insertions = []
    for i, op in enumerate(circuit.ops):
        qs = op.operands
        start = max(ready[q] for q in qs)
        for q in qs:
            state[q] = ctx.multiply(state[q], ctx.power(idle_ok, start - ready[q]))
        if len(qs) == 2:
            a, b = qs
            worse = state[b] if state[b] < state[a] else state[a]
            state[a] = state[b] = worse
        factor = ctx.power(gate_ok, db.primitive_exponent(tech, op.kind))
        for q in qs:
            state[q] = ctx.multiply(state[q], factor)
            ready[q] = start + db.gate_time(tech, op.kind)
        crossed = tuple(q for q in qs if ctx.subtract(one, state[q]) > theta)
        if crossed:
            insertions.append((i, crossed))
        for q in qs:
            if op.kind.is_measurement:
                state[q] = one
            elif q in crossed:
                state[q] = after_ec
    return ReplayResult(tuple(insertions), tuple(state))
