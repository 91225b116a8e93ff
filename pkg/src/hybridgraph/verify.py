"""Oracle verification suite.

Each rule is exercised on random inputs and compared with the dense
statevector oracle up to global phase. Zero-weight branches must be
rejected by both sides. The suite backs ``hybridgraph verify`` and the
acceptance tests.
"""

from __future__ import annotations

import itertools
import json
import random
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

from . import clifford as cl
from . import fusion as fu
from . import graph as gc
from . import oracle as orc
from . import redundant as rd
from .emitter import compile_linear
from .errors import GraphError, ImpossibleOutcomeError
from .graph import GraphState
from .redundant import RedundantGraph

__all__ = [
    "RuleReport",
    "random_graph",
    "random_redundant",
    "run_suite",
    "verify_linear",
    "compositions",
    "RULES",
]

TOL = 1e-8
_EMITTER = 1000


@dataclass
class RuleReport:
    rule: str
    checks: int = 0
    failures: int = 0
    counterexample: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.checks > 0

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.rule}: {self.checks - self.failures}/{self.checks}"


# -- generators ---------------------------------------------------------------------
def random_graph(rng: random.Random, n_max: int = 8, n_min: int = 1, general_frames: bool = True) -> GraphState:
    n = rng.randint(n_min, n_max)
    p = rng.random()
    edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]
    pool = cl.CLIFFORDS if general_frames else [c for c in cl.CLIFFORDS if c.is_diagonal]
    frames = {q: rng.choice(pool) for q in range(n) if rng.random() < 0.6}
    return GraphState(range(n), edges, frames)


def random_redundant(
    rng: random.Random, n_max: int = 8, min_vertices: int = 1, general_frames: bool = True
) -> RedundantGraph:
    blocks: list[list[int]] = []
    q = 0
    budget = rng.randint(max(min_vertices, 1), n_max)
    while q < budget or len(blocks) < min_vertices:
        size = min(rng.randint(1, 3), max(1, budget - q))
        blocks.append(list(range(q, q + size)))
        q += size
    p = rng.random()
    edges = [(a, b) for a, b in itertools.combinations(range(len(blocks)), 2) if rng.random() < p]
    pool = cl.CLIFFORDS if general_frames else [c for c in cl.CLIFFORDS if c.is_diagonal]
    frames = {i: rng.choice(pool) for i in range(q) if rng.random() < 0.6}
    return RedundantGraph(blocks, edges, frames)


def _state(x) -> orc.DenseState:
    if isinstance(x, RedundantGraph):
        return orc.build_redundant_state(x)
    return orc.build_graph_state(x)


def _dump(x) -> dict:
    return {"kind": type(x).__name__, **x.to_dict()}


def _compare(report: RuleReport, expected: Callable, actual: Callable, context: dict) -> None:
    """Run both sides; they must agree on possibility and on the state."""
    report.checks += 1
    try:
        want = expected()
    except ImpossibleOutcomeError:
        want = None
    try:
        got = actual()
    except ImpossibleOutcomeError:
        got = None
    ok = (want is None) == (got is None)
    if ok and want is not None:
        try:
            ok = orc.equal_up_to_phase(_state(got), want, TOL)
        except GraphError:
            ok = False
    if not ok:
        report.failures += 1
        if report.counterexample is None:
            ctx = dict(context)
            ctx["result"] = None if got is None else _dump(got)
            ctx["oracle_possible"] = want is not None
            report.counterexample = ctx


def _kraus(s, which, targets, outcome=0, tag=None):
    return orc.apply_kraus(s, which, targets, outcome, tag)[0]


# -- rule families ---------------------------------------------------------------------
def _graph_rules(rng, cases, n_max, reports):
    for _ in range(cases):
        g = random_graph(rng, n_max, 1)
        s = orc.build_graph_state(g)
        ctx = {"input": _dump(g)}
        a = rng.choice(g.vertices)
        # frame corrections make local complementation state-preserving
        _compare(reports["local_complement"], lambda: s, lambda: gc.local_complement(g, a), {**ctx, "a": a})
        for basis in "XYZ":
            for out in (0, 1):
                _compare(
                    reports[f"measure_{basis.lower()}"],
                    lambda: _kraus(s, f"P_{basis}", (a,), out),
                    lambda: gc.measure(g, a, basis, out),
                    {**ctx, "a": a, "outcome": out},
                )
        if len(g) >= 2:
            a, b = rng.sample(g.vertices, 2)
            _compare(reports["cz"], lambda: orc.apply_cz(s, a, b), lambda: gc.cz(g, a, b), {**ctx, "a": a, "b": b})


_GATES = {
    "fuse_type1": ("G_I", fu.fuse_type1, (0, 1)),
    "fuse_type2_variant": ("G_II", fu.fuse_type2_variant, tuple(itertools.product((0, 1), repeat=2))),
    "fuse_type2_bell": ("BELL", fu.fuse_type2_bell, tuple(itertools.product((0, 1), repeat=2))),
    "fuse_type2_xz": ("XZ", fu.fuse_type2_xz, tuple(itertools.product((0, 1), repeat=2))),
}


def _fail_expected(s, a, b, out, kind):
    first = "P_X" if kind == "xz" else "P_Z"
    return _kraus(_kraus(s, first, (a,), out[0]), "P_Z", (b,), out[1])


def _fusion_rules(rng, cases, n_max, reports):
    for t in range(cases):
        if t % 2:
            st = random_redundant(rng, n_max, 2)
            if len(st.vertices) < 2:
                continue
            while True:
                a, b = rng.sample(st.qubits, 2)
                if st.vertex_of(a).id != st.vertex_of(b).id:
                    break
        else:
            st = random_graph(rng, n_max, 2)
            a, b = rng.sample(st.vertices, 2)
        s = _state(st)
        ctx = {"input": _dump(st), "qa": a, "qb": b}
        for name, (which, fn, outs) in _GATES.items():
            for out in outs:
                _compare(reports[name], lambda: _kraus(s, which, (a, b), out), lambda: fn(st, a, b, out),
                         {**ctx, "outcome": out})
        for kind in ("type2", "xz"):
            for out in itertools.product((0, 1), repeat=2):
                _compare(
                    reports["fail_fusion"],
                    lambda: _fail_expected(s, a, b, out, kind),
                    lambda: fu.fail_fusion(st, a, b, out, kind),
                    {**ctx, "outcome": out, "kind": kind},
                )


def _redundant_rules(rng, cases, n_max, reports):
    for _ in range(cases):
        rg = random_redundant(rng, n_max)
        s = orc.build_redundant_state(rg)
        ctx = {"input": _dump(rg)}
        reports["to_physical"].checks += 1
        if not orc.equal_up_to_phase(orc.build_graph_state(rd.to_physical(rg)), s, TOL):
            reports["to_physical"].failures += 1
            reports["to_physical"].counterexample = reports["to_physical"].counterexample or ctx
        q = rng.choice(rg.qubits)
        if len(rg.vertex_of(q)) >= 2:
            _compare(reports["hadamard_push"], lambda: orc.apply_unitary(s, q, cl.H), lambda: rd.hadamard_push(rg, q),
                     {**ctx, "q": q})
        for basis in "XYZ":
            for out in (0, 1):
                _compare(
                    reports["redundant_measure"],
                    lambda: _kraus(s, f"P_{basis}", (q,), out),
                    lambda: rd.measure(rg, q, basis, out),
                    {**ctx, "q": q, "basis": basis, "outcome": out},
                )
        for out in (0, 1):
            _compare(
                reports["z_measure_vertex_member"],
                lambda: _collapse(s, rg, q, out),
                lambda: rd.z_measure_vertex_member(rg, q, out),
                {**ctx, "q": q, "outcome": out},
            )


def _collapse(s, rg, q, out):
    """Z on ``q``, then every other member of its block whose Z value is
    now definite."""
    s = _kraus(s, "P_Z", (q,), out)
    for m in rg.vertex_of(q).members:
        if m == q:
            continue
        for bit in (0, 1):
            try:
                nxt, p = orc.apply_kraus(s, "P_Z", (m,), bit)
            except ImpossibleOutcomeError:
                continue
            if p > 1 - 1e-9:
                s = nxt
                break
    return s


def _emitter_rules(rng, cases, n_max, reports):
    for _ in range(cases):
        rg = rd.hadamard_emitter(rd.init_emitter(rd.new_redundant(), _EMITTER))
        s = orc.apply_unitary(orc.build_redundant_state(rd.init_emitter(rd.new_redundant(), _EMITTER)), _EMITTER, cl.H)
        nid = 0
        ops = []
        steps = rng.randint(1, n_max - 1)
        for _step in range(steps):
            if nid >= n_max - 1:
                break
            if rng.random() < 0.65 or len(rg.vertex_of(_EMITTER)) < 2:
                ops.append(("emit", nid))
                prev, prev_s, new = rg, s, nid
                s = orc.apply_emission(s, _EMITTER, new)
                _compare(reports["emission"], lambda: s, lambda: rd.emit_photon(prev, new), {"input": _dump(prev), "ops": ops})
                rg = rd.emit_photon(rg, nid)
                nid += 1
            else:
                ops.append(("h",))
                prev = rg
                s = orc.apply_unitary(s, _EMITTER, cl.H)
                _compare(reports["hadamard_emitter"], lambda: s, lambda: rd.hadamard_emitter(prev),
                         {"input": _dump(prev), "ops": ops})
                rg = rd.hadamard_emitter(rg)
        for out in (0, 1):
            _compare(
                reports["measure_out_emitter"],
                lambda: _kraus(s, "P_X", (_EMITTER,), out),
                lambda: rd.measure_out_emitter(rg, out),
                {"input": _dump(rg), "ops": ops, "outcome": out},
            )


RULES = (
    "cz",
    "local_complement",
    "measure_x",
    "measure_y",
    "measure_z",
    "fuse_type1",
    "fuse_type2_variant",
    "fuse_type2_bell",
    "fuse_type2_xz",
    "fail_fusion",
    "to_physical",
    "hadamard_push",
    "redundant_measure",
    "z_measure_vertex_member",
    "emission",
    "hadamard_emitter",
    "measure_out_emitter",
)


def run_suite(cases: int = 500, max_qubits: int = 8, seed: int = 0) -> list[RuleReport]:
    """Check every rewrite rule on ``cases`` random inputs of at most
    ``max_qubits`` qubits."""
    if max_qubits < 2:
        raise ValueError("max_qubits must be at least 2")
    if max_qubits > orc.N_MAX:
        raise ValueError(f"max_qubits exceeds the oracle limit {orc.N_MAX}")
    rng = random.Random(seed)
    reports = {r: RuleReport(r) for r in RULES}
    _graph_rules(rng, cases, max_qubits, reports)
    _fusion_rules(rng, cases, max_qubits, reports)
    _redundant_rules(rng, cases, max_qubits, reports)
    _emitter_rules(rng, cases, max_qubits, reports)
    return [reports[r] for r in RULES]


# -- generation sequences -------------------------------------------------------------------
def compositions(total: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of positive integers summing to ``total``."""
    for cuts in itertools.product((0, 1), repeat=total - 1):
        parts, run = [], 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        yield tuple(parts)


def _linear_target(sizes) -> RedundantGraph:
    blocks, q = [], 0
    for s in sizes:
        blocks.append(list(range(q, q + s)))
        q += s
    return RedundantGraph(blocks, [(i, i + 1) for i in range(len(sizes) - 1)])


def verify_linear(max_photons: int = 7) -> RuleReport:
    """Run each compiled linear plan on the redundant graph and on the oracle.

    For both emitter outcomes the rewrite result must match the oracle, keep
    the requested block structure, and for outcome 0 equal the redundant
    linear cluster defined directly from GHZ blocks.
    """
    from .emitter import Emit, HadamardEmitter, InitEmitter, MeasureXEmitter

    rep = RuleReport("linear_generation")
    for total in range(1, max_photons + 1):
        for sizes in compositions(total):
            plan = compile_linear(sizes)
            rg = rd.new_redundant()
            s = None
            for ins in plan.instructions:
                if isinstance(ins, InitEmitter):
                    rg = rd.init_emitter(rg, _EMITTER)
                    s = orc.build_redundant_state(rg)
                elif isinstance(ins, HadamardEmitter):
                    rg = rd.hadamard_emitter(rg)
                    s = orc.apply_unitary(s, _EMITTER, cl.H)
                elif isinstance(ins, Emit):
                    rg = rd.emit_photon(rg, ins.photon)
                    s = orc.apply_emission(s, _EMITTER, ins.photon)
                elif isinstance(ins, MeasureXEmitter):
                    target = _linear_target(sizes)
                    for out in (0, 1):
                        rep.checks += 1
                        try:
                            got = rd.measure_out_emitter(rg, out)
                            want = _kraus(s, "P_X", (_EMITTER,), out)
                        except ImpossibleOutcomeError:
                            rep.failures += 1
                            continue
                        good = orc.equal_up_to_phase(orc.build_redundant_state(got), want, TOL)
                        good &= got.structure() == target.structure()
                        if out == 0:
                            good &= orc.equal_up_to_phase(orc.build_redundant_state(target), want, TOL)
                        if not good:
                            rep.failures += 1
                            rep.counterexample = rep.counterexample or {"sizes": list(sizes), "outcome": out}
    return rep


def report_json(reports: list[RuleReport]) -> str:
    return json.dumps(
        [
            {
                "rule": r.rule,
                "checks": r.checks,
                "failures": r.failures,
                "ok": r.ok,
                "counterexample": r.counterexample,
            }
            for r in reports
        ],
        indent=1,
        default=str,
    )
