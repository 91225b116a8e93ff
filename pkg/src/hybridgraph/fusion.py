"""Fusion gates as heralded graph rewrites, and boosted fusion.

Every gate is a sequence of primitives the graph layer already knows:

* type I, outcome ``i``: ``Z_a^i (|0><00| + |1><11|)``; ``b`` is absorbed into ``a``.
* type II variant, outcomes ``(i, j)``: type I then a Y measurement of the
  merged qubit with outcome ``j``.
* type II Bell, outcomes ``(i, j)``: projection onto
  ``(|0 i> + (-1)^j |1 1-i>)/sqrt2``, i.e. ``X_b^i``, type I, then X on the
  merged qubit with outcome ``j``.
* type II XZ, outcomes ``(i, j)``: projection onto
  ``(|0>|x_i> + (-1)^j |1>|x_{1-i}>)/sqrt2``, i.e. ``CZ_ab``, X on ``b`` with
  outcome ``i``, X on ``a`` with outcome ``j``.

Failures of type I and of the Bell/variant type II are Z measurements of
both photons; a failed XZ fusion measures X on ``qa`` and Z on ``qb``.

All functions accept a :class:`GraphState` or a :class:`RedundantGraph` and
return the same kind.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import clifford as cl
from . import graph as gc
from . import redundant as rd
from .errors import GraphError, ImpossibleOutcomeError, UnknownQubitError
from .graph import GraphState
from .redundant import Block, RedundantGraph

__all__ = [
    "SUCCESS",
    "PARTIAL_FAIL",
    "COMPLETE_FAIL",
    "FusionOutcome",
    "AttemptDraw",
    "ScriptedSampler",
    "UniformSampler",
    "ArraySampler",
    "fuse_type1",
    "fuse_type2_variant",
    "fuse_type2_bell",
    "fuse_type2_xz",
    "fail_fusion",
    "boosted_fuse",
    "default_allocation",
]

SUCCESS = "success"
PARTIAL_FAIL = "partial_fail"
COMPLETE_FAIL = "complete_fail"


# -- plain-graph kernels --------------------------------------------------------
def _merge_plain(g: GraphState, a: int, b: int, flip_b: bool = False) -> GraphState:
    if flip_b:
        g = gc.apply_pauli(g, b, "X")
    if g.frame(a).is_diagonal and g.frame(b).is_diagonal:
        return gc.merge(g, a, b)
    # CNOT_{a->b} then <0|_b equals the merge Kraus for any frames
    g = gc.apply_clifford(g, b, cl.H)
    g = gc.cz(g, a, b)
    g = gc.apply_clifford(g, b, cl.H)
    return gc.measure(g, b, "Z", 0)


def _check_pair(state, qa: int, qb: int) -> None:
    if qa == qb:
        raise GraphError("cannot fuse a qubit with itself")
    if qa not in state:
        raise UnknownQubitError(f"unknown qubit {qa}")
    if qb not in state:
        raise UnknownQubitError(f"unknown qubit {qb}")
    if isinstance(state, RedundantGraph) and state.vertex_of(qa).id == state.vertex_of(qb).id:
        raise GraphError(f"qubits {qa} and {qb} belong to the same vertex")


def _bits(outcome) -> tuple[int, int]:
    i, j = outcome
    return int(i), int(j)


# -- redundant-graph helpers ---------------------------------------------------------
def _rd_merge(rg: RedundantGraph, qa: int, qb: int, flip_b: bool = False) -> RedundantGraph:
    va, vb = rg.vertex_of(qa), rg.vertex_of(qb)
    g, blocks = rd.physical_view(rg, {va.id: qa, vb.id: qb})
    g = _merge_plain(g, qa, qb, flip_b)
    merged = Block(va.id, qa, va.members + tuple(q for q in vb.members if q != qb))
    blocks = [merged] + [b for b in blocks if b.vid not in (va.id, vb.id)]
    return rd.lift(g, blocks, rg, rg.emitter)


def _rd_cz(rg: RedundantGraph, qa: int, qb: int) -> RedundantGraph:
    va, vb = rg.vertex_of(qa), rg.vertex_of(qb)
    g, blocks = rd.physical_view(rg, {va.id: qa, vb.id: qb})
    return rd.lift(gc.cz(g, qa, qb), blocks, rg, rg.emitter)


def _measure(state, q: int, basis: str, outcome: int):
    if isinstance(state, RedundantGraph):
        return rd.measure(state, q, basis, outcome)
    return gc.measure(state, q, basis, outcome)


def _merge(state, qa: int, qb: int, flip_b: bool = False):
    if isinstance(state, RedundantGraph):
        return _rd_merge(state, qa, qb, flip_b)
    return _merge_plain(state, qa, qb, flip_b)


def _z(state, q: int):
    if isinstance(state, RedundantGraph):
        return rd.apply_clifford(state, q, cl.Z)
    return gc.apply_clifford(state, q, cl.Z)


# -- gates ---------------------------------------------------------------------------
def fuse_type1(state, qa: int, qb: int, outcome: int = 0):
    """Successful type I fusion: ``qb`` is consumed and the vertices of the
    two qubits are merged, with ``Z^i`` on the survivor ``qa``."""
    _check_pair(state, qa, qb)
    out = _merge(state, qa, qb)
    return _z(out, qa) if int(outcome) else out


def fuse_type2_variant(state, qa: int, qb: int, outcome=(0, 0)):
    """Successful variant type II fusion (type I then Y on the merged qubit).

    On a plain graph this is a local complementation at the merged vertex
    followed by its removal. Both photons are consumed.
    """
    i, j = _bits(outcome)
    out = fuse_type1(state, qa, qb, i)
    return _measure(out, qa, "Y", j)


def fuse_type2_bell(state, qa: int, qb: int, outcome=(0, 0)):
    """Successful Bell-basis type II fusion; merges the vertices of ``qa``
    and ``qb`` and consumes both photons."""
    i, j = _bits(outcome)
    _check_pair(state, qa, qb)
    out = _merge(state, qa, qb, flip_b=bool(i))
    return _measure(out, qa, "X", j)


def fuse_type2_xz(state, qa: int, qb: int, outcome=(0, 0)):
    """Successful XZ/ZX type II fusion; joins the residual vertices by an edge."""
    i, j = _bits(outcome)
    _check_pair(state, qa, qb)
    if isinstance(state, RedundantGraph):
        out = _rd_cz(state, qa, qb)
    else:
        out = gc.cz(state, qa, qb)
    out = _measure(out, qb, "X", i)
    return _measure(out, qa, "X", j)


def fail_fusion(state, qa: int, qb: int, outcome=(0, 0), kind: str = "type2"):
    """Heralded failure: Z on both photons, or X on ``qa`` and Z on ``qb``
    for ``kind="xz"``."""
    i, j = _bits(outcome)
    _check_pair(state, qa, qb)
    first = "X" if kind == "xz" else "Z"
    out = _measure(state, qa, first, i)
    return _measure(out, qb, "Z", j)


# -- boosted fusion -----------------------------------------------------------------------
@dataclass(frozen=True)
class FusionOutcome:
    kind: str
    attempts_used: int
    bits: tuple[tuple[int, int], ...] = ()

    @property
    def success(self) -> bool:
        return self.kind == SUCCESS


@dataclass(frozen=True)
class AttemptDraw:
    """Randomness for one attempt of a boosted fusion."""

    detected_a: bool
    detected_b: bool
    success: bool
    i: int
    j: int


class Sampler(Protocol):
    def draw(self, attempt: int) -> AttemptDraw: ...


@dataclass
class ScriptedSampler:
    """Replays given ``(success, i, j)`` triples; ``lost`` lists attempts in
    which a photon goes undetected."""

    outcomes: Sequence[tuple[bool, int, int]]
    lost: frozenset[int] = frozenset()

    def draw(self, attempt: int) -> AttemptDraw:
        ok, i, j = self.outcomes[attempt] if attempt < len(self.outcomes) else (False, 0, 0)
        det = attempt not in self.lost
        return AttemptDraw(det, det, bool(ok), int(i), int(j))


@dataclass
class ArraySampler:
    """Maps uniforms ``u[attempt] = (det_a, det_b, herald, i, j)`` to draws:
    detection when ``u < eta``, success and unit bits when ``u < 1/2``."""

    uniforms: np.ndarray
    eta: float = 1.0

    def draw(self, attempt: int) -> AttemptDraw:
        u = self.uniforms[attempt]
        return AttemptDraw(
            bool(u[0] < self.eta), bool(u[1] < self.eta), bool(u[2] < 0.5), int(u[3] < 0.5), int(u[4] < 0.5)
        )


@dataclass
class UniformSampler:
    """Fresh draws from a numpy generator."""

    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    eta: float = 1.0

    def draw(self, attempt: int) -> AttemptDraw:
        return ArraySampler(self.rng.random((1, 5)), self.eta).draw(0)


def default_allocation(rg: RedundantGraph, vid: int, m: int) -> tuple[int, ...]:
    """The ``m`` highest-id members of a vertex, never its first member or
    the emitter."""
    v = rg.vertex(vid)
    pool = [q for q in v.members[1:] if q != v.emitter]
    if len(pool) < m:
        raise GraphError(f"vertex {vid} has {len(pool)} allocatable photons, {m} needed")
    return tuple(sorted(pool)[-m:])


def boosted_fuse(
    rg: RedundantGraph,
    A: int,
    B: int,
    m: int,
    sampler: Sampler,
    photons_a: Sequence[int] | None = None,
    photons_b: Sequence[int] | None = None,
    trace: list | None = None,
) -> tuple[RedundantGraph, FusionOutcome]:
    """Boosted type II fusion between logical vertices ``A`` and ``B``.

    Attempt ``l`` pushes out ``a^l`` and ``b^l`` and fuses them with the
    variant type II gate. On success the unused allocated photons are
    X-measured; they too must be detected. After ``m`` heralded failures the
    result is a partial failure; any undetected photon is a complete failure
    and the returned state is the one reached so far.
    """
    if m < 1:
        raise GraphError("m must be at least 1")
    if A == B:
        raise GraphError("cannot fuse a vertex with itself")
    pa = tuple(photons_a) if photons_a is not None else default_allocation(rg, A, m)
    pb = tuple(photons_b) if photons_b is not None else default_allocation(rg, B, m)
    if len(pa) != m or len(pb) != m:
        raise GraphError("allocation sizes must equal m")
    for p in pa:
        if rg.vertex_of(p).id != A:
            raise GraphError(f"photon {p} is not in vertex {A}")
    for p in pb:
        if rg.vertex_of(p).id != B:
            raise GraphError(f"photon {p} is not in vertex {B}")
    if len(rg.vertex(A)) < m + 1 or len(rg.vertex(B)) < m + 1:
        raise GraphError("each vertex needs m allocated photons plus a survivor")

    bits: list[tuple[int, int]] = []

    def done(state, kind, used):
        out = FusionOutcome(kind, used, tuple(bits))
        if trace is not None:
            trace.append(trace_record("boosted", pa, pb, out))
        return state, out

    state = rg
    for l in range(m):
        d = sampler.draw(l)
        a, b = pa[l], pb[l]
        state = rd.hadamard_push(state, a)
        state = rd.hadamard_push(state, b)
        if not (d.detected_a and d.detected_b):
            return done(state, COMPLETE_FAIL, l + 1)
        bits.append((d.i, d.j))
        if d.success:
            state = _first_possible(fuse_type2_variant, state, a, b, d.i, d.j)
            for r in range(l + 1, m):
                dr = sampler.draw(r)
                for q, det, bit in ((pa[r], dr.detected_a, dr.i), (pb[r], dr.detected_b, dr.j)):
                    if not det:
                        return done(state, COMPLETE_FAIL, l + 1)
                    forced = rd.forced_outcome(state, q, "X")
                    state = rd.measure(state, q, "X", bit if forced is None else forced)
            return done(state, SUCCESS, l + 1)
        state = _first_possible(fail_fusion, state, a, b, d.i, d.j)
    return done(state, PARTIAL_FAIL, m)


def _first_possible(gate, state, a, b, i, j):
    # drawn bits name a branch; fall back to the others if it has zero weight
    for bits in ((i, j), (i, 1 - j), (1 - i, j), (1 - i, 1 - j)):
        try:
            return gate(state, a, b, bits)
        except ImpossibleOutcomeError:
            continue
    raise ImpossibleOutcomeError("no fusion branch has nonzero weight")


def trace_record(kind: str, qa, qb, outcome: FusionOutcome) -> dict:
    """Fusion trace entry ``{type, qa, qb, outcome_bits, kind, attempts_used}``."""
    return {
        "type": kind,
        "qa": list(qa) if isinstance(qa, (tuple, list)) else qa,
        "qb": list(qb) if isinstance(qb, (tuple, list)) else qb,
        "outcome_bits": [list(b) for b in outcome.bits],
        "kind": outcome.kind,
        "attempts_used": outcome.attempts_used,
    }


def trace_json(records: Sequence[dict]) -> str:
    return "\n".join(json.dumps(r, separators=(",", ":")) for r in records)
