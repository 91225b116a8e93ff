"""Generation plans for emitter-produced redundant graphs.

A plan is a flat instruction list. Emitter instructions belong to a
*stream* (one emitter run from initialisation to the final X measurement);
fusions and terminal measurements come after all streams and carry
``stream=None``. Photon ids are global to the plan and assigned from 0 in
emission order.

The time model charges ``T_emit`` per emission and ``T_h`` per emitter
Hadamard; everything else is free. Streams run back to back on one emitter
(``sequential``) or side by side on separate emitters (``parallel``).
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PlanError

__all__ = [
    "InitEmitter",
    "HadamardEmitter",
    "Emit",
    "MeasureXEmitter",
    "HPush",
    "FuseType1",
    "FuseType2Variant",
    "FuseType2Bell",
    "FuseType2XZ",
    "BoostedFuse",
    "MeasureX",
    "MeasureZ",
    "Instruction",
    "GenerationPlan",
    "TimeModel",
    "compile_linear",
    "compile_ghz",
    "compile_boosted_pair",
    "compile_2d_layers",
    "compile_cluster_nd",
    "compile_ring",
    "compile_encoded_ring",
    "encoded_ring_audit",
    "plan_duration",
    "write_plan",
    "read_plan",
]


# -- instructions -------------------------------------------------------------
@dataclass(frozen=True)
class InitEmitter:
    stream: int = 0
    op = "init_emitter"


@dataclass(frozen=True)
class HadamardEmitter:
    stream: int = 0
    op = "hadamard_emitter"


@dataclass(frozen=True)
class Emit:
    photon: int
    stream: int = 0
    op = "emit"


@dataclass(frozen=True)
class MeasureXEmitter:
    stream: int = 0
    op = "measure_x_emitter"


@dataclass(frozen=True)
class HPush:
    q: int
    stream: int | None = None
    op = "h_push"


@dataclass(frozen=True)
class FuseType1:
    qa: int
    qb: int
    stream: int | None = None
    op = "fuse_type1"


@dataclass(frozen=True)
class FuseType2Variant:
    qa: int
    qb: int
    stream: int | None = None
    op = "fuse_type2_variant"


@dataclass(frozen=True)
class FuseType2Bell:
    qa: int
    qb: int
    stream: int | None = None
    op = "fuse_type2_bell"


@dataclass(frozen=True)
class FuseType2XZ:
    qa: int
    qb: int
    stream: int | None = None
    op = "fuse_type2_xz"


@dataclass(frozen=True)
class BoostedFuse:
    """Boosted fusion between the vertices holding photon tuples ``a`` and
    ``b``; attempt ``l`` uses ``a[l]`` and ``b[l]``, so ``m = len(a)``."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    stream: int | None = None
    op = "boosted_fuse"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if len(self.a) != len(self.b) or not self.a:
            raise PlanError("boosted fusion needs two equal, nonempty photon allocations")

    @property
    def m(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class MeasureX:
    q: int
    stream: int | None = None
    op = "measure_x"


@dataclass(frozen=True)
class MeasureZ:
    q: int
    stream: int | None = None
    op = "measure_z"


Instruction = (
    InitEmitter
    | HadamardEmitter
    | Emit
    | MeasureXEmitter
    | HPush
    | FuseType1
    | FuseType2Variant
    | FuseType2Bell
    | FuseType2XZ
    | BoostedFuse
    | MeasureX
    | MeasureZ
)
_BY_OP = {
    cls.op: cls
    for cls in (
        InitEmitter,
        HadamardEmitter,
        Emit,
        MeasureXEmitter,
        HPush,
        FuseType1,
        FuseType2Variant,
        FuseType2Bell,
        FuseType2XZ,
        BoostedFuse,
        MeasureX,
        MeasureZ,
    )
}
FUSIONS = (FuseType1, FuseType2Variant, FuseType2Bell, FuseType2XZ)
_EMITTER_OPS = (InitEmitter, HadamardEmitter, Emit, MeasureXEmitter)


def instruction_to_dict(ins) -> dict:
    d = {"op": ins.op}
    for f in dataclasses.fields(ins):
        v = getattr(ins, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d


def instruction_from_dict(d: dict):
    d = dict(d)
    try:
        cls = _BY_OP[d.pop("op")]
    except KeyError as exc:
        raise PlanError(f"unknown instruction {exc}") from None
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(d) - names
    if extra:
        raise PlanError(f"unexpected fields {sorted(extra)} for {cls.op}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise PlanError(str(exc)) from None


# -- plans ------------------------------------------------------------------------
@dataclass(frozen=True)
class GenerationPlan:
    instructions: tuple = ()
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        validate(self)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __add__(self, other: GenerationPlan) -> GenerationPlan:
        """Concatenation; the second plan's streams and photons are renumbered
        past the first's."""
        s_off = max(self.stream_ids(), default=-1) + 1
        p_off = max(self.photons(), default=-1) + 1
        shifted = [_shift(ins, s_off, p_off) for ins in other.instructions]
        mine = [i for i in self.instructions if i.stream is not None]
        post = [i for i in self.instructions if i.stream is None]
        o_streams = [i for i in shifted if i.stream is not None]
        o_post = [i for i in shifted if i.stream is None]
        return GenerationPlan(mine + o_streams + post + o_post, "composite", {})

    def stream_ids(self) -> list[int]:
        return sorted({i.stream for i in self.instructions if i.stream is not None})

    def photons(self) -> list[int]:
        return [i.photon for i in self.instructions if isinstance(i, Emit)]

    def streams(self) -> list[GenerationPlan]:
        """One single-stream plan per emitter stream (emitter instructions only)."""
        return [
            GenerationPlan(
                [i for i in self.instructions if i.stream == s],
                self.family,
                dict(self.params, stream=s),
            )
            for s in self.stream_ids()
        ]

    def vertex_sizes(self) -> dict[int, list[int]]:
        """Photons per emitted vertex, per stream, as compiled."""
        out: dict[int, list[int]] = {}
        for s in self.stream_ids():
            sizes: list[int] = []
            for ins in self.instructions:
                if ins.stream != s:
                    continue
                if isinstance(ins, HadamardEmitter):
                    sizes.append(0)
                elif isinstance(ins, Emit):
                    if not sizes:
                        raise PlanError("emission before the first Hadamard")
                    sizes[-1] += 1
            out[s] = sizes
        return out

    def boosted(self) -> list[BoostedFuse]:
        return [i for i in self.instructions if isinstance(i, BoostedFuse)]

    def to_jsonl(self) -> str:
        header = {
            "kind": "header",
            "family": self.family,
            "params": self.params,
            "instructions": len(self.instructions),
            "photons": len(self.photons()),
            "streams": len(self.stream_ids()),
        }
        lines = [json.dumps(header, separators=(",", ":"))]
        lines += [json.dumps(instruction_to_dict(i), separators=(",", ":")) for i in self.instructions]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> GenerationPlan:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or rows[0].get("kind") != "header":
            raise PlanError("plan file must start with a header record")
        head = rows[0]
        ins = [instruction_from_dict(r) for r in rows[1:]]
        if "instructions" in head and head["instructions"] != len(ins):
            raise PlanError("instruction count does not match the header")
        return cls(ins, head.get("family", "custom"), head.get("params", {}))


def _shift(ins, s_off: int, p_off: int):
    kw = {}
    for f in dataclasses.fields(ins):
        v = getattr(ins, f.name)
        if f.name == "stream":
            kw[f.name] = None if v is None else v + s_off
        elif isinstance(v, tuple):
            kw[f.name] = tuple(x + p_off for x in v)
        else:
            kw[f.name] = v + p_off
    return type(ins)(**kw)


def validate(plan: GenerationPlan) -> None:
    """Stream structure and define-before-use checks."""
    state: dict[int, str] = {}
    alive: set[int] = set()
    seen: set[int] = set()
    finished_streams = False

    def need(q):
        if q not in alive:
            raise PlanError(f"photon {q} used before emission or after removal")

    for ins in plan.instructions:
        s = ins.stream
        if isinstance(ins, _EMITTER_OPS):
            if s is None:
                raise PlanError(f"{ins.op} needs a stream id")
            if finished_streams:
                raise PlanError("emitter streams must precede fusions and terminal measurements")
            st = state.get(s)
            if isinstance(ins, InitEmitter):
                if st is not None:
                    raise PlanError(f"stream {s} initialised twice")
                if any(v == "open" for v in state.values()):
                    raise PlanError("streams must not interleave")
                state[s] = "open"
            elif st != "open":
                raise PlanError(f"{ins.op} on stream {s} which is not open")
            if isinstance(ins, Emit):
                if ins.photon in seen or ins.photon < 0:
                    raise PlanError(f"photon id {ins.photon} reused or negative")
                seen.add(ins.photon)
                alive.add(ins.photon)
            if isinstance(ins, MeasureXEmitter):
                state[s] = "closed"
            continue
        if isinstance(ins, HPush):
            need(ins.q)
            if s is None:
                finished_streams = True
            continue
        finished_streams = True
        if isinstance(ins, FUSIONS):
            need(ins.qa)
            need(ins.qb)
            alive.discard(ins.qb)
            if not isinstance(ins, FuseType1):
                alive.discard(ins.qa)
        elif isinstance(ins, BoostedFuse):
            for q in ins.a + ins.b:
                need(q)
            if set(ins.a) & set(ins.b) or len(set(ins.a)) != ins.m:
                raise PlanError("boosted fusion allocations overlap")
            alive.difference_update(ins.a + ins.b)
        elif isinstance(ins, (MeasureX, MeasureZ)):
            need(ins.q)
            alive.discard(ins.q)
        else:
            raise PlanError(f"unknown instruction {ins!r}")
    for s, st in state.items():
        if st != "closed":
            raise PlanError(f"stream {s} is never closed by an emitter measurement")


# -- compilers --------------------------------------------------------------------------
class _Builder:
    def __init__(self):
        self.ins: list = []
        self.next_photon = 0
        self.next_stream = 0

    def linear(self, sizes: Sequence[int]) -> list[list[int]]:
        """Emit one stream; returns the photon ids of each vertex."""
        s = self.next_stream
        self.next_stream += 1
        self.ins.append(InitEmitter(s))
        verts = []
        for size in sizes:
            self.ins.append(HadamardEmitter(s))
            ids = []
            for _ in range(size):
                ids.append(self.next_photon)
                self.ins.append(Emit(self.next_photon, s))
                self.next_photon += 1
            verts.append(ids)
        self.ins.append(MeasureXEmitter(s))
        return verts

    def plan(self, family: str, params: dict) -> GenerationPlan:
        return GenerationPlan(self.ins, family, params)


def _check_sizes(sizes: Sequence[int]) -> list[int]:
    sizes = [int(x) for x in sizes]
    if not sizes:
        raise PlanError("at least one vertex is needed")
    if min(sizes) < 1:
        raise PlanError("vertex sizes must be at least 1")
    return sizes


def compile_linear(sizes: Sequence[int]) -> GenerationPlan:
    """Redundant linear cluster with the given vertex sizes: initialise, then
    per vertex one emitter Hadamard and ``|A_i|`` emissions, then the
    disconnecting X measurement."""
    sizes = _check_sizes(sizes)
    b = _Builder()
    b.linear(sizes)
    return b.plan("linear", {"sizes": sizes})


def compile_ghz(n: int) -> GenerationPlan:
    b = _Builder()
    b.linear(_check_sizes([n]))
    return b.plan("ghz", {"n": int(n)})


def _check_m(m: int) -> int:
    if int(m) < 1:
        raise PlanError("m must be at least 1")
    return int(m)


def compile_boosted_pair(m: int) -> GenerationPlan:
    """Two single-vertex streams of ``m + 1`` photons joined by one boosted
    fusion; the survivors are left in place."""
    m = _check_m(m)
    b = _Builder()
    (va,) = b.linear([m + 1])
    (vb,) = b.linear([m + 1])
    b.ins.append(BoostedFuse(va[1:], vb[1:]))
    return b.plan("boosted-pair", {"m": m})


def compile_2d_layers(n1: int, n2: int, m: int) -> GenerationPlan:
    """``n2`` redundant linear clusters of ``n1`` vertices, one stream each,
    joined vertex by vertex with boosted fusions.

    Boundary layers have ``m + 1`` photons per vertex, interior layers
    ``2m + 1``; a single layer is a plain linear cluster. Use
    :meth:`GenerationPlan.streams` for the per-layer plans.
    """
    n1, n2 = int(n1), int(n2)
    if n1 < 1 or n2 < 1:
        raise PlanError("n1 and n2 must be at least 1")
    m = _check_m(m)
    b = _Builder()
    layers = []
    for s in range(n2):
        if n2 == 1:
            size = 1
        elif s in (0, n2 - 1):
            size = m + 1
        else:
            size = 2 * m + 1
        layers.append(b.linear([size] * n1))
    for s in range(n2 - 1):
        for v in range(n1):
            up = layers[s][v][-m:]
            down = layers[s + 1][v][1 : 1 + m]
            b.ins.append(BoostedFuse(up, down))
    return b.plan("cluster2d", {"n1": n1, "n2": n2, "m": m})


def compile_cluster_nd(dims: Sequence[int], m: int) -> GenerationPlan:
    """d-dimensional cluster: one stream per line along the first axis and a
    boosted fusion for every nearest-neighbour pair along the other axes."""
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1:
        raise PlanError("dims must be a nonempty list of positive counts")
    m = _check_m(m)
    n1, rest = dims[0], dims[1:]
    lines = list(itertools.product(*[range(n) for n in rest]))

    def partners(coord):
        out = []
        for ax, n in enumerate(rest):
            for step in (-1, 1):
                c = list(coord)
                c[ax] += step
                if 0 <= c[ax] < n:
                    out.append((ax, step))
        return out

    b = _Builder()
    alloc: dict[tuple, dict] = {}
    for line in lines:
        ps = partners(line)
        verts = b.linear([1 + m * len(ps)] * n1)
        for v, ids in enumerate(verts):
            slots = {}
            for k, key in enumerate(ps):
                slots[key] = ids[1 + k * m : 1 + (k + 1) * m]
            alloc[(v,) + line] = slots
    for line in lines:
        for ax, n in enumerate(rest):
            if line[ax] + 1 >= n:
                continue
            other = list(line)
            other[ax] += 1
            for v in range(n1):
                a = alloc[(v,) + line][(ax, 1)]
                bb = alloc[(v,) + tuple(other)][(ax, -1)]
                b.ins.append(BoostedFuse(a, bb))
    return b.plan("clusterNd", {"dims": dims, "m": m})


def compile_ring(k: int, m: int) -> GenerationPlan:
    """k-ring: linear sizes ``(1+m, 1, ..., 1, 1+m)`` closed by one boosted fusion."""
    k = int(k)
    if k < 3:
        raise PlanError("a ring needs k >= 3")
    m = _check_m(m)
    b = _Builder()
    verts = b.linear([1 + m] + [1] * (k - 2) + [1 + m])
    b.ins.append(BoostedFuse(verts[0][1:], verts[-1][1:]))
    return b.plan("ring", {"k": k, "m": m})


def compile_encoded_ring(k: int, n1: int, n2: int, m: int) -> GenerationPlan:
    """Parity-encoded k-ring.

    1-2. One stream: ring vertices with ``m+1`` photons (``2m+1`` at the two
         ends), closed by a boosted fusion.
    3.   k streams of three vertices ``(n2, (n1-1)m+1, n2)``.
    4.   ``k(n1-2)`` single-vertex streams of ``n2+m`` photons.
    5.   Each middle vertex is boosted-fused with its ``n1-2`` GHZ blocks.
    6.   Each middle vertex is boosted-fused with one ring vertex.
    7.   X measurement of the k ring survivors and the k middle survivors.
    """
    k, n1, n2 = int(k), int(n1), int(n2)
    if k < 3 or n1 < 2 or n2 < 1:
        raise PlanError("need k >= 3, n1 >= 2, n2 >= 1")
    m = _check_m(m)
    b = _Builder()
    ring = b.linear([2 * m + 1] + [m + 1] * (k - 2) + [2 * m + 1])
    mids = [b.linear([n2, (n1 - 1) * m + 1, n2])[1] for _ in range(k)]
    ghz = [[b.linear([n2 + m])[0] for _ in range(n1 - 2)] for _ in range(k)]
    # ring vertex photons: survivor, m for the code, then m for closure at the ends
    b.ins.append(BoostedFuse(ring[0][1 + m :], ring[-1][1 + m :]))
    for r in range(k):
        for g, block in enumerate(ghz[r]):
            b.ins.append(BoostedFuse(mids[r][1 + m * (g + 1) : 1 + m * (g + 2)], block[n2:]))
    for r in range(k):
        b.ins.append(BoostedFuse(mids[r][1 : 1 + m], ring[r][1 : 1 + m]))
    for r in range(k):
        b.ins.append(MeasureX(ring[r][0]))
    for r in range(k):
        b.ins.append(MeasureX(mids[r][0]))
    return b.plan("encoded-ring", {"k": k, "n1": n1, "n2": n2, "m": m})


def encoded_ring_audit(k: int, n1: int, n2: int, m: int) -> dict[str, int]:
    """Closed-form photon bookkeeping for :func:`compile_encoded_ring`."""
    ring = k * (m + 1) + 2 * m
    clusters = k * (2 * n2 + (n1 - 1) * m + 1)
    ghz = k * (n1 - 2) * (n2 + m)
    fusions = 1 + k * (n1 - 1)
    consumed = 2 * m * fusions
    measured = 2 * k
    total = ring + clusters + ghz
    remaining = total - consumed - measured
    if min(ring, clusters, ghz, remaining) < 0:
        raise PlanError("negative photon count in audit")
    return {
        "ring": ring,
        "clusters": clusters,
        "ghz": ghz,
        "total": total,
        "boosted_fusions": fusions,
        "fusion_photons": consumed,
        "step7_measured": measured,
        "remaining": remaining,
    }


# -- timing ----------------------------------------------------------------------------
@dataclass(frozen=True)
class TimeModel:
    T_emit: float = 1.0
    T_h: float = 0.0

    def __post_init__(self):
        if self.T_emit < 0 or self.T_h < 0 or math.isnan(self.T_emit) or math.isnan(self.T_h):
            raise PlanError("durations must be nonnegative")


def plan_duration(plan: GenerationPlan, t: TimeModel = TimeModel(), mode: str = "sequential") -> float:
    """Emission and emitter-Hadamard time: summed over streams for one
    emitter, maximum over streams for parallel emitters."""
    per: dict[int, float] = {}
    for ins in plan.instructions:
        if isinstance(ins, Emit):
            per[ins.stream] = per.get(ins.stream, 0.0) + t.T_emit
        elif isinstance(ins, HadamardEmitter):
            per[ins.stream] = per.get(ins.stream, 0.0) + t.T_h
    if mode == "sequential":
        return float(sum(per.values()))
    if mode == "parallel":
        return float(max(per.values(), default=0.0))
    raise PlanError(f"unknown scheduling mode {mode!r}")


# -- files ------------------------------------------------------------------------------
def write_plan(plan: GenerationPlan, path: str | Path) -> None:
    Path(path).write_text(plan.to_jsonl())


def read_plan(path: str | Path) -> GenerationPlan:
    return GenerationPlan.from_jsonl(Path(path).read_text())


def plans_from(instructions: Iterable, family: str = "custom", **params) -> GenerationPlan:
    return GenerationPlan(tuple(instructions), family, params)
