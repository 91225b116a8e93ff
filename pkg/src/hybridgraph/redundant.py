"""Redundantly-encoded graph states.

Each logical vertex is a repetition-code block (a GHZ state) of physical
qubits. Logical edges are CZ gates between one member of each block; by the
symmetry of the code any member will do. A :class:`RedundantGraph` also keeps
a frame per physical qubit, so it stands for ``(prod_q F_q) |RG>``.

Operations that the block structure handles directly (emission, pushing a
member out with a Hadamard) are implemented natively. Everything else runs on
the equivalent plain graph from :func:`to_physical` (every non-representative
member becomes a Hadamard-framed leaf of its representative) and is lifted
back with :func:`lift`, which keeps a block together whenever its members are
still leaves of the representative and splits it otherwise.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from . import clifford as cl
from . import graph as gc
from .clifford import Clifford
from .errors import GraphError, UnknownQubitError
from .graph import GraphState

__all__ = [
    "LogicalVertex",
    "RedundantGraph",
    "Block",
    "new_redundant",
    "init_emitter",
    "emit_photon",
    "hadamard_push",
    "hadamard_emitter",
    "measure_out_emitter",
    "measure",
    "z_measure_vertex_member",
    "apply_clifford",
    "forced_outcome",
    "to_physical",
    "from_physical",
    "physical_view",
    "lift",
]


@dataclass(frozen=True)
class LogicalVertex:
    id: int
    members: tuple[int, ...]
    emitter: int | None = None

    def __len__(self) -> int:
        return len(self.members)


class RedundantGraph:
    """Logical vertices (blocks of physical qubits), logical edges and frames."""

    __slots__ = ("_verts", "_edges", "_frames", "_owner", "_next_vid", "_retired", "_emitter")

    def __init__(
        self,
        blocks: Iterable[Sequence[int]] = (),
        edges: Iterable[tuple[int, int]] = (),
        frames: Mapping[int, Clifford | str] | None = None,
        emitter: int | None = None,
    ):
        """Build from a list of member lists; vertex ids are list positions and
        ``edges`` reference those positions."""
        verts = {}
        for vid, members in enumerate(blocks):
            members = tuple(int(q) for q in members)
            verts[vid] = LogicalVertex(vid, members, emitter if emitter in members else None)
        fr = {int(q): (cl.from_tag(f) if isinstance(f, str) else f) for q, f in (frames or {}).items()}
        self._init(verts, edges, fr, len(verts), frozenset(), emitter)

    def _init(self, verts, edges, frames, next_vid, retired, emitter):
        owner = {}
        for v in verts.values():
            if not v.members:
                raise GraphError(f"vertex {v.id} is empty")
            for q in v.members:
                if q in owner:
                    raise GraphError(f"qubit {q} is in two vertices")
                if q < 0:
                    raise GraphError("qubit ids are nonnegative")
                owner[q] = v.id
        es = set()
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop on vertex {a}")
            if a not in verts or b not in verts:
                raise UnknownQubitError(f"edge ({a}, {b}) references an unknown vertex")
            es.add((min(a, b), max(a, b)))
        for q in frames:
            if q not in owner:
                raise UnknownQubitError(f"frame for unknown qubit {q}")
        if emitter is not None and emitter not in owner:
            raise UnknownQubitError(f"emitter {emitter} is not a member of any vertex")
        self._verts = dict(verts)
        self._edges = frozenset(es)
        self._frames = {q: f for q, f in frames.items() if not f.is_identity}
        self._owner = owner
        self._next_vid = next_vid
        self._retired = frozenset(retired)
        self._emitter = emitter

    @classmethod
    def _make(cls, verts, edges, frames, next_vid, retired, emitter) -> RedundantGraph:
        rg = cls.__new__(cls)
        rg._init(verts, edges, frames, next_vid, retired, emitter)
        return rg

    def _evolve(self, **kw) -> RedundantGraph:
        args = dict(
            verts=self._verts,
            edges=self._edges,
            frames=self._frames,
            next_vid=self._next_vid,
            retired=self._retired,
            emitter=self._emitter,
        )
        args.update(kw)
        return RedundantGraph._make(**args)

    # -- read access -------------------------------------------------------
    @property
    def vertices(self) -> tuple[LogicalVertex, ...]:
        return tuple(self._verts[k] for k in sorted(self._verts))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self._edges))

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self._owner))

    @property
    def frames(self) -> dict[int, Clifford]:
        return {q: self._frames.get(q, cl.IDENTITY) for q in sorted(self._owner)}

    @property
    def emitter(self) -> int | None:
        return self._emitter

    @property
    def retired(self) -> frozenset[int]:
        return self._retired

    def frame(self, q: int) -> Clifford:
        self._check_qubit(q)
        return self._frames.get(q, cl.IDENTITY)

    def vertex(self, vid: int) -> LogicalVertex:
        try:
            return self._verts[vid]
        except KeyError:
            raise UnknownQubitError(f"unknown vertex {vid}") from None

    def vertex_of(self, q: int) -> LogicalVertex:
        self._check_qubit(q)
        return self._verts[self._owner[q]]

    def neighbors(self, vid: int) -> frozenset[int]:
        self.vertex(vid)
        return frozenset(b if a == vid else a for a, b in self._edges if vid in (a, b))

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vertices)

    def __contains__(self, q) -> bool:
        return q in self._owner

    def __len__(self) -> int:
        return len(self._owner)

    def _check_qubit(self, q: int) -> None:
        if q not in self._owner:
            raise UnknownQubitError(f"unknown qubit {q}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RedundantGraph):
            return NotImplemented
        return (
            self._verts == other._verts
            and self._edges == other._edges
            and self._frames == other._frames
            and self._emitter == other._emitter
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def structure(self) -> tuple[frozenset, frozenset]:
        """Blocks and logical edges with vertex ids replaced by member sets."""
        blocks = frozenset(frozenset(v.members) for v in self._verts.values())
        edges = frozenset(
            frozenset((frozenset(self._verts[a].members), frozenset(self._verts[b].members)))
            for a, b in self._edges
        )
        return blocks, edges

    def __repr__(self) -> str:
        vs = [list(v.members) for v in self.vertices]
        fr = {q: f.tag for q, f in sorted(self._frames.items())}
        return f"RedundantGraph(vertices={vs}, edges={list(self.edges)}, frames={fr}, emitter={self._emitter})"

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v.id, "members": list(v.members), "emitter": v.emitter is not None} for v in self.vertices
            ],
            "edges": [list(e) for e in self.edges],
            "frames": {str(q): f.tag for q, f in self.frames.items() if not f.is_identity},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Mapping) -> RedundantGraph:
        verts = {}
        emitter = None
        for item in d["vertices"]:
            members = tuple(int(q) for q in item["members"])
            em = None
            if item.get("emitter"):
                if emitter is not None:
                    raise GraphError("more than one emitter")
                em = emitter = members[0] if not isinstance(item["emitter"], int) or isinstance(
                    item["emitter"], bool
                ) else int(item["emitter"])
            verts[int(item["id"])] = LogicalVertex(int(item["id"]), members, em)
        frames = {int(q): cl.from_tag(t) for q, t in d.get("frames", {}).items()}
        nxt = max(verts, default=-1) + 1
        return cls._make(verts, [tuple(e) for e in d["edges"]], frames, nxt, frozenset(), emitter)

    @classmethod
    def from_json(cls, s: str) -> RedundantGraph:
        return cls.from_dict(json.loads(s))


# -- physical view -----------------------------------------------------------------
@dataclass(frozen=True)
class Block:
    """Intended grouping handed to :func:`lift`."""

    vid: int
    rep: int
    members: tuple[int, ...]


def physical_view(rg: RedundantGraph, reps: Mapping[int, int] | None = None) -> tuple[GraphState, list[Block]]:
    """Plain graph equivalent of ``rg`` and the block layout it came from.

    ``reps`` maps vertex id to the member used as representative (default:
    lowest id). Non-representative members become leaves of the
    representative carrying frame ``F * H``.
    """
    reps = dict(reps or {})
    blocks = []
    edges = []
    frames = {}
    rep_of = {}
    for v in rg.vertices:
        r = reps.get(v.id, min(v.members))
        if r not in v.members:
            raise GraphError(f"representative {r} is not a member of vertex {v.id}")
        rep_of[v.id] = r
        blocks.append(Block(v.id, r, v.members))
        for q in v.members:
            f = rg._frames.get(q, cl.IDENTITY)
            if q == r:
                frames[q] = f
            else:
                edges.append((r, q))
                frames[q] = f * cl.H
    for a, b in rg._edges:
        edges.append((rep_of[a], rep_of[b]))
    return GraphState(rg.qubits, edges, frames), blocks


def lift(g: GraphState, blocks: Sequence[Block], rg: RedundantGraph, emitter: int | None = None) -> RedundantGraph:
    """Re-encode a plain graph using the intended ``blocks``.

    A block keeps every surviving member that is a leaf of its
    representative; any other qubit becomes its own vertex. The result is an
    exact representation of the same state.
    """
    verts = {}
    frames = {}
    placed = set()
    next_vid = rg._next_vid
    singles = []
    for blk in blocks:
        alive = [q for q in blk.members if q in g]
        if not alive:
            continue
        cands = [blk.rep] if blk.rep in g else sorted(alive)
        best_rep, best_leaves = None, None
        for c in cands:
            leaves = [q for q in alive if q != c and g.neighbors(q) == frozenset((c,))]
            if best_leaves is None or len(leaves) > len(best_leaves):
                best_rep, best_leaves = c, leaves
        members = (best_rep,) + tuple(q for q in alive if q in best_leaves)
        members = tuple(sorted(members, key=lambda q: (q != best_rep, blk.members.index(q))))
        verts[blk.vid] = members
        placed.update(members)
        frames[best_rep] = g.frame(best_rep)
        for q in best_leaves:
            frames[q] = g.frame(q) * cl.H
        singles.extend(q for q in alive if q not in members)
    singles.extend(q for q in g.vertices if q not in placed and q not in singles)
    for q in sorted(singles):
        verts[next_vid] = (q,)
        frames[q] = g.frame(q)
        placed.add(q)
        next_vid += 1
    owner = {q: vid for vid, ms in verts.items() for q in ms}
    rep_of = {vid: ms[0] for vid, ms in verts.items()}
    edges = set()
    for a, b in g.edges:
        va, vb = owner[a], owner[b]
        if va == vb:
            continue
        if a != rep_of[va] or b != rep_of[vb]:
            raise RuntimeError("lift produced an edge on a non-representative member")
        edges.add((min(va, vb), max(va, vb)))
    if emitter is not None and emitter not in owner:
        emitter = None
    lv = {vid: LogicalVertex(vid, ms, emitter if emitter in ms else None) for vid, ms in verts.items()}
    retired = rg._retired | (frozenset(rg._owner) - frozenset(owner))
    return RedundantGraph._make(lv, edges, frames, next_vid, retired, emitter)


def to_physical(rg: RedundantGraph, reps: Mapping[int, int] | None = None) -> GraphState:
    """Plain graph state equal to ``rg``: each block becomes a star around its
    representative, with Hadamard frames on the leaves."""
    return physical_view(rg, reps)[0]


def from_physical(g: GraphState) -> RedundantGraph:
    """Trivial encoding: every physical qubit is its own logical vertex."""
    verts = {i: LogicalVertex(i, (q,)) for i, q in enumerate(g.vertices)}
    vid = {q: i for i, q in enumerate(g.vertices)}
    edges = [(vid[a], vid[b]) for a, b in g.edges]
    return RedundantGraph._make(verts, edges, g.frames, len(verts), g.retired, None)


# -- native operations ---------------------------------------------------------------
def new_redundant() -> RedundantGraph:
    return RedundantGraph()


def _fresh_id_check(rg: RedundantGraph, q: int) -> None:
    if q in rg._owner or q in rg._retired:
        raise GraphError(f"qubit id {q} already used")
    if q < 0:
        raise GraphError("qubit ids are nonnegative")


def init_emitter(rg: RedundantGraph, qid: int) -> RedundantGraph:
    """Add an emitter in ``|0>`` (a singleton vertex with a Hadamard frame)."""
    if rg._emitter is not None:
        raise GraphError("graph already holds an emitter")
    _fresh_id_check(rg, qid)
    verts = dict(rg._verts)
    vid = rg._next_vid
    verts[vid] = LogicalVertex(vid, (qid,), qid)
    frames = dict(rg._frames)
    frames[qid] = cl.H
    return rg._evolve(verts=verts, frames=frames, next_vid=vid + 1, emitter=qid)


def emit_photon(rg: RedundantGraph, new_id: int) -> RedundantGraph:
    """Emission acts as a CNOT from the emitter onto a fresh ``|0>`` photon,
    so the photon joins the emitter's vertex."""
    e = rg._emitter
    if e is None:
        raise GraphError("no emitter present")
    _fresh_id_check(rg, new_id)
    fe = rg.frame(e)
    sign, q = fe.conjugate_pauli("Z")
    if q != "Z":
        raise GraphError(f"emitter frame {fe.tag} does not preserve the computational basis")
    v = rg.vertex_of(e)
    verts = dict(rg._verts)
    verts[v.id] = LogicalVertex(v.id, v.members + (new_id,), e)
    frames = dict(rg._frames)
    frames[new_id] = cl.IDENTITY if fe.is_diagonal else cl.X
    return rg._evolve(verts=verts, frames=frames)


def _gather_diagonal(rg: RedundantGraph, q: int, frames: dict) -> None:
    """Move a diagonal frame off ``q`` onto another member of its block."""
    v = rg.vertex_of(q)
    f = frames.get(q, cl.IDENTITY)
    if f.is_identity or not f.is_diagonal:
        return
    other = min(m for m in v.members if m != q)
    frames[other] = frames.get(other, cl.IDENTITY) * f
    frames[q] = cl.IDENTITY


def hadamard_push(rg: RedundantGraph, q: int) -> RedundantGraph:
    """Hadamard on member ``q`` of a block with at least two members: ``q``
    leaves the block and becomes a new vertex joined to it by one edge."""
    v = rg.vertex_of(q)
    if len(v) < 2:
        raise GraphError(f"vertex {v.id} has a single member; push-out needs at least two")
    frames = dict(rg._frames)
    _gather_diagonal(rg, q, frames)
    frames[q] = cl.H * frames.get(q, cl.IDENTITY) * cl.H
    verts = dict(rg._verts)
    rest = tuple(m for m in v.members if m != q)
    em = rg._emitter
    verts[v.id] = LogicalVertex(v.id, rest, em if em in rest else None)
    nv = rg._next_vid
    verts[nv] = LogicalVertex(nv, (q,), em if em == q else None)
    edges = set(rg._edges)
    edges.add((v.id, nv))
    return rg._evolve(verts=verts, frames=frames, edges=edges, next_vid=nv + 1)


def hadamard_emitter(rg: RedundantGraph) -> RedundantGraph:
    """Hadamard on the emitter.

    A freshly initialised emitter (``|0>``, alone, no edges) is rotated to
    ``|+>`` and becomes the first vertex. Otherwise this is
    :func:`hadamard_push` on the emitter, which needs company in its vertex.
    """
    e = rg._emitter
    if e is None:
        raise GraphError("no emitter present")
    v = rg.vertex_of(e)
    if len(v) == 1:
        if rg.frame(e) == cl.H and not rg.neighbors(v.id):
            frames = dict(rg._frames)
            frames[e] = cl.IDENTITY
            return rg._evolve(frames=frames)
        raise GraphError("Hadamard on an emitter that is alone in its vertex (no emission since the last one)")
    return hadamard_push(rg, e)


def apply_clifford(rg: RedundantGraph, q: int, c: Clifford | str) -> RedundantGraph:
    """Physical single-qubit gate on ``q``; recorded in its frame."""
    c = cl.from_tag(c) if isinstance(c, str) else c
    rg._check_qubit(q)
    frames = dict(rg._frames)
    frames[q] = c * frames.get(q, cl.IDENTITY)
    return rg._evolve(frames=frames)


# -- measurements ----------------------------------------------------------------
def _measure_layout(rg: RedundantGraph, q: int, basis: str) -> dict[int, int]:
    v = rg.vertex_of(q)
    if len(v) == 1:
        return {}
    _, under = rg.frame(q).conjugate_pauli(basis)
    if under == "Z":
        return {v.id: q}
    return {v.id: min(m for m in v.members if m != q)}


def _special(rg: RedundantGraph, g: GraphState, q: int, blocks) -> int | None:
    ns = sorted(g.neighbors(q))
    if not ns:
        return None
    size = {b.rep: len(b.members) for b in blocks}
    singles = [n for n in ns if size.get(n, 1) == 1]
    return singles[0] if singles else ns[0]


def measure(
    rg: RedundantGraph, q: int, basis: str, outcome: int, special_neighbor: int | None = None
) -> RedundantGraph:
    """Measure physical qubit ``q`` in ``basis`` and drop it.

    For X-type measurements on a lone qubit, the special neighbour prefers
    single-member vertices so that neighbouring blocks stay intact.
    """
    basis = basis.upper()
    rg._check_qubit(q)
    g, blocks = physical_view(rg, _measure_layout(rg, q, basis))
    if special_neighbor is None:
        sign, under = g.frame(q).conjugate_pauli(basis)
        if under == "X":
            special_neighbor = _special(rg, g, q, blocks)
    g2 = gc.measure(g, q, basis, outcome, special_neighbor)
    blocks = [Block(b.vid, b.rep, tuple(m for m in b.members if m != q)) for b in blocks]
    emitter = None if rg._emitter == q else rg._emitter
    return lift(g2, blocks, rg, emitter)


def forced_outcome(rg: RedundantGraph, q: int, basis: str) -> int | None:
    g, _ = physical_view(rg, _measure_layout(rg, q, basis.upper()))
    return gc.forced_outcome(g, q, basis)


def z_measure_vertex_member(rg: RedundantGraph, q: int, outcome: int) -> RedundantGraph:
    """Z on one member collapses its whole block: the measured qubit goes and
    the other members, now in definite computational states, are removed too.
    Neighbouring vertices pick up Z frames for outcome 1."""
    members = [m for m in rg.vertex_of(q).members if m != q]
    out = measure(rg, q, "Z", outcome)
    for m in members:
        if m not in out:
            continue
        forced = forced_outcome(out, m, "Z")
        if forced is None or out.vertex_of(m).members != (m,) or out.neighbors(out.vertex_of(m).id):
            continue
        out = measure(out, m, "Z", forced)
    return out


def measure_out_emitter(rg: RedundantGraph, outcome: int) -> RedundantGraph:
    """X measurement that disconnects the emitter from the photons."""
    e = rg._emitter
    if e is None:
        raise GraphError("no emitter present")
    return measure(rg, e, "X", outcome)
