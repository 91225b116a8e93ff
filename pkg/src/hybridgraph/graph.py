"""Graph states with a local Clifford frame on every qubit.

A :class:`GraphState` ``g`` stands for the state ``(prod_v F_v) |G>`` where
``|G>`` is the usual graph state (``|+>`` on every vertex, ``CZ`` on every
edge) and ``F_v`` is the frame of vertex ``v``. All functions in this module
return new values and leave their inputs untouched; measurements and gates act
on the physical state, with frames rewritten so the representation stays
exact.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from functools import lru_cache

import numpy as np

from . import clifford as cl
from .clifford import Clifford
from .errors import GraphError, ImpossibleOutcomeError, UnknownQubitError

__all__ = [
    "GraphState",
    "new_graph",
    "from_edges",
    "add_qubit",
    "cz",
    "local_complement",
    "apply_clifford",
    "apply_pauli",
    "measure",
    "measure_x",
    "measure_y",
    "measure_z",
    "forced_outcome",
    "merge",
    "canonical_equal",
]

_SQRT_PLUS_IY = cl.from_matrix((np.eye(2) + 1j * cl.pauli_matrix("Y")) / np.sqrt(2))
_SQRT_MINUS_IY = _SQRT_PLUS_IY.inverse()


class GraphState:
    """Adjacency over qubit ids plus a frame per qubit.

    Construct with :func:`new_graph` or :func:`from_edges`. Ids of removed
    qubits are remembered and never handed out again by :func:`add_qubit`.
    """

    __slots__ = ("_adj", "_frames", "_retired", "_next")

    def __init__(
        self,
        vertices: Iterable[int] = (),
        edges: Iterable[tuple[int, int]] = (),
        frames: Mapping[int, Clifford | str] | None = None,
    ):
        adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise GraphError(f"self-loop on {a}")
            for q in (a, b):
                if q not in adj:
                    raise UnknownQubitError(f"edge references unknown qubit {q}")
            adj[a].add(b)
            adj[b].add(a)
        fr = {}
        for q, f in (frames or {}).items():
            if int(q) not in adj:
                raise UnknownQubitError(f"frame for unknown qubit {q}")
            f = cl.from_tag(f) if isinstance(f, str) else f
            if not f.is_identity:
                fr[int(q)] = f
        self._adj = {q: frozenset(n) for q, n in adj.items()}
        self._frames = fr
        self._retired: frozenset[int] = frozenset()
        self._next = max(adj, default=-1) + 1

    @classmethod
    def _make(cls, adj, frames, retired, nxt) -> GraphState:
        g = cls.__new__(cls)
        g._adj = adj
        g._frames = {q: f for q, f in frames.items() if not f.is_identity}
        g._retired = retired
        g._next = nxt
        return g

    # -- read access -------------------------------------------------------
    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self._adj))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((a, b) for a, ns in self._adj.items() for b in ns if a < b))

    @property
    def frames(self) -> dict[int, Clifford]:
        """Frame of every qubit, identity included."""
        return {q: self._frames.get(q, cl.IDENTITY) for q in sorted(self._adj)}

    @property
    def retired(self) -> frozenset[int]:
        return self._retired

    def frame(self, q: int) -> Clifford:
        self._check(q)
        return self._frames.get(q, cl.IDENTITY)

    def neighbors(self, q: int) -> frozenset[int]:
        self._check(q)
        return self._adj[q]

    def degree(self, q: int) -> int:
        return len(self.neighbors(q))

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._adj.get(a, ())

    def __contains__(self, q) -> bool:
        return q in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return self._adj == other._adj and self._frames == other._frames

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges, tuple(sorted((q, f.index) for q, f in self._frames.items()))))

    def __repr__(self) -> str:
        fr = {q: f.tag for q, f in sorted(self._frames.items())}
        return f"GraphState(vertices={list(self.vertices)}, edges={list(self.edges)}, frames={fr})"

    def _check(self, q: int) -> None:
        if q not in self._adj:
            raise UnknownQubitError(f"unknown qubit {q}")

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "frames": {str(q): f.tag for q, f in self.frames.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: Mapping) -> GraphState:
        frames = {int(q): t for q, t in d.get("frames", {}).items()}
        return cls(d["vertices"], [tuple(e) for e in d["edges"]], frames)

    @classmethod
    def from_json(cls, s: str) -> GraphState:
        return cls.from_dict(json.loads(s))


def new_graph(n: int) -> GraphState:
    """``n`` isolated qubits ``0..n-1`` in ``|+>``."""
    if n < 0:
        raise GraphError("qubit count must be nonnegative")
    return GraphState(range(n))


def from_edges(edges: Iterable[tuple[int, int]], vertices: Iterable[int] = ()) -> GraphState:
    edges = list(edges)
    vs = set(vertices) | {q for e in edges for q in e}
    return GraphState(sorted(vs), edges)


def add_qubit(g: GraphState, qid: int | None = None, frame: Clifford = cl.IDENTITY) -> tuple[GraphState, int]:
    """Add an isolated qubit in ``frame |+>``; returns the new graph and id."""
    if qid is None:
        qid = g._next
    if qid in g._adj or qid in g._retired:
        raise GraphError(f"qubit id {qid} already used")
    if qid < 0:
        raise GraphError("qubit ids are nonnegative")
    adj = dict(g._adj)
    adj[qid] = frozenset()
    frames = dict(g._frames)
    frames[qid] = frame
    return GraphState._make(adj, frames, g._retired, max(g._next, qid + 1)), qid


# -- mutable working copy ------------------------------------------------------
class _Work:
    """Scratch copy used inside one operation."""

    __slots__ = ("adj", "frames", "retired", "nxt")

    def __init__(self, g: GraphState):
        self.adj = {q: set(n) for q, n in g._adj.items()}
        self.frames = dict(g._frames)
        self.retired = set(g._retired)
        self.nxt = g._next

    def freeze(self) -> GraphState:
        adj = {q: frozenset(n) for q, n in self.adj.items()}
        return GraphState._make(adj, self.frames, frozenset(self.retired), self.nxt)

    def check(self, q: int) -> None:
        if q not in self.adj:
            raise UnknownQubitError(f"unknown qubit {q}")

    def frame(self, q: int) -> Clifford:
        return self.frames.get(q, cl.IDENTITY)

    def rmul(self, q: int, c: Clifford) -> None:
        """Frame of ``q`` becomes ``F_q * c`` (``c`` acts before the old frame)."""
        self.frames[q] = self.frame(q) * c

    def lmul(self, q: int, c: Clifford) -> None:
        self.frames[q] = c * self.frame(q)

    def toggle(self, a: int, b: int) -> None:
        if b in self.adj[a]:
            self.adj[a].discard(b)
            self.adj[b].discard(a)
        else:
            self.adj[a].add(b)
            self.adj[b].add(a)

    def remove(self, q: int) -> None:
        for n in self.adj.pop(q):
            self.adj[n].discard(q)
        self.frames.pop(q, None)
        self.retired.add(q)

    def complement(self, a: int) -> None:
        """Local complementation with the frame correction that keeps the state."""
        ns = sorted(self.adj[a])
        for i, u in enumerate(ns):
            for v in ns[i + 1 :]:
                self.toggle(u, v)
        self.rmul(a, cl.LC_X)
        for v in ns:
            self.rmul(v, cl.LC_Z)

    def complement_bare(self, a: int) -> None:
        ns = sorted(self.adj[a])
        for i, u in enumerate(ns):
            for v in ns[i + 1 :]:
                self.toggle(u, v)

    # underlying-graph Pauli measurement; frames of neighbours absorb byproducts
    def measure_bare(self, a: int, pauli: str, outcome: int, special: int | None) -> None:
        na = set(self.adj[a])
        if pauli == "Z":
            self.remove(a)
            if outcome:
                for b in na:
                    self.rmul(b, cl.Z)
        elif pauli == "Y":
            self.complement_bare(a)
            self.remove(a)
            u = cl.S if outcome == 0 else cl.SDG
            for b in na:
                self.rmul(b, u)
        elif pauli == "X":
            if not na:
                if outcome:
                    raise ImpossibleOutcomeError(f"X outcome on isolated qubit {a} is forced to 0")
                self.remove(a)
                return
            b0 = min(na) if special is None else special
            nb0 = set(self.adj[b0])
            self.complement_bare(b0)
            self.complement_bare(a)
            self.complement_bare(b0)
            self.remove(a)
            if outcome == 0:
                self.rmul(b0, _SQRT_PLUS_IY)
                for b in na - nb0 - {b0}:
                    self.rmul(b, cl.Z)
            else:
                self.rmul(b0, _SQRT_MINUS_IY)
                for b in nb0 - na - {a}:
                    self.rmul(b, cl.Z)
        else:
            raise GraphError(f"unknown Pauli {pauli!r}")

    def underlying(self, a: int, pauli: str, outcome: int) -> tuple[str, int]:
        sign, q = self.frame(a).conjugate_pauli(pauli)
        return q, outcome ^ (sign < 0)

    def measure(self, a: int, pauli: str, outcome: int, special: int | None = None) -> None:
        self.check(a)
        if outcome not in (0, 1):
            raise GraphError("outcome must be 0 or 1")
        q, s = self.underlying(a, pauli, outcome)
        if special is not None:
            if special not in self.adj[a]:
                raise GraphError(f"special neighbour {special} is not adjacent to {a}")
        self.measure_bare(a, q, s, special if q == "X" else None)

    def forced(self, a: int, pauli: str) -> int | None:
        q, s = self.underlying(a, pauli, 0)
        if q == "X" and not self.adj[a]:
            return s
        return None

    def apply_pauli(self, a: int, pauli: str) -> None:
        """Physical Pauli on ``a``; pushed onto the graph via its stabilizer."""
        _, q = self.frame(a).conjugate_pauli(pauli)
        if q in ("Z", "Y"):
            self.rmul(a, cl.Z)
        if q in ("X", "Y"):
            for b in self.adj[a]:
                self.rmul(b, cl.Z)

    def merge(self, a: int, b: int) -> None:
        """Kraus ``|0><00| + |1><11|`` on ``(a, b)``; ``a`` survives.

        Needs diagonal frames on both qubits.
        """
        fa, fb = self.frame(a), self.frame(b)
        if not (fa.is_diagonal and fb.is_diagonal):
            raise GraphError("merge needs diagonal frames on both qubits")
        adjacent = b in self.adj[a]
        na = self.adj[a] - {b}
        nb = self.adj[b] - {a}
        self.remove(b)
        for n in list(self.adj[a]):
            self.toggle(a, n)
        for n in na ^ nb:
            self.toggle(a, n)
        f = fa * fb
        if adjacent:
            f = f * cl.Z
        self.frames[a] = f

    def cz(self, a: int, b: int) -> None:
        if a == b:
            raise GraphError("cz needs two distinct qubits")
        self.check(a)
        self.check(b)
        if not (self.frame(a).is_diagonal and self.frame(b).is_diagonal):
            self._reduce_pair(a, b)
        fa, fb = self.frame(a), self.frame(b)
        if fa.is_diagonal and fb.is_diagonal:
            self.toggle(a, b)
            return
        e = int(b in self.adj[a])
        if not fa.is_diagonal and not fb.is_diagonal:
            e2, ia, ib = _pair_table(e, fa.index, fb.index)
            self.frames[a] = cl.CLIFFORDS[ia]
            self.frames[b] = cl.CLIFFORDS[ib]
        else:
            if fa.is_diagonal:
                a, b, fa, fb = b, a, fb, fa
            e2, ia, idg = _one_sided_table(e, fa.index)
            self.frames[a] = cl.CLIFFORDS[ia]
            self.frames[b] = fb * cl.CLIFFORDS[idg]
        if e2 != e:
            self.toggle(a, b)

    def _strip(self, v: int, avoid: int) -> None:
        others = self.adj[v] - {avoid}
        c = min(others)
        word = cl.shortest_word(self.frame(v).index, (cl.LC_X.index, cl.LC_Z.index))
        for g in word:
            self.complement(v if g == cl.LC_X.index else c)

    def _reduce_pair(self, a: int, b: int) -> None:
        for _ in range(4):
            if not self.frame(a).is_diagonal and self.adj[a] - {b}:
                self._strip(a, b)
            if not self.frame(b).is_diagonal and self.adj[b] - {a}:
                self._strip(b, a)
            ok_a = self.frame(a).is_diagonal or not (self.adj[a] - {b})
            ok_b = self.frame(b).is_diagonal or not (self.adj[b] - {a})
            if ok_a and ok_b:
                return
        raise RuntimeError("frame reduction did not terminate")


# -- frame/CZ commutation tables (computed by brute force on small registers) ---
def _dense(n: int, edges, frames: Mapping[int, Clifford]) -> np.ndarray:
    psi = np.ones(2**n, dtype=complex) / np.sqrt(2**n)
    idx = np.arange(2**n)
    bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
    for u, v in edges:
        psi = psi * np.where(bits[u] & bits[v], -1, 1)
    t = psi.reshape((2,) * n)
    for q, f in frames.items():
        t = np.moveaxis(np.tensordot(f.matrix, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def _cz_dense(n: int, a: int, b: int, psi: np.ndarray) -> np.ndarray:
    idx = np.arange(2**n)
    ba = (idx >> (n - 1 - a)) & 1
    bb = (idx >> (n - 1 - b)) & 1
    return psi * np.where(ba & bb, -1, 1)


def _same_ray(u: np.ndarray, v: np.ndarray) -> bool:
    return abs(abs(np.vdot(u, v)) - 1) < 1e-9


@lru_cache(maxsize=None)
def _pair_table(e: int, ia: int, ib: int) -> tuple[int, int, int]:
    """Isolated pair ``a=0, b=1``: CZ after frames, re-expressed as frames after CZ^e'."""
    ca, cb = cl.CLIFFORDS[ia], cl.CLIFFORDS[ib]
    edges = [(0, 1)] if e else []
    target = _cz_dense(2, 0, 1, _dense(2, edges, {0: ca, 1: cb}))
    for e2 in (e, 1 - e):
        for fa in cl.CLIFFORDS:
            for fb in cl.CLIFFORDS:
                cand = _dense(2, [(0, 1)] if e2 else [], {0: fa, 1: fb})
                if _same_ray(cand, target):
                    return e2, fa.index, fb.index
    raise RuntimeError("no pair-table entry")


@lru_cache(maxsize=None)
def _one_sided_table(e: int, ia: int) -> tuple[int, int, int]:
    """``a=0`` has frame ``ia`` and no neighbour but ``b=1``; ``b`` is tied to a
    reference qubit ``r=2`` so the identity is checked as an operator on ``b``."""
    ca = cl.CLIFFORDS[ia]
    base = [(1, 2)]
    edges = base + ([(0, 1)] if e else [])
    target = _cz_dense(3, 0, 1, _dense(3, edges, {0: ca}))
    diag = [c for c in cl.CLIFFORDS if c.is_diagonal]
    for e2 in (e, 1 - e):
        for fa in cl.CLIFFORDS:
            for d in diag:
                cand = _dense(3, base + ([(0, 1)] if e2 else []), {0: fa, 1: d})
                if _same_ray(cand, target):
                    return e2, fa.index, d.index
    raise RuntimeError("no one-sided table entry")


# -- public operations ----------------------------------------------------------
def cz(g: GraphState, a: int, b: int) -> GraphState:
    """Apply a physical CZ between ``a`` and ``b``.

    With diagonal frames on both qubits this toggles the edge. Otherwise the
    frames are first stripped by local complementations, and the leftover
    cases go through precomputed two- and three-qubit commutation tables.
    """
    w = _Work(g)
    w.cz(a, b)
    return w.freeze()


def local_complement(g: GraphState, a: int) -> GraphState:
    """Complement the neighbourhood of ``a``; frames absorb the local Clifford
    so the represented state is unchanged."""
    w = _Work(g)
    w.check(a)
    w.complement(a)
    return w.freeze()


def apply_clifford(g: GraphState, a: int, c: Clifford | str) -> GraphState:
    """Apply a single-qubit Clifford gate to the physical qubit ``a``."""
    c = cl.from_tag(c) if isinstance(c, str) else c
    w = _Work(g)
    w.check(a)
    w.lmul(a, c)
    return w.freeze()


def apply_pauli(g: GraphState, a: int, pauli: str) -> GraphState:
    """Apply a Pauli gate, moving it into frames as a stabilizer equivalent."""
    w = _Work(g)
    w.check(a)
    w.apply_pauli(a, pauli)
    return w.freeze()


def forced_outcome(g: GraphState, a: int, basis: str) -> int | None:
    """Outcome of measuring ``basis`` on ``a`` if it is deterministic, else None."""
    w = _Work(g)
    w.check(a)
    return w.forced(a, basis.upper())


def measure(
    g: GraphState, a: int, basis: str, outcome: int, special_neighbor: int | None = None
) -> GraphState:
    """Project qubit ``a`` onto the ``(-1)**outcome`` eigenspace of ``basis``
    and drop it from the register.

    Raises :class:`ImpossibleOutcomeError` if the outcome is deterministic and
    differs from ``outcome``. ``special_neighbor`` only matters when the
    measurement reaches the underlying graph as an X measurement; it defaults
    to the lowest-id neighbour.
    """
    w = _Work(g)
    w.measure(a, basis.upper(), int(outcome), special_neighbor)
    return w.freeze()


def measure_z(g: GraphState, a: int, outcome: int) -> GraphState:
    return measure(g, a, "Z", outcome)


def measure_y(g: GraphState, a: int, outcome: int) -> GraphState:
    return measure(g, a, "Y", outcome)


def measure_x(g: GraphState, a: int, outcome: int, special_neighbor: int | None = None) -> GraphState:
    return measure(g, a, "X", outcome, special_neighbor)


def merge(g: GraphState, a: int, b: int) -> GraphState:
    """Type-I fusion Kraus ``|0><00| + |1><11|``: ``b`` is absorbed into ``a``.

    ``a`` inherits the symmetric difference of both neighbourhoods. Both
    frames must be diagonal; see :func:`hybridgraph.fusion.fuse_type1` for
    the general case.
    """
    if a == b:
        raise GraphError("cannot merge a qubit with itself")
    w = _Work(g)
    w.check(a)
    w.check(b)
    w.merge(a, b)
    return w.freeze()


def canonical_equal(g1: GraphState, g2: GraphState, up_to_frames: bool = False) -> bool:
    if g1.vertices != g2.vertices or g1.edges != g2.edges:
        return False
    return up_to_frames or g1._frames == g2._frames
