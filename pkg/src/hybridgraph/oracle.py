"""Brute-force statevector oracle.

Every rewrite rule in the package is checked against this module. States are
dense tensors over a register of qubit ids kept in ascending order; measuring
or fusing a qubit contracts it out of the register.
"""

from __future__ import annotations

import json

import numpy as np

from . import clifford as cl
from .errors import GraphError, ImpossibleOutcomeError

__all__ = [
    "N_MAX",
    "DenseState",
    "build_graph_state",
    "build_redundant_state",
    "apply_emission",
    "apply_unitary",
    "apply_cz",
    "apply_kraus",
    "equal_up_to_phase",
]

N_MAX = 12

_KET0 = np.array([1, 0], dtype=complex)
_KET1 = np.array([0, 1], dtype=complex)
_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)
_MINUS_I = np.array([1, -1j], dtype=complex) / np.sqrt(2)
_EIGEN = {
    "Z": (_KET0, _KET1),
    "X": (_PLUS, _MINUS),
    "Y": (_PLUS_I, _MINUS_I),
}


class DenseState:
    """Amplitude tensor of shape ``(2,) * n`` over sorted qubit ids."""

    __slots__ = ("qubits", "tensor")

    def __init__(self, qubits, tensor: np.ndarray):
        self.qubits = tuple(qubits)
        if list(self.qubits) != sorted(set(self.qubits)):
            raise GraphError("qubit ids must be sorted and distinct")
        self.tensor = np.asarray(tensor, dtype=complex).reshape((2,) * len(self.qubits))

    @property
    def n(self) -> int:
        return len(self.qubits)

    @property
    def vector(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def axis(self, q: int) -> int:
        try:
            return self.qubits.index(q)
        except ValueError:
            raise GraphError(f"qubit {q} not in register {self.qubits}") from None

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalized(self) -> DenseState:
        nrm = self.norm()
        if nrm < 1e-12:
            raise ImpossibleOutcomeError("zero-norm state")
        return DenseState(self.qubits, self.tensor / nrm)

    def to_json(self) -> str:
        """Amplitude dump for debugging."""
        return json.dumps(
            {
                "qubits": list(self.qubits),
                "re": [float(x) for x in self.vector.real],
                "im": [float(x) for x in self.vector.imag],
            }
        )

    def __repr__(self) -> str:
        return f"DenseState(qubits={self.qubits})"


def _check_size(n: int, n_max: int) -> None:
    if n > n_max:
        raise GraphError(f"{n} qubits exceed the oracle limit of {n_max}")


def _apply_1q(t: np.ndarray, ax: int, u: np.ndarray) -> np.ndarray:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)


def _cz_tensor(t: np.ndarray, a: int, b: int) -> np.ndarray:
    t = t.copy()
    idx = [slice(None)] * t.ndim
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return t


def build_graph_state(g, n_max: int = N_MAX) -> DenseState:
    """``|+>`` on every vertex, CZ per edge, then each frame unitary."""
    qs = g.vertices
    _check_size(len(qs), n_max)
    if not qs:
        return DenseState((), np.ones(1, dtype=complex))
    pos = {q: i for i, q in enumerate(qs)}
    t = np.ones((2,) * len(qs), dtype=complex) / np.sqrt(2 ** len(qs))
    for a, b in g.edges:
        t = _cz_tensor(t, pos[a], pos[b])
    for q, f in g.frames.items():
        if not f.is_identity:
            t = _apply_1q(t, pos[q], f.matrix)
    return DenseState(qs, t)


def build_redundant_state(rg, n_max: int = N_MAX) -> DenseState:
    """Product of GHZ blocks (one per logical vertex), CZ between the first
    members of adjacent blocks, then each stored frame."""
    qs = tuple(sorted(rg.qubits))
    _check_size(len(qs), n_max)
    if not qs:
        return DenseState((), np.ones(1, dtype=complex))
    pos = {q: i for i, q in enumerate(qs)}
    n = len(qs)
    t = np.zeros((2,) * n, dtype=complex)
    verts = rg.vertices
    # amplitude is nonzero only where every block is all-0 or all-1
    for logical in range(2 ** len(verts)):
        idx = [0] * n
        for k, v in enumerate(verts):
            bit = (logical >> k) & 1
            for q in v.members:
                idx[pos[q]] = bit
        t[tuple(idx)] = 1.0
    t /= np.sqrt(2 ** len(verts))
    rep = {v.id: v.members[0] for v in verts}
    for a, b in rg.edges:
        t = _cz_tensor(t, pos[rep[a]], pos[rep[b]])
    for q, f in rg.frames.items():
        if not f.is_identity:
            t = _apply_1q(t, pos[q], f.matrix)
    return DenseState(qs, t)


def apply_unitary(s: DenseState, q: int, u) -> DenseState:
    """Single-qubit gate; ``u`` is a matrix, a :class:`Clifford` or a tag."""
    if isinstance(u, str):
        u = cl.from_tag(u)
    if isinstance(u, cl.Clifford):
        u = u.matrix
    return DenseState(s.qubits, _apply_1q(s.tensor, s.axis(q), np.asarray(u)))


def apply_cz(s: DenseState, a: int, b: int) -> DenseState:
    return DenseState(s.qubits, _cz_tensor(s.tensor, s.axis(a), s.axis(b)))


def _insert(s: DenseState, q: int, ket: np.ndarray) -> DenseState:
    if q in s.qubits:
        raise GraphError(f"qubit {q} already in register")
    qs = tuple(sorted(s.qubits + (q,)))
    t = np.multiply.outer(s.tensor, ket)
    t = np.moveaxis(t, -1, qs.index(q))
    return DenseState(qs, t)


def apply_emission(s: DenseState, emitter: int, new: int, n_max: int = N_MAX) -> DenseState:
    """Isometry ``|0><0| (x) |0>_new + |1><1| (x) |1>_new`` on the emitter."""
    _check_size(s.n + 1, n_max)
    out = _insert(s, new, _KET0)
    ae, an = out.axis(emitter), out.axis(new)
    t = out.tensor.copy()
    src = [slice(None)] * t.ndim
    src[ae], src[an] = 1, 0
    dst = [slice(None)] * t.ndim
    dst[ae], dst[an] = 1, 1
    t[tuple(dst)] = t[tuple(src)]
    t[tuple(src)] = 0
    return DenseState(out.qubits, t)


def _project(s: DenseState, targets, bra: np.ndarray) -> DenseState:
    """Contract ``bra`` (shape ``(2,)*k``, already conjugated) on ``targets``."""
    axes = [s.axis(q) for q in targets]
    t = np.tensordot(bra, s.tensor, axes=(list(range(len(axes))), axes))
    rest = tuple(q for q in s.qubits if q not in targets)
    return DenseState(rest, t)


def _bell(i: int, j: int) -> np.ndarray:
    v = np.zeros((2, 2), dtype=complex)
    v[0, i] = 1
    v[1, 1 - i] = (-1) ** j
    return v / np.sqrt(2)


def _cluster_pair(i: int, j: int) -> np.ndarray:
    xi = _EIGEN["X"][i]
    xo = _EIGEN["X"][1 - i]
    return (np.outer(_KET0, xi) + (-1) ** j * np.outer(_KET1, xo)) / np.sqrt(2)


def _finish(raw: DenseState) -> tuple[DenseState, float]:
    p = raw.norm() ** 2
    if p < 1e-12:
        raise ImpossibleOutcomeError("requested branch has zero probability")
    return raw.normalized(), float(p)


def apply_kraus(s: DenseState, which: str, targets, outcome=0, tag: str | None = None):
    """Apply one branch of a measurement or a gate.

    ``which`` is one of ``"G_I"`` (type-I fusion, first target survives),
    ``"G_II"`` (type-I fusion then Y on the survivor), ``"BELL"``, ``"XZ"``
    (two-qubit projections, both targets removed), ``"P_X"``, ``"P_Y"``,
    ``"P_Z"`` (single-qubit projections, target removed), ``"H"``, ``"CZ"``
    and ``"CLIFFORD"`` (with ``tag``). Two-bit outcomes are passed as a
    tuple ``(i, j)``.

    Returns the normalised post-branch state and the branch probability
    (squared norm of the unnormalised branch).
    """
    targets = tuple(targets)
    if which in ("P_X", "P_Y", "P_Z"):
        (q,) = targets
        ket = _EIGEN[which[-1]][int(outcome)]
        return _finish(_project(s, (q,), ket.conj()))
    if which == "G_I":
        a, b = targets
        i = int(outcome)
        t = s.tensor
        ax_a, ax_b = s.axis(a), s.axis(b)
        diag = np.diagonal(t, axis1=ax_a, axis2=ax_b)  # new last axis = merged
        if i:
            diag = diag * np.array([1, -1])
        rest = [q for q in s.qubits if q != b]
        merged = np.moveaxis(diag, -1, rest.index(a))
        return _finish(DenseState(tuple(rest), merged))
    if which == "G_II":
        a, b = targets
        i, j = outcome
        mid, p1 = apply_kraus(s, "G_I", (a, b), i)
        fin, p2 = apply_kraus(mid, "P_Y", (a,), j)
        return fin, p1 * p2
    if which == "BELL":
        i, j = outcome
        return _finish(_project(s, targets, _bell(i, j).conj()))
    if which == "XZ":
        i, j = outcome
        return _finish(_project(s, targets, _cluster_pair(i, j).conj()))
    if which == "H":
        (q,) = targets
        return apply_unitary(s, q, cl.H), 1.0
    if which == "CLIFFORD":
        (q,) = targets
        return apply_unitary(s, q, cl.from_tag(tag)), 1.0
    if which == "CZ":
        a, b = targets
        return apply_cz(s, a, b), 1.0
    raise GraphError(f"unknown operator {which!r}")


def equal_up_to_phase(s1: DenseState, s2: DenseState, tol: float = 1e-8) -> bool:
    """True iff ``s1 = e^{i phi} s2`` entrywise within ``tol`` (after normalising)."""
    if s1.qubits != s2.qubits:
        raise GraphError(f"registers differ: {s1.qubits} vs {s2.qubits}")
    u = s1.vector / np.linalg.norm(s1.vector)
    v = s2.vector / np.linalg.norm(s2.vector)
    ov = np.vdot(v, u)
    if abs(ov) < 1e-12:
        return False
    phase = ov / abs(ov)
    return bool(np.max(np.abs(u - phase * v)) <= tol)
