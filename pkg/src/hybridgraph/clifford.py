"""The 24-element single-qubit Clifford group, modulo global phase.

Elements are interned :class:`Clifford` objects built once at import time.
Each carries a 2x2 unitary with a canonical phase, an integer index into the
multiplication table and a readable tag such as ``"Z.S"`` or ``"Y.HSH"``.

A tag is the product ``P.B`` of a Pauli ``P`` and a coset representative
``B`` in ``{H, S, HS, SH, HSH}``; the product is a matrix product, so ``B``
acts first.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

__all__ = [
    "Clifford",
    "CLIFFORDS",
    "IDENTITY",
    "H",
    "S",
    "SDG",
    "X",
    "Y",
    "Z",
    "SQRT_X",
    "SQRT_X_DG",
    "LC_X",
    "LC_Z",
    "from_tag",
    "from_matrix",
    "pauli_matrix",
]

_SQ2 = 1 / np.sqrt(2)
_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}
_COSETS = ("I", "H", "S", "HS", "SH", "HSH")
_PAULIS = ("I", "X", "Y", "Z")


def pauli_matrix(p: str) -> np.ndarray:
    """Return the 2x2 matrix of the Pauli ``"I"``, ``"X"``, ``"Y"`` or ``"Z"``."""
    return _MATS[p].copy()


def _word(letters: str) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    for c in letters:
        out = out @ _MATS[c]
    return out


def _canonical(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-9))
    phase = flat[k] / abs(flat[k])
    return m / phase


def _key(m: np.ndarray) -> tuple:
    c = _canonical(m)
    return tuple(np.round(c.real, 6).ravel()) + tuple(np.round(c.imag, 6).ravel())


class Clifford:
    """One element of the single-qubit Clifford group (global phase ignored).

    Instances are interned; compare with ``==`` or ``is``. Multiplication
    ``a * b`` is the matrix product, i.e. ``b`` is applied first.
    """

    __slots__ = ("index", "tag", "matrix")

    def __init__(self, index: int, tag: str, matrix: np.ndarray):
        self.index = index
        self.tag = tag
        self.matrix = matrix
        self.matrix.setflags(write=False)

    def __mul__(self, other: Clifford) -> Clifford:
        return CLIFFORDS[_MUL[self.index][other.index]]

    def inverse(self) -> Clifford:
        return CLIFFORDS[_INV[self.index]]

    @property
    def is_diagonal(self) -> bool:
        """True for I, Z, S and S^dagger: the frames that commute with CZ."""
        return self.index in _DIAGONAL

    @property
    def is_identity(self) -> bool:
        return self.index == 0

    def conjugate_pauli(self, p: str) -> tuple[int, str]:
        """Return ``(sign, q)`` with ``C^dagger p C = sign * q``."""
        return _CONJ[self.index][p]

    def image_pauli(self, p: str) -> tuple[int, str]:
        """Return ``(sign, q)`` with ``C p C^dagger = sign * q``."""
        return _IMAGE[self.index][p]

    def __repr__(self) -> str:
        return f"Clifford({self.tag!r})"

    def __reduce__(self):
        return (from_tag, (self.tag,))


def _build():
    elems: dict[tuple, tuple[str, np.ndarray]] = {}
    for p, b in itertools.product(_PAULIS, _COSETS):
        m = _canonical(_MATS[p] @ _word("" if b == "I" else b))
        tag = ".".join(x for x in (p, b) if x != "I") or "I"
        elems.setdefault(_key(m), (tag, m))
    if len(elems) != 24:
        raise RuntimeError("clifford table construction failed")
    ordered = sorted(elems.values(), key=lambda t: (t[0] != "I", len(t[0]), t[0]))
    group = [Clifford(i, tag, m) for i, (tag, m) in enumerate(ordered)]
    lookup = {_key(c.matrix): c.index for c in group}
    mul = [[lookup[_key(a.matrix @ b.matrix)] for b in group] for a in group]
    inv = [lookup[_key(a.matrix.conj().T)] for a in group]
    conj, image = [], []
    for c in group:
        cj, im = {}, {}
        for p in "XYZ":
            pm = _MATS[p]
            cj[p] = _as_pauli(c.matrix.conj().T @ pm @ c.matrix)
            im[p] = _as_pauli(c.matrix @ pm @ c.matrix.conj().T)
        cj["I"] = im["I"] = (1, "I")
        conj.append(cj)
        image.append(im)
    return group, lookup, mul, inv, conj, image


def _as_pauli(m: np.ndarray) -> tuple[int, str]:
    for q in "XYZ":
        for sign in (1, -1):
            if np.allclose(m, sign * _MATS[q], atol=1e-9):
                return sign, q
    raise RuntimeError("not a signed Pauli")


CLIFFORDS, _LOOKUP, _MUL, _INV, _CONJ, _IMAGE = _build()
_BY_TAG = {c.tag: c for c in CLIFFORDS}


def from_matrix(m: np.ndarray) -> Clifford:
    """Identify a 2x2 unitary (up to phase) as a group element."""
    try:
        return CLIFFORDS[_LOOKUP[_key(np.asarray(m, dtype=complex))]]
    except KeyError:
        raise ValueError("matrix is not a single-qubit Clifford") from None


IDENTITY = _BY_TAG["I"]
H = _BY_TAG["H"]
S = _BY_TAG["S"]
X = _BY_TAG["X"]
Y = _BY_TAG["Y"]
Z = _BY_TAG["Z"]
SDG = from_matrix(_MATS["S"].conj().T)
SQRT_X = from_matrix(_MATS["H"] @ _MATS["S"] @ _MATS["H"])
SQRT_X_DG = SQRT_X.inverse()
# exp(+i pi/4 X) and exp(-i pi/4 Z): the factors a local complementation
# leaves on the pivot and on each of its neighbours.
LC_X = from_matrix(np.cos(np.pi / 4) * _MATS["I"] + 1j * np.sin(np.pi / 4) * _MATS["X"])
LC_Z = from_matrix(np.cos(np.pi / 4) * _MATS["I"] - 1j * np.sin(np.pi / 4) * _MATS["Z"])

_DIAGONAL = frozenset(c.index for c in CLIFFORDS if abs(c.matrix[0, 1]) < 1e-9)

_ALIASES = {
    "id": IDENTITY,
    "i": IDENTITY,
    "sdg": SDG,
    "sdag": SDG,
    "sqrtx": SQRT_X,
    "sqrtxdg": SQRT_X_DG,
}


def from_tag(tag: str) -> Clifford:
    """Parse a frame tag; accepts canonical tags and a few common aliases."""
    if tag in _BY_TAG:
        return _BY_TAG[tag]
    alias = _ALIASES.get(tag.lower())
    if alias is not None:
        return alias
    letters = tag.replace(".", "").replace("*", "")
    if letters and set(letters) <= set("IXYZHS"):
        return from_matrix(_word(letters))
    raise ValueError(f"unknown Clifford tag {tag!r}")


@lru_cache(maxsize=None)
def shortest_word(target: int, generators: tuple[int, ...]) -> tuple[int, ...]:
    """Shortest sequence ``g1, g2, ...`` of generator indices with
    ``CLIFFORDS[target] * g1 * g2 * ...`` diagonal. Used to strip frames."""
    start = target
    if start in _DIAGONAL:
        return ()
    seen = {start: ()}
    frontier = [start]
    while frontier:
        nxt = []
        for cur in frontier:
            for g in generators:
                el = _MUL[cur][g]
                if el in seen:
                    continue
                seen[el] = seen[cur] + (g,)
                if el in _DIAGONAL:
                    return seen[el]
                nxt.append(el)
        frontier = nxt
    raise RuntimeError("generators do not reach a diagonal element")
