from __future__ import annotations

import itertools

import numpy as np
import pytest

from hybridgraph import clifford as cl


def _eq_phase(a, b):
    k = np.argmax(np.abs(b))
    idx = np.unravel_index(k, b.shape)
    ph = a[idx] / b[idx]
    return abs(abs(ph) - 1) < 1e-9 and np.allclose(a, ph * b)


def test_group_has_24_elements_closed_under_product():
    assert len(cl.CLIFFORDS) == 24
    for a, b in itertools.product(cl.CLIFFORDS, repeat=2):
        assert _eq_phase((a * b).matrix, a.matrix @ b.matrix)


def test_inverse():
    for c in cl.CLIFFORDS:
        assert (c * c.inverse()).is_identity


@pytest.mark.parametrize("p", ["X", "Y", "Z"])
def test_conjugation_tables_match_matrices(p):
    P = cl.pauli_matrix(p)
    for c in cl.CLIFFORDS:
        sign, q = c.conjugate_pauli(p)
        assert np.allclose(c.matrix.conj().T @ P @ c.matrix, sign * cl.pauli_matrix(q))
        sign, q = c.image_pauli(p)
        assert np.allclose(c.matrix @ P @ c.matrix.conj().T, sign * cl.pauli_matrix(q))


def test_diagonal_frames_are_phase_gates():
    diag = {c.tag for c in cl.CLIFFORDS if c.is_diagonal}
    assert len(diag) == 4
    assert {cl.IDENTITY.tag, cl.Z.tag, cl.S.tag, cl.SDG.tag} == diag


def test_local_complement_generators():
    assert _eq_phase(cl.LC_X.matrix @ cl.LC_X.matrix, cl.X.matrix)
    assert _eq_phase(cl.LC_Z.matrix @ cl.LC_Z.matrix, cl.Z.matrix)
    assert cl.SQRT_X * cl.SQRT_X == cl.X


def test_tags_round_trip():
    for c in cl.CLIFFORDS:
        assert cl.from_tag(c.tag) is c
        assert cl.from_matrix(c.matrix * np.exp(0.3j)) is c
    with pytest.raises(Exception):
        cl.from_tag("nope")


def test_shortest_word_strips_to_diagonal():
    gens = (cl.LC_X.index, cl.LC_Z.index)
    for c in cl.CLIFFORDS:
        acc = c
        for w in cl.shortest_word(c.index, gens):
            acc = acc * cl.CLIFFORDS[w]
        assert acc.is_diagonal
    assert cl.shortest_word(cl.S.index, gens) == ()
