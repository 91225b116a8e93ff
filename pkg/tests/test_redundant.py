from __future__ import annotations

import numpy as np
import pytest
from conftest import same_state

from hybridgraph import clifford as cl
from hybridgraph import graph as gc
from hybridgraph import oracle as orc
from hybridgraph import redundant as rd
from hybridgraph.errors import GraphError, UnknownQubitError
from hybridgraph.redundant import RedundantGraph
from hybridgraph.verify import run_suite

E = 50


def fresh():
    return rd.hadamard_emitter(rd.init_emitter(rd.new_redundant(), E))


def grow(rg, ids):
    for q in ids:
        rg = rd.emit_photon(rg, q)
    return rg


def test_first_emission_makes_pair():
    rg = rd.emit_photon(fresh(), 0)
    assert rg.vertex_of(E).members == (E, 0)
    assert same_state(rg, RedundantGraph([[E, 0]]))


def test_emission_grows_ghz_vertex():
    rg = grow(fresh(), [0, 1, 2])
    assert len(rg.vertex_of(E)) == 4
    assert same_state(rg, RedundantGraph([[E, 0, 1, 2]]))


def test_emission_into_second_vertex_keeps_edges():
    rg = rd.hadamard_emitter(grow(fresh(), [0, 1]))
    rg = rd.emit_photon(rg, 2)
    before = set(rg.edges)
    after = rd.emit_photon(rg, 3)
    assert set(after.edges) == before
    assert len(after.vertex_of(E)) == len(rg.vertex_of(E)) + 1


def test_push_out_ghz_to_star():
    rg = RedundantGraph([[0, 1, 2]])
    star = rd.hadamard_push(rd.hadamard_push(rg, 1), 2)
    members = sorted(v.members for v in star.vertices)
    assert members == [(0,), (1,), (2,)]
    centre = star.vertex_of(0).id
    assert star.neighbors(centre) == {star.vertex_of(1).id, star.vertex_of(2).id}
    want = orc.apply_unitary(orc.apply_unitary(orc.build_redundant_state(rg), 1, cl.H), 2, cl.H)
    assert same_state(star, want)


def test_single_push_extends_path():
    rg = RedundantGraph([[0, 1], [2]], [(0, 1)])
    out = rd.hadamard_push(rg, 1)
    a, b, c = out.vertex_of(1).id, out.vertex_of(0).id, out.vertex_of(2).id
    assert {tuple(sorted(e)) for e in out.edges} == {tuple(sorted((a, b))), tuple(sorted((b, c)))}


def test_dangling_layer():
    rg = RedundantGraph([[0, 1, 2], [3, 4, 5]], [(0, 1)])
    for q in (1, 2, 4, 5):
        rg = rd.hadamard_push(rg, q)
    g = rd.to_physical(rg)
    assert sorted(g.degree(q) for q in g.vertices) == [1, 1, 1, 1, 3, 3]


def test_push_on_singleton_rejected():
    with pytest.raises(GraphError):
        rd.hadamard_push(RedundantGraph([[0]]), 0)


def test_hadamard_emitter_rules():
    rg = rd.init_emitter(rd.new_redundant(), E)
    plus = rd.hadamard_emitter(rg)
    assert plus.frame(E).is_identity
    assert same_state(plus, orc.DenseState((E,), np.array([1, 1]) / np.sqrt(2)))
    moved = rd.hadamard_emitter(rd.emit_photon(plus, 0))
    assert moved.vertex_of(E).members == (E,)
    assert moved.vertex_of(0).id in moved.neighbors(moved.vertex_of(E).id)
    with pytest.raises(GraphError):
        rd.hadamard_emitter(moved)


def test_measure_out_emitter_cases():
    rg = grow(fresh(), [0, 1, 2])
    out = rd.measure_out_emitter(rg, 0)
    assert sorted(out.qubits) == [0, 1, 2] and out.emitter is None
    assert same_state(out, RedundantGraph([[0, 1, 2]]))
    empty = rd.measure_out_emitter(fresh(), 0)
    assert len(empty.qubits) == 0


def test_to_physical_examples():
    g = rd.to_physical(RedundantGraph([[0, 1, 2]]))
    assert sorted(g.edges) == [(0, 1), (0, 2)]
    chain = RedundantGraph([[0], [1], [2]], [(0, 1), (1, 2)])
    assert gc.canonical_equal(rd.to_physical(chain), gc.from_edges([(0, 1), (1, 2)]))
    blocks = RedundantGraph([[0, 1, 2], [3, 4]])
    g = rd.to_physical(blocks)
    assert sorted(g.edges) == [(0, 1), (0, 2), (3, 4)]
    assert same_state(g, blocks)


def test_z_measure_vertex_member_examples():
    chain = RedundantGraph([[0], [1, 2], [3]], [(0, 1), (1, 2)])
    out = rd.z_measure_vertex_member(chain, 1, 0)
    assert sorted(out.qubits) == [0, 3] and not out.edges
    out1 = rd.z_measure_vertex_member(chain, 1, 1)
    assert out1.frame(0) == cl.Z and out1.frame(3) == cl.Z
    single = RedundantGraph([[0], [1]], [(0, 1)])
    assert rd.z_measure_vertex_member(single, 0, 1).frame(1) == cl.Z
    assert len(rd.z_measure_vertex_member(RedundantGraph([[0, 1, 2]]), 1, 0).qubits) == 0


def test_serialisation_round_trip():
    rg = rd.hadamard_push(grow(fresh(), [0, 1]), 1)
    back = RedundantGraph.from_json(rg.to_json())
    assert back.to_dict() == rg.to_dict()
    assert back.emitter == E


def test_constructor_validation():
    with pytest.raises(GraphError):
        RedundantGraph([[0, 1], [1]])
    with pytest.raises(GraphError):
        RedundantGraph([[]])
    with pytest.raises((GraphError, UnknownQubitError)):
        RedundantGraph([[0]], [(0, 3)])


def test_random_rules_against_oracle():
    reports = run_suite(cases=80, max_qubits=7, seed=11)
    bad = [r.line() for r in reports if r.checks and not r.ok]
    assert not bad, bad
