from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from conftest import same_state

from hybridgraph import clifford as cl
from hybridgraph import fusion as fu
from hybridgraph import graph as gc
from hybridgraph import oracle as orc
from hybridgraph import redundant as rd
from hybridgraph.errors import GraphError, ImpossibleOutcomeError
from hybridgraph.graph import GraphState
from hybridgraph.redundant import RedundantGraph

OUTS2 = list(itertools.product((0, 1), repeat=2))


def pivot(g, u, v):
    return gc.local_complement(gc.local_complement(gc.local_complement(g, u), v), u)


def test_type1_ghz_pair_gives_ghz5():
    rg = RedundantGraph([[0, 1, 2], [3, 4, 5]])
    out = fu.fuse_type1(rg, 2, 3, 0)
    assert len(out.vertices) == 1 and sorted(out.qubits) == [0, 1, 2, 4, 5]
    assert same_state(out, RedundantGraph([[0, 1, 2, 4, 5]]))


def test_type1_singletons_merge_neighbourhoods():
    g = GraphState(range(4), [(0, 1), (2, 3)])
    out = fu.fuse_type1(g, 1, 2, 0)
    assert out.vertices == (0, 1, 3)
    assert same_state(out, orc.apply_kraus(orc.build_graph_state(g), "G_I", (1, 2), 0)[0])


def test_type1_keeps_all_other_members():
    rg = RedundantGraph([[0], [1, 2, 3], [4, 5], [6]], [(0, 1), (2, 3)])
    out = fu.fuse_type1(rg, 1, 4, 1)
    merged = out.vertex_of(1)
    assert set(merged.members) == {1, 2, 3, 5}
    assert out.neighbors(merged.id) == {out.vertex_of(0).id, out.vertex_of(6).id}


def test_variant_on_paths_joins_ends():
    g = GraphState([1, 2, 3, 4], [(1, 2), (3, 4)])
    for out in OUTS2:
        r = fu.fuse_type2_variant(g, 2, 3, out)
        assert r.vertices == (1, 4) and r.edges == ((1, 4),)


def test_xz_reproduces_bullet_rule_after_pivot():
    # nA - A={a, cA} - B={b, cB} - nB ; bullet rule: complete bipartite {nA, cA} x {nB, cB}
    rg = RedundantGraph([[0], [1, 2], [3, 4], [5]], [(0, 1), (2, 3)])
    want = {(0, 4), (0, 5), (2, 4), (2, 5)}
    for out in OUTS2:
        g = rd.to_physical(fu.fuse_type2_xz(rg, 1, 3, out))
        assert set(pivot(g, 2, 4).edges) == want


def test_bell_examples():
    g = GraphState(range(4), [(0, 1), (2, 3)])
    for out in OUTS2:
        r = fu.fuse_type2_bell(g, 1, 2, out)
        assert r.vertices == (0, 3)
        assert same_state(r, orc.apply_kraus(orc.build_graph_state(g), "BELL", (1, 2), out)[0])
    pair = RedundantGraph([[0, 1], [2, 3]])
    r = fu.fuse_type2_bell(pair, 1, 2, (0, 0))
    assert sorted(r.qubits) == [0, 3]
    assert same_state(r, RedundantGraph([[0, 3]]))


def test_xz_on_isolated_edges():
    g = GraphState(range(4), [(0, 1), (2, 3)])
    for out in OUTS2:
        r = fu.fuse_type2_xz(g, 1, 2, out)
        assert r.edges == ((0, 3),)


def test_xz_swap_exchanges_bases():
    g = GraphState(range(4), [(0, 1), (2, 3)], {0: "S"})
    s = orc.build_graph_state(g)
    for out in OUTS2:
        ab = fu.fuse_type2_xz(g, 1, 2, out)
        ba = fu.fuse_type2_xz(g, 2, 1, out)
        assert same_state(ab, orc.apply_kraus(s, "XZ", (1, 2), out)[0])
        assert same_state(ba, orc.apply_kraus(s, "XZ", (2, 1), out)[0])


def test_failure_rules():
    g = GraphState(range(4), [(0, 1), (2, 3)])
    r = fu.fail_fusion(g, 1, 2, (0, 0))
    assert r.vertices == (0, 3) and not r.edges
    r1 = fu.fail_fusion(g, 1, 2, (1, 1))
    assert r1.frame(0) == cl.Z and r1.frame(3) == cl.Z
    assert len(fu.fail_fusion(gc.new_graph(2), 0, 1, (0, 0))) == 0
    xz = fu.fail_fusion(g, 1, 2, (0, 0), kind="xz")
    want = orc.apply_kraus(orc.apply_kraus(orc.build_graph_state(g), "P_X", (1,), 0)[0], "P_Z", (2,), 0)[0]
    assert same_state(xz, want)


def test_same_vertex_rejected():
    with pytest.raises(GraphError):
        fu.fuse_type1(RedundantGraph([[0, 1]]), 0, 1, 0)


# -- boosted ---------------------------------------------------------------------------------
def pair(m):
    return RedundantGraph([list(range(m + 1)), list(range(10, 11 + m))])


def test_boosted_m1_success():
    rg, out = fu.boosted_fuse(pair(1), 0, 1, 1, fu.ScriptedSampler([(True, 0, 0)]))
    assert out.kind == fu.SUCCESS and out.attempts_used == 1
    assert sorted(rg.qubits) == [0, 10]
    assert len(rg.edges) == 1


def test_boosted_third_attempt_succeeds():
    sampler = fu.ScriptedSampler([(False, 0, 1), (False, 1, 0), (True, 1, 1)])
    rg, out = fu.boosted_fuse(pair(3), 0, 1, 3, sampler)
    assert out.success and out.attempts_used == 3
    assert sorted(len(v) for v in rg.vertices) == [1, 1]
    assert len(rg.edges) == 1


def test_boosted_success_leaves_residual_vertices_joined():
    rg = RedundantGraph([[0, 1, 2, 3], [10, 11, 12, 13], [20]], [(0, 2)])
    out_rg, out = fu.boosted_fuse(rg, 0, 1, 2, fu.ScriptedSampler([(True, 0, 0)]))
    assert out.success and out.attempts_used == 1
    a, b = out_rg.vertex_of(0), out_rg.vertex_of(10)
    assert len(a) == 2 and len(b) == 2
    assert b.id in out_rg.neighbors(a.id)


def test_boosted_failed_attempt_costs_one_photon_each():
    rg = pair(3)
    state = rd.hadamard_push(rd.hadamard_push(rg, 3), 13)
    failed = fu.fail_fusion(state, 3, 13, (0, 0))
    assert sorted(len(v) for v in failed.vertices) == [3, 3]
    assert not failed.edges


def test_boosted_partial_failure_probability():
    m = 2
    partial = 0
    for pattern in itertools.product((False, True), repeat=m):
        _, out = fu.boosted_fuse(pair(m), 0, 1, m, fu.ScriptedSampler([(p, 0, 0) for p in pattern]))
        partial += out.kind == fu.PARTIAL_FAIL
    assert partial / 2**m == pytest.approx(0.25)


def test_boosted_partial_failure_state():
    rg, out = fu.boosted_fuse(pair(2), 0, 1, 2, fu.ScriptedSampler([(False, 0, 0), (False, 1, 0)]))
    assert out.kind == fu.PARTIAL_FAIL and out.attempts_used == 2
    assert sorted(rg.qubits) == [0, 10] and not rg.edges


def test_boosted_loss_is_complete_failure():
    _, out = fu.boosted_fuse(pair(2), 0, 1, 2, fu.ScriptedSampler([(True, 0, 0)], lost=frozenset({0})))
    assert out.kind == fu.COMPLETE_FAIL and not out.success


def _oracle_boosted(rg, pa, pb, pattern):
    """Replay a boosted fusion on the dense state: H push, then the variant
    gate on success (leftovers X-measured) or Z on both on failure."""
    s = orc.build_redundant_state(rg)
    for l, (ok, i, j) in enumerate(pattern):
        s = orc.apply_unitary(orc.apply_unitary(s, pa[l], cl.H), pb[l], cl.H)
        if ok:
            s = orc.apply_kraus(s, "G_II", (pa[l], pb[l]), (i, j))[0]
            for r in range(l + 1, len(pa)):
                _, ri, rj = pattern[r]
                s = orc.apply_kraus(s, "P_X", (pa[r],), ri)[0]
                s = orc.apply_kraus(s, "P_X", (pb[r],), rj)[0]
            return s
        s = orc.apply_kraus(s, "P_Z", (pa[l],), i)[0]
        s = orc.apply_kraus(s, "P_Z", (pb[l],), j)[0]
    return s


def test_boosted_matches_oracle_replay():
    rg = RedundantGraph([[0, 1, 2], [10, 11, 12], [20]], [(0, 2), (1, 2)], {0: "S", 11: "Z"})
    m = 2
    pa, pb = fu.default_allocation(rg, 0, m), fu.default_allocation(rg, 1, m)
    checked = 0
    for oks in itertools.product((False, True), repeat=m):
        for bits in itertools.product((0, 1), repeat=2 * m):
            pattern = [(oks[l], bits[2 * l], bits[2 * l + 1]) for l in range(m)]
            try:
                want = _oracle_boosted(rg, pa, pb, pattern)
            except ImpossibleOutcomeError:
                continue
            got, _ = fu.boosted_fuse(rg, 0, 1, m, fu.ScriptedSampler(pattern))
            assert same_state(got, want)
            checked += 1
    assert checked >= 16


def test_boosted_validation():
    with pytest.raises(GraphError):
        fu.boosted_fuse(pair(1), 0, 1, 2, fu.ScriptedSampler([]))
    with pytest.raises(GraphError):
        fu.boosted_fuse(pair(1), 0, 0, 1, fu.ScriptedSampler([]))
    with pytest.raises(GraphError):
        fu.boosted_fuse(pair(2), 0, 1, 2, fu.ScriptedSampler([]), photons_a=(1, 10))


def test_array_sampler_thresholds():
    u = np.array([[0.1, 0.99, 0.4, 0.6, 0.2]])
    d = fu.ArraySampler(u, eta=0.95).draw(0)
    assert d.detected_a and not d.detected_b and d.success and d.i == 0 and d.j == 1


def test_trace_json():
    trace = []
    fu.boosted_fuse(pair(1), 0, 1, 1, fu.ScriptedSampler([(True, 1, 0)]), trace=trace)
    rec = json.loads(fu.trace_json(trace).splitlines()[0])
    assert rec["kind"] == fu.SUCCESS and rec["attempts_used"] == 1


@pytest.mark.parametrize("gate,outs", [(fu.fuse_type1, (0, 1)), (fu.fuse_type2_variant, OUTS2), (fu.fuse_type2_xz, OUTS2)])
def test_push_out_commutes_with_fusion(gate, outs):
    # c qubits pushed out with H, fused, then H again: same state as fusing directly
    rg = RedundantGraph([[0], [1, 2, 3], [4, 5], [6]], [(0, 1), (2, 3)])
    cs = (2, 3, 5)
    pushed = rg
    for c in cs:
        pushed = rd.hadamard_push(pushed, c)
    for out in outs:
        direct = gate(rg, 1, 4, out)
        via = gate(pushed, 1, 4, out)
        for c in cs:
            via = rd.apply_clifford(via, c, cl.H)
        assert same_state(via, direct)
