from __future__ import annotations

import pytest

from hybridgraph import emitter as em
from hybridgraph import montecarlo as mc
from hybridgraph.errors import PlanError
from hybridgraph.redundant import RedundantGraph
from hybridgraph.verify import compositions, verify_linear


def test_linear_plan_shape():
    plan = em.compile_linear([4, 3, 6])
    assert plan.vertex_sizes() == {0: [4, 3, 6]}
    assert len(plan.photons()) == 13
    ops = [i.op for i in plan.instructions]
    assert ops[0] == "init_emitter" and ops[-1] == "measure_x_emitter"
    assert ops.count("hadamard_emitter") == 3


def test_linear_special_cases_run():
    for sizes in ([1, 1, 1], [5], [4, 3, 6]):
        plan = em.compile_linear(sizes)
        res, state = mc.run_trial(plan, 1.0, mc.trial_uniforms(plan, mc.LossModel(), 0), keep_state=True)
        assert res.success
        assert sorted(len(v) for v in state.vertices) == sorted(sizes)
        assert len(state.edges) == len(sizes) - 1


def test_ghz_plan_is_single_vertex():
    assert em.compile_ghz(4).vertex_sizes() == {0: [4]}


def test_compositions_count():
    assert sum(1 for _ in compositions(5)) == 16
    assert set(compositions(3)) == {(3,), (2, 1), (1, 2), (1, 1, 1)}


def test_linear_generation_against_oracle_small():
    assert verify_linear(4).ok


def test_2d_layers():
    p = em.compile_2d_layers(2, 2, 1)
    assert p.vertex_sizes() == {0: [2, 2], 1: [2, 2]}
    assert len(p.boosted()) == 2
    p = em.compile_2d_layers(5, 5, 3)
    assert len(p.stream_ids()) == 5 and len(p.boosted()) == 20
    assert p.vertex_sizes()[2] == [7] * 5 and p.vertex_sizes()[0] == [4] * 5
    p = em.compile_2d_layers(4, 1, 2)
    assert not p.boosted() and p.vertex_sizes() == {0: [1] * 4}
    layers = em.compile_2d_layers(3, 3, 1).streams()
    assert [list(x.vertex_sizes().values()) for x in layers] == [[[2] * 3], [[3] * 3], [[2] * 3]]


def test_cluster_nd_fusion_count():
    assert len(em.compile_cluster_nd([2, 2, 2], 1).boosted()) == 8
    assert len(em.compile_cluster_nd([5, 5], 2).boosted()) == 20
    assert not em.compile_cluster_nd([4], 1).boosted()


def test_ring_plans():
    p = em.compile_ring(6, 1)
    assert len(p.boosted()) == 1 and p.vertex_sizes() == {0: [2, 1, 1, 1, 1, 2]}
    tri = em.compile_ring(3, 1)
    for t in range(50):
        res, state = mc.run_trial(tri, 1.0, mc.trial_uniforms(tri, mc.LossModel(), t), keep_state=True)
        if res.success:
            break
    assert res.success and len(state.vertices) == 3 and len(state.edges) == 3
    p = em.compile_ring(6, 3)
    assert p.boosted()[0].m == 3
    with pytest.raises(PlanError):
        em.compile_ring(2, 1)


def test_encoded_ring_counts():
    p = em.compile_encoded_ring(6, 4, 2, 3)
    assert len(p.boosted()) == 19
    assert all(b.m == 3 for b in p.boosted())
    assert len(em.compile_encoded_ring(3, 2, 1, 1).boosted()) == 4


@pytest.mark.parametrize("k,n1,n2,m", [(6, 4, 2, 3), (3, 2, 1, 1), (4, 3, 2, 2)])
def test_encoded_ring_audit_matches_plan(k, n1, n2, m):
    p = em.compile_encoded_ring(k, n1, n2, m)
    audit = em.encoded_ring_audit(k, n1, n2, m)
    sizes = p.vertex_sizes()
    ids = p.stream_ids()
    assert sum(sizes[ids[0]]) == audit["ring"] == k * (m + 1) + 2 * m
    assert sum(sum(sizes[s]) for s in ids[1 : 1 + k]) == audit["clusters"]
    assert sum(sum(sizes[s]) for s in ids[1 + k :]) == audit["ghz"]
    assert len(p.photons()) == audit["total"]
    assert len(p.boosted()) == audit["boosted_fusions"]


def _vertices(plan, stream):
    out = []
    for ins in plan.instructions:
        if ins.stream == stream and isinstance(ins, em.HadamardEmitter):
            out.append([])
        elif ins.stream == stream and isinstance(ins, em.Emit):
            out[-1].append(ins.photon)
    return out


@pytest.mark.parametrize("k,n1,n2,m", [(3, 2, 1, 1), (3, 2, 2, 1), (4, 2, 1, 2), (3, 3, 1, 1)])
def test_encoded_ring_structure_before_final_measurements(k, n1, n2, m):
    """On success the state before step 7 is the ring of survivors, each
    attached to its middle survivor, which carries the code blocks."""
    full = em.compile_encoded_ring(k, n1, n2, m)
    pre = em.GenerationPlan(full.instructions[: -2 * k])
    loss = mc.LossModel(1.0, 1)
    for t in range(3000):
        res, state = mc.run_trial(pre, 1.0, mc.trial_uniforms(pre, loss, t), keep_state=True)
        if res.success:
            break
    assert res.success
    ring = _vertices(full, 0)
    ids = full.stream_ids()
    blocks = [[ring[r][0]] for r in range(k)]
    edges = [(r, (r + 1) % k) for r in range(k)]
    for r in range(k):
        c = _vertices(full, ids[1 + r])
        mid = len(blocks)
        blocks.append([c[1][0]])
        edges.append((r, mid))
        leaves = [c[0], c[2]] + [_vertices(full, ids[1 + k + r * (n1 - 2) + g])[0][:n2] for g in range(n1 - 2)]
        for leaf in leaves:
            blocks.append(leaf)
            edges.append((mid, len(blocks) - 1))
    assert state.structure() == RedundantGraph(blocks, edges).structure()


def test_plan_round_trip(tmp_path):
    p = em.compile_encoded_ring(3, 3, 2, 2)
    path = tmp_path / "p.jsonl"
    em.write_plan(p, path)
    q = em.read_plan(path)
    assert q.instructions == p.instructions and q.family == p.family and q.params == p.params


def test_malformed_plans_rejected():
    with pytest.raises(PlanError):
        em.GenerationPlan.from_jsonl('{"op":"emit","photon":0,"stream":0}\n')
    with pytest.raises(PlanError):
        em.GenerationPlan([em.Emit(0, 0)])
    with pytest.raises(PlanError):
        em.instruction_from_dict({"op": "teleport"})
    with pytest.raises(PlanError):
        em.GenerationPlan([em.MeasureX(3)])


def test_plan_concatenation_renumbers():
    a = em.compile_linear([2])
    both = a + a
    assert both.stream_ids() == [0, 1]
    assert sorted(both.photons()) == [0, 1, 2, 3]


def test_durations():
    assert em.plan_duration(em.compile_linear([3] * 5)) == 15
    assert em.plan_duration(em.compile_linear([7] * 5)) == 35
    assert em.plan_duration(em.GenerationPlan(())) == 0
    p = em.compile_2d_layers(5, 3, 1)
    t = em.TimeModel(1.0, 0.5)
    assert em.plan_duration(p, t, "parallel") == 5 * 3 + 5 * 0.5
    assert em.plan_duration(p, t) == (2 + 3 + 2) * 5 + 3 * 5 * 0.5
    with pytest.raises(PlanError):
        em.TimeModel(-1.0)
