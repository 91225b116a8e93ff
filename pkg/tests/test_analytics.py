from __future__ import annotations

import math

import numpy as np
import pytest

from hybridgraph import analytics as an

ETA_TH = math.sqrt(2 / 3)


def test_p_boosted_values():
    assert an.p_boosted(1, 1.0) == 0.5
    assert an.p_boosted(40, 1.0) == pytest.approx(1.0, abs=1e-11)
    assert an.p_boosted(3, 0.95) == pytest.approx(0.6432, abs=1e-4)
    assert an.p_boosted(5, 0.0) == 0.0


def test_improvement_factor_sequence():
    assert [an.improvement_factor(m) for m in (1, 2, 3)] == pytest.approx([2 / 3, 6 / 7, 14 / 15])


def test_m_opt_values_and_threshold():
    assert an.m_opt(0.5) == 1
    assert an.m_opt(ETA_TH) == 1
    assert an.m_opt(ETA_TH + 1e-9) == 2
    assert an.m_opt(0.9) == 2
    assert an.m_opt(0.95) == 3
    assert an.m_opt_info(1.0) == (an.M_CAP, True)


def test_m_opt_is_argmax():
    for eta in np.linspace(0.5, 0.995, 80):
        mo = an.m_opt(eta)
        best = max(an.p_boosted(m, eta) for m in range(1, 40))
        assert an.p_boosted(mo, eta) == pytest.approx(best, rel=1e-12)


def test_staircase_boundaries():
    for m in range(1, 6):
        eta = math.sqrt(an.improvement_factor(m))
        assert an.m_opt(eta - 1e-9) == m
        assert an.m_opt(eta + 1e-9) == m + 1


def test_cluster_probabilities():
    assert an.p_cluster_2d(5, 5, 3, 0.95) == pytest.approx(1.4689e-4, rel=1e-3)
    assert an.p_cluster_2d(7, 1, 2, 0.8) == 1.0
    assert an.p_cluster_2d(2, 2, 1, 1.0) == 0.25
    assert an.p_allphotonic_2d(2, 1, 1.0) == 0.5
    assert an.p_allphotonic_2d(2, 2, 1.0) == 0.0625
    assert an.p_allphotonic_2d(5, 5, 0.95) == pytest.approx(0.45125**40)


def test_rates():
    assert an.t_ext(1, 1, 1.0, 1.0) == 4
    assert an.t_ext(1, 5) == 15 and an.t_ext(3, 5) == 35
    assert an.rate_ratio(5, 5, 0.95) == pytest.approx(513.656, abs=1e-3)
    assert an.rate_ratio(5, 5, 0.9) == pytest.approx(29.490, abs=1e-3)
    r = an.rate_2d(5, 5, 3, 0.95) / an.rate_2d(5, 5, 1, 0.95)
    assert r == pytest.approx(an.rate_ratio(5, 5, 0.95))


def test_rate_ratio_survives_underflow():
    # both rates underflow to zero, the ratio is still computed
    assert an.rate_2d(40, 40, 1, 0.95) == 0.0
    assert an.rate_ratio(40, 40, 0.95) == pytest.approx(math.exp(40 * 39 * math.log(0.6432054042968748 / 0.45125)) * 3 / 7, rel=1e-9)
    assert an.rate_ratio(200, 200, 0.95) == math.inf


def test_ddim():
    assert an.n_fusions_ddim([5, 5]) == 20
    assert an.n_fusions_ddim([2, 2, 2]) == 8
    assert an.n_fusions_ddim([6]) == 0 and an.p_cluster_ddim([6], 2, 0.7) == 1.0
    assert an.p_cluster_ddim([4, 3], 2, 0.9) == pytest.approx(an.p_cluster_2d(4, 3, 2, 0.9))


def test_rings():
    for m in (1, 2, 3):
        assert an.p_ring_encoded(6, 4, 1.0, m) == pytest.approx((1 - 2.0**-m) ** 19)
    assert an.p_ring_encoded(3, 2, 1.0, 1) == 0.0625
    vals = {an.p_ring_encoded(4, 3, 0.93, 2, n2) for n2 in (1, 2, 3, 7)}
    assert len(vals) == 1
    assert an.p_ring(6, 2, 0.9) == an.p_boosted(2, 0.9)


def test_comparison_schemes():
    assert an.p_grice(1, 1, 2) == pytest.approx(0.75)
    assert an.p_grice(1, 1, 0) == pytest.approx(0.5) and an.p_evl(1, 1, 0) == pytest.approx(0.5)
    assert an.p_rus(1.0) == 1.0
    assert an.p_rus(0.9) == pytest.approx(0.6807, abs=1e-4)
    assert an.grice_ladder(30) == [0, 2, 6, 14, 30]
    assert an.evl_ladder(30)[:3] == [0, 4, 12]
    with pytest.raises(ValueError):
        an.p_grice(1, 1, 3)


def test_scheme_ordering_grid():
    for eta in np.linspace(0.82, 1.0, 25):
        pb = an.p_boosted(an.m_opt(eta), eta)
        assert an.p_rus(eta) >= pb - 1e-12
        assert pb >= max(an.best_grice(eta)[0], an.best_evl(eta)[0]) - 1e-12


def test_factory_trivial_cases():
    cfg = an.FactoryConfig(k=6, n1=4, m=3)
    assert an.factory_success(cfg, 0.95) == 0.0
    sure = an.FactoryConfig(k=3, n1=2, m=40, N_A=1, N_B=3)
    assert an.factory_success(sure, 1.0) == pytest.approx(1.0, abs=1e-9)


def test_factory_sizing_reference():
    cfg = an.FactoryConfig(k=6, n1=4, m=3, eps=0.01)
    s = an.factory_sizing(cfg, 0.95)
    assert s["p_c"] == pytest.approx(0.0383, abs=1e-4)
    assert s["c_hat"] == 119 and s["N_A"] == 186 and s["N_B"] == 1726
    assert s["halving_trials"] == pytest.approx(math.log(2) / -math.log1p(-s["p_c"]))
    full = an.FactoryConfig(6, 4, 3, 1, s["N_A"], s["N_B"], 0.01)
    assert an.factory_success(full, 0.95) >= 0.94


def test_factory_strict_is_smaller():
    cfg = an.FactoryConfig(k=6, n1=4, m=3)
    assert an.factory_probabilities(cfg, 0.95, strict=True)["p_a"] < an.factory_probabilities(cfg, 0.95)["p_a"]
    assert an.factory_probabilities(cfg, 1.0, strict=True)["p_a"] == an.factory_probabilities(cfg, 1.0)["p_a"]


def test_factory_config_validation():
    with pytest.raises(ValueError):
        an.FactoryConfig(k=0, n1=4, m=3)
    with pytest.raises(ValueError):
        an.FactoryConfig(k=3, n1=4, m=3, eps=1.5)


def test_figure_tables():
    f5 = an.figure_data("fig5", eta_min=0.8, eta_max=1.0, steps=200)
    assert len(f5) == 200
    mo = [r["m_opt"] for r in f5]
    assert mo == sorted(mo)
    last = f5[-1]
    assert last["m_capped"] == 1 and last["p_opt"] == pytest.approx(1 - 2.0**-an.M_CAP)
    f6 = an.figure_data("fig6", sizes=[5], etas=[0.95])
    assert f6[0]["rate_ratio"] == pytest.approx(513.656, abs=1e-3)
    assert len(an.figure_data("fig6")) == 6 * 6 * 3
    f9 = an.figure_data("fig9", eta_min=0.82, eta_max=1.0, steps=10)
    assert {"p_rus", "p_boosted_opt", "p_grice_opt", "p_evl_opt"} <= set(f9[0])
    with pytest.raises(ValueError):
        an.figure_data("fig7")


def test_csv_round_trip(tmp_path):
    rows = an.figure_data("fig5", eta_min=0.8, eta_max=1.0, steps=7)
    path = tmp_path / "t.csv"
    an.write_table(rows, path)
    back = an.read_table(path)
    assert [r.keys() for r in back] == [r.keys() for r in rows]
    for a, b in zip(rows, back):
        for k in a:
            assert b[k] == pytest.approx(a[k], rel=1e-11)
    assert path.read_bytes().count(b"\r\n") == len(rows) + 1
    jpath = tmp_path / "t.json"
    an.write_table(rows, jpath)
    assert an.read_table(jpath)[0]["m_opt"] == rows[0]["m_opt"]


def test_iter_sweep():
    assert list(an.iter_sweep("1..5")) == [1, 2, 3, 4, 5]
    assert list(an.iter_sweep("2..10..4")) == [2, 6, 10]
    assert list(an.iter_sweep("3,7")) == [3, 7]
    with pytest.raises(ValueError):
        an.iter_sweep("5..1")


def test_eta_validation():
    with pytest.raises(ValueError):
        an.p_boosted(1, 1.2)
    with pytest.raises(ValueError):
        an.p_boosted(0, 0.9)
