import math
import struct

import numpy as np
import pytest
from scipy import stats

from ptstable import (Atom, DomainError, Pareto, RosinskiMeasure, TSParams, charfn, kernels,
                      levy, moments, sim)
from ptstable._accel import NUMBA_OK

DELTA1 = TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(1.0))
PARETO3 = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(1.0, 3.0, 1.0))]))
MIXED2D = TSParams(0.8, 1.5, [0.1, -0.2], RosinskiMeasure(2, [
    ((0.6, 0.8), Atom(1.5, 0.7)),
    ((-1.0, 0.0), Pareto(0.5, 5.5, 0.4)),
    ((0.0, -1.0), Atom(0.3, 2.0)),
]))


def test_jump_rate_is_levy_tail():
    for P in (DELTA1, PARETO3, MIXED2D):
        for eps in (1e-3, 0.1):
            assert sim.jump_rate(P, eps) == pytest.approx(levy.tail(P, eps), rel=1e-9)


@pytest.mark.parametrize("P,ray", [(DELTA1, 0), (PARETO3, 0), (MIXED2D, 1)])
def test_sample_jump_radius_inverts_the_tail(P, ray):
    eps = 0.01
    prof = P.R.rays[ray].profile
    t0 = levy.ray_tail(P.alpha, P.p, prof, eps)
    for u in (0.999, 0.5, 1e-3, 1e-9):
        r = sim.sample_jump_radius(P, ray, eps, u)
        assert r >= eps
        assert levy.ray_tail(P.alpha, P.p, prof, r) / t0 == pytest.approx(u, rel=1e-8)


def _plan_and_uniforms(P, eps, n, seed=7):
    plan = sim._make_plan(P, sim.SimConfig(eps, 1))
    rng = np.random.default_rng(seed)
    return plan, rng.random(n), 1.0 - rng.random(n)


@pytest.mark.parametrize("P", [DELTA1, PARETO3, MIXED2D,
                               TSParams(-1.0, 0.5, 0, RosinskiMeasure.atom(2.0))])
def test_drawn_radii_have_the_requested_tail_probability(P, backend):
    eps = 1e-3
    plan, u1, u2 = _plan_and_uniforms(P, eps, 2000)
    comp, r = kernels.draw_radii(u1, u2, plan.cum_mass, plan.kind, plan.lscale, plan.lmass0,
                                 plan.par, plan.tab_row, plan.k_tab, plan.p_tab,
                                 plan.alpha, plan.p)
    assert np.all(r >= eps * (1 - 1e-12))
    # the radius of a component-c jump must satisfy T_c(r) / T_c(eps) = u
    for i in range(0, 2000, 97):
        c = comp[i]
        if plan.kind[c] == 0:
            node = math.exp(plan.lscale[c])
            ratio = math.exp(kernels.log_kernel_k(r[i] / node, P.alpha, P.p)[0] - plan.lmass0[c])
        else:
            prof = Pareto(*plan.par[c])
            ratio = levy.pareto_tail_closed(P.alpha, P.p, prof, r[i]) / math.exp(plan.lmass0[c])
        assert ratio == pytest.approx(u2[i], rel=1e-10)


@pytest.mark.skipif(not NUMBA_OK, reason="numba not installed")
@pytest.mark.parametrize("P", [DELTA1, PARETO3, MIXED2D])
def test_backends_draw_identical_samples(P):
    cfg = sim.SimConfig(1e-2, 3000, seed=11)
    with kernels.use_backend("numba"):
        a = sim.sample(P, cfg, threads=1).values
    with kernels.use_backend("numpy"):
        b = sim.sample(P, cfg, threads=1).values
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


def test_sampling_is_deterministic_across_threads():
    cfg = sim.SimConfig(1e-1, 70_000, seed=5)
    a = sim.sample(MIXED2D, cfg, threads=1).values
    b = sim.sample(MIXED2D, cfg, threads=3).values
    assert np.array_equal(a, b)
    c = sim.sample(MIXED2D, sim.SimConfig(1e-1, 70_000, seed=6), threads=1).values
    assert not np.array_equal(a, c)


def test_prefix_stability_at_chunk_boundaries():
    # chunk streams are keyed by chunk index, so a run of whole chunks is a
    # prefix of any longer run
    a = sim.sample(DELTA1, sim.SimConfig(1e-2, 2 * sim.CHUNK + 5, 3)).values
    b = sim.sample(DELTA1, sim.SimConfig(1e-2, sim.CHUNK, 3)).values
    assert np.array_equal(a[:sim.CHUNK], b)


def test_poisson_count_matches_rate():
    batch = sim.sample(DELTA1, sim.SimConfig(1e-3, 20_000, 1))
    lam = batch.diagnostics.jump_rate
    n_jumps = batch.diagnostics.n_jumps
    assert abs(n_jumps - lam * batch.n) < 5 * math.sqrt(lam * batch.n)


def test_mean_and_variance_match_cumulants():
    batch = sim.sample(DELTA1, sim.SimConfig(1e-2, 100_000, 2))
    x = batch.values[:, 0]
    c1, c2 = moments.cumulant(DELTA1, [1]), moments.cumulant(DELTA1, [2])
    assert abs(x.mean() - c1) < 4 * math.sqrt(c2 / x.size)
    c4 = moments.cumulant(DELTA1, [4])
    se_var = math.sqrt((c4 + 2 * c2 ** 2) / x.size)
    assert abs(x.var(ddof=1) - c2) < 4 * se_var


def test_two_dimensional_cumulants():
    batch = sim.sample(MIXED2D, sim.SimConfig(1e-1, 100_000, 4))
    x = batch.values
    n = x.shape[0]
    for i, k in [(0, [1, 0]), (1, [0, 1])]:
        assert abs(x[:, i].mean() - moments.cumulant(MIXED2D, k)) < 4 * x[:, i].std() / math.sqrt(n)
    cov = np.cov(x.T)
    for (i, j), k in [((0, 0), [2, 0]), ((0, 1), [1, 1]), ((1, 1), [0, 2])]:
        # standard error of a sample covariance from the fourth cumulants
        k4 = [a + b for a, b in zip(k, k)]
        se = math.sqrt((moments.cumulant(MIXED2D, k4) + cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n)
        assert abs(cov[i, j] - moments.cumulant(MIXED2D, k)) < 4 * se


def test_drift_only_for_negative_alpha():
    P = TSParams(-0.5, 1.0, [0.2], RosinskiMeasure.atom(1.0))
    batch = sim.sample(P, sim.SimConfig(1e-3, 50_000, 9, small_jump=sim.DRIFT_ONLY))
    assert batch.diagnostics.small_jump_cov[0, 0] < 1e-6
    x = batch.values[:, 0]
    sd = math.sqrt(moments.cumulant(P, [2]))
    assert abs(x.mean() - moments.cumulant(P, [1])) < 4 * sd / math.sqrt(x.size)
    with pytest.raises(DomainError):
        sim.sample(DELTA1, sim.SimConfig(1e-3, 10, small_jump=sim.DRIFT_ONLY))


def test_truncation_levels_agree_in_distribution():
    a = sim.sample(DELTA1, sim.SimConfig(1e-1, 50_000, 1)).values[:, 0]
    b = sim.sample(DELTA1, sim.SimConfig(1e-3, 50_000, 2)).values[:, 0]
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_empirical_cf_matches_exact_cf():
    batch = sim.sample(PARETO3, sim.SimConfig(1e-2, 50_000, 8))
    z = np.array([-1.0, 0.3, 2.0])
    ecf = sim.empirical_cf(batch, z)
    exact = np.exp([charfn.evaluate(PARETO3, zi) for zi in z])
    assert np.max(np.abs(ecf - exact)) < 5 / math.sqrt(batch.n)
    assert isinstance(sim.empirical_cf(batch, 0.5), complex)


def test_batch_file_round_trip(tmp_path):
    batch = sim.sample(MIXED2D, sim.SimConfig(1e-2, 1000, 0))
    path = tmp_path / "x.bin"
    sim.write_batch(path, batch)
    raw = path.read_bytes()
    assert raw[:8] == b"TSBATCH1"
    assert struct.unpack("<QQ", raw[8:24]) == (1000, 2)
    assert len(raw) == 24 + 8 * 2000
    assert np.array_equal(sim.read_batch(path), batch.values)


def test_batch_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTABATCH" + bytes(30))
    with pytest.raises(DomainError):
        sim.read_batch(path)
    path.write_bytes(b"TSBATCH1" + struct.pack("<QQ", 10, 1) + bytes(8))
    with pytest.raises(DomainError):
        sim.read_batch(path)


def test_config_validation():
    with pytest.raises(DomainError):
        sim.SimConfig(epsilon=0.0)
    with pytest.raises(DomainError):
        sim.SimConfig(n=0)
    with pytest.raises(DomainError):
        sim.SimConfig(small_jump="none")


def test_thread_count_from_environment(monkeypatch):
    from ptstable._accel import num_threads
    monkeypatch.setenv("TS_NUM_THREADS", "3")
    assert num_threads() == 3
    monkeypatch.setenv("TS_NUM_THREADS", "lots")
    with pytest.raises(ValueError):
        num_threads()
