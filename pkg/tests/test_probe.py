import math

import numpy as np
import pytest
from scipy.linalg import expm

from fockprobe import probe
from fockprobe.errors import DegenerateStatisticsError, DomainError, TruncationError
from fockprobe.fock import (
    FockState,
    auto_cutoff,
    make_coherent_state,
    make_mixed01,
    make_number_state,
    make_thermal_density,
)
from fockprobe.probe import (
    CHUNK,
    JcConfig,
    JcMode,
    NdpaConfig,
    NdpaMode,
    counter_uniforms,
    jc_evolve,
    jc_probabilities,
    jc_sample,
    ndpa_probabilities,
    ndpa_sample,
    protocol_bias_report,
)


def coherent(alpha, extra=4):
    return make_coherent_state(alpha, auto_cutoff(alpha=abs(alpha), tail=1e-16) + extra)[0]


# --- sampling stream ------------------------------------------------------------


def test_uniforms_in_unit_interval():
    u = counter_uniforms(5, 0, 10000, 2)
    assert u.shape == (10000, 2)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_uniforms_depend_only_on_trial_index():
    whole = counter_uniforms(11, 0, 300, 2)
    np.testing.assert_array_equal(counter_uniforms(11, 120, 50, 2), whole[120:170])


def test_uniforms_across_chunk_boundary():
    span = counter_uniforms(3, CHUNK - 5, 10)
    np.testing.assert_array_equal(span[:5], counter_uniforms(3, CHUNK - 5, 5))
    np.testing.assert_array_equal(span[5:], counter_uniforms(3, CHUNK, 5))
    assert not np.array_equal(counter_uniforms(3, CHUNK, 5), counter_uniforms(3, 0, 5))


def test_seeds_differ():
    assert not np.array_equal(counter_uniforms(1, 0, 8), counter_uniforms(2, 0, 8))


def test_thread_count_does_not_change_tallies(monkeypatch):
    cfg = NdpaConfig(s=0.3, trials=CHUNK + 1000, seed=9)
    state = make_number_state(0, 4)
    monkeypatch.setenv(probe.THREADS_ENV, "1")
    serial = ndpa_sample(state, cfg)
    monkeypatch.setenv(probe.THREADS_ENV, "4")
    assert ndpa_sample(state, cfg) == serial


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv(probe.THREADS_ENV, "many")
    with pytest.raises(DomainError):
        probe.max_workers()


# --- NDPA -----------------------------------------------------------------------


def test_ndpa_first_order_vacuum():
    p = ndpa_probabilities(make_number_state(0, 4), NdpaConfig(s=0.1))
    assert p.p1 == pytest.approx(0.01 / 1.01, rel=1e-12)
    assert p.p0 + p.p1 == pytest.approx(1)


def test_ndpa_first_order_coherent():
    p = ndpa_probabilities(coherent(1.0), NdpaConfig(s=0.1))
    assert p.p1 == pytest.approx(0.02 / 1.02, rel=1e-12)


def test_ndpa_first_order_small_coupling_limit():
    state = make_thermal_density(0.5, 40)[0]
    for s in (1e-2, 1e-3, 1e-4):
        p = ndpa_probabilities(state, NdpaConfig(s=s))
        assert p.p1 / s**2 == pytest.approx(1.5, rel=2 * s**2)


@pytest.mark.parametrize("m", [0, 1, 3])
def test_ndpa_exact_number_state_vacuum_probability(m):
    # the idler stays empty with probability sech(s)^(2(m+1))
    s = 0.4
    p = ndpa_probabilities(make_number_state(m, 6), NdpaConfig(s=s, mode=NdpaMode.EXACT))
    assert p.p0 == pytest.approx(math.cosh(s) ** (-2 * (m + 1)), abs=1e-12)
    assert p.p0 + p.p1 == pytest.approx(1, abs=1e-12)


def test_ndpa_exact_against_matrix_exponential():
    s, na, nb = 0.25, 20, 20
    a = np.diag(np.sqrt(np.arange(1, na + 1)), 1)
    b = np.diag(np.sqrt(np.arange(1, nb + 1)), 1)
    ab = np.kron(a, b)
    unitary = expm(s * (ab - ab.T))
    amps = np.array([0.6, 0.0, 0.8j])
    psi = np.zeros((na + 1, nb + 1), dtype=complex)
    psi[:3, 0] = amps
    out = (unitary @ psi.ravel()).reshape(na + 1, nb + 1)
    idler = np.sum(np.abs(out) ** 2, axis=0)
    p = ndpa_probabilities(FockState(np.append(amps, [0, 0]), 4), NdpaConfig(s=s, mode=NdpaMode.EXACT))
    assert p.p0 == pytest.approx(idler[0], abs=1e-10)
    assert p.multi_photon == pytest.approx(idler[2:].sum(), abs=1e-10)


def test_ndpa_exact_converges_to_first_order():
    state = coherent(1.0)
    p = ndpa_probabilities(state, NdpaConfig(s=0.1, mode=NdpaMode.EXACT))
    first = ndpa_probabilities(state, NdpaConfig(s=0.1))
    assert p.multi_photon < 5e-4
    assert abs(p.p1 - first.p1) < 5e-4


def test_ndpa_sample_statistics():
    state = coherent(1.0)
    rec = ndpa_sample(state, NdpaConfig(s=0.1, trials=200_000, seed=4))
    assert rec.n0 + rec.n1 == rec.trials
    assert rec.exact_expectation == pytest.approx(2, abs=1e-12)
    assert rec.z_score(rec.estimator_expectation) < 5
    assert rec.estimator_expectation == pytest.approx(2, rel=1e-12)


def test_ndpa_sample_deterministic():
    cfg = NdpaConfig(s=0.2, trials=50_000, seed=123)
    state = make_mixed01(0.4, 4)
    assert ndpa_sample(state, cfg) == ndpa_sample(state, cfg)


def test_ndpa_efficiency_estimators():
    state = coherent(1.0)
    rec = ndpa_sample(state, NdpaConfig(s=0.1, eta=0.5, trials=400_000, seed=2))
    assert rec.literal_expectation == pytest.approx(0.25 * rec.estimator_expectation, rel=1e-12)
    assert rec.z_score(rec.estimator_expectation) < 5
    assert abs(rec.estimator_literal - 0.5) < 0.05


def test_ndpa_zero_efficiency():
    with pytest.raises(DegenerateStatisticsError):
        ndpa_sample(make_number_state(0, 3), NdpaConfig(s=0.1, eta=0.0))


def test_ndpa_all_clicks_degenerate():
    # p_click = s^2 E / (1 + s^2 E) is nearly 1 at large s
    with pytest.raises(DegenerateStatisticsError):
        ndpa_sample(make_number_state(0, 3), NdpaConfig(s=1e4, trials=3))


def test_ndpa_config_domain():
    with pytest.raises(DomainError):
        NdpaConfig(s=0)
    with pytest.raises(DomainError):
        NdpaConfig(s=0.1, eta=1.5)


def test_ndpa_top_level_guard():
    with pytest.raises(TruncationError):
        ndpa_probabilities(make_number_state(4, 4), NdpaConfig(s=0.1))


# --- Jaynes-Cummings --------------------------------------------------------------


def test_jc_exact_vacuum():
    gt = 0.3
    p = jc_probabilities(make_number_state(0, 3), JcConfig(g=gt, tau=1, mode=JcMode.EXACT))
    assert p.pe == pytest.approx(math.cos(gt) ** 2)
    assert p.pg == pytest.approx(math.sin(gt) ** 2)


def test_jc_linearized_ratio():
    for state, e in [(make_number_state(2, 5), 3.0), (coherent(0.7), 1.49)]:
        cfg = JcConfig(g=0.05, tau=2.0)
        p = jc_probabilities(state, cfg)
        assert p.pg / p.pe == pytest.approx(cfg.gt**2 * e, rel=1e-12)


def test_jc_linearized_approaches_exact():
    state = coherent(0.5)
    prev = None
    for gt in (0.2, 0.05, 0.01):
        lin = jc_evolve(state, JcConfig(g=gt, tau=1)).normalized()
        ex = jc_evolve(state, JcConfig(g=gt, tau=1, mode=JcMode.EXACT))
        infidelity = 1 - abs(lin.overlap(ex)) ** 2
        assert infidelity < gt**2
        if prev is not None:
            assert infidelity < prev
        prev = infidelity


def test_jc_exact_is_normalized():
    out = jc_evolve(coherent(1.3), JcConfig(g=0.7, tau=1, mode=JcMode.EXACT))
    assert out.norm_sq() == pytest.approx(1, abs=1e-12)


def test_jc_single_excited_trial():
    # trial 0 of seed 0 draws u >= P_g at this tiny coupling
    rec = jc_sample(make_number_state(0, 3), JcConfig(g=1e-4, tau=1, trials=1, seed=0))
    assert (rec.n0, rec.n1) == (1, 0)
    assert rec.estimator == 0
    assert rec.relative_error == math.inf


def test_jc_all_ground_is_degenerate():
    cfg = JcConfig(g=math.pi / 2, tau=1, trials=100, mode=JcMode.EXACT)
    with pytest.raises(DegenerateStatisticsError):
        jc_sample(make_number_state(0, 3), cfg)


def test_jc_sample_statistics():
    rec = jc_sample(coherent(0.3), JcConfig(g=0.1, tau=1, trials=300_000, seed=5))
    assert rec.exact_expectation == pytest.approx(1.09, abs=1e-12)
    assert rec.estimator_expectation == pytest.approx(1.09, rel=1e-12)
    assert rec.z_score() < 5


def test_jc_efficiency_cancels():
    state = coherent(0.3)
    full = jc_sample(state, JcConfig(g=0.1, tau=1, trials=200_000, seed=1))
    lossy = jc_sample(state, JcConfig(g=0.1, tau=1, trials=200_000, seed=1, efficiency=0.6))
    assert lossy.estimator_expectation == pytest.approx(full.estimator_expectation, rel=1e-12)
    assert lossy.undetected > 0
    assert lossy.n0 + lossy.n1 + lossy.undetected == lossy.trials
    assert lossy.z_score(lossy.estimator_expectation) < 5


def test_jc_thermal_at_tail_cutoff():
    # one level past the tail cutoff the top members weigh below 1e-16 and must not trip the guard
    nbar = 0.5
    state = make_thermal_density(nbar, auto_cutoff(nbar=nbar, tail=1e-16) + 1)[0]
    p = jc_probabilities(state, JcConfig(g=0.05, tau=1))
    assert p.pg / p.pe == pytest.approx(0.05**2 * (1 + nbar), rel=1e-12)


def test_jc_needs_headroom():
    with pytest.raises(TruncationError):
        jc_evolve(make_number_state(3, 3), JcConfig(g=0.1, tau=1))


def test_jc_config_domain():
    with pytest.raises(DomainError):
        JcConfig(g=0, tau=1)
    with pytest.raises(DomainError):
        JcConfig(g=1, tau=1, efficiency=0)


# --- bias report ----------------------------------------------------------------


def test_bias_vanishes_as_coupling_shrinks():
    rows = protocol_bias_report(coherent(0.5))
    for proto in ("ndpa", "jc"):
        biases = [r.bias for r in rows if r.protocol == proto]
        assert all(b < a for a, b in zip(biases, biases[1:]))
        assert biases[-1] < 1e-2


def test_jc_vacuum_bias_closed_form():
    rows = protocol_bias_report(make_number_state(0, 4), s_grid=())
    for r in rows:
        assert r.estimator_expectation == pytest.approx(math.tan(r.param) ** 2 / r.param**2, rel=1e-13)


def test_jc_bias_grows_with_amplitude():
    gt = (0.1,)
    biases = [protocol_bias_report(coherent(a), s_grid=(), gt_grid=gt)[0].bias for a in (0.3, 1.0, 2.0)]
    assert biases[0] < biases[1] < biases[2]
