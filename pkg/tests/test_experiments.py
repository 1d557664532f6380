import numpy as np
import pytest

from mimocrb.errors import ConfigError
from mimocrb.experiments import (
    METHODS,
    MODELS,
    ScenarioConfig,
    draw_trial_parameters,
    evaluate_trial,
    run_single,
    sweep_layers,
    sweep_ring,
    sweep_snr,
)
from mimocrb.geometry import build_ucya, build_ula

FAST = dict(num_tx=2, num_paths=2, num_subcarriers=16, num_pilots=4, num_data=8)


def test_config_validation():
    with pytest.raises(ConfigError):
        ScenarioConfig(num_pilots=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(trials=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(derivative_convention="something")
    with pytest.raises(ConfigError):
        ScenarioConfig(num_data=-1)


def test_noise_variance_from_snr():
    assert ScenarioConfig(snr_db=10.0).noise_variance == pytest.approx(0.1)
    assert ScenarioConfig(snr_db=0.0).noise_variance == pytest.approx(1.0)


def test_trial_draws_depend_only_on_seed_and_index():
    base = ScenarioConfig(trials=3, master_seed=42, **FAST)
    other_snr = ScenarioConfig(trials=3, master_seed=42, snr_db=-3.0, **FAST)
    for t in range(3):
        a = draw_trial_parameters(base, t)
        b = draw_trial_parameters(other_snr, t)
        np.testing.assert_array_equal(a.gains, b.gains)
        np.testing.assert_array_equal(a.zeniths, b.zeniths)
    different_seed = ScenarioConfig(trials=3, master_seed=43, **FAST)
    assert not np.array_equal(draw_trial_parameters(base, 0).gains,
                              draw_trial_parameters(different_seed, 0).gains)


def test_run_single_deterministic():
    config = ScenarioConfig(trials=4, master_seed=7, **FAST)
    geom = build_ucya(4, 2, 0.5, 0.5)
    a = run_single(config, geom)
    b = run_single(config, geom)
    assert a.means == b.means
    for key in a.per_trial:
        np.testing.assert_array_equal(a.per_trial[key], b.per_trial[key])


def test_run_single_parallel_matches_serial():
    config = ScenarioConfig(trials=4, master_seed=11, **FAST)
    geom = build_ula(6, 0.5)
    serial = run_single(config, geom, jobs=1)
    parallel = run_single(config, geom, jobs=2)
    assert serial.means == parallel.means
    for key in serial.per_trial:
        np.testing.assert_array_equal(serial.per_trial[key],
                                      parallel.per_trial[key])


def test_semi_blind_never_worse_per_trial():
    config = ScenarioConfig(trials=6, master_seed=3, **FAST)
    for geom in (build_ula(6, 0.5), build_ucya(4, 2, 0.5, 0.5)):
        result = run_single(config, geom)
        for model in MODELS:
            op = result.per_trial[(model, "OP")]
            sb = result.per_trial[(model, "SB")]
            assert np.all(sb <= op * (1 + 1e-12))


def test_unstructured_pilot_bound_closed_form():
    # Orthogonal pilots make the pilot information a scaled identity, so the
    # per-coefficient bound is noise_variance / (K * K_p) for every trial.
    config = ScenarioConfig(trials=3, master_seed=5, snr_db=7.0, **FAST)
    geom = build_ula(5, 0.5)
    result = run_single(config, geom)
    expected = config.noise_variance / (config.num_subcarriers * config.num_pilots)
    per_trial = result.per_trial[("unstructured", "OP")]
    np.testing.assert_allclose(per_trial, expected, rtol=1e-12)


def test_unstructured_pilot_bound_geometry_independent():
    config = ScenarioConfig(trials=4, master_seed=9, **FAST)
    ula = run_single(config, build_ula(8, 0.5))
    ucya = run_single(config, build_ucya(4, 2, 0.5, 0.5))
    a = ula.per_trial[("unstructured", "OP")]
    b = ucya.per_trial[("unstructured", "OP")]
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_deep_noise_makes_data_term_negligible():
    config = ScenarioConfig(trials=3, master_seed=13, snr_db=-40.0, **FAST)
    result = run_single(config, build_ula(6, 0.5))
    for model in MODELS:
        op = result.means[(model, "OP")]
        sb = result.means[(model, "SB")]
        assert sb <= op
        assert (op - sb) / op < 0.01


def test_sum_reduction_scales_by_coefficient_count():
    geom = build_ula(5, 0.5)
    normalized = run_single(ScenarioConfig(trials=2, master_seed=6, **FAST), geom)
    summed = run_single(ScenarioConfig(trials=2, master_seed=6,
                                       scalar_reduction="sum", **FAST), geom)
    n = FAST["num_tx"] * 5
    for key in normalized.means:
        np.testing.assert_allclose(summed.per_trial[key],
                                   normalized.per_trial[key] * n, rtol=1e-15)


def test_structured_bound_below_unstructured_on_average():
    config = ScenarioConfig(trials=5, master_seed=2, snr_db=10.0)
    result = run_single(config, build_ucya(8, 3, 0.5, 0.5))
    assert result.means[("structured", "OP")] < result.means[("unstructured", "OP")]


def test_degenerate_trials_skipped_and_counted(monkeypatch):
    import mimocrb.experiments as exp
    from mimocrb.errors import DegenerateInformationError

    real_evaluate = exp.evaluate_trial

    def flaky(config, geometry, params):
        if flaky.calls == 0:
            flaky.calls += 1
            raise DegenerateInformationError("synthetic")
        flaky.calls += 1
        return real_evaluate(config, geometry, params)

    flaky.calls = 0
    monkeypatch.setattr(exp, "evaluate_trial", flaky)
    config = ScenarioConfig(trials=3, master_seed=1, **FAST)
    result = exp.run_single(config, build_ula(4, 0.5))
    assert result.trials_used == 2

    def always_degenerate(config, geometry, params):
        raise DegenerateInformationError("synthetic")

    monkeypatch.setattr(exp, "evaluate_trial", always_degenerate)
    with pytest.raises(DegenerateInformationError):
        exp.run_single(config, build_ula(4, 0.5))


def test_draw_stream_canary():
    # Frozen first draws for a pinned seed: fires if the random-stream
    # layout (or numpy's generator algorithms) ever changes, which would
    # silently break the byte-reproducibility contract of seeded runs.
    params = draw_trial_parameters(ScenarioConfig(trials=1, master_seed=0, **FAST), 0)
    assert params.gains[0, 0] == pytest.approx(
        1.0208436640047254 + 0.6034320504565035j, rel=1e-12)
    assert params.zeniths[0, 0] == pytest.approx(-0.7266606833506571, rel=1e-12)
    assert params.azimuths[0, 0] == pytest.approx(1.2907711195545488, rel=1e-12)


def test_evaluate_trial_rank_bookkeeping():
    config = ScenarioConfig(trials=1, master_seed=1, **FAST)
    geom = build_ula(6, 0.5)
    params = draw_trial_parameters(config, 0)
    outcome = evaluate_trial(config, geom, params)
    assert 0 < outcome.jacobian_rank <= 4 * config.num_tx * config.num_paths
    assert outcome.structured_rank_op <= outcome.jacobian_rank
    assert set(outcome.values) == {(m, meth) for m in MODELS for meth in METHODS}


class TestSweeps:
    def test_snr_sweep_shape_and_order(self):
        config = ScenarioConfig(trials=2, master_seed=1, **FAST)
        result = sweep_snr(config, (-5.0, 5.0), ula_elements=8, ucya_ring=4,
                           ucya_layers=2)
        assert len(result.rows) == 2 * 2 * 2 * 2
        assert {row.geometry for row in result.rows} == {"ULA", "UCyA"}
        values = sorted({row.sweep_value for row in result.rows})
        assert values == [-5.0, 5.0]

    def test_snr_sweep_monotone_with_paired_draws(self):
        config = ScenarioConfig(trials=3, master_seed=8, **FAST)
        result = sweep_snr(config, (-10.0, 0.0, 10.0, 20.0), ula_elements=8,
                           ucya_ring=4, ucya_layers=2)
        series = {}
        for row in result.rows:
            series.setdefault((row.geometry, row.model, row.method), []).append(
                (row.sweep_value, row.mean_crb))
        assert len(series) == 8
        for key, points in series.items():
            points.sort()
            values = [v for _, v in points]
            assert all(a >= b for a, b in zip(values, values[1:])), key

    def test_layer_sweep_matches_element_counts(self):
        config = ScenarioConfig(trials=2, master_seed=4, **FAST)
        result = sweep_layers(config, (2, 3), ucya_ring=4)
        unstructured = {}
        for row in result.rows:
            if row.model == "unstructured" and row.method == "OP":
                unstructured.setdefault(row.sweep_value, {})[row.geometry] = row.mean_crb
        for value, per_geom in unstructured.items():
            assert per_geom["ULA"] == pytest.approx(per_geom["UCyA"], rel=1e-12)

    def test_ring_sweep_shape(self):
        config = ScenarioConfig(trials=2, master_seed=4, **FAST)
        result = sweep_ring(config, (4, 6), ucya_layers=2)
        assert len(result.rows) == 2 * 2 * 4
        assert result.sweep_var == "n_uca"

    def test_empty_sweep_rejected(self):
        config = ScenarioConfig(trials=2, **FAST)
        with pytest.raises(ConfigError):
            sweep_snr(config, ())

    def test_sorted_rows_deterministic(self):
        config = ScenarioConfig(trials=2, master_seed=4, **FAST)
        result = sweep_layers(config, (3, 2), ucya_ring=4)
        rows = result.sorted_rows()
        keys = [(r.sweep_value, r.geometry, r.model, r.method) for r in rows]
        assert keys == sorted(keys)
