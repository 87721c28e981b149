"""Desk-scale tests for the experiment runners, presets and report writer.

Full-budget reproduction runs live in test_acceptance.py; here every runner is
exercised at a reduced scale that finishes in seconds, checking structure,
determinism and the config plumbing rather than the full-budget study numbers.
"""

import json
import os

import numpy as np
import pytest
from scipy import stats

import sgula.experiments as experiments
from sgula import (
    ExperimentSpec,
    ScadStudySpec,
    apply_overrides,
    build_spec,
    cv_select_gamma,
    emit_report,
    preset_config,
    quadratic_model,
    read_config,
    run_experiment,
    run_mog_experiment,
    run_rate_study,
    run_scad_regression,
    run_sweep,
    target_quantiles_1d,
    write_config,
)
from sgula.experiments import _draw_dataset, _n_workers

TINY_MOG = dict(kind="mog_sample", n_iters=2500, burn_in=400, n_chains=2,
                grid_size=60, run_myula=False, compare_samplers_w2=False)


# ---------------------------------------------------------------------------
# Presets and configuration plumbing

def test_all_presets_build_specs():
    for name in ("mog_k3", "mog_k5", "lambda_sweep", "beta_sweep",
                 "scad_fan", "rate_default"):
        spec = build_spec(preset_config(name))
        assert isinstance(spec, ExperimentSpec), name
    with pytest.raises(KeyError):
        preset_config("mog_k7")


def test_mog_k3_preset_values():
    spec = build_spec(preset_config("mog_k3"))
    assert spec.kind == "mog_sample"
    assert (spec.lam, spec.beta) == (1e-3, 1.0)
    assert (spec.n_iters, spec.burn_in, spec.n_chains) == (52_000, 12_000, 12)
    assert np.allclose(spec.mog.weights, [0.3, 0.4, 0.3])
    assert np.allclose(spec.mog.means, [[-2.6, 2.8], [0.0, 0.0], [2.2, -2.2]])
    assert np.allclose(spec.mog.variances, [0.60, 0.80, 0.70])
    assert spec.mog.laplace_scale == 0.15


def test_mog_k5_preset_values():
    spec = build_spec(preset_config("mog_k5"))
    assert spec.mog.n_components == 5
    assert np.allclose(spec.mog.weights, [0.18, 0.22, 0.20, 0.22, 0.18])


def test_scad_fan_preset_values():
    spec = build_spec(preset_config("scad_fan"))
    s = spec.scad
    assert (s.n_obs, s.dim, s.rho, s.a) == (60, 8, 0.5, 3.7)
    assert s.beta_star == (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
    assert len(s.gamma_grid) == 20
    assert s.gamma_grid[0] == pytest.approx(1e-3)
    assert s.gamma_grid[-1] == pytest.approx(1e1)
    assert s.penalty_scale is None and s.scale == 120.0    # 2n weighting


def test_sweep_presets_values():
    lam = build_spec(preset_config("lambda_sweep"))
    assert lam.kind == "sweep_lambda"
    assert lam.sweep_values == (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
    beta = build_spec(preset_config("beta_sweep"))
    assert beta.sweep_values == (100.0, 10.0, 5.0, 2.0, 1.0)


def test_config_round_trip(tmp_path):
    conf = preset_config("mog_k3")
    path = tmp_path / "run.cfg"
    write_config(conf, path)
    text = path.read_text()
    assert "[sampler]" in text and "n_iters = 52000" in text
    back = read_config(path)
    assert back == conf


def test_apply_overrides():
    conf = {"sampler": {"lam": "1e-3"}}
    out = apply_overrides(conf, ["sampler.lam=0.01", "experiment.seed=5"])
    assert out["sampler"]["lam"] == "0.01"
    assert out["experiment"]["seed"] == "5"
    assert conf["sampler"]["lam"] == "1e-3"     # input untouched
    with pytest.raises(ValueError):
        apply_overrides(conf, ["sampler.lam"])
    with pytest.raises(ValueError):
        apply_overrides(conf, ["lam=0.01"])


def test_build_spec_validation():
    with pytest.raises(ValueError):
        build_spec({"sampler": {"lam": "1e-3"}})          # no kind
    with pytest.raises(ValueError):
        build_spec({"experiment": {"kind": "sweep_lambda"}})  # no values
    with pytest.raises(ValueError):
        ExperimentSpec(kind="importance_sampling")


def test_penalty_scale_override():
    conf = apply_overrides(preset_config("scad_fan"), ["scad.penalty_scale=1"])
    spec = build_spec(conf)
    assert spec.scad.scale == 1.0


def test_n_workers_env(monkeypatch):
    monkeypatch.setenv("SGULA_THREADS", "3")
    assert _n_workers() == 3
    monkeypatch.setenv("SGULA_THREADS", "0")
    with pytest.raises(ValueError):
        _n_workers()
    monkeypatch.delenv("SGULA_THREADS")
    assert _n_workers() == (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Mixture study at desk scale

def test_mog_experiment_structure():
    rep = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    assert rep.kind == "mog_sample"
    m = rep.metrics["sgula"]
    for key in ("mean_abs_density_error", "max_abs_density_error",
                "kde_integral", "n_modes", "modes", "distance_to_true_means",
                "all_means_recovered", "wall_time_s"):
        assert key in m
    assert 0.8 < m["kde_integral"] <= 1.05      # box clips a little tail mass
    assert set(rep.gates) == {"modes_recovered", "density_error_below_0.02"}
    assert rep.provenance["spec"]["n_iters"] == 2500
    assert "sgula" in rep.sample_sets and "sgula" in rep.densities


def test_mog_experiment_deterministic():
    a = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    b = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    assert a.metrics["sgula"]["mean_abs_density_error"] == \
        b.metrics["sgula"]["mean_abs_density_error"]
    assert np.array_equal(a.sample_sets["sgula"].samples,
                          b.sample_sets["sgula"].samples)


def test_mog_experiment_with_baseline():
    kw = dict(TINY_MOG, run_myula=True, compare_samplers_w2=True)
    rep = run_mog_experiment(ExperimentSpec(**kw))
    assert "myula" in rep.metrics
    assert "sgula_not_worse_than_myula_x1.25" in rep.gates
    assert rep.metrics["sliced_w2_sgula_vs_myula"] >= 0


def test_mog_target_density_normalized():
    spec = ExperimentSpec(**TINY_MOG)
    axes = [np.linspace(-8, 8, 161)] * 2
    target = experiments._mog_target_on_grid(spec.mog, 1.0, axes)
    total = np.trapezoid(np.trapezoid(target, axes[1], axis=1), axes[0])
    assert total == pytest.approx(1.0, abs=0.01)
    # large beta must not underflow to an all-zero grid
    hot = experiments._mog_target_on_grid(spec.mog, 100.0, axes)
    assert np.all(np.isfinite(hot)) and hot.max() > 0


# ---------------------------------------------------------------------------
# Sweeps

def test_sweep_orders_entries_and_picks_best():
    spec = ExperimentSpec(kind="sweep_lambda", sweep_values=(1e-2, 1e-3),
                          n_iters=1500, burn_in=300, n_chains=2, grid_size=50)
    rep = run_sweep(spec, "lambda")
    assert [e["lambda"] for e in rep.metrics["entries"]] == [1e-2, 1e-3]
    errs = [e["mean_abs_density_error"] for e in rep.metrics["entries"]]
    assert rep.metrics["best_value"] == rep.metrics["entries"][int(np.argmin(errs))]["lambda"]
    assert set(rep.sample_sets) == {"lambda_0.01", "lambda_0.001"}


def test_sweep_single_value_matches_plain_run():
    spec = ExperimentSpec(kind="sweep_beta", sweep_values=(2.0,),
                          n_iters=1500, burn_in=300, n_chains=2, grid_size=50)
    rep = run_sweep(spec, "beta")
    plain = run_mog_experiment(ExperimentSpec(kind="mog_sample", beta=2.0,
                                              n_iters=1500, burn_in=300,
                                              n_chains=2, grid_size=50,
                                              run_myula=False,
                                              compare_samplers_w2=False))
    entry = rep.metrics["entries"][0]
    assert entry["mean_abs_density_error"] == \
        plain.metrics["sgula"]["mean_abs_density_error"]
    with pytest.raises(ValueError):
        run_sweep(spec, "alpha")


# ---------------------------------------------------------------------------
# Rate study

def test_target_quantiles_standard_normal():
    model = quadratic_model()
    q = target_quantiles_1d(model.eval_fn, beta=1.0, m=999)
    probs = (np.arange(999) + 0.5) / 999
    assert np.max(np.abs(q - stats.norm.ppf(probs))) < 1e-4


def test_rate_pipeline_recovers_injected_slope():
    spec = ExperimentSpec(kind="rate_study")
    rep = run_rate_study(spec, _error_fn=lambda lam: 2.0 * lam ** 0.5)
    assert rep.metrics["slope"] == pytest.approx(0.5)
    assert rep.metrics["monotone_decreasing"]
    assert rep.gates == {}        # synthetic errors never gate


def test_rate_study_needs_three_stepsizes_for_a_fit():
    spec = ExperimentSpec(kind="rate_study", rate_lambdas=(0.2, 0.1))
    rep = run_rate_study(spec, _error_fn=lambda lam: lam)
    assert "slope" not in rep.metrics
    assert len(rep.metrics["entries"]) == 2


def test_rate_study_sampled_desk_scale():
    spec = ExperimentSpec(kind="rate_study", rate_steps=100_000,
                          rate_burn_in=5_000)
    rep = run_rate_study(spec)
    assert set(rep.gates) == {"bias_monotone_in_stepsize", "slope_at_least_0.2"}
    assert all(e["w2"] > 0 for e in rep.metrics["entries"])


# ---------------------------------------------------------------------------
# SCAD study at desk scale

def _tiny_scad(**kw):
    base = dict(n_reps=2, chain_iters=400, cv_chain_iters=150,
                gamma_grid=(0.01, 0.3, 2.0), seed=0)
    base.update(kw)
    return ScadStudySpec(**base)


def test_draw_dataset_shapes_and_rank():
    spec = _tiny_scad()
    data = _draw_dataset(spec, np.random.default_rng(0))
    assert data.X.shape == (60, 8)
    assert data.y.shape == (60,)
    assert np.linalg.matrix_rank(data.X) == 8
    assert np.allclose(data.sigma, spec.covariance)
    assert spec.covariance[0, 3] == pytest.approx(0.5 ** 3)


def test_cv_select_gamma_trivial_grids():
    spec = _tiny_scad(gamma_grid=(0.7,))
    data = _draw_dataset(spec, np.random.default_rng(1))
    assert cv_select_gamma(data, "lasso", spec, seed=0) == 0.7
    dup = _tiny_scad(gamma_grid=(0.7, 0.7, 0.7))
    assert cv_select_gamma(data, "lasso", dup, seed=0) == 0.7


def test_cv_rejects_crushing_penalty():
    # with a clean strong signal, a penalty large enough to zero every
    # coefficient must lose the cross-validation to a near-OLS penalty
    spec = _tiny_scad(gamma_grid=(1e-4, 1e4), cauchy_fraction=0.0)
    data = _draw_dataset(spec, np.random.default_rng(2))
    for penalty in ("scad", "lasso"):
        assert cv_select_gamma(data, penalty, spec, seed=3) == pytest.approx(1e-4)


def test_scad_study_structure():
    rep = run_scad_regression(_tiny_scad())
    m = rep.metrics
    assert [r["rep"] for r in m["replications"]] == [0, 1]
    for key in ("mrme_scad", "mrme_lasso", "mrme_oracle",
                "median_gamma_scad", "median_gamma_lasso"):
        assert key in m
    assert m["mrme_scad"] == pytest.approx(
        float(np.median([r["rme_scad"] for r in m["replications"]])))
    assert set(rep.gates) == {"mrme_scad_in_band", "mrme_lasso_in_band",
                              "mrme_oracle_in_band", "scad_beats_lasso"}
    again = run_scad_regression(_tiny_scad())
    assert again.metrics["replications"] == m["replications"]


def test_scad_study_spec_validation():
    with pytest.raises(ValueError):
        ScadStudySpec(rho=1.0)
    with pytest.raises(ValueError):
        ScadStudySpec(beta_star=(1.0, 2.0))
    with pytest.raises(ValueError):
        ScadStudySpec(gamma_grid=())
    with pytest.raises(ValueError):
        ScadStudySpec(estimator="posterior-mode")


# ---------------------------------------------------------------------------
# Dispatcher and report emission

def test_run_experiment_dispatch():
    rep = run_experiment(ExperimentSpec(**TINY_MOG))
    assert rep.kind == "mog_sample"
    rate = run_experiment(ExperimentSpec(kind="rate_study",
                                         rate_lambdas=(0.2, 0.1),
                                         rate_steps=5_000, rate_burn_in=500))
    assert rate.kind == "rate_study"


def test_emit_report_artifacts_and_determinism(tmp_path):
    rep = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    out_a = tmp_path / "a"
    manifest = emit_report(rep, out_a)
    names = sorted(os.path.basename(e["path"]) for e in manifest)
    assert names == ["density_sgula.csv", "density_sgula.svg",
                     "report.json", "samples_sgula.csv"]
    for entry in manifest:
        assert os.path.exists(entry["path"])
        assert not os.path.exists(entry["path"] + ".tmp")
        import hashlib
        with open(entry["path"], "rb") as f:
            assert hashlib.sha256(f.read()).hexdigest() == entry["sha256"]
    with open(out_a / "report.json") as f:
        back = json.load(f)
    assert back["kind"] == "mog_sample"
    assert set(back) == {"kind", "metrics", "gates", "provenance"}

    # a rerun of the same spec emits byte-identical artifacts (figures too)
    rep2 = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    # wall-clock readings are the only legitimately nondeterministic fields
    rep2.provenance["wall_time_s"] = rep.provenance["wall_time_s"]
    rep2.metrics["sgula"]["wall_time_s"] = rep.metrics["sgula"]["wall_time_s"]
    manifest2 = emit_report(rep2, tmp_path / "b")
    assert [e["sha256"] for e in manifest] == [e["sha256"] for e in manifest2]


def test_sample_csv_header_matches_contract(tmp_path):
    rep = run_mog_experiment(ExperimentSpec(**TINY_MOG))
    emit_report(rep, tmp_path)
    first = (tmp_path / "samples_sgula.csv").read_text().split("\n", 1)[0]
    assert first == "chain,iter,x1,x2"
    dfirst = (tmp_path / "density_sgula.csv").read_text().split("\n", 1)[0]
    assert dfirst == "x1,x2,density"


def test_study_report_passed_property():
    rep = run_rate_study(ExperimentSpec(kind="rate_study"),
                         _error_fn=lambda lam: lam)
    assert rep.passed                           # no gates -> vacuously true
    rep.gates = {"a": True, "b": False}
    assert not rep.passed
