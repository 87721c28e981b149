"""Experiment runners and artifact plumbing.

Covers the mixture-of-Gaussians sampling study, the stepsize and inverse
temperature sweeps, the SCAD-vs-LASSO robust regression benchmark and a
discretization-rate study, together with preset/config handling and a
deterministic report writer (JSON + CSV + SVG).
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import json
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import __version__ as _pkg_version
from .metrics import (DensityEstimate, kde_silverman, loglog_slope, mode_detect,
                      relative_model_error, sliced_w2, wasserstein_1d)
from .potentials import (MoGLaplaceSpec, RegressionData, ScadSpec,
                         _mog_log_mixture, abs_plus_quadratic_model,
                         build_regression_potential, mog_laplace_model)
from .sampler import InitLaw, SampleSet, SamplerConfig, posterior_summary, run_parallel_chains

THREADS_ENV = "SGULA_THREADS"


def _n_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Study parameter containers

def _default_mog_k3() -> MoGLaplaceSpec:
    return MoGLaplaceSpec(
        weights=[0.3, 0.4, 0.3],
        means=[[-2.6, 2.8], [0.0, 0.0], [2.2, -2.2]],
        variances=[0.60, 0.80, 0.70],
        laplace_scale=0.15,
    )


def _default_mog_k5() -> MoGLaplaceSpec:
    return MoGLaplaceSpec(
        weights=[0.18, 0.22, 0.20, 0.22, 0.18],
        means=[[-3.0, 2.8], [-1.2, 0.8], [0.8, -0.4], [2.2, -2.0], [3.2, 2.4]],
        variances=[0.55, 0.65, 0.50, 0.70, 0.60],
        laplace_scale=0.15,
    )


@dataclasses.dataclass
class ScadStudySpec:
    """Parameters of the sparse robust-regression benchmark."""

    n_obs: int = 60
    dim: int = 8
    rho: float = 0.5
    beta_star: tuple = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)
    noise_normal_sd: float = 1.0
    cauchy_fraction: float = 0.1
    a: float = 3.7
    n_reps: int = 100
    chain_iters: int = 7500
    cv_folds: int = 5
    cv_chain_iters: int = 1250
    gamma_grid: tuple = tuple(np.geomspace(1e-3, 1e1, 20))
    optimizer_beta: float = 100.0
    estimator: str = "ergodic-mean"
    lam: float = 1e-3
    penalty_scale: Optional[float] = None   # None -> 2 n_obs (classical weighting)
    seed: int = 0

    def __post_init__(self):
        if self.n_obs < 2 or self.dim < 1 or self.n_reps < 1:
            raise ValueError("n_obs, dim and n_reps must be positive")
        if not (0 <= self.rho < 1):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if len(self.beta_star) != self.dim:
            raise ValueError("beta_star length must equal dim")
        if self.cv_folds < 2:
            raise ValueError("cross-validation needs at least two folds")
        if len(self.gamma_grid) == 0 or min(self.gamma_grid) <= 0:
            raise ValueError("gamma_grid must be nonempty and positive")
        if self.estimator not in ("ergodic-mean", "last-iterate"):
            raise ValueError(f"unknown estimator {self.estimator!r}")

    @property
    def covariance(self) -> np.ndarray:
        idx = np.arange(self.dim)
        return self.rho ** np.abs(idx[:, None] - idx[None, :])

    @property
    def scale(self) -> float:
        # the squared loss grows like n while the penalty is O(1) per
        # coordinate; weighting the penalty by 2n restores the classical
        # penalized least-squares balance so the grid value gamma plays the
        # usual per-observation regularization role
        return 2.0 * self.n_obs if self.penalty_scale is None else float(self.penalty_scale)


@dataclasses.dataclass
class ExperimentSpec:
    """One experiment: kind tag plus the knobs its runner reads."""

    kind: str
    mog: Optional[MoGLaplaceSpec] = None
    lam: float = 1e-3
    beta: float = 1.0
    n_iters: int = 52_000
    burn_in: int = 12_000
    n_chains: int = 12
    seed: int = 0
    grid_size: int = 200
    run_myula: bool = True
    compare_samplers_w2: bool = True
    sweep_values: tuple = ()
    rate_lambdas: tuple = (0.2, 0.1, 0.05, 0.025)
    rate_steps: int = 1_000_000
    rate_burn_in: int = 50_000
    scad: Optional[ScadStudySpec] = None

    _KINDS = ("mog_sample", "sweep_lambda", "sweep_beta", "scad_regression", "rate_study")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {self._KINDS}")
        if self.kind.startswith("sweep") and len(self.sweep_values) == 0:
            raise ValueError(f"{self.kind} needs a nonempty sweep value list")
        if self.kind in ("mog_sample", "sweep_lambda", "sweep_beta") and self.mog is None:
            object.__setattr__(self, "mog", _default_mog_k3())
        if self.kind == "scad_regression" and self.scad is None:
            self.scad = ScadStudySpec(seed=self.seed)


@dataclasses.dataclass
class StudyReport:
    """Runner output: metrics plus the artifacts the writer can persist."""

    kind: str
    metrics: dict
    provenance: dict
    gates: dict = dataclasses.field(default_factory=dict)
    sample_sets: dict = dataclasses.field(default_factory=dict)   # name -> SampleSet
    densities: dict = dataclasses.field(default_factory=dict)     # name -> DensityEstimate

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def as_dict(self) -> dict:
        return {"kind": self.kind, "metrics": self.metrics,
                "gates": {k: bool(v) for k, v in self.gates.items()},
                "provenance": self.provenance}


def _provenance(spec_echo: dict, seed: int, t0: float) -> dict:
    return {
        "spec": spec_echo,
        "master_seed": int(seed),
        "version": f"sgula-{_pkg_version}",
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }


# ---------------------------------------------------------------------------
# Mixture-of-Gaussians sampling study

def _mog_init_box(mog: MoGLaplaceSpec) -> InitLaw:
    pad = 2.0 * float(np.max(mog.variances))
    return InitLaw(kind="uniform_box",
                   low=mog.means.min(axis=0) - pad,
                   high=mog.means.max(axis=0) + pad)


def _mog_target_on_grid(mog: MoGLaplaceSpec, beta: float, axes: list) -> np.ndarray:
    """Normalized target density e^{-beta u}/Z evaluated on the grid.

    Z is computed by trapezoidal quadrature on a wide fine grid; the potential
    grows at least linearly so the tail truncation error is negligible.
    """
    reach = float(np.max(np.abs(mog.means))) + 12.0 * float(np.sqrt(np.max(mog.variances)))
    fine = [np.linspace(-reach, reach, 1201) for _ in range(mog.dim)]

    def log_density(grid_axes):
        mesh = np.meshgrid(*grid_axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        log_mix, _, _ = _mog_log_mixture(mog, pts)
        return beta * (log_mix - mog.laplace_scale * np.sum(np.abs(pts), axis=-1))

    # work on the log scale: large beta values underflow the plain density
    ref = float(log_density([np.zeros(1)] * mog.dim).ravel()[0])
    ref = max(ref, float(np.max(log_density(axes))))
    z = np.exp(log_density(fine) - ref)
    for ax in reversed(fine):
        z = integrate.trapezoid(z, ax, axis=-1)
    return np.exp(log_density(axes) - ref) / float(z)


def _mog_one_sampler(model, spec: ExperimentSpec, method: str) -> tuple:
    cfg = SamplerConfig(lam=spec.lam, beta=spec.beta, n_iters=spec.n_iters,
                        burn_in=spec.burn_in, n_chains=spec.n_chains,
                        seed=spec.seed, init=_mog_init_box(spec.mog))
    ss = run_parallel_chains(model, cfg, method=method)
    box = _mog_init_box(spec.mog)
    axes = [np.linspace(float(box.low[k]), float(box.high[k]), spec.grid_size)
            for k in range(spec.mog.dim)]
    est = kde_silverman(ss.pooled, axes=axes)
    return ss, est


def _mode_report(pooled: np.ndarray, axes: list, mog: MoGLaplaceSpec) -> dict:
    # mode locations come from a doubled-bandwidth KDE: Silverman's rule is
    # tuned to independent samples and undersmooths an autocorrelated chain,
    # which makes satellite peaks jitter by more than the recovery tolerance
    det = kde_silverman(pooled, axes=axes, bandwidth_scale=2.0)
    modes = mode_detect(det, min_separation=1.0)
    dists = [float(min(np.linalg.norm(np.asarray(mode) - mu) for mode in modes))
             if modes else math.inf for mu in mog.means]
    return {
        "n_modes": len(modes),
        "modes": [np.asarray(m).tolist() for m in modes],
        "distance_to_true_means": dists,
        "all_means_recovered": bool(modes) and max(dists) < 0.5,
    }


def run_mog_experiment(spec: ExperimentSpec) -> StudyReport:
    """Sample the mixture-with-prior target and compare the KDE to the truth.

    Runs SG-ULA (and optionally the proximal baseline), pools the chains,
    detects modes and reports the mean absolute deviation of the pooled KDE
    from the analytically normalized density on a shared grid.
    """
    t0 = time.perf_counter()
    mog = spec.mog
    model = mog_laplace_model(mog)

    sample_sets, densities, metrics = {}, {}, {}
    methods = ["sgula"] + (["myula"] if spec.run_myula else [])
    target = None
    for method in methods:
        ss, est = _mog_one_sampler(model, spec, method)
        sample_sets[method] = ss
        densities[method] = est
        if target is None:
            target = _mog_target_on_grid(mog, spec.beta, est.axes)
        metrics[method] = {
            "mean_abs_density_error": float(np.mean(np.abs(est.values - target))),
            "max_abs_density_error": float(np.max(np.abs(est.values - target))),
            "kde_integral": est.integral(),
            "wall_time_s": ss.wall_time,
            **_mode_report(ss.pooled, est.axes, mog),
        }

    gates = {
        "modes_recovered": metrics["sgula"]["all_means_recovered"],
        "density_error_below_0.02": metrics["sgula"]["mean_abs_density_error"] < 0.02,
    }
    if spec.run_myula:
        gates["sgula_not_worse_than_myula_x1.25"] = (
            metrics["sgula"]["mean_abs_density_error"]
            <= 1.25 * metrics["myula"]["mean_abs_density_error"])
        if spec.compare_samplers_w2:
            a = sample_sets["sgula"].pooled
            b = sample_sets["myula"].pooled
            sub = min(len(a), len(b), 20_000)
            metrics["sliced_w2_sgula_vs_myula"] = sliced_w2(a[:sub], b[:sub], seed=spec.seed)

    echo = {"kind": spec.kind, "lam": spec.lam, "beta": spec.beta,
            "n_iters": spec.n_iters, "burn_in": spec.burn_in,
            "n_chains": spec.n_chains, "grid_size": spec.grid_size,
            "mixture": {"weights": mog.weights.tolist(), "means": mog.means.tolist(),
                        "variances": mog.variances.tolist(),
                        "laplace_scale": mog.laplace_scale}}
    return StudyReport(kind=spec.kind, metrics=metrics, gates=gates,
                       provenance=_provenance(echo, spec.seed, t0),
                       sample_sets=sample_sets, densities=densities)


def run_sweep(spec: ExperimentSpec, axis: str) -> StudyReport:
    """Repeat the mixture experiment along a stepsize or temperature sweep.

    Produces one entry per swept value, in the given order, summarizing the
    detected mode count and density error at each setting.
    """
    if axis not in ("lambda", "beta"):
        raise ValueError(f"sweep axis must be 'lambda' or 'beta', got {axis!r}")
    t0 = time.perf_counter()
    entries, sample_sets, densities = [], {}, {}
    for v in spec.sweep_values:
        sub = dataclasses.replace(spec, kind="mog_sample", run_myula=False,
                                  compare_samplers_w2=False)
        if axis == "lambda":
            sub.lam = float(v)
        else:
            sub.beta = float(v)
        rep = run_mog_experiment(sub)
        m = rep.metrics["sgula"]
        entries.append({axis: float(v),
                        "n_modes": m["n_modes"],
                        "mean_abs_density_error": m["mean_abs_density_error"],
                        "all_means_recovered": m["all_means_recovered"]})
        tag = f"{axis}_{v:g}"
        sample_sets[tag] = rep.sample_sets["sgula"]
        densities[tag] = rep.densities["sgula"]
    best = min(entries, key=lambda e: e["mean_abs_density_error"])
    metrics = {"axis": axis, "entries": entries, "best_value": best[axis]}
    echo = {"kind": spec.kind, "axis": axis, "values": [float(v) for v in spec.sweep_values],
            "n_iters": spec.n_iters, "burn_in": spec.burn_in, "n_chains": spec.n_chains}
    return StudyReport(kind=spec.kind, metrics=metrics,
                       provenance=_provenance(echo, spec.seed, t0),
                       sample_sets=sample_sets, densities=densities)


# ---------------------------------------------------------------------------
# Discretization-rate study

def target_quantiles_1d(eval_fn: Callable, beta: float, m: int,
                        reach: float = 40.0, grid: int = 2 ** 20) -> np.ndarray:
    """Quantiles of pi propto e^{-beta u} on the line by CDF inversion.

    The CDF comes from trapezoidal quadrature of e^{-beta u} on a dense grid
    over [-reach, reach]; dissipativity makes the truncated tails negligible.
    """
    x = np.linspace(-reach, reach, grid + 1)
    logp = -beta * np.asarray(eval_fn(x[:, None]), dtype=float).ravel()
    p = np.exp(logp - logp.max())
    cdf = integrate.cumulative_trapezoid(p, x, initial=0.0)
    cdf /= cdf[-1]
    probs = (np.arange(m) + 0.5) / m
    return np.interp(probs, cdf, x)


def run_rate_study(spec: ExperimentSpec,
                   _error_fn: Optional[Callable[[float], float]] = None) -> StudyReport:
    """Stationary W2 bias against stepsize for a 1D non-smooth target.

    For each stepsize a long post-burn-in chain is compared to quadrature
    quantiles of the target; a log-log line is fitted when at least three
    distinct stepsizes are given.  ``_error_fn`` substitutes synthetic errors
    for the sampled ones, which exercises the fitting pipeline in isolation.
    """
    t0 = time.perf_counter()
    model = abs_plus_quadratic_model()
    lambdas = [float(v) for v in spec.rate_lambdas]
    if not lambdas:
        raise ValueError("rate study needs at least one stepsize")

    errors, per_lam = [], []
    n_q = 100_000
    quant = None if _error_fn else target_quantiles_1d(model.eval_fn, spec.beta, n_q)
    for lam in lambdas:
        if _error_fn is not None:
            w2 = float(_error_fn(lam))
        else:
            cfg = SamplerConfig(lam=lam, beta=spec.beta,
                                n_iters=spec.rate_steps + spec.rate_burn_in,
                                burn_in=spec.rate_burn_in, seed=spec.seed)
            ss = run_parallel_chains(model, cfg)
            w2 = wasserstein_1d(ss.pooled.ravel(), quant, order=2)
        errors.append(w2)
        per_lam.append({"lam": lam, "w2": w2})

    metrics = {"entries": per_lam, "monotone_decreasing":
               bool(all(errors[i] > errors[i + 1] for i in range(len(errors) - 1)))}
    if len(set(lambdas)) >= 3:
        fit = loglog_slope(lambdas, errors)
        metrics["slope"] = fit.slope
        metrics["intercept"] = fit.intercept
        metrics["r_squared"] = fit.r_squared
    echo = {"kind": spec.kind, "lambdas": lambdas, "beta": spec.beta,
            "steps": spec.rate_steps, "burn_in": spec.rate_burn_in}
    gates = {}
    if "slope" in metrics and _error_fn is None:
        gates = {"bias_monotone_in_stepsize": metrics["monotone_decreasing"],
                 "slope_at_least_0.2": metrics["slope"] >= 0.2}
    return StudyReport(kind="rate_study", metrics=metrics, gates=gates,
                       provenance=_provenance(echo, spec.seed, t0))


# ---------------------------------------------------------------------------
# SCAD vs LASSO robust regression

def _toeplitz_chol(spec: ScadStudySpec) -> np.ndarray:
    return np.linalg.cholesky(spec.covariance)


def _draw_dataset(spec: ScadStudySpec, rng: np.random.Generator) -> RegressionData:
    chol = _toeplitz_chol(spec)
    X = rng.standard_normal((spec.n_obs, spec.dim)) @ chol.T
    eps = spec.noise_normal_sd * rng.standard_normal(spec.n_obs)
    heavy = rng.random(spec.n_obs) < spec.cauchy_fraction
    eps[heavy] = rng.standard_cauchy(int(heavy.sum()))
    beta_star = np.asarray(spec.beta_star, dtype=float)
    y = X @ beta_star + eps
    return RegressionData(X=X, y=y, beta_star=beta_star, sigma=spec.covariance)


def _fit_chain(data: RegressionData, penalty: str, gamma: float, spec: ScadStudySpec,
               n_iters: int, seed: int, init_point: np.ndarray) -> np.ndarray:
    pen_spec = ScadSpec(a=spec.a, gamma=gamma) if penalty == "scad" else gamma
    model = build_regression_potential(data, penalty, pen_spec, scale=spec.scale)
    cfg = SamplerConfig(lam=spec.lam, beta=spec.optimizer_beta, n_iters=n_iters,
                        burn_in=n_iters // 5, seed=seed,
                        init=InitLaw(kind="point", point=init_point))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")          # stepsize is a tuning choice here
        ss = run_parallel_chains(model, cfg)
    return posterior_summary(ss, mode=spec.estimator)


def cv_select_gamma(data: RegressionData, penalty: str, spec: ScadStudySpec,
                    seed: int) -> float:
    """K-fold cross-validation over the penalty grid; ties take the smaller value.

    Each candidate is scored by the mean held-out residual sum of squares of
    the estimator fitted on the training folds with truncated chains.
    """
    grid = sorted(set(float(g) for g in spec.gamma_grid))
    if len(grid) == 1:
        return grid[0]
    rng = np.random.default_rng([seed, 7])
    n = data.n
    fold_size = n // spec.cv_folds
    if fold_size < data.dim:
        warnings.warn(f"cross-validation folds of size {fold_size} are smaller than "
                      f"the dimension {data.dim}", stacklevel=2)
    perm = rng.permutation(n)
    folds = np.array_split(perm, spec.cv_folds)

    beta_ols, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    best_gamma, best_score = grid[0], math.inf
    for gamma in grid:
        score = 0.0
        for f, test_idx in enumerate(folds):
            train_idx = np.setdiff1d(perm, test_idx)
            train = RegressionData(X=data.X[train_idx], y=data.y[train_idx])
            bh = _fit_chain(train, penalty, gamma, spec, spec.cv_chain_iters,
                            seed=seed * 1000 + f, init_point=beta_ols)
            r = data.y[test_idx] - data.X[test_idx] @ bh
            score += float(r @ r)
        score /= spec.cv_folds
        if score < best_score:                    # strict: ties keep the smaller gamma
            best_score, best_gamma = score, gamma
    return best_gamma


def _one_replication(args) -> dict:
    spec, rep = args
    beta_star = np.asarray(spec.beta_star, dtype=float)
    support = np.flatnonzero(beta_star)
    for retry in range(10):
        rng = np.random.default_rng([spec.seed, rep, retry])
        data = _draw_dataset(spec, rng)
        if np.linalg.matrix_rank(data.X) == spec.dim:
            break
    else:
        raise RuntimeError(f"replication {rep}: could not draw a full-rank design")

    beta_ols, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    beta_oracle = np.zeros(spec.dim)
    beta_oracle[support], *_ = np.linalg.lstsq(data.X[:, support], data.y, rcond=None)

    out = {"rep": rep, "retries": retry}
    for penalty in ("scad", "lasso"):
        gamma = cv_select_gamma(data, penalty, spec, seed=spec.seed * 100_000 + rep)
        bh = _fit_chain(data, penalty, gamma, spec, spec.chain_iters,
                        seed=spec.seed * 100_000 + rep + 50_000, init_point=beta_ols)
        me, rme = relative_model_error(bh, beta_star, spec.covariance, beta_ols)
        out[f"gamma_{penalty}"] = gamma
        out[f"me_{penalty}"] = me
        out[f"rme_{penalty}"] = rme
    me_o, rme_o = relative_model_error(beta_oracle, beta_star, spec.covariance, beta_ols)
    out["me_oracle"] = me_o
    out["rme_oracle"] = rme_o
    return out


def run_scad_regression(spec: ScadStudySpec) -> StudyReport:
    """Replicate the sparse-regression benchmark and report median RMEs.

    The noise has a Cauchy component, so only medians across replications are
    meaningful; per-replication rows are kept for recomputation.
    """
    t0 = time.perf_counter()
    jobs = [(spec, rep) for rep in range(spec.n_reps)]
    workers = min(_n_workers(), spec.n_reps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_one_replication, jobs, chunksize=1))
    else:
        rows = [_one_replication(j) for j in jobs]
    rows.sort(key=lambda r: r["rep"])

    mrme = {k: float(np.median([r[f"rme_{k}"] for r in rows]))
            for k in ("scad", "lasso", "oracle")}
    metrics = {
        "replications": rows,
        "mrme_scad": mrme["scad"],
        "mrme_lasso": mrme["lasso"],
        "mrme_oracle": mrme["oracle"],
        "median_gamma_scad": float(np.median([r["gamma_scad"] for r in rows])),
        "median_gamma_lasso": float(np.median([r["gamma_lasso"] for r in rows])),
    }
    gates = {
        "mrme_scad_in_band": 0.19 <= mrme["scad"] <= 0.49,
        "mrme_lasso_in_band": 0.48 <= mrme["lasso"] <= 0.78,
        "mrme_oracle_in_band": 0.15 <= mrme["oracle"] <= 0.45,
        "scad_beats_lasso": mrme["scad"] < mrme["lasso"],
    }
    echo = dataclasses.asdict(spec)
    echo["gamma_grid"] = [float(g) for g in spec.gamma_grid]
    echo["beta_star"] = [float(v) for v in spec.beta_star]
    return StudyReport(kind="scad_regression", metrics=metrics, gates=gates,
                       provenance=_provenance(echo, spec.seed, t0))


# ---------------------------------------------------------------------------
# Presets and config files

def preset_config(name: str) -> dict:
    """Named defaults as a {section: {key: value}} string mapping."""
    mog3 = _default_mog_k3()
    mog5 = _default_mog_k5()

    def mog_section(m):
        return {
            "weights": " ".join(f"{w:g}" for w in m.weights),
            "means": "; ".join(" ".join(f"{v:g}" for v in row) for row in m.means),
            "variances": " ".join(f"{v:g}" for v in m.variances),
            "laplace_scale": f"{m.laplace_scale:g}",
        }

    sampler = {"lam": "1e-3", "beta": "1", "n_iters": "52000",
               "burn_in": "12000", "n_chains": "12"}
    presets = {
        "mog_k3": {"experiment": {"kind": "mog_sample", "seed": "0"},
                   "sampler": dict(sampler), "mog": mog_section(mog3)},
        "mog_k5": {"experiment": {"kind": "mog_sample", "seed": "0"},
                   "sampler": dict(sampler), "mog": mog_section(mog5)},
        # the temperature ladder is kept strictly decreasing and distinct;
        # 10 fills the decade between 100 and 5
        "lambda_sweep": {"experiment": {"kind": "sweep_lambda", "seed": "0"},
                         "sampler": dict(sampler), "mog": mog_section(mog3),
                         "sweep": {"values": "1e-1 1e-2 1e-3 1e-4 1e-5"}},
        "beta_sweep": {"experiment": {"kind": "sweep_beta", "seed": "0"},
                       "sampler": dict(sampler), "mog": mog_section(mog3),
                       "sweep": {"values": "100 10 5 2 1"}},
        "scad_fan": {"experiment": {"kind": "scad_regression", "seed": "0"},
                     "scad": {"n_obs": "60", "dim": "8", "rho": "0.5",
                              "beta_star": "3 1.5 0 0 2 0 0 0",
                              "noise_normal_sd": "1.0", "cauchy_fraction": "0.1",
                              "a": "3.7", "n_reps": "100", "chain_iters": "7500",
                              "cv_folds": "5", "cv_chain_iters": "1250",
                              "gamma_grid": "geomspace 1e-3 1e1 20",
                              "optimizer_beta": "100", "estimator": "ergodic-mean",
                              "lam": "1e-3", "penalty_scale": "2n"}},
        "rate_default": {"experiment": {"kind": "rate_study", "seed": "0"},
                         "rate": {"lambdas": "0.2 0.1 0.05 0.025",
                                  "steps": "1000000", "burn_in": "50000",
                                  "beta": "1"}},
    }
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(presets)}")
    return presets[name]


def read_config(path) -> dict:
    """Parse a `[section] key = value` file into nested string dicts."""
    cp = configparser.ConfigParser()
    with open(path) as f:
        cp.read_file(f)
    return {s: dict(cp.items(s)) for s in cp.sections()}


def write_config(conf: dict, path) -> None:
    cp = configparser.ConfigParser()
    cp.read_dict(conf)
    with open(path, "w") as f:
        cp.write(f)


def apply_overrides(conf: dict, overrides) -> dict:
    """Apply `section.key=value` strings on top of a config mapping."""
    out = {s: dict(kv) for s, kv in conf.items()}
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form section.key=value")
        key, value = item.split("=", 1)
        if "." not in key:
            raise ValueError(f"override key {key!r} must be section.key")
        section, field = key.split(".", 1)
        out.setdefault(section, {})[field.strip()] = value.strip()
    return out


def _parse_floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def _parse_gamma_grid(text: str) -> tuple:
    parts = text.split()
    if parts and parts[0] == "geomspace":
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        return tuple(np.geomspace(lo, hi, n))
    return tuple(_parse_floats(text))


def build_spec(conf: dict) -> ExperimentSpec:
    """Turn a config mapping into an ExperimentSpec."""
    exp = conf.get("experiment", {})
    kind = exp.get("kind")
    if kind is None:
        raise ValueError("config needs [experiment] kind = ...")
    seed = int(exp.get("seed", "0"))

    mog = None
    if "mog" in conf:
        sec = conf["mog"]
        means = [_parse_floats(row) for row in sec["means"].split(";")]
        mog = MoGLaplaceSpec(weights=_parse_floats(sec["weights"]), means=means,
                             variances=_parse_floats(sec["variances"]),
                             laplace_scale=float(sec.get("laplace_scale", "0")))

    kw = {"kind": kind, "mog": mog, "seed": seed}
    if "sampler" in conf:
        sec = conf["sampler"]
        kw["lam"] = float(sec.get("lam", "1e-3"))
        kw["beta"] = float(sec.get("beta", "1"))
        kw["n_iters"] = int(float(sec.get("n_iters", "52000")))
        kw["burn_in"] = int(float(sec.get("burn_in", "12000")))
        kw["n_chains"] = int(sec.get("n_chains", "12"))
    if "sweep" in conf:
        kw["sweep_values"] = tuple(_parse_floats(conf["sweep"]["values"]))
    if "rate" in conf:
        sec = conf["rate"]
        kw["rate_lambdas"] = tuple(_parse_floats(sec.get("lambdas", "0.2 0.1 0.05 0.025")))
        kw["rate_steps"] = int(float(sec.get("steps", "1000000")))
        kw["rate_burn_in"] = int(float(sec.get("burn_in", "50000")))
        kw["beta"] = float(sec.get("beta", kw.get("beta", 1.0)))
    if "scad" in conf:
        sec = conf["scad"]
        kw["scad"] = ScadStudySpec(
            n_obs=int(sec.get("n_obs", "60")),
            dim=int(sec.get("dim", "8")),
            rho=float(sec.get("rho", "0.5")),
            beta_star=tuple(_parse_floats(sec.get("beta_star", "3 1.5 0 0 2 0 0 0"))),
            noise_normal_sd=float(sec.get("noise_normal_sd", "1.0")),
            cauchy_fraction=float(sec.get("cauchy_fraction", "0.1")),
            a=float(sec.get("a", "3.7")),
            n_reps=int(sec.get("n_reps", "100")),
            chain_iters=int(sec.get("chain_iters", "7500")),
            cv_folds=int(sec.get("cv_folds", "5")),
            cv_chain_iters=int(sec.get("cv_chain_iters", "1250")),
            gamma_grid=_parse_gamma_grid(sec.get("gamma_grid", "geomspace 1e-3 1e1 20")),
            optimizer_beta=float(sec.get("optimizer_beta", "100")),
            estimator=sec.get("estimator", "ergodic-mean"),
            lam=float(sec.get("lam", "1e-3")),
            penalty_scale=(None if sec.get("penalty_scale", "2n").strip() == "2n"
                           else float(sec["penalty_scale"])),
            seed=seed,
        )
    return ExperimentSpec(**kw)


def run_experiment(spec: ExperimentSpec) -> StudyReport:
    """Dispatch a spec to its runner."""
    if spec.kind == "mog_sample":
        return run_mog_experiment(spec)
    if spec.kind == "sweep_lambda":
        return run_sweep(spec, "lambda")
    if spec.kind == "sweep_beta":
        return run_sweep(spec, "beta")
    if spec.kind == "rate_study":
        return run_rate_study(spec)
    if spec.kind == "scad_regression":
        return run_scad_regression(spec.scad if spec.scad is not None
                                   else ScadStudySpec(seed=spec.seed))
    raise ValueError(f"unknown experiment kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Report emission

def _atomic_write(path, data: bytes) -> None:
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _density_figure(name: str, est: DensityEstimate) -> bytes:
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "sgula"
    fig, ax = plt.subplots(figsize=(5, 4.2))
    if est.values.ndim == 2:
        ax.contourf(est.axes[0], est.axes[1], est.values.T, levels=24, cmap="viridis")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    else:
        ax.plot(est.axes[0], est.values)
        ax.set_xlabel("x")
        ax.set_ylabel("density")
    ax.set_title(name)
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _rate_figure(metrics: dict) -> bytes:
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "sgula"
    lams = [e["lam"] for e in metrics["entries"]]
    errs = [e["w2"] for e in metrics["entries"]]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    ax.loglog(lams, errs, "o-")
    if "slope" in metrics:
        ax.set_title(f"W2 bias vs stepsize (slope {metrics['slope']:.3f})")
    ax.set_xlabel("stepsize")
    ax.set_ylabel("stationary W2 bias")
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _scad_figure(metrics: dict) -> bytes:
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "sgula"
    rows = metrics["replications"]
    data = [[r["rme_scad"] for r in rows], [r["rme_lasso"] for r in rows],
            [r["rme_oracle"] for r in rows]]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    ax.boxplot(data, tick_labels=["scad", "lasso", "oracle"], showfliers=False)
    ax.set_ylabel("relative model error")
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def emit_report(report: StudyReport, out_dir) -> list:
    """Write report.json, sample/density CSVs and figure SVGs; return a manifest.

    The manifest is a list of {path, sha256} entries.  All writes go through a
    temp-file-then-rename so a crashed run never leaves a truncated artifact.
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest = []

    def put(name: str, data: bytes):
        path = os.path.join(out_dir, name)
        _atomic_write(path, data)
        manifest.append({"path": path, "sha256": _sha256(data)})

    put("report.json", json.dumps(report.as_dict(), indent=2, sort_keys=True).encode())

    for name, ss in report.sample_sets.items():
        buf = io.StringIO()
        ss.to_csv(buf)
        put(f"samples_{name}.csv", buf.getvalue().encode())
    for name, est in report.densities.items():
        buf = io.StringIO()
        est.to_csv(buf)
        put(f"density_{name}.csv", buf.getvalue().encode())
        put(f"density_{name}.svg", _density_figure(name, est))
    if report.kind == "rate_study" and report.metrics.get("entries"):
        put("rate_fit.svg", _rate_figure(report.metrics))
    if report.kind == "scad_regression" and report.metrics.get("replications"):
        put("rme_boxplot.svg", _scad_figure(report.metrics))
    return manifest
