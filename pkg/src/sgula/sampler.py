"""Subgradient unadjusted Langevin iteration, multi-chain driver, MYULA baseline.

The core update is theta <- theta - lambda h(theta) + sqrt(2 lambda / beta) xi
with h a min-norm subgradient of the potential and xi standard Gaussian noise.
Chains are seeded independently through ``default_rng([seed, chain_id])`` so a
pooled run is reproducible regardless of execution order.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from typing import Optional

import numpy as np

from .potentials import PotentialModel

DIVERGENCE_THRESHOLD = 1e8


class ChainDivergenceError(RuntimeError):
    """A chain left the divergence guard region; signals misconfiguration."""

    def __init__(self, chain_id: int, iteration: int, norm: float):
        self.chain_id = chain_id
        self.iteration = iteration
        super().__init__(
            f"chain {chain_id} diverged at iteration {iteration} (|theta| = {norm:.3e}); "
            f"check the stepsize against the model's regularity constants")


@dataclasses.dataclass(frozen=True)
class InitLaw:
    """Initialization law: point mass, uniform box, or scaled standard Gaussian."""

    kind: str = "gaussian"          # point | uniform_box | gaussian
    point: Optional[np.ndarray] = None
    low: Optional[np.ndarray] = None
    high: Optional[np.ndarray] = None
    scale: float = 1.0

    def draw(self, rng: np.random.Generator, dim: int) -> np.ndarray:
        if self.kind == "point":
            p = np.zeros(dim) if self.point is None else np.asarray(self.point, dtype=float)
            if p.shape != (dim,):
                raise ValueError(f"init point has shape {p.shape}, expected ({dim},)")
            return p.copy()
        if self.kind == "uniform_box":
            lo = np.broadcast_to(np.asarray(self.low, dtype=float), (dim,))
            hi = np.broadcast_to(np.asarray(self.high, dtype=float), (dim,))
            return rng.uniform(lo, hi)
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(dim)
        raise ValueError(f"unknown init law {self.kind!r}")


@dataclasses.dataclass(frozen=True)
class SamplerConfig:
    lam: float
    beta: float
    n_iters: int
    burn_in: int = 0
    n_chains: int = 1
    thin: int = 1
    seed: int = 0
    init: InitLaw = InitLaw(kind="point")
    noise: bool = True              # False gives deterministic subgradient descent
    gamma_my: Optional[float] = None  # MYULA smoothing parameter, defaults to lam

    def __post_init__(self):
        if self.lam <= 0 or self.beta <= 0:
            raise ValueError("stepsize and inverse temperature must be positive")
        if not (0 <= self.burn_in < self.n_iters):
            raise ValueError(f"need 0 <= burn_in < n_iters, got {self.burn_in}, {self.n_iters}")
        if self.thin < 1 or self.n_chains < 1:
            raise ValueError("thin and n_chains must be >= 1")

    def warn_if_beyond_theory(self, model: PotentialModel):
        reg = model.regularity
        if reg.mu is not None and reg.L is not None and reg.L > 0:
            lam0 = min(reg.mu / (2.0 * reg.L ** 2), 1.0)
            if self.lam >= lam0:
                warnings.warn(
                    f"stepsize {self.lam} is outside the theoretical range (0, {lam0:.4g}) "
                    f"for model {model.name}; convergence guarantees do not apply",
                    stacklevel=2)

    @property
    def n_retained(self) -> int:
        return -((self.n_iters - self.burn_in) // -self.thin)


@dataclasses.dataclass
class SampleSet:
    """Retained post-burn-in iterates, shape (n_chains, n_retained, dim)."""

    samples: np.ndarray
    config: SamplerConfig
    model_name: str
    method: str
    wall_time: float
    chain_seeds: list

    @property
    def pooled(self) -> np.ndarray:
        return self.samples.reshape(-1, self.samples.shape[-1])

    def to_csv(self, path_or_file):
        """Write `chain,iter,x1,...,xd` rows with 17-significant-digit values."""
        d = self.samples.shape[-1]
        cols = ",".join(f"x{i + 1}" for i in range(d))
        cfg = self.config

        def write(f):
            f.write(f"chain,iter,{cols}\n")
            for c in range(self.samples.shape[0]):
                for j in range(self.samples.shape[1]):
                    it = cfg.burn_in + 1 + j * cfg.thin
                    vals = ",".join(f"{v:.17g}" for v in self.samples[c, j])
                    f.write(f"{c},{it},{vals}\n")

        if hasattr(path_or_file, "write"):
            write(path_or_file)
        else:
            with open(path_or_file, "w") as f:
                write(f)


def sgula_step(theta, h_val, lam: float, beta: float, xi) -> np.ndarray:
    """theta - lam h + sqrt(2 lam / beta) xi."""
    theta = np.asarray(theta, dtype=float)
    h_val = np.asarray(h_val, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if lam <= 0 or beta <= 0:
        raise ValueError("lam and beta must be positive")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(h_val)) and np.all(np.isfinite(xi))):
        raise ValueError("non-finite input to sgula_step")
    return theta - lam * h_val + np.sqrt(2.0 * lam / beta) * xi


def myula_step(theta, grad_f_val, prox_g, lam: float, gamma_my: float, beta: float, xi) -> np.ndarray:
    """Proximal-gradient Langevin step with Moreau-Yosida smoothing parameter gamma_my."""
    theta = np.asarray(theta, dtype=float)
    grad_f_val = np.asarray(grad_f_val, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if gamma_my <= 0:
        raise ValueError("gamma_my must be positive")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(grad_f_val)) and np.all(np.isfinite(xi))):
        raise ValueError("non-finite input to myula_step")
    drift = grad_f_val + (theta - prox_g(theta, gamma_my)) / gamma_my
    return theta - lam * drift + np.sqrt(2.0 * lam / beta) * xi


def _retained_buffer(config: SamplerConfig, dim: int) -> np.ndarray:
    return np.empty((config.n_retained, dim))


def run_chain(model: PotentialModel, config: SamplerConfig, chain_id: int = 0,
              method: str = "sgula") -> np.ndarray:
    """Run one chain; deterministic given (config.seed, chain_id).

    Returns the retained trajectory, shape (n_retained, dim).
    """
    if method not in ("sgula", "myula"):
        raise ValueError(f"unknown method {method!r}")
    if method == "myula" and model.smooth_split is None:
        raise ValueError(f"model {model.name} declares no smooth/prox split for MYULA")

    rng = np.random.default_rng([config.seed, chain_id])
    theta = config.init.draw(rng, model.dim)
    lam, beta = config.lam, config.beta
    sigma = np.sqrt(2.0 * lam / beta)
    out = _retained_buffer(config, model.dim)
    k = 0

    if method == "myula":
        grad_f, prox_g = model.smooth_split
        gam = config.gamma_my if config.gamma_my is not None else lam

    subgrad = model.subgrad_fn  # dim already fixed by the init draw

    # noise is drawn per (coordinate, step) in iteration order; the divergence
    # guard and retention bookkeeping run vectorized once per block
    block = 65536
    n_done = 0
    traj = np.empty((block, model.dim))
    while n_done < config.n_iters:
        nb = min(block, config.n_iters - n_done)
        if config.noise:
            xi = rng.standard_normal((nb, model.dim))
        else:
            xi = np.zeros((nb, model.dim))
        if method == "sgula" and model.subgrad_scalar is not None and model.dim == 1:
            # scalar fast path: numpy dispatch per step dominates 1D runs
            sgs = model.subgrad_scalar
            t = float(theta[0])
            noise = (sigma * xi[:, 0]).tolist()
            col = traj[:, 0]
            i = 0
            try:
                for i in range(nb):
                    t = t - lam * sgs(t) + noise[i]
                    col[i] = t
            except OverflowError:
                raise ChainDivergenceError(chain_id, n_done + i + 1, float("inf"))
            theta = np.array([t])
        elif method == "sgula":
            for i in range(nb):
                theta = theta - lam * subgrad(theta) + sigma * xi[i]
                traj[i] = theta
        else:
            for i in range(nb):
                drift = grad_f(theta) + (theta - prox_g(theta, gam)) / gam
                theta = theta - lam * drift + sigma * xi[i]
                traj[i] = theta
        peak = np.max(np.abs(traj[:nb]), axis=1)
        bad = ~(peak <= DIVERGENCE_THRESHOLD)      # catches NaN as well
        if bad.any():
            i = int(np.argmax(bad))
            raise ChainDivergenceError(chain_id, n_done + i + 1, float(peak[i]))
        steps = n_done + 1 + np.arange(nb)
        keep = (steps > config.burn_in) & ((steps - config.burn_in - 1) % config.thin == 0)
        rows = traj[:nb][keep]
        out[k:k + len(rows)] = rows
        k += len(rows)
        n_done += nb
    return out


def run_parallel_chains(model: PotentialModel, config: SamplerConfig,
                        method: str = "sgula") -> SampleSet:
    """Run config.n_chains independent chains and pool them into a SampleSet."""
    config.warn_if_beyond_theory(model)
    t0 = time.perf_counter()
    samples = np.empty((config.n_chains, config.n_retained, model.dim))
    for c in range(config.n_chains):
        samples[c] = run_chain(model, config, chain_id=c, method=method)
    return SampleSet(
        samples=samples, config=config, model_name=model.name, method=method,
        wall_time=time.perf_counter() - t0,
        chain_seeds=[[config.seed, c] for c in range(config.n_chains)],
    )


def posterior_summary(sample_set: SampleSet, mode: str = "ergodic-mean") -> np.ndarray:
    """Point estimate from a SampleSet: coordinatewise ergodic mean or the last iterate."""
    if sample_set.samples.size == 0:
        raise ValueError("empty sample set")
    if mode == "ergodic-mean":
        return sample_set.pooled.mean(axis=0)
    if mode == "last-iterate":
        return sample_set.samples[0, -1].copy()
    raise ValueError(f"unknown summary mode {mode!r}")
