"""Randomized falsification checks for the regularity assumptions.

Each check probes a model's subgradient on a seeded point (or pair) cloud and
reports the worst-case slack of the tested inequality.  A pass certifies the
probe set only, never the whole space; reports say so explicitly.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np

from .potentials import PotentialModel

_DISCLAIMER = "randomized falsification check: a pass certifies the probe set only"
_KINK_OFFSET = 1e-6


@dataclasses.dataclass(frozen=True)
class ProbePlan:
    """Probe cloud description: box, point/pair counts, seed."""

    n_points: int = 100_000
    n_pairs: int = 100_000
    low: float | np.ndarray = -10.0
    high: float | np.ndarray = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 1 or self.n_pairs < 1:
            raise ValueError("n_points and n_pairs must be >= 1")
        if np.any(np.asarray(self.high) <= np.asarray(self.low)):
            raise ValueError("probe box must be nondegenerate")


@dataclasses.dataclass
class CheckReport:
    predicate: str
    passed: bool
    margin: float                      # min slack over probes; negative on failure
    witness: Optional[np.ndarray]      # most-violating point or pair
    n_probes: int
    note: str = _DISCLAIMER

    def as_dict(self) -> dict:
        w = self.witness
        return {
            "predicate": self.predicate,
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "witness": None if w is None else np.asarray(w).tolist(),
            "n_probes": int(self.n_probes),
            "note": self.note,
        }


def _probe_points(model: PotentialModel, plan: ProbePlan, n: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Half uniform in the box, half heavy-tailed; 10% snapped near kinks."""
    d = model.dim
    lo = np.broadcast_to(np.asarray(plan.low, dtype=float), (d,))
    hi = np.broadcast_to(np.asarray(plan.high, dtype=float), (d,))
    n_uni = n // 2
    pts = np.empty((n, d))
    pts[:n_uni] = rng.uniform(lo, hi, size=(n_uni, d))
    # heavy tails: radius distributed as exp of a uniform, random direction
    scale = 0.5 * float(np.max(hi - lo))
    dirs = rng.standard_normal((n - n_uni, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(-2.0, np.log(4.0), size=n - n_uni)) * scale
    pts[n_uni:] = radii[:, None] * dirs
    if model.kink_snap is not None:
        k = max(1, n // 10)
        idx = rng.choice(n, size=k, replace=False)
        snapped = model.kink_snap(pts[idx], rng)
        pts[idx] = snapped + rng.uniform(-_KINK_OFFSET, _KINK_OFFSET, size=snapped.shape)
    return pts


def _report(name: str, slack: np.ndarray, witness_pool) -> CheckReport:
    i = int(np.argmin(slack))
    margin = float(slack[i])
    return CheckReport(predicate=name, passed=margin >= 0.0, margin=margin,
                       witness=np.asarray(witness_pool[i]), n_probes=len(slack))


def check_linear_growth(model: PotentialModel, m: float, L: float,
                        plan: ProbePlan) -> CheckReport:
    """|h(x)| <= m + L|x| on the probe cloud."""
    if m < 0 or L < 0:
        raise ValueError("m and L must be nonnegative")
    rng = np.random.default_rng(plan.seed)
    x = _probe_points(model, plan, plan.n_points, rng)
    h = model.subgrad(x)
    slack = m + L * np.linalg.norm(x, axis=1) - np.linalg.norm(h, axis=1)
    return _report("linear_growth", slack, x)


def check_semi_convexity(model: PotentialModel, K: float, plan: ProbePlan) -> CheckReport:
    """<h(x)-h(y), x-y> >= -K |x-y|^2 on probe pairs."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    rng = np.random.default_rng(plan.seed)
    x = _probe_points(model, plan, plan.n_pairs, rng)
    y = _probe_points(model, plan, plan.n_pairs, rng)
    dx = x - y
    dh = model.subgrad(x) - model.subgrad(y)
    slack = np.sum(dh * dx, axis=1) + K * np.sum(dx * dx, axis=1)
    return _report("semi_convexity", slack, list(zip(x, y)))


def check_convexity_at_infinity(model: PotentialModel, mu: float, R: float,
                                plan: ProbePlan, variant: str = "pairwise_A2") -> CheckReport:
    """Strong monotonicity for separated pairs.

    pairwise_A2 requires |x-y| >= R; anchored_A5 requires |x| >= R with y free.
    """
    if mu <= 0 or R < 0:
        raise ValueError("need mu > 0 and R >= 0")
    if variant not in ("pairwise_A2", "anchored_A5"):
        raise ValueError(f"unknown variant {variant!r}")
    rng = np.random.default_rng(plan.seed)
    x = _probe_points(model, plan, plan.n_pairs, rng)
    y = _probe_points(model, plan, plan.n_pairs, rng)
    if variant == "pairwise_A2":
        # push y radially away from x until the pair is separated by >= R
        dx = x - y
        dist = np.linalg.norm(dx, axis=1, keepdims=True)
        unit = dx / np.where(dist == 0, 1.0, dist)
        need = np.maximum(R - dist, 0.0)
        y = y - need * unit
    else:
        nrm = np.linalg.norm(x, axis=1, keepdims=True)
        boost = rng.uniform(1.0, 2.0, size=(len(x), 1))
        x = np.where(nrm >= R, x, x * (R * boost) / np.where(nrm == 0, 1.0, nrm))
        x[np.squeeze(nrm, -1) == 0] = R  # arbitrary anchor on the sphere
    dx = x - y
    dh = model.subgrad(x) - model.subgrad(y)
    slack = np.sum(dh * dx, axis=1) - mu * np.sum(dx * dx, axis=1)
    return _report(f"convexity_at_infinity[{variant}]", slack, list(zip(x, y)))


def check_dissipativity(model: PotentialModel, mu: float, b: float,
                        plan: ProbePlan) -> CheckReport:
    """<x, h(x)> >= (mu/2)|x|^2 - b on the probe cloud."""
    if mu <= 0 or b <= 0:
        raise ValueError("need mu > 0 and b > 0")
    rng = np.random.default_rng(plan.seed)
    x = _probe_points(model, plan, plan.n_points, rng)
    h = model.subgrad(x)
    slack = np.sum(x * h, axis=1) - 0.5 * mu * np.sum(x * x, axis=1) + b
    return _report("dissipativity", slack, x)


def piecewise_radius(mu_outer: float, h_12_R: float) -> float:
    """Radius (2 sqrt(2) / mu) h_{1,2,R} outside which the piecewise potential
    is (mu/2)-strongly convex."""
    if mu_outer <= 0:
        raise ValueError(f"mu_outer must be positive, got {mu_outer}")
    if h_12_R < 0:
        raise ValueError(f"h_12_R must be nonnegative, got {h_12_R}")
    return 2.0 * np.sqrt(2.0) / mu_outer * h_12_R


def run_all_checks(model: PotentialModel, plan: ProbePlan,
                   b: Optional[float] = None) -> list:
    """Run every check for which the model declares constants."""
    reg = model.regularity
    reports = []
    if reg.m is not None and reg.L is not None:
        reports.append(check_linear_growth(model, reg.m, reg.L, plan))
    if reg.K is not None:
        reports.append(check_semi_convexity(model, reg.K, plan))
    if reg.mu is not None and reg.R is not None:
        reports.append(check_convexity_at_infinity(model, reg.mu, reg.R, plan))
        if b is None and None not in (reg.m, reg.L, reg.h0_norm):
            from .constants import dissipativity_b
            b = dissipativity_b(reg.m, reg.L, reg.mu, reg.R, reg.h0_norm)
        if b is not None and b > 0:
            reports.append(check_dissipativity(model, reg.mu, b, plan))
    return reports
