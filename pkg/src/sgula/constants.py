"""Analytic constants of the convergence theory and the bounds built from them.

All constants are evaluated exactly in closed form: the dissipativity offset b,
the moment constants C1..C5, the discretization constant C6, the W1/W2
contraction constants, the composite bound constants C_T1..C_T3, and the
excess-risk constants (C_script_T1, M, S_d).  These quantities are
astronomically conservative for realistic parameters; downstream code checks
their formulas and monotonicity rather than their sharpness.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .potentials import PotentialModel


def lambda_max(mu: float, L: float) -> float:
    """Largest admissible stepsize, min(mu / (2 L^2), 1)."""
    if mu <= 0 or L <= 0:
        raise ValueError(f"mu and L must be positive, got mu={mu}, L={L}")
    return min(mu / (2.0 * L * L), 1.0)


def dissipativity_b(m: float, L: float, mu: float, R: float, h0_norm: float) -> float:
    """b = max(|h(0)| / (2 mu), m R + (L + mu/2) R^2)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if min(m, L, R, h0_norm) < 0:
        raise ValueError("dissipativity inputs must be nonnegative")
    return max(h0_norm / (2.0 * mu), m * R + (L + mu / 2.0) * R * R)


def default_epsilon_w2(beta: float, mu: float) -> float:
    """Midpoint of the admissible interval (0, sqrt(beta/8) mu)."""
    return 0.5 * math.sqrt(beta / 8.0) * mu


@dataclasses.dataclass(frozen=True)
class ProblemParams:
    """Everything the constants calculator needs about one problem instance."""

    m: float
    L: float
    K: float
    mu: float
    R: float
    h0_norm: float
    beta: float
    d: int
    e_theta0_sq: float = 0.0
    lam: float = 1e-3
    epsilon_w2: Optional[float] = None  # free parameter of the W2 contraction

    def __post_init__(self):
        if self.mu <= 0 or self.L <= 0 or self.beta <= 0:
            raise ValueError("mu, L and beta must be positive")
        if min(self.m, self.K, self.R, self.h0_norm, self.e_theta0_sq) < 0:
            raise ValueError("m, K, R, h0_norm and E|theta0|^2 must be nonnegative")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        lam0 = lambda_max(self.mu, self.L)
        if not (0 < self.lam < lam0):
            raise ValueError(
                f"stepsize {self.lam} outside (0, {lam0:.6g}); the moment constant "
                f"C2 has denominator mu - 2 lam L^2")
        eps_hi = math.sqrt(self.beta / 8.0) * self.mu
        if self.epsilon_w2 is not None and not (0 < self.epsilon_w2 < eps_hi):
            raise ValueError(f"epsilon_w2 must lie in (0, {eps_hi:.6g}), got {self.epsilon_w2}")

    @property
    def epsilon(self) -> float:
        return self.epsilon_w2 if self.epsilon_w2 is not None else default_epsilon_w2(self.beta, self.mu)


# Asymptotic order in the dimension of each constant.
DIM_ORDER = {
    "b": "O(1)", "C1": "O(d)", "C2": "O(d)", "C3": "O(d)", "C4": "O(d)",
    "C5": "O(d)", "C6": "O(d)", "C_W1": "O(1)", "C_r1": "O(1)", "C0_prime": "O(1)",
    "C_W2": "O(1)", "C_r2": "O(1)", "C0_doubleprime": "O(1)", "C_W2_star": "O(d^-1)",
    "C_r3": "O(1)", "C7": "O(d)", "C8": "O(d)", "C9": "O(d)", "C_T1": "O(d)",
    "C_T2": "O(d)", "C_T3": "O(d)", "C_script_T1": "O(d^1/2)", "M": "O(1)",
}


@dataclasses.dataclass(frozen=True)
class ConstantsReport:
    b: float
    lambda0: float
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C6: float
    C_W1: float
    C_r1: float
    C0_prime: float
    C_W2: float
    C_r2: float
    C0_doubleprime: float
    C_W2_star: float
    C_r3: float
    C7: float
    C8: float
    C9: float
    C_T1: float
    C_T2: float
    C_T3: float
    C_script_T1: float
    M: float
    S_d: float
    epsilon_w2: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)

    @property
    def dim_orders(self) -> dict:
        return dict(DIM_ORDER)


def _c0_prime(beta: float, K: float, mu: float, R: float) -> float:
    """Two-branch rate constant; ties at beta K R^2 = 8 take the first branch."""
    x = beta * K * R * R
    if x <= 8.0:
        if R == 0.0:
            return (2.0 / (3.0 * math.e)) * (mu * beta / 8.0)
        return (2.0 / (3.0 * math.e)) * min(1.0 / (R * R), mu * beta / 8.0)
    inv = (8.0 * math.sqrt(2.0 * math.pi) / R / math.sqrt(beta * K)
           * (1.0 / (beta * K) + 1.0 / (beta * mu)) * math.exp(x / 8.0)
           + 32.0 / (beta * mu * R) ** 2)
    return 1.0 / inv


def _c0_doubleprime(beta: float, mu: float, eps: float) -> float:
    """max of the two displayed branches; depends only on beta*mu^2 and eps."""
    g = math.sqrt(beta / 8.0) * mu - eps
    if g <= 0:
        raise ValueError("epsilon_w2 must be below sqrt(beta/8) mu")
    e2 = math.e ** 2
    first = (2.0 * e2 / eps) * (1.0 + 2.0 / math.sqrt(eps)) * math.sqrt(2.0 / g)
    second = ((2.0 + math.sqrt(eps)) / (eps * (1.0 - math.exp(-2.0)))
              * (2.0 * math.sqrt(2.0) * e2 / math.sqrt(eps * g) + 1.0 / g))
    return max(first, second)


def constants_report(p: ProblemParams) -> ConstantsReport:
    """Evaluate every tabulated constant at the given problem parameters."""
    m, L, K, mu, R, beta, d = p.m, p.L, p.K, p.mu, p.R, p.beta, p.d
    lam, e0 = p.lam, p.e_theta0_sq
    eps = p.epsilon

    b = dissipativity_b(m, L, mu, R, p.h0_norm)
    lam0 = lambda_max(mu, L)

    C1 = (4.0 / mu) * (b + d / beta)
    C2 = (2.0 * b + 2.0 * d / beta + mu * m * m / (L * L)) / (mu - 2.0 * lam * L * L)
    C3 = (2.0 * mu * mu / (L * L) + 2.0) * C2 + (2.0 * mu / (L * L)) * (mu * m * m / (L * L) + 2.0 * d / beta)
    C4 = 2.0 * mu * C3 + 2.0 * mu * m * m / (L * L) + 4.0 * d / beta
    C5 = C3 + 2.0 * (d / beta + b)

    # C6 in the displayed discretization lemma:
    # sqrt(2) e^{2K} (C4 (1+E))^{1/4} sqrt( sqrt(C4 (1+E)) + 2L (1 + sqrt(C5 (1+E)) + sqrt(C2 (1+E))) )
    g4 = C4 * (1.0 + e0)
    inner = math.sqrt(g4) + 2.0 * L * (1.0 + math.sqrt(C5 * (1.0 + e0)) + math.sqrt(C2 * (1.0 + e0)))
    C6 = math.sqrt(2.0) * math.exp(2.0 * K) * g4 ** 0.25 * math.sqrt(inner)

    C_W1 = 2.0 * math.exp(beta * K * R * R / 8.0)
    C0p = _c0_prime(beta, K, mu, R)
    C_r1 = 2.0 * C0p / beta

    C0pp = _c0_doubleprime(beta, mu, eps)
    # max{1, R^{-1/2}} degenerates to 1 at R = 0, where every R-dependent
    # factor in C_W2 is already trivial
    C_W2 = 2.0 * (max(1.0, 1.0 / math.sqrt(R)) if R > 0 else 1.0)
    C_W2 = (C_W2 * C0pp
            * math.exp((math.sqrt(beta / 32.0) * (mu + K) + eps / 2.0) * beta * R * R / 2.0)
            * math.sqrt((2.0 / beta) * max(4.0 / eps + 2.0, 8.0 / (math.e * eps * eps))
                        / (math.sqrt(beta / 2.0) * R + 1.0)))
    C_r2 = 2.0 * min(1.0, 1.0 / eps) * math.exp(-0.25 * math.sqrt((beta / 2.0) ** 3) * (mu + K) * R * R) / C0pp

    C_W2_star = math.sqrt(1.0 + beta * (2.0 * K + mu) * (2.0 + 2.0 * K / mu) ** (2.0 / d) / (2.0 * d))
    C_r3 = mu / 4.0

    C7 = C6 * C_W1 / (-math.expm1(-C_r1 / 2.0))
    C8 = max(C6, math.sqrt(C6)) * C_W2 / (-math.expm1(-C_r2 / 2.0))
    C9 = C6 * C_W2_star / (-math.expm1(-C_r3 / 2.0))
    C_T1 = C6 * (1.0 + C_W1 / (-math.expm1(-C_r1 / 2.0)))
    C_T2 = C6 + max(C6, math.sqrt(C6)) * C_W2 / (-math.expm1(-C_r2 / 2.0))
    C_T3 = C6 * (1.0 + C_W2_star / (-math.expm1(-C_r3 / 2.0)))

    C_script_T1 = (m + (L / 2.0) * math.sqrt(e0)
                   + (L / 2.0) * math.sqrt((mu + 2.0 * b + 2.0 * d / beta) / mu))
    M = m + 1.5 * L + L * math.sqrt(b / (2.0 * mu))
    S_d = 2.0 * math.pi ** (d / 2.0) * math.exp(-gammaln(d / 2.0))

    return ConstantsReport(
        b=b, lambda0=lam0, C1=C1, C2=C2, C3=C3, C4=C4, C5=C5, C6=C6,
        C_W1=C_W1, C_r1=C_r1, C0_prime=C0p, C_W2=C_W2, C_r2=C_r2,
        C0_doubleprime=C0pp, C_W2_star=C_W2_star, C_r3=C_r3,
        C7=C7, C8=C8, C9=C9, C_T1=C_T1, C_T2=C_T2, C_T3=C_T3,
        C_script_T1=C_script_T1, M=M, S_d=S_d, epsilon_w2=eps,
    )


def beta_cap_A5(mu: float, K: float, R: float, d: int, model: PotentialModel,
                n_shells: int = 64, n_dirs: int = 256, seed: int = 0) -> float:
    """Largest admissible inverse temperature under the anchored convexity regime.

    cap = mu d / (2K + mu) / ((K + mu/4) R*^2 + 2 sup{-<x, h(x)> : |x| <= R*})
    with R* = R (2 + 2K/mu)^(1/d).  The sup is probed over radial shells times
    random directions; x = 0 is always included so the sup is nonnegative.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    r_star = R * (2.0 + 2.0 * K / mu) ** (1.0 / d)
    sup = 0.0
    if r_star > 0:
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_dirs, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = np.linspace(0.0, r_star, n_shells + 1)[1:]
        pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
        h = model.subgrad(pts)
        sup = max(0.0, float(np.max(-np.sum(pts * h, axis=-1))))
    denom = (K + mu / 4.0) * r_star ** 2 + 2.0 * sup
    if denom <= 0:
        raise ValueError("degenerate radius: the beta cap denominator vanishes")
    return mu * d / (2.0 * K + mu) / denom


_BOUND_MODES = {
    # mode -> (C_W field, C_r field, C_T field, stepsize exponent)
    "thm1_w1": ("C_W1", "C_r1", "C_T1", 0.25),
    "thm1_w2": ("C_W2", "C_r2", "C_T2", 0.125),
    "thm2_w2": ("C_W2_star", "C_r3", "C_T3", 0.25),
}


def theorem_bound(p: ProblemParams, N: int, which: str, delta0: float) -> float:
    """C_W exp(-C_r lam N) delta0 + C_T lam^r for the requested bound mode."""
    if which not in _BOUND_MODES:
        raise ValueError(f"unknown bound mode {which!r}; expected one of {sorted(_BOUND_MODES)}")
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    rep = constants_report(p)
    cw_f, cr_f, ct_f, r = _BOUND_MODES[which]
    cw, cr, ct = (getattr(rep, f) for f in (cw_f, cr_f, ct_f))
    return cw * math.exp(-cr * p.lam * N) * delta0 + ct * p.lam ** r


_ACCURACY_MODES = {
    # mode -> (bound mode, lam cap as function of (eps, C_T))
    "w1": ("thm1_w1", lambda eps, ct: eps ** 4 / (16.0 * ct ** 4)),
    "w2": ("thm1_w2", lambda eps, ct: eps ** 8 / (256.0 * ct ** 8)),
    "w2_improved": ("thm2_w2", lambda eps, ct: eps ** 4 / (16.0 * ct ** 4)),
}


def iterations_for_accuracy(p: ProblemParams, eps: float, which: str,
                            delta0: float = 1.0):
    """Stepsize and iteration count guaranteeing the requested accuracy.

    Returns (lambda_choice, N_choice) with lambda_choice = min(lambda0, the
    corollary's eps-power cap) and N_choice large enough that the exponential
    initialization term falls below eps/2 at that stepsize.
    """
    if eps <= 0:
        raise ValueError("target accuracy must be positive")
    if which not in _ACCURACY_MODES:
        raise ValueError(f"unknown accuracy mode {which!r}; expected one of {sorted(_ACCURACY_MODES)}")
    bound_mode, lam_cap = _ACCURACY_MODES[which]
    rep = constants_report(p)
    cw_f, cr_f, ct_f, _ = _BOUND_MODES[bound_mode]
    cw, cr, ct = (getattr(rep, f) for f in (cw_f, cr_f, ct_f))

    lam = min(rep.lambda0, lam_cap(eps, ct))
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError(f"target accuracy {eps} makes the stepsize underflow")
    if delta0 == 0:
        return lam, 1
    arg = 2.0 * cw * delta0 / eps
    if arg <= 1.0:
        return lam, 1
    N = math.ceil(math.log(arg) / (cr * lam))
    return lam, max(N, 1)


def excess_risk_bound(p: ProblemParams, w2_to_target: float) -> float:
    """Optimization-gap bound: sampling term plus four temperature terms.

    Requires beta >= max(4/mu, 1/M); the temperature terms decay like
    log(beta)/beta.
    """
    if w2_to_target < 0:
        raise ValueError("w2_to_target must be nonnegative")
    rep = constants_report(p)
    beta, d, mu = p.beta, p.d, p.mu
    if beta < max(4.0 / mu, 1.0 / rep.M):
        raise ValueError(
            f"beta = {beta} below the admissible threshold "
            f"max(4/mu, 1/M) = {max(4.0 / mu, 1.0 / rep.M):.6g}")
    b, M = rep.b, rep.M
    log_sd_over_d = (math.log(2.0) + (d / 2.0) * math.log(math.pi)
                     - gammaln(d / 2.0) - math.log(d))
    return (rep.C_script_T1 * w2_to_target
            + (d / (2.0 * beta)) * math.log(2.0 * math.e * (b + d / beta) * beta ** 2 * M ** 2 / (mu * d))
            + (d / beta) * math.log(beta * M)
            - log_sd_over_d / beta
            + 2.0 / beta)
