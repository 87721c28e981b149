"""Catalog of potential functions with exact evaluation and min-norm subgradients.

Every potential is represented by a :class:`PotentialModel` bundling the
evaluation callback, a subgradient selection that returns the minimum-norm
element of the subdifferential at kinks, and whatever regularity constants
(growth, semi-convexity, convexity at infinity) are known analytically.
Callbacks accept a single point of shape ``(d,)`` or a batch ``(n, d)``.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

# Points closer than this to a kink manifold are treated as non-differentiable
# and receive the min-norm subgradient.
KINK_TOL = 1e-12


class ModelSpecError(ValueError):
    """Raised when catalog parameters violate their invariants."""


@dataclasses.dataclass(frozen=True)
class RegularityParams:
    """Declared regularity constants of a potential.

    Fields left as ``None`` are unknown analytically and may be estimated or
    certified numerically by the assumptions module.
    """

    m: Optional[float] = None       # growth offset, |h(x)| <= m + L|x|
    L: Optional[float] = None       # growth slope
    K: Optional[float] = None       # semi-convexity modulus
    mu: Optional[float] = None      # convexity-at-infinity modulus
    R: Optional[float] = None       # convexity-at-infinity radius
    h0_norm: Optional[float] = None  # |h(0)|

    def __post_init__(self):
        for name in ("m", "L", "K", "mu", "R", "h0_norm"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ModelSpecError(f"regularity constant {name} must be nonnegative, got {v}")
        if self.mu is not None and self.mu <= 0:
            raise ModelSpecError(f"mu must be positive when declared, got {self.mu}")


@dataclasses.dataclass(frozen=True)
class PotentialModel:
    """A potential u with its min-norm subgradient oracle.

    ``smooth_split`` optionally carries ``(grad_f, prox_g)`` for potentials of
    the form u = f + g with f smooth, enabling the MYULA baseline.
    ``kink_snap`` projects points onto the nearest kink manifold; probe plans
    use it to stress subgradient selection near non-differentiable sets.
    ``subgrad_scalar`` is an optional float->float twin of the subgradient for
    one-dimensional models; the chain driver uses it to avoid per-step numpy
    dispatch overhead in long scalar runs.
    """

    name: str
    dim: int
    eval_fn: Callable[[np.ndarray], np.ndarray]
    subgrad_fn: Callable[[np.ndarray], np.ndarray]
    regularity: RegularityParams = RegularityParams()
    smooth_split: Optional[tuple] = None
    kink_snap: Optional[Callable[[np.ndarray, np.random.Generator], np.ndarray]] = None
    subgrad_scalar: Optional[Callable[[float], float]] = None

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point has dimension {x.shape[-1]}, model expects {self.dim}")
        return x

    def eval(self, x) -> np.ndarray:
        """u(x); scalar for a single point, shape (n,) for a batch."""
        return self.eval_fn(self._check_dim(x))

    def subgrad(self, x) -> np.ndarray:
        """Min-norm element of the subdifferential of u at x."""
        return self.subgrad_fn(self._check_dim(x))


def _sign_min_norm(x: np.ndarray) -> np.ndarray:
    """sign(x) with the min-norm choice 0 on the kink |x_i| <= KINK_TOL."""
    return np.where(np.abs(x) <= KINK_TOL, 0.0, np.sign(x))


def _sign_scalar(t: float) -> float:
    """Scalar twin of :func:`_sign_min_norm`."""
    if t > KINK_TOL:
        return 1.0
    if t < -KINK_TOL:
        return -1.0
    return 0.0


# ---------------------------------------------------------------------------
# Soft-thresholding (the L1 proximal operator, used by the MYULA baseline)

def prox_l1(x, tau: float) -> np.ndarray:
    """Componentwise minimizer of 0.5 (z - x_i)^2 + tau |z|."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


# ---------------------------------------------------------------------------
# Quadratic

def quadratic_model(dim: int = 1) -> PotentialModel:
    """u(x) = |x|^2 / 2, the canonical strongly convex case."""

    def ev(x):
        return 0.5 * np.sum(x * x, axis=-1)

    def sg(x):
        return x.copy()

    return PotentialModel(
        name="quadratic", dim=dim, eval_fn=ev, subgrad_fn=sg,
        regularity=RegularityParams(m=0.0, L=1.0, K=0.0, mu=1.0, R=0.0, h0_norm=0.0),
        smooth_split=(sg, lambda x, g: np.asarray(x, dtype=float)),
        subgrad_scalar=(lambda t: t) if dim == 1 else None,
    )


# ---------------------------------------------------------------------------
# Separable L1 potentials (Laplace targets and rate-study models)

def l1_model(dim: int = 1, alpha: float = 1.0) -> PotentialModel:
    """u(x) = alpha |x|_1; target is a product of Laplace(0, 1/(alpha beta)) laws."""
    if alpha <= 0:
        raise ModelSpecError(f"alpha must be positive, got {alpha}")

    def ev(x):
        return alpha * np.sum(np.abs(x), axis=-1)

    def sg(x):
        return alpha * _sign_min_norm(x)

    return PotentialModel(
        name="l1", dim=dim, eval_fn=ev, subgrad_fn=sg,
        regularity=RegularityParams(m=alpha * np.sqrt(dim), L=0.0, K=0.0, h0_norm=0.0),
        smooth_split=(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                      lambda x, g: prox_l1(x, g * alpha)),
        kink_snap=_snap_coordinates,
        subgrad_scalar=(lambda t: alpha * _sign_scalar(t)) if dim == 1 else None,
    )


def abs_plus_quadratic_model() -> PotentialModel:
    """u(x) = |x| + x^2/2 in one dimension; strongly convex with one kink."""

    def ev(x):
        return np.abs(x[..., 0]) + 0.5 * x[..., 0] ** 2

    def sg(x):
        return _sign_min_norm(x) + x

    return PotentialModel(
        name="abs_plus_quadratic", dim=1, eval_fn=ev, subgrad_fn=sg,
        regularity=RegularityParams(m=1.0, L=1.0, K=0.0, mu=1.0, R=0.0, h0_norm=0.0),
        smooth_split=(lambda x: np.asarray(x, dtype=float),
                      lambda x, g: prox_l1(x, g)),
        kink_snap=_snap_coordinates,
        subgrad_scalar=lambda t: t + _sign_scalar(t),
    )


def _snap_coordinates(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Zero a random nonempty subset of coordinates (kinks of separable |.|)."""
    x = np.array(x, dtype=float)
    mask = rng.random(x.shape) < 0.5
    # guarantee at least one zeroed coordinate per point
    idx = rng.integers(0, x.shape[-1], size=x.shape[:-1])
    np.put_along_axis(mask, idx[..., None], True, axis=-1)
    return np.where(mask, 0.0, x)


# ---------------------------------------------------------------------------
# Max-quadratic: u(x) = max{|x|, |x|^2} - |x|^2/2

def max_quadratic_model(dim: int = 2) -> PotentialModel:
    """Non-convex but 1-semi-convex model, differentiable outside the unit sphere.

    Inside the unit ball u(x) = |x| - |x|^2/2 with gradient x/|x| - x; outside
    u(x) = |x|^2/2 with gradient x.  The subdifferentials at the origin and on
    the unit sphere both contain 0, which is the min-norm selection.  Strong
    convexity at infinity holds with modulus mu/2 = 1/2 outside radius 2*sqrt(2)
    (piecewise construction with h_{1,2,R} = 1).
    """

    def ev(x):
        r2 = np.sum(x * x, axis=-1)
        r = np.sqrt(r2)
        return np.maximum(r, r2) - 0.5 * r2

    def sg(x):
        r = np.sqrt(np.sum(x * x, axis=-1, keepdims=True))
        inside = (1.0 / np.where(r <= KINK_TOL, 1.0, r) - 1.0) * x
        inside = np.where(r <= KINK_TOL, 0.0, inside)
        out = np.where(r >= 1.0 - KINK_TOL, x, inside)
        # on the sphere itself the subdifferential is the segment [0, x]
        return np.where(np.abs(r - 1.0) <= KINK_TOL, 0.0, out)

    def snap(x, rng):
        x = np.array(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        safe = np.where(r <= KINK_TOL, 1.0, r)
        return np.where(r <= KINK_TOL, x, x / safe)

    return PotentialModel(
        name="max_quadratic", dim=dim, eval_fn=ev, subgrad_fn=sg,
        regularity=RegularityParams(m=1.0, L=1.0, K=1.0, mu=0.5,
                                    R=2.0 * np.sqrt(2.0), h0_norm=0.0),
        kink_snap=snap,
    )


# ---------------------------------------------------------------------------
# One-dimensional composite u = u1 + u2 + u3

def one_d_composite_model() -> PotentialModel:
    """Sum of a 4-strongly-convex part, a 16-Lipschitz-gradient part and a
    convex part with a jump in its derivative at x = 2.

    u1(x) = 2(x+3)^2 - 1/2
    u2(x) = -8x^2 1{0<x<2} - 8x - 32(x-1) 1{x>=2}
    u3(x) = 10(x-1)^8 1{1<x<2} + x + 90(x-17/9) 1{x>=2}
    """

    def ev(x):
        t = x[..., 0]
        u1 = 2.0 * (t + 3.0) ** 2 - 0.5
        u2 = -8.0 * t ** 2 * ((t > 0) & (t < 2)) - 8.0 * t - 32.0 * (t - 1.0) * (t >= 2)
        u3 = 10.0 * (t - 1.0) ** 8 * ((t > 1) & (t < 2)) + t + 90.0 * (t - 17.0 / 9.0) * (t >= 2)
        return u1 + u2 + u3

    def sg(x):
        t = x[..., 0]
        h1 = 4.0 * (t + 3.0)
        h2 = np.where(t <= 0, -8.0, np.where(t < 2, -16.0 * t - 8.0, -40.0))
        # h3 jumps from 81 to 91 at x = 2; min-norm element of [81, 91] is 81
        h3 = np.where(t <= 1, 1.0,
                      np.where(t <= 2, 80.0 * (t - 1.0) ** 7 + 1.0, 91.0))
        return np.stack([h1 + h2 + h3], axis=-1)

    def snap(x, rng):
        breaks = np.array([0.0, 1.0, 2.0])
        x = np.array(x, dtype=float)
        k = breaks[rng.integers(0, len(breaks), size=x.shape[:-1])]
        return k[..., None]

    # |h| <= 4|x| + 12 + 40 + 91; mu = 2 at infinity outside R = 16 since the
    # non-monotone contribution of h2 is bounded by 32.
    def sg_scalar(t: float) -> float:
        h = 4.0 * (t + 3.0)
        if t <= 0:
            h -= 8.0
        elif t < 2:
            h += -16.0 * t - 8.0
        else:
            h -= 40.0
        if t <= 1:
            h += 1.0
        elif t <= 2:
            h += 80.0 * (t - 1.0) ** 7 + 1.0
        else:
            h += 91.0
        return h

    return PotentialModel(
        name="one_d_composite", dim=1, eval_fn=ev, subgrad_fn=sg,
        regularity=RegularityParams(m=143.0, L=4.0, K=16.0, mu=2.0, R=16.0, h0_norm=5.0),
        kink_snap=snap,
        subgrad_scalar=sg_scalar,
    )


# ---------------------------------------------------------------------------
# Mixture of Gaussians with an isotropic Laplace prior

@dataclasses.dataclass(frozen=True)
class MoGLaplaceSpec:
    """Weights/means/variances of the mixture plus the Laplace prior scale."""

    weights: np.ndarray
    means: np.ndarray       # (K, d)
    variances: np.ndarray   # (K,)
    laplace_scale: float

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        var = np.atleast_1d(np.asarray(self.variances, dtype=float))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)
        if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0) or np.any(w > 1):
            raise ModelSpecError(f"mixture weights must lie in [0,1] and sum to 1, got {w}")
        if np.any(var <= 0):
            raise ModelSpecError(f"mixture variances must be positive, got {var}")
        if self.laplace_scale < 0:
            raise ModelSpecError(f"laplace_scale must be nonnegative, got {self.laplace_scale}")
        if mu.shape[0] != w.shape[0] or var.shape[0] != w.shape[0]:
            raise ModelSpecError("weights, means and variances must agree in component count")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _mog_log_mixture(spec: MoGLaplaceSpec, x: np.ndarray):
    """Log mixture likelihood and per-component responsibilities, stably."""
    d = spec.dim
    diff = x[..., None, :] - spec.means          # (..., K, d)
    sq = np.sum(diff * diff, axis=-1)            # (..., K)
    loga = (np.log(spec.weights) - 0.5 * d * np.log(2.0 * np.pi * spec.variances)
            - sq / (2.0 * spec.variances))
    amax = np.max(loga, axis=-1, keepdims=True)
    w = np.exp(loga - amax)
    s = np.sum(w, axis=-1, keepdims=True)
    log_mix = (amax + np.log(s))[..., 0]
    resp = w / s
    return log_mix, resp, diff


def mog_laplace_model(spec: MoGLaplaceSpec) -> PotentialModel:
    """Potential u(x) = -log(mixture likelihood) + alpha |x|_1.

    The drift is the mixture-weighted mean shift plus the componentwise
    alpha*sign(x) term with the min-norm selection 0 on zero coordinates.
    """
    alpha = spec.laplace_scale

    def ev(x):
        log_mix, _, _ = _mog_log_mixture(spec, x)
        return -log_mix + alpha * np.sum(np.abs(x), axis=-1)

    def sg(x):
        _, resp, diff = _mog_log_mixture(spec, x)
        drift = np.sum(resp[..., None] * diff / spec.variances[:, None], axis=-2)
        return drift + alpha * _sign_min_norm(x)

    def grad_f(x):
        x = np.asarray(x, dtype=float)
        _, resp, diff = _mog_log_mixture(spec, x)
        return np.sum(resp[..., None] * diff / spec.variances[:, None], axis=-2)

    return PotentialModel(
        name="mog_laplace", dim=spec.dim, eval_fn=ev, subgrad_fn=sg,
        smooth_split=(grad_f, lambda x, g: prox_l1(x, g * alpha)),
        kink_snap=_snap_coordinates,
    )


def mog_unnormalized_density(spec: MoGLaplaceSpec, x: np.ndarray) -> np.ndarray:
    """exp(-u(x)) for the mixture-with-prior potential (beta = 1)."""
    log_mix, _, _ = _mog_log_mixture(spec, np.asarray(x, dtype=float))
    return np.exp(log_mix - spec.laplace_scale * np.sum(np.abs(x), axis=-1))


# ---------------------------------------------------------------------------
# SCAD penalty

@dataclasses.dataclass(frozen=True)
class ScadSpec:
    """Shape parameter a > 2 and penalty level gamma > 0."""

    a: float = 3.7
    gamma: float = 1.0

    def __post_init__(self):
        if self.a <= 2:
            raise ModelSpecError(f"SCAD requires a > 2, got a={self.a}")
        if self.gamma <= 0:
            raise ModelSpecError(f"SCAD requires gamma > 0, got gamma={self.gamma}")


def scad_q(spec: ScadSpec, x) -> np.ndarray:
    """The three-branch q_{a,gamma} on [0, inf)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("scad_q is defined for nonnegative arguments")
    a, g = spec.a, spec.gamma
    mid = (-x ** 2 + 2.0 * a * g * x - g ** 2) / (2.0 * (a - 1.0))
    return np.where(x <= g, g * x,
                    np.where(x <= a * g, mid, (a + 1.0) * g ** 2 / 2.0))


def scad_q_prime(spec: ScadSpec, x) -> np.ndarray:
    """dq/dx: gamma, then (a*gamma - x)/(a-1), then 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("scad_q_prime is defined for nonnegative arguments")
    a, g = spec.a, spec.gamma
    return np.where(x <= g, g, np.where(x <= a * g, (a * g - x) / (a - 1.0), 0.0))


def scad_penalty(spec: ScadSpec, x) -> np.ndarray:
    """Symmetric extension p_{a,gamma}(x) = q_{a,gamma}(|x|), applied componentwise."""
    return scad_q(spec, np.abs(np.asarray(x, dtype=float)))


def scad_penalty_subgrad(spec: ScadSpec, x) -> np.ndarray:
    """Min-norm subgradient of p_{a,gamma}: q'(|x|) sign(x), 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return scad_q_prime(spec, np.abs(x)) * _sign_min_norm(x)


def scad_reg_subgrad(spec: ScadSpec, x) -> np.ndarray:
    """Min-norm subgradient of the convex regularization p^r = p + x^2/(2(a-1))."""
    x = np.asarray(x, dtype=float)
    return scad_penalty_subgrad(spec, x) + x / (spec.a - 1.0)


# ---------------------------------------------------------------------------
# Penalized least-squares regression potentials

@dataclasses.dataclass(frozen=True)
class RegressionData:
    """Design matrix, responses and optional ground truth for penalized regression."""

    X: np.ndarray
    y: np.ndarray
    beta_star: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None  # design covariance, for model-error reporting

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ModelSpecError(f"inconsistent regression shapes X{X.shape}, y{y.shape}")
        if self.beta_star is not None:
            bs = np.asarray(self.beta_star, dtype=float)
            object.__setattr__(self, "beta_star", bs)
            if bs.shape != (X.shape[1],):
                raise ModelSpecError("beta_star dimension does not match the design")
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            object.__setattr__(self, "sigma", s)
            if s.shape != (X.shape[1], X.shape[1]) or not np.allclose(s, s.T):
                raise ModelSpecError("sigma must be a symmetric d x d matrix")
            if np.min(np.linalg.eigvalsh(s)) <= 0:
                raise ModelSpecError("sigma must be positive definite")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def build_regression_potential(data: RegressionData, penalty: str, spec,
                                scale: float = 1.0) -> PotentialModel:
    """U(beta) = |y - X beta|^2 + scale * penalty(beta) for penalty in {scad, lasso}.

    For 'scad' the spec is a :class:`ScadSpec`; for 'lasso' it is the scalar
    penalty level gamma >= 0 multiplying |beta|_1.  ``scale`` multiplies the
    whole penalty term; a scale of order n matches the classical penalized
    least-squares weighting in which the loss and the regularizer grow at the
    same rate with the sample size.
    """
    if scale < 0:
        raise ModelSpecError(f"penalty scale must be nonnegative, got {scale}")
    X, y = data.X, data.y
    G = 2.0 * (X.T @ X)
    c = 2.0 * (X.T @ y)

    def rss(b):
        r = b @ X.T - y
        return np.sum(r * r, axis=-1)

    def rss_grad(b):
        return b @ G - c

    if penalty == "scad":
        if not isinstance(spec, ScadSpec):
            raise ModelSpecError("scad penalty requires a ScadSpec")

        def ev(b):
            return rss(b) + scale * np.sum(scad_penalty(spec, b), axis=-1)

        def sg(b):
            return rss_grad(b) + scale * scad_penalty_subgrad(spec, b)

        # p + x^2/(2(a-1)) is convex per coordinate, so K = scale/(a-1)
        reg = RegularityParams(K=scale / (spec.a - 1.0), h0_norm=float(np.linalg.norm(c)))
        split = None
    elif penalty == "lasso":
        gamma = float(spec)
        if gamma < 0:
            raise ModelSpecError(f"lasso penalty level must be nonnegative, got {gamma}")

        def ev(b):
            return rss(b) + scale * gamma * np.sum(np.abs(b), axis=-1)

        def sg(b):
            return rss_grad(b) + scale * gamma * _sign_min_norm(b)

        reg = RegularityParams(K=0.0, h0_norm=float(np.linalg.norm(c)))
        split = (rss_grad, lambda b, g: prox_l1(b, g * scale * gamma))
    else:
        raise ModelSpecError(f"unknown penalty {penalty!r}; expected 'scad' or 'lasso'")

    return PotentialModel(
        name=f"{penalty}_regression", dim=data.dim, eval_fn=ev, subgrad_fn=sg,
        regularity=reg, smooth_split=split, kink_snap=_snap_coordinates,
    )


# ---------------------------------------------------------------------------
# Catalog dispatcher

def make_model(tag: str, **params) -> PotentialModel:
    """Build a catalog model by tag.

    Tags: quadratic, l1, abs_plus_quadratic, max_quadratic, one_d_composite,
    mog_laplace, scad_regression, lasso_regression.
    """
    if tag == "quadratic":
        return quadratic_model(params.get("dim", 1))
    if tag == "l1":
        return l1_model(params.get("dim", 1), params.get("alpha", 1.0))
    if tag == "abs_plus_quadratic":
        return abs_plus_quadratic_model()
    if tag == "max_quadratic":
        return max_quadratic_model(params.get("dim", 2))
    if tag == "one_d_composite":
        return one_d_composite_model()
    if tag == "mog_laplace":
        spec = params.get("spec")
        if spec is None:
            spec = MoGLaplaceSpec(weights=params["weights"], means=params["means"],
                                  variances=params["variances"],
                                  laplace_scale=params.get("laplace_scale", 0.0))
        return mog_laplace_model(spec)
    if tag in ("scad_regression", "lasso_regression"):
        data = params["data"]
        if tag == "scad_regression":
            return build_regression_potential(data, "scad", params["spec"])
        return build_regression_potential(data, "lasso", params["gamma"])
    raise ModelSpecError(f"unknown model tag {tag!r}")
