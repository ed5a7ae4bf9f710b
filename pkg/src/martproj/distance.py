"""Kolmogorov distance to the standard normal, three ways.

* ``kolmogorov_vs_normal``: exact sup-distance of an empirical CDF to Phi
  (the one-sample statistic); its sampling resolution is governed by the
  DKW inequality, and 1/(2 sqrt(m)) is reported as a bound-scale proxy for
  the standard error.
* ``cf_product_kolmogorov``: deterministic distance for conditionally-iid
  weighted sums, through the product characteristic function.  Two-atom
  innovations with at most 20 coordinates are enumerated exactly (inversion
  converges slowly at atoms); larger products are inverted by Gil-Pelaez
  quadrature with the sup over x located on a grid and sharpened by
  golden-section search.
* ``conditional_kappa_mc``: Monte Carlo distance at fixed direction over
  fresh simulated paths.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt
from scipy.special import ndtr

from .errors import (
    AccuracyError,
    DegenerateDirectionError,
    DimensionError,
    InvalidSampleError,
    UnsupportedCfError,
    UnsupportedMethodError,
)
from .processes import (
    IidMartingale,
    InnovationLaw,
    MartingaleModel,
    simulate_paths,
)
from .sphere import SphereVector, centered_weights

__all__ = [
    "KappaEstimate",
    "KappaSummary",
    "CfGrid",
    "kolmogorov_vs_normal",
    "kolmogorov_from_cf",
    "cf_product_kolmogorov",
    "conditional_kappa_mc",
    "expected_kappa",
    "cf_distance_integral",
]

_ENUMERATION_MAX_N = 20
_CF_TOL = 1e-12


@dataclass(frozen=True)
class KappaEstimate:
    """A Kolmogorov-distance value with its provenance."""

    value: float
    se: float
    method: str
    sample_size: int

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidSampleError(f"distance {self.value} outside [0, 1]")


@dataclass(frozen=True)
class KappaSummary:
    """Average distance over directions with a between-direction error."""

    mean: float
    se: float
    n: int
    method: str
    r_theta: int


@dataclass(frozen=True)
class CfGrid:
    """Quadrature layout for characteristic-function inversion.

    ``t_max`` caps the adaptive upper integration limit (the limit itself
    is the first scanned point past the Gaussian envelope where the product
    CF falls below 1e-12).  The sup over x is taken on ``n_x`` points of
    [x_lo, x_hi] and refined by golden-section search.
    """

    t_max: float = 1e4
    n_t: int = 4096
    x_lo: float = -8.0
    x_hi: float = 8.0
    n_x: int = 4096
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.t_max < 1.0:
            raise DimensionError("t_max must be >= 1")
        if self.n_t < 64:
            raise DimensionError("n_t must be >= 64")

    @property
    def x_grid(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_x)


# ---------------------------------------------------------------------------
# empirical statistic
# ---------------------------------------------------------------------------

def kolmogorov_vs_normal(samples: np.ndarray) -> KappaEstimate:
    """Exact sup |F_m(x) - Phi(x)| over the sorted sample.

    se is reported as 0 (the statistic is a deterministic function of the
    sample); the sampling error of the underlying estimate is governed by
    the DKW inequality.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise InvalidSampleError("empty sample")
    if not np.all(np.isfinite(samples)):
        raise InvalidSampleError("sample contains non-finite values")
    xs = np.sort(samples)
    m = xs.size
    cdf = ndtr(xs)
    hi = np.arange(1, m + 1) / m - cdf
    lo = cdf - np.arange(0, m) / m
    value = float(max(hi.max(), lo.max()))
    return KappaEstimate(value=min(value, 1.0), se=0.0, method="empirical",
                         sample_size=m)


# ---------------------------------------------------------------------------
# exact enumeration for two-atom products
# ---------------------------------------------------------------------------

def _enumerate_two_atom(weights, hi, lo, p_hi):
    """Atoms and probabilities of sum_j w_j Y_j, Y_j iid on {hi, lo}."""
    values = np.array([0.0])
    probs = np.array([1.0])
    for w in weights:
        if w == 0.0:
            continue
        values = np.concatenate([values + w * hi, values + w * lo])
        probs = np.concatenate([probs * p_hi, probs * (1.0 - p_hi)])
    return values, probs


def _kappa_discrete_vs_normal(values, probs) -> float:
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = probs[order]
    cum = np.cumsum(w)
    cdf = ndtr(v)
    left = np.concatenate([[0.0], cum[:-1]])
    return float(np.max(np.maximum(np.abs(cum - cdf), np.abs(left - cdf))))


# ---------------------------------------------------------------------------
# Gil-Pelaez inversion
# ---------------------------------------------------------------------------

def _product_cf(weights: np.ndarray, innovation: InnovationLaw, t: np.ndarray):
    """prod_j cf(w_j t), chunked over coordinates to bound memory."""
    out = np.ones(t.size, dtype=complex)
    chunk = max(1, 4_000_000 // max(t.size, 1))
    for start in range(0, weights.size, chunk):
        block = weights[start:start + chunk]
        out = out * np.prod(innovation.cf_normalized(np.outer(block, t)), axis=0)
    return out


def _adaptive_t_max(cf_at, cap: float) -> float:
    """First scanned point past the Gaussian envelope with |cf| < 1e-12."""
    t_env = math.sqrt(-2.0 * math.log(_CF_TOL))  # where exp(-t^2/2) = 1e-12
    t_right = min(t_env * 1.05, cap)
    lo = t_right
    min_residual = np.inf
    while lo < cap:
        hi = min(lo + 10.0, cap)
        ts = np.arange(lo, hi, 0.05)
        if ts.size == 0:
            break
        mags = np.abs(cf_at(ts))
        min_residual = min(min_residual, float(mags.min()))
        below = np.nonzero(mags < _CF_TOL)[0]
        if below.size:
            return float(ts[below[0]])
        lo = hi
    raise AccuracyError(
        f"product characteristic function never fell below {_CF_TOL:g} up to "
        f"the cap {cap:g}", residual=min_residual)


def _golden_max(fn, lo, hi, iters=40):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return max(fc, fd)


def kolmogorov_from_cf(cf_values, grid: CfGrid | None = None) -> KappaEstimate:
    """sup_x |F(x) - Phi(x)| from a characteristic function.

    ``cf_values(t)`` must return the CF on an array of nonnegative points.
    The difference of CDFs is recovered by Gil-Pelaez inversion of
    cf - exp(-t^2/2) on a trapezoid grid, evaluated on the x-grid through a
    chirp-z transform and refined by golden-section search around the coarse
    argmax.
    """
    grid = grid or CfGrid()
    t_max = _adaptive_t_max(cf_values, grid.t_max)
    t = np.linspace(0.0, t_max, grid.n_t)
    psi = np.asarray(cf_values(t[1:]), dtype=complex) - np.exp(-0.5 * t[1:] ** 2)
    g = np.zeros(grid.n_t, dtype=complex)
    g[1:] = psi / t[1:]
    dt = t[1] - t[0]
    weights = np.full(grid.n_t, dt)
    weights[0] = weights[-1] = dt / 2.0
    g *= weights  # integrand at t=0 vanishes: both CFs are 1 + O(t^2)

    xs = grid.x_grid
    dx = xs[1] - xs[0]
    transform = czt(g, m=grid.n_x, w=np.exp(-1j * dt * dx), a=np.exp(1j * dt * xs[0]))
    delta = -transform.imag / math.pi

    def delta_at(x):
        return abs(float(np.sum(g * np.exp(-1j * t * x)).imag) / math.pi)

    j = int(np.argmax(np.abs(delta)))
    lo = xs[max(j - 1, 0)]
    hi = xs[min(j + 1, xs.size - 1)]
    value = max(float(np.abs(delta[j])), _golden_max(delta_at, lo, hi))
    return KappaEstimate(value=min(max(value, 0.0), 1.0), se=0.0,
                         method="cf_inversion", sample_size=0)


def _weights_from(theta) -> np.ndarray:
    if isinstance(theta, SphereVector):
        return theta.coords
    return np.asarray(theta, dtype=float)


def cf_product_kolmogorov(theta, innovation: InnovationLaw,
                          grid: CfGrid | None = None) -> KappaEstimate:
    """Deterministic Kolmogorov distance of sum_j w_j X_j to the standard
    normal, X_j iid with the given (normalized) innovation law.

    ``theta`` may be a SphereVector or any weight vector (the centered
    weights are not unit norm).  Two-atom laws with at most 20 nonzero
    weights are enumerated exactly; other cases go through CF inversion.
    """
    weights = _weights_from(theta)
    try:
        innovation.cf_normalized(np.zeros(1))
    except NotImplementedError as exc:
        raise UnsupportedCfError(
            f"no closed-form characteristic function for {innovation!r}") from exc
    atoms = innovation.atoms_normalized()
    if atoms is not None:
        nonzero = int(np.count_nonzero(weights))
        if nonzero <= _ENUMERATION_MAX_N:
            (hi, lo), (p_hi, _) = atoms
            values, probs = _enumerate_two_atom(weights, hi, lo, p_hi)
            value = _kappa_discrete_vs_normal(values, probs)
            return KappaEstimate(value=value, se=0.0, method="cf_enumeration",
                                 sample_size=0)
    return kolmogorov_from_cf(lambda t: _product_cf(weights, innovation, t), grid)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

def _projection_samples(model, weights, replicates, rng, n):
    """Projections of ``replicates`` fresh paths onto ``weights``, chunked."""
    out = np.empty(replicates)
    chunk = max(1, 4_000_000 // max(n, 1))
    done = 0
    while done < replicates:
        r = min(chunk, replicates - done)
        paths = simulate_paths(model, n, rng, replicates=r)
        out[done:done + r] = paths @ weights
        done += r
    return out


def conditional_kappa_mc(model: MartingaleModel, theta: SphereVector,
                         R_X: int, rng: np.random.Generator,
                         centered: bool = False) -> KappaEstimate:
    """Empirical distance of the (optionally centered) projection at a
    fixed direction, over R_X independent paths."""
    if R_X < 100:
        raise DimensionError("need at least 100 path replicates")
    weights = centered_weights(theta).theta_star if centered else theta.coords
    samples = _projection_samples(model, weights, R_X, rng, theta.n)
    base = kolmogorov_vs_normal(samples)
    return KappaEstimate(value=base.value, se=0.5 / math.sqrt(R_X),
                         method="empirical", sample_size=R_X)


def expected_kappa(model: MartingaleModel, n: int, R_theta: int,
                   rng: np.random.Generator, method: str = "cf",
                   R_X: int | None = None, grid: CfGrid | None = None,
                   centered: bool = False) -> KappaSummary:
    """Average conditional distance over fresh uniform directions.

    The cf method requires an iid model (the conditional law is a product
    only in that case); the empirical method needs R_X.  ``se`` is the
    between-direction standard error of the mean.
    """
    from .sphere import sample_uniform_sphere

    if R_theta < 1:
        raise DimensionError("need at least one direction")
    values = np.empty(R_theta)
    for r in range(R_theta):
        theta = sample_uniform_sphere(n, rng)
        if method == "cf":
            if not isinstance(model, IidMartingale):
                raise UnsupportedMethodError(
                    "cf method needs conditionally-iid projections (iid model)")
            w = centered_weights(theta).theta_star if centered else theta.coords
            values[r] = cf_product_kolmogorov(w, model.innovation, grid).value
        elif method == "empirical":
            if R_X is None:
                raise DimensionError("empirical method needs R_X")
            values[r] = conditional_kappa_mc(model, theta, R_X, rng,
                                             centered=centered).value
        else:
            raise UnsupportedMethodError(f"unknown method {method!r}")
    se = float(values.std(ddof=1) / math.sqrt(R_theta)) if R_theta > 1 else 0.0
    return KappaSummary(mean=float(values.mean()), se=se, n=n, method=method,
                        r_theta=R_theta)


def cf_distance_integral(theta, model_or_innovation, T0: float,
                         R_X: int | None = None,
                         rng: np.random.Generator | None = None,
                         n_t: int = 2048) -> float:
    """Trapezoid value of int_0^{T0} |f_theta(t) - exp(-t^2/2)| dt/t.

    ``f_theta`` is the exact product CF for an innovation law or iid model,
    or the empirical CF over R_X simulated paths for dependent models.  The
    integrand is 0 at t = 0 (both functions are 1 + O(t^2)).
    """
    if T0 < 1.0:
        raise DimensionError("T0 must be >= 1")
    weights = _weights_from(theta)
    t = np.linspace(0.0, T0, n_t)
    if isinstance(model_or_innovation, InnovationLaw):
        cf = _product_cf(weights, model_or_innovation, t[1:])
    elif isinstance(model_or_innovation, IidMartingale):
        cf = _product_cf(weights, model_or_innovation.innovation, t[1:])
    else:
        if R_X is None or rng is None:
            raise DimensionError("dependent models need R_X and an rng for "
                                 "the empirical characteristic function")
        samples = _projection_samples(model_or_innovation, weights, R_X, rng,
                                      weights.size)
        cf = np.exp(1j * np.outer(t[1:], samples)).mean(axis=1)
    integrand = np.zeros(n_t)
    integrand[1:] = np.abs(cf - np.exp(-0.5 * t[1:] ** 2)) / t[1:]
    return float(np.trapezoid(integrand, t))
