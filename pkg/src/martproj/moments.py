"""Two-atom moment matching and conditional-moment functionals.

Given a variance sigma2 and a third moment beta3 there is a distribution on
exactly two atoms {m, m'} with mean 0, variance sigma2, third moment beta3
and fourth moment sigma2^2 + beta3^2/sigma2.  These laws drive the surrogate
variables that replace the weighted summands theta_k X_k one at a time: the
surrogate attached to coordinate k matches the conditional moments
beta3_k = theta_k^3 E(X^3) + 3 theta_k^2 sum_{l<k} theta_l a(k-l) with
a(u) = E(X_0 X_u^2), and beta4_k = theta_k^4 + beta3_k^2/theta_k^2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientTableError, MartprojError

__all__ = [
    "TwoPointLaw",
    "BetaMoments",
    "two_point_from_moments",
    "beta_moments",
    "sample_surrogates",
    "gamma_event",
    "GammaEvent",
]


@dataclass(frozen=True)
class TwoPointLaw:
    """Two-atom law {m w.p. t, m' w.p. 1-t} matching (0, sigma2, beta3, ...)."""

    m: float
    m_prime: float
    t: float
    sigma2: float
    beta3: float

    def moment(self, order: int) -> float:
        return self.t * self.m**order + (1.0 - self.t) * self.m_prime**order

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        return np.where(rng.random(size) < self.t, self.m, self.m_prime)


@dataclass(frozen=True)
class BetaMoments:
    """Conditional third/fourth surrogate moments per coordinate."""

    beta3: np.ndarray
    beta4: np.ndarray


def _two_point_arrays(sigma2, beta3):
    """Vectorized atoms and upper-atom probability; cancellation-safe.

    For beta3 < 0 the sum beta3 + sqrt(beta3^2 + 4 sigma2^3) loses digits,
    so it is rewritten through the conjugate 4 sigma2^3 / (sqrt(...) - beta3).
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    beta3 = np.asarray(beta3, dtype=float)
    root = np.sqrt(beta3 * beta3 + 4.0 * sigma2**3)
    s = np.where(beta3 >= 0.0, beta3 + root, 4.0 * sigma2**3 / (root - beta3))
    m = s / (2.0 * sigma2)
    m_prime = -sigma2 / m
    t = 2.0 * sigma2**3 / (4.0 * sigma2**3 + beta3 * s)
    return m, m_prime, t


def two_point_from_moments(sigma2: float, beta3: float) -> TwoPointLaw:
    """Construct the unique two-atom law with mean 0, variance ``sigma2``
    and third moment ``beta3``.

    Its fourth moment is forced to sigma2^2 + beta3^2/sigma2.
    """
    if not np.isfinite(sigma2) or not np.isfinite(beta3):
        raise MartprojError("sigma2 and beta3 must be finite")
    if sigma2 <= 0.0:
        raise MartprojError(f"variance must be positive, got {sigma2}")
    m, m_prime, t = _two_point_arrays(sigma2, beta3)
    return TwoPointLaw(m=float(m), m_prime=float(m_prime), t=float(t),
                       sigma2=float(sigma2), beta3=float(beta3))


def beta_moments(theta, table) -> BetaMoments:
    """Surrogate moments beta3_k, beta4_k for direction ``theta``.

    ``table`` must provide ``a(u)`` for u = 0..n-1 (a(0) is the third
    moment of X_0) for a unit-variance process.  Lag values beyond the
    table horizon are an error, never treated as zero.
    """
    coords = np.asarray(getattr(theta, "coords", theta), dtype=float)
    n = coords.size
    if table.horizon < n - 1:
        raise InsufficientTableError(
            f"moment table horizon {table.horizon} < n-1 = {n - 1}")
    a = np.zeros(n)
    a[1:] = [table.a(u) for u in range(1, n)]
    # cross term sum_{l<k} theta_l a(k-l) via full convolution, one lag per k
    cross = np.convolve(coords, a)[:n]
    beta3 = coords**3 * table.a(0) + 3.0 * coords**2 * cross
    beta4 = np.zeros(n)
    nz = coords != 0.0
    beta4[nz] = coords[nz] ** 4 + beta3[nz] ** 2 / coords[nz] ** 2
    beta3[~nz] = 0.0
    return BetaMoments(beta3=beta3, beta4=beta4)


def sample_surrogates(theta, betas: BetaMoments, rng: np.random.Generator) -> np.ndarray:
    """One draw of the conditionally independent two-atom surrogates.

    Coordinate k is drawn from the two-atom law with variance theta_k^2 and
    third moment beta3_k; coordinates with theta_k = 0 are identically 0.
    """
    coords = np.asarray(getattr(theta, "coords", theta), dtype=float)
    if betas.beta3.size != coords.size:
        raise DimensionError("beta moments and theta have different lengths")
    out = np.zeros(coords.size)
    nz = coords != 0.0
    m, m_prime, t = _two_point_arrays(coords[nz] ** 2, betas.beta3[nz])
    u = rng.random(int(nz.sum()))
    out[nz] = np.where(u < t, m, m_prime)
    return out


@dataclass(frozen=True)
class GammaEvent:
    """Outcome of the three surrogate-moment magnitude conditions."""

    holds: bool
    margins: tuple


def gamma_event(theta, betas: BetaMoments, T0: float) -> GammaEvent:
    """Check the good event max_k |beta3_k| T0 <= 1, T0^3 |sum beta3_k| <= 1,
    T0^4 sum beta4_k <= 1, returning the three left-hand sides as margins."""
    if T0 < 1.0:
        raise MartprojError(f"T0 must be >= 1, got {T0}")
    m1 = float(np.max(np.abs(betas.beta3)) * T0)
    m2 = float(T0**3 * abs(np.sum(betas.beta3)))
    m3 = float(T0**4 * np.sum(betas.beta4))
    return GammaEvent(holds=(m1 <= 1.0 and m2 <= 1.0 and m3 <= 1.0),
                      margins=(m1, m2, m3))
