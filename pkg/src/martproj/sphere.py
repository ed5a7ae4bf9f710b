"""Uniform directions on the unit sphere and centered-projection geometry.

A direction ``theta`` on S^{n-1} weights a data vector X through the plain
projection <X, theta>.  The centered variant projects X onto the normalized
centered direction A theta / ||A theta|| with A = I - J/n (J the all-ones
matrix), which lives in the hyperplane orthogonal to the constant vector.
The Helmert orthonormal basis diagonalizes that split: its last row is the
normalized constant direction and the first n-1 rows span its complement,
which yields an O(n) weight recursion for the centered projection.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError, DimensionError

__all__ = [
    "SphereVector",
    "OrthonormalBasis",
    "CenteredWeights",
    "sample_uniform_sphere",
    "helmert_basis",
    "centered_weights",
    "centered_weights_batch",
    "project",
    "project_centered",
    "x_star",
]

_NORM_TOL = 1e-12
_DEGENERATE_TOL = 1e-13


@dataclass(frozen=True)
class SphereVector:
    """A point on the unit sphere S^{n-1}."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.ndim != 1 or coords.size < 1:
            raise DimensionError("sphere vector needs at least one coordinate")
        if abs(np.linalg.norm(coords) - 1.0) > _NORM_TOL:
            raise DimensionError("coordinates are not unit norm")

    @property
    def n(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class OrthonormalBasis:
    """Orthonormal basis stored as rows of a square matrix."""

    rows: np.ndarray

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class CenteredWeights:
    """Weight vectors realizing the centered projection of length-n data.

    ``theta_hat`` are the n-1 normalized Helmert coordinates of theta (a
    point on S^{n-2}), ``theta_script`` their suffix partial sums
    sum_{v>=l} theta_hat_v / sqrt(v(v+1)), and ``theta_star`` the length-n
    weights with sum_l theta_star_l X_l = <X, A theta>/||A theta||.
    """

    theta_hat: np.ndarray
    theta_script: np.ndarray
    theta_star: np.ndarray


def sample_uniform_sphere(n: int, rng: np.random.Generator) -> SphereVector:
    """Draw a uniform direction on S^{n-1} via normalized iid Gaussians.

    A zero Gaussian vector (possible only in floating point) is resampled.
    """
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return SphereVector(g / norm)


def helmert_basis(n: int) -> OrthonormalBasis:
    """Helmert orthonormal basis of R^n as an n x n row matrix.

    Row k (1-based, k < n) has 1/sqrt(k(k+1)) in its first k entries and
    -k/sqrt(k(k+1)) in entry k+1; row n is the normalized constant vector.
    """
    if n < 2:
        raise DimensionError(f"Helmert basis needs n >= 2, got {n}")
    rows = np.zeros((n, n))
    k = np.arange(1, n)
    scale = 1.0 / np.sqrt(k * (k + 1.0))
    for i, (kk, s) in enumerate(zip(k, scale)):
        rows[i, :kk] = s
        rows[i, kk] = -kk * s
    rows[n - 1, :] = 1.0 / np.sqrt(n)
    return OrthonormalBasis(rows)


def _hat_coordinates(coords: np.ndarray):
    """First n-1 Helmert coordinates of ``coords`` and their norm, in O(n)."""
    n = coords.size
    k = np.arange(1, n)
    running_mean = np.cumsum(coords)[: n - 1] / k
    b = np.sqrt(k / (k + 1.0)) * (running_mean - coords[1:])
    norm = np.linalg.norm(b)
    return b, norm


def centered_weights(theta: SphereVector) -> CenteredWeights:
    """Weight vectors of the centered projection for direction ``theta``.

    Computed by the O(n) suffix recursion on the Helmert coordinates; the
    basis matrix is never materialized.  Directions proportional to the
    constant vector have no centered projection and are rejected.
    """
    coords = theta.coords
    n = coords.size
    if n < 2:
        raise DimensionError("centered projection needs n >= 2")
    b, norm = _hat_coordinates(coords)
    if norm <= _DEGENERATE_TOL:
        raise DegenerateDirectionError("direction proportional to the constant vector")
    hat = b / norm
    k = np.arange(1, n)
    # suffix sums evaluated right-to-left
    script = np.cumsum((hat / np.sqrt(k * (k + 1.0)))[::-1])[::-1]
    star = np.empty(n)
    star[0] = script[0]
    star[1 : n - 1] = script[1:] - np.sqrt((k[:-1]) / (k[:-1] + 1.0)) * hat[:-1]
    star[n - 1] = -np.sqrt((n - 1.0) / n) * hat[-1]
    return CenteredWeights(theta_hat=hat, theta_script=script, theta_star=star)


def centered_weights_batch(thetas: np.ndarray) -> np.ndarray:
    """theta_star rows for a (R, n) batch of unit directions.

    Vectorized version of :func:`centered_weights` used by concentration
    diagnostics; rows proportional to the constant vector are rejected.
    """
    thetas = np.asarray(thetas, dtype=float)
    R, n = thetas.shape
    k = np.arange(1, n)
    running_mean = np.cumsum(thetas, axis=1)[:, : n - 1] / k
    b = np.sqrt(k / (k + 1.0)) * (running_mean - thetas[:, 1:])
    norms = np.linalg.norm(b, axis=1, keepdims=True)
    if np.any(norms <= _DEGENERATE_TOL):
        raise DegenerateDirectionError("batch contains a constant-direction row")
    hat = b / norms
    script = np.cumsum((hat / np.sqrt(k * (k + 1.0)))[:, ::-1], axis=1)[:, ::-1]
    star = np.empty((R, n))
    star[:, 0] = script[:, 0]
    star[:, 1 : n - 1] = script[:, 1:] - np.sqrt(k[:-1] / (k[:-1] + 1.0)) * hat[:, :-1]
    star[:, n - 1] = -np.sqrt((n - 1.0) / n) * hat[:, -1]
    return star


def project(X: np.ndarray, theta: SphereVector) -> float:
    """Weighted sum <X, theta>."""
    X = np.asarray(X, dtype=float)
    if X.shape != theta.coords.shape:
        raise DimensionError(f"length mismatch: X has {X.size}, theta has {theta.n}")
    return float(X @ theta.coords)


def project_centered(X: np.ndarray, theta: SphereVector) -> float:
    """Centered projection <X, A theta>/||A theta|| with A = I - J/n."""
    X = np.asarray(X, dtype=float)
    if X.shape != theta.coords.shape:
        raise DimensionError(f"length mismatch: X has {X.size}, theta has {theta.n}")
    coords = theta.coords
    n = coords.size
    if n < 2:
        raise DimensionError("centered projection needs n >= 2")
    centered = coords - coords.mean()
    norm = np.linalg.norm(centered)
    if norm <= _DEGENERATE_TOL:
        raise DegenerateDirectionError("direction proportional to the constant vector")
    return float(X @ centered / norm)


def x_star(X: np.ndarray) -> np.ndarray:
    """Helmert image of the data: X*_k = sqrt(k/(k+1)) (mean(X_1..X_k) - X_{k+1}).

    Satisfies sum_k theta_hat_k X*_k = sum_l theta_star_l X_l for every
    direction theta.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 1 or X.size < 2:
        raise DimensionError("x_star needs a vector of length >= 2")
    b, _ = _hat_coordinates(X)
    return b
