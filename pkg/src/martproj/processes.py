"""Generators of strictly stationary, unit-variance martingale differences.

Three families are provided:

* iid innovations (Rademacher, standard Gaussian, or a general two-atom law),
* ARCH with power-law coefficients c_j = kappa j^{-b} truncated at J lags,
  simulated by the finite volatility recursion after a burn-in,
* bounded harmonic functions of a birth/return-to-zero Markov chain on the
  integer states -N..N, for which kernels, stationary laws and mixed moments
  are available in closed (finite linear algebra) form.

All simulators consume an explicit ``numpy.random.Generator`` and are
deterministic functions of (model, n, stream).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    InsufficientTableError,
    NonStationaryModelError,
    NumericFailureError,
    UnsupportedMethodError,
)
from .moments import TwoPointLaw

__all__ = [
    "InnovationLaw",
    "Rademacher",
    "StandardGaussian",
    "TwoPointInnovation",
    "ArchModel",
    "TruncatedChain",
    "default_a_schedule",
    "MartingaleModel",
    "IidMartingale",
    "ArchMartingale",
    "MarkovMartingale",
    "MomentTable",
    "simulate_path",
    "simulate_paths",
    "stationary_distribution",
    "kernel_apply",
    "moment_table",
]


# ---------------------------------------------------------------------------
# innovation laws
# ---------------------------------------------------------------------------

class InnovationLaw:
    """Centered innovation with known variance and finite fourth moment.

    ``sample_normalized`` draws the unit-variance rescaling of the law;
    moments and characteristic functions below always refer to that
    normalized variable.
    """

    variance: float

    def sample_normalized(self, rng, size):
        raise NotImplementedError

    def third_moment_normalized(self) -> float:
        raise NotImplementedError

    def fourth_moment_normalized(self) -> float:
        raise NotImplementedError

    def cf_normalized(self, u: np.ndarray) -> np.ndarray:
        """Characteristic function of the normalized law at points ``u``."""
        raise NotImplementedError

    def atoms_normalized(self):
        """(values, probabilities) for two-atom laws, else None."""
        return None


@dataclass(frozen=True)
class Rademacher(InnovationLaw):
    variance: float = 1.0

    def sample_normalized(self, rng, size):
        return np.where(rng.random(size) < 0.5, 1.0, -1.0)

    def third_moment_normalized(self):
        return 0.0

    def fourth_moment_normalized(self):
        return 1.0

    def cf_normalized(self, u):
        return np.cos(u)

    def atoms_normalized(self):
        return np.array([1.0, -1.0]), np.array([0.5, 0.5])


@dataclass(frozen=True)
class StandardGaussian(InnovationLaw):
    variance: float = 1.0

    def sample_normalized(self, rng, size):
        return rng.standard_normal(size)

    def third_moment_normalized(self):
        return 0.0

    def fourth_moment_normalized(self):
        return 3.0

    def cf_normalized(self, u):
        return np.exp(-0.5 * u * u)


@dataclass(frozen=True)
class TwoPointInnovation(InnovationLaw):
    """Innovation distributed as a given two-atom law, rescaled to variance 1."""

    law: TwoPointLaw = None

    @property
    def variance(self):
        return self.law.sigma2

    def _atoms(self):
        s = math.sqrt(self.law.sigma2)
        return self.law.m / s, self.law.m_prime / s, self.law.t

    def sample_normalized(self, rng, size):
        hi, lo, p = self._atoms()
        return np.where(rng.random(size) < p, hi, lo)

    def third_moment_normalized(self):
        return self.law.beta3 / self.law.sigma2**1.5

    def fourth_moment_normalized(self):
        return 1.0 + self.law.beta3**2 / self.law.sigma2**3

    def cf_normalized(self, u):
        hi, lo, p = self._atoms()
        return p * np.exp(1j * u * hi) + (1.0 - p) * np.exp(1j * u * lo)

    def atoms_normalized(self):
        hi, lo, p = self._atoms()
        return np.array([hi, lo]), np.array([p, 1.0 - p])


# ---------------------------------------------------------------------------
# ARCH
# ---------------------------------------------------------------------------

def _power_law_coeffs(kappa: float, b: float, J: int) -> np.ndarray:
    if J < 0:
        raise DimensionError("J must be >= 0")
    if kappa < 0:
        raise NonStationaryModelError("kappa must be >= 0")
    if b <= 1.0:
        raise NonStationaryModelError(f"coefficient exponent b must exceed 1, got {b}")
    j = np.arange(1, J + 1, dtype=float)
    return kappa * j**(-b)


@dataclass(frozen=True)
class ArchModel:
    """Volatility recursion sigma_t^2 = c + sum_{j<=J} c_j X_{t-j}^2.

    Coefficients follow the power-law rule c_j = kappa j^{-b}; their sum
    must stay below 1 for a stationary solution to exist.  ``kappa`` and
    ``b`` are kept for condition reporting.
    """

    c: float
    kappa: float
    b: float
    J: int
    innovation: InnovationLaw = field(default_factory=StandardGaussian)
    burn_in: int = 0

    def __post_init__(self):
        if self.c < 0:
            raise NonStationaryModelError("intercept c must be >= 0")
        coeffs = _power_law_coeffs(self.kappa, self.b, self.J)
        total = float(coeffs.sum())
        if total >= 1.0:
            raise NonStationaryModelError(
                f"sum of ARCH coefficients is {total:.6g} >= 1; no stationary solution")
        object.__setattr__(self, "_coeffs", coeffs)
        burn = self.burn_in if self.burn_in > 0 else max(10 * self.J, 10)
        object.__setattr__(self, "_burn", int(burn))

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def coeff_sum(self) -> float:
        return float(self._coeffs.sum())

    @property
    def v2(self) -> float:
        """Stationary variance c / (1 - sum c_j) of the raw process."""
        return self.c / (1.0 - self.coeff_sum)


# ---------------------------------------------------------------------------
# truncated Markov chain
# ---------------------------------------------------------------------------

def default_a_schedule(N: int, epsilon: float = 0.1) -> np.ndarray:
    """Climb probabilities a_0..a_{N-1}: a_i = 1 - (3 + (1+eps)/log i)/i
    where that value lies in [1/2, 1), and 1/2 elsewhere (always a_0 = 1/2)."""
    a = np.full(N, 0.5)
    for i in range(2, N):
        v = 1.0 - (3.0 + (1.0 + epsilon) / math.log(i)) / i
        if 0.5 <= v < 1.0:
            a[i] = v
    return a


def _stationary_from_kernel(K: np.ndarray) -> np.ndarray:
    """Stationary row vector of a row-stochastic matrix.

    Solves (K^t - I) pi = 0 with the normalization sum(pi) = 1 replacing
    one equation, then applies one power-iteration refinement.
    """
    S = K.shape[0]
    M = K.T - np.eye(S)
    M[-1, :] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"stationary system is singular: {exc}") from exc
    pi = pi @ K
    total = pi.sum()
    if not np.isfinite(total) or total <= 0:
        raise NumericFailureError("stationary solve produced a non-probability vector")
    pi = pi / total
    residual = float(np.max(np.abs(pi @ K - pi)))
    if residual > 1e-10 or np.any(pi < -1e-12):
        raise NumericFailureError(f"stationary residual too large: {residual:.3e}")
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


@dataclass(frozen=True)
class TruncatedChain:
    """Finite-state chain with a bounded zero-mean harmonic observable.

    The default family climbs from state y to y +/- 1 (away from zero) with
    probability a_{|y|} and otherwise drops back to 0; the state space is
    truncated at +/-N, where the chain holds its place with probability
    a_{N-1} instead of climbing further.  That boundary rule keeps
    K f = 0 exactly for the two generating observables f1 (odd indicator
    of +/-1) and f2 (see ``harmonic_f2``).

    ``from_kernel`` admits arbitrary finite chains for oracle tests.
    """

    K: np.ndarray
    pi: np.ndarray
    f_values: np.ndarray
    states: np.ndarray
    half_width: int | None = None
    a: np.ndarray | None = None
    f_coeffs: tuple | None = None

    @property
    def n_states(self) -> int:
        return self.K.shape[0]

    @property
    def scale(self) -> float:
        """Normalization making X = scale * f(Y) unit variance under pi."""
        second = float(self.pi @ self.f_values**2)
        if second <= 0:
            raise NumericFailureError("observable is pi-a.s. zero; cannot normalize")
        return 1.0 / math.sqrt(second)

    @property
    def x_values(self) -> np.ndarray:
        """Normalized observable values scale * f per state."""
        return self.scale * self.f_values

    @classmethod
    def build(cls, N: int, a: np.ndarray | None = None,
              f_coeffs: tuple = (1.0, 0.0), epsilon: float = 0.1) -> "TruncatedChain":
        if N < 2:
            raise DimensionError("truncated chain needs half-width N >= 2")
        if a is None:
            a = default_a_schedule(N, epsilon)
        a = np.asarray(a, dtype=float)
        if a.size != N or a[0] != 0.5 or np.any(a < 0.5) or np.any(a >= 1.0):
            raise DimensionError("schedule must have N entries in [1/2, 1) with a_0 = 1/2")
        S = 2 * N + 1
        zero = N  # index of state 0
        K = np.zeros((S, S))
        K[zero, zero + 1] = 0.5
        K[zero, zero - 1] = 0.5
        for m in range(1, N):
            K[zero + m, zero + m + 1] = a[m]
            K[zero + m, zero] = 1.0 - a[m]
            K[zero - m, zero - m - 1] = a[m]
            K[zero - m, zero] = 1.0 - a[m]
        # boundary: hold with the last climb probability, else drop to 0
        K[zero + N, zero + N] = a[N - 1]
        K[zero + N, zero] = 1.0 - a[N - 1]
        K[zero - N, zero - N] = a[N - 1]
        K[zero - N, zero] = 1.0 - a[N - 1]
        states = np.arange(-N, N + 1)
        alpha, beta = f_coeffs
        f_values = alpha * harmonic_f1(states) + beta * harmonic_f2(states, a)
        pi = _stationary_from_kernel(K)
        return cls(K=K, pi=pi, f_values=f_values, states=states,
                   half_width=N, a=a, f_coeffs=(float(alpha), float(beta)))

    @classmethod
    def from_kernel(cls, K: np.ndarray, f_values: np.ndarray,
                    states: np.ndarray | None = None) -> "TruncatedChain":
        K = np.asarray(K, dtype=float)
        f_values = np.asarray(f_values, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != f_values.size:
            raise DimensionError("kernel must be square and match the observable")
        if np.max(np.abs(K.sum(axis=1) - 1.0)) > 1e-12 or np.any(K < 0):
            raise DimensionError("kernel rows must be probability vectors")
        if states is None:
            states = np.arange(K.shape[0])
        pi = _stationary_from_kernel(K)
        return cls(K=K, pi=pi, f_values=f_values, states=np.asarray(states))


def harmonic_f1(states: np.ndarray) -> np.ndarray:
    """Odd observable: +1 at state 1, -1 at state -1, zero elsewhere."""
    return np.where(states == 1, 1.0, np.where(states == -1, -1.0, 0.0))


def harmonic_f2(states: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Even observable: 1 at 0, 0 at +/-1, and 1 - 1/a_{|s|-1} beyond."""
    out = np.zeros(states.size)
    for i, s in enumerate(states):
        m = abs(int(s))
        if m == 0:
            out[i] = 1.0
        elif m >= 2:
            out[i] = 1.0 - 1.0 / a[m - 1]
    return out


def stationary_distribution(chain: TruncatedChain) -> np.ndarray:
    """Stationary probability vector of ``chain`` (pi K = pi, sum = 1)."""
    return _stationary_from_kernel(chain.K)


def kernel_apply(chain: TruncatedChain, g) -> np.ndarray:
    """(K g)(y) = sum_z K(y, z) g(z); ``g`` is a state function or vector."""
    if callable(g):
        gvals = np.array([g(s) for s in chain.states], dtype=float)
    else:
        gvals = np.asarray(g, dtype=float)
        if gvals.size != chain.n_states:
            raise DimensionError("observable length does not match the state space")
    return chain.K @ gvals


# ---------------------------------------------------------------------------
# martingale models
# ---------------------------------------------------------------------------

class MartingaleModel:
    """Base for unit-variance strictly stationary martingale differences."""

    name: str = "martingale"

    def simulate(self, n: int, rng: np.random.Generator, replicates: int = 1) -> np.ndarray:
        """(replicates, n) array of unit-variance paths."""
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class IidMartingale(MartingaleModel):
    innovation: InnovationLaw = field(default_factory=StandardGaussian)

    @property
    def name(self):
        return f"iid-{type(self.innovation).__name__.lower()}"

    def simulate(self, n, rng, replicates=1):
        if n < 1:
            raise DimensionError("path length must be >= 1")
        return self.innovation.sample_normalized(rng, (replicates, n))


@dataclass(frozen=True)
class ArchMartingale(MartingaleModel):
    arch: ArchModel = None

    @property
    def name(self):
        return f"arch(kappa={self.arch.kappa},b={self.arch.b},J={self.arch.J})"

    def simulate(self, n, rng, replicates=1):
        if n < 1:
            raise DimensionError("path length must be >= 1")
        x2, _ = self._warm_state(replicates, rng)
        out, _ = self._run(x2, n, rng)
        return out / math.sqrt(self.arch.v2)

    def _warm_state(self, replicates, rng):
        """Window of lagged squared values after burn-in, started at the
        stationary mean."""
        arch = self.arch
        J = arch.J
        x2 = np.full((replicates, J), arch.v2) if J > 0 else np.zeros((replicates, 0))
        if arch._burn > 0:
            _, x2 = self._run(x2, arch._burn, rng)
        return x2, None

    def _run(self, x2, steps, rng):
        """Advance the recursion ``steps`` times; returns (raw paths, window).

        ``x2[:, j]`` holds X_{t-1-j}^2 so that sigma_t^2 = c + x2 @ coeffs.
        """
        arch = self.arch
        R = x2.shape[0]
        eta = arch.innovation.sample_normalized(rng, (steps, R))
        out = np.empty((R, steps))
        coeffs = arch.coeffs
        for tstep in range(steps):
            sigma2 = arch.c + (x2 @ coeffs if arch.J > 0 else 0.0)
            x = np.sqrt(sigma2) * eta[tstep]
            out[:, tstep] = x
            if arch.J > 0:
                x2 = np.concatenate([(x * x)[:, None], x2[:, :-1]], axis=1)
        return out, x2


@dataclass(frozen=True)
class MarkovMartingale(MartingaleModel):
    chain: TruncatedChain = None

    @property
    def name(self):
        N = self.chain.half_width
        return f"markov(N={N})" if N is not None else "markov(custom)"

    def simulate(self, n, rng, replicates=1):
        if n < 1:
            raise DimensionError("path length must be >= 1")
        states = self._initial_states(replicates, rng)
        xvals = self.chain.x_values
        out = np.empty((replicates, n))
        out[:, 0] = xvals[states]
        if self.chain.half_width is not None:
            up_state, down_state, up_prob = self._step_tables()
            for tstep in range(1, n):
                u = rng.random(replicates)
                states = np.where(u < up_prob[states], up_state[states],
                                  down_state[states])
                out[:, tstep] = xvals[states]
        else:
            cum = np.cumsum(self.chain.K, axis=1)
            top = self.chain.n_states - 1
            for tstep in range(1, n):
                u = rng.random(replicates)
                states = (cum[states] < u[:, None]).sum(axis=1).clip(0, top)
                out[:, tstep] = xvals[states]
        return out

    def _initial_states(self, replicates, rng):
        cdf = np.cumsum(self.chain.pi)
        return np.searchsorted(cdf, rng.random(replicates), side="right").clip(
            0, self.chain.n_states - 1)

    def _step_tables(self):
        """Per-state (climb target, drop target, climb probability).

        From 0 the chain always leaves, half up half down, so 'drop' from 0
        is the -1 state; boundary states hold with the last climb
        probability instead of climbing out.
        """
        N = self.chain.half_width
        a = self.chain.a
        zero = N
        S = self.chain.n_states
        idx = np.arange(S)
        signed = idx - zero
        mag = np.abs(signed)
        a_ext = np.concatenate([a, [a[N - 1]]])
        up_prob = a_ext[mag]
        sign = np.where(signed == 0, 1, np.sign(signed))
        up_state = np.where(mag == N, idx, zero + sign * (mag + 1))
        down_state = np.where(signed == 0, zero - 1, zero)
        return up_state, down_state, up_prob


def simulate_paths(model: MartingaleModel, n: int, rng: np.random.Generator,
                   replicates: int = 1) -> np.ndarray:
    """(replicates, n) unit-variance paths; deterministic in (model, n, stream)."""
    return model.simulate(n, rng, replicates)


def simulate_path(model: MartingaleModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Single path of length n."""
    return simulate_paths(model, n, rng, replicates=1)[0]


# ---------------------------------------------------------------------------
# moment tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentTable:
    """Mixed moments of a unit-variance process up to a lag horizon.

    ``a_values[u]`` = E(X_0 X_u^2) for u = 0..horizon (so a_values[0] is the
    third moment), ``cov_sq[u]`` = Cov(X_0^2, X_u^2).
    """

    a_values: np.ndarray
    cov_sq: np.ndarray
    method: str

    @property
    def horizon(self) -> int:
        return self.a_values.size - 1

    def a(self, u: int) -> float:
        if u > self.horizon:
            raise InsufficientTableError(f"lag {u} beyond table horizon {self.horizon}")
        return float(self.a_values[u])

    @property
    def third_moment(self) -> float:
        return float(self.a_values[0])


def moment_table(model: MartingaleModel, umax: int, method: str = "exact",
                 rng: np.random.Generator | None = None,
                 mc_length: int = 200_000) -> MomentTable:
    """Table of a(u) = E(X_0 X_u^2) and Cov(X_0^2, X_u^2) for u <= umax.

    Exact evaluation is available for iid models (everything past lag 0
    vanishes) and Markov functionals (stationary vector plus kernel powers);
    ARCH requires the Monte Carlo method and a stream.
    """
    if umax < 0:
        raise DimensionError("umax must be >= 0")
    if method == "exact":
        if isinstance(model, IidMartingale):
            a = np.zeros(umax + 1)
            a[0] = model.innovation.third_moment_normalized()
            cov = np.zeros(umax + 1)
            cov[0] = model.innovation.fourth_moment_normalized() - 1.0
            return MomentTable(a_values=a, cov_sq=cov, method="exact")
        if isinstance(model, MarkovMartingale):
            return _markov_moment_table(model.chain, umax)
        raise UnsupportedMethodError(
            f"exact moment table unavailable for {model.describe()}; use monte_carlo")
    if method == "monte_carlo":
        if rng is None:
            raise UnsupportedMethodError("monte_carlo moment table needs an rng")
        return _mc_moment_table(model, umax, rng, mc_length)
    raise UnsupportedMethodError(f"unknown moment-table method {method!r}")


def _markov_moment_table(chain: TruncatedChain, umax: int) -> MomentTable:
    x = chain.x_values
    pi = chain.pi
    x2 = x * x
    a = np.empty(umax + 1)
    cov = np.empty(umax + 1)
    g = x2.copy()  # K^u applied to the squared observable
    a[0] = float(pi @ (x * x2))
    cov[0] = float(pi @ (x2 * x2)) - 1.0
    for u in range(1, umax + 1):
        g = chain.K @ g
        a[u] = float(pi @ (x * g))
        cov[u] = float(pi @ (x2 * g)) - 1.0
    return MomentTable(a_values=a, cov_sq=cov, method="exact")


def _mc_moment_table(model, umax, rng, mc_length) -> MomentTable:
    path = simulate_paths(model, mc_length, rng, replicates=1)[0]
    sq = path * path
    a = np.empty(umax + 1)
    cov = np.empty(umax + 1)
    a[0] = float(np.mean(path * sq))
    cov[0] = float(np.var(sq))
    for u in range(1, umax + 1):
        a[u] = float(np.mean(path[:-u] * sq[u:]))
        cov[u] = float(np.mean((sq[:-u] - sq.mean()) * (sq[u:] - sq.mean())))
    return MomentTable(a_values=a, cov_sq=cov, method="monte_carlo")
