"""Built-in oracle suites behind the ``selftest`` CLI command.

Each check recomputes a quantity by an independent brute-force route
(direct two-atom expectations, path enumeration over all trajectories,
materialized basis matrices) and compares it to the production path.
"""

import itertools

import numpy as np

from .dependence import gamma_exact_markov
from .moments import two_point_from_moments
from .processes import TruncatedChain
from .rng import derive_rng
from .sphere import centered_weights, helmert_basis, sample_uniform_sphere, x_star

__all__ = ["run_selftest", "enumerate_gamma", "toy_chains"]


def _check_moment_grid():
    sigmas = np.linspace(0.1, 10.0, 20)
    betas = np.linspace(-5.0, 5.0, 10)
    worst = 0.0
    for s2 in sigmas:
        for b3 in betas:
            law = two_point_from_moments(float(s2), float(b3))
            targets = (0.0, s2, b3, s2**2 + b3**2 / s2)
            for order, target in zip((1, 2, 3, 4), targets):
                got = law.moment(order)
                err = abs(got - target) / max(1.0, abs(target))
                worst = max(worst, err)
            if not (0.0 < law.t < 1.0 and law.m > 0.0 > law.m_prime):
                return False, "atom layout violated on the grid"
    return worst <= 1e-10, f"max relative moment error {worst:.3e}"


def toy_chains():
    """Small chains exercising the exact dependence computations."""
    rng = derive_rng(2024, "toy-chains")
    chains = []
    K2 = np.array([[0.3, 0.7], [0.6, 0.4]])
    chains.append(("two-state", K2, np.array([1.0, -0.8])))
    pi3 = np.array([0.2, 0.5, 0.3])
    chains.append(("iid-functional", np.tile(pi3, (3, 1)), np.array([1.0, -0.4, 0.2])))
    K3 = np.array([[0.1, 0.6, 0.3], [0.5, 0.2, 0.3], [0.25, 0.25, 0.5]])
    chains.append(("three-state", K3, np.array([0.9, -1.1, 0.3])))
    K4 = rng.random((4, 4)) + 0.05
    K4 /= K4.sum(axis=1, keepdims=True)
    chains.append(("four-state", K4, rng.standard_normal(4)))
    out = []
    for name, K, f in chains:
        chain = TruncatedChain.from_kernel(K, f)
        f = f - chain.pi @ f  # center the observable under pi
        out.append((name, TruncatedChain.from_kernel(K, f)))
    return out


def _path_weight(K, path):
    w = 1.0
    for a, b in zip(path, path[1:]):
        w *= K[a, b]
    return w


def _cond_exp(K, start, length, fn):
    """E[fn(path) | Y_0 = start] over all trajectories of ``length`` steps."""
    S = K.shape[0]
    total = 0.0
    for tail in itertools.product(range(S), repeat=length):
        path = (start,) + tail
        total += _path_weight(K, path) * fn(path)
    return total


def enumerate_gamma(chain, vmax, ell_max):
    """Dependence profile by full path enumeration (oracle)."""
    K, pi = chain.K, chain.pi
    x = chain.x_values
    S = K.shape[0]
    g02 = np.zeros(vmax)
    g12 = np.zeros(vmax)
    g22 = np.zeros(vmax)
    g13 = np.zeros(vmax)
    for v in range(1, vmax + 1):
        dev = np.array([
            _cond_exp(K, y, v, lambda p: x[p[-1]] ** 2) - 1.0 for y in range(S)
        ])
        g02[v - 1] = np.sum(pi * np.abs(dev))
        g12[v - 1] = np.sum(pi * np.abs(x) * np.abs(dev))
        best22 = 0.0
        for ell in range(ell_max + 1):
            total = 0.0
            for head in itertools.product(range(S), repeat=ell + 1):
                total += (pi[head[0]] * _path_weight(K, head)
                          * abs(x[head[0]] * x[head[-1]]) * abs(dev[head[-1]]))
            best22 = max(best22, total)
        g22[v - 1] = best22
        best13 = 0.0
        for ell in range(ell_max + 1):
            fn = lambda p: x[p[v]] * x[p[v + ell]] ** 2
            cond = np.array([_cond_exp(K, y, v + ell, fn) for y in range(S)])
            mean = np.sum(pi * cond)
            best13 = max(best13, float(np.sum(pi * np.abs(x) * np.abs(cond - mean))))
        g13[v - 1] = best13
    gamma = np.maximum.reduce([g02, g12, g22, g13])
    return g02, g12, g22, g13, gamma


def _check_gamma_oracle():
    worst = 0.0
    for name, chain in toy_chains():
        prof = gamma_exact_markov(chain, vmax=3, ell_max=2)
        cols = enumerate_gamma(chain, vmax=3, ell_max=2)
        for got, want in zip((prof.g02, prof.g12, prof.g22, prof.g13, prof.gamma), cols):
            err = float(np.max(np.abs(got - want)))
            worst = max(worst, err)
        if worst > 1e-10:
            return False, f"{name}: oracle mismatch {worst:.3e}"
    return True, f"max oracle deviation {worst:.3e}"


def _check_helmert():
    worst_ortho = 0.0
    for n in (2, 3, 17, 256):
        B = helmert_basis(n).rows
        worst_ortho = max(worst_ortho, float(np.max(np.abs(B @ B.T - np.eye(n)))))
    if worst_ortho > 1e-12:
        return False, f"orthonormality error {worst_ortho:.3e}"
    rng = derive_rng(7, "selftest-helmert")
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 40))
        theta = sample_uniform_sphere(n, rng)
        X = rng.standard_normal(n)
        w = centered_weights(theta)
        centered = theta.coords - theta.coords.mean()
        direct = X @ centered / np.linalg.norm(centered)
        worst = max(worst, abs(w.theta_star @ X - direct))
        worst = max(worst, abs(w.theta_hat @ x_star(X) - w.theta_star @ X))
        worst = max(worst, abs(np.sum(w.theta_hat**2) - 1.0))
    return worst <= 1e-10, f"max identity deviation {worst:.3e}"


def run_selftest():
    """Run all oracle suites; returns a list of (name, passed, detail)."""
    checks = [
        ("two-point moment grid", _check_moment_grid),
        ("dependence path-enumeration oracle", _check_gamma_oracle),
        ("centered-projection identities", _check_helmert),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # surface, don't hide, oracle crashes
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
