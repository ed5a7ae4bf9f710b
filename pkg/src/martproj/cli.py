"""Command-line front end.

Subcommands: ``sweep`` (rate sweep over an n-grid), ``gamma`` (dependence
profile), ``regress`` (slope-statistic experiment), ``dist`` (per-direction
distance records), ``two-point`` (moment-matched atoms), ``selftest``
(brute-force oracle suites).  Flags may be preloaded from a plain
``key=value`` config file; explicit flags override the file.  Output bytes
are a deterministic function of the resolved configuration and the master
seed; the worker-count flag never influences results.

Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

import argparse
import os
import sys

import numpy as np

from .dependence import condition_report, gamma_exact_markov, gamma_mc_arch
from .distance import CfGrid, conditional_kappa_mc, cf_product_kolmogorov
from .errors import ConfigError, MartprojError
from .experiments import SweepConfig, rate_sweep, regression_experiment
from .io import emit, format_float
from .moments import two_point_from_moments
from .processes import (
    ArchMartingale,
    ArchModel,
    IidMartingale,
    MarkovMartingale,
    Rademacher,
    StandardGaussian,
    TruncatedChain,
    TwoPointInnovation,
)
from .rng import derive_rng
from .selftest import run_selftest
from .sphere import sample_uniform_sphere, centered_weights

_MODEL_KEYS = ("model", "innovation", "c", "kappa", "b", "J", "burn_in",
               "N", "epsilon", "f")
_COMMON_KEYS = ("seed", "threads", "out", "format")
_KNOWN_KEYS = set(_MODEL_KEYS + _COMMON_KEYS) | {
    "n", "rtheta", "rx", "method", "centered", "noise", "r", "mu", "sigma",
    "vmax", "ellmax", "replicates", "sigma2", "beta3",
}

_DEFAULTS = {
    "innovation": "gaussian",
    "c": None, "kappa": 0.3, "b": 4.0, "J": 50, "burn_in": 0,
    "N": 200, "epsilon": 0.1, "f": "f1",
    "method": "cf", "centered": False, "format": "csv",
    "rtheta": 100, "rx": 10000, "seed": 0,
    "mu": 1.0, "sigma": 2.0, "r": 10000,
    "vmax": 32, "ellmax": 20, "replicates": 2000,
}


def _parse_innovation(text):
    text = str(text).lower()
    if text == "gaussian":
        return StandardGaussian()
    if text == "rademacher":
        return Rademacher()
    if text.startswith("twopoint"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                "innovation 'twopoint' needs the form twopoint:SIGMA2:BETA3")
        return TwoPointInnovation(two_point_from_moments(float(parts[1]),
                                                         float(parts[2])))
    raise ConfigError(f"unknown innovation {text!r}")


def _parse_f(text):
    text = str(text).lower()
    if text == "f1":
        return (1.0, 0.0)
    if text == "f2":
        return (0.0, 1.0)
    try:
        alpha, beta = (float(p) for p in text.split(","))
        return (alpha, beta)
    except ValueError as exc:
        raise ConfigError(f"observable must be f1, f2 or 'alpha,beta', got {text!r}") from exc


def build_model(cfg):
    """MartingaleModel from the resolved model block of a config."""
    name = str(cfg.get("model", "iid")).lower()
    if name.startswith("iid-"):
        innovation = _parse_innovation(name[4:])
        name = "iid"
    else:
        innovation = _parse_innovation(cfg.get("innovation", "gaussian"))
    if name == "iid":
        return IidMartingale(innovation)
    if name == "arch":
        kappa, b, J = float(cfg["kappa"]), float(cfg["b"]), int(cfg["J"])
        c = cfg.get("c")
        if c is None:
            coeffs = kappa * np.arange(1, J + 1, dtype=float) ** (-b)
            c = 1.0 - float(coeffs.sum())  # unit stationary variance
        try:
            arch = ArchModel(c=float(c), kappa=kappa, b=b, J=J,
                             innovation=innovation, burn_in=int(cfg["burn_in"]))
        except MartprojError as exc:
            raise ConfigError(str(exc)) from exc
        return ArchMartingale(arch)
    if name == "markov":
        try:
            chain = TruncatedChain.build(int(cfg["N"]), f_coeffs=_parse_f(cfg["f"]),
                                         epsilon=float(cfg["epsilon"]))
        except MartprojError as exc:
            raise ConfigError(str(exc)) from exc
        return MarkovMartingale(chain)
    raise ConfigError(f"unknown model {name!r}")


def _read_config_file(path):
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _KNOWN_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args, keys):
    """Merge flag values, config-file values and defaults; echo-ready dict."""
    file_values = _read_config_file(args.config) if args.config else {}
    resolved = {}
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = file_values[key]
        elif key in _DEFAULTS:
            resolved[key] = _DEFAULTS[key]
    return resolved


def _parse_n_grid(text):
    try:
        grid = tuple(int(p) for p in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"flag 'n' must be a comma list of integers, got {text!r}") from exc
    if not grid:
        raise ConfigError("flag 'n' must name at least one size")
    return grid


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def _validate_threads(value):
    if value in (None, "auto"):
        return "auto"
    try:
        t = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"flag 'threads' must be an integer or 'auto', got {value!r}") from exc
    if t < 1:
        raise ConfigError(f"flag 'threads' must be >= 1, got {t}")
    return t


def _add_model_flags(p):
    p.add_argument("--model", help="iid | iid-gaussian | iid-rademacher | arch | markov")
    p.add_argument("--innovation", help="gaussian | rademacher | twopoint:S2:B3")
    p.add_argument("--c", type=float, help="ARCH intercept (default: 1 - sum c_j)")
    p.add_argument("--kappa", type=float, help="ARCH coefficient scale")
    p.add_argument("--b", type=float, help="ARCH coefficient decay exponent")
    p.add_argument("--J", type=int, help="ARCH truncation lag")
    p.add_argument("--burn-in", dest="burn_in", type=int, help="ARCH warm-up steps")
    p.add_argument("--N", type=int, help="chain half-width")
    p.add_argument("--epsilon", type=float, help="chain schedule epsilon")
    p.add_argument("--f", help="chain observable: f1 | f2 | 'alpha,beta'")


def _add_common_flags(p):
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--threads", help="worker count or 'auto' (never affects results)")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--config", help="key=value config file; flags override it")


def _build_parser():
    parser = argparse.ArgumentParser(prog="martproj")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="rate sweep over an n-grid")
    p.add_argument("--n", help="comma list of projection dimensions")
    p.add_argument("--rtheta", type=int, help="directions per grid point")
    p.add_argument("--rx", type=int, help="paths per direction (empirical method)")
    p.add_argument("--method", choices=("cf", "empirical"))
    p.add_argument("--centered", action="store_const", const=True, default=None)
    _add_model_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("gamma", help="weak-dependence profile")
    p.add_argument("--vmax", type=int)
    p.add_argument("--ellmax", type=int)
    p.add_argument("--replicates", type=int, help="coupling replicates (arch)")
    _add_model_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("regress", help="slope-statistic distribution")
    p.add_argument("--noise", help="noise model name (as --model)")
    p.add_argument("--n", help="comma list of sample sizes")
    p.add_argument("--r", type=int, help="replicates per size")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    _add_model_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("dist", help="per-direction distance records")
    p.add_argument("--n", help="projection dimension")
    p.add_argument("--rtheta", type=int)
    p.add_argument("--rx", type=int)
    p.add_argument("--method", choices=("cf", "empirical"))
    p.add_argument("--centered", action="store_const", const=True, default=None)
    _add_model_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("two-point", help="moment-matched two-atom law")
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--beta3", type=float, required=True)
    _add_common_flags(p)

    p = sub.add_parser("selftest", help="run the brute-force oracle suites")
    _add_common_flags(p)
    return parser


def _cmd_sweep(args):
    keys = ("n", "rtheta", "rx", "method", "centered", *_MODEL_KEYS, *_COMMON_KEYS)
    cfg = _resolve(args, keys)
    if "n" not in cfg:
        raise ConfigError("flag 'n' is required for sweep")
    grid = _parse_n_grid(cfg["n"])
    if min(grid) < 2:
        raise ConfigError(f"flag 'n' must be >= 2 everywhere (got {min(grid)}); "
                          "the conditional approximation is defined for n >= 2")
    cfg["centered"] = _parse_bool(cfg["centered"])
    cfg["threads"] = _validate_threads(cfg.get("threads", os.environ.get("MPL_THREADS")))
    model = build_model(cfg)
    sweep_cfg = SweepConfig(model=model, n_grid=grid, r_theta=int(cfg["rtheta"]),
                            master_seed=int(cfg["seed"]), method=cfg["method"],
                            r_x=int(cfg["rx"]) if cfg["method"] == "empirical" else None,
                            centered=cfg["centered"])
    table = rate_sweep(sweep_cfg)
    rows = [{"n": row.n, "mean": row.mean, "se": row.se,
             "floor_flag": row.floor_flag} for row in table.rows]
    fit = table.fit
    footer = ({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2,
               "n_used": fit.n_used}
              if not fit.degenerate else {"degenerate": "true", "n_used": fit.n_used})
    echo = {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None}
    if cfg["out"] is None:
        raise ConfigError("flag 'out' is required for sweep")
    emit(rows, ("n", "mean", "se", "floor_flag"), cfg["format"], cfg["out"],
         config=echo, footer=footer)
    return 0


def _cmd_gamma(args):
    keys = ("vmax", "ellmax", "replicates", *_MODEL_KEYS, *_COMMON_KEYS)
    cfg = _resolve(args, keys)
    cfg["threads"] = _validate_threads(cfg.get("threads", os.environ.get("MPL_THREADS")))
    model = build_model(cfg)
    vmax, ellmax = int(cfg["vmax"]), int(cfg["ellmax"])
    if isinstance(model, MarkovMartingale):
        profile = gamma_exact_markov(model.chain, vmax, ellmax)
    elif isinstance(model, ArchMartingale):
        profile = gamma_mc_arch(model, vmax, ellmax, int(cfg["replicates"]),
                                derive_rng(int(cfg["seed"]), "gamma"))
    else:
        raise ConfigError("gamma needs --model markov or --model arch")
    report = condition_report(profile)
    rows = [{"lag": int(profile.lags[i]), "g02": profile.g02[i],
             "g12": profile.g12[i], "g22": profile.g22[i],
             "g13": profile.g13[i], "gamma": profile.gamma[i]}
            for i in range(profile.lags.size)]
    echo = {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None}
    footer = {"partial_sum": report.partial_sums[-1],
              "satisfied_estimate": str(report.satisfied_estimate).lower()}
    if cfg["out"] is None:
        raise ConfigError("flag 'out' is required for gamma")
    emit(rows, ("lag", "g02", "g12", "g22", "g13", "gamma"), cfg["format"],
         cfg["out"], config=echo, footer=footer,
         extra={"notes": profile.notes, "condition": {
             "partial_sums": list(report.partial_sums),
             "satisfied_estimate": report.satisfied_estimate,
             "notes": report.notes}} if cfg["format"] == "json" else None)
    return 0


def _cmd_regress(args):
    keys = ("noise", "n", "r", "mu", "sigma", *_MODEL_KEYS, *_COMMON_KEYS)
    cfg = _resolve(args, keys)
    cfg["threads"] = _validate_threads(cfg.get("threads", os.environ.get("MPL_THREADS")))
    if "n" not in cfg:
        raise ConfigError("flag 'n' is required for regress")
    if cfg.get("noise"):
        cfg["model"] = cfg["noise"]
    noise = build_model(cfg)
    grid = _parse_n_grid(cfg["n"])
    rows = []
    for n in grid:
        if n < 3:
            raise ConfigError(f"flag 'n' must be >= 3 for regression, got {n}")
        rng = derive_rng(int(cfg["seed"]), n, "regress")
        row = regression_experiment(noise, n, int(cfg["r"]), float(cfg["mu"]),
                                    float(cfg["sigma"]), rng)
        rows.append({"n": n, "r": row.replicates, "kappa": row.kappa.value,
                     "identity_max_dev": row.identity_max_dev})
    echo = {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None}
    if cfg["out"] is None:
        raise ConfigError("flag 'out' is required for regress")
    emit(rows, ("n", "r", "kappa", "identity_max_dev"), cfg["format"],
         cfg["out"], config=echo)
    return 0


def _cmd_dist(args):
    keys = ("n", "rtheta", "rx", "method", "centered", *_MODEL_KEYS, *_COMMON_KEYS)
    cfg = _resolve(args, keys)
    cfg["threads"] = _validate_threads(cfg.get("threads", os.environ.get("MPL_THREADS")))
    if "n" not in cfg:
        raise ConfigError("flag 'n' is required for dist")
    cfg["centered"] = _parse_bool(cfg["centered"])
    n = int(str(cfg["n"]).split(",")[0])
    if n < 2:
        raise ConfigError(f"flag 'n' must be >= 2, got {n}")
    model = build_model(cfg)
    seed = int(cfg["seed"])
    rows = []
    for r in range(int(cfg["rtheta"])):
        theta_rng = derive_rng(seed, n, r, "theta")
        theta = sample_uniform_sphere(n, theta_rng)
        if cfg["method"] == "cf":
            if not isinstance(model, IidMartingale):
                raise ConfigError("cf method needs an iid model")
            w = centered_weights(theta).theta_star if cfg["centered"] else theta.coords
            est = cf_product_kolmogorov(w, model.innovation)
        else:
            est = conditional_kappa_mc(model, theta, int(cfg["rx"]),
                                       derive_rng(seed, n, r, "paths"),
                                       centered=cfg["centered"])
        rows.append({"method": est.method, "n": n, "model": model.describe(),
                     "value": est.value, "se": est.se, "seed": seed})
    echo = {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None}
    if cfg["out"] is None:
        raise ConfigError("flag 'out' is required for dist")
    emit(rows, ("method", "n", "model", "value", "se", "seed"),
         cfg.get("format", "json"), cfg["out"], config=echo)
    return 0


def _cmd_two_point(args):
    if not args.sigma2 > 0:
        raise ConfigError(f"flag 'sigma2' must be positive, got {args.sigma2}")
    law = two_point_from_moments(args.sigma2, args.beta3)
    print(f"m = {format_float(law.m)}")
    print(f"m_prime = {format_float(law.m_prime)}")
    print(f"t = {format_float(law.t)}")
    print(f"fourth_moment = {format_float(law.moment(4))}")
    return 0


def _cmd_selftest(args):
    results = run_selftest()
    failed = 0
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    return 1 if failed else 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "gamma": _cmd_gamma,
    "regress": _cmd_regress,
    "dist": _cmd_dist,
    "two-point": _cmd_two_point,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MartprojError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
