"""Configuration-driven experiment runner.

``synclevy MODE --config PATH [--out DIR] [--seed U64] [--threads INT] [--quiet]``
with MODE one of simulate, analytic, compare, dist-info, convergence.

Configs are JSON documents with sections ``model``, ``analytics``, ``run``,
``compare`` and ``output``. Every CSV starts with ``#`` lines carrying the
tool version, the config digest and the base seed. The digest is a SHA-256
of the canonical JSON, leaving out ``output`` and any thread setting.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import struct
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (I_N_finite_t, J_N_finite_t, chi_asymptotic, chi_general_inf,
                       chi_markov_inf, sync_constants, theta2_remainder)
from .levy import (BrownianDrift, CompoundPoisson, ParetoRadial, ParetoSymmetric,
                   SymmetricStable, attraction_target)
from .limits_stats import (Linnik1D, MatrixRescale, ScalarRescale, default_lambda_grid,
                           empirical_cf, fit_linnik_scale, ks_test_laplace, laplace_c0,
                           rescale)
from .me_dist import Exponential, MEDistribution, solve_perturbed_roots
from .simulator import (AllZero, FixedInitial, IIDInitial, RoutingMatrix, SymmetricUniform,
                        SyncSystemConfig, chi_mc, sample_differences)

MODES = ("simulate", "analytic", "compare", "dist-info", "convergence")
BIN_MAGIC = b"SYNCDIF1"


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


# -- config parsing ----------------------------------------------------------------------

def _get(tree, key, path, kind=None, default=...):
    if not isinstance(tree, dict):
        raise ConfigError(path, "expected an object")
    if key not in tree:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    val = tree[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def _num(tree, key, path, default=..., positive=False, nonneg=False):
    val = _get(tree, key, path, (int, float), default)
    if isinstance(val, bool):
        raise ConfigError(f"{path}.{key}", "expected a number")
    if positive and not val > 0:
        raise ConfigError(f"{path}.{key}", "must be positive")
    if nonneg and not val >= 0:
        raise ConfigError(f"{path}.{key}", "must be nonnegative")
    return val


def _wrap(path, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_distribution(spec, path="model.inter_event") -> MEDistribution:
    kind = _get(spec, "kind", path, str)
    if kind == "exponential":
        return _wrap(path, MEDistribution.exponential, _num(spec, "mean", path, positive=True))
    if kind == "erlang":
        k = _get(spec, "k", path, int)
        return _wrap(path, MEDistribution.erlang, k, _num(spec, "mean", path, positive=True))
    if kind == "hyperexponential":
        return _wrap(path, MEDistribution.hyperexponential,
                     _get(spec, "weights", path, list), _get(spec, "means", path, list))
    if kind == "coxian":
        return _wrap(path, MEDistribution.coxian,
                     _get(spec, "rates", path, list), _get(spec, "exit_probs", path, list))
    if kind == "rational":
        return _wrap(path, MEDistribution.from_coefficients,
                     _get(spec, "num", path, list), _get(spec, "den", path, list))
    raise ConfigError(f"{path}.kind", f"unknown distribution kind {kind!r}")


def parse_levy(spec, path="model.levy"):
    kind = _get(spec, "kind", path, str)
    if kind == "brownian":
        return _wrap(path, BrownianDrift, _get(spec, "sigma", path, default=1.0),
                     _get(spec, "b", path, default=0.0), _get(spec, "d", path, int, None))
    if kind == "compound_poisson":
        beta = _num(spec, "beta", path, positive=True)
        jp = f"{path}.jump"
        jump = _get(spec, "jump", path, dict)
        jkind = _get(jump, "kind", jp, str)
        if jkind == "pareto_symmetric":
            law = _wrap(jp, ParetoSymmetric, _num(jump, "a", jp, positive=True))
        elif jkind == "pareto_radial":
            law = _wrap(jp, ParetoRadial, _num(jump, "alpha", jp, positive=True),
                        _get(jump, "directions", jp, list), _get(jump, "weights", jp, list))
        else:
            raise ConfigError(f"{jp}.kind", f"unknown jump law {jkind!r}")
        return _wrap(path, CompoundPoisson, beta, law)
    if kind == "stable":
        alpha = _num(spec, "alpha", path, positive=True)
        if "c" in spec:
            return _wrap(path, SymmetricStable, alpha, c=_num(spec, "c", path),
                         dim=_get(spec, "d", path, int, 1))
        return _wrap(path, SymmetricStable, alpha, directions=_get(spec, "directions", path, list),
                     weights=_get(spec, "weights", path, list))
    raise ConfigError(f"{path}.kind", f"unknown Lévy kind {kind!r}")


def parse_routing(spec, N, path="model.routing"):
    if spec is None:
        return SymmetricUniform()
    kind = _get(spec, "kind", path, str)
    if kind == "symmetric":
        return SymmetricUniform()
    if kind != "matrix":
        raise ConfigError(f"{path}.kind", f"unknown routing kind {kind!r}")
    R = _get(spec, "matrix", path, list)
    if len(R) != N:
        raise ConfigError(f"{path}.matrix", f"expected {N} rows, got {len(R)}")
    for i, row in enumerate(R):
        rp = f"{path}.matrix[{i}]"
        if not isinstance(row, list) or len(row) != N:
            raise ConfigError(rp, f"expected a row of length {N}")
        r = np.asarray(row, dtype=float)
        if r[i] != 0:
            raise ConfigError(rp, "diagonal entry must be 0")
        if np.any(r < 0):
            raise ConfigError(rp, "negative routing probability")
        if abs(r.sum() - 1.0) > 1e-12:
            raise ConfigError(rp, f"row sums to {r.sum():.17g}, expected 1")
    return RoutingMatrix(np.asarray(R, dtype=float))


def parse_initial(spec, path="model.initial"):
    if spec is None:
        return AllZero()
    kind = _get(spec, "kind", path, str)
    if kind == "zero":
        return AllZero()
    if kind == "fixed":
        return _wrap(path, FixedInitial, _get(spec, "values", path, list))
    if kind == "iid":
        law = _get(spec, "law", path, str, "normal")
        scale = _num(spec, "scale", path, 1.0, positive=True)
        if law == "normal":
            return IIDInitial(lambda rng, shape: scale * rng.standard_normal(shape))
        if law == "laplace":
            return IIDInitial(lambda rng, shape: rng.laplace(0.0, scale, shape))
        raise ConfigError(f"{path}.law", f"unknown initial law {law!r}")
    raise ConfigError(f"{path}.kind", f"unknown initial kind {kind!r}")


def parse_model(tree, path="model") -> SyncSystemConfig:
    N = _get(tree, "N", path, int)
    if N < 2:
        raise ConfigError(f"{path}.N", "must be >= 2")
    levy = parse_levy(_get(tree, "levy", path, dict), f"{path}.levy")
    dist = parse_distribution(_get(tree, "inter_event", path, dict), f"{path}.inter_event")
    if dist.sampler is None:
        raise ConfigError(f"{path}.inter_event", "analytics-only distribution cannot be simulated")
    routing = parse_routing(tree.get("routing"), N, f"{path}.routing")
    initial = parse_initial(tree.get("initial"), f"{path}.initial")
    horizon = _num(tree, "horizon", path, nonneg=True)
    sync = _get(tree, "synchronize", path, bool, True)
    sender = _get(tree, "sender", path, str, "clock")
    if sender not in ("clock", "uniform"):
        raise ConfigError(f"{path}.sender", "must be 'clock' or 'uniform'")
    return _wrap(path, SyncSystemConfig, N, levy, dist, horizon, routing, initial, sync, sender)


def parse_lambda_grid(spec, d, path="analytics.lambda_grid"):
    if spec is None:
        return default_lambda_grid(d)
    kind = _get(spec, "kind", path, str)
    if kind == "default":
        return default_lambda_grid(d, _num(spec, "min", path, 0.05, positive=True),
                                   _num(spec, "max", path, 5.0, positive=True),
                                   _get(spec, "count", path, int, 20))
    if kind == "list":
        vals = np.asarray(_get(spec, "values", path, list), dtype=float)
        return vals.reshape(-1, d)
    raise ConfigError(f"{path}.kind", f"unknown lambda grid kind {kind!r}")


@dataclass
class Experiment:
    raw: dict
    digest: str
    base_seed: int
    out_dir: Path
    formats: tuple
    threads: int
    quiet: bool


def canonical_digest(raw):
    tree = copy.deepcopy(raw)
    tree.pop("output", None)
    if isinstance(tree.get("run"), dict):
        tree["run"].pop("threads", None)
    text = json.dumps(tree, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(text.encode()).hexdigest()


def load_experiment(path, out=None, seed=None, threads=None, quiet=False) -> Experiment:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    run = raw.setdefault("run", {})
    if seed is not None:
        if seed < 0 or seed >= 2**64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        run["base_seed"] = int(seed)
    base_seed = _get(run, "base_seed", "run", int, 0)
    if base_seed < 0:
        raise ConfigError("run.base_seed", "must be nonnegative")
    output = raw.get("output", {})
    out_dir = Path(out) if out is not None else Path(_get(output, "directory", "output", str, "out"))
    formats = tuple(_get(output, "formats", "output", list, ["csv", "json"]))
    for f in formats:
        if f not in ("csv", "json", "bin"):
            raise ConfigError("output.formats", f"unknown format {f!r}")
    nthreads = threads if threads is not None else _get(run, "threads", "run", int, 1)
    if nthreads < 1:
        raise ConfigError("--threads", "must be >= 1")
    return Experiment(raw, canonical_digest(raw), base_seed, out_dir, formats, nthreads, quiet)


# -- writers -----------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, exp: Experiment, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# synclevy {__version__}\n")
        fh.write(f"# config_digest {exp.digest}\n")
        fh.write(f"# base_seed {exp.base_seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_json(path, exp: Experiment, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"tool_version": __version__, "config_digest": exp.digest,
           "base_seed": exp.base_seed, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o))


def write_bin(path, N, values):
    """32-byte header (magic, N, d, replicas as little-endian u64) then float64 rows."""
    values = np.ascontiguousarray(values, dtype="<f8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(BIN_MAGIC + struct.pack("<QQQ", N, values.shape[1], values.shape[0]))
        fh.write(values.tobytes())


def read_bin(path):
    """Inverse of :func:`write_bin`: returns ``(N, values)``."""
    data = Path(path).read_bytes()
    if data[:8] != BIN_MAGIC:
        raise ValueError("not a difference dump")
    N, d, n = struct.unpack("<QQQ", data[8:32])
    return N, np.frombuffer(data[32:], dtype="<f8").reshape(n, d)


def _lam_cols(d):
    return ["lambda"] if d == 1 else [f"lambda_{i + 1}" for i in range(d)]


def write_cf_table(path, exp, table):
    d = table.lambda_grid.shape[1]
    theory = table.theoretical if table.theoretical is not None else np.full(table.empirical.shape, np.nan)
    err = np.abs(table.empirical.real - theory)
    rows = (list(lam) + [e.real, e.imag, sr, si, th, ae] for lam, e, sr, si, th, ae in
            zip(table.lambda_grid, table.empirical, table.se_re, table.se_im, theory, err))
    write_csv(path, exp, _lam_cols(d) + ["ecf_re", "ecf_im", "se_re", "se_im", "theory", "abs_err"],
              rows)


# -- modes ---------------------------------------------------------------------------------

def _log(exp, msg):
    if not exp.quiet:
        print(msg)


def _run_section(exp):
    run = exp.raw.get("run", {})
    replicas = _get(run, "replicas", "run", int, 1000)
    if replicas < 1:
        raise ConfigError("run.replicas", "must be >= 1")
    pair = tuple(_get(run, "pair", "run", list, [0, 1]))
    return run, replicas, pair


def _simulate(exp, model):
    run, replicas, pair = _run_section(exp)
    if len(pair) != 2 or pair[0] == pair[1] or not all(0 <= p < model.N for p in pair):
        raise ConfigError("run.pair", "must name two distinct components")
    if replicas < 100:
        raise ConfigError("run.replicas", "the empirical CF needs at least 100 replicas")
    t0 = time.perf_counter()
    sample = sample_differences(model, pair, replicas, exp.base_seed, exp.threads)
    _log(exp, f"simulated {replicas} replicas to T={model.horizon} "
              f"in {time.perf_counter() - t0:.1f}s")
    return sample


def _rescale_rule(spec, model, path="compare.rescale"):
    if spec is None:
        return None
    kind = _get(spec, "kind", path, str)
    if kind == "scalar":
        return ScalarRescale(_num(spec, "b_N", path, positive=True))
    if kind == "attraction":
        target = _wrap(path, attraction_target, model.levy)
        return ScalarRescale(target.b_N(model.N))
    if kind == "matrix":
        return _wrap(path, MatrixRescale, _get(spec, "B", path, list))
    raise ConfigError(f"{path}.kind", f"unknown rescale kind {kind!r}")


def mode_simulate(exp):
    model = parse_model(_get(exp.raw, "model", "config", dict))
    sample = _simulate(exp, model)
    grid = parse_lambda_grid(exp.raw.get("analytics", {}).get("lambda_grid"), model.d)
    table = empirical_cf(sample, grid)
    files = []
    if "csv" in exp.formats:
        cols = ["replica"] + (["d"] if model.d == 1 else [f"d_{i + 1}" for i in range(model.d)])
        write_csv(exp.out_dir / "differences.csv", exp, cols,
                  ([i] + list(v) for i, v in enumerate(sample.values)))
        write_cf_table(exp.out_dir / "ecf.csv", exp, table)
        files += ["differences.csv", "ecf.csv"]
        tps = exp.raw.get("run", {}).get("time_points")
        if tps and model.symmetric:
            _, replicas, _ = _run_section(exp)
            chi = chi_mc(model, grid, replicas, exp.base_seed, tps, exp.threads)
            write_csv(exp.out_dir / "chi_mc.csv", exp, ["t"] + _lam_cols(model.d) + ["estimate", "se"],
                      ([t] + list(lam) + [e, s] for t, lam, e, s in chi.rows()))
            files.append("chi_mc.csv")
    if "bin" in exp.formats:
        write_bin(exp.out_dir / "differences.bin", model.N, sample.values)
        files.append("differences.bin")
    return {"files": files, "replicas": len(sample)}


def _theory_values(dist, N, eta, which):
    if which == "markov":
        return chi_markov_inf(N, dist.mean, eta)
    if which == "asymptotic":
        return chi_asymptotic(dist, N, eta)
    return chi_general_inf(dist, N, eta)


def mode_analytic(exp):
    an = exp.raw.get("analytics", {})
    model = exp.raw.get("model", {})
    dspec = an.get("distribution", model.get("inter_event"))
    if dspec is None:
        raise ConfigError("analytics.distribution", "missing required field")
    dist = parse_distribution(dspec, "analytics.distribution")
    N_list = _get(an, "N_list", "analytics", list, [model.get("N", 10)])
    if "levy" in model:
        levy = parse_levy(model["levy"])
        d = levy.d
        grid = parse_lambda_grid(an.get("lambda_grid"), d)
        eta = levy.eta(grid)
    else:
        d = 1
        eta = np.asarray(_get(an, "eta_grid", "analytics", list), dtype=float)
        grid = np.full((eta.size, 1), np.nan)
    rows = []
    for N in N_list:
        if not isinstance(N, int) or N < 2:
            raise ConfigError("analytics.N_list", "entries must be integers >= 2")
        mk = chi_markov_inf(N, dist.mean, eta)
        gq = chi_general_inf(dist, N, eta)
        asy = chi_asymptotic(dist, N, eta) if N > 2 else np.full(eta.shape, np.nan)
        for lam, e, a, b, c in zip(grid, eta, mk, gq, asy):
            rows.append([N] + list(lam) + [e, a, b, c, abs(b - c)])
    if "csv" in exp.formats:
        write_csv(exp.out_dir / "theory.csv", exp,
                  ["N"] + _lam_cols(d) + ["eta", "chi_markov", "chi_quadrature", "chi_asymptotic",
                                          "remainder"], rows)
    return {"files": ["theory.csv"], "rows": len(rows)}


def mode_compare(exp):
    model = parse_model(_get(exp.raw, "model", "config", dict))
    cmp = exp.raw.get("compare", {})
    sample = _simulate(exp, model)
    rule = _rescale_rule(cmp.get("rescale"), model)
    if rule is not None:
        sample = rescale(sample, rule, model.N)
    grid = parse_lambda_grid(exp.raw.get("analytics", {}).get("lambda_grid"), model.d)
    table = empirical_cf(sample, grid)
    which = _get(cmp, "theory", "compare", str, "auto")
    scale = 1.0 if rule is None else 1.0 / rule.b_N if isinstance(rule, ScalarRescale) else None
    if scale is None and which != "linnik_fit":
        raise ConfigError("compare.theory", "matrix rescaling supports only linnik_fit")
    summary = {}
    if which == "linnik_fit":
        if model.d != 1:
            raise ConfigError("compare.theory", "Linnik fit needs d = 1")
        alpha = _num(cmp, "alpha", "compare", attraction_target(model.levy).alpha, positive=True)
        lo, hi = _get(cmp, "fit_range", "compare", list, [0.1, 3.0])
        mags = np.abs(table.lambda_grid[:, 0])
        sel = (mags >= lo) & (mags <= hi)
        fit = fit_linnik_scale(table.lambda_grid[sel, 0], table.empirical.real[sel], alpha)
        theory = Linnik1D(alpha, fit.c).cf(table.lambda_grid[:, 0])
        table = table.with_theory(theory)
        summary["linnik"] = {"alpha": alpha, "c": fit.c, "fit_range": [lo, hi],
                             "residual": fit.residual}
    else:
        if which == "auto":
            which = "markov" if isinstance(model.inter_event.sampler, Exponential) else "general"
        if which not in ("markov", "general", "asymptotic"):
            raise ConfigError("compare.theory", f"unknown theory {which!r}")
        eta = model.levy.eta(table.lambda_grid * scale)
        table = table.with_theory(_theory_values(model.inter_event, model.N, eta, which))
    summary.update({"theory": which, "distance": table.distance, "max_imag": table.max_imag,
                    "max_imag_z": float(np.max(table.imag_z)), "n": table.n,
                    "grid_points": int(table.lambda_grid.shape[0])})
    ks = cmp.get("ks")
    if ks:
        c0 = ks.get("c0", "auto") if isinstance(ks, dict) else "auto"
        if c0 == "auto":
            if not isinstance(model.levy, BrownianDrift) or model.d != 1:
                raise ConfigError("compare.ks.c0", "auto c0 needs one-dimensional Brownian motion")
            c0 = laplace_c0(float(model.levy.sigma[0, 0]), model.inter_event.mean, model.N)
            if rule is not None:
                c0 *= scale
        res = ks_test_laplace(sample, float(c0))
        summary["ks"] = res.as_dict()
        if "json" in exp.formats:
            write_json(exp.out_dir / "ks.json", exp, res.as_dict())
    files = []
    if "csv" in exp.formats:
        write_cf_table(exp.out_dir / "compare.csv", exp, table)
        files.append("compare.csv")
    if "json" in exp.formats:
        write_json(exp.out_dir / "summary.json", exp, summary)
        files.append("summary.json")
    if "bin" in exp.formats:
        write_bin(exp.out_dir / "differences.bin", model.N, sample.values)
        files.append("differences.bin")
    _log(exp, f"sup |ecf - theory| = {table.distance:.6f} over {table.lambda_grid.shape[0]} probes")
    if "ks" in summary:
        k = summary["ks"]
        _log(exp, f"KS statistic {k['statistic']:.6f} (critical {k['critical']:.6f})")
    if "linnik" in summary:
        _log(exp, f"Linnik fit c = {summary['linnik']['c']:.6f}, "
                  f"sup residual {summary['linnik']['residual']:.6f}")
    return summary


def mode_dist_info(exp):
    an = exp.raw.get("analytics", {})
    dspec = an.get("distribution", exp.raw.get("model", {}).get("inter_event"))
    if dspec is None:
        raise ConfigError("analytics.distribution", "missing required field")
    dist = parse_distribution(dspec, "analytics.distribution")
    N_list = _get(an, "N_list", "analytics", list, [10])
    moments = [dist.moment(r) for r in range(1, 5)]
    roots = [complex(z) for z in dist.renewal_roots]
    table = []
    for N in N_list:
        if not isinstance(N, int) or N < 3:
            raise ConfigError("analytics.N_list", "entries must be integers >= 3")
        pr = solve_perturbed_roots(dist, N)
        sc = sync_constants(N, dist)
        table.append([N, pr.k_N, pr.gamma_N, pr.kappa_N, pr.seed, pr.c0.real, pr.d0.real,
                      sc.theta1_N, sc.theta3_N])
    _log(exp, f"distribution: {dist!r}")
    _log(exp, "moments m1..m4: " + ", ".join(f"{m:.10g}" for m in moments))
    _log(exp, "roots of 1 - p*(z) besides 0: " + ", ".join(f"{z:.6g}" for z in roots))
    for row in table:
        _log(exp, f"N={row[0]}: kappa_N = {row[3]:.6f}  theta1_N = {row[7]:.6f}")
    cols = ["N", "k_N", "gamma_N", "kappa_N", "kappa_seed", "c0", "d0", "theta1_N", "theta3_N"]
    if "csv" in exp.formats:
        write_csv(exp.out_dir / "kappa.csv", exp, cols, table)
    payload = {"distribution": repr(dist), "moments": moments,
               "renewal_roots": [[z.real, z.imag] for z in roots],
               "kappa_table": [dict(zip(cols, r)) for r in table]}
    if "json" in exp.formats:
        write_json(exp.out_dir / "dist_info.json", exp, payload)
    return payload


def mode_convergence(exp):
    an = exp.raw.get("analytics", {})
    dspec = an.get("distribution", exp.raw.get("model", {}).get("inter_event"))
    if dspec is None:
        raise ConfigError("analytics.distribution", "missing required field")
    dist = parse_distribution(dspec, "analytics.distribution")
    N_list = _get(an, "N_list", "analytics", list, [5, 10, 20, 40])
    eta_grid = np.asarray(_get(an, "eta_grid", "analytics", list,
                               np.geomspace(0.1, 10, 21).tolist()), dtype=float)
    t_grid = _get(an, "t_grid", "analytics", list, [])
    eta_t = _num(an, "finite_t_eta", "analytics", 1.0, nonneg=True)
    rem = [[N, theta2_remainder(dist, N, eta_grid)] for N in N_list]
    fin = []
    for N in N_list:
        for t in t_grid:
            i_n = I_N_finite_t(dist, N, eta_t, t)
            j_n = J_N_finite_t(dist, N, eta_t, t)
            fin.append([N, t, eta_t, i_n, j_n, abs(i_n - j_n)])
    for N, r in rem:
        _log(exp, f"N={N}: sup remainder = {r:.3e}")
    if "csv" in exp.formats:
        write_csv(exp.out_dir / "remainder.csv", exp, ["N", "theta2_remainder"], rem)
        if fin:
            write_csv(exp.out_dir / "finite_t.csv", exp,
                      ["N", "t", "eta", "I_N", "J_N", "abs_diff"], fin)
    return {"remainder": rem, "finite_t": fin}


_DISPATCH = {"simulate": mode_simulate, "analytic": mode_analytic, "compare": mode_compare,
             "dist-info": mode_dist_info, "convergence": mode_convergence}


def run_experiment(mode, config_path, out=None, seed=None, threads=None, quiet=False):
    """Run one experiment; returns the mode's summary dictionary."""
    if mode not in _DISPATCH:
        raise ConfigError("mode", f"unknown mode {mode!r}")
    exp = load_experiment(config_path, out, seed, threads, quiet)
    declared = exp.raw.get("mode")
    if declared is not None and declared != mode:
        raise ConfigError("mode", f"config declares {declared!r} but {mode!r} was requested")
    return _DISPATCH[mode](exp)


def build_parser():
    p = argparse.ArgumentParser(prog="synclevy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"synclevy {__version__}")
    sub = p.add_subparsers(dest="mode", required=True)
    for m in MODES:
        s = sub.add_parser(m)
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--seed", type=int, metavar="U64")
        s.add_argument("--threads", type=int, metavar="INT")
        s.add_argument("--quiet", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run_experiment(args.mode, args.config, args.out, args.seed, args.threads, args.quiet)
    except ConfigError as exc:
        print(f"synclevy: invalid config: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"synclevy: numerical failure in {args.mode}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
