"""Experiment runner: reproducible reports for every verifier in the library.

Subcommands mirror the library surface (spectrum, filters, kernel-decay,
approx, jackson, bernstein, young, besov, all). Each writes CSV + gnuplot
.dat files plus a JSON summary with one pass/fail entry per assertion, and
exits 1 if any assertion failed, 2 on configuration errors.

Configuration is a plain-text file of ``key = value`` lines ('#' comments,
comma-separated lists); command-line flags override file values. Outputs are
written atomically (temp file + rename) and are bit-identical across runs
with the same config and seeds, except for the runtime_ms column of the
kernel-decay CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import corpus as corpus_mod
from .analysis import (BesovParams, ErrorCache, a_norm, a_norm_continuous,
                       bernstein_ratio, besov_report, errors_at_cutoffs,
                       interpolation_norm, is_bandlimited, jackson_ratios)
from .filters import check_partition, make_filter_family
from .manifold import GridFunction, build_circle, build_sphere2, build_torus2
from .mesh import load_mesh
from .operators import (KernelMatrix, build_kernel, fit_decay_constant,
                        operator_norm_estimate, weighted_decay_integral,
                        young_apply_check)
from .spectrum import (build_eigensystem, check_orthonormality, project,
                       save_eigensystem)


class ConfigError(Exception):
    pass


DEFAULTS = {
    "manifold": "circle",
    "nodes": 256,
    "band": None,          # None -> a default compatible with jmax
    "mesh": None,
    "alpha": [0.5, 1.0],
    "p": [1.0, 2.0, float("inf")],
    "q": [1.0, 2.0, float("inf")],
    "k": 2,
    "jmax": 3,
    "seed": 1234,
    "trials": 24,
    "out": "besovlab-out",
}

_LIST_KEYS = {"alpha", "p", "q"}
_INT_KEYS = {"nodes", "k", "jmax", "seed", "trials"}


def _parse_scalar(tok: str) -> float:
    tok = tok.strip().lower()
    if tok in ("inf", "infinity"):
        return float("inf")
    return float(tok)


def parse_config_file(path) -> dict:
    """Parse ``key = value`` lines; lists are comma-separated scalars."""
    out = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key, val = key.strip(), val.strip()
                if key not in DEFAULTS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                out[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def _coerce(key: str, val):
    if val is None or not isinstance(val, str):
        return val
    if key in _LIST_KEYS:
        return [_parse_scalar(t) for t in val.split(",") if t.strip()]
    if key in _INT_KEYS:
        return int(val)
    if key == "band":
        return _parse_scalar(val)
    return val


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        for key, val in parse_config_file(args.config).items():
            cfg[key] = _coerce(key, val)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = _coerce(key, flag) if isinstance(flag, str) else flag
    if cfg["manifold"] not in ("circle", "torus2", "sphere2", "mesh"):
        raise ConfigError(f"unknown manifold {cfg['manifold']!r}")
    for key in _LIST_KEYS:
        if not cfg[key]:
            raise ConfigError(f"parameter grid {key!r} is empty")
    if cfg["manifold"] == "mesh":
        if not cfg["mesh"]:
            raise ConfigError("mesh manifold needs --mesh <path>")
        if not os.path.exists(cfg["mesh"]):
            raise ConfigError(f"mesh file not found: {cfg['mesh']}")
    return cfg


def build_model_and_eigsys(cfg: dict, need_levels: bool = True):
    kind = cfg["manifold"]
    need = 4.0 ** cfg["jmax"]
    if kind == "circle":
        model = build_circle(cfg["nodes"])
        band = cfg["band"] or float(model.n_nodes // 2 - 1) ** 2
    elif kind == "torus2":
        model = build_torus2(cfg["nodes"])
        band = cfg["band"] or float(cfg["nodes"] // 2 - 1) ** 2
    elif kind == "sphere2":
        model = build_sphere2(cfg["nodes"])
        band = cfg["band"] or float(cfg["nodes"] * (cfg["nodes"] + 1))
    else:
        model = load_mesh(cfg["mesh"])
        band = cfg["band"] or need
    if need_levels and band < need:
        raise ConfigError(f"band {band} cannot reach jmax={cfg['jmax']} (needs {need})")
    eigsys = build_eigensystem(model, band)
    return model, eigsys


# ---------------------------------------------------------------------------
# output helpers

def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _jsonable(x):
    """Strict-JSON representation: non-finite floats become strings."""
    if isinstance(x, float):
        return x if np.isfinite(x) else _fmt(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def write_table(outdir: str, name: str, header: list[str], rows: list[list]) -> None:
    """Write name.csv and a gnuplot-friendly name.dat atomically."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    _atomic_write(os.path.join(outdir, name + ".csv"), buf.getvalue())
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(_fmt(x) for x in row))
    _atomic_write(os.path.join(outdir, name + ".dat"), "\n".join(lines) + "\n")


class Report:
    """Collects per-assertion pass/fail entries for report.json."""

    def __init__(self):
        self.assertions = []

    def check(self, name: str, passed: bool, value, threshold, note: str = ""):
        self.assertions.append({
            "name": name, "passed": bool(passed),
            "value": None if value is None else _jsonable(float(value)),
            "threshold": None if threshold is None else _jsonable(float(threshold)),
            "note": note,
        })
        return passed

    @property
    def all_passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)


# ---------------------------------------------------------------------------
# experiments

def run_spectrum(cfg, model, eigsys, outdir, report: Report):
    dev = check_orthonormality(eigsys)
    tol = 1e-8 if model.kind == "mesh" else 1e-10
    report.check("spectrum.orthonormality", dev < tol, dev, tol)
    report.check("spectrum.lambda0", eigsys.eigenvalues[0] == 0.0,
                 eigsys.eigenvalues[0], 0.0)
    rows = [[i, lam] for i, lam in enumerate(eigsys.eigenvalues)]
    write_table(outdir, "spectrum", ["index", "eigenvalue"], rows)
    save_eigensystem(eigsys, os.path.join(outdir, "eigensystem.json"))


def run_filters(cfg, model, eigsys, outdir, report: Report):
    fam = make_filter_family(cfg["k"])
    J = 5
    grid = np.linspace(0.0, 4.0 ** J, 10001)
    dev = check_partition(fam, J, grid)
    report.check("filters.partition_of_unity", dev < 1e-12, dev, 1e-12)
    rows = []
    sample = np.geomspace(1e-2, 4.0 ** J, 200)
    for lam in sample:
        rows.append([lam] + [fam.f_j(j, lam) for j in range(J + 1)])
    write_table(outdir, "filters", ["lambda"] + [f"F{j}" for j in range(J + 1)], rows)


def run_kernel_decay(cfg, model, eigsys, outdir, report: Report):
    fam = make_filter_family(cfg["k"])
    n_dim = model.dim
    # scales 2^-j, 0 < t <= 1, whose filter band the eigensystem covers
    usable = [2.0 ** (-j) for j in range(0, 7)
              if 16.0 * 4.0 ** j <= eigsys.band_limit]
    t_list = sorted(usable)[:5]
    if len(t_list) < 2:
        raise ConfigError("band too small for a kernel-decay sweep")
    N = n_dim + 2.0
    fits, rows, runtimes = [], [], []
    for t in t_list:
        t0 = time.perf_counter()
        kern = build_kernel(eigsys, fam.F, t, "F")
        fit = fit_decay_constant(model, kern, t, N)
        runtimes.append(1000.0 * (time.perf_counter() - t0))
        fits.append(fit)
        rows.append([fit.t, fit.N, fit.C, fit.max_abs_kernel,
                     round(runtimes[-1], 3)])
    cs = [f.C for f in fits]
    ratio = max(cs) / min(cs) if min(cs) > 0 else float("inf")
    report.check("kernel.decay_uniformity", ratio < 4.0, ratio, 4.0,
                 note=f"t in {t_list}")
    vol = [weighted_decay_integral(model, t, n_dim + 2.0) for t in t_list]
    vratio = max(vol) / min(vol)
    report.check("kernel.volume_uniformity", vratio < 8.0, vratio, 8.0)
    write_table(outdir, "kernel_decay", ["t", "N", "C", "max_abs_K", "runtime_ms"], rows)
    # operator-norm lower estimates over the same scales
    norm_rows = []
    for p in cfg["p"]:
        ests = [operator_norm_estimate(eigsys, fam.F, t, p, p,
                                       trials=cfg["trials"], seed=cfg["seed"])
                for t in t_list]
        for t, e in zip(t_list, ests):
            norm_rows.append([p, t, e])
        lo, hi = min(ests), max(ests)
        nratio = hi / lo if lo > 0 else float("inf")
        report.check(f"kernel.opnorm_uniform[p={p:g}]", nratio < 2.0, nratio, 2.0)
    write_table(outdir, "operator_norms", ["p", "t", "estimate"], norm_rows)


def run_approx(cfg, model, eigsys, outdir, report: Report, cache=None):
    cache = ErrorCache() if cache is None else cache
    entries = corpus_mod.default_corpus(model.kind)
    corpus_mod.write_manifest(os.path.join(outdir, "corpus_manifest.json"), entries)
    cutoffs = [4.0 ** j for j in range(cfg["jmax"] + 1)]
    rows = []
    for entry in entries:
        f = entry.build(model, eigsys)
        for p in cfg["p"]:
            errs = errors_at_cutoffs(eigsys, f, p, cutoffs, cache)
            mono = all(errs[i + 1] <= errs[i] + 1e-9 for i in range(len(errs) - 1))
            report.check(f"approx.monotone[{entry.id},p={p:g}]", mono,
                         None, None)
            for j, e in enumerate(errs):
                rows.append([entry.id, j, cutoffs[j], p, e])
            if p == 2.0 and entry.expected_rate is not None:
                nz = [(j, e) for j, e in enumerate(errs) if e > 1e-13]
                # drop the final level when the sequence terminates inside
                # the sweep (it is truncation-dominated)
                if nz and nz[-1][0] < len(errs) - 1:
                    nz = nz[:-1]
                if len(nz) >= 4:
                    js = np.array([j for j, _ in nz], dtype=float)
                    slope = np.polyfit(js, np.log2([e for _, e in nz]), 1)[0]
                    report.check(f"approx.rate[{entry.id}]",
                                 abs(-slope - entry.expected_rate) <= 0.15,
                                 -slope, entry.expected_rate,
                                 note="coarse-scale gate; library tests pin 0.1")
    write_table(outdir, "approx_errors", ["id", "j", "omega", "p", "error"], rows)
    return cache


def run_jackson(cfg, model, eigsys, outdir, report: Report, cache=None):
    cache = ErrorCache() if cache is None else cache
    k = cfg["k"]
    entry = corpus_mod.lacunary(2.0, max(3, min(6, cfg["jmax"] + 2))) \
        if model.kind == "circle" else corpus_mod.random_bandlimited(4.0, cfg["seed"])
    f = entry.build(model, eigsys)
    rows = []
    for p in cfg["p"]:
        errs = errors_at_cutoffs(eigsys, f, p,
                                 [4.0 ** j for j in range(cfg["jmax"] + 1)], cache)
        ratios = jackson_ratios(eigsys, f, k, p, cfg["jmax"], errors=errs)
        pos = [r for r in ratios if r > 0]
        trend = max(pos) / np.median(pos) if pos else 1.0
        report.check(f"jackson.bounded[p={p:g}]", trend < 10.0, trend, 10.0)
        for j, r in enumerate(ratios):
            rows.append([entry.id, p, j, r])
    write_table(outdir, "jackson", ["id", "p", "j", "ratio"], rows)
    return cache


def run_bernstein(cfg, model, eigsys, outdir, report: Report):
    from .spectrum import CoefVector, synthesize
    k = cfg["k"]
    rng = np.random.default_rng(cfg["seed"])
    omegas = [w for w in (4.0, 16.0, 64.0) if w <= eigsys.band_limit]
    rows = []
    for p in cfg["p"]:
        worsts = []
        for omega in omegas:
            k_idx = eigsys.cutoff_index(omega)
            worst = 0.0
            for _ in range(cfg["trials"]):
                c = np.zeros(eigsys.n_eigen)
                c[:k_idx] = rng.standard_normal(k_idx)
                fb = synthesize(eigsys, CoefVector(c))
                worst = max(worst, bernstein_ratio(eigsys, fb, k, p, omega))
            worsts.append(worst)
            rows.append([p, omega, worst])
        if p == 2.0:
            report.check("bernstein.p2_exact", max(worsts) <= 1.0 + 1e-12,
                         max(worsts), 1.0)
        else:
            spread = max(worsts) / min(worsts) if min(worsts) > 0 else float("inf")
            report.check(f"bernstein.stable[p={p:g}]", spread < 2.0, spread, 2.0)
    write_table(outdir, "bernstein", ["p", "omega", "max_ratio"], rows)


def run_young(cfg, model, eigsys, outdir, report: Report):
    rng = np.random.default_rng(cfg["seed"])
    n = model.n_nodes
    rows = []
    worst = -np.inf
    for trial in range(cfg["trials"]):
        raw = rng.standard_normal((n, n))
        kern = KernelMatrix(model, 0.5 * (raw + raw.T), 1.0, "random")
        f = GridFunction(model, rng.standard_normal(n))
        p = float(rng.choice([x for x in cfg["p"] if x >= 1]))
        if np.isinf(p):
            alpha, q = 1.0, float("inf")
        else:
            alpha = float(rng.uniform(1.0, min(4.0, p / (p - 1.0)) if p > 1 else 4.0))
            inv_q = 1.0 / p + 1.0 / alpha - 1.0
            q = float("inf") if inv_q <= 1e-12 else 1.0 / inv_q
        lhs, rhs = young_apply_check(model, kern, f, p, q, alpha)
        worst = max(worst, lhs - rhs)
        rows.append([trial, p, q, alpha, lhs, rhs, lhs - rhs])
    report.check("young.inequality", worst <= 1e-12, worst, 1e-12,
                 note="max over trials of lhs - rhs")
    write_table(outdir, "young", ["trial", "p", "q", "alpha", "lhs", "rhs", "slack"], rows)


def run_besov(cfg, model, eigsys, outdir, report: Report, cache=None):
    cache = ErrorCache() if cache is None else cache
    entries = corpus_mod.default_corpus(model.kind)
    J = cfg["jmax"]
    cutoffs = [4.0 ** j for j in range(J + 1)]
    summaries = []
    rows = []
    ratios = []
    k = cfg["k"]
    for entry in entries:
        f = entry.build(model, eigsys)
        jackson_max = bernstein_max = None
        if is_bandlimited(eigsys, f):
            jerrs = errors_at_cutoffs(eigsys, f, 2.0, cutoffs, cache)
            jr = jackson_ratios(eigsys, f, k, 2.0, J, errors=jerrs)
            jackson_max = max(jr)
            # the function's own cutoff: largest eigenvalue carrying content
            coefs = np.abs(project(eigsys, f).coefficients)
            alive = np.nonzero(coefs > 1e-10 * max(coefs.max(), 1e-300))[0]
            if len(alive) and eigsys.eigenvalues[alive[-1]] > 0:
                own_band = float(eigsys.eigenvalues[alive[-1]])
                bernstein_max = bernstein_ratio(eigsys, f, k, 2.0, own_band)
        for alpha in cfg["alpha"]:
            for p in cfg["p"]:
                errs = errors_at_cutoffs(eigsys, f, p, cutoffs, cache)
                for q in cfg["q"]:
                    params = BesovParams(alpha=alpha, p=p, q=q, J=J)
                    rep = besov_report(eigsys, f, params, errors=errs)
                    ratios.append(rep.ratio)
                    rows.append([entry.id, alpha, p, q, rep.a_norm,
                                 rep.comparator_norm, rep.ratio])
                    summaries.append({
                        "function_id": entry.id,
                        "params": {"alpha": alpha, "p": _fmt(p), "q": _fmt(q), "J": J},
                        "a_norm": rep.a_norm,
                        "comparator": rep.comparator_norm,
                        "ratio": rep.ratio,
                        "jackson_max_ratio": jackson_max,
                        "bernstein_max_ratio": bernstein_max,
                    })
    c_bound = max(max(ratios), 1.0 / min(ratios))
    report.check("besov.equivalence_constant", c_bound < 50.0, c_bound, 50.0,
                 note="max of ratio and 1/ratio over corpus x params")
    # continuous and interpolation norms vs the dyadic a-norm at p = 2
    t_grid = np.geomspace(1.0, 4.0 ** J, 33)
    kt_grid = np.geomspace(1e-4, 1.0, 120)
    for entry in entries:
        f = entry.build(model, eigsys)
        for alpha in cfg["alpha"]:
            params = BesovParams(alpha=alpha, p=2.0, q=2.0, J=J)
            errs = errors_at_cutoffs(eigsys, f, 2.0, cutoffs, cache)
            rep = a_norm(eigsys, f, params, errors=errs)
            cont = a_norm_continuous(eigsys, f, alpha, 2.0, 2.0, t_grid, cache)
            ratio = rep.a_norm / cont
            ok = 1.0 / 8.0 <= ratio <= 8.0
            report.check(f"besov.continuous[{entry.id},alpha={alpha:g}]",
                         ok, ratio, 8.0)
            if 0 < alpha / k < 1 and is_bandlimited(eigsys, f):
                inorm = interpolation_norm(eigsys, f, alpha / k, 2.0, k, kt_grid)
                iratio = rep.a_norm / inorm
                report.check(f"besov.interpolation[{entry.id},alpha={alpha:g}]",
                             1.0 / 32.0 <= iratio <= 32.0, iratio, 32.0)
    write_table(outdir, "besov",
                ["id", "alpha", "p", "q", "a_norm", "comparator", "ratio"], rows)
    _atomic_write(os.path.join(outdir, "besov_report.json"),
                  json.dumps(_jsonable(summaries), indent=2))
    return cache


EXPERIMENTS = {
    "spectrum": run_spectrum,
    "filters": run_filters,
    "kernel-decay": run_kernel_decay,
    "approx": run_approx,
    "jackson": run_jackson,
    "bernstein": run_bernstein,
    "young": run_young,
    "besov": run_besov,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="besovlab",
        description="spectral approximation experiments on discretized manifolds")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(EXPERIMENTS) + ["all"]:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="plain-text config file (key = value)")
        sp.add_argument("--manifold", choices=["circle", "torus2", "sphere2", "mesh"])
        sp.add_argument("--nodes", type=int, help="nodes (circle), per-dim (torus), band (sphere)")
        sp.add_argument("--band", type=float, help="eigenvalue band limit")
        sp.add_argument("--mesh", help="OFF mesh path (manifold=mesh)")
        sp.add_argument("--alpha", help="comma-separated smoothness grid")
        sp.add_argument("--p", help="comma-separated integrability grid (inf allowed)")
        sp.add_argument("--q", help="comma-separated summability grid (inf allowed)")
        sp.add_argument("--k", type=int, help="Sobolev order")
        sp.add_argument("--jmax", type=int, help="dyadic truncation level")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--trials", type=int, help="randomized trial count")
        sp.add_argument("--out", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        outdir = cfg["out"]
        os.makedirs(outdir, exist_ok=True)
        needs_levels = args.command in ("approx", "jackson", "besov", "all")
        model, eigsys = build_model_and_eigsys(cfg, need_levels=needs_levels)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = Report()
    names = list(EXPERIMENTS) if args.command == "all" else [args.command]
    cache = ErrorCache()
    try:
        for name in names:
            fn = EXPERIMENTS[name]
            if name in ("approx", "jackson", "besov"):
                fn(cfg, model, eigsys, outdir, report, cache)
            else:
                fn(cfg, model, eigsys, outdir, report)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = _jsonable({
        "config": cfg,
        "experiments": names,
        "assertions": report.assertions,
        "passed": report.all_passed,
    })
    _atomic_write(os.path.join(outdir, "report.json"), json.dumps(summary, indent=2))
    for a in report.assertions:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}: value={a['value']} threshold={a['threshold']}")
    if not report.all_passed:
        print("one or more assertions failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
