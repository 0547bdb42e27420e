"""Besov-type norms and inequality verifiers built on best approximation.

The dyadic approximation norm ("a-norm")

    ||f||_p + ( sum_{j=0..J} (2^(alpha j) E(f, 4^j, p))^q )^(1/q)

is the central object. Alongside it: a continuous-in-t version integrated
exactly against the step structure of E(f, t, p), the spectral Sobolev
surrogate ||f||_p + ||L^(k/2) f||_p, an independent Littlewood-Paley
comparator norm built from the dyadic filter bank, Jackson and Bernstein
ratio checks, and a quadratic-mean K-functional for the pair (L_2, W^k_2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .approx import best_approx, error_sequence
from .filters import FilterFamily, make_filter_family
from .manifold import GridFunction, lp_norm
from .spectrum import EigenSystem, apply_power, project, synthesize


@dataclass
class BesovParams:
    """Smoothness alpha > 0, integrability p, summability q, truncation J."""

    alpha: float
    p: float
    q: float
    J: int

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.p < 1:
            raise ValueError("p must satisfy 1 <= p <= inf")
        if self.q <= 0:
            raise ValueError("q must satisfy 0 < q <= inf")
        if self.J < 1:
            raise ValueError("J must be at least 1")


@dataclass
class NormReport:
    """A-norm evaluation, optionally paired with the comparator norm."""

    a_norm: float
    lp_part: float
    dyadic_tail_terms: list = field(default_factory=list)
    comparator_norm: float | None = None
    ratio: float | None = None
    tail_residual: float = 0.0
    errors: list = field(default_factory=list)


def _q_sum(terms: np.ndarray, q: float) -> float:
    terms = np.asarray(terms, dtype=float)
    if len(terms) == 0:
        return 0.0
    if np.isinf(q):
        return float(terms.max())
    m = terms.max()
    if m == 0.0:
        return 0.0
    return float(m * ((terms / m) ** q).sum() ** (1.0 / q))


def a_norm(eigsys: EigenSystem, f: GridFunction, params: BesovParams,
           errors: list[float] | None = None) -> NormReport:
    """Dyadic approximation norm truncated at level J.

    ``errors`` may carry precomputed E(f, 4^j, p) values (j = 0..J) to avoid
    re-solving. Terms beyond J are not silently dropped: a geometric
    extrapolation from the last observed decay is reported as
    ``tail_residual``.
    """
    if 4.0 ** params.J > eigsys.band_limit:
        raise ValueError("4^J exceeds the computed band limit")
    model = eigsys.model
    if errors is None:
        errors = [r.error for r in
                  error_sequence(model, eigsys, f, params.p, params.J)]
    if len(errors) != params.J + 1:
        raise ValueError("need one error per level j = 0..J")
    lp_part = lp_norm(model, f, params.p)
    terms = [2.0 ** (params.alpha * j) * errors[j] for j in range(params.J + 1)]
    total = lp_part + _q_sum(np.array(terms), params.q)
    return NormReport(a_norm=total, lp_part=lp_part, dyadic_tail_terms=terms,
                      tail_residual=_tail_residual(errors, params),
                      errors=list(errors))


def _tail_residual(errors, params):
    e_last = errors[-1]
    if e_last == 0.0:
        return 0.0
    ratio = errors[-1] / errors[-2] if len(errors) > 1 and errors[-2] > 0 else 1.0
    r = 2.0 ** params.alpha * min(ratio, 1.0)
    head = 2.0 ** (params.alpha * params.J) * e_last
    if r >= 1.0:
        return float("inf")
    if np.isinf(params.q):
        return head * r
    return head * r / (1.0 - r ** params.q) ** (1.0 / params.q)


class ErrorCache:
    """Memo for best-approximation errors across norm evaluations.

    Keys on function identity, pinning each function so a recycled object
    address can never alias two different functions.
    """

    def __init__(self):
        self._vals: dict = {}
        self._pins: list = []

    def lookup(self, f, p, omega):
        return self._vals.get((id(f), float(p), float(omega)))

    def store(self, f, p, omega, value):
        self._pins.append(f)
        self._vals[(id(f), float(p), float(omega))] = value


def errors_at_cutoffs(eigsys: EigenSystem, f: GridFunction, p: float,
                      cutoffs, cache: ErrorCache | None = None) -> list[float]:
    """E(f, omega, p) at each cutoff, optionally memoized through ``cache``."""
    model = eigsys.model
    out = []
    for omega in cutoffs:
        val = cache.lookup(f, p, omega) if cache is not None else None
        if val is None:
            val = best_approx(model, eigsys, f, omega, p).error
            if cache is not None:
                cache.store(f, p, omega, val)
        out.append(val)
    return out


def a_norm_continuous(eigsys: EigenSystem, f: GridFunction, alpha: float,
                      p: float, q: float, t_grid,
                      cache: ErrorCache | None = None) -> float:
    """Continuous-parameter approximation norm over the cutoff range of t_grid.

    E(f, t, p) is a right-continuous step function of the cutoff t, constant
    between consecutive eigenvalues, so the integral
    int (t^(alpha/2) E(f,t,p))^q dt/t is evaluated exactly on each step
    segment (cutoff-variable scaling: t is an eigenvalue bound, and the
    dyadic norm samples it at t = 2^(2j)). Refining t_grid beyond the
    eigenvalue resolution therefore changes nothing; only its endpoints
    matter.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t_grid must be positive")
    t_lo, t_hi = float(t_grid.min()), float(t_grid.max())
    if t_hi > eigsys.band_limit:
        raise ValueError("t_grid exceeds the computed band limit")
    model = eigsys.model
    lam = eigsys.eigenvalues
    breaks = np.unique(np.concatenate([[t_lo, t_hi],
                                       lam[(lam > t_lo) & (lam < t_hi)]]))
    evals = errors_at_cutoffs(eigsys, f, p, breaks[:-1], cache)
    expo = alpha / 2.0
    if np.isinf(q):
        sup = 0.0
        for (a, b), e in zip(zip(breaks[:-1], breaks[1:]), evals):
            sup = max(sup, b ** expo * e)
        return lp_norm(model, f, p) + sup
    total = 0.0
    for (a, b), e in zip(zip(breaks[:-1], breaks[1:]), evals):
        if e > 0.0:
            total += e ** q * (b ** (expo * q) - a ** (expo * q)) / (expo * q)
    return lp_norm(model, f, p) + total ** (1.0 / q)


def besov_report(eigsys: EigenSystem, f: GridFunction, params: BesovParams,
                 family: FilterFamily | None = None,
                 errors: list[float] | None = None) -> NormReport:
    """A-norm and Littlewood-Paley comparator side by side, with their ratio."""
    rep = a_norm(eigsys, f, params, errors=errors)
    comp = lp_comparator_norm(eigsys, f, params, family=family)
    rep.comparator_norm = comp
    rep.ratio = rep.a_norm / comp if comp > 0 else float("inf")
    return rep


def is_bandlimited(eigsys: EigenSystem, f: GridFunction, tol: float = 1e-8) -> bool:
    """Whether f is reproduced by its eigenexpansion to relative ``tol``."""
    resid = f.values - synthesize(eigsys, project(eigsys, f)).values
    scale = max(float(np.abs(f.values).max()), 1e-300)
    return float(np.abs(resid).max()) <= tol * scale


def _require_bandlimited(eigsys, f, tol=1e-8):
    if not is_bandlimited(eigsys, f, tol):
        raise ValueError("function is not bandlimited in this eigensystem")
    return project(eigsys, f)


def sobolev_norm(eigsys: EigenSystem, f: GridFunction, k: int, p: float) -> float:
    """Spectral Sobolev surrogate ||f||_p + ||L^(k/2) f||_p (f bandlimited)."""
    c = _require_bandlimited(eigsys, f)
    rough = synthesize(eigsys, apply_power(eigsys, c, k / 2.0))
    model = eigsys.model
    return lp_norm(model, f, p) + lp_norm(model, rough, p)


def lp_comparator_norm(eigsys: EigenSystem, f: GridFunction,
                       params: BesovParams,
                       family: FilterFamily | None = None) -> float:
    """Littlewood-Paley comparator: ||F_0(L)f||_p + l_q sum of scaled blocks.

    The filter bank is applied at unit scale, so block j covers eigenvalues
    in [4^(j-1), 16*4^(j-1)]; blocks beyond the band limit vanish identically
    and the sum is finite without truncation error.
    """
    family = family or make_filter_family()
    model = eigsys.model
    lam = eigsys.eigenvalues
    c = project(eigsys, f).coefficients
    u = eigsys.eigenfunctions

    def block_norm(j):
        vals = u @ (c * family.f_j(j, lam))
        return lp_norm(model, GridFunction(model, vals), params.p)

    j_max = 1
    while 4.0 ** (j_max - 1) <= eigsys.band_limit:
        j_max += 1
    terms = [2.0 ** (params.alpha * j) * block_norm(j) for j in range(1, j_max)]
    return block_norm(0) + _q_sum(np.array(terms), params.q)


def jackson_ratios(eigsys: EigenSystem, f: GridFunction, k: int, p: float,
                   J: int, errors: list[float] | None = None) -> list[float]:
    """Normalized Jackson ratios 2^(jk) E(f, 4^j, p) / ||L^(k/2) f||_p.

    Uses the cutoff-exponent normalization omega^(k/2) with omega = 2^(2j);
    for smooth f the sequence should stay bounded with no growth trend.
    """
    model = eigsys.model
    c = _require_bandlimited(eigsys, f)
    rough = synthesize(eigsys, apply_power(eigsys, c, k / 2.0))
    denom = lp_norm(model, rough, p)
    if errors is None:
        errors = [r.error for r in error_sequence(model, eigsys, f, p, J)]
    floor = 1e-12 * max(lp_norm(model, f, p), 1e-300)
    if denom <= floor:
        # essentially constant f: errors must vanish too (up to roundoff)
        if max(errors) > floor:
            raise ValueError("zero smoothness norm with nonzero errors")
        return [0.0] * (J + 1)
    return [2.0 ** (j * k) * errors[j] / denom for j in range(J + 1)]


def bernstein_ratio(eigsys: EigenSystem, f_band: GridFunction, k: int,
                    p: float, omega: float, tol: float = 1e-8) -> float:
    """||L^k f||_p / (omega^k ||f||_p) for f in the span {lambda <= omega}.

    At p = 2 the ratio is exactly bounded by 1. Rejects functions with
    spectral content above the cutoff.
    """
    c = _require_bandlimited(eigsys, f_band)
    idx = eigsys.cutoff_index(omega)
    high = c.coefficients[idx:]
    scale = max(float(np.abs(c.coefficients).max()), 1e-300)
    if len(high) and float(np.abs(high).max()) > tol * scale:
        raise ValueError("function has components above the cutoff omega")
    model = eigsys.model
    rough = synthesize(eigsys, apply_power(eigsys, c, float(k)))
    denom = omega ** k * lp_norm(model, f_band, p)
    if denom == 0.0:
        return 0.0
    return lp_norm(model, rough, p) / denom


def k_functional_quadratic(eigsys: EigenSystem, f: GridFunction, t: float,
                           k: int) -> float:
    """Quadratic-mean K-functional for (L_2, Sobolev-k) at parameter t.

    Per-coefficient minimization of ||f - g||^2 + t^2 ||g||_W^2 with
    ||g||_W = ||g|| + ||L^(k/2) g|| gives the closed form

        K_2(f, t)^2 = sum_l c_l^2 * t^2 mu_l / (1 + t^2 mu_l),
        mu_l = (1 + lambda_l^(k/2))^2,

    equivalent to the usual K-functional within absolute constants.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    c = _require_bandlimited(eigsys, f).coefficients
    mu = (1.0 + eigsys.eigenvalues ** (k / 2.0)) ** 2
    t2mu = t * t * mu
    return float(np.sqrt(np.sum(c * c * t2mu / (1.0 + t2mu))))


def interpolation_norm(eigsys: EigenSystem, f: GridFunction, theta: float,
                       q: float, k: int, t_grid) -> float:
    """||f||_2 plus the truncated interpolation quasi-norm from K_2.

    Log-grid quadrature of (t^-theta K_2(f,t))^q dt/t over the given grid
    (trapezoid in log t); sup over the grid for q = inf.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t_grid must be positive")
    t_grid = np.sort(t_grid)
    kvals = np.array([k_functional_quadratic(eigsys, f, t, k) for t in t_grid])
    weighted = t_grid ** (-theta) * kvals
    base = lp_norm(eigsys.model, f, 2)
    if np.isinf(q):
        return base + float(weighted.max())
    integral = np.trapezoid(weighted ** q, np.log(t_grid))
    return base + float(integral ** (1.0 / q))
