"""Extremal constants for conjugate classes.

All functions take a validated :class:`~sharpconj.modulus.Modulus` and return
a :class:`ConstantResult`.  Divergence in the C metric (moduli failing the
Dini condition) is reported as a result with ``divergent=True`` and
``value=inf``, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .modulus import DOMAIN_END, Modulus, dini_check, evaluate, require_valid
from .quadrature import (
    DEFAULT_REL_TOL,
    gauss_legendre_panels,
    integrate_adaptive,
    integrate_endpoint_singular,
)

__all__ = [
    "ConstantResult",
    "RhoTable",
    "UnsupportedCaseError",
    "m0_c",
    "rho",
    "rho_residual",
    "rho_by_bisection",
    "rho_table",
    "omega0_diff",
    "b_coeff",
    "b_coefficients",
    "b_tail_bound",
    "m_r_l",
    "series_terms",
    "wrk_l",
    "variation_sup",
    "e0_sup",
]

MAX_SERIES_TERMS = 1 << 12


class UnsupportedCaseError(ValueError):
    """A parameter combination the formulas do not cover (e.g. r = 0 in the
    L-norm series)."""


@dataclass(frozen=True)
class ConstantResult:
    name: str
    value: float
    abs_error: float
    terms_or_panels: int
    modulus: str = ""
    r: Optional[int] = None
    t: Optional[float] = None
    divergent: bool = False

    @classmethod
    def diverging(cls, name, terms, modulus, r=None, t=None):
        return cls(name, math.inf, math.inf, terms, modulus, r, t, divergent=True)

    def inputs(self) -> dict:
        out = {"modulus": self.modulus}
        if self.r is not None:
            out["r"] = self.r
        if self.t is not None:
            out["t"] = self.t
        return out


def _dini_fails(m: Modulus) -> bool:
    return dini_check(m).divergent


def m0_c(m: Modulus, rel_tol: float = DEFAULT_REL_TOL) -> ConstantResult:
    """Sup of ||f~||_C over H_omega: ``(1/pi) int_0^{pi/2} omega(2t)/sin t dt``."""
    require_valid(m)
    if m.is_zero():
        return ConstantResult("m0_c", 0.0, 0.0, 0, m.label)
    if _dini_fails(m):
        return ConstantResult.diverging("m0_c", 0, m.label)

    def integrand(t):
        return evaluate(m, 2 * t) / np.sin(t)

    q = integrate_endpoint_singular(integrand, 0.0, math.pi / 2, "a", rel_tol=rel_tol)
    if q.diverged:
        return ConstantResult.diverging("m0_c", q.panels_used, m.label)
    return ConstantResult("m0_c", q.value / math.pi, q.abs_error_estimate / math.pi, q.panels_used, m.label)


# -- the rho(x) relation ------------------------------------------------------
#
# With a = t/2 and k(u) = sin a / (cos u - cos a), the function
# F(u) = ln[sin((a+u)/2) / sin(|a-u|/2)] satisfies F' = k on both sides of a,
# F(0) = F(pi) = 0.  The defining equation becomes F(rho) = F(x) = ln S with
# S = sin((a+x)/2) / sin((a-x)/2), whose solution in (a, pi) is
#     rho = a + 2 atan(sin a / (S - cos a)).


def _check_rho_args(t: float, x: float):
    if not (0 < t < 2 * math.pi):
        raise ValueError(f"t must lie in (0, 2*pi), got {t}")
    if not (0 < x < t / 2):
        raise ValueError(f"x must lie in (0, t/2) = (0, {t / 2}), got {x}")


def _rho_gap(a: float, v):
    """``rho - a`` as a function of ``v = a - x``, free of cancellation."""
    sv = np.sin(0.5 * v)
    return 2 * np.arctan2(np.sin(a) * sv, np.sin(a - 0.5 * v) - np.cos(a) * sv)


def rho(t: float, x: float) -> float:
    """Solution rho(x) in (t/2, pi) of the kernel-balance equation for shift t."""
    _check_rho_args(t, x)
    a = 0.5 * t
    return float(a + _rho_gap(a, a - x))


def _kernel(t: float):
    a = 0.5 * t
    sa, ca = math.sin(a), math.cos(a)
    return lambda u: sa / (np.cos(u) - ca)


def rho_residual(t: float, x: float, rho_value: float, rel_tol: float = 1e-13) -> float:
    """``int_0^x k + int_rho^pi k`` evaluated by quadrature (zero at the solution)."""
    k = _kernel(t)
    lhs = integrate_adaptive(k, 0.0, x, rel_tol=rel_tol, abs_tol=1e-15).value
    rhs = integrate_adaptive(k, rho_value, math.pi, rel_tol=rel_tol, abs_tol=1e-15).value
    return lhs + rhs


def rho_by_bisection(t: float, x: float, tol: float = 1e-13) -> float:
    """Independent solution of the rho equation by bracketed root finding
    (Brent's method, bisection-safeguarded) on the quadrature-evaluated
    residual, which increases with rho."""
    _check_rho_args(t, x)
    k = _kernel(t)
    a = 0.5 * t
    lhs = integrate_adaptive(k, 0.0, x, rel_tol=1e-12, abs_tol=1e-15).value

    def residual(r):
        if r >= math.pi:
            return lhs
        return lhs + integrate_adaptive(k, r, math.pi, rel_tol=1e-12, abs_tol=1e-15).value

    # the tail integral tends to -inf as rho -> t/2; find a negative bracket end
    gap = 0.5 * (math.pi - a)
    while residual(a + gap) >= 0:
        gap *= 0.5
        if gap < 1e-300:
            raise RuntimeError("could not bracket rho")
    return float(brentq(residual, a + gap, math.pi, xtol=tol, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class RhoTable:
    t: float
    nodes: list  # (x, rho(x)) pairs
    residuals: list

    def is_strictly_decreasing(self) -> bool:
        r = [p[1] for p in self.nodes]
        return all(b < a for a, b in zip(r, r[1:]))

    def in_range(self) -> bool:
        a = self.t / 2
        return all(a < r < math.pi for _, r in self.nodes)


def rho_table(t: float, samples: int = 25, with_residuals: bool = True) -> RhoTable:
    """rho on ``samples`` equispaced interior points of (0, t/2)."""
    if samples < 1:
        raise ValueError("samples must be positive")
    xs = (t / 2) * np.arange(1, samples + 1) / (samples + 1)
    nodes = [(float(x), rho(t, float(x))) for x in xs]
    residuals = [rho_residual(t, x, r) for x, r in nodes] if with_residuals else []
    return RhoTable(float(t), nodes, residuals)


def omega0_diff(m: Modulus, t: float, rel_tol: float = DEFAULT_REL_TOL) -> ConstantResult:
    """Sup over H_omega of max_x |f~(x+t) - f~(x)|, for 0 <= t <= pi.

    Evaluated as (2/pi) int_0^{t/2} k(u) omega(rho(u) - u) du in the variable
    v = t/2 - u, where both the kernel and rho(u) - u = v + (rho - t/2) are
    formed without subtracting nearby numbers.
    """
    require_valid(m)
    t = float(t)
    if not (0 <= t <= math.pi):
        raise ValueError(f"omega0_diff supports 0 <= t <= pi, got {t}")
    if t == 0 or m.is_zero():
        return ConstantResult("omega0_diff", 0.0, 0.0, 0, m.label, t=t)
    if _dini_fails(m):
        return ConstantResult.diverging("omega0_diff", 0, m.label, t=t)
    a = 0.5 * t
    sa = math.sin(a)

    def integrand(v):
        sv = np.sin(0.5 * v)
        kern = sa / (2 * np.sin(a - 0.5 * v) * sv)
        arg = np.minimum(v + _rho_gap(a, v), DOMAIN_END)
        return kern * evaluate(m, arg)

    q = integrate_endpoint_singular(integrand, 0.0, a, "a", rel_tol=rel_tol, local=True)
    if q.diverged:
        return ConstantResult.diverging("omega0_diff", q.panels_used, m.label, t=t)
    scale = 2 / math.pi
    return ConstantResult(
        "omega0_diff", scale * q.value, scale * q.abs_error_estimate, q.panels_used, m.label, t=t
    )


def e0_sup(m: Modulus, rel_tol: float = DEFAULT_REL_TOL) -> ConstantResult:
    """Sup of the best approximation by constants over conjugates of H_omega,
    i.e. half the shift-difference constant at t = pi."""
    d = omega0_diff(m, math.pi, rel_tol=rel_tol)
    if d.divergent:
        return ConstantResult.diverging("e0_sup", d.terms_or_panels, m.label)
    return ConstantResult("e0_sup", 0.5 * d.value, 0.5 * d.abs_error, d.terms_or_panels, m.label)


# -- the L-norm series ----------------------------------------------------------


def _check_odd(k: int):
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ValueError(f"index must be an odd positive integer, got {k}")


def b_coeff(m: Modulus, k: int, rel_tol: float = 1e-12) -> float:
    """``(2/pi) int_0^{pi/2} omega(2t) sin(kt) dt`` for odd ``k``."""
    require_valid(m)
    _check_odd(k)
    if m.is_zero():
        return 0.0
    pieces = [0.0] + [p / 2 for p in m.breakpoints()] + [math.pi / 2]
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        total += integrate_adaptive(
            lambda t: evaluate(m, 2 * t) * np.sin(k * t), lo, hi, rel_tol=rel_tol, abs_tol=1e-16
        ).value
    return 2 / math.pi * total


def _series_mesh(m: Modulus, kmax: int):
    """Panel breaks on [0, pi/2]: kinks of omega(2t), panels no wider than
    two periods of sin(kmax t), and geometric grading into t = 0."""
    width = min(4 * math.pi / kmax, math.pi / 8)
    fixed = [0.0] + [p / 2 for p in m.breakpoints()] + [math.pi / 2]
    breaks = []
    for lo, hi in zip(fixed, fixed[1:]):
        count = max(1, math.ceil((hi - lo) / width))
        breaks.extend(np.linspace(lo, hi, count + 1)[:-1])
    breaks.append(math.pi / 2)
    first = breaks[1]
    graded = first * 2.0 ** -np.arange(60, 0, -1)
    return np.concatenate([[0.0], graded, breaks[1:]])


def b_coefficients(m: Modulus, count: int, order: int = 24):
    """``b_k`` for ``k = 1, 3, ..., 2*count - 1`` and per-coefficient error
    estimates, via composite Gauss-Legendre shared by all ``k``."""
    require_valid(m)
    ks = 2 * np.arange(count) + 1
    if m.is_zero() or count == 0:
        return np.zeros(count), np.zeros(count)
    breaks = _series_mesh(m, int(ks[-1]))
    out = []
    for nodes_order in (order, order - 4):
        x, w = gauss_legendre_panels(breaks, nodes_order)
        gw = w * evaluate(m, 2 * x)
        vals = np.empty(count)
        chunk = max(1, 4_000_000 // x.size)
        for s in range(0, count, chunk):
            kk = ks[s : s + chunk]
            vals[s : s + chunk] = np.sin(np.multiply.outer(kk, x)) @ gw
        out.append(2 / math.pi * vals)
    fine, coarse = out
    err = np.abs(fine - coarse) + 1e-15 * np.abs(fine).max()
    return fine, err


def b_tail_bound(m: Modulus, k) -> np.ndarray:
    """Upper bound for ``|b_k|`` (odd k), the least of three estimates valid
    for every concave modulus:

    * ``4 omega(pi) / (pi k)``  (second mean value theorem),
    * ``6 omega(2/k) / (pi k)`` (integrate by parts, split at t = 1/k),
    * ``4 omega'(0+) / (pi k^2)`` when the initial slope is finite.
    """
    k = np.asarray(k, dtype=float)
    w_pi = m.sup()
    bound = 4 * w_pi / (math.pi * k)
    small = np.minimum(2 / k, DOMAIN_END)
    bound = np.minimum(bound, 6 * evaluate(m, small) / (math.pi * k))
    slope = m.initial_slope()
    if math.isfinite(slope):
        bound = np.minimum(bound, 4 * slope / (math.pi * k**2))
    return bound


def _tail_sum_bound(m: Modulus, r: int, count: int) -> float:
    """Bound on ``4 sum_{i >= count} |b_{2i+1}| / (2i+1)^(r+1)``.

    Each candidate bound c(k) for |b_k| / k^(r+1) is decreasing in k, so the
    sum over odd k >= K is at most c(K) + (1/2) int_K^inf c.  The least of
    the candidate tails is returned.
    """
    K = 2 * count + 1
    p = r + 1
    w_pi = m.sup()
    tails = [4 * w_pi / math.pi * (K ** -(p + 1) + 0.5 * K**-p / p)]
    wk = float(evaluate(m, min(2 / K, DOMAIN_END)))
    tails.append(6 * wk / math.pi * (K ** -(p + 1) + 0.5 * K**-p / p))
    slope = m.initial_slope()
    if math.isfinite(slope):
        tails.append(4 * slope / math.pi * (K ** -(p + 2) + 0.5 * K ** -(p + 1) / (p + 1)))
    return 4 * min(tails)


def _series_sign(i: np.ndarray, r: int) -> np.ndarray:
    # parity of i*(r+1), no floating-point powers
    return np.where((i * (r + 1)) % 2 == 0, 1.0, -1.0)


def series_terms(m: Modulus, r: int, count: int):
    """Terms ``4 (-1)^{i(r+1)} b_{2i+1} / (2i+1)^{r+1}``, ``i < count``, with
    their quadrature error estimates."""
    i = np.arange(count)
    k = 2 * i + 1
    b, berr = b_coefficients(m, count)
    scale = 4.0 / k.astype(float) ** (r + 1)
    return _series_sign(i, r) * scale * b, scale * berr


def m_r_l(
    m: Modulus,
    r: int,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = MAX_SERIES_TERMS,
) -> ConstantResult:
    """Sup of ||f||_L over conjugates of W^r H_omega (r >= 1), as the series
    ``4 sum_i (-1)^{i(r+1)} b_{2i+1} / (2i+1)^{r+1}``.

    The number of terms is the least power of two whose rigorous tail bound
    is below ``rel_tol / 10`` times the partial sum (capped at ``max_terms``);
    ``abs_error`` is that tail bound plus the quadrature error of the terms.
    """
    require_valid(m)
    if int(r) != r or r < 0:
        raise ValueError(f"r must be a nonnegative integer, got {r}")
    if r == 0:
        raise UnsupportedCaseError("the L-norm series is stated for r >= 1 only")
    r = int(r)
    if m.is_zero():
        return ConstantResult("m_r_l", 0.0, 0.0, 0, m.label, r=r)

    count = 64
    head, _ = series_terms(m, r, count)
    estimate = abs(math.fsum(head))
    target = max(0.1 * rel_tol * estimate, 1e-15)
    while count < max_terms and _tail_sum_bound(m, r, count) > target:
        count *= 2
    count = min(count, max_terms)
    terms, errs = series_terms(m, r, count)
    value = math.fsum(terms)
    err = float(_tail_sum_bound(m, r, count) + math.fsum(errs) + count * np.finfo(float).eps * abs(value))
    return ConstantResult("m_r_l", value, err, count, m.label, r=r)


def variation_sup(m: Modulus, r: int, rel_tol: float = DEFAULT_REL_TOL) -> ConstantResult:
    """Sup of the total variation over conjugates of W^r H_omega (r >= 2).

    The series is the L-norm series with r - 1, reindexed."""
    if int(r) != r or r < 2:
        raise ValueError(f"variation_sup needs integer r >= 2, got {r}")
    res = m_r_l(m, int(r) - 1, rel_tol=rel_tol)
    return ConstantResult("variation_sup", res.value, res.abs_error, res.terms_or_panels, m.label, r=int(r))


def wrk_l(K: float, r: int) -> ConstantResult:
    """Sup of ||f~||_L over W^r K, ``(16K/pi) sum_i (-1)^{i(r+1)} / (2i+1)^{r+2}``."""
    if not (K > 0 and math.isfinite(K)):
        raise ValueError(f"K must be positive, got {K}")
    if int(r) != r or r < 2:
        raise ValueError(f"wrk_l needs integer r >= 2, got {r}")
    r = int(r)
    p = r + 2
    count = 1 << 14
    i = np.arange(count)
    k = (2 * i + 1).astype(float)
    s = math.fsum(_series_sign(i, r) / k**p)
    # alternating case: first omitted term; positive case: integral tail
    K0 = 2 * count + 1
    tail = K0**-p if r % 2 == 0 else K0**-p + 0.5 * K0 ** (1 - p) / (p - 1)
    scale = 16 * K / math.pi
    return ConstantResult(
        "wrk_l", scale * s, float(scale * (tail + 4 * np.finfo(float).eps * abs(s))), count, f"W^{r}K, K={K!r}", r=r
    )
