"""Quadrature for bounded, endpoint-singular and principal-value integrals.

Integrands are called with numpy arrays of abscissae and must return arrays
of the same shape; plain scalar callables are accepted and vectorized.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "QuadResult",
    "QuadratureError",
    "integrate_adaptive",
    "integrate_endpoint_singular",
    "integrate_pv_cotangent",
    "gauss_legendre_panels",
    "geometric_decay",
    "DEFAULT_REL_TOL",
]

DEFAULT_REL_TOL = 1e-9
ABS_FLOOR = 1e-14
MAX_OCTAVES = 60

# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points are the odd-indexed Kronrod nodes
_GW = np.zeros(15)
_GW[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(ArithmeticError):
    """Integrand produced a non-finite value."""


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    panels_used: int
    diverged: bool = False

    def __float__(self):
        return self.value


def _vectorize(f: Callable) -> Callable:
    def g(x):
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(f(xi)) for xi in x])

    return g


def _gk15(f, a: float, b: float):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c + h * _NODES
    y = f(x)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise QuadratureError(f"integrand not finite at x={bad!r}")
    k = h * float(np.dot(_KW, y))
    g = h * float(np.dot(_GW, y))
    resabs = abs(h) * float(np.dot(_KW, np.abs(y)))
    err = max(abs(k - g), 50 * np.finfo(float).eps * resabs)
    return k, err


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = ABS_FLOOR,
    max_panels: int = 4000,
) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7, 15) quadrature of ``f`` over [a, b].

    The panel with the largest error estimate is bisected until the summed
    estimate drops below ``max(rel_tol * |I|, abs_tol)``.  When the panel
    budget runs out the best value is returned with its (honest) estimate.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    fv = _vectorize(f)
    k, err = _gk15(fv, a, b)
    heap = [(-err, a, b, k)]
    panels = {(a, b): (k, err)}
    value, total_err = k, err
    while len(panels) < max_panels and heap:
        if total_err <= max(rel_tol * abs(value), abs_tol):
            break
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # too narrow to split; leave it as is
            continue
        kold, eold = panels.pop((lo, hi))
        value -= kold
        total_err -= eold
        for p, q in ((lo, mid), (mid, hi)):
            kp, ep = _gk15(fv, p, q)
            panels[(p, q)] = (kp, ep)
            heapq.heappush(heap, (-ep, p, q, kp))
            value += kp
            total_err += ep
    ordered = sorted(panels.items())
    value = math.fsum(v for _, (v, _) in ordered)
    total_err = math.fsum(e for _, (_, e) in ordered)
    return QuadResult(value, total_err, len(panels))


def integrate_endpoint_singular(
    f: Callable,
    a: float,
    b: float,
    singular_end: str = "a",
    rel_tol: float = DEFAULT_REL_TOL,
    max_octaves: int = MAX_OCTAVES,
    local: bool = False,
) -> QuadResult:
    """Integrate ``f`` over (a, b) with a possible blow-up at one endpoint.

    The interval is cut into octaves whose widths halve toward the singular
    end; each octave is integrated adaptively.  Refinement stops once an
    octave contributes less than ``rel_tol`` of the running total and the
    contributions decay geometrically (see :func:`geometric_decay`); the
    untouched remainder is then extrapolated as a geometric tail and also
    charged to the error estimate.  If contributions have not decayed after
    ``max_octaves`` the result is flagged ``diverged``.

    With ``local=True`` the integrand is called with the distance ``s`` from
    the singular end instead of the absolute abscissa, which avoids the
    cancellation in ``b - s`` when ``s`` is tiny.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if singular_end not in ("a", "b"):
        raise ValueError("singular_end must be 'a' or 'b'")
    fv = _vectorize(f)
    if local:
        g = fv
    elif singular_end == "a":
        g = lambda s: fv(a + s)  # noqa: E731
    else:
        g = lambda s: fv(b - s)  # noqa: E731

    length = b - a
    contributions = []
    errors = []
    panels = 0
    hi = length
    tail = None
    for j in range(max_octaves):
        lo = length * 2.0 ** -(j + 1)
        # accuracy is needed relative to the whole integral, not the octave
        target = 0.01 * rel_tol * abs(math.fsum(contributions)) if contributions else 0.0
        r = integrate_adaptive(g, lo, hi, rel_tol=rel_tol * 0.1, abs_tol=max(target, ABS_FLOOR * 1e-2))
        contributions.append(r.value)
        errors.append(r.abs_error_estimate)
        panels += r.panels_used
        hi = lo
        if j < 3:
            continue
        total = math.fsum(contributions)
        decay = geometric_decay(contributions)
        if decay is None:
            continue
        small = abs(contributions[-1]) <= rel_tol * abs(total) or abs(contributions[-1]) <= ABS_FLOOR
        if small:
            tail = contributions[-1] * decay / (1 - decay)
            tail_err = abs(tail)
            break
    else:
        decay = geometric_decay(contributions)
        if decay is None:
            return QuadResult(math.fsum(contributions), math.inf, panels, diverged=True)
        # depth exhausted in a geometric regime: extrapolate, and charge the
        # drift between the last two extrapolated totals
        tail = contributions[-1] * decay / (1 - decay)
        prev = geometric_decay(contributions[:-1])
        if prev is None:
            tail_err = abs(tail)
        else:
            prev_tail = contributions[-2] * prev / (1 - prev)
            tail_err = abs(contributions[-1] + tail - prev_tail) + 1e-6 * abs(tail)

    value = math.fsum(contributions) + tail
    err = math.fsum(errors) + tail_err
    return QuadResult(value, err, panels)


def geometric_decay(contributions):
    """Ratio ``q < 1`` of geometric decay in the last four octave
    contributions, or ``None`` when they do not decay geometrically.

    Decay is accepted when every step shrinks by at least 1.05, or when the
    ratio is below one and stationary (to 1e-6), as for a pure power law
    ``t^(alpha-1)`` with small alpha.  Log-type decay ``1/k`` has ratios
    creeping toward one and is rejected.  Trailing exact zeros count as
    decayed.
    """
    mags = [abs(v) for v in contributions[-4:]]
    if len(mags) < 4:
        return None
    if mags[-1] == 0 and mags[-2] == 0:
        return 0.0
    if any(v == 0 for v in mags[:-1]):
        return None
    ratios = [q / p for p, q in zip(mags, mags[1:])]
    if all(r <= 1 / 1.05 for r in ratios):
        return max(ratios)
    if max(ratios) < 1 and max(ratios) - min(ratios) <= 1e-6:
        return max(ratios)
    return None


def integrate_pv_cotangent(f, x: float, rel_tol: float = DEFAULT_REL_TOL) -> QuadResult:
    """Principal value of ``int_{-pi}^{pi} f(t) / (2 tan((t - x)/2)) dt``.

    ``f`` is a 2*pi-periodic callable, or an array of equispaced samples on
    ``[0, 2*pi)`` which is replaced by its trigonometric interpolant.  Pairing
    ``t = x +- s`` turns the principal value into the ordinary integral of
    ``(f(x+s) - f(x-s)) / (2 tan(s/2))`` over (0, pi], singular only at 0.
    The conjugate function is ``-value / pi``.
    """
    if not callable(f):
        from .conjugate import trig_interpolant

        f = trig_interpolant(np.asarray(f, dtype=float))
    fv = _vectorize(f)
    x = float(x)

    def integrand(s):
        return (fv(x + s) - fv(x - s)) / (2.0 * np.tan(0.5 * s))

    return integrate_endpoint_singular(integrand, 0.0, math.pi, "a", rel_tol=rel_tol)


def gauss_legendre_panels(breaks, order: int):
    """Nodes and weights of composite Gauss-Legendre on consecutive panels."""
    breaks = np.asarray(breaks, dtype=float)
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights
