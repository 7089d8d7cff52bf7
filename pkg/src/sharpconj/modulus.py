"""Concave moduli of continuity on [0, pi].

A :class:`Modulus` is an immutable description of a function ``omega`` with
``omega(0) = 0`` that is nondecreasing and concave on ``[0, pi]``.  Five kinds
are built in (see :func:`parse`)::

    lip:K            omega(t) = K t
    power:ALPHA[:K]  omega(t) = K t**ALPHA,  0 < ALPHA <= 1
    capped:C         omega(t) = min(t, C)
    log              omega(t) = -1/ln t on (0, e^-2], 1/2 beyond
    table:PATH       piecewise-linear through CSV knots (t, omega)

Every kind also carries a positive ``factor`` that multiplies the value, so
``m.scaled(lam)`` is exact for all kinds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "DOMAIN_END",
    "LOG_JUNCTION",
    "DiniReport",
    "InvalidModulusError",
    "Modulus",
    "dini_check",
    "lipschitz",
    "power",
    "capped_linear",
    "log_modulus",
    "tabulated",
    "zero",
    "parse",
    "require_valid",
    "validate",
]

DOMAIN_END = math.pi
LOG_JUNCTION = math.exp(-2.0)

KINDS = ("lipschitz", "power", "capped_linear", "log_modulus", "tabulated")

# slope tolerance for user tables; built-ins use a relative one
TABLE_SLOPE_TOL = 1e-9
BUILTIN_SLOPE_TOL = 1e-9


class InvalidModulusError(ValueError):
    """Raised for malformed parameters, DSL strings or failed validation."""


@dataclass(frozen=True)
class Modulus:
    kind: str
    K: float = 1.0
    alpha: float = 1.0
    c: float = 1.0
    knots: tuple = ()
    factor: float = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidModulusError(f"unknown modulus kind {self.kind!r}")
        if not (math.isfinite(self.factor) and self.factor > 0):
            raise InvalidModulusError("factor must be a positive finite number")
        if self.kind in ("lipschitz", "power") and not (math.isfinite(self.K) and self.K > 0):
            raise InvalidModulusError(f"K must be positive, got {self.K}")
        if self.kind == "power" and not (0 < self.alpha <= 1):
            raise InvalidModulusError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.kind == "capped_linear" and not (math.isfinite(self.c) and self.c > 0):
            raise InvalidModulusError(f"cap must be positive, got {self.c}")
        if self.kind == "tabulated":
            if len(self.knots) < 2:
                raise InvalidModulusError("a table needs at least two knots")
            arr = np.asarray(self.knots, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
                raise InvalidModulusError("table knots must be finite (t, omega) pairs")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "lipschitz":
            base = f"lip:{self.K!r}"
        elif self.kind == "power":
            base = f"power:{self.alpha!r}:{self.K!r}"
        elif self.kind == "capped_linear":
            base = f"capped:{self.c!r}"
        elif self.kind == "log_modulus":
            base = "log"
        else:
            base = f"table[{len(self.knots)} knots]"
        return base if self.factor == 1.0 else f"{self.factor!r}*{base}"

    @property
    def _table(self):
        arr = np.asarray(self.knots, dtype=float)
        return arr[:, 0], arr[:, 1]

    def __call__(self, t):
        return evaluate(self, t)

    def scaled(self, lam: float) -> "Modulus":
        return replace(self, factor=self.factor * lam, label="")

    def sup(self) -> float:
        """omega(pi), the largest value on the domain."""
        return float(evaluate(self, DOMAIN_END))

    def initial_slope(self) -> float:
        """Right derivative at 0 (``inf`` when unbounded)."""
        if self.kind == "lipschitz":
            s = self.K
        elif self.kind == "power":
            s = self.K if self.alpha == 1 else math.inf
        elif self.kind == "capped_linear":
            s = 1.0
        elif self.kind == "log_modulus":
            s = math.inf
        else:
            t, w = self._table
            s = (w[1] - w[0]) / (t[1] - t[0])
        return self.factor * s

    def breakpoints(self) -> list[float]:
        """Points in (0, pi) where omega has a derivative jump."""
        if self.kind == "capped_linear":
            pts = [self.c]
        elif self.kind == "log_modulus":
            pts = [LOG_JUNCTION]
        elif self.kind == "tabulated":
            pts = list(self._table[0])
        else:
            pts = []
        return sorted(p for p in pts if 0 < p < DOMAIN_END)

    def is_zero(self) -> bool:
        return self.kind == "tabulated" and bool(np.all(self._table[1] == 0))


def evaluate(m: Modulus, t):
    """Evaluate ``omega(t)`` for scalar or array ``t`` in ``[0, pi]``."""
    scalar = np.ndim(t) == 0
    x = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > DOMAIN_END * (1 + 1e-12)):
        raise InvalidModulusError(f"modulus argument outside [0, pi]: {t!r}")
    if m.kind == "lipschitz":
        y = m.K * x
    elif m.kind == "power":
        y = m.K * x**m.alpha
    elif m.kind == "capped_linear":
        y = np.minimum(x, m.c)
    elif m.kind == "log_modulus":
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(x <= LOG_JUNCTION, -1.0 / np.log(np.where(x > 0, x, 0.5)), 0.5)
        y = np.where(x == 0, 0.0, y)
    else:
        kt, kw = m._table
        y = np.interp(x, kt, kw)
    y = m.factor * y
    return float(y) if scalar else y


def lipschitz(K: float = 1.0) -> Modulus:
    return Modulus("lipschitz", K=float(K))


def power(alpha: float, K: float = 1.0) -> Modulus:
    return Modulus("power", alpha=float(alpha), K=float(K))


def capped_linear(c: float) -> Modulus:
    return Modulus("capped_linear", c=float(c))


def log_modulus() -> Modulus:
    return Modulus("log_modulus")


def tabulated(knots: Sequence[Sequence[float]], label: str = "") -> Modulus:
    return Modulus("tabulated", knots=tuple((float(a), float(b)) for a, b in knots), label=label)


def zero() -> Modulus:
    """The identically vanishing modulus, as a two-knot table."""
    return tabulated([(0.0, 0.0), (DOMAIN_END, 0.0)], label="zero")


def _read_table(path: str) -> list[tuple[float, float]]:
    rows = []
    try:
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != 2:
                    raise InvalidModulusError(f"{path}: expected two columns, got {row!r}")
                rows.append((float(row[0]), float(row[1])))
    except OSError as exc:
        raise InvalidModulusError(f"cannot read table {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, InvalidModulusError):
            raise
        raise InvalidModulusError(f"{path}: non-numeric entry ({exc})") from exc
    return rows


def parse(dsl: str) -> Modulus:
    """Build a modulus from a DSL string such as ``power:0.5:2`` or ``table:w.csv``."""
    head, _, rest = dsl.strip().partition(":")
    args = rest.split(":") if rest else []

    def num(s):
        try:
            return float(s)
        except ValueError:
            raise InvalidModulusError(f"bad number {s!r} in modulus {dsl!r}") from None

    if head == "lip" and len(args) == 1:
        m = lipschitz(num(args[0]))
    elif head == "power" and len(args) in (1, 2):
        m = power(num(args[0]), num(args[1]) if len(args) == 2 else 1.0)
    elif head == "capped" and len(args) == 1:
        m = capped_linear(num(args[0]))
    elif head == "log" and not args:
        m = log_modulus()
    elif head == "table" and rest:
        m = tabulated(_read_table(rest))
    else:
        raise InvalidModulusError(f"cannot parse modulus {dsl!r}")
    return replace(m, label=dsl.strip())


def _check_grid(m: Modulus) -> np.ndarray:
    uniform = np.linspace(0.0, DOMAIN_END, 4097)
    near0 = DOMAIN_END * 2.0 ** -np.arange(1, 61, 0.5)
    grid = np.concatenate([uniform, near0, m.breakpoints()])
    return np.unique(grid)


def validate(m: Modulus) -> Optional[str]:
    """Return ``None`` if ``m`` is a concave modulus, else a description of the
    first violation found."""
    if m.kind == "tabulated":
        kt, kw = m._table
        if kt[0] != 0 or kw[0] != 0:
            return f"table must start at (0, 0), starts at ({kt[0]}, {kw[0]})"
        steps = np.diff(kt)
        if np.any(steps <= 0):
            i = int(np.argmax(steps <= 0))
            return f"table abscissae not strictly increasing at t={kt[i + 1]}"
        slopes = np.diff(kw) / steps
        if np.any(slopes < -TABLE_SLOPE_TOL):
            i = int(np.argmax(slopes < -TABLE_SLOPE_TOL))
            return f"table decreases on [{kt[i]}, {kt[i + 1]}]"
        jumps = np.diff(slopes)
        if np.any(jumps > TABLE_SLOPE_TOL):
            i = int(np.argmax(jumps > TABLE_SLOPE_TOL))
            return (
                f"table not concave at t={kt[i + 1]}: slope increases "
                f"{slopes[i]:.6g} -> {slopes[i + 1]:.6g}"
            )

    if evaluate(m, 0.0) != 0:
        return "omega(0) != 0"
    t = _check_grid(m)
    w = evaluate(m, t)
    dw = np.diff(w)
    if np.any(dw < -1e-12 * max(1.0, float(np.max(np.abs(w))))):
        i = int(np.argmax(dw < 0))
        return f"not nondecreasing near t={t[i + 1]:.6g}"
    slopes = dw / np.diff(t)
    tol = BUILTIN_SLOPE_TOL * np.maximum(1.0, np.abs(slopes[:-1]))
    bad = np.diff(slopes) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        return f"not concave near t={t[i + 1]:.6g}"
    return None


def require_valid(m: Modulus) -> Modulus:
    problem = validate(m)
    if problem is not None:
        raise InvalidModulusError(f"{m.label}: {problem}")
    return m


@dataclass(frozen=True)
class DiniReport:
    converges: bool
    integral_value: float  # inf when divergent
    epsilon_used: float
    tail_growth_samples: list

    @property
    def divergent(self) -> bool:
        return not self.converges


def dini_check(m: Modulus, eps0: float = DOMAIN_END, ladder_depth: int = 60) -> DiniReport:
    """Test the Dini condition ``int_0^eps0 omega(t)/t dt < inf``.

    The integral is accumulated over octaves ``[eps0 2^-(k+1), eps0 2^-k]``.
    Convergence is declared when the last octave increments decay
    geometrically (each at least 1.05 times smaller than the previous, or a
    stationary ratio below one); the remaining tail is then extrapolated.
    ``-1/ln t`` gives increments decaying like 1/k, which fails the test.
    """
    from .quadrature import geometric_decay, integrate_adaptive

    if not (0 < eps0 <= DOMAIN_END):
        raise InvalidModulusError(f"eps0 must lie in (0, pi], got {eps0}")
    if ladder_depth < 4:
        raise ValueError("ladder_depth must be at least 4")

    def f(t):
        return evaluate(m, t) / t

    increments = []
    samples = []
    total = 0.0
    hi = eps0
    for k in range(1, ladder_depth + 1):
        lo = eps0 * 2.0**-k
        inc = integrate_adaptive(f, lo, hi, rel_tol=1e-12).value
        increments.append(inc)
        total += inc
        samples.append((lo, total))
        hi = lo

    q = geometric_decay(increments)
    if q is None:
        return DiniReport(False, math.inf, eps0, samples)
    if q > 0:
        total += increments[-1] * q / (1 - q)
    return DiniReport(True, total, eps0, samples)
