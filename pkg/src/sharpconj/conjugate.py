"""Discrete trigonometric conjugation of sampled periodic functions.

Convention: the conjugate of ``cos kx`` is ``sin kx`` and that of ``sin kx``
is ``-cos kx``; equivalently

    f~(x) = -(1/pi) PV int_{-pi}^{pi} f(t) / (2 tan((t - x)/2)) dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quadrature import DEFAULT_REL_TOL, integrate_pv_cotangent

__all__ = [
    "GridFunction",
    "conjugate_spectral",
    "conjugate_pv",
    "conjugation_row",
    "norms",
    "trig_interpolant",
    "read_grid_function",
    "write_grid_function",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``f(2 pi j / n)``, ``j = 0..n-1``, of a 2*pi-periodic function."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not _is_power_of_two(v.size) or v.size < 8:
            raise ValueError(f"grid size must be a power of two >= 8, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    @classmethod
    def from_callable(cls, f, n: int) -> "GridFunction":
        return cls(f(2 * np.pi * np.arange(n) / n))

    def __eq__(self, other):
        return isinstance(other, GridFunction) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def _conjugate_multiplier(n: int) -> np.ndarray:
    mult = np.full(n // 2 + 1, -1j)
    mult[0] = 0
    mult[-1] = 0  # Nyquist
    return mult


def conjugate_spectral(f: GridFunction) -> GridFunction:
    """Multiply the DFT by ``-i sign(k)`` (mean and Nyquist mode dropped)."""
    coeffs = np.fft.rfft(f.values) * _conjugate_multiplier(f.n)
    return GridFunction(np.fft.irfft(coeffs, n=f.n))


def conjugation_row(n: int, shift: int = 0) -> np.ndarray:
    """Weights ``c`` with ``sum(c * f.values) == conjugate_spectral(f).values[shift]``."""
    impulse = np.zeros(n)
    impulse[0] = 1.0
    h = np.fft.irfft(np.fft.rfft(impulse) * _conjugate_multiplier(n), n=n)
    # the operator is circulant: row s, column j is h[(s - j) mod n]
    return h[(shift - np.arange(n)) % n]


def trig_interpolant(values: np.ndarray):
    """Vectorized trigonometric interpolant through equispaced samples.

    The Nyquist mode, if present, is split symmetrically so the interpolant
    is real and passes through every sample.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    c = np.fft.rfft(values) / n
    k = np.arange(c.size)
    amp = 2 * c
    amp[0] = c[0]
    if n % 2 == 0:
        amp[-1] = c[-1]

    def p(x):
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * np.multiply.outer(x, k))
        return np.real(phase @ amp)

    return p


def conjugate_pv(f: GridFunction, x: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Conjugate of the trigonometric interpolant of ``f`` at ``x``, through
    the principal-value cotangent integral."""
    r = integrate_pv_cotangent(trig_interpolant(f.values), x, rel_tol=rel_tol)
    return -r.value / math.pi


def norms(f: GridFunction) -> tuple[float, float, float]:
    """Grid approximations of the sup norm, the L1 norm over a period and the
    total variation over a period (with wraparound)."""
    v = f.values
    c_norm = float(np.max(np.abs(v)))
    l_norm = 2 * math.pi / f.n * math.fsum(np.abs(v))
    variation = math.fsum(np.abs(np.diff(np.append(v, v[0]))))
    return c_norm, l_norm, variation


def read_grid_function(path) -> GridFunction:
    lines = Path(path).read_text().split()
    return GridFunction(np.array([float(s) for s in lines]))


def write_grid_function(f: GridFunction, path=None) -> str:
    text = "".join(f"{v!r}\n" for v in f.values.tolist())
    if path is not None:
        Path(path).write_text(text)
    return text
