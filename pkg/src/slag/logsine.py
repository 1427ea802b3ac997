"""Log-sine integral: the antiderivative of log(sin t) on [0, pi].

``log_sin_integral`` evaluates F(x) = int_0^x log(sin t) dt.  The integrand
has logarithmic singularities at both endpoints, which defeats naive
quadrature, so the evaluation is split:

* x <= pi/2: closed form x*log(x) - x plus the termwise-integrated Taylor
  series of log(sin t / t), whose coefficients involve zeta(2j);
* pi/2 < x <= 9pi/10: series value at pi/2 plus fixed-order Gauss-Legendre
  quadrature of log(sin t) over [pi/2, x] (integrand analytic there);
* x > 9pi/10: the stretch past 9pi/10 is folded through sin(pi - t) = sin(t)
  back to small arguments and evaluated with the series.

Absolute error stays below ~1e-13 across [0, pi].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

PI = np.pi

_SERIES_CUT = 0.5 * PI
_TAIL_CUT = 0.9 * PI
_DOMAIN_FUZZ = 1e-12

_J = np.arange(1, 49)
_COEF = zeta(2 * _J) / (_J * (2 * _J + 1) * PI ** (2.0 * _J))

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _series(x: np.ndarray) -> np.ndarray:
    # valid for 0 <= x <= pi/2; exact 0 at x = 0
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0.0, x, 1.0)
    xlogx = np.where(x > 0.0, x * np.log(safe), 0.0)
    powers = x[..., None] ** (2 * _J + 1)
    return xlogx - x - powers @ _COEF


def _gauss(a: float, b: np.ndarray) -> np.ndarray:
    # integral of log(sin t) over [a, b]; integrand must be analytic there
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    t = mid[..., None] + half[..., None] * _GL_NODES
    return half * (np.log(np.sin(t)) @ _GL_WEIGHTS)


_F_HALF = float(_series(np.asarray(_SERIES_CUT)))
_F_TAILCUT = _F_HALF + float(_gauss(_SERIES_CUT, np.asarray(_TAIL_CUT)))
_S_TAILARG = float(_series(np.asarray(PI - _TAIL_CUT)))


def log_sin_integral(x):
    """Integral of log(sin t) from 0 to x, elementwise, for x in [0, pi].

    Nonpositive and decreasing on [0, pi/2]; exactly 0 at x = 0.  Raises
    ValueError outside [0, pi] (violations up to 1e-12 are clamped).
    """
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).astype(float)
    if np.any(~np.isfinite(flat)):
        raise ValueError("log_sin_integral: non-finite argument")
    if np.any(flat < -_DOMAIN_FUZZ) or np.any(flat > PI + _DOMAIN_FUZZ):
        bad = flat[(flat < -_DOMAIN_FUZZ) | (flat > PI + _DOMAIN_FUZZ)][0]
        raise ValueError(f"log_sin_integral: argument {bad!r} outside [0, pi]")
    v = np.clip(flat, 0.0, PI)
    out = np.empty_like(v)
    lo = v <= _SERIES_CUT
    mid = (v > _SERIES_CUT) & (v <= _TAIL_CUT)
    hi = v > _TAIL_CUT
    if np.any(lo):
        out[lo] = _series(v[lo])
    if np.any(mid):
        out[mid] = _F_HALF + _gauss(_SERIES_CUT, v[mid])
    if np.any(hi):
        out[hi] = _F_TAILCUT + _S_TAILARG - _series(PI - v[hi])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def _check_open_interval(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= PI):
        raise ValueError(f"{name}: argument must lie strictly inside (0, pi)")
    return arr


def log_sin(x):
    """First derivative of the log-sine integral: log(sin x), x in (0, pi)."""
    arr = _check_open_interval(x, "log_sin")
    out = np.log(np.sin(arr))
    return float(out) if np.ndim(x) == 0 else out


def cot(x):
    """Second derivative of the log-sine integral: cot x, x in (0, pi)."""
    arr = _check_open_interval(x, "cot")
    out = np.cos(arr) / np.sin(arr)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class LogSinEval:
    """Value of the log-sine integral with derivatives where defined."""

    x: float
    value: float
    d1: float | None
    d2: float | None


def evaluate(x: float) -> LogSinEval:
    value = log_sin_integral(x)
    if 0.0 < x < PI:
        return LogSinEval(x, value, log_sin(x), cot(x))
    return LogSinEval(x, value, None, None)


def pair_term(a, b):
    """F(a) + F(b) - F(a+b): the two-variable building block of barriers.

    Requires a, b >= 0 and a + b <= pi.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return log_sin_integral(a) + log_sin_integral(b) - log_sin_integral(a + b)
