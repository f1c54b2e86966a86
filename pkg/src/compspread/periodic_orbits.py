"""Spatially homogeneous periodic problems: the logistic periodic orbit,
the forced linear periodic solution, and the homogeneous coexistence orbit.

Orbits are found as fixed points of the one-period time map (damped,
derivative-free iteration) and sampled on a uniform time grid fine enough
that downstream spectral and quadrature uses see them as exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .coefficients import CoefficientSet, PeriodicScalar, check_h0, compute_envelopes
from .errors import ConvergenceError, PreconditionError

N_TIME_DEFAULT = 4096
IVP_RTOL = 1e-10
IVP_ATOL = 1e-12
DAMPING = 0.5
MAX_PERIOD_ITERS = 10_000


@dataclass(frozen=True)
class PeriodicOrbit:
    """One period of a scalar periodic trajectory on a uniform time grid
    (endpoint included; values[0] and values[-1] agree to ``tol``)."""

    period: float
    times: np.ndarray
    values: np.ndarray
    tol: float

    def value(self, t):
        tau = np.mod(t, self.period)
        return np.interp(tau, self.times, self.values)

    def mean(self) -> float:
        return float(np.mean(self.values[:-1]))

    def sup(self) -> float:
        return float(np.max(self.values))

    def inf(self) -> float:
        return float(np.min(self.values))

    def to_csv(self, path, every: int = 1) -> None:
        rows = np.column_stack((self.times[::every], self.values[::every]))
        np.savetxt(path, rows, delimiter=",", header="t,value", comments="",
                   fmt="%.12g")


def _time_grid(period: float, n_samples: int) -> np.ndarray:
    return np.linspace(0.0, period, n_samples + 1)


def periodic_mean(fn, period: float, n_samples: int = N_TIME_DEFAULT) -> float:
    """Full-period trapezoid mean (spectrally accurate for smooth
    periodic integrands)."""
    t = np.linspace(0.0, period, n_samples, endpoint=False)
    return float(np.mean(fn(t)))


def _as_callable(coeff):
    if isinstance(coeff, PeriodicScalar):
        return coeff
    if callable(coeff):
        return coeff
    value = float(coeff)
    return lambda t: value + 0.0 * np.asarray(t, dtype=float)


def logistic_periodic(a0, b0, period: float | None = None,
                      n_samples: int = N_TIME_DEFAULT,
                      seed: float | None = None) -> PeriodicOrbit:
    """Unique positive periodic solution of w' = w*(a0(t) - b0(t)*w).

    Requires positive mean growth; the orbit is globally attracting, so a
    damped period-map iteration from any positive seed converges.
    """
    if period is None:
        if not isinstance(a0, PeriodicScalar):
            raise ValueError("period required when a0 is not a descriptor")
        period = a0.period
    fa, fb = _as_callable(a0), _as_callable(b0)
    mean_a = periodic_mean(fa, period, n_samples)
    if mean_a <= 0.0:
        raise PreconditionError(
            f"mean growth {mean_a:.3e} is not positive; no positive orbit")

    def rhs(t, w):
        return w * (fa(t) - fb(t) * w)

    def period_map(w0: float) -> float:
        sol = solve_ivp(rhs, (0.0, period), [w0], method="RK45",
                        rtol=IVP_RTOL, atol=IVP_ATOL)
        if not sol.success:
            raise ConvergenceError("period-map integration failed")
        return float(sol.y[0, -1])

    w = seed if seed is not None else max(mean_a / max(periodic_mean(fb, period, n_samples), 1e-12), 1e-6)
    for _ in range(MAX_PERIOD_ITERS):
        pw = period_map(w)
        if abs(pw - w) <= 1e-11 * max(abs(w), 1.0):
            break
        w = DAMPING * w + (1.0 - DAMPING) * pw
        if w <= 0.0:
            raise ConvergenceError("iterate left the positive cone")
    else:
        raise ConvergenceError("period map did not converge",
                               diagnostics={"last": w})

    times = _time_grid(period, n_samples)
    sol = solve_ivp(rhs, (0.0, period), [w], method="RK45",
                    rtol=IVP_RTOL, atol=IVP_ATOL, t_eval=times)
    values = sol.y[0]
    resid = abs(values[-1] - values[0]) / max(abs(values[0]), 1e-30)
    return PeriodicOrbit(period, times, values, resid)


@lru_cache(maxsize=128)
def _logistic_cached(a0: PeriodicScalar, b0: PeriodicScalar,
                     n_samples: int) -> PeriodicOrbit:
    return logistic_periodic(a0, b0, n_samples=n_samples)


def logistic_orbit(a0: PeriodicScalar, b0: PeriodicScalar,
                   n_samples: int = N_TIME_DEFAULT) -> PeriodicOrbit:
    """Cached wrapper for descriptor coefficients (orbits recur constantly
    downstream)."""
    return _logistic_cached(a0, b0, n_samples)


def logistic_closed_form(a0, b0, period: float,
                         n_samples: int = N_TIME_DEFAULT) -> PeriodicOrbit:
    """Quadrature evaluation of the integrating-factor representation
    w(t) = e^{A(t)} w0 / (1 + w0 * int_0^t b0 e^{A}), with w0 pinned by
    periodicity.  Independent of the time-map route; used as an oracle."""
    fa, fb = _as_callable(a0), _as_callable(b0)
    t = _time_grid(period, n_samples)
    A = cumulative_simpson(fa(t), x=t, initial=0.0)
    if A[-1] <= 0.0:
        raise PreconditionError("nonpositive mean growth")
    I = cumulative_simpson(fb(t) * np.exp(A), x=t, initial=0.0)
    w0 = np.expm1(A[-1]) / I[-1]
    values = np.exp(A) * w0 / (1.0 + w0 * I)
    resid = abs(values[-1] - values[0]) / max(abs(values[0]), 1e-30)
    return PeriodicOrbit(period, t, values, resid)


def nonhomogeneous_periodic(alpha, h, period: float | None = None,
                            n_samples: int = N_TIME_DEFAULT) -> PeriodicOrbit:
    """Unique periodic solution of u' = alpha(t) u + h(t) for negative mean
    alpha, by the integrating-factor closed form."""
    if period is None:
        if not isinstance(alpha, PeriodicScalar):
            raise ValueError("period required when alpha is not a descriptor")
        period = alpha.period
    falpha, fh = _as_callable(alpha), _as_callable(h)
    t = _time_grid(period, n_samples)
    B = cumulative_simpson(falpha(t), x=t, initial=0.0)
    if B[-1] >= 0.0:
        raise PreconditionError(
            f"mean of the decay coefficient is {B[-1] / period:.3e} >= 0")
    J = cumulative_simpson(fh(t) * np.exp(-B), x=t, initial=0.0)
    eBT = np.exp(B[-1])
    u0 = eBT * J[-1] / (1.0 - eBT)
    values = np.exp(B) * (u0 + J)
    resid = abs(values[-1] - values[0]) / max(abs(values[0]), 1e-30)
    return PeriodicOrbit(period, t, values, resid)


def coexistence_homogeneous(cs: CoefficientSet,
                            n_samples: int = N_TIME_DEFAULT
                            ) -> tuple[PeriodicOrbit, PeriodicOrbit]:
    """Interior periodic orbit of the homogeneous two-species system, found
    by damped fixed-point iteration of the one-period map from half the
    single-species orbit levels."""
    env = compute_envelopes(cs)
    if not check_h0(env).holds:
        raise PreconditionError("coefficient envelopes must be positive")
    cond1 = env.a1L - env.c1M * env.a2M / env.c2L
    cond2 = env.a2L - env.b2M * env.a1M / env.b1L
    if cond1 <= 0.0 or cond2 <= 0.0:
        raise PreconditionError(
            "coexistence condition fails "
            f"(margins {cond1:.3e}, {cond2:.3e} must both be positive)")

    a1, b1, c1 = cs.a1.baseline, cs.b1.baseline, cs.c1.baseline
    a2, b2, c2 = cs.a2.baseline, cs.b2.baseline, cs.c2.baseline
    period = cs.period

    def rhs(t, y):
        u, v = y
        return [u * (a1(t) - b1(t) * u - c1(t) * v),
                v * (a2(t) - b2(t) * u - c2(t) * v)]

    def period_map(y0):
        sol = solve_ivp(rhs, (0.0, period), y0, method="RK45",
                        rtol=IVP_RTOL, atol=IVP_ATOL)
        if not sol.success:
            raise ConvergenceError("period-map integration failed")
        return sol.y[:, -1]

    ustar = logistic_orbit(a1, b1, n_samples)
    vstar = logistic_orbit(a2, c2, n_samples)
    y = np.array([ustar.values[0] / 2.0, vstar.values[0] / 2.0])
    for _ in range(MAX_PERIOD_ITERS):
        py = period_map(y)
        if np.max(np.abs(py - y)) <= 1e-11 * max(float(np.max(np.abs(y))), 1.0):
            break
        y = DAMPING * y + (1.0 - DAMPING) * py
        if np.any(y <= 0.0):
            raise ConvergenceError("iterate left the positive cone")
    else:
        raise ConvergenceError("coexistence period map did not converge",
                               diagnostics={"last": y.tolist()})

    times = _time_grid(period, n_samples)
    sol = solve_ivp(rhs, (0.0, period), y, method="RK45",
                    rtol=IVP_RTOL, atol=IVP_ATOL, t_eval=times)
    resid_u = abs(sol.y[0, -1] - sol.y[0, 0]) / max(abs(sol.y[0, 0]), 1e-30)
    resid_v = abs(sol.y[1, -1] - sol.y[1, 0]) / max(abs(sol.y[1, 0]), 1e-30)
    return (PeriodicOrbit(period, times, sol.y[0], resid_u),
            PeriodicOrbit(period, times, sol.y[1], resid_v))
