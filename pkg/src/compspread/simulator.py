"""Time stepping for the full two-species system and its cooperative
transform.

One step is first-order operator splitting: a dispersal substep
(Crank-Nicolson tridiagonal solve for random dispersal, explicit for
nonlocal) followed by an exact pointwise logistic reaction substep with
the competitor frozen.  Both substeps preserve nonnegativity and the
competitive order, so the discrete dynamics obey the same comparison
principles as the continuous system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _accel
from .coefficients import CoefficientSet
from .dispersal import Grid, Kernel, boundary_margin
from .errors import ConfigError, NumericalGuardError, PreconditionError
from .periodic_orbits import PeriodicOrbit


@dataclass(frozen=True)
class SystemState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "SystemState":
        return SystemState(self.t, self.u.copy(), self.v.copy())


@dataclass(frozen=True)
class Problem:
    """Coefficient set bound to a grid (and kernel, for nonlocal runs)."""

    coefficients: CoefficientSet
    grid: Grid
    kernel: Optional[Kernel] = None

    @property
    def kind(self) -> str:
        return "nonlocal" if self.kernel is not None else "random"

    def bump_arrays(self) -> dict[str, np.ndarray | float]:
        x = self.grid.x
        return {name: (fld.bump(x) if fld.bump is not None else 0.0)
                for name, fld in self.coefficients.fields().items()}

    def box_bounds(self) -> tuple[float, float]:
        """Invariant box [0, u_max] x [0, v_max] preserved by the discrete
        dynamics."""
        cs = self.coefficients
        return (_field_sup(cs.a1) / _field_inf(cs.b1),
                _field_sup(cs.a2) / _field_inf(cs.c2))


def _field_sup(fld) -> float:
    rng = fld.baseline.range_exact() or fld.baseline.sampled_range(1024)
    hi = rng[1]
    if fld.bump is not None:
        hi += max(0.0, fld.bump.amplitude)
    return hi


def _field_inf(fld) -> float:
    return fld.min_value()


@dataclass(frozen=True)
class SchemeConfig:
    """Step size and stepping mode; dt must divide the period exactly so
    period maps are well defined."""

    dt: float
    kind: str
    mode: str = "diffusion-implicit"
    cadence: Optional[int] = None

    def steps_per_period(self, period: float) -> int:
        spp = period / self.dt
        if abs(spp - round(spp)) > 1e-9 * max(spp, 1.0):
            raise ConfigError(f"dt={self.dt} does not divide the period {period}")
        return int(round(spp))

    def validate(self, problem: Problem) -> None:
        if self.kind not in ("random", "nonlocal"):
            raise ConfigError(f"unknown dispersal kind {self.kind!r}")
        if self.mode not in ("explicit", "diffusion-implicit"):
            raise ConfigError(f"unknown stepping mode {self.mode!r}")
        self.steps_per_period(problem.coefficients.period)
        if self.kind == "random":
            h2 = problem.grid.h ** 2
            bound = 0.5 * h2 if self.mode == "explicit" else h2
            if self.dt > bound * (1.0 + 1e-12):
                raise NumericalGuardError(
                    f"dt={self.dt:.4g} exceeds the monotone bound "
                    f"{bound:.4g} for {self.mode} random dispersal")
        else:
            if self.mode != "explicit":
                raise ConfigError("nonlocal dispersal uses the explicit mode")
            if problem.kernel is None:
                raise ConfigError("nonlocal scheme requires a kernel")
            if self.dt > 0.5 + 1e-12:
                raise NumericalGuardError(
                    f"dt={self.dt:.4g} exceeds the nonlocal bound 0.5")


def make_scheme(problem: Problem, steps_per_period: Optional[int] = None,
                mode: Optional[str] = None,
                cadence: Optional[int] = None) -> SchemeConfig:
    """Choose a period-dividing dt within the stability bounds."""
    period = problem.coefficients.period
    kind = problem.kind
    if mode is None:
        mode = "diffusion-implicit" if kind == "random" else "explicit"
    if steps_per_period is None:
        if kind == "random":
            bound = problem.grid.h ** 2 * (0.5 if mode == "explicit" else 1.0)
        else:
            bound = 0.5
        steps_per_period = max(8, int(np.ceil(period / bound)))
    scheme = SchemeConfig(period / steps_per_period, kind, mode, cadence)
    scheme.validate(problem)
    return scheme


def _as_field(value, n: int) -> np.ndarray:
    if np.ndim(value) == 0:
        return np.full(n, float(value))
    return np.ascontiguousarray(value, dtype=float)


class Stepper:
    """Bound problem + scheme; advances raw (u, v) arrays one step."""

    def __init__(self, problem: Problem, scheme: SchemeConfig):
        scheme.validate(problem)
        self.problem = problem
        self.scheme = scheme
        self.dt = scheme.dt
        self.spp = scheme.steps_per_period(problem.coefficients.period)
        self.grid = problem.grid
        self._bumps = problem.bump_arrays()
        self._base = {name: fld.baseline
                      for name, fld in problem.coefficients.fields().items()}
        if scheme.kind == "random":
            self._inv_h2 = 1.0 / self.grid.h ** 2
            if scheme.mode == "diffusion-implicit":
                self._r = 0.5 * self.dt * self._inv_h2
                self._cn = _accel.TridiagFactor(self.grid.n, self._r)
            else:
                self._cn = None
        else:
            self._weights = problem.kernel.weights * problem.kernel.h

    def _disperse(self, w: np.ndarray) -> np.ndarray:
        if self.scheme.kind == "random":
            if self._cn is not None:
                return self._cn.solve(_accel.cn_explicit_half(w, self._r))
            return w + self.dt * _accel.second_diff(w, self._inv_h2)
        return w + self.dt * (_accel.correlate_ext(w, self._weights) - w)

    def step_arrays(self, u: np.ndarray, v: np.ndarray,
                    t: float) -> tuple[np.ndarray, np.ndarray]:
        n = self.grid.n
        u = self._disperse(u)
        v = self._disperse(v)
        t_mid = t + 0.5 * self.dt
        b, base = self._bumps, self._base
        a1 = base["a1"](t_mid) + b["a1"]
        b1 = base["b1"](t_mid) + b["b1"]
        c1 = base["c1"](t_mid) + b["c1"]
        a2 = base["a2"](t_mid) + b["a2"]
        b2 = base["b2"](t_mid) + b["b2"]
        c2 = base["c2"](t_mid) + b["c2"]
        # Frozen-competitor rates use the post-dispersal fields of both
        # species, keeping the update symmetric and order-preserving.
        rate_u = _as_field(a1 - c1 * v, n)
        rate_v = _as_field(a2 - b2 * u, n)
        u_new = _accel.logistic_step(u, rate_u, _as_field(b1, n), self.dt)
        v_new = _accel.logistic_step(v, rate_v, _as_field(c2, n), self.dt)
        return u_new, v_new


def _guard_finite(u: np.ndarray, v: np.ndarray, t: float, grid: Grid) -> None:
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        bad_u = np.flatnonzero(~np.isfinite(u))
        bad_v = np.flatnonzero(~np.isfinite(v))
        j = int(bad_u[0]) if bad_u.size else int(bad_v[0])
        raise NumericalGuardError(
            f"nonfinite value at t={t:.6g}, x={grid.x[j]:.6g} (index {j})")


def _advance(state: SystemState, stepper: Stepper) -> SystemState:
    u, v = stepper.step_arrays(state.u, state.v, state.t)
    t = state.t + stepper.dt
    _guard_finite(u, v, t, stepper.grid)
    return SystemState(t, u, v)


def step(state: SystemState, problem: Problem,
         scheme: SchemeConfig) -> SystemState:
    """One split step; guards against nonfinite values."""
    return _advance(state, Stepper(problem, scheme))


# ---------------------------------------------------------------------------
# observers
# ---------------------------------------------------------------------------

class Observer:
    """Samples one scalar from the state at the recording cadence."""

    name = "observer"

    def sample(self, state: SystemState) -> float:  # pragma: no cover
        raise NotImplementedError


class SupObserver(Observer):
    def __init__(self, component: str = "u"):
        self.component = component
        self.name = f"sup_{component}"

    def sample(self, state: SystemState) -> float:
        return float(np.max(getattr(state, self.component)))


class InfObserver(Observer):
    def __init__(self, component: str = "u"):
        self.component = component
        self.name = f"inf_{component}"

    def sample(self, state: SystemState) -> float:
        return float(np.min(getattr(state, self.component)))


def front_position(values: np.ndarray, grid: Grid, level: float) -> float:
    """Rightmost crossing of the level, linearly interpolated between the
    bracketing grid points; nan when the field never reaches the level."""
    above = values >= level
    if not above.any():
        return np.nan
    j = int(np.max(np.flatnonzero(above)))
    if j == grid.n - 1:
        return grid.x_max
    x = grid.x
    frac = (values[j] - level) / (values[j] - values[j + 1])
    return float(x[j] + frac * (x[j + 1] - x[j]))


class FrontObserver(Observer):
    """Front position of one component, with a boundary-contact guard."""

    def __init__(self, grid: Grid, level: float, component: str = "u",
                 kernel: Optional[Kernel] = None, guard: bool = True,
                 name: Optional[str] = None):
        self.grid = grid
        self.level = level
        self.component = component
        self.margin = boundary_margin(grid, kernel)
        self.guard = guard
        self.name = name or f"front_{component}"

    def sample(self, state: SystemState) -> float:
        pos = front_position(getattr(state, self.component), self.grid,
                             self.level)
        if self.guard and np.isfinite(pos) and pos > self.grid.x_max - self.margin:
            raise NumericalGuardError(
                f"front reached the boundary margin at t={state.t:.6g}")
        return pos


class PairFrontObserver(Observer):
    """Rightmost point where both components exceed their levels (the
    trailing persistence front)."""

    name = "front_pair"

    def __init__(self, grid: Grid, level_u: float, level_v: float):
        self.grid = grid
        self.level_u = level_u
        self.level_v = level_v

    def sample(self, state: SystemState) -> float:
        scaled = np.minimum(state.u / self.level_u, state.v / self.level_v)
        return front_position(scaled, self.grid, 1.0)


class MagnitudeFrontObserver(Observer):
    """Leading edge: rightmost point where u^2 + v^2 still reaches
    level^2."""

    name = "front_edge"

    def __init__(self, grid: Grid, level: float,
                 kernel: Optional[Kernel] = None, guard: bool = True):
        self.grid = grid
        self.level = level
        self.margin = boundary_margin(grid, kernel)
        self.guard = guard

    def sample(self, state: SystemState) -> float:
        pos = front_position(state.u ** 2 + state.v ** 2, self.grid,
                             self.level ** 2)
        if self.guard and np.isfinite(pos) and pos > self.grid.x_max - self.margin:
            raise NumericalGuardError(
                f"leading edge reached the boundary margin at t={state.t:.6g}")
        return pos


@dataclass
class RunRecords:
    times: np.ndarray
    series: dict[str, np.ndarray]
    period_marks: np.ndarray
    period_delta: np.ndarray

    def to_csv(self, path) -> None:
        names = sorted(self.series)
        rows = np.column_stack([self.times] + [self.series[k] for k in names])
        np.savetxt(path, rows, delimiter=",",
                   header=",".join(["t"] + names), comments="", fmt="%.12g")


def run_periods(state: SystemState, problem: Problem, scheme: SchemeConfig,
                n_periods: int, observers: Sequence[Observer] = ()
                ) -> tuple[SystemState, RunRecords]:
    """Advance n whole periods, sampling observers at the cadence (default
    once per period) and recording period-to-period sup deltas."""
    stepper = Stepper(problem, scheme)
    cadence = scheme.cadence or stepper.spp
    times: list[float] = []
    series: dict[str, list[float]] = {obs.name: [] for obs in observers}
    marks: list[float] = []
    deltas: list[float] = []
    prev_mark: Optional[SystemState] = None
    for k in range(n_periods * stepper.spp):
        state = _advance(state, stepper)
        if (k + 1) % cadence == 0:
            times.append(state.t)
            for obs in observers:
                series[obs.name].append(obs.sample(state))
        if (k + 1) % stepper.spp == 0:
            marks.append(state.t)
            if prev_mark is not None:
                deltas.append(max(float(np.max(np.abs(state.u - prev_mark.u))),
                                  float(np.max(np.abs(state.v - prev_mark.v)))))
            prev_mark = state
    records = RunRecords(np.asarray(times),
                         {k: np.asarray(v) for k, v in series.items()},
                         np.asarray(marks), np.asarray(deltas))
    return state, records


# ---------------------------------------------------------------------------
# transformed (cooperative) runs
# ---------------------------------------------------------------------------

def ramp_profile(x: np.ndarray, x0: float, width: float) -> np.ndarray:
    """1 left of x0, linear ramp to 0 at x0 + width, 0 beyond (step function
    when width = 0)."""
    if width == 0.0:
        return (x <= x0).astype(float)
    return np.clip((x0 + width - x) / width, 0.0, 1.0)


def make_front_data(grid: Grid, u_level: float, v_orbit: PeriodicOrbit,
                    x0: float, ramp: float,
                    v_level: Optional[float] = None,
                    kernel: Optional[Kernel] = None
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Front-like initial data in transformed variables: both components sit
    at a positive plateau left of x0 and vanish identically right of
    x0 + ramp.  The second-component level defaults to half the resident
    orbit, strictly below it as the front class requires."""
    margin = boundary_margin(grid, kernel)
    if not (grid.x_min + margin <= x0 and x0 + ramp <= grid.x_max - margin):
        raise PreconditionError("front interface violates the domain margins")
    prof = ramp_profile(grid.x, x0, ramp)
    if v_level is None:
        v_level = 0.5 * float(v_orbit.value(0.0))
    return u_level * prof, v_level * prof


def run_transformed(state: SystemState, problem: Problem, scheme: SchemeConfig,
                    vstar_frames: np.ndarray, n_periods: int,
                    observers: Sequence[Observer] = ()
                    ) -> tuple[SystemState, RunRecords]:
    """Evolve the cooperative transform: the state carries (u, vt) with
    vt = vstar - v.  Internally the original system is stepped; the resident
    periodic solution enters through its per-step frames over one period
    (shape (spp, n) or (spp + 1, n)).  Componentwise ordering of transformed
    trajectories and the box 0 <= vt <= vstar are preserved."""
    stepper = Stepper(problem, scheme)
    spp = stepper.spp
    if vstar_frames.ndim != 2 or vstar_frames.shape[0] not in (spp, spp + 1) \
            or vstar_frames.shape[1] != problem.grid.n:
        raise PreconditionError(
            "resident frames must have shape (steps_per_period[+1], n)")
    frames = vstar_frames[:spp]
    u, vt = state.u.copy(), state.v.copy()
    k0 = int(round(state.t / stepper.dt))
    if abs(k0 * stepper.dt - state.t) > 1e-9:
        raise PreconditionError("state time must lie on the step lattice")
    if np.any(vt < -1e-12) or np.any(vt > frames[k0 % spp] + 1e-9):
        raise PreconditionError("transformed component must satisfy 0 <= vt <= vstar")
    cadence = scheme.cadence or spp
    times: list[float] = []
    series: dict[str, list[float]] = {obs.name: [] for obs in observers}
    marks: list[float] = []
    deltas: list[float] = []
    prev_mark: Optional[tuple[np.ndarray, np.ndarray]] = None
    t = state.t
    for k in range(n_periods * spp):
        phase = (k0 + k) % spp
        v = frames[phase] - vt
        u, v = stepper.step_arrays(u, v, t)
        t += stepper.dt
        _guard_finite(u, v, t, problem.grid)
        vt = frames[(k0 + k + 1) % spp] - v
        if (k + 1) % cadence == 0:
            tstate = SystemState(t, u, vt)
            times.append(t)
            for obs in observers:
                series[obs.name].append(obs.sample(tstate))
        if (k + 1) % spp == 0:
            marks.append(t)
            if prev_mark is not None:
                deltas.append(max(float(np.max(np.abs(u - prev_mark[0]))),
                                  float(np.max(np.abs(vt - prev_mark[1])))))
            prev_mark = (u.copy(), vt.copy())
    records = RunRecords(np.asarray(times),
                         {k: np.asarray(v) for k, v in series.items()},
                         np.asarray(marks), np.asarray(deltas))
    return SystemState(t, u, vt), records


def snapshot_to_csv(path, grid: Grid, state: SystemState) -> None:
    rows = np.column_stack((grid.x, state.u, state.v))
    np.savetxt(path, rows, delimiter=",", header="x,u,v", comments="",
               fmt="%.12g")
