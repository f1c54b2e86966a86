"""Spatially varying single-resident periodic states and their linear
stability.

The resident state of each species is the globally attracting periodic
solution of its scalar equation with the competitor absent; far from the
localized coefficient variation it relaxes to the homogeneous periodic
orbit.  Stability verdicts use the decoupled scalar growth exponent of the
invading species, which bounds the full linearization radius from below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coefficients import CoefficientSet, SpatialBump
from .dispersal import Grid, Kernel
from .errors import ConvergenceError, NumericalGuardError, PreconditionError
from .periodic_orbits import PeriodicOrbit, logistic_orbit
from .simulator import Problem, SchemeConfig, Stepper, make_scheme
from .spectrum import (LinearProblem, SpectrumResult, principal_spectrum_point,
                       principal_spectrum_point_widened, radius_threshold_test)

_SPECIES_COEFFS = {"u": ("a1", "b1"), "v": ("a2", "c2")}


@dataclass
class PeriodicField:
    """One period of a spatial field sampled at every scheme step
    (frames[k] is the field at phase k*dt; frames[spp] closes the period
    within ``residual``)."""

    period: float
    dt: float
    grid: Grid
    frames: np.ndarray
    residual: float
    homogeneous_orbit: Optional[PeriodicOrbit] = None

    @property
    def steps_per_period(self) -> int:
        return self.frames.shape[0] - 1

    def frame(self, k: int) -> np.ndarray:
        return self.frames[k % self.steps_per_period]

    def sup(self) -> float:
        return float(np.max(self.frames))

    def inf(self) -> float:
        return float(np.min(self.frames))

    def save_npz(self, path) -> None:
        np.savez_compressed(path, period=self.period, dt=self.dt,
                            x_min=self.grid.x_min, x_max=self.grid.x_max,
                            n=self.grid.n, frames=self.frames,
                            residual=self.residual)

    @staticmethod
    def load_npz(path) -> "PeriodicField":
        data = np.load(path)
        grid = Grid(float(data["x_min"]), float(data["x_max"]), int(data["n"]))
        return PeriodicField(float(data["period"]), float(data["dt"]), grid,
                             data["frames"], float(data["residual"]))

    def to_csv(self, path, every_steps: int = 1, every_points: int = 1) -> None:
        spp = self.steps_per_period
        with open(path, "w") as fh:
            fh.write("t,x,value\n")
            x = self.grid.x
            for k in range(0, spp + 1, every_steps):
                t = k * self.dt
                for j in range(0, self.grid.n, every_points):
                    fh.write(f"{t:.12g},{x[j]:.12g},{self.frames[k, j]:.12g}\n")


def _species_problem(problem: Problem, species: str) -> tuple:
    a_name, b_name = _SPECIES_COEFFS[species]
    cs = problem.coefficients
    return getattr(cs, a_name), getattr(cs, b_name)


def compute_semitrivial(species: str, problem: Problem,
                        scheme: Optional[SchemeConfig] = None,
                        tol: float = 1e-8, max_periods: int = 5000,
                        tail_tol: float = 1e-4,
                        tail_margin: float = 10.0,
                        seed_scale: float = 1.0) -> PeriodicField:
    """Attracting periodic state of one species alone, found by long-run
    integration from the homogeneous orbit level until the period map is
    stationary.  Spatially homogeneous coefficients take a scalar fast
    path; the stored frames always use the scheme's step lattice."""
    if species not in _SPECIES_COEFFS:
        raise PreconditionError("species must be 'u' or 'v'")
    if scheme is None:
        scheme = make_scheme(problem)
    a_field, b_field = _species_problem(problem, species)
    orbit = logistic_orbit(a_field.baseline, b_field.baseline)
    n = problem.grid.n
    homogeneous = a_field.bump is None and b_field.bump is None
    if homogeneous:
        # Both dispersal operators act as the identity on constants, so the
        # whole computation collapses to a scalar recursion on a tiny grid.
        work = Problem(problem.coefficients,
                       Grid(0.0, 2.0 * problem.grid.h, 3), problem.kernel)
    else:
        work = problem
    stepper = Stepper(work, scheme)
    spp = stepper.spp

    def step_species(w: np.ndarray, t: float) -> np.ndarray:
        if species == "u":
            w2, _ = stepper.step_arrays(w, np.zeros_like(w), t)
        else:
            _, w2 = stepper.step_arrays(np.zeros_like(w), w, t)
        return w2

    w = np.full(work.grid.n, seed_scale * orbit.values[0])
    delta = np.inf
    converged = False
    for _ in range(max_periods):
        w_prev = w
        t = 0.0
        for k in range(spp):
            w = step_species(w, t)
            t += stepper.dt
        if not np.isfinite(w).all():
            raise NumericalGuardError("resident state blew up")
        delta = float(np.max(np.abs(w - w_prev)))
        if delta < tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"resident state not periodic after {max_periods} periods",
            diagnostics={"last_delta": delta})

    work_frames = np.empty((spp + 1, work.grid.n))
    work_frames[0] = w
    t = 0.0
    for k in range(spp):
        w = step_species(w, t)
        t += stepper.dt
        work_frames[k + 1] = w
    if homogeneous:
        frames = np.repeat(work_frames[:, :1], n, axis=1)
    else:
        frames = work_frames
    residual = float(np.max(np.abs(frames[-1] - frames[0])))

    support = max(a_field.support_radius, b_field.support_radius)
    x = problem.grid.x
    tail = np.abs(x) >= support + tail_margin
    if not tail.any():
        raise NumericalGuardError("domain too small for the tail check")
    t_frames = np.arange(spp + 1) * stepper.dt
    tail_err = float(np.max(np.abs(frames[:, tail] - orbit.value(t_frames)[:, None])))
    if tail_err > tail_tol:
        raise NumericalGuardError(
            f"resident tail misses the homogeneous orbit by {tail_err:.2e} "
            "(domain too small)")
    return PeriodicField(problem.coefficients.period, stepper.dt,
                         problem.grid, frames, residual, orbit)


@dataclass(frozen=True)
class StabilityVerdict:
    """Scalar invasion exponent at a resident state."""

    lam: float
    radius: float
    unstable: bool
    inconclusive: bool
    spectrum: SpectrumResult


def _invasion_coefficient(problem: Problem, target: str):
    """Reaction coefficient pieces of the decoupled invading species:
    growth minus suppression by the resident."""
    cs = problem.coefficients
    if target == "u":
        growth, suppress = cs.a2, cs.b2
    else:
        growth, suppress = cs.a1, cs.c1
    return growth, suppress


def linearized_radius(target: str, problem: Problem,
                      resident: PeriodicField,
                      scheme: Optional[SchemeConfig] = None,
                      tol: float = 1e-6,
                      max_periods: int = 2000) -> StabilityVerdict:
    """Growth exponent of the invader linearized at the resident state
    (target 'u' = state with only species u present), computed by power
    iteration on the scalar period map.  The resident state enters the
    coefficient pointwise; separable cases reduce to baseline-plus-bump
    problems."""
    if target not in ("u", "v"):
        raise PreconditionError("target must be 'u' or 'v'")
    growth, suppress = _invasion_coefficient(problem, target)
    period = problem.coefficients.period
    orbit = resident.homogeneous_orbit
    resident_homog = orbit is not None and float(
        np.max(np.abs(resident.frames - resident.frames[:, :1]))) < 1e-9

    if resident_homog and suppress.bump is None:
        base = _CompositeBaseline(growth.baseline, suppress.baseline, orbit)
        p = LinearProblem(0.0, problem.kind, problem.grid, period,
                          baseline=base, bump=growth.bump,
                          kernel=problem.kernel)
        if growth.bump is not None:
            res, _ = principal_spectrum_point_widened(p, tol, max_periods)
        else:
            res = principal_spectrum_point(p, tol, max_periods)
    else:
        if scheme is None:
            scheme = make_scheme(problem)
        spp = resident.steps_per_period
        dt = resident.dt
        x = problem.grid.x
        table = np.empty((spp, problem.grid.n))
        for k in range(spp):
            t_mid = (k + 0.5) * dt
            w_mid = 0.5 * (resident.frames[k] + resident.frames[k + 1])
            table[k] = growth.value(t_mid, x) - suppress.value(t_mid, x) * w_mid
        p = LinearProblem(0.0, problem.kind, problem.grid, period,
                          coef_table=table, kernel=problem.kernel,
                          steps_per_period=spp)
        res = principal_spectrum_point(p, tol, max_periods)

    radius = float(np.exp(res.lam * period))
    return StabilityVerdict(res.lam, radius, radius > 1.0,
                            abs(radius - 1.0) < 1e-3, res)


class _CompositeBaseline:
    """growth(t) - suppress(t) * orbit(t), callable on scalars and arrays."""

    def __init__(self, growth, suppress, orbit: PeriodicOrbit):
        self.growth = growth
        self.suppress = suppress
        self.orbit = orbit

    def __call__(self, t):
        return self.growth(t) - self.suppress(t) * self.orbit.value(t)


@dataclass
class DestabilizationResult:
    bump: SpatialBump
    lam_bump: float
    lam_total: float
    threshold: float
    scanned: list


def destabilizing_bump(cs: CoefficientSet, kind: str = "random",
                       kernel_spec: Optional[tuple[str, float]] = None,
                       amplitudes: Optional[np.ndarray] = None,
                       widths: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0),
                       h: float = 0.1, pad: float = 25.0,
                       tol: float = 1e-6,
                       max_periods: int = 2000) -> DestabilizationResult:
    """Find the smallest-amplitude compact growth bump on the v-species that
    flips the stable homogeneous resident (u alone) to linearly unstable.

    Requires the homogeneous invasion exponent mean(a2 - b2*u_orbit) to be
    negative; the bump must contribute a growth exponent exceeding its
    magnitude.  Candidates are screened with the positive-operator ratio
    sandwich before full power-iteration confirmation.
    """
    if cs.max_support_radius() > 0.0:
        raise PreconditionError(
            "the base coefficient set must be spatially homogeneous")
    if amplitudes is None:
        amplitudes = np.round(np.arange(0.05, 1.0001, 0.05), 10)
    u_orbit = logistic_orbit(cs.a1.baseline, cs.b1.baseline)
    base = _CompositeBaseline(cs.a2.baseline, cs.b2.baseline, u_orbit)
    t = np.linspace(0.0, cs.period, 4096, endpoint=False)
    mean_resid = float(np.mean(base(t)))
    if mean_resid >= 0.0:
        raise PreconditionError(
            "homogeneous resident is already unstable "
            f"(mean invasion exponent {mean_resid:.3e} >= 0)")
    threshold = -mean_resid

    scanned = []
    for amp in amplitudes:
        for width in widths:
            bump = SpatialBump.square(float(amp), float(width))
            span = width / 2.0 + pad
            m = int(np.ceil(span / h))
            grid = Grid(-m * h, m * h, 2 * m + 1)
            kernel = (Kernel.build(kernel_spec[0], kernel_spec[1], grid.h)
                      if kind == "nonlocal" else None)
            p = LinearProblem(0.0, kind, grid, cs.period, baseline=0.0,
                              bump=bump, kernel=kernel)
            verdict = radius_threshold_test(p, threshold, max_periods=200)
            scanned.append((float(amp), float(width), verdict))
            if verdict == "below":
                continue
            res, _ = principal_spectrum_point_widened(p, tol, max_periods)
            if res.lam <= threshold:
                scanned[-1] = (float(amp), float(width), "confirmed-below")
                continue
            total_p = LinearProblem(0.0, kind, grid, cs.period, baseline=base,
                                    bump=bump, kernel=kernel)
            total, _ = principal_spectrum_point_widened(total_p, tol,
                                                        max_periods)
            if total.lam <= 0.0:
                scanned[-1] = (float(amp), float(width), "total-below")
                continue
            return DestabilizationResult(bump, res.lam, total.lam, threshold,
                                         scanned)
    raise ConvergenceError("no bump in the family destabilizes the resident",
                           diagnostics={"scanned": scanned})
