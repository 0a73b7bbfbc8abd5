"""Explicit positivity-preserving finite-volume integrator for the coupled system.

Each species evolves by a conservative update

    u_i <- u_i - (dt / vol_i) (A_{i+1/2} J_{i+1/2} - A_{i-1/2} J_{i-1/2})

with face flux J = -d((u+eps)^{m1})/dr + (upwind u) dv/dr, where v solves
-Delta v = w freshly every step (the elliptic equations are constraints, not
dynamics), and symmetrically for w driven by z with -Delta z = u. No-flux
boundaries at r=0 and r=R keep the discrete mass of each species constant to
round-off. eps > 0 switches on the regularized diffusion (u+eps)^{m}.

Blow-up is declared only on the conjunction of L-infinity growth past a
configured factor and collapse of the adaptive step below 10 dt_min; either
signal alone routinely confuses under-resolution with genuine concentration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .energy import DiagnosticsRecord, diagnostics, write_series_csv
from .errors import InvalidParameterError, NumericalFailureError, PositivityError
from .potential import interaction_from_values
from .radial import RadialField, RadialGrid, SystemState
from .regimes import ModelParams


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration knobs; defaults suit smooth desk-scale runs."""

    t_end: float
    epsilon: float = 0.0
    cfl: float = 0.4
    dt_min: float = 1e-12
    dt_max: float = 1.0
    linf_factor: float = 10.0
    norm_factor: float = 2.0
    record_every: int = 50

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise InvalidParameterError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.epsilon < 0.0:
            raise InvalidParameterError("epsilon must be nonnegative")
        if self.dt_min > self.dt_max or self.dt_min <= 0.0:
            raise InvalidParameterError("need 0 < dt_min <= dt_max")
        if self.t_end < 0.0:
            raise InvalidParameterError("t_end must be nonnegative")
        if self.linf_factor <= 1.0 or self.norm_factor <= 1.0:
            raise InvalidParameterError("blow-up trigger factors must exceed 1")
        if self.record_every < 1:
            raise InvalidParameterError("record_every must be >= 1")


class RunStatus(str, enum.Enum):
    REACHED_HORIZON = "ReachedHorizon"
    BLOW_UP_DETECTED = "BlowUpDetected"
    STEP_FLOOR_HIT = "StepFloorHit"


@dataclass(frozen=True)
class RunOutcome:
    """Machine-readable summary of one integration."""

    status: RunStatus
    t_final: float
    trigger: str
    simultaneous: bool

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "t_final": self.t_final,
            "trigger": self.trigger,
            "simultaneous": self.simultaneous,
        }


@dataclass
class DiagnosticsSeries:
    """Recorded diagnostics plus cheap per-step monitors kept by the run loop.

    `final_state` carries the last accepted state so callers can compare the
    terminal fields against references or serialize them.
    """

    records: list[DiagnosticsRecord] = field(default_factory=list)
    max_step_energy_increase: float = 0.0
    steps: int = 0
    final_state: SystemState | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, path) -> None:
        write_series_csv(self.records, path)


def _enclosed(values: np.ndarray, volumes: np.ndarray, out: np.ndarray) -> np.ndarray:
    out[0] = 0.0
    np.cumsum(values * volumes, out=out[1:])
    return out


def _drift_faces(m_faces: np.ndarray, grid: RadialGrid, out: np.ndarray) -> np.ndarray:
    """dv/dr at every edge for the potential of the enclosed source."""
    out[0] = 0.0
    np.divide(m_faces[1:], grid.face_areas[1:], out=out[1:])
    np.negative(out, out=out)
    return out


def _species_flux(values: np.ndarray, m: float, eps: float, drift: np.ndarray,
                  grid: RadialGrid) -> np.ndarray:
    """Face flux at interior edges: degenerate diffusion plus upwind drift."""
    power = (values + eps) ** m
    flux = -(power[1:] - power[:-1]) / grid.center_spacing
    vel = drift[1:-1]
    upwind = np.where(vel < 0.0, values[1:], values[:-1])
    return flux + vel * upwind


def _apply_flux(values: np.ndarray, flux: np.ndarray, dt: float, grid: RadialGrid) -> np.ndarray:
    full = np.zeros(grid.n_cells + 1)
    full[1:-1] = grid.face_areas[1:-1] * flux
    return values - dt * np.diff(full) / grid.volumes


_NEG_CLAMP = 1e-13  # relative rounding slack below zero that is clamped, not fatal


def _advance(u: np.ndarray, w: np.ndarray, params: ModelParams, eps: float,
             dt: float, grid: RadialGrid, dv: np.ndarray, dz: np.ndarray):
    """One explicit step from precomputed drift faces."""
    ju = _species_flux(u, params.m1, eps, dv, grid)
    jw = _species_flux(w, params.m2, eps, dz, grid)
    u_new = _apply_flux(u, ju, dt, grid)
    w_new = _apply_flux(w, jw, dt, grid)
    for arr, old in ((u_new, u), (w_new, w)):
        bad = arr < 0.0
        if np.any(bad):
            floor = -_NEG_CLAMP * max(float(old.max()), 1e-300)
            worst = int(np.argmin(arr))
            if arr[worst] < floor:
                raise PositivityError(worst, float(arr[worst]), dt)
            arr[bad] = 0.0
    return u_new, w_new


def step(state: SystemState, params: ModelParams, config: SolverConfig,
         dt: float) -> SystemState:
    """Advance the pair one explicit step of size dt with fresh potential solves."""
    if not (config.dt_min <= dt <= config.dt_max):
        raise InvalidParameterError(
            f"dt={dt} outside [{config.dt_min}, {config.dt_max}]"
        )
    grid = state.grid
    n = grid.n_cells
    mu, mw = np.empty(n + 1), np.empty(n + 1)
    dv, dz = np.empty(n + 1), np.empty(n + 1)
    _enclosed(state.u.values, grid.volumes, mu)
    _enclosed(state.w.values, grid.volumes, mw)
    _drift_faces(mw, grid, dv)  # u is advected by the potential of w
    _drift_faces(mu, grid, dz)
    u_new, w_new = _advance(state.u.values, state.w.values, params,
                            config.epsilon, dt, grid, dv, dz)
    return SystemState(RadialField(grid, u_new), RadialField(grid, w_new), state.t + dt)


def _cfl_dt(u: np.ndarray, w: np.ndarray, params: ModelParams, eps: float,
            grid: RadialGrid, dv: np.ndarray, dz: np.ndarray, cfl: float) -> float:
    """Unclamped CFL step from the diffusive and drift constraints."""
    spacing = grid.center_spacing
    u_face = np.maximum(u[1:], u[:-1]) + eps
    w_face = np.maximum(w[1:], w[:-1]) + eps
    diff = np.maximum(params.m1 * u_face ** (params.m1 - 1.0),
                      params.m2 * w_face ** (params.m2 - 1.0))
    dt = math.inf
    if float(diff.max(initial=0.0)) > 0.0:
        dt = float(np.min(spacing * spacing / (2.0 * np.maximum(diff, 1e-300))))
    vel = np.maximum(np.abs(dv[1:-1]), np.abs(dz[1:-1]))
    if float(vel.max(initial=0.0)) > 0.0:
        dt = min(dt, float(np.min(spacing / np.maximum(vel, 1e-300))))
    return cfl * dt


def adaptive_dt(state: SystemState, params: ModelParams, config: SolverConfig) -> float:
    """CFL-limited step clipped to [dt_min, dt_max]; dt_max when nothing constrains."""
    grid = state.grid
    n = grid.n_cells
    mu, mw = np.empty(n + 1), np.empty(n + 1)
    dv, dz = np.empty(n + 1), np.empty(n + 1)
    _enclosed(state.u.values, grid.volumes, mu)
    _enclosed(state.w.values, grid.volumes, mw)
    _drift_faces(mw, grid, dv)
    _drift_faces(mu, grid, dz)
    raw = _cfl_dt(state.u.values, state.w.values, params, config.epsilon,
                  grid, dv, dz, config.cfl)
    return float(min(max(raw, config.dt_min), config.dt_max))


def _fast_energy(u, w, params, grid, mu, mw) -> float:
    h = interaction_from_values(grid, u, w, mu, mw)
    eu = float((u ** params.m1) @ grid.volumes)
    ew = float((w ** params.m2) @ grid.volumes)
    return eu / (params.m1 - 1.0) + ew / (params.m2 - 1.0) - grid.kappa * h


def _record(u, w, t, params, grid) -> DiagnosticsRecord:
    state = SystemState(RadialField(grid, u.copy()), RadialField(grid, w.copy()), t)
    return diagnostics(state, params)


def run(init: SystemState, params: ModelParams,
        config: SolverConfig) -> tuple[RunOutcome, DiagnosticsSeries]:
    """Integrate until the horizon, a blow-up detection, or the step floor.

    Steps that would break positivity are rejected and retried with half the
    step; diagnostics are recorded every `record_every` accepted steps plus
    at both endpoints. BlowUpDetected requires L-infinity growth past
    linf_factor times its initial value together with the adaptive step
    contracting below 10 dt_min; `simultaneous` reports whether both species'
    critical norms exceeded norm_factor times their initial values at
    detection time.
    """
    grid = init.grid
    n = grid.n_cells
    u = init.u.values.copy()
    w = init.w.values.copy()
    t = float(init.t)
    series = DiagnosticsSeries()
    series.records.append(_record(u, w, t, params, grid))

    mu, mw = np.empty(n + 1), np.empty(n + 1)
    dv, dz = np.empty(n + 1), np.empty(n + 1)
    vols = grid.volumes

    linf_u0 = float(u.max(initial=0.0))
    linf_w0 = float(w.max(initial=0.0))
    norm_u0 = float((u ** params.m1) @ vols) ** (1.0 / params.m1)
    norm_w0 = float((w ** params.m2) @ vols) ** (1.0 / params.m2)

    _enclosed(u, vols, mu)
    _enclosed(w, vols, mw)
    f_prev = _fast_energy(u, w, params, grid, mu, mw)

    status, trigger, simultaneous = RunStatus.REACHED_HORIZON, "", False
    accepted_since_record = 0

    while t < config.t_end:
        # mu, mw are in sync with (u, w) here
        _drift_faces(mw, grid, dv)
        _drift_faces(mu, grid, dz)
        raw = _cfl_dt(u, w, params, config.epsilon, grid, dv, dz, config.cfl)

        linf_hit = (linf_u0 > 0.0 and float(u.max()) > config.linf_factor * linf_u0) or \
                   (linf_w0 > 0.0 and float(w.max()) > config.linf_factor * linf_w0)
        if linf_hit and raw < 10.0 * config.dt_min:
            status = RunStatus.BLOW_UP_DETECTED
            trigger = (f"L-infinity grew past {config.linf_factor} x initial and the "
                       f"adaptive step fell to {raw:.3e} < 10 dt_min")
            norm_u = float((u ** params.m1) @ vols) ** (1.0 / params.m1)
            norm_w = float((w ** params.m2) @ vols) ** (1.0 / params.m2)
            simultaneous = (norm_u > config.norm_factor * norm_u0
                            and norm_w > config.norm_factor * norm_w0)
            break
        if raw < config.dt_min:
            status = RunStatus.STEP_FLOOR_HIT
            trigger = f"adaptive step {raw:.3e} fell below dt_min={config.dt_min:.3e}"
            break

        dt_step = min(max(raw, config.dt_min), config.dt_max, config.t_end - t)
        rejected = False
        while True:
            try:
                u_new, w_new = _advance(u, w, params, config.epsilon, dt_step,
                                        grid, dv, dz)
                break
            except PositivityError:
                dt_step *= 0.5
                if dt_step < config.dt_min:
                    rejected = True
                    break
        if rejected:
            status = RunStatus.STEP_FLOOR_HIT
            trigger = ("positivity could not be preserved above the step floor "
                       f"dt_min={config.dt_min:.3e}")
            break
        u, w = u_new, w_new
        t += dt_step
        series.steps += 1
        accepted_since_record += 1

        total = float(u.sum()) + float(w.sum())
        if not math.isfinite(total):
            raise NumericalFailureError(t - dt_step)

        _enclosed(u, vols, mu)
        _enclosed(w, vols, mw)
        f_now = _fast_energy(u, w, params, grid, mu, mw)
        series.max_step_energy_increase = max(series.max_step_energy_increase,
                                              f_now - f_prev)
        f_prev = f_now

        if accepted_since_record >= config.record_every and t < config.t_end:
            series.records.append(_record(u, w, t, params, grid))
            accepted_since_record = 0

    if series.records[-1].t != t:
        series.records.append(_record(u, w, t, params, grid))
    series.final_state = SystemState(RadialField(grid, u), RadialField(grid, w), t)
    outcome = RunOutcome(status=status, t_final=t, trigger=trigger,
                         simultaneous=simultaneous)
    return outcome, series
