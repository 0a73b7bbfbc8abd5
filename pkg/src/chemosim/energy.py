"""Free energy, dissipation, second moment and virial rate diagnostics.

The free energy is

    F[u, w] = 1/(m1-1) int u^{m1} + 1/(m2-1) int w^{m2} - c_d H[u, w]

and the virial rate of the combined second moment I = int |x|^2 (u + w) is

    G = 2d int u^{m1} + 2d int w^{m2} - 2 c_d (d-2) H[u, w].

Both use the Newtonian constant c_d = kappa_d by default; that is the only
normalization under which dI/dt = G and dF/dt = -D close against the
dynamics, and overriding it is meant for sensitivity checks only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial import SystemState, lp_norm, mass, second_moment
from .regimes import ModelParams
from . import potential


@dataclass(frozen=True)
class DiagnosticsRecord:
    """All scalar diagnostics of one state; serializes as one CSV row."""

    t: float
    mass_u: float
    mass_w: float
    norm_u_m1: float
    norm_w_m2: float
    linf_u: float
    linf_w: float
    F: float
    I: float
    G: float
    D: float

    COLUMNS = ("t", "mass_u", "mass_w", "norm_u_m1", "norm_w_m2",
               "linf_u", "linf_w", "F", "I", "G", "D")

    def as_row(self) -> str:
        return ",".join(repr(float(getattr(self, c))) for c in self.COLUMNS)


def internal_energies(state: SystemState, params: ModelParams) -> tuple[float, float]:
    """(int u^{m1}, int w^{m2}) for the current state."""
    vols = state.grid.volumes
    return (
        float((state.u.values ** params.m1) @ vols),
        float((state.w.values ** params.m2) @ vols),
    )


def free_energy(state: SystemState, params: ModelParams, c_d: float | None = None) -> float:
    """F[u, w]; non-increasing along solutions of the system."""
    eu, ew = internal_energies(state, params)
    c = state.grid.kappa if c_d is None else c_d
    h = potential.interaction_energy(state.u, state.w)
    return eu / (params.m1 - 1.0) + ew / (params.m2 - 1.0) - c * h


def virial_rate(state: SystemState, params: ModelParams, c_d: float | None = None) -> float:
    """G[u, w], the exact rate of change of the combined second moment."""
    d = state.grid.d
    eu, ew = internal_energies(state, params)
    c = state.grid.kappa if c_d is None else c_d
    h = potential.interaction_energy(state.u, state.w)
    return 2.0 * d * (eu + ew) - 2.0 * c * (d - 2) * h


def combined_second_moment(state: SystemState) -> float:
    """I = int |x|^2 (u + w)."""
    return second_moment(state.u) + second_moment(state.w)


def _pressure(values: np.ndarray, m: float) -> np.ndarray:
    return (m / (m - 1.0)) * values ** (m - 1.0)


def _face_mobility(values: np.ndarray, m: float) -> np.ndarray:
    """Entropy mean (u^m jump over pressure jump) at interior faces.

    Consistent with u grad p = grad u^m; falls back to the arithmetic mean
    where the pressure jump vanishes and is zero across empty cells, so the
    degenerate support boundary contributes nothing spurious.
    """
    p = _pressure(values, m)
    um = values ** m
    dp = p[1:] - p[:-1]
    dum = um[1:] - um[:-1]
    mob = 0.5 * (values[1:] + values[:-1])
    ok = np.abs(dp) > 1e-300
    mob[ok] = dum[ok] / dp[ok]
    mob[(values[1:] == 0.0) & (values[:-1] == 0.0)] = 0.0
    return mob


def _species_dissipation(values: np.ndarray, m: float, dv: np.ndarray, grid) -> float:
    p = _pressure(values, m)
    grad_p = (p[1:] - p[:-1]) / grid.center_spacing
    mob = _face_mobility(values, m)
    drive = grad_p - dv[1:-1]
    face_vol = grid.face_areas[1:-1] * grid.center_spacing
    return float(np.sum(mob * drive * drive * face_vol))


def dissipation(state: SystemState, params: ModelParams) -> float:
    """D = int u |grad((m1/(m1-1)) u^{m1-1}) - grad v|^2 + (same for w, z), D >= 0."""
    vpot = potential.solve_potential(state.w)
    zpot = potential.solve_potential(state.u)
    du = _species_dissipation(state.u.values, params.m1, vpot.dv, state.grid)
    dw = _species_dissipation(state.w.values, params.m2, zpot.dv, state.grid)
    return du + dw


def diagnostics(state: SystemState, params: ModelParams,
                c_d: float | None = None) -> DiagnosticsRecord:
    """Assemble the full diagnostics record for one state."""
    eu, ew = internal_energies(state, params)
    c = state.grid.kappa if c_d is None else c_d
    h = potential.interaction_energy(state.u, state.w)
    d = state.grid.d
    return DiagnosticsRecord(
        t=state.t,
        mass_u=mass(state.u),
        mass_w=mass(state.w),
        norm_u_m1=eu ** (1.0 / params.m1),
        norm_w_m2=ew ** (1.0 / params.m2),
        linf_u=lp_norm(state.u, math.inf),
        linf_w=lp_norm(state.w, math.inf),
        F=eu / (params.m1 - 1.0) + ew / (params.m2 - 1.0) - c * h,
        I=combined_second_moment(state),
        G=2.0 * d * (eu + ew) - 2.0 * c * (d - 2) * h,
        D=dissipation(state, params),
    )


def write_series_csv(records, path) -> None:
    """Write diagnostics records in the fixed column order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DiagnosticsRecord.COLUMNS) + "\n")
        for rec in records:
            fh.write(rec.as_row() + "\n")


def read_series_csv(path) -> list[DiagnosticsRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != DiagnosticsRecord.COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        out = []
        for line in fh:
            if line.strip():
                vals = [float(x) for x in line.strip().split(",")]
                out.append(DiagnosticsRecord(*vals))
    return out
