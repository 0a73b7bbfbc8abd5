"""Radial Poisson solves -Delta v = f via enclosed mass, and the interaction energy.

For a piecewise-constant radial source the enclosed mass m(s) is piecewise
alpha + beta s^d, so both the potential and the interaction energy have
closed-form per-cell integrals. The interaction energy is evaluated through

    H[f, g] = (1/kappa_d) [ int_0^R m_f(s) m_g(s) / (sigma s^{d-1}) ds
                            + M_f M_g / ((d-2) sigma R^{d-2}) ]

(integration by parts of int grad(phi_f) . grad(phi_g) with the monopole
exterior), which is symmetric and positive semidefinite by construction, so
the Cauchy-Schwarz bound holds at the discrete level exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, OutOfRangeError
from .radial import RadialField, RadialGrid, newtonian_constant


@dataclass(frozen=True)
class Normalization:
    """Kernel constants: kappa_d makes -Delta v = f exact for v = kappa_d |x|^{2-d} * f.

    `c_d` is the constant used when evaluating literal threshold formulas
    (blow-up numbers, critical masses). It defaults to kappa_d, the only
    choice under which the virial identity closes against the dynamics;
    it can be overridden for sensitivity checks.
    """

    d: int
    c_d: float | None = None

    @property
    def kappa_d(self) -> float:
        return newtonian_constant(self.d)

    @property
    def c_d_value(self) -> float:
        return self.kappa_d if self.c_d is None else self.c_d

    @property
    def convention(self) -> str:
        return "newtonian" if self.c_d is None else f"override({self.c_d!r})"


def enclosed_faces(f: RadialField) -> np.ndarray:
    """Enclosed mass at every cell edge; exact for cell averages."""
    out = np.empty(f.grid.n_cells + 1)
    out[0] = 0.0
    np.cumsum(f.values * f.grid.volumes, out=out[1:])
    return out


def _piecewise_coeffs(f_values: np.ndarray, grid: RadialGrid, m_faces: np.ndarray):
    """Per-cell (alpha, beta) with m(s) = alpha + beta s^d inside each cell."""
    beta = f_values * grid.sigma / grid.d
    alpha = m_faces[:-1] - beta * grid.edges[:-1] ** grid.d
    return alpha, beta


def enclosed_mass(f: RadialField, r: float) -> float:
    """Mass inside radius r, with partial-cell quadrature; nondecreasing in r."""
    g = f.grid
    if not (0.0 <= r <= g.r_max):
        raise OutOfRangeError(f"radius {r} outside [0, {g.r_max}]")
    m_faces = enclosed_faces(f)
    if r == g.r_max:
        return float(m_faces[-1])
    i = int(np.searchsorted(g.edges, r, side="right")) - 1
    i = min(max(i, 0), g.n_cells - 1)
    partial = f.values[i] * g.sigma * (r ** g.d - g.edges[i] ** g.d) / g.d
    return float(m_faces[i] + partial)


class PotentialField:
    """Solution of -Delta v = f on the radial grid with monopole exterior.

    `v` holds exact cell averages, `dv` the radial derivative at every edge
    (dv <= 0 for nonnegative sources, dv[0] = 0 at the origin); `value_at`
    evaluates the potential pointwise from the closed-form pieces.
    """

    def __init__(self, grid: RadialGrid, source_values: np.ndarray):
        d, sigma = grid.d, grid.sigma
        edges = grid.edges
        m_faces = np.empty(grid.n_cells + 1)
        m_faces[0] = 0.0
        np.cumsum(source_values * grid.volumes, out=m_faces[1:])
        self.grid = grid
        self.total_mass = float(m_faces[-1])
        self.tail = self.total_mass / ((d - 2) * sigma * grid.r_max ** (d - 2))
        self.m_faces = m_faces
        self.dv = np.zeros(grid.n_cells + 1)
        # face 0 sits at r=0 where the area vanishes and the flux is zero
        self.dv[1:] = -m_faces[1:] / grid.face_areas[1:]
        alpha, beta = _piecewise_coeffs(source_values, grid, m_faces)
        self._alpha, self._beta = alpha, beta
        # antiderivative of m(s)/(sigma s^{d-1}) per cell, split in the two monomials
        rl, rr = edges[:-1], edges[1:]
        seg = (beta / sigma) * (rr**2 - rl**2) / 2.0
        seg[1:] += (alpha[1:] / sigma) * (rr[1:] ** (2 - d) - rl[1:] ** (2 - d)) / (2 - d)
        # cumulative potential drop from each edge out to R
        drops = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
        self._drops = drops
        self.v_faces = self.tail + drops
        # exact cell average: tail + drop(outer edge) + mean of the in-cell drop
        dpow = rr**d - rl**d
        local = (beta / (2.0 * sigma)) * (
            rr**2 - d * (rr ** (d + 2) - rl ** (d + 2)) / ((d + 2) * dpow)
        )
        # the alpha part integrates s^{2-d} s^{d-1} = s, regular in every cell,
        # and alpha is exactly zero in the origin cell
        local += (alpha / (sigma * (2 - d))) * (
            rr ** (2 - d) - d * (rr**2 - rl**2) / (2.0 * dpow)
        )
        self.v = self.v_faces[1:] + local

    def value_at(self, r: float) -> float:
        """Pointwise potential value; exact for the piecewise-constant source."""
        g = self.grid
        if not (0.0 <= r <= g.r_max):
            raise OutOfRangeError(f"radius {r} outside [0, {g.r_max}]")
        if r == g.r_max:
            return float(self.tail)
        i = int(np.searchsorted(g.edges, r, side="right")) - 1
        i = min(max(i, 0), g.n_cells - 1)
        d, sigma = g.d, g.sigma
        rr = g.edges[i + 1]
        seg = (self._beta[i] / sigma) * (rr**2 - r**2) / 2.0
        if i > 0 or r > 0.0:
            r_eff = r if r > 0.0 else rr  # alpha vanishes in the origin cell
            if self._alpha[i] != 0.0:
                seg += (self._alpha[i] / sigma) * (rr ** (2 - d) - r_eff ** (2 - d)) / (2 - d)
        return float(self.tail + self._drops[i + 1] + seg)


def solve_potential(f: RadialField) -> PotentialField:
    """Solve -Delta v = f with no interior flux at r=0 and monopole closure at R."""
    return PotentialField(f.grid, f.values)


def interaction_energy(f: RadialField, g: RadialField) -> float:
    """The bare-kernel energy H[f,g] = double integral of f(x) g(y) / |x-y|^{d-2}."""
    if f.grid != g.grid:
        raise GridMismatchError("interaction energy requires a shared grid")
    return interaction_from_values(f.grid, f.values, g.values)


def interaction_from_values(grid: RadialGrid, fv: np.ndarray, gv: np.ndarray,
                            mf: np.ndarray | None = None,
                            mg: np.ndarray | None = None) -> float:
    """H[f,g] from raw value arrays; enclosed-mass arrays may be supplied to save work."""
    d, sigma = grid.d, grid.sigma
    edges = grid.edges
    if mf is None:
        mf = np.empty(grid.n_cells + 1)
        mf[0] = 0.0
        np.cumsum(fv * grid.volumes, out=mf[1:])
    if mg is None:
        mg = np.empty(grid.n_cells + 1)
        mg[0] = 0.0
        np.cumsum(gv * grid.volumes, out=mg[1:])
    af, bf = _piecewise_coeffs(fv, grid, mf)
    ag, bg = _piecewise_coeffs(gv, grid, mg)
    rl, rr = edges[:-1], edges[1:]
    total = np.sum((af * bg + ag * bf) * (rr**2 - rl**2)) / 2.0
    total += np.sum(bf * bg * (rr ** (d + 2) - rl ** (d + 2))) / (d + 2)
    # origin cell has alpha = 0 exactly, so the singular monomial never appears
    total += np.sum(
        af[1:] * ag[1:] * (rr[1:] ** (2 - d) - rl[1:] ** (2 - d))
    ) / (2 - d)
    tail = mf[-1] * mg[-1] / ((d - 2) * grid.r_max ** (d - 2))
    return float((total / sigma + tail / sigma) / grid.kappa)
