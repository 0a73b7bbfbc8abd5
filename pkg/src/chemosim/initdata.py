"""Initial data families and the sufficient blow-up conditions on them.

The compactly supported pair

    u0 = A (1 - (r/a)^d)_+^{iota1},   w0 = B (1 - (r/a)^d)_+^{iota2}

with iota1 = 2 m2 / ((m1+m2-m1 m2) d) and iota2 the mirror image admits
closed-form integrals of u0^{1/iota1} and w0^{1/iota2} (the integrands are
polynomial), which is what the blow-up threshold is phrased in. Cell
averages use 5-point Gauss quadrature per cell, split at the support edge,
so those polynomial identities hold to round-off on the grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .energy import virial_rate
from .errors import InvalidParameterError, MissingConstantError, TruncationError
from .radial import RadialField, RadialGrid, SystemState, sphere_surface_area
from .regimes import ModelParams, Regime, RegimeTag, classify

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class CompactPolynomial:
    """A (1 - (r/a)^d)_+^iota with amplitude A, support radius a, exponent iota."""

    amplitude: float
    radius: float
    exponent: float

    def __post_init__(self):
        if self.amplitude <= 0 or self.radius <= 0 or self.exponent <= 0:
            raise InvalidParameterError("amplitude, radius and exponent must be positive")


@dataclass(frozen=True)
class Gaussian:
    """Heat kernel with total mass M and spread parameter t (variance 2t per axis)."""

    mass: float
    spread: float

    def __post_init__(self):
        if self.mass <= 0 or self.spread <= 0:
            raise InvalidParameterError("mass and spread must be positive")


@dataclass(frozen=True)
class LaneEmdenMinimizer:
    """Free-energy minimizer profile at the crossing point, support [0, R0].

    mass=None keeps the natural amplitude, under which the profile is an
    exact steady state of the dynamics.
    """

    mass: float | None
    radius: float

    def __post_init__(self):
        if self.radius <= 0 or (self.mass is not None and self.mass <= 0):
            raise InvalidParameterError("radius (and mass, if given) must be positive")


@dataclass(frozen=True)
class TableData:
    """Field read back from the two-column CSV serialization."""

    path: str


InitialDataSpec = CompactPolynomial | Gaussian | LaneEmdenMinimizer | TableData


def cell_average_profile(fun, grid: RadialGrid, support: float | None = None) -> np.ndarray:
    """Exact-volume cell averages of a radial profile by 5-point Gauss per cell.

    Cells straddling `support` are split there, so profiles polynomial in r
    below the support edge integrate exactly.
    """
    d, sigma = grid.d, grid.sigma
    lo = grid.edges[:-1].copy()
    hi = grid.edges[1:].copy()
    if support is not None:
        hi = np.minimum(hi, support)
        keep = lo < hi
        lo, hi = lo[keep], hi[keep]
    else:
        keep = np.ones(grid.n_cells, dtype=bool)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    weights = half[:, None] * _GAUSS_W[None, :]
    integrals = np.sum(weights * fun(nodes) * sigma * nodes ** (d - 1), axis=1)
    values = np.zeros(grid.n_cells)
    values[keep] = integrals / grid.volumes[keep]
    return np.maximum(values, 0.0)


def iota_exponents(params: ModelParams) -> tuple[float, float]:
    """(iota1, iota2) of the compact construction; defined only for m1+m2 > m1 m2."""
    gap = params.m1 + params.m2 - params.m1 * params.m2
    if gap <= 0.0:
        raise InvalidParameterError(
            f"construction undefined: m1+m2-m1*m2 = {gap:.6g} must be positive"
        )
    return (
        2.0 * params.m2 / (gap * params.d),
        2.0 * params.m1 / (gap * params.d),
    )


def compact_poly_mass(amplitude: float, radius: float, iota: float, d: int) -> float:
    """Closed-form mass A sigma a^d / (d (1+iota))."""
    return amplitude * sphere_surface_area(d) * radius**d / (d * (1.0 + iota))


def compact_poly_amplitude_for_mass(mass: float, radius: float, iota: float, d: int) -> float:
    return mass * d * (1.0 + iota) / (sphere_surface_area(d) * radius**d)


def compact_poly_power_integral(amplitude: float, radius: float, iota: float, d: int) -> float:
    """Closed form of int u0^{1/iota} dx = sigma a^d A^{1/iota} / (2d)."""
    return sphere_surface_area(d) * radius**d * amplitude ** (1.0 / iota) / (2.0 * d)


def build_field(spec: InitialDataSpec, grid: RadialGrid) -> RadialField:
    """Realize an initial data spec as cell averages on the grid."""
    if isinstance(spec, CompactPolynomial):
        if spec.radius > grid.r_max:
            raise TruncationError(
                f"support radius {spec.radius} exceeds the domain R={grid.r_max}"
            )
        a, d, iota = spec.radius, grid.d, spec.exponent
        prof = lambda r: spec.amplitude * np.maximum(1.0 - (r / a) ** d, 0.0) ** iota
        return RadialField(grid, cell_average_profile(prof, grid, support=a))
    if isinstance(spec, Gaussian):
        if grid.r_max < 10.0 * math.sqrt(spec.spread):
            raise TruncationError(
                f"Gaussian with spread {spec.spread} needs R >= {10 * math.sqrt(spec.spread):.3g}"
            )
        d, t = grid.d, spec.spread
        outside = float(special.gammaincc(d / 2.0, grid.r_max**2 / (4.0 * t)))
        if outside > 1e-10:
            warnings.warn(
                f"analytic mass outside R={grid.r_max} is {outside:.2e} of the total",
                stacklevel=2,
            )
        amp = spec.mass / (4.0 * math.pi * t) ** (d / 2.0)
        prof = lambda r: amp * np.exp(-(r**2) / (4.0 * t))
        return RadialField(grid, cell_average_profile(prof, grid))
    if isinstance(spec, LaneEmdenMinimizer):
        from .variational import minimizer_profile
        return minimizer_profile(grid, spec.mass, spec.radius)
    if isinstance(spec, TableData):
        from .radial import read_field_csv
        return read_field_csv(spec.path, grid)
    raise InvalidParameterError(f"unknown initial data spec {spec!r}")


def blowup_number(params: ModelParams, c_d: float | None = None) -> float:
    """The threshold number N0 of the compact-data blow-up condition.

    Evaluates (d/c_d)^{2-2/d} / (2^{1+2/d} (d-2)) * (1+iota1)(1+iota2) with
    the configured kernel constant (Newtonian by default).
    """
    i1, i2 = iota_exponents(params)
    d = params.d
    c = 1.0 / ((d - 2) * sphere_surface_area(d)) if c_d is None else c_d
    return (
        (d / c) ** (2.0 - 2.0 / d)
        / (2.0 ** (1.0 + 2.0 / d) * (d - 2))
        * (1.0 + i1)
        * (1.0 + i2)
    )


@dataclass(frozen=True)
class ConditionReport:
    """Evaluation of the sufficient blow-up condition on a data pair."""

    regime: Regime
    case: str
    lhs: float
    rhs: float
    margin: float
    satisfied: bool
    G0: float
    c_d_convention: str


def _condition_case(params: ModelParams, tol: float = 1e-12) -> str:
    """Which threshold applies: 'N0', '2N0', or 'inapplicable' (subcritical side)."""
    m1, m2, d = params.m1, params.m2, params.d
    s = m1 + m2
    if s < m1 * m2 + 2.0 * max(m1, m2) / d - tol:
        return "inapplicable"
    if s < m1 * m2 + 2.0 * m1 * m2 / d:
        return "N0"
    return "2N0"


def check_blowup_condition(u0: RadialField, w0: RadialField, params: ModelParams,
                           mc: float | None = None,
                           c_d: float | None = None) -> ConditionReport:
    """Evaluate the applicable blow-up condition and the initial virial rate.

    At the crossing point the sharp mass form M1 M2/(M1^{mc}+M2^{mc}) >
    Mc^{2/d}/2 is used and requires the critical mass `mc`; elsewhere the
    compact-data integral condition against N0 (or 2N0) applies.
    """
    regime = classify(params)
    grid = u0.grid
    vols = grid.volumes
    state = SystemState(u0, w0, 0.0)
    g0 = virial_rate(state, params, c_d=c_d)
    convention = "newtonian" if c_d is None else f"override({c_d!r})"

    if regime.tag is RegimeTag.CRITICAL_I:
        if mc is None:
            raise MissingConstantError(
                "the crossing-point condition needs the critical mass (estimate it first)"
            )
        m1 = float(u0.values @ vols)
        m2 = float(w0.values @ vols)
        mcexp = params.m_c
        denom = m1**mcexp + m2**mcexp
        lhs = m1 * m2 / denom if denom > 0 else 0.0
        rhs = mc ** (2.0 / params.d) / 2.0
        case = "crossing"
    else:
        case = _condition_case(params)
        i1, i2 = iota_exponents(params)
        x = float((u0.values ** (1.0 / i1)) @ vols)
        y = float((w0.values ** (1.0 / i2)) @ vols)
        denom = x ** (i1 * params.m1) + y ** (i2 * params.m2)
        lhs = x**i1 * y**i2 / denom if denom > 0 else 0.0
        n0 = blowup_number(params, c_d=c_d)
        if case == "N0":
            rhs = n0
        elif case == "2N0":
            rhs = 2.0 * n0
        else:
            rhs = math.inf
    margin = lhs / rhs if rhs not in (0.0, math.inf) else 0.0
    return ConditionReport(
        regime=regime,
        case=case,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        satisfied=lhs > rhs,
        G0=g0,
        c_d_convention=convention,
    )


def build_blowup_pair(params: ModelParams, grid: RadialGrid, margin: float,
                      support: float, mc: float | None = None,
                      c_d: float | None = None) -> tuple[RadialField, RadialField]:
    """Compact pair whose blow-up condition holds with the requested margin.

    Amplitudes are balanced so both terms of the condition's denominator
    match; at the crossing point the masses are set from the sharp mass
    threshold instead.
    """
    if margin <= 0:
        raise InvalidParameterError("margin must be positive")
    i1, i2 = iota_exponents(params)
    regime = classify(params)
    d = params.d
    if regime.tag is RegimeTag.CRITICAL_I:
        if mc is None:
            raise MissingConstantError("crossing-point data needs the critical mass")
        target_mass = mc * margin ** (d / 2.0)
        amp_u = compact_poly_amplitude_for_mass(target_mass, support, i1, d)
        amp_w = compact_poly_amplitude_for_mass(target_mass, support, i2, d)
    else:
        case = _condition_case(params)
        if case == "inapplicable":
            raise InvalidParameterError(
                "compact blow-up data is undefined on the subcritical side"
            )
        n0 = blowup_number(params, c_d=c_d)
        target = margin * (n0 if case == "N0" else 2.0 * n0)
        # balanced split: X^{iota1 m1} = Y^{iota2 m2} = E
        expo = 1.0 / params.m1 + 1.0 / params.m2 - 1.0
        big_e = (2.0 * target) ** (1.0 / expo)
        x = big_e ** (1.0 / (params.m1 * i1))
        y = big_e ** (1.0 / (params.m2 * i2))
        sigma = sphere_surface_area(d)
        amp_u = (2.0 * d * x / (sigma * support**d)) ** i1
        amp_w = (2.0 * d * y / (sigma * support**d)) ** i2
    u0 = build_field(CompactPolynomial(amp_u, support, i1), grid)
    w0 = build_field(CompactPolynomial(amp_w, support, i2), grid)
    return u0, w0
