"""Lane-Emden profiles, sharp-constant estimation and functional-inequality probes.

The interaction ratio at the crossing point,

    R[f] = H[f, f] / (||f||_1^{2/d} ||f||_{mc}^{mc}),

is invariant under both dilation and amplitude scaling, and its maximizer is
the compactly supported Lane-Emden power profile. Estimated sup-constants
are reported as lower bounds obtained from a seeded stochastic search plus a
local polish; we never claim sharpness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (InvalidParameterError, MissingConstantError,
                     NoZeroCrossingError, TruncationError)
from .potential import interaction_energy, interaction_from_values
from .radial import (RadialField, RadialGrid, lp_norm, mass, newtonian_constant,
                     sphere_surface_area)
from .regimes import ModelParams, critical_exponent
from .initdata import cell_average_profile


@dataclass(frozen=True)
class LaneEmdenProfile:
    """Radial solution of zeta'' + ((d-1)/r) zeta' + coeff zeta^power = 0.

    Decreasing from `zeta0` at the origin to zero at `first_zero`; `table`
    holds (r, zeta) samples and `interpolant` the dense ODE solution.
    """

    d: int
    power: float
    coefficient: float
    zeta0: float
    first_zero: float
    boundary_residual: float
    table: np.ndarray
    interpolant: object

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = np.clip(r, 1e-12 * self.first_zero, self.first_zero)
        vals = self.interpolant(inside.ravel())[0].reshape(r.shape)
        return np.where(r < self.first_zero, np.maximum(vals, 0.0), 0.0)


def _shoot(d: int, power: float, coeff: float, zeta0: float, r_limit: float):
    """Integrate outward from a series start until the profile crosses zero."""

    def rhs(r, y):
        z, dz = y
        zp = max(z, 0.0) ** power
        return (dz, -coeff * zp - (d - 1) / r * dz)

    def crossing(r, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1.0

    r0 = 1e-8 * max(1.0, 1.0 / math.sqrt(coeff * zeta0 ** (power - 1.0)))
    y0 = (
        zeta0 - coeff * zeta0**power * r0**2 / (2.0 * d),
        -coeff * zeta0**power * r0 / d,
    )
    sol = solve_ivp(rhs, (r0, r_limit), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14 * zeta0, events=crossing,
                    dense_output=True)
    return sol


def lane_emden_solve(d: int, power: float, coeff: float,
                     zeta0: float | None = None,
                     first_zero: float | None = None,
                     n_table: int = 512) -> LaneEmdenProfile:
    """Shooting solver in two modes.

    Given `zeta0`, integrates outward and returns the first zero. Given a
    target `first_zero` instead (boundary-value mode), bisects on the
    central value until the profile vanishes there; the two are related by
    the exact scaling zeta -> alpha zeta(gamma r).
    """
    if d < 3 or power <= 1.0 or coeff <= 0.0:
        raise InvalidParameterError("need d >= 3, power > 1, coeff > 0")
    if (zeta0 is None) == (first_zero is None):
        raise InvalidParameterError("give exactly one of zeta0 or first_zero")

    if zeta0 is not None:
        # natural length scale of the ODE sets the search window
        scale = 1.0 / math.sqrt(coeff * zeta0 ** (power - 1.0))
        sol = _shoot(d, power, coeff, zeta0, 200.0 * scale)
        if sol.t_events[0].size == 0:
            raise NoZeroCrossingError(
                f"no zero crossing up to r={200.0 * scale:.3g} "
                f"(power={power}, coeff={coeff})"
            )
        zero = float(sol.t_events[0][0])
        rs = np.linspace(sol.t[0], zero, n_table)
        table = np.column_stack((rs, np.maximum(sol.sol(rs)[0], 0.0)))
        return LaneEmdenProfile(d, power, coeff, zeta0, zero,
                                abs(float(sol.sol(zero)[0])), table, sol.sol)

    # boundary-value mode: the unit solution gives the exact starting point,
    # bisection then only absorbs round-off
    ref = lane_emden_solve(d, power, 1.0, zeta0=1.0, n_table=8)
    target = float(first_zero)
    guess = ref.first_zero / (target * math.sqrt(coeff))
    z_guess = guess ** (2.0 / (power - 1.0))

    def zero_of(z0: float) -> float:
        return lane_emden_solve(d, power, coeff, zeta0=z0, n_table=8).first_zero

    lo, hi = 0.99 * z_guess, 1.01 * z_guess
    flo, fhi = zero_of(lo) - target, zero_of(hi) - target
    # first zero decreases as the central value grows (steeper profile)
    for _ in range(80):
        if flo < 0.0:
            lo *= 0.5
            flo = zero_of(lo) - target
        elif fhi > 0.0:
            hi *= 2.0
            fhi = zero_of(hi) - target
        else:
            break
    if flo < 0.0 or fhi > 0.0:
        raise NoZeroCrossingError("could not bracket the boundary-value central value")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = zero_of(mid) - target
        if fm > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * mid:
            break
    z0 = 0.5 * (lo + hi)
    prof = lane_emden_solve(d, power, coeff, zeta0=z0, n_table=n_table)
    residual = abs(float(prof.interpolant(min(target, prof.first_zero))[0]))
    return replace(prof, boundary_residual=residual)


_MINIMIZER_CACHE: dict[int, LaneEmdenProfile] = {}


def _minimizer_lane_emden(d: int) -> LaneEmdenProfile:
    """Unit-ball Lane-Emden profile behind the crossing-point minimizer."""
    if d not in _MINIMIZER_CACHE:
        m_c = critical_exponent(d)
        _MINIMIZER_CACHE[d] = lane_emden_solve(
            d, power=1.0 / (m_c - 1.0), coeff=(m_c - 1.0) / m_c, first_zero=1.0
        )
    return _MINIMIZER_CACHE[d]


def minimizer_profile(grid: RadialGrid, mass_target: float | None,
                      support: float) -> RadialField:
    """The crossing-point minimizer (zeta(r/R0))^{d/(d-2)} / R0^d on the grid.

    With mass_target=None the natural amplitude is kept, which is the exact
    steady state; otherwise the amplitude is rescaled to the requested mass
    (the interaction ratio is amplitude-invariant, so variational uses are
    unaffected).
    """
    d = grid.d
    if support > grid.r_max:
        raise TruncationError(f"support {support} exceeds the domain R={grid.r_max}")
    prof = _minimizer_lane_emden(d)
    expo = d / (d - 2.0)

    def fun(r):
        return prof(r / support) ** expo / support**d

    values = cell_average_profile(fun, grid, support=support)
    field = RadialField(grid, values)
    if mass_target is not None:
        field = RadialField(grid, values * (mass_target / mass(field)))
    return field


def interaction_ratio(f: RadialField) -> float:
    """R[f] = H[f,f] / (||f||_1^{2/d} ||f||_{mc}^{mc}), scale and amplitude invariant."""
    d = f.grid.d
    m_c = critical_exponent(d)
    m1 = mass(f)
    if m1 <= 0.0:
        raise InvalidParameterError("ratio undefined for the zero field")
    mc_norm = float((f.values**m_c) @ f.grid.volumes)
    return interaction_energy(f, f) / (m1 ** (2.0 / d) * mc_norm)


_RATIO_CACHE: dict[int, float] = {}


def _minimizer_ratio_reference(d: int) -> float:
    """Grid-independent ratio of the maximizer profile by 1-d quadrature.

    The profile is f = zeta^{d/(d-2)} on the unit ball, whose enclosed mass
    has the closed form -sigma s^{d-1} zeta'(s) / coeff straight from the
    radial equation, so H, the mass and the critical norm reduce to smooth
    one-dimensional integrals of the dense solution.
    """
    if d in _RATIO_CACHE:
        return _RATIO_CACHE[d]
    prof = _minimizer_lane_emden(d)
    sigma = sphere_surface_area(d)
    kap = newtonian_constant(d)
    m_c = critical_exponent(d)
    coeff = prof.coefficient
    x, wts = np.polynomial.legendre.leggauss(400)
    s = 0.5 * (x + 1.0)
    wts = 0.5 * wts
    zeta, dzeta = prof.interpolant(np.clip(s, 1e-10, prof.first_zero))
    zeta = np.maximum(zeta, 0.0)
    total = -sigma * float(prof.interpolant(prof.first_zero)[1]) / coeff
    grad_sq = float(np.sum(wts * dzeta**2 * s ** (d - 1)))
    h = (sigma / coeff**2 * grad_sq + total**2 / ((d - 2) * sigma)) / kap
    mc_norm = sigma * float(np.sum(wts * zeta ** (2.0 * (d - 1) / (d - 2)) * s ** (d - 1)))
    _RATIO_CACHE[d] = h / (total ** (2.0 / d) * mc_norm)
    return _RATIO_CACHE[d]


def _sample_shapes(grid: RadialGrid, rng: np.random.Generator, n: int,
                   include_perturbed: bool = True) -> list[np.ndarray]:
    """Seeded family of candidate shapes: Gaussians, compact powers, perturbations."""
    d = grid.d
    r_max = grid.r_max
    prof = _minimizer_lane_emden(d)
    expo = d / (d - 2.0)
    a0 = 0.4 * r_max
    base = cell_average_profile(lambda r: prof(r / a0)**expo, grid, support=a0)
    centers = grid.centers
    shapes = []
    for _ in range(n):
        kind = rng.integers(0, 3 if include_perturbed else 2)
        if kind == 0:
            spread = rng.uniform(0.002, (0.08 * r_max) ** 2)
            shapes.append(np.exp(-(centers**2) / (4.0 * spread)))
        elif kind == 1:
            a = rng.uniform(0.2 * r_max, 0.9 * r_max)
            iota = rng.uniform(0.3, 4.0)
            shapes.append(np.maximum(1.0 - (centers / a) ** d, 0.0) ** iota)
        else:
            modes = 1.0 + 0.05 * np.cos(
                rng.uniform(0.5, 6.0) * centers + rng.uniform(0, 2 * math.pi)
            )
            shapes.append(base * modes)
    return shapes


def _ratio_values(grid: RadialGrid, values: np.ndarray) -> float:
    d = grid.d
    m_c = critical_exponent(d)
    m1 = float(values @ grid.volumes)
    if m1 <= 0.0:
        return -math.inf
    mcn = float((values**m_c) @ grid.volumes)
    return interaction_from_values(grid, values, values) / (m1 ** (2.0 / d) * mcn)


def estimate_Cc(d: int, grid: RadialGrid, seed: int = 0, n_samples: int = 200) -> float:
    """Lower-bound estimate of the sharp crossing-point interaction constant.

    Takes the best of the maximizer profile's grid-independent reference
    ratio and a seeded stochastic shape search on the grid, hill-climbing
    multiplicative perturbations from the best sampled shape. Deterministic
    for a fixed seed, and stable under grid refinement because the winning
    candidate is the reference ratio.
    """
    if grid.d != d:
        raise InvalidParameterError("grid dimension does not match d")
    rng = np.random.default_rng(seed)
    best_vals = minimizer_profile(grid, None, 0.45 * grid.r_max).values.copy()
    best = _ratio_values(grid, best_vals)
    for shape in _sample_shapes(grid, rng, n_samples):
        r = _ratio_values(grid, shape)
        if r > best:
            best, best_vals = r, shape
    # local polish: smooth multiplicative bumps with shrinking amplitude
    centers = grid.centers
    amp = 0.02
    for _ in range(60):
        freq = rng.uniform(0.5, 10.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        trial = best_vals * (1.0 + amp * np.cos(freq * centers + phase))
        trial = np.maximum(trial, 0.0)
        r = _ratio_values(grid, trial)
        if r > best:
            best, best_vals = r, trial
        else:
            amp *= 0.85
    return max(best, _minimizer_ratio_reference(d))


def hls_pair_exponent(d: int, m: float) -> float:
    """The conjugate exponent q with 1/m + 1/q = 1 + 2/d for the bare kernel."""
    q = m * d / ((d + 2.0) * m - d)
    if q <= 1.0:
        raise InvalidParameterError(f"HLS pairing needs m < d/2, got m={m}, d={d}")
    return q


def hls_ratio(f: RadialField, g: RadialField, m: float) -> float:
    """H[f,g] / (||f||_m ||g||_q), the pair form of the kernel inequality."""
    q = hls_pair_exponent(f.grid.d, m)
    denom = lp_norm(f, m) * lp_norm(g, q)
    if denom == 0.0:
        return 0.0
    return interaction_energy(f, g) / denom


def estimate_hls_constant(d: int, m: float, grid: RadialGrid, seed: int = 0,
                          n_samples: int = 120) -> float:
    """Seeded lower-bound estimate of the sharp pair-form kernel constant."""
    rng = np.random.default_rng(seed)
    best = 0.0
    shapes = _sample_shapes(grid, rng, n_samples)
    for i in range(0, len(shapes) - 1, 2):
        f = RadialField(grid, shapes[i])
        g = RadialField(grid, shapes[i + 1])
        best = max(best, hls_ratio(f, g, m), hls_ratio(f, f, m), hls_ratio(g, g, m))
    return best


def cauchy_schwarz_slack(f: RadialField, g: RadialField) -> float:
    """sqrt(H[f,f] H[g,g]) - H[f,g]; nonnegative because H is positive semidefinite."""
    hfg = interaction_energy(f, g)
    hff = interaction_energy(f, f)
    hgg = interaction_energy(g, g)
    return math.sqrt(max(hff, 0.0) * max(hgg, 0.0)) - hfg


@dataclass(frozen=True)
class ProbeReport:
    """Result of evaluating the Young-type interaction bound over an eta grid."""

    applicable: bool
    reason: str
    min_slack: float
    eta_at_min: float
    c_hls: float
    lhs: float


def inequality_probe(f: RadialField, g: RadialField, params: ModelParams,
                     c_hls: float | None = None,
                     etas: np.ndarray | None = None) -> ProbeReport:
    """Check |H[f,g]| <= eta ||f||_{m1}^{m1} + C(eta) ||g||_1^{e1} ||g||_{m2}^{e2}.

    The bound chain is kernel inequality, then interpolation, then Young's
    inequality with exponent m1; its hypothesis is m1 < d/2 together with
    m1 m2 + 2 m1 m2 / d >= m1 + m2. The kernel constant is instantiated from
    a seeded estimate and never below the probed pair's own ratio, so a
    negative slack would indicate a genuine inequality violation.
    """
    m, m2, d = params.m1, params.m2, params.d
    if not (m < d / 2.0):
        return ProbeReport(False, f"hypothesis fails: m1={m} >= d/2", math.nan,
                           math.nan, math.nan, math.nan)
    if m * m2 + 2.0 * m * m2 / d < m + m2:
        return ProbeReport(False, "hypothesis fails: m1 m2 (1 + 2/d) < m1 + m2",
                           math.nan, math.nan, math.nan, math.nan)
    q = hls_pair_exponent(d, m)
    # interpolation ||g||_q <= ||g||_1^theta ||g||_{m2}^{1-theta}
    theta = (1.0 / q - 1.0 / m2) / (1.0 - 1.0 / m2)
    if not (0.0 <= theta <= 1.0):
        return ProbeReport(False, f"interpolation fails: q={q:.4g} outside [1, m2]",
                           math.nan, math.nan, math.nan, math.nan)
    chls = estimate_hls_constant(d, m, f.grid) if c_hls is None else c_hls
    chls = max(chls, hls_ratio(f, g, m))
    lhs = abs(interaction_energy(f, g))
    b = chls * mass(g) ** theta * lp_norm(g, m2) ** (1.0 - theta)
    fm = lp_norm(f, m) ** m
    mp = m / (m - 1.0)
    if etas is None:
        etas = np.logspace(-3, 3, 25)
    slacks = etas * fm + (1.0 / mp) * (etas * m) ** (-1.0 / (m - 1.0)) * b**mp - lhs
    k = int(np.argmin(slacks))
    return ProbeReport(True, "", float(slacks[k]), float(etas[k]), chls, lhs)


@dataclass(frozen=True)
class ConstantEstimates:
    """Estimated sharp constants and the critical masses built from them."""

    C_c: float | None = None
    C_star_L1: float | None = None
    C_star_L2: float | None = None
    M_c: float | None = None
    M_1c: float | None = None
    M_2c: float | None = None
    c_d_convention: str = "newtonian"
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "C_c": self.C_c, "C_star_L1": self.C_star_L1,
            "C_star_L2": self.C_star_L2, "M_c": self.M_c,
            "M_1c": self.M_1c, "M_2c": self.M_2c,
            "c_d_convention": self.c_d_convention, "seed": self.seed,
        }


def line_ratio(f: RadialField, g: RadialField, params: ModelParams,
               line: str) -> float:
    """The sup ratio defining the line constants.

    line='L1': H / (||f||_{m1} ||g||_1^{2/d} ||g||_{m2}^{1-2/d});
    line='L2': H / (||f||_1^{2/d} ||f||_{m1}^{1-2/d} ||g||_{m2}).
    """
    d = params.d
    h = interaction_energy(f, g)
    if line == "L1":
        denom = lp_norm(f, params.m1) * mass(g) ** (2.0 / d) \
            * lp_norm(g, params.m2) ** (1.0 - 2.0 / d)
    elif line == "L2":
        denom = mass(f) ** (2.0 / d) * lp_norm(f, params.m1) ** (1.0 - 2.0 / d) \
            * lp_norm(g, params.m2)
    else:
        raise InvalidParameterError(f"line must be 'L1' or 'L2', got {line!r}")
    return h / denom if denom > 0 else 0.0


def estimate_line_constant(params: ModelParams, grid: RadialGrid, line: str,
                           seed: int = 0, n_samples: int = 160) -> float:
    """Seeded lower-bound estimate of C_* (line='L1') or C_star (line='L2').

    Pairs are probed in both orders, which also makes the estimate at a
    swapped parameter point agree exactly with the mirrored line.
    """
    rng = np.random.default_rng(seed)
    shapes = _sample_shapes(grid, rng, n_samples)
    best = 0.0
    for i in range(0, len(shapes) - 1, 2):
        f = RadialField(grid, shapes[i])
        g = RadialField(grid, shapes[i + 1])
        best = max(best, line_ratio(f, g, params, line),
                   line_ratio(g, f, params, line),
                   line_ratio(f, f, params, line),
                   line_ratio(g, g, params, line))
    return best


def critical_mass_crossing(d: int, c_c: float, c_d: float | None = None) -> float:
    """M_c = (2 / (c_d C_c (m_c - 1)))^{d/2}."""
    m_c = critical_exponent(d)
    c = newtonian_constant(d) if c_d is None else c_d
    return (2.0 / (c * c_c * (m_c - 1.0))) ** (d / 2.0)


def critical_mass_m2c(params: ModelParams, c_star_l1: float,
                      c_d: float | None = None) -> float:
    """M_2c on L1 from C_*: (c_d C_*)^{-d/2} (m1/(m1-1))^{d/2} (m2-1)^{-d(m1-1)/(2m1)}."""
    c = newtonian_constant(params.d) if c_d is None else c_d
    m1, m2, d = params.m1, params.m2, params.d
    return (
        (c * c_star_l1) ** (-d / 2.0)
        * (m1 / (m1 - 1.0)) ** (d / 2.0)
        * (m2 - 1.0) ** (-d * (m1 - 1.0) / (2.0 * m1))
    )


def critical_mass_m1c(params: ModelParams, c_star_l2: float,
                      c_d: float | None = None) -> float:
    """M_1c on L2 from C_star: the mirror image of M_2c."""
    c = newtonian_constant(params.d) if c_d is None else c_d
    m1, m2, d = params.m1, params.m2, params.d
    return (
        (c * c_star_l2) ** (-d / 2.0)
        * (m2 / (m2 - 1.0)) ** (d / 2.0)
        * (m1 - 1.0) ** (-d * (m2 - 1.0) / (2.0 * m2))
    )


def critical_masses(d: int, params_l1: ModelParams | None,
                    params_l2: ModelParams | None,
                    estimates: ConstantEstimates,
                    c_d: float | None = None) -> ConstantEstimates:
    """Fill the critical masses from whichever constants are present."""
    m_c = estimates.M_c
    m_1c = estimates.M_1c
    m_2c = estimates.M_2c
    if estimates.C_c is not None:
        m_c = critical_mass_crossing(d, estimates.C_c, c_d)
    if estimates.C_star_L1 is not None:
        if params_l1 is None:
            raise MissingConstantError("M_2c needs the L1 parameter point")
        m_2c = critical_mass_m2c(params_l1, estimates.C_star_L1, c_d)
    if estimates.C_star_L2 is not None:
        if params_l2 is None:
            raise MissingConstantError("M_1c needs the L2 parameter point")
        m_1c = critical_mass_m1c(params_l2, estimates.C_star_L2, c_d)
    return replace(estimates, M_c=m_c, M_1c=m_1c, M_2c=m_2c)
