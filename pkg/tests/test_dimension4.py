"""Cross-module checks in d=4, guarding against d=3-only assumptions."""

import math

import numpy as np
import pytest

from chemosim import (ModelParams, RadialGrid, SolverConfig, SystemState,
                      critical_exponent, critical_mass_crossing, estimate_Cc,
                      free_energy, interaction_energy, lane_emden_solve, mass,
                      minimizer_profile, run, solve_potential, virial_rate)
from conftest import random_field, uniform_ball


@pytest.fixture(scope="module")
def grid4():
    return RadialGrid.uniform(4, 2.0, 512)


def test_uniform_ball_potential_d4(grid4):
    # outside: v = M / ((d-2) sigma r^{d-2}) = 1/(4 pi^2 r^2); inside a parabola
    ball = uniform_ball(grid4, 1.0, 1.0)
    pot = solve_potential(ball)
    assert pot.value_at(0.0) == pytest.approx(1.0 / (2.0 * math.pi**2), rel=1e-12)
    assert pot.value_at(2.0) == pytest.approx(1.0 / (16.0 * math.pi**2), rel=1e-12)


def test_uniform_ball_interaction_d4(grid4):
    # (1/kappa) rho int_ball v = 4/3 for unit mass and radius
    ball = uniform_ball(grid4, 1.0, 1.0)
    assert interaction_energy(ball, ball) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_virial_energy_proportionality_d4(grid4):
    mc = critical_exponent(4)
    params = ModelParams(4, mc, mc)
    rng = np.random.default_rng(41)
    for _ in range(5):
        state = SystemState(random_field(grid4, rng), random_field(grid4, rng), 0.0)
        f = free_energy(state, params)
        g = virial_rate(state, params)
        assert abs(g - 2.0 * (4 - 2) * f) <= 1e-10 * (abs(g) + 1.0)


def test_minimizer_mass_matches_critical_mass_d4(grid4):
    # the natural minimizer mass must reproduce the critical-mass formula
    prof = lane_emden_solve(4, power=2.0, coeff=1.0 / 3.0, first_zero=1.0)
    assert prof.boundary_residual < 1e-8
    f = minimizer_profile(grid4, None, 1.0)
    cc = estimate_Cc(4, grid4, seed=0, n_samples=60)
    assert mass(f) == pytest.approx(critical_mass_crossing(4, cc), rel=1e-5)


def test_short_run_conserves_mass_d4(grid4):
    from chemosim import Gaussian, build_field
    grid = RadialGrid.uniform(4, 6.0, 96)
    params = ModelParams(4, 1.6, 1.6)
    u0 = build_field(Gaussian(1.0, 0.25), grid)
    outcome, series = run(SystemState(u0, u0, 0.0), params,
                          SolverConfig(t_end=0.02, record_every=50))
    mu = series.column("mass_u")
    assert abs(mu - mu[0]).max() <= 1e-12 * mu[0]
    assert series.max_step_energy_increase <= 1e-8 * (1 + abs(series.records[0].F))
