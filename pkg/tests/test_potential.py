import math

import numpy as np
import pytest

from chemosim import (CompactPolynomial, Normalization, OutOfRangeError,
                      RadialField, RadialGrid, build_field, enclosed_mass,
                      interaction_energy, mass, newtonian_constant,
                      solve_potential)
from conftest import random_field, uniform_ball
from oracles import interaction_quadrature_3d


def test_normalization_constants():
    norm = Normalization(d=3)
    assert norm.kappa_d == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-15)
    assert norm.kappa_d == newtonian_constant(3)
    assert norm.c_d_value == norm.kappa_d
    assert norm.convention == "newtonian"
    over = Normalization(d=3, c_d=4.0 * math.pi)
    assert over.c_d_value == 4.0 * math.pi
    assert "override" in over.convention


def test_enclosed_mass_examples(grid3_fine):
    ball = uniform_ball(grid3_fine)
    assert enclosed_mass(ball, 0.0) == 0.0
    assert enclosed_mass(ball, 0.5) == pytest.approx(0.125, rel=1e-12)
    assert enclosed_mass(ball, grid3_fine.r_max) == pytest.approx(mass(ball), rel=1e-14)
    with pytest.raises(OutOfRangeError):
        enclosed_mass(ball, -0.1)
    with pytest.raises(OutOfRangeError):
        enclosed_mass(ball, grid3_fine.r_max + 1.0)


def test_enclosed_mass_monotone(grid3):
    rng = np.random.default_rng(2)
    f = random_field(grid3, rng)
    rs = np.linspace(0.0, grid3.r_max, 173)
    vals = [enclosed_mass(f, float(r)) for r in rs]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_zero_field_potential(grid3):
    pot = solve_potential(RadialField.zeros(grid3))
    assert np.all(pot.v == 0.0)
    assert np.all(pot.dv == 0.0)


def test_uniform_ball_anchors(grid3_fine):
    # Newton shell theorem: v = M/(4 pi r) outside, interior parabola inside
    ball = uniform_ball(grid3_fine)
    pot = solve_potential(ball)
    assert pot.value_at(0.0) == pytest.approx(3.0 / (8.0 * math.pi), rel=1e-10)
    assert pot.value_at(2.0) == pytest.approx(1.0 / (8.0 * math.pi), rel=1e-10)
    assert pot.value_at(0.37) == pytest.approx((3 - 0.37**2) / (8 * math.pi), rel=1e-10)
    # slope is inward everywhere and zero at the origin
    assert pot.dv[0] == 0.0
    assert np.all(pot.dv[1:] < 0.0)
    # far field closes on the monopole tail
    assert pot.value_at(grid3_fine.r_max) == pytest.approx(pot.tail, rel=1e-14)


def test_potential_cell_average_consistency(grid3):
    rng = np.random.default_rng(8)
    f = random_field(grid3, rng)
    pot = solve_potential(f)
    x, w = np.polynomial.legendre.leggauss(12)
    for i in (0, 3, 101, 317, 511):
        lo, hi = grid3.edges[i], grid3.edges[i + 1]
        s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        ww = 0.5 * (hi - lo) * w
        avg = sum(wk * pot.value_at(float(sk)) * grid3.sigma * sk**2
                  for sk, wk in zip(s, ww)) / grid3.volumes[i]
        assert pot.v[i] == pytest.approx(avg, rel=1e-11)


def test_discrete_laplacian_consistency_order():
    # FV Laplacian of the solved cell averages reproduces -f at order >= 1
    errs = []
    for n in (256, 512, 1024):
        grid = RadialGrid.uniform(3, 4.0, n)
        amp = 1.0 / (4.0 * math.pi * 0.25) ** 1.5
        f = RadialField(grid, amp * np.exp(-grid.centers**2 / 1.0))
        pot = solve_potential(f)
        grad = np.diff(pot.v) / grid.center_spacing
        flux = grid.face_areas[1:-1] * grad
        lap = np.diff(flux) / grid.volumes[1:-1]
        resid = np.abs(-lap - f.values[1:-1]) @ grid.volumes[1:-1]
        errs.append(resid)
    order1 = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert order1 >= 1.0 and order2 >= 1.0


def test_interaction_ball_value(grid3_fine):
    ball = uniform_ball(grid3_fine)
    assert interaction_energy(ball, ball) == pytest.approx(1.2, abs=1e-6)


def test_interaction_against_quadrature_oracle():
    grid = RadialGrid.uniform(3, 2.0, 2048)
    f = build_field(CompactPolynomial(1.3, 0.9, 2.0), grid)
    g = build_field(CompactPolynomial(0.7, 1.4, 1.0), grid)
    # frozen from the converged oracle (n=60 and n=120 agree to 4e-15)
    href = interaction_quadrature_3d(
        lambda r: 1.3 * np.maximum(1 - (r / 0.9) ** 3, 0.0) ** 2,
        lambda r: 0.7 * np.maximum(1 - (r / 1.4) ** 3, 0.0),
        r_cut=2.0, breaks=(0.9, 1.4),
    )
    assert href == pytest.approx(6.276639262251942, rel=1e-12)
    assert interaction_energy(f, g) == pytest.approx(href, rel=2e-6)


def test_interaction_bilinear_symmetric(grid3):
    rng = np.random.default_rng(4)
    f = random_field(grid3, rng)
    g = random_field(grid3, rng)
    h = interaction_energy(f, g)
    assert interaction_energy(g, f) == pytest.approx(h, rel=1e-12)
    assert interaction_energy(f.with_values(2 * f.values),
                              g.with_values(3 * g.values)) == pytest.approx(6 * h, rel=1e-12)
    zero = RadialField.zeros(grid3)
    assert interaction_energy(zero, g) == 0.0


def test_interaction_cauchy_schwarz(grid3):
    rng = np.random.default_rng(31)
    for _ in range(40):
        f = random_field(grid3, rng)
        g = random_field(grid3, rng)
        hfg = interaction_energy(f, g)
        bound = math.sqrt(interaction_energy(f, f) * interaction_energy(g, g))
        assert hfg <= bound * (1 + 1e-12) + 1e-12
