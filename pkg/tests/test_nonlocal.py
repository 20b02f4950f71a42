import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ostrovsky_lab.errors import InvalidProfile, NonZeroMean
from ostrovsky_lab.nonlocal_terms import (admissibility_constant, compute_F, compute_P,
                                          make_initial_data, profile_samples)
from ostrovsky_lab.spectral import Field, derivative, integral, make_grid

from conftest import TWO_PI, band_limited


def test_P_of_zero(grid256):
    assert not np.any(compute_P(Field(grid256, np.zeros(256))).values)


def test_P_of_sine():
    L = 5.0
    g = make_grid(128, L)
    P = compute_P(Field(g, np.sin(2 * np.pi * g.x / L)))
    assert np.allclose(P.values, -(L / (2 * np.pi)) * np.cos(2 * np.pi * g.x / L), atol=1e-14)


def test_P_round_trip_two_cosines():
    L = 3.0
    g = make_grid(64, L)
    u = Field(g, np.cos(2 * np.pi * g.x / L) + np.cos(4 * np.pi * g.x / L))
    P = compute_P(u)
    assert np.max(np.abs(derivative(P, 1).values - u.values)) < 1e-12
    assert abs(P.mean()) < 1e-16


def test_P_rejects_nonzero_mean(grid256):
    with pytest.raises(NonZeroMean):
        compute_P(Field(grid256, np.ones(256)))


def test_F_cases(grid256, rng):
    g = grid256
    assert not np.any(compute_F(Field(g, np.zeros(256))).values)
    F = compute_F(Field(g, np.sin(g.x)))
    assert np.allclose(F.values, -np.cos(g.x), atol=1e-14)
    P = band_limited(rng, g, kmax=40)
    assert np.max(np.abs(derivative(compute_F(Field(g, P)), 1).values - P)) < 1e-10


def test_initial_data_zero(grid256):
    init = make_initial_data("zero", grid256, 0.1, 0.01)
    assert init.C0 == 0 and not np.any(init.u0.values) and not np.any(init.P0.values)


def test_initial_data_sine_C0():
    g = make_grid(256, TWO_PI)
    init = make_initial_data("sine", g, 0.1, 0.01)
    # pi + 3pi/4 + 0.02 pi + 1e-4 pi, each term from the analytic norms of sin and cos
    assert init.C0 == pytest.approx(5.560933156119292, rel=1e-12)


def test_initial_data_projects_mean(grid256):
    u = np.sin(grid256.x) + 0.7
    init = make_initial_data(u, grid256, 0.1, 0.01)
    assert abs(init.u0.mean()) < 1e-15
    assert init.profile == "samples"


def test_initial_data_rejects_bad_samples(grid256):
    with pytest.raises(InvalidProfile):
        make_initial_data(np.full(256, np.inf), grid256, 0.1, 0.0)
    with pytest.raises(InvalidProfile):
        make_initial_data(np.zeros(10), grid256, 0.1, 0.0)


def test_profiles(grid256):
    g = grid256
    assert np.allclose(profile_samples("sine:2,3", g), 2 * np.sin(3 * g.x))
    assert np.allclose(profile_samples("two-mode", g), np.sin(g.x) + 0.5 * np.sin(2 * g.x))
    gd = profile_samples("gauss-deriv:1.5,3.0,0.4", g)
    assert np.max(gd) == pytest.approx(1.5, rel=1e-3)
    assert abs(np.mean(gd)) < 1e-12
    assert np.array_equal(profile_samples("gaussian-derivative", g), profile_samples("gauss-deriv", g))
    for bad in ("cosine", "sine:1", "sine:a,b", "gauss-deriv:1,1,0"):
        with pytest.raises(InvalidProfile):
            profile_samples(bad, g)


def test_uP_and_PPx_vanish(grid256, rng):
    u = Field(grid256, band_limited(rng, grid256, kmax=30))
    P = compute_P(u)
    assert abs(integral(u * P)) < 1e-12
    assert abs(integral(P * derivative(P, 1))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), a=st.floats(1.0, 4.0),
       eps=st.floats(0.0, 0.2), beta=st.floats(0.0, 0.05))
def test_C0_nonnegative_and_monotone_in_scale(seed, a, eps, beta):
    g = make_grid(64, TWO_PI)
    u = band_limited(np.random.default_rng(seed), g, kmax=6)
    c1 = admissibility_constant(u, g, eps, beta)
    ca = admissibility_constant(a * u, g, eps, beta)
    assert c1 >= 0
    assert ca >= c1 * (1 - 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_P_of_derivative_is_identity_minus_mean(seed):
    g = make_grid(64, 2.5)
    f = band_limited(np.random.default_rng(seed), g, kmax=20, zero_mean=False)
    back = compute_P(derivative(Field(g, f), 1)).values
    assert np.max(np.abs(back - (f - f.mean()))) < 1e-10 * max(1, np.max(np.abs(f)))


def test_C0_sum_of_squares_bound(grid256):
    init = make_initial_data("two-mode", grid256, 0.05, 0.0025)
    u = init.u0.values
    dx = grid256.dx
    assert init.C0 >= dx * np.sum(u ** 2) + dx * np.sum(u ** 4)
    assert math.isfinite(init.C0)
