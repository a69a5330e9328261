import math

import numpy as np
import pytest

from fqcsim import (
    ConfigError,
    DriveSpec,
    NonHermitianSpec,
    damped_oscillator_ce,
    damped_rabi_population,
    decay_single,
    default_grid,
    effective_hamiltonian,
    evolve_nonhermitian,
    underdamped_discriminant,
)

E_STATE = np.array([0.0, 1.0], dtype=complex)
G_STATE = np.array([1.0, 0.0], dtype=complex)


def test_decay_single_values():
    times = np.array([0.0, math.log(2.0), 10.0])
    series = decay_single(1.0, 1.0, times)
    np.testing.assert_allclose(series.pi_e, [1.0, 0.5, math.exp(-10)], rtol=1e-12)
    assert series.rho.shape == (3, 1, 1)


def test_decay_single_rejects_bad_pi0():
    with pytest.raises(ConfigError):
        decay_single(1.0, 1.5, np.array([0.0, 1.0]))


def test_undriven_excited_state_reduces_to_decay():
    times = default_grid(8.0, 401)
    series = evolve_nonhermitian(NonHermitianSpec(1.0), E_STATE, times)
    np.testing.assert_allclose(series.pi_e, np.exp(-times), atol=1e-12)
    np.testing.assert_allclose(series.rho[:, 0, 1], 0.0, atol=1e-14)


def test_ground_state_is_stable():
    times = default_grid(8.0, 101)
    series = evolve_nonhermitian(NonHermitianSpec(1.0), G_STATE, times)
    np.testing.assert_allclose(series.rho, np.tile(np.diag([1.0, 0.0]), (101, 1, 1)), atol=1e-12)


@pytest.mark.parametrize("omega0", [10.0, 15.0])
def test_strong_coupling_closed_form(omega0):
    # residual deviation is the gamma/(4 omega0) cross term of the exact
    # amplitude, so the bound tightens as the drive grows
    times = default_grid(8.0, 4001)
    spec = NonHermitianSpec(1.0, DriveSpec(omega0, 0.0))
    series = evolve_nonhermitian(spec, E_STATE, times)
    approx = damped_rabi_population(1.0, omega0, times)
    bound = 0.026 if omega0 == 10.0 else 0.02
    assert np.abs(series.pi_e - approx).max() <= bound


@pytest.mark.parametrize("omega0", [0.1, 0.25, 1.0, 10.0])
def test_eig_and_ode_representations_agree(omega0):
    times = default_grid(6.0, 301)
    spec = NonHermitianSpec(1.0, DriveSpec(omega0, 0.0))
    a = evolve_nonhermitian(spec, E_STATE, times, method="eig")
    b = evolve_nonhermitian(spec, E_STATE, times, method="ode")
    assert np.abs(a.rho - b.rho).max() < 1e-8


def test_detuned_evolution_matches_ode():
    times = default_grid(6.0, 301)
    spec = NonHermitianSpec(1.0, DriveSpec(1.0, 0.7))
    heff = effective_hamiltonian(spec)
    assert heff[1, 1] == pytest.approx(0.7 - 0.5j)
    a = evolve_nonhermitian(spec, E_STATE, times, method="eig")
    # independent per-point matrix exponential oracle
    from scipy.linalg import expm

    for i in (50, 150, 300):
        u = expm(-1j * heff * times[i])
        rho = np.outer(u @ E_STATE, (u @ E_STATE).conj())
        assert np.abs(a.rho[i] - rho).max() < 1e-10


def test_trace_decays_monotonically_on_resonance():
    times = default_grid(8.0, 2001)
    spec = NonHermitianSpec(1.0, DriveSpec(1.0, 0.0))
    series = evolve_nonhermitian(spec, E_STATE, times)
    trace = series.trace
    assert np.all(np.diff(trace) <= 1e-12)
    # d(trace)/dt = -gamma * pi_e
    deriv = np.gradient(trace, times)
    np.testing.assert_allclose(deriv[2:-2], -series.pi_e[2:-2], atol=2e-4)


def test_damped_oscillator_regimes():
    times = default_grid(8.0, 801)
    over = damped_oscillator_ce(NonHermitianSpec(1.0, DriveSpec(0.1, 0.0)), times)
    assert over.regime == "overdamped"
    # monotone decay until the amplitude zero crossing near t = 7.6,
    # after which pi_e stays below 1e-3
    early = times <= 6.0
    assert np.all(np.diff(over.pi_e[early]) <= 1e-12)
    assert over.pi_e[~early].max() < 1e-3

    crit = damped_oscillator_ce(NonHermitianSpec(1.0, DriveSpec(0.25, 0.0)), times)
    assert crit.regime == "critical"
    assert crit.discriminant == 0.0

    under = damped_oscillator_ce(NonHermitianSpec(1.0, DriveSpec(1.0, 0.0)), times)
    assert under.regime == "underdamped"
    assert underdamped_discriminant(1.0, 1.0) == pytest.approx(3.75)


@pytest.mark.parametrize("omega0", [0.1, 0.25, 1.0, 10.0])
def test_damped_oscillator_matches_nonhermitian_propagation(omega0):
    times = default_grid(8.0, 1601)
    spec = NonHermitianSpec(1.0, DriveSpec(omega0, 0.0))
    closed = damped_oscillator_ce(spec, times)
    series = evolve_nonhermitian(spec, E_STATE, times)
    assert np.abs(closed.pi_e - series.pi_e).max() < 1e-8


def test_critical_point_exact_double_root():
    # at omega0 = gamma/4 the characteristic polynomial has a double root and
    # the eigenvector matrix of H_eff degenerates; the expm fallback covers it
    times = default_grid(8.0, 801)
    spec = NonHermitianSpec(1.0, DriveSpec(0.25, 0.0))
    series = evolve_nonhermitian(spec, E_STATE, times)
    closed = damped_oscillator_ce(spec, times)
    assert np.abs(series.pi_e - closed.pi_e).max() < 1e-8


def test_damped_rabi_population_requires_underdamping():
    with pytest.raises(ConfigError):
        damped_rabi_population(1.0, 0.1, np.array([0.0, 1.0]))


def test_damped_oscillator_requires_resonance():
    with pytest.raises(ConfigError):
        damped_oscillator_ce(NonHermitianSpec(1.0, DriveSpec(1.0, 0.5)), np.array([0.0]))
