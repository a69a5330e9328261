"""Exact non-Hermitian reference dynamics the FQC emulation is judged against.

The open two-level system evolves under H_eff = H0 + i H_d with a lossy
excited state, H_d = -(gamma/2) |e><e|.  The decaying norm is physical
(population leaks to the continuum); nothing is renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import ConfigError, NumericalError
from .evolve import DensitySeries
from .hamiltonian import DriveSpec

__all__ = [
    "NonHermitianSpec",
    "DampedAmplitude",
    "effective_hamiltonian",
    "decay_single",
    "evolve_nonhermitian",
    "damped_oscillator_ce",
    "underdamped_discriminant",
    "damped_rabi_population",
    "source_infinity",
]


@dataclass(frozen=True)
class NonHermitianSpec:
    """Decay rate plus (optionally) the rotating-frame drive."""

    gamma: float
    drive: DriveSpec | None = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")


def effective_hamiltonian(spec: NonHermitianSpec) -> np.ndarray:
    """H_eff = H0 + i H_d in the (g, e) basis; complex, non-Hermitian."""
    drive = spec.drive or DriveSpec(0.0, 0.0)
    h0 = np.array(
        [[0.0, drive.rabi_omega0], [drive.rabi_omega0, drive.detuning_delta]],
        dtype=complex,
    )
    h0[1, 1] += -0.5j * spec.gamma
    return h0


def decay_single(gamma: float, pi0: float, times: np.ndarray) -> DensitySeries:
    """Pure exponential decay pi(t) = pi0 exp(-gamma t) as a 1x1 series."""
    if not -1e-12 <= pi0 <= 1.0 + 1e-12:  # rounding slack for |c_e|^2
        raise ConfigError(f"pi0 must lie in [0, 1], got {pi0}")
    pi0 = min(max(pi0, 0.0), 1.0)
    times = np.asarray(times, dtype=float)
    rho = (pi0 * np.exp(-gamma * times)).reshape(-1, 1, 1).astype(complex)
    return DensitySeries(times, rho)


def evolve_nonhermitian(
    spec: NonHermitianSpec,
    psi0: np.ndarray,
    times: np.ndarray,
    method: str = "eig",
) -> DensitySeries:
    """Propagate rho(t) = e^{-i H_eff t} |psi0><psi0| e^{+i H_eff^dag t}.

    method="eig" diagonalizes the 2x2 once (falling back to per-point expm
    near the defective critical point); method="ode" integrates the
    commutator-plus-anticommutator equation of motion directly and exists as
    an independent cross-check of the propagator.
    """
    psi0 = np.asarray(psi0, dtype=complex).reshape(2)
    times = np.asarray(times, dtype=float)
    heff = effective_hamiltonian(spec)

    if method == "eig":
        w, wv = np.linalg.eig(heff)
        if np.linalg.cond(wv) < 1e6:
            c = np.linalg.solve(wv, psi0)
            psits = (np.exp(-1j * np.outer(times, w)) * c) @ wv.T
        else:  # defective (critical) point: exponentiate per time
            psits = np.array([expm(-1j * heff * t) @ psi0 for t in times])
        rho = psits[:, :, None] * psits.conj()[:, None, :]
        return DensitySeries(times, rho)

    if method == "ode":
        h0 = heff.real.astype(complex)
        hd = np.diag([0.0, -0.5 * spec.gamma]).astype(complex)

        def rhs(_t, y):
            rho = y.reshape(2, 2)
            drho = -1j * (h0 @ rho - rho @ h0) + (hd @ rho + rho @ hd)
            return drho.reshape(-1)

        rho0 = np.outer(psi0, psi0.conj()).reshape(-1)
        sol = solve_ivp(
            rhs, (times[0], times[-1]), rho0, t_eval=times,
            rtol=1e-11, atol=1e-13, method="DOP853",
        )
        if not sol.success:
            raise NumericalError(f"ODE integration failed: {sol.message}")
        return DensitySeries(times, sol.y.T.reshape(-1, 2, 2))

    raise ConfigError(f"unknown method {method!r}")


def underdamped_discriminant(gamma: float, omega0: float) -> float:
    """Discriminant 4 omega0^2 - gamma^2/4 of the damped amplitude equation.

    Positive in the under-damped (oscillatory) regime; the oscillation
    frequency is sqrt(discriminant)/2.
    """
    return 4.0 * omega0**2 - gamma**2 / 4.0


@dataclass
class DampedAmplitude:
    """Closed-form excited amplitude of the resonant damped oscillator."""

    times: np.ndarray
    c_e: np.ndarray
    regime: str
    discriminant: float

    @property
    def pi_e(self) -> np.ndarray:
        return np.abs(self.c_e) ** 2


def damped_oscillator_ce(
    spec: NonHermitianSpec,
    times: np.ndarray,
    psi0: np.ndarray = (0.0, 1.0),
) -> DampedAmplitude:
    """Solve c_e'' + (gamma/2) c_e' + omega0^2 c_e = 0 in closed form.

    Valid at zero detuning only.  Regimes, by the sign of the discriminant
    4 omega0^2 - gamma^2/4:
      > 0  under-damped, c_e oscillates at sqrt(disc)/2 inside exp(-gamma t/4)
      = 0  critical (double root at omega0 = gamma/4)
      < 0  over-damped, monotone combination of two real decay rates
    Initial conditions follow from the Schroedinger equation under H_eff:
    c_e'(0) = -i omega0 c_g(0) - (gamma/2) c_e(0).
    """
    drive = spec.drive or DriveSpec(0.0, 0.0)
    if drive.detuning_delta != 0.0:
        raise ConfigError("damped_oscillator_ce requires zero detuning")
    times = np.asarray(times, dtype=float)
    gamma, om0 = spec.gamma, drive.rabi_omega0
    cg0, ce0 = complex(psi0[0]), complex(psi0[1])
    dce0 = -1j * om0 * cg0 - 0.5 * gamma * ce0
    disc = underdamped_discriminant(gamma, om0)
    decay = np.exp(-gamma * times / 4.0)

    if disc > 0:
        om = np.sqrt(disc) / 2.0
        b = (dce0 + 0.25 * gamma * ce0) / om
        ce = decay * (ce0 * np.cos(om * times) + b * np.sin(om * times))
        regime = "underdamped"
    elif disc == 0:
        b = dce0 + 0.25 * gamma * ce0
        ce = decay * (ce0 + b * times)
        regime = "critical"
    else:
        kappa = np.sqrt(-disc) / 2.0
        b = (dce0 + 0.25 * gamma * ce0) / kappa
        ce = decay * (ce0 * np.cosh(kappa * times) + b * np.sinh(kappa * times))
        regime = "overdamped"
    return DampedAmplitude(times, ce.astype(complex), regime, disc)


def damped_rabi_population(gamma: float, omega0: float, times: np.ndarray) -> np.ndarray:
    """Strong-coupling excited population exp(-gamma t/2) cos^2(Omega t).

    Omega = sqrt(4 omega0^2 - gamma^2/4)/2 is the shifted oscillation
    frequency; this is the fit model for effective Rabi/damping extraction.
    """
    disc = underdamped_discriminant(gamma, omega0)
    if disc <= 0:
        raise ConfigError("damped_rabi_population needs the under-damped regime")
    om = np.sqrt(disc) / 2.0
    times = np.asarray(times, dtype=float)
    return np.exp(-gamma * times / 2.0) * np.cos(om * times) ** 2


def source_infinity(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Continuum-limit source i[H_d, rho]_+ for 2x2 rho (single or stacked)."""
    rho = np.asarray(rho, dtype=complex)
    hd = np.diag([0.0, -0.5 * gamma]).astype(complex)
    return 1j * (hd @ rho + rho @ hd)
