"""Exact propagation under time-independent Hamiltonians and reduced dynamics.

Propagation uses a one-time eigendecomposition followed by phase rotation,
|psi(t)> = sum_n <psi_n|psi_0> exp(-i E_n t) |psi_n>, so there is no stepper
and no truncation error to tune: the value at any grid time is independent of
the rest of the grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .hamiltonian import FqcSpec, DriveSpec, HamiltonianMatrix

__all__ = [
    "StateVector",
    "Eigensystem",
    "TimeSeries",
    "DensitySeries",
    "ReducedDensity",
    "basis_state",
    "diagonalize",
    "default_grid",
    "propagate",
    "reduce_density",
    "source_term",
    "source_term_series",
    "memory_kernel",
]

NORM_TOL = 1e-10

# Full precision scientific notation, 17 significant digits.
_FMT = "{:.16e}".format


@dataclass
class StateVector:
    """Normalized complex amplitudes over the full Hilbert space."""

    amplitudes: np.ndarray
    basis_labels: tuple[str, ...]

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size != len(self.basis_labels):
            raise ConfigError("amplitudes and basis_labels sizes differ")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def basis_state(h: HamiltonianMatrix, label: str = "e") -> StateVector:
    """Computational basis state of the given Hamiltonian (default |e>)."""
    if label not in h.basis_labels:
        raise ConfigError(f"unknown basis label {label!r}")
    amps = np.zeros(h.dim, dtype=complex)
    amps[h.basis_labels.index(label)] = 1.0
    return StateVector(amps, h.basis_labels)


@dataclass
class Eigensystem:
    """Eigenvalues (ascending) and orthonormal eigenvectors, columnwise."""

    values: np.ndarray
    vectors: np.ndarray


def diagonalize(h: HamiltonianMatrix) -> Eigensystem:
    """Dense symmetric eigendecomposition of the Hamiltonian."""
    m = h.entries
    if not np.array_equal(m, m.T):
        raise ConfigError("Hamiltonian matrix is not symmetric")
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    return Eigensystem(values, vectors)


def default_grid(t_f: float, points: int = 2001) -> np.ndarray:
    """Uniform time grid on [0, t_f]. Metrics should converge to 1e-4 under
    doubling of `points`; 2001 is ample for every regime studied here."""
    if t_f <= 0 or points < 2:
        raise ConfigError("grid needs t_f > 0 and at least 2 points")
    return np.linspace(0.0, t_f, points)


@dataclass(eq=False)
class DensitySeries:
    """Sub-normalized system density matrices rho(t), shape (nt, d, d)."""

    times: np.ndarray
    rho: np.ndarray

    @property
    def pi_e(self) -> np.ndarray:
        # |e> is the last system basis state for both 1x1 and 2x2 blocks
        return self.rho[:, -1, -1].real

    @property
    def trace(self) -> np.ndarray:
        return np.einsum("tii->t", self.rho).real

    @property
    def dim(self) -> int:
        return self.rho.shape[-1]

    def to_csv(self, path, extra_header: tuple[str, ...] = ()) -> None:
        cols = ["t", "pi_e"]
        labels = ("g", "e")[-self.dim:]
        for a in range(self.dim):
            for b in range(self.dim):
                cols += [f"rho_{labels[a]}{labels[b]}_re", f"rho_{labels[a]}{labels[b]}_im"]
        with open(path, "w") as fh:
            for line in extra_header:
                fh.write(f"# {line}\n")
            fh.write(",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [t, self.pi_e[i]]
                for a in range(self.dim):
                    for b in range(self.dim):
                        row += [self.rho[i, a, b].real, self.rho[i, a, b].imag]
                fh.write(",".join(_FMT(x) for x in row) + "\n")

    def to_json(self) -> dict:
        return {
            "times": self.times.tolist(),
            "pi_e": self.pi_e.tolist(),
            "rho_re": self.rho.real.tolist(),
            "rho_im": self.rho.imag.tolist(),
        }


@dataclass(eq=False)
class TimeSeries:
    """Propagated amplitudes on a time grid plus run provenance.

    `energy_variance0` is <H^2> - <H>^2 in the initial state; it sets the
    curvature of the short-time survival probability (Zeno time).
    """

    times: np.ndarray
    amplitudes: np.ndarray
    basis_labels: tuple[str, ...]
    spec: FqcSpec | None = None
    drive: DriveSpec | None = None
    energy_variance0: float = 0.0

    @property
    def e_index(self) -> int:
        return self.basis_labels.index("e")

    @property
    def system_dim(self) -> int:
        return 2 if self.basis_labels[0] == "g" else 1

    @property
    def pi_e(self) -> np.ndarray:
        return np.abs(self.amplitudes[:, self.e_index]) ** 2

    @property
    def pi_g(self) -> np.ndarray | None:
        return np.abs(self.amplitudes[:, 0]) ** 2 if self.system_dim == 2 else None

    def reduced(self) -> DensitySeries:
        """Project every state onto the system block: rho_ab = c_a c_b*."""
        d = self.system_dim
        c = self.amplitudes[:, :d]
        rho = c[:, :, None] * c.conj()[:, None, :]
        return DensitySeries(self.times, rho)

    def fqc_populations(self) -> np.ndarray:
        return np.abs(self.amplitudes[:, self.system_dim:]) ** 2

    def fqc_labels(self) -> tuple[str, ...]:
        return self.basis_labels[self.system_dim:]

    def to_csv(self, path, include_fqc: bool = False,
               extra_header: tuple[str, ...] = ()) -> None:
        d = self.system_dim
        labels = self.basis_labels[:d]
        cols = ["t", "pi_e"]
        for a in range(d):
            for b in range(d):
                cols += [f"rho_{labels[a]}{labels[b]}_re", f"rho_{labels[a]}{labels[b]}_im"]
        if include_fqc:
            cols += [f"p_{lab}" for lab in self.fqc_labels()]
        rho = self.reduced().rho
        pops = self.fqc_populations() if include_fqc else None
        with open(path, "w") as fh:
            for line in extra_header:
                fh.write(f"# {line}\n")
            fh.write(",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [t, self.pi_e[i]]
                for a in range(d):
                    for b in range(d):
                        row += [rho[i, a, b].real, rho[i, a, b].imag]
                if pops is not None:
                    row += list(pops[i])
                fh.write(",".join(_FMT(x) for x in row) + "\n")

    def to_json(self) -> dict:
        out = {
            "times": self.times.tolist(),
            "pi_e": self.pi_e.tolist(),
            "basis_labels": list(self.basis_labels),
            "amplitudes_re": self.amplitudes.real.tolist(),
            "amplitudes_im": self.amplitudes.imag.tolist(),
        }
        return out

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)


@dataclass
class ReducedDensity:
    """Single-time projected density matrix of the system block."""

    entries: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        m = self.entries
        if np.abs(m - m.conj().T).max() > 1e-8:
            raise NumericalError("reduced density is not Hermitian")
        ev = np.linalg.eigvalsh(m)
        if ev.min() < -1e-10 or ev.max() > 1.0 + 1e-10:
            raise NumericalError(f"reduced density eigenvalues {ev} out of [0, 1]")
        if m.trace().real > 1.0 + 1e-10:
            raise NumericalError("reduced density trace exceeds 1")


def propagate(
    h: HamiltonianMatrix,
    psi0: StateVector | str | None,
    times: np.ndarray,
    eig: Eigensystem | None = None,
) -> TimeSeries:
    """Evolve psi0 under h on the given grid by spectral phase rotation.

    A precomputed Eigensystem may be shared read-only across many calls.
    Norm conservation is checked at every grid point (1e-10).
    """
    if psi0 is None or isinstance(psi0, str):
        psi0 = basis_state(h, psi0 or "e")
    if psi0.dim != h.dim:
        raise ConfigError(f"state dim {psi0.dim} does not match Hamiltonian dim {h.dim}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) <= 0):
        raise ConfigError("time grid must be 1d and strictly increasing")
    if eig is None:
        eig = diagonalize(h)
    a = eig.vectors.T @ psi0.amplitudes
    phases = np.exp(-1j * np.outer(times, eig.values))
    amps = (phases * a) @ eig.vectors.T
    norms = np.linalg.norm(amps, axis=1)
    worst = np.abs(norms - 1.0).max()
    if worst > NORM_TOL:
        raise NumericalError(f"norm drift {worst} exceeds {NORM_TOL}")

    hpsi = h.entries @ psi0.amplitudes
    mean = np.real(np.vdot(psi0.amplitudes, hpsi))
    variance = float(np.real(np.vdot(hpsi, hpsi)) - mean**2)
    return TimeSeries(times, amps, h.basis_labels, h.spec, h.drive, variance)


def reduce_density(psi: StateVector, time: float = 0.0) -> ReducedDensity:
    """Project a pure state: entries c_a c_b* over the system labels."""
    d = 2 if psi.basis_labels[0] == "g" else 1
    c = psi.amplitudes[:d]
    return ReducedDensity(np.outer(c, c.conj()), time)


def source_term(psi: StateVector, spec: FqcSpec) -> np.ndarray:
    """Coupling-induced source matrix of the reduced equation of motion.

    With lambda = v * sum_i rho_gi and eta = v * sum_i (rho_ie - rho_ei), the
    projected commutator P[V, rho]P reads [[0, -lambda], [lambda*, eta]].
    The minus sign on the upper entry is required for the matrix to be
    anti-Hermitian, which is what keeps i d(rho_r)/dt = [H0, rho_r] + S
    Hermiticity-consistent; it is also the convention under which S converges
    to the non-Hermitian limit i[H_d, rho_r]_+ for large quasi-continua.
    """
    if psi.basis_labels[0] != "g":
        raise ConfigError("source_term needs a two-level basis (g, e, ...)")
    cg, ce = psi.amplitudes[0], psi.amplitudes[1]
    cf = psi.amplitudes[2:]
    v = spec.coupling_v
    lam = v * cg * np.sum(cf.conj())
    eta = v * (np.sum(cf) * ce.conj() - ce * np.sum(cf.conj()))
    return np.array([[0.0, -lam], [lam.conjugate(), eta]], dtype=complex)


def source_term_series(series: TimeSeries, spec: FqcSpec | None = None) -> np.ndarray:
    """source_term evaluated on every state of a series, shape (nt, 2, 2)."""
    if series.system_dim != 2:
        raise ConfigError("source_term_series needs a two-level series")
    spec = spec or series.spec
    cg = series.amplitudes[:, 0]
    ce = series.amplitudes[:, 1]
    sf = series.amplitudes[:, 2:].sum(axis=1)
    v = spec.coupling_v
    lam = v * cg * sf.conj()
    eta = v * (sf * ce.conj() - ce * sf.conj())
    out = np.zeros((series.times.size, 2, 2), dtype=complex)
    out[:, 0, 1] = -lam
    out[:, 1, 0] = lam.conj()
    out[:, 1, 1] = eta
    return out


def memory_kernel(spec: FqcSpec, tau_grid: np.ndarray) -> np.ndarray:
    """Environment memory kernel K(tau) = v^2 sum_k exp(-i E_k tau).

    For the flat symmetric FQC this is v^2 times a Dirichlet kernel: sharply
    peaked at tau = 0 with first zero at 2 pi / (n_levels * delta), and
    periodic with period 2 pi / delta, which is the revival mechanism.
    """
    tau = np.asarray(tau_grid, dtype=float)
    energies = spec.level_indices * spec.gap
    return spec.coupling_v**2 * np.exp(-1j * np.outer(tau, energies)).sum(axis=1)
