"""Dense Hamiltonians for a system coupled to a finite quasi-continuum (FQC).

The FQC is a ladder of equidistant levels, all coupled with the same strength
v to the unstable state |e>.  Fermi's golden rule fixes the level spacing
delta = 2 pi v^2 / gamma once a target decay rate gamma is chosen, so an FQC
is fully specified by its half-size N, the coupling v and gamma.  Energies are
measured in units of hbar*gamma and times in 1/gamma (hbar = 1 throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "HoleSpec",
    "FqcSpec",
    "DriveSpec",
    "HamiltonianMatrix",
    "level_energies",
    "build_single_level",
    "build_two_level",
    "build_adaptive",
    "adaptive_spec_for_size",
    "lamb_shift",
]


@dataclass(frozen=True)
class HoleSpec:
    """Symmetric spectral hole: FQC levels with |E| < half_width are removed."""

    half_width: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ConfigError(f"hole half_width must be >= 0, got {self.half_width}")


@dataclass(frozen=True)
class FqcSpec:
    """Geometry of the quasi-continuum.

    n_half levels on each side of E = 0 plus the central one (2*n_half + 1
    levels for a flat spectrum).  coupling_v = 0 is the decoupled limit; the
    spacing then degenerates to 0, which is harmless because the levels no
    longer influence the dynamics.
    """

    n_half: int
    coupling_v: float
    gamma_target: float = 1.0
    hole: HoleSpec | None = None

    def __post_init__(self):
        if self.n_half < 0:
            raise ConfigError(f"n_half must be >= 0, got {self.n_half}")
        if self.coupling_v < 0:
            raise ConfigError(f"coupling_v must be >= 0, got {self.coupling_v}")
        if self.gamma_target <= 0:
            raise ConfigError(f"gamma_target must be > 0, got {self.gamma_target}")
        if self.hole is not None and self.coupling_v == 0:
            raise ConfigError("a spectral hole requires coupling_v > 0")

    @property
    def gap(self) -> float:
        """Level spacing delta = 2 pi v^2 / gamma (golden-rule inversion)."""
        return 2.0 * math.pi * self.coupling_v**2 / self.gamma_target

    @property
    def level_indices(self) -> np.ndarray:
        """Integer grid indices k of the surviving levels, ascending."""
        ks = np.arange(-self.n_half, self.n_half + 1)
        if self.hole is not None and self.hole.half_width > 0:
            ks = ks[np.abs(ks * self.gap) >= self.hole.half_width]
        return ks

    @property
    def n_levels(self) -> int:
        return int(self.level_indices.size)


@dataclass(frozen=True)
class DriveSpec:
    """Rotating-frame drive: Rabi frequency and detuning, in units of gamma."""

    rabi_omega0: float
    detuning_delta: float = 0.0

    def __post_init__(self):
        if self.rabi_omega0 < 0:
            raise ConfigError(f"rabi_omega0 must be >= 0, got {self.rabi_omega0}")


@dataclass(eq=False)
class HamiltonianMatrix:
    """Real symmetric Hamiltonian with its basis bookkeeping.

    Basis order is fixed: [g], e, then FQC levels ascending in energy.
    """

    entries: np.ndarray
    basis_labels: tuple[str, ...]
    spec: FqcSpec
    drive: DriveSpec | None = None
    level_ks: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_system(self) -> int:
        """Dimension of the system block (1 without a ground state, else 2)."""
        return 2 if self.basis_labels[0] == "g" else 1


def level_energies(spec: FqcSpec) -> np.ndarray:
    """FQC diagonal energies k*delta in ascending order (holes removed)."""
    return spec.level_indices * spec.gap


def _check_band(spec: FqcSpec) -> np.ndarray:
    ks = spec.level_indices
    if spec.hole is not None:
        band_edge = spec.n_half * spec.gap
        if spec.hole.half_width > band_edge:
            raise ConfigError(
                f"hole half_width {spec.hole.half_width} exceeds the FQC band edge {band_edge}"
            )
        if ks.size == 0:
            raise ConfigError("spectral hole removed every FQC level")
    return ks


def build_single_level(spec: FqcSpec) -> HamiltonianMatrix:
    """Unstable state |e> at E = 0 equally coupled to every FQC level.

    Row/column 0 is |e>; the off-diagonal couplings are all v and the FQC
    block is diagonal with energies k*delta.
    """
    ks = _check_band(spec)
    nf = ks.size
    dim = 1 + nf
    h = np.zeros((dim, dim))
    h[0, 1:] = spec.coupling_v
    h[1:, 0] = spec.coupling_v
    h[np.arange(1, dim), np.arange(1, dim)] = ks * spec.gap
    labels = ("e",) + tuple(f"f{k}" for k in ks)
    return HamiltonianMatrix(h, labels, spec, None, ks)


def build_two_level(spec: FqcSpec, drive: DriveSpec) -> HamiltonianMatrix:
    """Driven two-level system {|g>, |e>} with |e> coupled to the FQC.

    In the rotating frame the g-e coupling is the bare Rabi element omega0 and
    the e-e diagonal carries the detuning.  Only |e> talks to the FQC.
    """
    ks = _check_band(spec)
    nf = ks.size
    dim = 2 + nf
    h = np.zeros((dim, dim))
    h[0, 1] = h[1, 0] = drive.rabi_omega0
    h[1, 1] = drive.detuning_delta
    h[1, 2:] = spec.coupling_v
    h[2:, 1] = spec.coupling_v
    h[np.arange(2, dim), np.arange(2, dim)] = ks * spec.gap
    labels = ("g", "e") + tuple(f"f{k}" for k in ks)
    return HamiltonianMatrix(h, labels, spec, drive, ks)


def build_adaptive(spec: FqcSpec, drive: DriveSpec) -> HamiltonianMatrix:
    """Two-level system coupled to an FQC with a central spectral hole."""
    if spec.hole is None:
        raise ConfigError("build_adaptive requires a spec with a hole")
    if spec.level_indices.size < 2:
        raise ConfigError("adaptive FQC needs at least 2 surviving levels")
    return build_two_level(spec, drive)


def adaptive_spec_for_size(
    n_fqc: int,
    coupling_v: float,
    half_width: float,
    gamma_target: float = 1.0,
) -> FqcSpec:
    """Adaptive spec with exactly n_fqc surviving levels (n_fqc even).

    The underlying flat grid is extended outward so that removing all levels
    with |k*delta| < half_width leaves n_fqc of them.  This keeps the state
    budget fixed while pushing spectral weight toward the populated sidebands.
    """
    if n_fqc < 2 or n_fqc % 2:
        raise ConfigError(f"adaptive size must be a positive even integer, got {n_fqc}")
    gap = 2.0 * math.pi * coupling_v**2 / gamma_target
    if gap <= 0:
        raise ConfigError("adaptive spec requires coupling_v > 0")
    k_min = max(1, math.ceil(half_width / gap))
    n_half = n_fqc // 2 + k_min - 1
    return FqcSpec(n_half, coupling_v, gamma_target, HoleSpec(half_width))


def lamb_shift(spec: FqcSpec, e_energy: float = 0.0) -> float:
    """Discrete principal-value shift sum_f v^2 / (E_e - E_f), f off-resonant.

    Exactly zero for any symmetric FQC: terms come in +/- pairs and the
    compensated summation preserves the cancellation bit for bit.
    """
    v2 = spec.coupling_v**2
    terms = [v2 / (e_energy - ef) for ef in level_energies(spec) if ef != e_energy]
    return math.fsum(terms)
