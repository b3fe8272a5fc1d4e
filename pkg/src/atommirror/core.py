"""Chain data model, builders and the propagation-phase convention.

Everything internal is dimensionless: frequencies and decay rates are in
units of the reference waveguide decay rate GAMMA0, positions in units of
the reference resonant wavelength LAMBDA0, so the reference wavevector is
K0 = 2*pi and k*d is a plain phase.  Any I/O in physical units has to be
converted before it reaches these types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError

GAMMA0 = 1.0
LAMBDA0 = 1.0
K0 = 2.0 * math.pi / LAMBDA0

# Detuning nudge applied to probes that land exactly on a lossless dark pole.
POLE_NUDGE = 1e-9

REF_OMEGA0 = "omega0"
REF_OMEGA_A = "omega_a"


@dataclass(frozen=True)
class PhaseModel:
    """Spatial-phase convention e^{i k z} used by every engine.

    ``ratio`` is the carrier-to-linewidth ratio omega0/GAMMA0.  With
    ``ratio=None`` the model is rigid (Markov): k is locked to K0 for every
    probe detuning, which is how all published spectra are evaluated.  A
    finite positive ratio makes k track the detuning,
    k(dw) = K0*(1 + dw/ratio); rigid is the ratio -> infinity limit.
    """

    ratio: float | None = None

    def __post_init__(self):
        if self.ratio is not None and not (self.ratio > 0):
            raise InvalidParameterError(f"dispersive ratio must be > 0, got {self.ratio}")

    @property
    def is_rigid(self) -> bool:
        return self.ratio is None

    def wavevector(self, delta_omega):
        """k at probe detuning ``delta_omega`` (scalar or array), in rad/LAMBDA0."""
        if self.ratio is None:
            return K0 if np.isscalar(delta_omega) else np.full_like(
                np.asarray(delta_omega, dtype=float), K0
            )
        return K0 * (1.0 + np.asarray(delta_omega, dtype=float) / self.ratio)


RIGID = PhaseModel()


def dispersive(ratio: float) -> PhaseModel:
    return PhaseModel(ratio=ratio)


def spatial_phase(model: PhaseModel, delta_omega: float, distance: float) -> complex:
    """Unit-modulus propagation factor e^{i k(dw) * distance}."""
    if not math.isfinite(distance):
        raise InvalidParameterError(f"distance must be finite, got {distance}")
    k = float(np.asarray(model.wavevector(delta_omega)))
    return complex(np.exp(1j * k * distance))


def _as_atom_array(value, n: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class EmitterChain:
    """Complete description of the scatterer: N two-level atoms on a line.

    Parallel arrays, one entry per atom: position ``z`` (LAMBDA0 units,
    strictly increasing), detuning ``delta`` = omega_j - omega_ref (GAMMA0
    units), waveguide decay ``gamma1d`` (> 0) and external loss
    ``gamma_ext`` (>= 0).  ``ref_label`` names the reference frequency the
    detuning grid is measured from (omega0 for uniform chains, omega_a for
    frequency-modulated ones).  Instances are immutable and safe to share.
    """

    z: np.ndarray
    delta: np.ndarray
    gamma1d: np.ndarray
    gamma_ext: np.ndarray
    ref_label: str = REF_OMEGA0

    def __post_init__(self):
        n = len(np.atleast_1d(np.asarray(self.z)))
        if n < 1:
            raise InvalidParameterError("chain needs at least one atom")
        z = _as_atom_array(self.z, n, "z")
        delta = _as_atom_array(self.delta, n, "delta")
        g1 = _as_atom_array(self.gamma1d, n, "gamma1d")
        ge = _as_atom_array(self.gamma_ext, n, "gamma_ext")
        if n > 1 and not np.all(np.diff(z) > 0):
            raise InvalidParameterError("positions must be strictly increasing")
        if not np.all(g1 > 0):
            raise InvalidParameterError("gamma1d must be > 0 for every atom")
        if not np.all(ge >= 0):
            raise InvalidParameterError("gamma_ext must be >= 0 for every atom")
        for name, arr in (("z", z), ("delta", delta), ("gamma1d", g1), ("gamma_ext", ge)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def span(self) -> float:
        return float(self.z[-1] - self.z[0])

    def gaps(self) -> np.ndarray:
        """Per-gap distances z_{j+1} - z_j (length n-1)."""
        return np.diff(self.z)

    def uniform_spacing(self) -> float | None:
        """The common spacing d if the chain is equidistant, else None."""
        if self.n < 2:
            return None
        gaps = self.gaps()
        d = float(gaps[0])
        if np.allclose(gaps, d, rtol=0.0, atol=1e-12):
            return d
        return None

    def is_unmodulated(self) -> bool:
        """True when all atoms share one detuning and one waveguide rate."""
        return bool(
            np.allclose(self.delta, self.delta[0], rtol=0.0, atol=1e-12)
            and np.allclose(self.gamma1d, self.gamma1d[0], rtol=0.0, atol=1e-12)
        )

    def with_external_loss(self, gamma_ext: float) -> "EmitterChain":
        """Copy of the chain with every atom's external loss set to ``gamma_ext``."""
        return replace(self, gamma_ext=np.full(self.n, float(gamma_ext)))

    def __eq__(self, other):
        if not isinstance(other, EmitterChain):
            return NotImplemented
        return (
            self.ref_label == other.ref_label
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.delta, other.delta)
            and np.array_equal(self.gamma1d, other.gamma1d)
            and np.array_equal(self.gamma_ext, other.gamma_ext)
        )


def build_uniform_chain(
    n: int, d: float, gamma1d: float = 1.0, gamma_ext: float = 0.0
) -> EmitterChain:
    """Equidistant chain of identical resonant atoms: z_j = (j-1)*d, all detunings 0."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise InvalidParameterError(f"atom count must be an integer >= 1, got {n!r}")
    if not d > 0:
        raise InvalidParameterError(f"separation d must be > 0, got {d}")
    if not gamma1d > 0:
        raise InvalidParameterError(f"gamma1d must be > 0, got {gamma1d}")
    if gamma_ext < 0:
        raise InvalidParameterError(f"gamma_ext must be >= 0, got {gamma_ext}")
    z = np.arange(n, dtype=float) * d
    return EmitterChain(z, np.zeros(n), np.full(n, float(gamma1d)),
                        np.full(n, float(gamma_ext)), ref_label=REF_OMEGA0)


def build_modulated_chain(
    n: int, d: float, delta_step: float, gamma1d: float = 1.0, gamma_ext: float = 0.0
) -> EmitterChain:
    """Chain with a linear staircase of transition frequencies.

    Atom j (1-based) is detuned by ((n+1)/2 - j) * delta_step from the
    central frequency omega_a.  The formula is applied verbatim for even n
    too, giving half-integer multiples of the step.
    """
    base = build_uniform_chain(n, d, gamma1d, gamma_ext)
    j = np.arange(1, n + 1, dtype=float)
    delta = ((n + 1) / 2.0 - j) * float(delta_step)
    return replace(base, delta=delta, ref_label=REF_OMEGA_A)


def build_chain(
    z, delta=0.0, gamma1d=1.0, gamma_ext=0.0, ref_label: str = REF_OMEGA0
) -> EmitterChain:
    """Chain from explicit positions; scalars broadcast over atoms."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return EmitterChain(z, delta, gamma1d, gamma_ext, ref_label=ref_label)


def make_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Strictly increasing detuning grid of ``count`` points spanning [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidParameterError(f"grid bounds must be finite with lo < hi, got ({lo}, {hi})")
    if count < 2:
        raise InvalidParameterError(f"grid needs at least 2 points, got {count}")
    grid = np.linspace(lo, hi, count)
    grid.setflags(write=False)
    return grid


def validate_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise InvalidParameterError("grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)):
        raise InvalidParameterError("grid values must be finite")
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise InvalidParameterError("grid must be strictly increasing")
    return grid
