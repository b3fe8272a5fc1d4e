"""Exact single-photon scattering from the full multiple-emitter theory.

The chain's steady-state response is encoded in the complex symmetric
matrix M(omega) with

    M_jl = sqrt(G_j G_l)/2 * e^{i k |z_j - z_l|}
           + [gamma_j/2 - i (dw - delta_j)] * delta_jl,

where G_j is the waveguide decay of atom j and dw the probe detuning from
the chain's reference frequency.  Reflection and transmission amplitudes
come from one linear solve against the incident phase vector; the
transmitted amplitude is normalized so the empty waveguide gives t = 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .core import EmitterChain, POLE_NUDGE, RIGID, PhaseModel, validate_grid
from .errors import SingularMatrixError

_EPS = np.finfo(float).eps


def build_m_matrix(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> np.ndarray:
    """N x N complex symmetric scattering matrix M at one probe detuning."""
    k = float(np.asarray(model.wavevector(delta_omega)))
    dist = np.abs(chain.z[:, None] - chain.z[None, :])
    m = 0.5 * np.sqrt(np.outer(chain.gamma1d, chain.gamma1d)) * np.exp(1j * k * dist)
    m[np.diag_indices_from(m)] += chain.gamma_ext / 2.0 - 1j * (delta_omega - chain.delta)
    return m


def _solve_amplitudes(chain: EmitterChain, delta_omega: float, model: PhaseModel):
    """One LU solve shared by r and t; raises on a near-singular M."""
    m = build_m_matrix(chain, delta_omega, model)
    k = float(np.asarray(model.wavevector(delta_omega)))
    w = np.sqrt(chain.gamma1d) * np.exp(1j * k * chain.z)
    anorm = np.linalg.norm(m, 1)
    try:
        lu, piv = lu_factor(m, check_finite=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - exact zero pivot
        raise SingularMatrixError(delta_omega) from exc
    gecon = get_lapack_funcs("gecon", (m,))
    rcond, info = gecon(lu, anorm)
    if info != 0 or not np.isfinite(rcond) or rcond < _EPS:
        raise SingularMatrixError(delta_omega)
    x = lu_solve((lu, piv), w, check_finite=False)
    w_back = np.sqrt(chain.gamma1d) * np.exp(-1j * k * chain.z)
    r = -0.5 * np.dot(w, x)
    t = 1.0 - 0.5 * np.dot(w_back, x)
    return complex(r), complex(t)


def reflection_exact(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> complex:
    """Reflection amplitude r(dw) from the inverse of M."""
    return _solve_amplitudes(chain, delta_omega, model)[0]


def transmission_exact(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> complex:
    """Transmission amplitude t(dw); the empty waveguide convention gives t -> 1 far off resonance."""
    return _solve_amplitudes(chain, delta_omega, model)[1]


def _principal_phase(r: complex) -> float:
    phase = math.atan2(r.imag, r.real)
    if phase <= -math.pi:
        phase = math.pi
    return phase


@dataclass(frozen=True)
class ScatterPoint:
    """Scattering response at one probe detuning."""

    delta_omega: float
    r: complex
    t: complex
    R: float
    T: float
    phase: float
    loss: float

    @classmethod
    def from_amplitudes(cls, delta_omega: float, r: complex, t: complex) -> "ScatterPoint":
        R = abs(r) ** 2
        T = abs(t) ** 2
        return cls(
            delta_omega=float(delta_omega),
            r=complex(r),
            t=complex(t),
            R=R,
            T=T,
            phase=_principal_phase(r),
            loss=1.0 - R - T,
        )


@dataclass(frozen=True)
class Spectrum:
    """Scattering response sampled on a detuning grid, ordered by grid index."""

    grid: np.ndarray
    points: tuple[ScatterPoint, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.points):
            raise ValueError("grid and points must have equal length")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def r(self) -> np.ndarray:
        return np.array([p.r for p in self.points])

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def R(self) -> np.ndarray:
        return np.array([p.R for p in self.points])

    @property
    def T(self) -> np.ndarray:
        return np.array([p.T for p in self.points])

    @property
    def phase(self) -> np.ndarray:
        return np.array([p.phase for p in self.points])

    @property
    def loss(self) -> np.ndarray:
        return np.array([p.loss for p in self.points])


def scatter_point(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> ScatterPoint:
    r, t = _solve_amplitudes(chain, delta_omega, model)
    return ScatterPoint.from_amplitudes(delta_omega, r, t)


def sweep_spectrum(
    chain: EmitterChain,
    grid,
    model: PhaseModel = RIGID,
    nudge: bool = False,
    workers: int = 1,
) -> Spectrum:
    """Evaluate the exact engine on every grid point.

    With ``nudge=True`` a probe that hits a lossless dark pole is retried
    at delta_omega + POLE_NUDGE and the point records the shifted detuning;
    otherwise the SingularMatrixError propagates, tagged with the offending
    frequency.  Points may be evaluated concurrently (``workers`` threads);
    output ordering follows the grid regardless of scheduling.
    """
    grid = validate_grid(grid)

    def one(dw: float) -> ScatterPoint:
        try:
            return scatter_point(chain, dw, model)
        except SingularMatrixError:
            if not nudge:
                raise
            return scatter_point(chain, dw + POLE_NUDGE, model)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(one, grid))
    else:
        points = tuple(one(dw) for dw in grid)
    return Spectrum(grid=grid, points=points)
