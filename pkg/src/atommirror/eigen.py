"""Collective-mode analysis: effective Hamiltonian, eigenchannels, infinite-chain band.

The non-Hermitian effective Hamiltonian (detuning units, relative to the
chain reference frequency)

    H_jl = delta_j * d_jl - i sqrt(G_j G_l)/2 * e^{i k |z_j - z_l|}
           [- i gamma_j/2 * d_jl  when external loss is included]

is complex symmetric, so its eigenvectors obey the unconjugated (bilinear)
orthogonality v^T v' = 0 and the reflection amplitude splits into
interfering eigenchannels:

    r(dw) = -(i/2) * sum_xi (w^T v_xi)^2 / (dw - lambda_xi),
    w_j = sqrt(G_j) e^{i k z_j}.

For an infinite equidistant chain the collective energies form the band
w(K) = (G/2) sin(kd) / (cos(Kd) - cos(kd)) with a gap of width G/|sin(kd)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GAMMA0, EmitterChain, RIGID, PhaseModel
from .errors import (
    BraggDivergenceError,
    InvalidParameterError,
    ModalUnavailableError,
    PoleError,
)

SUPERRADIANT = "superradiant"
SUBRADIANT = "subradiant"
BOUNDARY = "boundary"

_RADIANCE_TOL = 1e-9
_DEFECTIVE_TOL = 1e-8


def build_heff(
    chain: EmitterChain,
    model: PhaseModel = RIGID,
    include_loss: bool = False,
    at_detuning: float = 0.0,
) -> np.ndarray:
    """Effective Hamiltonian of the chain in detuning units (complex symmetric).

    ``at_detuning`` only matters for a dispersive phase model, where the
    coupling phases track the probe wavevector.
    """
    k = float(np.asarray(model.wavevector(at_detuning)))
    dist = np.abs(chain.z[:, None] - chain.z[None, :])
    h = -0.5j * np.sqrt(np.outer(chain.gamma1d, chain.gamma1d)) * np.exp(1j * k * dist)
    diag = chain.delta.astype(complex)
    if include_loss:
        diag = diag - 0.5j * chain.gamma_ext
    h[np.diag_indices_from(h)] += diag
    return h


def incident_phases(chain: EmitterChain, model: PhaseModel = RIGID, at_detuning: float = 0.0) -> np.ndarray:
    """Incident-field phase vector (e^{i k z_1}, ..., e^{i k z_N})."""
    k = float(np.asarray(model.wavevector(at_detuning)))
    return np.exp(1j * k * chain.z)


@dataclass(frozen=True)
class EigenMode:
    """One collective mode: eigenvalue, bilinear-normalized vector, radiance class, overlap."""

    eigenvalue: complex
    vector: np.ndarray
    radiance: str
    overlap: complex

    @property
    def decay(self) -> float:
        """-Im(lambda), the quantity compared against GAMMA0/2 for radiance."""
        return -self.eigenvalue.imag


@dataclass(frozen=True)
class EigenmodeSet:
    """All N eigenmodes of an effective Hamiltonian plus a usability flag.

    ``near_defective`` is set when some bilinear norm v^T v nearly vanishes
    (exceptional-point vicinity); the set is still returned but must not be
    fed to the eigenchannel reflection formula.
    """

    modes: tuple[EigenMode, ...]
    near_defective: bool
    psi_in: np.ndarray

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, in mode order."""
        return np.column_stack([m.vector for m in self.modes])

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([m.overlap for m in self.modes])


def _classify(eigenvalue: complex) -> str:
    decay = -eigenvalue.imag
    if decay > GAMMA0 / 2 + _RADIANCE_TOL:
        return SUPERRADIANT
    if decay < GAMMA0 / 2 - _RADIANCE_TOL:
        return SUBRADIANT
    return BOUNDARY


def _bilinear_orthonormalize(lam: np.ndarray, vecs: np.ndarray) -> tuple[np.ndarray, bool]:
    """Rescale (and, within degenerate clusters, re-mix) columns so V^T V = I.

    For distinct eigenvalues of a complex symmetric matrix the bilinear
    cross products vanish automatically; repeated eigenvalues need a
    Gram-Schmidt pass under the bilinear form.  Returns the new columns and
    whether any bilinear norm collapsed (near-defective flag).
    """
    n = len(lam)
    scale = max(1.0, float(np.max(np.abs(lam))))
    near_defective = False
    order = np.lexsort((lam.imag, lam.real))
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and abs(lam[idx] - lam[clusters[-1][-1]]) <= 1e-9 * scale:
            clusters[-1].append(idx)
        else:
            clusters.append([idx])
    out = vecs.astype(complex).copy()
    for cluster in clusters:
        done: list[int] = []
        for idx in cluster:
            v = out[:, idx]
            for j in done:
                v = v - (out[:, j] @ v) * out[:, j]
            s = v @ v
            if abs(s) < _DEFECTIVE_TOL:
                near_defective = True
                nrm = np.linalg.norm(v)
                out[:, idx] = v / nrm if nrm > 0 else v
                continue
            out[:, idx] = v / np.sqrt(s)
            done.append(idx)
    return out, near_defective


def eigenmodes(h: np.ndarray, psi_in: np.ndarray) -> EigenmodeSet:
    """Eigendecomposition of an effective Hamiltonian with bilinear normalization.

    Modes are ordered by (Re lambda, Im lambda).  ``psi_in`` is the incident
    phase vector; each mode records the squared unconjugated overlap
    (psi_in^T v)^2.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidParameterError("effective Hamiltonian must be square")
    if not np.all(np.isfinite(h)):
        raise InvalidParameterError("effective Hamiltonian entries must be finite")
    psi_in = np.asarray(psi_in, dtype=complex)
    if psi_in.shape != (h.shape[0],):
        raise InvalidParameterError("psi_in length must match the Hamiltonian dimension")
    lam, vecs = np.linalg.eig(h)
    vecs, near_defective = _bilinear_orthonormalize(lam, vecs)
    order = np.lexsort((lam.imag, lam.real))
    modes = []
    for idx in order:
        v = vecs[:, idx]
        v.setflags(write=False)
        ov = complex((psi_in @ v) ** 2)
        modes.append(
            EigenMode(
                eigenvalue=complex(lam[idx]),
                vector=v,
                radiance=_classify(lam[idx]),
                overlap=ov,
            )
        )
    return EigenmodeSet(modes=tuple(modes), near_defective=near_defective, psi_in=psi_in)


def chain_eigenmodes(
    chain: EmitterChain, model: PhaseModel = RIGID, include_loss: bool = False
) -> EigenmodeSet:
    """Eigenmodes of a chain with the standard incident phase vector."""
    return eigenmodes(build_heff(chain, model, include_loss), incident_phases(chain, model))


def reflection_modal(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> complex:
    """Reflection amplitude as a sum over interfering eigenchannels."""
    return complex(reflection_modal_many(chain, np.asarray([delta_omega], dtype=float), model)[0])


def reflection_modal_many(chain: EmitterChain, dws, model: PhaseModel = RIGID) -> np.ndarray:
    """Vectorized eigenchannel reflection over a detuning array.

    Under the rigid phase model one eigendecomposition serves every probe
    frequency; the dispersive model re-derives it per point.
    """
    return scatter_modal_many(chain, dws, model)[0]


def scatter_modal_many(chain: EmitterChain, dws, model: PhaseModel = RIGID):
    """Eigenchannel (r, t) arrays over a detuning grid.

    Transmission uses the same spectral decomposition of (dw*I - H)^{-1}
    with the forward/backward phase pair, normalized so the empty guide
    transmits unity.
    """
    dws = np.asarray(dws, dtype=float)
    if model.is_rigid:
        return _modal_eval(chain, dws, model)
    pairs = [_modal_eval(chain, np.array([dw]), model, at=dw) for dw in dws]
    return (
        np.array([p[0][0] for p in pairs]),
        np.array([p[1][0] for p in pairs]),
    )


def _modal_eval(chain: EmitterChain, dws: np.ndarray, model: PhaseModel, at: float = 0.0):
    k = float(np.asarray(model.wavevector(at)))
    h = build_heff(chain, model, include_loss=True, at_detuning=at)
    forward = np.sqrt(chain.gamma1d) * np.exp(1j * k * chain.z)
    backward = np.sqrt(chain.gamma1d) * np.exp(-1j * k * chain.z)
    modes = eigenmodes(h, incident_phases(chain, model, at_detuning=at))
    if modes.near_defective:
        raise ModalUnavailableError(
            "eigenmode set is near-defective (exceptional point); use the exact engine"
        )
    lam = modes.eigenvalues
    vecs = modes.vectors
    denom = dws[:, None] - lam[None, :]
    amp_r = (forward @ vecs) ** 2
    amp_t = (backward @ vecs) * (forward @ vecs)
    r = -0.5j * np.sum(amp_r[None, :] / denom, axis=1)
    t = 1.0 - 0.5j * np.sum(amp_t[None, :] / denom, axis=1)
    return r, t


@dataclass(frozen=True)
class GapReport:
    """Infinite-chain band-gap geometry at spatial phase kd (GAMMA0 units, about omega0)."""

    kd: float
    edge_lower: float
    edge_upper: float
    width: float


def dispersion(kd: float, Kd: float) -> float:
    """Collective energy w(K) - w0 of the infinite chain, in GAMMA0 units.

    ``kd`` is the light phase across one period, ``Kd`` the Bloch phase.
    Diverges on the light line cos(Kd) = cos(kd).
    """
    den = math.cos(Kd) - math.cos(kd)
    if den == 0.0:
        raise PoleError(f"dispersion pole: cos(Kd) = cos(kd) at kd={kd}, Kd={Kd}")
    return 0.5 * GAMMA0 * math.sin(kd) / den


def bandgap(kd: float) -> GapReport:
    """Band-gap edges and width of the infinite chain at spatial phase ``kd``.

    The two band edges are the dispersion extrema at cos(Kd) = +1 and -1;
    the gap width is GAMMA0/|sin(kd)|, diverging at Bragg phases (kd a
    multiple of pi).  kd values outside (0, pi) are folded by periodicity.
    """
    if not math.isfinite(kd):
        raise InvalidParameterError(f"kd must be finite, got {kd}")
    s = math.sin(kd)
    c = math.cos(kd)
    if abs(s) < 1e-12:
        raise BraggDivergenceError(
            f"band gap diverges at Bragg phase kd={kd} (kd multiple of pi)"
        )
    edges = sorted((0.5 * GAMMA0 * s / (1.0 - c), 0.5 * GAMMA0 * s / (-1.0 - c)))
    return GapReport(kd=kd, edge_lower=edges[0], edge_upper=edges[1], width=edges[1] - edges[0])


def chain_bandgap(chain: EmitterChain, model: PhaseModel = RIGID) -> GapReport | None:
    """Gap of the infinite-chain idealization of ``chain``, shifted and scaled to it.

    Only meaningful for equidistant chains of identical atoms (common
    detuning and waveguide rate); returns None otherwise, or when the
    spacing sits on a Bragg phase.
    """
    d = chain.uniform_spacing()
    if d is None or not chain.is_unmodulated():
        return None
    k = float(np.asarray(model.wavevector(0.0)))
    try:
        gap = bandgap(k * d)
    except BraggDivergenceError:
        return None
    g = float(chain.gamma1d[0])
    shift = float(chain.delta[0])
    return GapReport(
        kd=gap.kd,
        edge_lower=shift + g * gap.edge_lower,
        edge_upper=shift + g * gap.edge_upper,
        width=g * gap.width,
    )
