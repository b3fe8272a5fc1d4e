"""Classical-optics engines: closed forms, multiple-scattering recurrence, transfer matrix.

Each atom acts as a partially transparent mirror with the closed-form
coefficients

    r(dw) = -G / (G + gamma - 2i dw),      t(dw) = 1 + r(dw),

and the chain composes like a stack of such mirrors.  Two independent
composition routes are provided: the Fabry-Perot recurrence (aggregate
reflection built from the last atom backwards) and the 2x2 transfer-matrix
product.  Both reproduce the exact engine to machine precision and serve
as its oracles.

The matching matrix is multiplied through in the prefactor-free form
A = t * M_a so that lossless resonances (t = 0) stay finite; the scalar
prod(t_j) is carried separately and the composite amplitudes
r = A12/A22, t = prod(t_j)/A22 never divide by t_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmitterChain, POLE_NUDGE, RIGID, PhaseModel
from .errors import InvalidParameterError, ResonantDivergenceError

# |denominator| below which the lossless standing-wave pathology is declared.
_DIVERGENCE_TOL = 1e-12


@dataclass(frozen=True)
class MirrorCoefficients:
    """Reflection/transmission amplitude pair of one scatterer (or a composite)."""

    r: complex
    t: complex


def single_atom_rt(delta_omega, gamma1d, gamma_ext=0.0) -> MirrorCoefficients:
    """Closed-form single-atom coefficients at detuning ``delta_omega`` from its resonance."""
    if not gamma1d > 0:
        raise InvalidParameterError(f"gamma1d must be > 0, got {gamma1d}")
    if gamma_ext < 0:
        raise InvalidParameterError(f"gamma_ext must be >= 0, got {gamma_ext}")
    r, t = _rt_arrays(np.asarray(delta_omega, dtype=float), gamma1d, gamma_ext)
    return MirrorCoefficients(r=complex(r), t=complex(t))


def _rt_arrays(delta_omega, gamma1d, gamma_ext):
    """Vectorized single-atom r, t over detuning arrays."""
    den = gamma1d + gamma_ext - 2j * delta_omega
    r = -gamma1d / den
    return r, 1.0 + r


def recurrence_reflection(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> complex:
    """Aggregate reflection amplitude via the two-mirror recurrence.

    Composes R_j = r_j + t_j^2 R_{j+1} p_j / (1 - r_j R_{j+1} p_j) with
    p_j = e^{2 i k d_j} over the actual per-gap distances, starting from
    R_N = r_N, and references the result to the z = 0 plane.
    """
    r = _recurrence_rt_many(chain, np.asarray([delta_omega], dtype=float), model,
                            want_t=False)[0]
    return complex(r[0])


def recurrence_rt(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> MirrorCoefficients:
    """Recurrence-engine reflection and transmission amplitudes at one detuning."""
    r, t = _recurrence_rt_many(chain, np.asarray([delta_omega], dtype=float), model)
    return MirrorCoefficients(r=complex(r[0]), t=complex(t[0]))


def _recurrence_rt_many(
    chain: EmitterChain,
    dws: np.ndarray,
    model: PhaseModel,
    want_t: bool = True,
    on_divergence: str = "raise",
):
    """Vectorized recurrence over a detuning array.

    ``on_divergence="raise"`` raises ResonantDivergenceError at the first
    pathological point; ``"mask"`` marks such points NaN and returns them
    in a boolean mask instead, so dense scans can patch a few holes.
    """
    k = np.asarray(model.wavevector(dws))
    gaps = chain.gaps()
    r_acc, t_single = _rt_arrays(dws - chain.delta[-1], chain.gamma1d[-1], chain.gamma_ext[-1])
    r_acc = np.array(r_acc, dtype=complex)
    t_acc = np.array(t_single, dtype=complex) if want_t else None
    for j in range(chain.n - 2, -1, -1):
        r_j, t_j = _rt_arrays(dws - chain.delta[j], chain.gamma1d[j], chain.gamma_ext[j])
        phase = np.exp(1j * k * gaps[j])
        den = 1.0 - r_j * r_acc * phase * phase
        bad = np.abs(den) < _DIVERGENCE_TOL
        if np.any(bad):
            if on_divergence == "raise":
                raise ResonantDivergenceError(float(np.asarray(dws)[bad].flat[0]))
            den = np.where(bad, np.nan, den)
        if want_t:
            t_acc = t_j * t_acc * phase / den
        r_acc = r_j + t_j * t_j * r_acc * phase * phase / den
    span_phase = np.exp(1j * k * chain.z[0])
    r_out = r_acc * span_phase * span_phase
    if want_t:
        # normalize out the free single-pass propagation so the empty guide gives t = 1
        t_out = t_acc * np.exp(-1j * k * chain.span)
    else:
        t_out = None
    if on_divergence == "mask":
        return r_out, t_out, ~np.isfinite(r_out)
    return r_out, t_out


def matching_matrix(coeffs: MirrorCoefficients) -> np.ndarray:
    """2x2 matching matrix M_a of one mirror (finite only for t != 0)."""
    r, t = coeffs.r, coeffs.t
    return np.array([[(t * t - r * r) / t, r / t], [-r / t, 1.0 / t]], dtype=complex)


def propagation_matrix(k: float, distance: float) -> np.ndarray:
    """2x2 free-propagation matrix M_p across ``distance``."""
    return np.array(
        [[np.exp(1j * k * distance), 0.0], [0.0, np.exp(-1j * k * distance)]],
        dtype=complex,
    )


def compose_two_port(elements) -> MirrorCoefficients:
    """Compose an alternating sequence of mirrors and gap lengths.

    ``elements`` holds MirrorCoefficients for atoms and plain floats for
    gap distances (already folded with k, i.e. the phase k*d).  The empty
    sequence is the identity two-port: r = 0, t = 1.
    """
    a = np.eye(2, dtype=complex)
    t_prod = 1.0 + 0j
    for el in elements:
        if isinstance(el, MirrorCoefficients):
            r, t = el.r, el.t
            a = a @ np.array([[t * t - r * r, r], [-r, 1.0]], dtype=complex)
            t_prod *= t
        else:
            a = a @ np.array(
                [[np.exp(1j * el), 0.0], [0.0, np.exp(-1j * el)]], dtype=complex
            )
    if abs(a[1, 1]) < _DIVERGENCE_TOL * max(1.0, abs(a[0, 1])):
        raise ResonantDivergenceError(float("nan"), "composite two-port divergent (A22 ~ 0)")
    return MirrorCoefficients(r=a[0, 1] / a[1, 1], t=t_prod / a[1, 1])


def transfer_matrix_rt(chain: EmitterChain, delta_omega: float, model: PhaseModel = RIGID) -> MirrorCoefficients:
    """Ensemble amplitudes from the transfer-matrix product.

    Per-atom matching matrices interleave with per-gap propagation (no
    trailing propagation), referenced to the same planes as the exact
    engine: reflection carries e^{2 i k z_1}, transmission has the free
    single-pass phase e^{i k (z_N - z_1)} divided out.
    """
    dw = float(delta_omega)
    k = float(np.asarray(model.wavevector(dw)))
    elements = []
    for j in range(chain.n):
        r_j, t_j = _rt_arrays(dw - chain.delta[j], chain.gamma1d[j], chain.gamma_ext[j])
        elements.append(MirrorCoefficients(r=complex(r_j), t=complex(t_j)))
        if j + 1 < chain.n:
            elements.append(k * float(chain.z[j + 1] - chain.z[j]))
    try:
        comp = compose_two_port(elements)
    except ResonantDivergenceError:
        raise ResonantDivergenceError(dw) from None
    return MirrorCoefficients(
        r=comp.r * np.exp(2j * k * chain.z[0]),
        t=comp.t * np.exp(-1j * k * chain.span),
    )


def scatter_recurrence_many(
    chain: EmitterChain, dws, model: PhaseModel = RIGID, nudge: bool = False
):
    """Recurrence-engine (r, t) arrays over a detuning grid.

    ``nudge=True`` retries dark-pole points at dw + POLE_NUDGE instead of
    raising.
    """
    dws = np.asarray(dws, dtype=float)
    r, t, bad = _recurrence_rt_many(chain, dws, model, want_t=True, on_divergence="mask")
    if np.any(bad):
        if not nudge:
            raise ResonantDivergenceError(float(dws[bad].flat[0]))
        r2, t2 = _recurrence_rt_many(chain, dws[bad] + POLE_NUDGE, model, want_t=True)
        r, t = r.copy(), t.copy()
        r[bad], t[bad] = r2, t2
    return r, t


def scatter_transfer_matrix_many(
    chain: EmitterChain, dws, model: PhaseModel = RIGID, nudge: bool = False
):
    """Transfer-matrix (r, t) arrays over a detuning grid."""
    out = np.empty((2, len(dws)), dtype=complex)
    for i, dw in enumerate(np.asarray(dws, dtype=float)):
        try:
            mc = transfer_matrix_rt(chain, dw, model)
        except ResonantDivergenceError:
            if not nudge:
                raise
            mc = transfer_matrix_rt(chain, dw + POLE_NUDGE, model)
        out[0, i], out[1, i] = mc.r, mc.t
    return out[0], out[1]


def reflectivity_profile(chain: EmitterChain, dws, model: PhaseModel = RIGID) -> np.ndarray:
    """|r|^2 over a detuning array via the vectorized recurrence.

    Hot path for window scans and optimization.  Isolated divergent points
    (lossless dark poles) are retried with a tiny detuning nudge instead of
    propagating the error, so dense scans stay total.
    """
    dws = np.asarray(dws, dtype=float)
    r, _, bad = _recurrence_rt_many(chain, dws, model, want_t=False, on_divergence="mask")
    if np.any(bad):
        patched, _ = _recurrence_rt_many(chain, dws[bad] + POLE_NUDGE, model, want_t=False)
        r = r.copy()
        r[bad] = patched
    return np.abs(r) ** 2


def reflection_profile(chain: EmitterChain, dws, model: PhaseModel = RIGID) -> np.ndarray:
    """Complex r over a detuning array via the vectorized recurrence (no nudging)."""
    dws = np.asarray(dws, dtype=float)
    r, _ = _recurrence_rt_many(chain, dws, model, want_t=False)
    return r
