"""Exception types shared across the package."""

from __future__ import annotations


class AtomMirrorError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(AtomMirrorError, ValueError):
    """A builder or operation precondition was violated."""


class SingularMatrixError(AtomMirrorError):
    """The scattering linear system is numerically singular.

    Raised when the condition estimate of M(omega) exceeds 1/eps, which
    happens when the probe lands exactly on a lossless dark pole (e.g. a
    Bragg-spaced chain probed exactly on resonance).
    """

    def __init__(self, delta_omega: float, message: str | None = None):
        self.delta_omega = delta_omega
        super().__init__(
            message or f"scattering matrix singular at delta_omega={delta_omega!r}"
        )


class ResonantDivergenceError(AtomMirrorError):
    """A classical engine hit a lossless standing-wave pathology.

    The geometric denominator of the multiple-scattering sum (or the
    composite transfer-matrix element the transmission divides by)
    vanished; the probe sits on a dark pole of the lossless chain.
    """

    def __init__(self, delta_omega: float, message: str | None = None):
        self.delta_omega = delta_omega
        super().__init__(
            message or f"resonant divergence at delta_omega={delta_omega!r}"
        )


class PoleError(AtomMirrorError):
    """Dispersion relation evaluated on the light-line crossing cos(Kd) = cos(kd)."""


class BraggDivergenceError(AtomMirrorError):
    """Band-gap width requested at a Bragg spacing (kd multiple of pi), where it diverges."""


class ModalUnavailableError(AtomMirrorError):
    """Eigenchannel reflection is unusable because the mode set is near-defective."""


class NoWindowError(AtomMirrorError):
    """No contiguous region with reflectivity above threshold exists in the search range."""


class ConfigError(AtomMirrorError):
    """A scenario configuration failed to parse or validate.

    Carries the full list of field-level problems so a caller can report
    every violation at once.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownFigureError(AtomMirrorError):
    """Unrecognized figure id passed to the reproduce command."""

    def __init__(self, figure_id: str, valid: list[str]):
        self.figure_id = figure_id
        self.valid = list(valid)
        super().__init__(
            f"unknown figure id {figure_id!r}; valid ids: {', '.join(valid)}"
        )
