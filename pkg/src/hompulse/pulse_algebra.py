"""Gaussian envelopes, filter convolution and beam-splitter bookkeeping.

Time is unitless everywhere. Envelopes are amplitude densities of the form
``exp(-(t - center)**2 / width**2) / sqrt(pi * width**2)``; they integrate to one,
their squared modulus does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnitarityError

UNITARITY_TOL = 1e-12
BALANCED = 1.0 / math.sqrt(2.0)

INPUT_MODES = ("a", "b")
OUTPUT_MODES = ("c", "d")


def _check_width(name, value):
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite width, got {value!r}")


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GaussianEnvelope:
    """Real Gaussian time profile: a pulse shape or a filter response."""

    center: float
    width: float

    def __post_init__(self):
        _check_finite("center", self.center)
        _check_width("width", self.width)

    def __call__(self, t):
        return envelope_eval(self, t)


def envelope_eval(env: GaussianEnvelope, t):
    """Evaluate ``env`` at time ``t`` (scalar or array)."""
    _check_finite("t", t)
    w2 = env.width * env.width
    return np.exp(-((t - env.center) ** 2) / w2) / np.sqrt(np.pi * w2)


def convolve_filter_pulse(filter_width, pulse_width, composite_delay, t_prime):
    """Filter response convolved with a delayed Gaussian pulse.

    The convolution of two Gaussians is again Gaussian, centred on the composite
    delay with squared width ``filter_width**2 + pulse_width**2``.
    """
    _check_width("filter_width", filter_width)
    _check_width("pulse_width", pulse_width)
    s = filter_width * filter_width + pulse_width * pulse_width
    return np.exp(-((t_prime - composite_delay) ** 2) / s) / np.sqrt(np.pi * s)


def convolved_envelope(filter_width, pulse_width, composite_delay) -> GaussianEnvelope:
    """The envelope object equivalent to :func:`convolve_filter_pulse`."""
    _check_width("filter_width", filter_width)
    _check_width("pulse_width", pulse_width)
    return GaussianEnvelope(composite_delay, math.hypot(filter_width, pulse_width))


@dataclass(frozen=True)
class BeamSplitter:
    """Real, nonnegative transmission and reflection amplitudes.

    The minus sign on the reflected d-arm of the a input is applied by
    consumers and is not stored here.
    """

    reflectance: float = BALANCED
    transmittance: float = BALANCED

    def __post_init__(self):
        r, t = self.reflectance, self.transmittance
        if not (math.isfinite(r) and math.isfinite(t)) or r < 0 or t < 0:
            raise DomainError(f"splitter amplitudes must be finite and nonnegative, got r={r!r}, t={t!r}")
        residual = r * r + t * t - 1.0
        if abs(residual) > UNITARITY_TOL:
            raise UnitarityError(
                f"r**2 + t**2 = {r * r + t * t!r} deviates from 1 by {residual:.3e}", residual
            )

    @property
    def is_balanced(self) -> bool:
        return (
            abs(self.reflectance - BALANCED) <= UNITARITY_TOL
            and abs(self.transmittance - BALANCED) <= UNITARITY_TOL
        )


def validate_splitter(r, t) -> BeamSplitter:
    return BeamSplitter(reflectance=r, transmittance=t)


@dataclass(frozen=True)
class ExperimentGeometry:
    """Path delays, pulse and filter widths, and the splitter.

    ``t_a``/``t_b`` are source-to-splitter delays, ``t_c``/``t_d`` splitter-to-
    detector delays. ``delta_a``/``delta_b`` are pulse widths and
    ``delta_c``/``delta_d`` the filter time widths in front of each detector.
    """

    t_a: float
    t_b: float
    t_c: float
    t_d: float
    delta_a: float = 1.0
    delta_b: float = 1.0
    delta_c: float = 1.0
    delta_d: float = 1.0
    splitter: BeamSplitter = field(default_factory=BeamSplitter)

    def __post_init__(self):
        for mode in INPUT_MODES + OUTPUT_MODES:
            _check_finite(f"t_{mode}", getattr(self, f"t_{mode}"))
            _check_width(f"delta_{mode}", getattr(self, f"delta_{mode}"))

    def delay(self, i: str, j: str) -> float:
        """Composite delay ``t_i + t_j``; order of the mode labels is irrelevant."""
        return getattr(self, f"t_{i}") + getattr(self, f"t_{j}")

    def width(self, mode: str) -> float:
        return getattr(self, f"delta_{mode}")

    def spread(self, i: str, j: str) -> float:
        """Squared effective width ``delta_i**2 + delta_j**2`` of the pair."""
        wi, wj = self.width(i), self.width(j)
        return wi * wi + wj * wj

    def G(self, t, out: str, src: str):
        """Filtered envelope of the ``src`` input pulse seen by the ``out`` detector."""
        return convolve_filter_pulse(self.width(out), self.width(src), self.delay(out, src), t)

    def replace(self, **changes) -> "ExperimentGeometry":
        from dataclasses import replace

        return replace(self, **changes)
