"""Closed-form coincidence probabilities for a |1>_a |1>_b input.

All closed forms assume a balanced splitter and carry the overall factor 1/2
of the two-photon normalization, so that

    joint_probability = (G(tc,c,b) G(td,d,a) - G(tc,c,a) G(td,d,b))**2 / 2

and the integrated quantities follow from it by Gaussian integration. Values
are raw probability densities; no plotting scale factor is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import DomainError, UnsupportedConfigurationError
from .pulse_algebra import ExperimentGeometry

QUANTITIES = ("joint", "no_interference", "hom", "marginal", "windowed")

_SQRT2 = math.sqrt(2.0)
_PI32 = math.pi**1.5

# quadrature settings for the general windowed path
_WINDOW_EPSABS = 1e-14
_WINDOW_EPSREL = 1e-12
_WINDOW_SIGMAS = 12.0


def erf(x):
    """Error function ``2/sqrt(pi) * integral_0^x exp(-t**2) dt``; scalars or arrays."""
    return special.erf(x)


def require_balanced(geom: ExperimentGeometry) -> None:
    if not geom.splitter.is_balanced:
        s = geom.splitter
        raise UnsupportedConfigurationError(
            f"closed forms assume a balanced splitter, got r={s.reflectance!r}, t={s.transmittance!r}"
        )


def _path_products(geom, tau_c, tau_d):
    # b->c with a->d, and a->c with b->d
    first = geom.G(tau_c, "c", "b") * geom.G(tau_d, "d", "a")
    second = geom.G(tau_c, "c", "a") * geom.G(tau_d, "d", "b")
    return first, second


def joint_probability(geom: ExperimentGeometry, tau_c, tau_d):
    """Density for one photon at detector c at ``tau_c`` and one at d at ``tau_d``."""
    require_balanced(geom)
    first, second = _path_products(geom, tau_c, tau_d)
    return 0.5 * (first - second) ** 2


def no_interference_probability(geom: ExperimentGeometry, tau_c, tau_d):
    """:func:`joint_probability` with the cross term between the two paths dropped."""
    require_balanced(geom)
    first, second = _path_products(geom, tau_c, tau_d)
    return 0.5 * (first**2 + second**2)


def interference_term(geom: ExperimentGeometry, tau_c, tau_d):
    """``no_interference_probability - joint_probability``, evaluated directly."""
    require_balanced(geom)
    first, second = _path_products(geom, tau_c, tau_d)
    return first * second


def hom_probability(geom: ExperimentGeometry) -> float:
    """Coincidence probability with both detector times integrated out.

    Depends on the input delays only through ``t_a - t_b``; the detector
    delays drop out. Vanishes exactly for identical pulses at zero delay.
    """
    require_balanced(geom)
    a2, b2 = geom.delta_a**2, geom.delta_b**2
    c2, d2 = geom.delta_c**2, geom.delta_d**2
    direct = 1.0 / math.sqrt((b2 + c2) * (a2 + d2))
    crossed = 1.0 / math.sqrt((a2 + c2) * (b2 + d2))
    sc = (a2 + b2) + 2.0 * c2
    sd = (a2 + b2) + 2.0 * d2
    dt = geom.t_a - geom.t_b
    overlap = 4.0 * math.exp(-2.0 * dt * dt * (a2 + b2 + c2 + d2) / (sc * sd)) / math.sqrt(sc * sd)
    # roundoff can leave a tiny negative next to a perfect dip
    return max((direct + crossed - overlap) / (4.0 * math.pi), 0.0)


def marginal_probability(geom: ExperimentGeometry, tau_c, *, interference: bool = True):
    """Joint probability integrated over the d-detector time ``tau_d``.

    The cross term integrates to a Gaussian overlap of the two d-arm pulses,
    ``exp(-(t_a - t_b)**2 / S) / sqrt(pi * S)`` with ``S`` the sum of their
    squared widths, so ``t_d`` drops out entirely.
    """
    require_balanced(geom)
    sca, scb = geom.spread("c", "a"), geom.spread("c", "b")
    sda, sdb = geom.spread("d", "a"), geom.spread("d", "b")
    xa = tau_c - geom.delay("c", "a")
    xb = tau_c - geom.delay("c", "b")
    via_b = _SQRT2 * np.exp(-2.0 * xb**2 / scb) / (scb * math.sqrt(sda))
    via_a = _SQRT2 * np.exp(-2.0 * xa**2 / sca) / (sca * math.sqrt(sdb))
    value = via_b + via_a
    if interference:
        s = sda + sdb
        dt = geom.t_a - geom.t_b
        h = xa**2 / sca + xb**2 / scb + dt * dt / s
        value = value - 4.0 * np.exp(-h) / math.sqrt(sca * scb * s)
    return np.maximum(value / (4.0 * _PI32), 0.0)


def window_kernel(t1, t2, delta):
    """``erf(sqrt(2/delta)(t2 + t1)) - erf(sqrt(2/delta)(t2 - t1))``.

    Equal to ``sqrt(8/(pi delta))`` times the integral of ``exp(-2 x**2 / delta)``
    over ``(t2 - t1, t2 + t1)``. Written without the ``x/|x|`` sign factors,
    which makes ``x = 0`` harmless.
    """
    scale = math.sqrt(2.0 / delta)
    return special.erf(scale * (t2 + t1)) - special.erf(scale * (t2 - t1))


def is_window_fast_path(geom: ExperimentGeometry) -> bool:
    """Whether :func:`windowed_probability` can use its erf closed form."""
    return geom.splitter.is_balanced and geom.delta_a == 1.0 and geom.delta_b == 1.0


def windowed_probability(geom: ExperimentGeometry, tau_c, window_center, t_w, *, interference: bool = True):
    """Joint probability integrated over ``tau_d`` in ``window_center -/+ t_w``.

    Unit input widths get an erf closed form. Every delay setting reduces to
    ``t_b = t_c = t_d = 0`` by a time translation, so only the widths matter
    for that choice. Anything else is integrated numerically.
    """
    if not (math.isfinite(t_w) and t_w >= 0):
        raise DomainError(f"window half-width must be finite and >= 0, got {t_w!r}")
    require_balanced(geom)
    if t_w == 0:
        return np.zeros_like(np.asarray(tau_c, dtype=float))[()]
    if is_window_fast_path(geom):
        return _windowed_unit_inputs(geom, tau_c, window_center, t_w, interference)
    integrand = joint_probability if interference else no_interference_probability
    return _windowed_by_quadrature(geom, tau_c, window_center, t_w, integrand)


def _windowed_unit_inputs(geom, tau_c, window_center, t_w, interference):
    delay = geom.t_a - geom.t_b
    x = tau_c - geom.t_c - geom.t_b
    w = window_center - geom.t_d - geom.t_b
    c = 1.0 + geom.delta_c**2
    d = 1.0 + geom.delta_d**2
    value = np.exp(-2.0 * x**2 / c) * window_kernel(t_w, delay - w, d)
    value = value + np.exp(-2.0 * (x - delay) ** 2 / c) * window_kernel(t_w, w, d)
    if interference:
        h = (x**2 + (x - delay) ** 2) / c + delay * delay / (2.0 * d)
        value = value - 2.0 * np.exp(-h) * window_kernel(2.0 * t_w, delay - 2.0 * w, 4.0 * d)
    return np.maximum(value / (4.0 * _SQRT2 * _PI32 * c * math.sqrt(d)), 0.0)


def _windowed_by_quadrature(geom, tau_c, window_center, t_w, integrand):
    centers = [geom.delay("d", "a"), geom.delay("d", "b")]
    reach = _WINDOW_SIGMAS * math.sqrt(max(geom.spread("d", "a"), geom.spread("d", "b")))
    lo = max(window_center - t_w, min(centers) - reach)
    hi = min(window_center + t_w, max(centers) + reach)
    points = [p for p in centers if lo < p < hi]

    def one(tc):
        if lo >= hi:
            return 0.0
        val, _ = integrate.quad(
            lambda td: float(integrand(geom, tc, td)),
            lo,
            hi,
            points=points or None,
            epsabs=_WINDOW_EPSABS,
            epsrel=_WINDOW_EPSREL,
            limit=500,
        )
        return max(val, 0.0)

    tau = np.asarray(tau_c, dtype=float)
    if tau.ndim == 0:
        return one(float(tau))
    return np.array([one(float(tc)) for tc in tau.ravel()]).reshape(tau.shape)


@dataclass(frozen=True)
class CoincidenceQuery:
    """Detection times, and the d-detector window for windowed queries."""

    tau_c: Optional[float] = None
    tau_d: Optional[float] = None
    window_center: Optional[float] = None
    window_halfwidth: Optional[float] = None

    def __post_init__(self):
        if self.window_halfwidth is not None and not self.window_halfwidth >= 0:
            raise DomainError(f"window half-width must be >= 0, got {self.window_halfwidth!r}")


def evaluate(quantity: str, geom: ExperimentGeometry, query: CoincidenceQuery) -> float:
    """Dispatch one of :data:`QUANTITIES` on a geometry and query."""
    if quantity == "joint":
        return float(joint_probability(geom, query.tau_c, query.tau_d))
    if quantity == "no_interference":
        return float(no_interference_probability(geom, query.tau_c, query.tau_d))
    if quantity == "hom":
        return hom_probability(geom)
    if quantity == "marginal":
        return float(marginal_probability(geom, query.tau_c))
    if quantity == "windowed":
        return float(windowed_probability(geom, query.tau_c, query.window_center, query.window_halfwidth))
    raise DomainError(f"unknown quantity {quantity!r}; expected one of {', '.join(QUANTITIES)}")
