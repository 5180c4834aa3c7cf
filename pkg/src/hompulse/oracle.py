"""Brute-force quadrature of the coincidence integrals.

Everything here integrates :func:`hompulse.coincidence.joint_probability`
numerically and never touches the closed forms, so it can serve as ground truth
for them.

The engine is a globally adaptive Gauss-Kronrod (7, 15) scheme. The per-panel
error estimate is the raw ``|K15 - G7|`` difference, floored at a roundoff
level, which overestimates the true error of the Kronrod value by orders of
magnitude on smooth integrands. Panels are summed in left-to-right order with
``math.fsum`` so results are bitwise reproducible.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .coincidence import joint_probability, require_balanced
from .errors import ConvergenceError, DomainError
from .pulse_algebra import ExperimentGeometry

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327,
])

# full 15-node layout: negative half, centre, positive half
_NODES = np.concatenate([-_XK[:-1], [0.0], _XK[-2::-1]])
_KRONROD = np.concatenate([_WK[:-1], [_WK[-1]], _WK[-2::-1]])
_GAUSS = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance, subdivision budget and truncation box for the oracle."""

    absolute_tolerance: float = 1e-11
    max_subdivisions: int = 2000
    truncation_sigmas: float = 12.0

    def __post_init__(self):
        if not self.absolute_tolerance > 0:
            raise DomainError(f"absolute_tolerance must be > 0, got {self.absolute_tolerance!r}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}")
        if not self.truncation_sigmas >= 8:
            raise DomainError(f"truncation_sigmas must be >= 8, got {self.truncation_sigmas!r}")


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float


def _panel(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = np.broadcast_to(np.asarray(f(c + h * _NODES), dtype=float), _NODES.shape)
    if not np.all(np.isfinite(y)):
        raise DomainError(f"integrand is not finite on [{a!r}, {b!r}]")
    k = h * float(_KRONROD @ y)
    g = h * float(_GAUSS @ y)
    resabs = h * float(_KRONROD @ np.abs(y))
    return k, max(abs(k - g), 50.0 * _EPS * resabs)


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    breakpoints: Iterable[float] = (),
) -> QuadResult:
    """Adaptive quadrature of ``f`` over ``[lower, upper]``.

    ``f`` is called with 15-element arrays of abscissae and must return values
    of the same shape. ``breakpoints`` inside the interval seed the initial
    partition; pass the centres of narrow peaks so that no peak can fall
    between the nodes of a coarse panel.

    Raises :class:`ConvergenceError` carrying the best estimate if the
    reported error cannot be brought below ``spec.absolute_tolerance``.
    """
    if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
        raise DomainError(f"need finite lower < upper, got [{lower!r}, {upper!r}]")
    edges = sorted({lower, upper, *(p for p in breakpoints if lower < p < upper)})
    heap = []
    for a, b in zip(edges, edges[1:]):
        val, err = _panel(f, a, b)
        heap.append((-err, a, b, val))
    heapq.heapify(heap)
    tol = spec.absolute_tolerance
    running = math.fsum(-item[0] for item in heap)
    splits = 0
    while running > tol:
        if splits >= spec.max_subdivisions:
            value, error = _collect(heap)
            raise ConvergenceError(
                f"error estimate {error:.3e} above tolerance {tol:.3e} after {splits} subdivisions",
                value,
                error,
            )
        worst = heapq.heappop(heap)
        neg_err, a, b = worst[:3]
        m = 0.5 * (a + b)
        if not a < m < b:
            heapq.heappush(heap, worst)
            value, error = _collect(heap)
            raise ConvergenceError(f"panel [{a!r}, {b!r}] cannot be bisected further", value, error)
        left = _panel(f, a, m)
        right = _panel(f, m, b)
        heapq.heappush(heap, (-left[1], a, m, left[0]))
        heapq.heappush(heap, (-right[1], m, b, right[0]))
        running += left[1] + right[1] + neg_err
        splits += 1
        # the running sum drifts; confirm against an exact sum before stopping
        if running <= tol:
            running = math.fsum(-item[0] for item in heap)
    return QuadResult(*_collect(heap))


def _collect(heap):
    panels = sorted(heap, key=lambda item: item[1])
    return math.fsum(p[3] for p in panels), math.fsum(-p[0] for p in panels)


def _support(geom: ExperimentGeometry, out: str, sigmas: float):
    """Box and breakpoints covering both pulses as seen at detector ``out``."""
    centers = [geom.delay(out, src) for src in ("a", "b")]
    widths = [math.sqrt(geom.spread(out, src)) for src in ("a", "b")]
    reach = sigmas * max(widths)
    lo, hi = min(centers) - reach, max(centers) + reach
    breaks = [c + k * w for c, w in zip(centers, widths) for k in (-3, -1, 0, 1, 3)]
    breaks.append(0.5 * (centers[0] + centers[1]))
    return lo, hi, breaks


def oracle_marginal(geom: ExperimentGeometry, tau_c: float, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Joint probability integrated over the d-detector time."""
    require_balanced(geom)
    lo, hi, breaks = _support(geom, "d", spec.truncation_sigmas)
    return integrate_1d(lambda td: joint_probability(geom, tau_c, td), lo, hi, spec, breaks)


def oracle_windowed(
    geom: ExperimentGeometry,
    tau_c: float,
    window_center: float,
    t_w: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> QuadResult:
    """Joint probability integrated over the window ``window_center -/+ t_w``.

    The window is clipped to the truncation box; the discarded tails are far
    below any tolerance this engine accepts.
    """
    if not t_w >= 0:
        raise DomainError(f"window half-width must be >= 0, got {t_w!r}")
    require_balanced(geom)
    box_lo, box_hi, breaks = _support(geom, "d", spec.truncation_sigmas)
    lo = max(window_center - t_w, box_lo)
    hi = min(window_center + t_w, box_hi)
    if t_w == 0 or lo >= hi:
        return QuadResult(0.0, 0.0)
    return integrate_1d(lambda td: joint_probability(geom, tau_c, td), lo, hi, spec, breaks)


def oracle_hom(geom: ExperimentGeometry, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Joint probability integrated over both detector times (iterated)."""
    require_balanced(geom)
    c_lo, c_hi, c_breaks = _support(geom, "c", spec.truncation_sigmas)
    d_lo, d_hi, d_breaks = _support(geom, "d", spec.truncation_sigmas)
    length = c_hi - c_lo
    inner_spec = QuadratureSpec(
        spec.absolute_tolerance / (2.0 * length), spec.max_subdivisions, spec.truncation_sigmas
    )
    worst_inner = [0.0]

    def outer(tcs):
        out = np.empty_like(tcs)
        for k, tc in enumerate(tcs):
            res = integrate_1d(lambda td: joint_probability(geom, tc, td), d_lo, d_hi, inner_spec, d_breaks)
            out[k] = res.value
            worst_inner[0] = max(worst_inner[0], res.error)
        return out

    outer_spec = QuadratureSpec(0.5 * spec.absolute_tolerance, spec.max_subdivisions, spec.truncation_sigmas)
    res = integrate_1d(outer, c_lo, c_hi, outer_spec, c_breaks)
    return QuadResult(res.value, res.error + length * worst_inner[0])
