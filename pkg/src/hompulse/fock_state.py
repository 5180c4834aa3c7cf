"""Binomial expansion of a two-mode number-state input through the splitter.

Each input block ``c_n^a c_m^b |n>_a |m>_b`` becomes a sum over ``(p, q)`` of
monomials ``(c^dag)^(p+q) (d^dag)^(n+m-p-q)`` weighted by binomial coefficients
and products of filtered envelopes. Monomials are kept as exponent pairs;
detection only ever projects onto number states.

Normalization is ``1 / sqrt(2 n! m!)`` per non-vacuum block, with splitter
amplitudes entering relative to the balanced value ``1/sqrt(2)``. That matches
the 1/2 carried by :mod:`hompulse.coincidence`, so squared (1,1) amplitudes of
``|1>_a |1>_b`` reproduce its joint probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, TruncationError, UnsupportedInputError
from .pulse_algebra import ExperimentGeometry

NORM_TOL = 1e-12


@dataclass(frozen=True)
class FockInput:
    """Number-state superpositions in modes a and b, truncated in total photon number."""

    coeffs_a: tuple
    coeffs_b: tuple
    truncation: int

    def __init__(self, coeffs_a: Sequence[complex], coeffs_b: Sequence[complex], truncation: int | None = None):
        ca = tuple(complex(c) for c in coeffs_a)
        cb = tuple(complex(c) for c in coeffs_b)
        for name, cs in (("coeffs_a", ca), ("coeffs_b", cb)):
            if not cs:
                raise DomainError(f"{name} is empty")
            if not all(math.isfinite(abs(c)) for c in cs):
                raise DomainError(f"{name} has non-finite entries")
            norm = sum(abs(c) ** 2 for c in cs)
            if abs(norm - 1.0) > NORM_TOL:
                raise DomainError(f"{name} has squared norm {norm!r}, expected 1")
        top = max(_highest(ca), _highest(cb))
        if truncation is None:
            truncation = _highest(ca) + _highest(cb)
        if truncation < top:
            raise DomainError(f"truncation {truncation} is below the highest occupied photon number {top}")
        object.__setattr__(self, "coeffs_a", ca)
        object.__setattr__(self, "coeffs_b", cb)
        object.__setattr__(self, "truncation", int(truncation))

    @classmethod
    def number_states(cls, n: int, m: int, truncation: int | None = None) -> "FockInput":
        """The product state ``|n>_a |m>_b``."""
        ca = [0.0] * n + [1.0]
        cb = [0.0] * m + [1.0]
        return cls(ca, cb, truncation)

    def blocks(self):
        """Nonzero ``(n, m, c_n^a * c_m^b)`` triples in ascending order."""
        for n, ca in enumerate(self.coeffs_a):
            for m, cb in enumerate(self.coeffs_b):
                if ca != 0 and cb != 0:
                    yield n, m, ca * cb


def _highest(cs):
    nonzero = [k for k, c in enumerate(cs) if c != 0]
    return nonzero[-1] if nonzero else 0


def block_normalization(n: int, m: int) -> float:
    if n + m == 0:
        return 1.0
    return 1.0 / math.sqrt(2.0 * math.factorial(n) * math.factorial(m))


@dataclass(frozen=True)
class OutputTerm:
    """One ``(p, q)`` monomial of the expanded output state.

    ``weight(tau_c, tau_d)`` is ``prefactor * binomial * sign`` times the
    envelope product, where every c-arm envelope is evaluated at ``tau_c`` and
    every d-arm envelope at ``tau_d``.
    """

    n: int
    m: int
    p: int
    q: int
    binomial: int
    sign: int
    prefactor: complex
    geometry: ExperimentGeometry

    @property
    def power_c(self) -> int:
        return self.p + self.q

    @property
    def power_d(self) -> int:
        return self.n + self.m - self.p - self.q

    def envelope_product(self, tau_c, tau_d):
        g = self.geometry
        # c-arm factors first, then d-arm, so equal factor sets give equal bits
        c_part = g.G(tau_c, "c", "a") ** self.p * g.G(tau_c, "c", "b") ** self.q
        d_part = g.G(tau_d, "d", "a") ** (self.n - self.p) * g.G(tau_d, "d", "b") ** (self.m - self.q)
        return c_part * d_part

    def weight(self, tau_c, tau_d):
        return (self.prefactor * (self.binomial * self.sign)) * self.envelope_product(tau_c, tau_d)


def expand_output(state: FockInput, geom: ExperimentGeometry) -> list[OutputTerm]:
    """All output monomials for ``state`` sent through ``geom``.

    An a photon goes to c with amplitude ``t`` and to d with ``-r``; a b photon
    to c with ``r`` and to d with ``t``.
    """
    over = [(n, m) for n, m, _ in state.blocks() if n + m > state.truncation]
    if over:
        raise TruncationError(
            f"blocks {over} exceed the total photon-number truncation {state.truncation}", over
        )
    s = geom.splitter
    if s.is_balanced:
        r = t = 1.0
    else:
        r = math.sqrt(2.0) * s.reflectance
        t = math.sqrt(2.0) * s.transmittance
    terms = []
    for n, m, coeff in state.blocks():
        base = coeff * block_normalization(n, m)
        for p in range(n + 1):
            for q in range(m + 1):
                amp = t**p * r ** (n - p) * r**q * t ** (m - q)
                terms.append(
                    OutputTerm(
                        n=n,
                        m=m,
                        p=p,
                        q=q,
                        binomial=math.comb(n, p) * math.comb(m, q),
                        sign=(-1) ** (n - p),
                        prefactor=base * amp,
                        geometry=geom,
                    )
                )
    return terms


def project_11(terms: Sequence[OutputTerm], tau_c, tau_d):
    """Coefficient of ``c^dag d^dag |0, 0>`` among ``terms``."""
    total = 0j
    for term in terms:
        if term.power_c == 1 and term.power_d == 1:
            total = total + term.weight(tau_c, tau_d)
    return total


def coincidence_amplitude_11(state: FockInput, geom: ExperimentGeometry, tau_c, tau_d):
    """Amplitude for one photon at c (time ``tau_c``) and one at d (``tau_d``).

    Only blocks with ``n + m == 2`` contribute. For a balanced splitter this is

        [sqrt(2) c2a c0b G(tc,c,a) G(td,d,a)
         + c1a c1b (G(tc,c,b) G(td,d,a) - G(tc,c,a) G(td,d,b))
         - sqrt(2) c0a c2b G(tc,c,b) G(td,d,b)] / sqrt(2)

    which equals ``-project_11(expand_output(...))``. Other splitters are
    projected from the expansion directly, with the same sign convention.
    """
    blocks = list(state.blocks())
    big = [(n, m) for n, m, _ in blocks if n + m > 2]
    if big:
        raise UnsupportedInputError(f"only n + m <= 2 components are supported, found {big}")
    if not geom.splitter.is_balanced:
        return -project_11(expand_output(state, geom), tau_c, tau_d)

    c = dict(((n, m), coeff) for n, m, coeff in blocks)
    gca, gcb = geom.G(tau_c, "c", "a"), geom.G(tau_c, "c", "b")
    gda, gdb = geom.G(tau_d, "d", "a"), geom.G(tau_d, "d", "b")
    amp = 0j
    if (2, 0) in c:
        amp = amp + c[(2, 0)] * (gca * gda)
    if (1, 1) in c:
        amp = amp + c[(1, 1)] * (gcb * gda - gca * gdb) / math.sqrt(2.0)
    if (0, 2) in c:
        amp = amp - c[(0, 2)] * (gcb * gdb)
    return amp

