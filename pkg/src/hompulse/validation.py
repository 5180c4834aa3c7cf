"""Built-in check matrices: closed forms against the quadrature oracle, and identities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import coincidence as cf
from . import oracle
from .errors import ConfigError
from .pulse_algebra import ExperimentGeometry


@dataclass(frozen=True)
class Check:
    """One matrix row.

    ``compute`` returns ``(value, reference)``. With ``relation == "eq"`` the
    discrepancy is ``|value - reference|``; with ``"le"`` it is how far
    ``value`` exceeds ``reference``.
    """

    name: str
    compute: Callable[[], tuple]
    tolerance: float
    relation: str = "eq"


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    reference: float
    discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance


@dataclass(frozen=True)
class ValidationReport:
    matrix: str
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def max_discrepancy(self) -> float:
        return max((r.discrepancy for r in self.results), default=0.0)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            flag = "PASS" if r.passed else "FAIL"
            out.append(
                f"{flag}  {r.name:<48} value={r.value!r:<24} ref={r.reference!r:<24} "
                f"|diff|={r.discrepancy:.3e} tol={r.tolerance:.1e}"
            )
        failed = sum(not r.passed for r in self.results)
        out.append(
            f"{self.matrix}: {len(self.results) - failed}/{len(self.results)} passed, "
            f"max |diff| = {self.max_discrepancy:.3e}"
        )
        return out


def _geom(t_a, t_b, t_c, t_d, da=1.0, db=1.0, dc=1.0, dd=1.0):
    return ExperimentGeometry(t_a, t_b, t_c, t_d, da, db, dc, dd)


def _hom_row(label, g, tol):
    return Check(f"{label} hom", lambda: (cf.hom_probability(g), oracle.oracle_hom(g).value), tol)


def _marginal_row(label, g, tc, tol):
    return Check(
        f"{label} marginal tau_c={tc}",
        lambda: (float(cf.marginal_probability(g, tc)), oracle.oracle_marginal(g, tc).value),
        tol,
    )


def _windowed_row(label, g, tc, center, tw, tol):
    return Check(
        f"{label} windowed tau_c={tc} window={center}+/-{tw}",
        lambda: (float(cf.windowed_probability(g, tc, center, tw)), oracle.oracle_windowed(g, tc, center, tw).value),
        tol,
    )


def figures_matrix(tol: float = 1e-9) -> list[Check]:
    """Fifty closed-form-vs-quadrature rows over the figure parameter sets."""
    rows = []
    g = _geom(2, 3, 2, 3)
    rows.append(_hom_row("fig2", g, tol))
    rows += [_marginal_row("fig2", g, tc, tol) for tc in (3.0, 4.0, 4.5, 5.0, 6.0)]
    rows.append(_windowed_row("fig2", g, 4.5, 5.5, 0.5, tol))
    rows.append(_windowed_row("fig2", g, 4.0, 5.5, 2.0, tol))
    for delta in (0.2, 1.0, 3.0):
        for t_b in (-2.0, 0.0, 0.5, 2.0):
            rows.append(_hom_row(f"fig4 delta={delta} t_b={t_b}", _geom(0, t_b, 1, 1, dc=delta, dd=delta), tol))
    for t_b in (2.0, 5.0):
        g = _geom(2, t_b, 2, 3)
        rows += [_marginal_row(f"fig5 t_b={t_b}", g, tc, tol) for tc in (4.0, 5.5, 7.0)]
    for dd in (0.1, 1.0, 10.0):
        g = _geom(2, 5, 2, 2, dc=0.1, dd=dd)
        rows += [_marginal_row(f"fig6 delta_d={dd}", g, tc, tol) for tc in (4.0, 5.5)]
    for dd in (0.1, 3.0, 10.0):
        g = _geom(2, 5, 2, 2, dc=3.0, dd=dd)
        rows += [_marginal_row(f"fig7 delta_d={dd}", g, tc, tol) for tc in (4.0, 5.5)]
    for dd in (0.1, 10.0):
        g = _geom(2, 5, 2, 2, dc=3.0, dd=dd)
        rows.append(_hom_row(f"fig8 delta_d={dd}", g, tol))
        rows.append(_marginal_row(f"fig8 delta_d={dd}", g, 7.0, tol))
    for dd in (0.1, 10.0):
        g = _geom(2, 5, 2, 2, dc=3.0, dd=dd)
        for tw in (1.0, 10.0):
            for tc in (4.0, 5.5):
                rows.append(_windowed_row(f"fig9 delta_d={dd}", g, tc, 5.5, tw, tol))
    return rows


def _shifted(g: ExperimentGeometry, s: float) -> ExperimentGeometry:
    return g.replace(t_a=g.t_a + s, t_b=g.t_b + s)


def _swapped_inputs(g: ExperimentGeometry) -> ExperimentGeometry:
    return g.replace(t_a=g.t_b, t_b=g.t_a, delta_a=g.delta_b, delta_b=g.delta_a)


def _swapped_filters(g: ExperimentGeometry) -> ExperimentGeometry:
    return g.replace(delta_c=g.delta_d, delta_d=g.delta_c)


SYMMETRY_GEOMETRIES = (
    _geom(2, 3, 2, 3),
    _geom(0, 2, 1, 1, dc=0.2, dd=0.2),
    _geom(2, 5, 2, 2, dc=3.0, dd=10.0),
    _geom(2, 5, 2, 2, dc=0.1, dd=10.0),
    _geom(-1.5, 0.7, 0.3, 2.2, 0.8, 1.3, 0.5, 2.5),
)


def symmetries_matrix(tol: float = 1e-12) -> list[Check]:
    rows = []
    for k, g in enumerate(SYMMETRY_GEOMETRIES):
        tag = f"geom{k}"
        rows.append(Check(f"{tag} hom a<->b swap", lambda g=g: (cf.hom_probability(g), cf.hom_probability(_swapped_inputs(g))), tol))
        rows.append(Check(f"{tag} hom c<->d width swap", lambda g=g: (cf.hom_probability(g), cf.hom_probability(_swapped_filters(g))), tol))
        s = 3.25
        h = _shifted(g, s)
        tc = g.delay("c", "a") + 0.4
        td = g.delay("d", "b") - 0.3
        center = 0.5 * (g.delay("d", "a") + g.delay("d", "b"))
        rows.append(Check(f"{tag} hom translation", lambda g=g, h=h: (cf.hom_probability(g), cf.hom_probability(h)), tol))
        rows.append(
            Check(
                f"{tag} joint translation",
                lambda g=g, h=h, tc=tc, td=td: (float(cf.joint_probability(g, tc, td)), float(cf.joint_probability(h, tc + s, td + s))),
                tol,
            )
        )
        rows.append(
            Check(
                f"{tag} marginal translation",
                lambda g=g, h=h, tc=tc: (float(cf.marginal_probability(g, tc)), float(cf.marginal_probability(h, tc + s))),
                tol,
            )
        )
        rows.append(
            Check(
                f"{tag} windowed translation",
                lambda g=g, h=h, tc=tc, c=center: (
                    float(cf.windowed_probability(g, tc, c, 1.5)),
                    float(cf.windowed_probability(h, tc + s, c + s, 1.5)),
                ),
                tol,
            )
        )
        for t1, t2 in ((0.5, 1.0), (1.0, 4.0), (4.0, 40.0)):
            rows.append(
                Check(
                    f"{tag} window monotone t_w {t1}->{t2}",
                    lambda g=g, tc=tc, c=center, t1=t1, t2=t2: (
                        float(cf.windowed_probability(g, tc, c, t1)),
                        float(cf.windowed_probability(g, tc, c, t2)),
                    ),
                    tol,
                    relation="le",
                )
            )
    return rows


def limits_matrix() -> list[Check]:
    rows = []
    for k, (ta, da, dc, dd) in enumerate(((0.0, 1.0, 1.0, 1.0), (2.5, 0.3, 2.0, 0.1), (-4.0, 3.0, 0.5, 7.0))):
        g = _geom(ta, ta, 1.0, 2.0, da, da, dc, dd)
        rows.append(Check(f"zero dip {k}", lambda g=g: (cf.hom_probability(g), 0.0), 1e-15))
    rows.append(Check("zero dip oracle", lambda: (oracle.oracle_hom(_geom(0, 0, 1, 1)).value, 0.0), 1e-9))
    for delta in (0.5, 1.0, 2.0):
        g = _geom(0, 20, 1, 1, dc=delta, dd=delta)
        rows.append(Check(f"plateau delta={delta}", lambda g=g, d=delta: (cf.hom_probability(g), 1 / (2 * math.pi * (1 + d * d))), 1e-10))
    rows.append(Check("plateau oracle", lambda: (oracle.oracle_hom(_geom(0, 20, 1, 1)).value, 1 / (4 * math.pi)), 1e-9))
    g = _geom(2, 5, 2, 2, dc=3.0, dd=10.0)
    rows.append(Check("empty window", lambda: (float(cf.windowed_probability(g, 5.0, 5.5, 0.0)), 0.0), 0.0))
    rows.append(
        Check(
            "wide window -> marginal",
            lambda: (float(cf.windowed_probability(g, 5.0, 5.5, 200.0)), float(cf.marginal_probability(g, 5.0))),
            1e-9,
        )
    )
    far = _geom(2, 30, 2, 3)
    for tc, td in ((4.0, 33.0), (32.0, 5.0)):
        rows.append(
            Check(
                f"far pulses no cross term at ({tc}, {td})",
                lambda tc=tc, td=td: (float(cf.no_interference_probability(far, tc, td)), float(cf.joint_probability(far, tc, td))),
                1e-10,
            )
        )
    odd = _geom(-1.0, 1.5, 0.5, 1.0, 0.7, 1.6, 2.0, 0.4)
    for tc, tw in ((0.0, 0.7), (1.5, 2.0), (3.0, 30.0)):
        rows.append(
            Check(
                f"general windowed tau_c={tc} t_w={tw}",
                lambda tc=tc, tw=tw: (float(cf.windowed_probability(odd, tc, 1.0, tw)), oracle.oracle_windowed(odd, tc, 1.0, tw).value),
                1e-9,
            )
        )
    return rows


MATRICES = {
    "figures": figures_matrix,
    "symmetries": symmetries_matrix,
    "limits": limits_matrix,
}


def run_checks(name: str, checks: list[Check], tol: Optional[float] = None) -> ValidationReport:
    results = []
    for check in checks:
        value, reference = check.compute()
        if check.relation == "le":
            discrepancy = max(value - reference, 0.0)
        else:
            discrepancy = abs(value - reference)
        results.append(CheckResult(check.name, value, reference, discrepancy, check.tolerance if tol is None else tol))
    return ValidationReport(name, tuple(results))


def run_validation(matrix_name: str, tol: Optional[float] = None) -> ValidationReport:
    """Run a built-in matrix; ``tol`` overrides every row's tolerance."""
    if matrix_name not in MATRICES:
        raise ConfigError(f"unknown matrix {matrix_name!r}; available: {', '.join(MATRICES)}")
    return run_checks(matrix_name, MATRICES[matrix_name](), tol)
