"""Frozen-boundary curves and their projective duals.

For a unit-density boundary measure on segments [a_i, b_i] the frozen
boundary C admits a rational parametrization in a real parameter t built
from Pi(t) = prod (t - a_i)/(t - b_i) and its logarithmic derivative.  Its
projective dual C^dual has degree 2s and a one-line parametrization that
extends to the q-weighted measure; for q != 1 the primal curve is
recovered numerically by dedualizing the dual with analytic derivatives.

All parametrizations here are evaluated through cleared-denominator
polynomial forms, so the apparent singularities at t = a_i, b_i (where the
curve is tangent to the vertical lines chi = a_i, chi = b_i) are exact
removable points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NumericalError
from .limitshape import SegmentMeasure, _certified_roots, _padd, _pder, _pmul, _pval

__all__ = [
    "CurveSample",
    "DualSample",
    "curve_sample",
    "boundary_point",
    "dual_sample",
    "dual_point",
    "dual_of_parametric",
    "trace_boundary",
    "tangency_points_kappa0",
    "dual_curve_residual",
]


@dataclass(frozen=True)
class CurveSample:
    """One primal-curve sample: parameter, Pi(t), log-derivative, point."""

    t: float
    pi: complex
    log_deriv: complex
    chi: float
    kappa: float


@dataclass(frozen=True)
class DualSample:
    theta: float
    x: float
    y: float
    q: float


@lru_cache(maxsize=64)
def _curve_polys(measure: SegmentMeasure):
    """Polynomials A, B, A-B, A+B, W = A'B - AB' (ascending, real)."""
    if not measure.is_multisegment:
        raise ValueError("parametric frozen boundary needs a segment measure")
    pa = np.array([1.0])
    pb = np.array([1.0])
    for a, b in measure.segments:
        pa = _pmul(pa, np.array([-a, 1.0]))
        pb = _pmul(pb, np.array([-b, 1.0]))
    w = _padd(_pmul(_pder(pa), pb), -_pmul(pa, _pder(pb)))
    return pa, pb, _padd(pa, -pb), _padd(pa, pb), w


def curve_sample(measure: SegmentMeasure, t: float) -> CurveSample:
    """Primal frozen-boundary point at parameter t (uniform weight q = 1).

    chi = t + A B (A^2 - B^2) / ((A^2 + B^2) W),
    kappa = -(A^2 - B^2)^2 / (2 (A^2 + B^2) W),
    where A, B are the segment polynomials and W = A'B - AB'.  These are
    the cleared forms of the Pi / log-derivative parametrization.
    """
    pa, pb, pm, pp, w = _curve_polys(measure)
    a = complex(_pval(pa.astype(complex), t))
    b = complex(_pval(pb.astype(complex), t))
    mv = complex(_pval(pm.astype(complex), t))  # A - B, exact coefficients
    pv = complex(_pval(pp.astype(complex), t))  # A + B
    wv = complex(_pval(w.astype(complex), t))
    if abs(wv) < 1e-12 * (1.0 + abs(t)) ** max(0, len(w) - 1):
        raise NumericalError(f"log-derivative vanishes near t = {t}")
    s2 = a * a + b * b
    chi = t + a * b * mv * pv / (s2 * wv)
    kappa = -((mv * pv) ** 2) / (2.0 * s2 * wv)
    pi = a / b if b != 0 else complex("inf")
    logd = wv / (a * b) if a * b != 0 else complex("inf")
    return CurveSample(
        t=float(t), pi=pi, log_deriv=logd, chi=float(chi.real), kappa=float(kappa.real)
    )


@lru_cache(maxsize=64)
def _dual_polys(measure: SegmentMeasure):
    """Dual-plane polynomials Pa(th) = prod(1 - a_i th), Pb, and
    Pm~ = (Pa - Pb)/th (exact division)."""
    pa = np.array([1.0])
    pb = np.array([1.0])
    for a, b in measure.segments:
        pa = _pmul(pa, np.array([1.0, -a]))
        pb = _pmul(pb, np.array([1.0, -b]))
    pm = _padd(pa, -pb)
    assert abs(pm[0]) < 1e-12
    return pa, pb, pm[1:]


def _dual_y(measure: SegmentMeasure, theta: float, q: float):
    """y(theta) on the dual curve and its analytic derivative dy/dtheta.

    y = (1+q) Pa Pb / (Pm~ (q Pa + Pb)) with Pm~ = (Pa - Pb)/theta; the
    representation is regular at theta = 0 where y = 1.
    """
    pa, pb, pm = _dual_polys(measure)
    den_poly = _padd(q * pa, pb)
    num = (1.0 + q) * _pmul(pa, pb)
    den = _pmul(pm, den_poly)
    nv = complex(_pval(num.astype(complex), theta))
    dv = complex(_pval(den.astype(complex), theta))
    if abs(dv) < 1e-12 * max(1.0, abs(nv)):
        raise NumericalError(f"dual parametrization has a pole near theta = {theta}")
    npv = complex(_pval(_pder(num.astype(complex)), theta))
    dpv = complex(_pval(_pder(den.astype(complex)), theta))
    y = nv / dv
    yp = (npv * dv - nv * dpv) / (dv * dv)
    return y.real, yp.real


def dual_sample(measure: SegmentMeasure, theta: float, q: float = 1.0) -> DualSample:
    """Sample of the dual curve; satisfies the degree-2s implicit relation
    checked by :func:`dual_curve_residual`."""
    if q <= 0:
        raise ValueError("q must be positive")
    y, _ = _dual_y(measure, float(theta), float(q))
    return DualSample(theta=float(theta), x=float(theta), y=float(y), q=float(q))


def dual_point(measure: SegmentMeasure, theta: float, q: float = 1.0) -> tuple[float, float]:
    """Point (theta, y) of the dual curve of the frozen boundary."""
    ds = dual_sample(measure, theta, q)
    return ds.x, ds.y


def dual_of_parametric(
    curve: Callable[[float], tuple[float, float]],
    t: float,
    derivative: Callable[[float], tuple[float, float]] | None = None,
) -> tuple[float, float]:
    """Dual point of a parametric plane curve at parameter t.

    Uses the tangent line in the pairing normalization x x* + y y* = 1:
    x* = y' / (x y' - y x'), y* = -x' / (x y' - y x').  Derivatives by
    central differences with step 1e-6 (1 + |t|) unless supplied.
    """
    x, y = curve(t)
    if derivative is not None:
        xp, yp = derivative(t)
    else:
        h = 1e-6 * (1.0 + abs(t))
        x2, y2 = curve(t + h)
        x1, y1 = curve(t - h)
        xp, yp = (x2 - x1) / (2 * h), (y2 - y1) / (2 * h)
    den = x * yp - y * xp
    if abs(den) < 1e-12 * (1.0 + abs(x) + abs(y)):
        raise NumericalError(f"dual undefined at t = {t} (inflection or cusp)")
    return yp / den, -xp / den


def boundary_point(
    measure: SegmentMeasure, t: float, q: float = 1.0
) -> tuple[float, float]:
    """(chi, kappa) on the frozen boundary at parameter t.

    q = 1 uses the closed parametrization; otherwise the point is obtained
    by dedualizing the q-dual curve at theta = 1/t with analytic
    derivatives.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if q == 1.0:
        cs = curve_sample(measure, t)
        return cs.chi, cs.kappa
    if t == 0.0:
        raise NumericalError("parameter t = 0 maps to theta = infinity")
    theta = 1.0 / t
    y, yp = _dual_y(measure, theta, q)
    den = theta * yp - y
    if abs(den) < 1e-12 * (1.0 + abs(y)):
        raise NumericalError(f"dedualization degenerate at t = {t}")
    return yp / den, -1.0 / den


def tangency_points_kappa0(measure: SegmentMeasure) -> list[float]:
    """All chi where the boundary touches kappa = 0: the real roots of
    prod (x - a_i) = +- prod (x - b_i); there are exactly 2s - 1 of them."""
    pa, pb, pm, pp, _ = _curve_polys(measure)
    s = len(measure.segments)
    roots: list[float] = []
    for poly in (pm, pp):
        rr = _certified_roots(poly.astype(complex), rtol=1e-9)
        for r in rr:
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r)):
                roots.append(float(r.real))
    roots.sort()
    if len(roots) != 2 * s - 1:
        raise NumericalError(
            f"expected {2 * s - 1} kappa=0 tangency points, found {len(roots)}"
        )
    return roots


def trace_boundary(
    measure: SegmentMeasure,
    q: float = 1.0,
    resolution: int = 400,
) -> list[list[tuple[float, float]]]:
    """Polyline(s) of the frozen boundary, clipped to
    [a_1, b_s] x [0, 1].

    The parameter grid covers the full real line through the
    compactification u = t / (1 + |t|); parameters inside exclusion
    neighbourhoods of poles or of critical points of the parametrization
    are skipped and the polyline is split there.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    lo, hi = measure.support_min, measure.support_max
    segments: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    slack = 1e-9

    def flush():
        nonlocal current
        if len(current) >= 2:
            segments.append(current)
        current = []

    for u in np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, resolution):
        t = u / (1.0 - abs(u))
        try:
            chi, kappa = boundary_point(measure, t, q)
        except NumericalError:
            flush()
            continue
        if not (lo - slack <= chi <= hi + slack and -slack <= kappa <= 1.0 + slack):
            flush()
            continue
        pt = (min(max(chi, lo), hi), min(max(kappa, 0.0), 1.0))
        if current and abs(pt[0] - current[-1][0]) + abs(pt[1] - current[-1][1]) > 0.25:
            flush()
        current.append(pt)
    flush()
    return segments


def dual_curve_residual(
    measure: SegmentMeasure, x: float, y: float, q: float = 1.0
) -> float:
    """Residual of the degree-2s implicit equation of the dual curve,
    y (Pa - Pb)(q Pa + Pb) - (1+q) x Pa Pb = 0, normalised by the
    magnitude of its two terms."""
    pa, pb, _ = _dual_polys(measure)
    pav = float(_pval(pa.astype(complex), x).real)
    pbv = float(_pval(pb.astype(complex), x).real)
    lhs = y * (pav - pbv) * (q * pav + pbv)
    rhs = (1.0 + q) * x * pav * pbv
    scale = max(1.0, abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale
