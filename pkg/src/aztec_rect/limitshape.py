"""Analytic limit-shape machinery.

Boundary profiles enter as measures of two solvable families: unit-density
measures on a union of segments [a_i, b_i] with total length 1, and the
uniform measure of density 1/theta on [0, theta].  From the Stieltjes
transform of such a measure this module computes

* the local particle density inside the rescaled domain, as the argument
  of the distinguished complex root of a polynomial saddle-point system,
* moments of the level measures by contour quadrature,
* the limiting (rescaled) height function,
* the conformal coordinate on the liquid region and its inverse.

Coordinates: (chi, kappa) are domain coordinates scaled by N; the level
measure at height kappa lives in x = chi / (1 - kappa).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError

__all__ = [
    "SegmentMeasure",
    "Transforms",
    "transforms",
    "SaddleSystem",
    "DensityPoint",
    "LiquidPoint",
    "stieltjes",
    "stieltjes_prime",
    "h_prime",
    "saddle_system",
    "density",
    "limit_moment",
    "limit_height",
    "liquid_map",
    "liquid_inverse",
]


@dataclass(frozen=True)
class SegmentMeasure:
    """Boundary measure: density-1 segments, or uniform 1/theta on [0, theta]."""

    segments: tuple[tuple[float, float], ...] | None = None
    theta: int | None = None

    def __post_init__(self):
        if (self.segments is None) == (self.theta is None):
            raise ValueError("specify exactly one of segments / theta")
        if self.theta is not None:
            if not (isinstance(self.theta, int) and self.theta >= 2):
                raise ValueError("theta must be an integer >= 2")
            return
        segs = tuple((float(a), float(b)) for a, b in self.segments)
        object.__setattr__(self, "segments", segs)
        flat = [v for ab in segs for v in ab]
        if any(flat[i] >= flat[i + 1] for i in range(len(flat) - 1)):
            raise ValueError("segments must interlace: a1 < b1 < a2 < ... < bs")
        if abs(sum(b - a for a, b in segs) - 1.0) > 1e-9:
            raise ValueError("segment lengths must sum to 1")

    @classmethod
    def from_segments(cls, segments) -> "SegmentMeasure":
        return cls(segments=tuple(tuple(ab) for ab in segments))

    @classmethod
    def uniform_theta(cls, theta: int) -> "SegmentMeasure":
        return cls(theta=theta)

    @property
    def is_multisegment(self) -> bool:
        return self.segments is not None

    @property
    def support_min(self) -> float:
        return 0.0 if self.theta is not None else self.segments[0][0]

    @property
    def support_max(self) -> float:
        return float(self.theta) if self.theta is not None else self.segments[-1][1]

    def moment(self, k: int) -> float:
        """k-th raw moment of the measure."""
        if self.theta is not None:
            return self.theta**k / (k + 1.0)
        return sum((b ** (k + 1) - a ** (k + 1)) / (k + 1.0) for a, b in self.segments)

    def on_support(self, t: complex, tol: float = 1e-12) -> bool:
        if abs(t.imag) > tol:
            return False
        x = t.real
        if self.theta is not None:
            return -tol <= x <= self.theta + tol
        return any(a - tol <= x <= b + tol for a, b in self.segments)


def stieltjes(measure: SegmentMeasure, t: complex) -> complex:
    """Stieltjes transform int d-measure(s) / (t - s); behaves as 1/t at infinity."""
    t = complex(t)
    if measure.on_support(t):
        raise ValueError(f"t = {t} lies on the support of the measure")
    if measure.theta is not None:
        return -cmath.log(1.0 - measure.theta / t) / measure.theta
    total = 0.0 + 0.0j
    for a, b in measure.segments:
        total += cmath.log((t - a) / (t - b))
    return total


def stieltjes_prime(measure: SegmentMeasure, t: complex) -> complex:
    t = complex(t)
    if measure.on_support(t):
        raise ValueError(f"t = {t} lies on the support of the measure")
    if measure.theta is not None:
        return -1.0 / (t * (t - measure.theta))
    return sum(1.0 / (t - a) - 1.0 / (t - b) for a, b in measure.segments)


# ---------------------------------------------------------------------------
# ascending-coefficient polynomial helpers


def _pmul(a, b):
    return np.convolve(a, b)


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = a.astype(complex).copy()
    out[: len(b)] += b
    return out


def _pval(c, z):
    out = np.zeros_like(np.asarray(z, dtype=complex)) + c[-1]
    for coef in c[-2::-1]:
        out = out * z + coef
    return out


def _pder(c):
    return c[1:] * np.arange(1, len(c))


def _trim(c, rtol=1e-13):
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:1]
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= rtol * scale:
        k -= 1
    return c[:k]


def _deflate(c, root, rtol=1e-8):
    """Divide by (z - root); the remainder must vanish to tolerance."""
    d = c[::-1]  # descending
    out = np.empty(len(d) - 1, dtype=complex)
    acc = d[0]
    for i in range(len(d) - 1):
        out[i] = acc
        acc = acc * root + d[i + 1]
    if abs(acc) > rtol * max(1.0, np.max(np.abs(c))):
        raise NumericalError(f"deflation at z = {root} left remainder {acc}")
    return out[::-1]


def _certified_roots(c_asc, rtol=1e-10):
    """Roots with residual certification |P(z)| <= rtol * ||P|| * max(1,|z|)^deg."""
    c = _trim(np.asarray(c_asc, dtype=complex))
    deg = len(c) - 1
    if deg < 1:
        return np.array([], dtype=complex)
    roots = np.roots(c[::-1])
    dc = _pder(c)
    resid = np.abs(_pval(c, roots))
    for _ in range(3):  # Newton polish, accepting only improving steps
        dv = _pval(dc, roots)
        step = np.where(np.abs(dv) > 0, _pval(c, roots) / np.where(dv == 0, 1, dv), 0.0)
        cand = roots - step
        cand_resid = np.abs(_pval(c, cand))
        better = cand_resid < resid
        roots = np.where(better, cand, roots)
        resid = np.where(better, cand_resid, resid)
    scale = np.max(np.abs(c))
    resid = np.abs(_pval(c, roots))
    bound = rtol * scale * np.maximum(1.0, np.abs(roots)) ** deg
    if np.any(resid > bound):
        raise NumericalError("polynomial root certification failed")
    return roots


# ---------------------------------------------------------------------------
# inverse Stieltjes branch and the H-transform derivative


class Transforms:
    """Branch-tracked transforms of one boundary measure.

    Holds the inverse Stieltjes branch t(u) fixed by t -> infinity as
    u -> 1, and everything derived from it: S(z) = St(1/z), the composed
    inverse S^{(-1)}, the additive free-cumulant transform R, and the
    derivative H' entering moment and covariance integrands.  Contour
    evaluations are cached.
    """

    def __init__(self, measure: SegmentMeasure):
        self.measure = measure
        self.mean = measure.moment(1)
        self._circle_cache: dict[tuple[float, int], np.ndarray] = {}
        if measure.is_multisegment:
            a = np.array([ab[0] for ab in measure.segments])
            b = np.array([ab[1] for ab in measure.segments])
            pa = np.array([1.0], dtype=complex)
            pb = np.array([1.0], dtype=complex)
            for ai in a:
                pa = _pmul(pa, np.array([-ai, 1.0]))
            for bi in b:
                pb = _pmul(pb, np.array([-bi, 1.0]))
            self._pa, self._pb = pa, pb

    # -- inverse branch ----------------------------------------------------

    def _t_seed(self, u: complex) -> complex:
        w = cmath.log(u)
        return 1.0 / w + self.mean

    def _t_candidates(self, u: complex) -> np.ndarray:
        # roots of prod(t - a_i) - u prod(t - b_i)
        c = _padd(self._pa, -u * self._pb)
        return _certified_roots(c, rtol=1e-9)

    def _t_residual_ok(self, t: complex, u: complex) -> bool:
        val = np.prod([(t - a) for a, _ in self.measure.segments]) / np.prod(
            [(t - b) for _, b in self.measure.segments]
        )
        return abs(val - u) <= 1e-7 * max(1.0, abs(u))

    def t_of_u(self, u: complex, seed: complex | None = None) -> complex:
        """Inverse of St(t) = log u on the branch with t(1) = infinity."""
        u = complex(u)
        if self.measure.theta is not None:
            th = self.measure.theta
            return th / (1.0 - u ** (-th))
        if abs(u - 1.0) > 0.25 and seed is None:
            return self._t_homotopy(u)
        guess = seed if seed is not None else self._t_seed(u)
        roots = self._t_candidates(u)
        t = roots[np.argmin(np.abs(roots - guess))]
        if not self._t_residual_ok(t, u):
            raise NumericalError(f"branch tracking failed at u = {u}")
        return complex(t)

    def _t_homotopy(self, u: complex, steps: int = 64) -> complex:
        path = 1.0 + (u - 1.0) * np.linspace(1.0 / steps, 1.0, steps)
        t = self._t_seed(path[0])
        for uk in path:
            roots = self._t_candidates(uk)
            t = complex(roots[np.argmin(np.abs(roots - t))])
        if not self._t_residual_ok(t, u):
            raise NumericalError(f"branch tracking failed at u = {u}")
        return t

    # -- derived transforms -------------------------------------------------

    def s(self, z: complex) -> complex:
        """Moment generating series S(z) = St(1/z)."""
        return stieltjes(self.measure, 1.0 / z)

    def s_inv(self, w: complex) -> complex:
        """Composed inverse of S, the branch with S_inv(0) = 0."""
        return 1.0 / self.t_of_u(cmath.exp(w))

    def r_transform(self, w: complex) -> complex:
        """Additive free-cumulant transform R(w) = 1/S_inv(w) - 1/w."""
        return self.t_of_u(cmath.exp(w)) - 1.0 / w

    def h_prime(self, u: complex) -> complex:
        """H'(u) = t(u)/u - 1/(u - 1), analytic across u = 1."""
        u = complex(u)
        if abs(u - 1.0) < 1e-5:
            alpha = self.mean
            beta2 = self.measure.moment(2)
            return (alpha - 0.5) + (u - 1.0) * (
                beta2 - alpha * alpha - alpha + 5.0 / 12.0
            )
        return self.t_of_u(u) / u - 1.0 / (u - 1.0)

    def t_on_circle(self, radius: float, n: int) -> np.ndarray:
        """t(u) on the contour u = 1 + radius * exp(2 pi i k / n), cached."""
        key = (float(radius), int(n))
        if key not in self._circle_cache:
            us = 1.0 + radius * np.exp(2j * np.pi * np.arange(n) / n)
            if self.measure.theta is not None:
                ts = np.array([self.t_of_u(u) for u in us])
            else:
                ts = np.empty(n, dtype=complex)
                prev = None
                for k, u in enumerate(us):
                    prev = self.t_of_u(u, seed=prev)
                    ts[k] = prev
            self._circle_cache[key] = ts
        return self._circle_cache[key]

    def h_prime_on_circle(self, radius: float, n: int) -> np.ndarray:
        us = 1.0 + radius * np.exp(2j * np.pi * np.arange(n) / n)
        return self.t_on_circle(radius, n) / us - 1.0 / (us - 1.0)


@lru_cache(maxsize=64)
def transforms(measure: SegmentMeasure) -> Transforms:
    return Transforms(measure)


def h_prime(measure: SegmentMeasure, u: complex) -> complex:
    return transforms(measure).h_prime(u)


# ---------------------------------------------------------------------------
# density via the polynomial saddle system


@dataclass(frozen=True)
class SaddleSystem:
    """Cleared-denominator polynomial whose distinguished root gives the
    density; coefficients ascending in z, spurious factors removed."""

    x: complex
    kappa: float
    q: float
    coeffs: tuple[complex, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def saddle_system(
    measure: SegmentMeasure, x: complex, kappa: float, q: float
) -> SaddleSystem:
    """Build the polynomial in z obtained by substituting
    t = (1-kappa) x + kappa z/(z-1) - kappa q z/(1+q z)
    into exp(St(t)) = z and clearing denominators."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie strictly between 0 and 1")
    if q <= 0:
        raise ValueError("q must be positive")
    xk = x * (1.0 - kappa)
    d = np.array([-1.0, 1.0 - q, q], dtype=complex)  # (z-1)(1+qz)
    t_num = np.array(
        [-xk, xk * (1.0 - q) + kappa * (1.0 + q), xk * q], dtype=complex
    )  # t(z) * d(z)
    if measure.is_multisegment:
        prod_a = np.array([1.0], dtype=complex)
        prod_b = np.array([1.0], dtype=complex)
        for a, b in measure.segments:
            prod_a = _pmul(prod_a, _padd(t_num, -a * d))
            prod_b = _pmul(prod_b, _padd(t_num, -b * d))
        poly = _padd(prod_a, -np.concatenate(([0.0], prod_b)))
        poly = _deflate(poly, 1.0)  # z = 1 is always a spurious root
    else:
        th = measure.theta
        geom = np.ones(th, dtype=complex)
        lead = np.zeros(th + 2, dtype=complex)
        lead[th] = th
        lead[th + 1] = th * q
        poly = _padd(_pmul(t_num, geom), -lead)
        if q == 1.0 and th % 2 == 0:
            poly = _deflate(poly, -1.0)  # extra spurious factor (z + 1)
    return SaddleSystem(x=x, kappa=float(kappa), q=float(q), coeffs=tuple(poly))


@dataclass(frozen=True)
class DensityPoint:
    chi: float
    kappa: float
    x: float
    z_plus: complex
    density: float
    phase: str  # "liquid" | "frozen0" | "frozen1"


def density(
    measure: SegmentMeasure,
    chi: float,
    kappa: float,
    q: float = 1.0,
    *,
    delta: float | None = None,
    liquid_tol: float = 1e-7,
) -> DensityPoint:
    """Local particle density at (chi, kappa).

    The distinguished root is identified by perturbing x into the upper
    half-plane (the exp-Stieltjes branch then has negative imaginary part)
    and is polished back on the real-x polynomial, so liquid points return
    the exact complex root and frozen points an exactly real one.
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie strictly between 0 and 1")
    x = chi / (1.0 - kappa)
    if delta is None:
        delta = 1e-9 * (1.0 + abs(x))
    marked = saddle_system(measure, x + 1j * delta, kappa, q)
    roots = _certified_roots(np.array(marked.coeffs))
    if measure.theta is not None:
        # clearing (1 - theta/t) = z^{-theta} hides the principal-branch
        # requirement theta |Arg z| <= pi; drop the wrapped spurious pairs
        keep = np.abs(np.angle(roots)) <= math.pi / measure.theta + 1e-6
        if not keep.any():
            raise NumericalError(f"no admissible saddle root at x = {x}")
        roots = roots[keep]
    z0 = roots[np.argmin(roots.imag)]
    real_sys = saddle_system(measure, x, kappa, q)
    roots_real = _certified_roots(np.array(real_sys.coeffs))
    zm = complex(roots_real[np.argmin(np.abs(roots_real - z0))])
    if zm.imag == 0.0:
        dens = 0.0 if zm.real > 0 else 1.0
        z_plus = zm
    else:
        z_plus = zm if zm.imag > 0 else zm.conjugate()
        dens = abs(cmath.phase(z_plus)) / math.pi
    dens = min(max(dens, 0.0), 1.0)
    if dens <= liquid_tol:
        phase, dens_out = "frozen0", dens
    elif dens >= 1.0 - liquid_tol:
        phase, dens_out = "frozen1", dens
    else:
        phase, dens_out = "liquid", dens
    return DensityPoint(
        chi=float(chi), kappa=float(kappa), x=x, z_plus=z_plus,
        density=dens_out, phase=phase,
    )


# ---------------------------------------------------------------------------
# limit moments and limit height


def _moment_quad(
    measure: SegmentMeasure, kappa: float, j: int, q: float, radius: float, n: int
) -> complex:
    tr = transforms(measure)
    us = 1.0 + radius * np.exp(2j * np.pi * np.arange(n) / n)
    hp = tr.h_prime_on_circle(radius, n)
    qprime = (kappa * q / (1.0 + q * us) + hp) / (1.0 - kappa)
    f = (us * qprime + us / (us - 1.0)) ** (j + 1) / us
    return np.sum(f * (us - 1.0)) / (n * (j + 1))


def limit_moment(
    measure: SegmentMeasure,
    kappa: float,
    j: int,
    q: float = 1.0,
    *,
    radius: float = 1e-2,
    nodes: int = 4096,
    check_tol: float = 1e-8,
) -> float:
    """j-th moment of the limiting level measure at height kappa.

    Contour integral of (z Q'(z) + z/(z-1))^{j+1} / (2 (j+1) pi i z) around
    z = 1; trapezoid quadrature at two resolutions with an agreement check.
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie strictly between 0 and 1")
    if j < 0:
        raise ValueError("moment order must be non-negative")
    v1 = _moment_quad(measure, kappa, j, q, radius, nodes)
    v2 = _moment_quad(measure, kappa, j, q, radius, 2 * nodes)
    if abs(v1 - v2) > check_tol or abs(v2.imag) > check_tol:
        raise NumericalError(
            f"moment quadrature resolutions disagree: {v1} vs {v2}"
        )
    return float(v2.real)


def limit_height(
    measure: SegmentMeasure,
    nu_ratio: float,
    chi: float,
    kappa: float,
    q: float = 1.0,
) -> float:
    """Limiting rescaled height at (chi, kappa):
    2 (2 + nu - kappa - chi - 2 (1-kappa) * tail), where tail is the mass of
    the level measure to the right of chi/(1-kappa)."""
    x0 = chi / (1.0 - kappa)
    xmax = measure.support_max / (1.0 - kappa) + 0.25
    lo = min(max(x0, 0.0), xmax)

    def dens(xv: float) -> float:
        return density(measure, xv * (1.0 - kappa), kappa, q).density

    tail, _ = quad(dens, lo, xmax, limit=200, epsabs=1e-8)
    return 2.0 * (2.0 + nu_ratio - kappa - chi - 2.0 * (1.0 - kappa) * tail)


# ---------------------------------------------------------------------------
# liquid-region coordinate


@dataclass(frozen=True)
class LiquidPoint:
    t: complex
    chi: float
    kappa: float


def _exp_equation(measure: SegmentMeasure, chi: float, kappa: float, t: complex):
    """Value and derivative of p(t) = chi - t - kappa (1/(E-1) + 1/(E+1)),
    E = exp(-St(t))."""
    s = stieltjes(measure, t)
    sp = stieltjes_prime(measure, t)
    e = cmath.exp(-s)
    val = chi - t - kappa * (1.0 / (e - 1.0) + 1.0 / (e + 1.0))
    der = -1.0 - kappa * sp * e * (1.0 / (e - 1.0) ** 2 + 1.0 / (e + 1.0) ** 2)
    return val, der


def liquid_map(measure: SegmentMeasure, chi: float, kappa: float) -> LiquidPoint:
    """Upper-half-plane coordinate of a liquid point (uniform measure, q=1)."""
    dp = density(measure, chi, kappa, 1.0)
    if dp.phase != "liquid":
        raise ValueError(f"({chi}, {kappa}) is not in the liquid region")
    z = dp.z_plus
    t = (chi * z * z + 2.0 * kappa * z - chi) / (z * z - 1.0)
    if t.imag < 0:
        t = t.conjugate()
    for _ in range(60):
        val, der = _exp_equation(measure, chi, kappa, t)
        step = val / der
        t = t - step
        if abs(step) < 1e-14 * max(1.0, abs(t)):
            break
    val, _ = _exp_equation(measure, chi, kappa, t)
    if abs(val) > 1e-10 * max(1.0, abs(t)) or t.imag <= 0:
        raise NumericalError(
            f"liquid coordinate refinement failed at ({chi}, {kappa})"
        )
    chi_l, kappa_l = liquid_inverse(measure, t)
    return LiquidPoint(t=complex(t), chi=chi_l, kappa=kappa_l)


def liquid_inverse(measure: SegmentMeasure, t: complex) -> tuple[float, float]:
    """Inverse of the liquid coordinate: (chi, kappa) from t in the upper
    half-plane, by the reflection formulas in exp(St)."""
    t = complex(t)
    if t.imag == 0.0:
        raise ValueError("t must be off the real axis")
    if t.imag < 0:
        t = t.conjugate()
    s = stieltjes(measure, t)
    sb = s.conjugate()
    et, etb = cmath.exp(s), cmath.exp(sb)
    tb = t.conjugate()
    # Solving (e^{2S(t)}-1)(t-chi) = 2 e^{S(t)} kappa together with its
    # complex conjugate as a linear system in (chi, kappa):
    denom = (et - etb) * (1.0 + et * etb)
    chi = t + et * (etb * etb - 1.0) * (t - tb) / denom
    kappa = -(et * et - 1.0) * (etb * etb - 1.0) * (t - tb) / (2.0 * denom)
    if abs(chi.imag) > 1e-9 * max(1.0, abs(chi)) or abs(kappa.imag) > 1e-9:
        raise NumericalError(f"inverse coordinate not real at t = {t}")
    return float(chi.real), float(kappa.real)
