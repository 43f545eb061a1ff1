"""Fluctuation analytics.

The centered level moments of a random tiling are asymptotically Gaussian;
their limit covariance is a double contour integral built from the
H-transform derivative of the boundary measure.  This module evaluates
that covariance by trapezoid quadrature (in the changed variables in which
the kernel collapses to 1/(z - w)^2), accumulates empirical moment and
height-moment statistics from samples, and provides the discrete
sine-kernel predictions for local correlations in the liquid bulk.

Conventions: the moment statistic at height kappa is read off row
k = floor(2 kappa N), whose signature has n = N - floor((k-1)/2) parts;
p_j = sum_i (lambda_i + n - i)^j is accumulated exactly.  The centered
height moment is M_j = sqrt(pi) N^{-(j+1)} (p_{j+1} - E p_{j+1}) / (j+1),
so Cov(M_j1, M_j2) -> pi * C(j1+1, j2+1) / ((j1+1)(j2+1)) with C the level
covariance computed by :func:`clt_covariance`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combinatorics import SignatureSequence
from .errors import NumericalError
from .limitshape import (
    SegmentMeasure,
    density,
    stieltjes_prime,
    transforms,
)
from .schur import shifted_coords

__all__ = [
    "CovarianceKernel",
    "MomentEntry",
    "MomentStats",
    "sine_kernel",
    "clt_covariance",
    "clt_covariance_direct",
    "gff_covariance_prediction",
    "row_for_kappa",
    "moment_values",
    "empirical_moments",
    "gff_moment",
    "gff_covariance",
    "LocalStats",
    "local_correlation",
]


def sine_kernel(p: float, y1: int, y2: int) -> float:
    """Discrete sine kernel sin(p pi (y1-y2)) / (pi (y1-y2)); p on the diagonal."""
    if not 0.0 < p < 1.0:
        raise ValueError("density parameter must lie strictly between 0 and 1")
    d = y1 - y2
    if d == 0:
        return p
    return math.sin(p * math.pi * d) / (math.pi * d)


# ---------------------------------------------------------------------------
# covariance contour integrals


class CovarianceKernel:
    """One-variable factors and the two-variable kernel of the limit
    covariance, in the original contour variables around 0.

    Used for cross-validation and symmetry checks; the production
    quadrature runs in the changed variables (see :func:`clt_covariance`).
    """

    def __init__(self, measure: SegmentMeasure, kappa1: float, kappa2: float):
        self.measure = measure
        self.kappa1 = kappa1
        self.kappa2 = kappa2
        self._tr = transforms(measure)

    def _g(self, z: complex) -> complex:
        # g(z) = (1+z) H'(1+z)
        return (1.0 + z) * self._tr.h_prime(1.0 + z)

    def _g_prime(self, z: complex) -> complex:
        u = 1.0 + z
        hp = self._tr.h_prime(u)
        t = self._tr.t_of_u(u)
        tp = 1.0 / (u * stieltjes_prime(self.measure, t))
        h2 = (tp * u - t) / (u * u) + 1.0 / (u - 1.0) ** 2
        return hp + u * h2

    def _phi(self, z: complex, kappa: float) -> complex:
        u = 1.0 + z
        return (
            (1.0 - kappa) * u / z
            + u * self._tr.h_prime(u)
            + kappa * u / (2.0 + z)
        )

    def f1(self, z: complex) -> complex:
        return self._phi(z, self.kappa1)

    def f2(self, w: complex) -> complex:
        return self._phi(w, self.kappa2)

    def q(self, z: complex, w: complex) -> complex:
        """Kernel d^2/dzdw log(1 - z w (g(z)-g(w))/(z-w)) + 1/(z-w)^2."""
        gz, gw = self._g(z), self._g(w)
        gpz, gpw = self._g_prime(z), self._g_prime(w)
        zw = z - w
        d = (gz - gw) / zw
        dz_d = (gpz * zw - (gz - gw)) / zw**2
        dw_d = (-gpw * zw + (gz - gw)) / zw**2
        dzdw_d = (gpz - gpw) / zw**2 - 2.0 * (-gpw * zw + (gz - gw)) / zw**3
        k = 1.0 - z * w * d
        dz_k = -w * d - z * w * dz_d
        dw_k = -z * d - z * w * dw_d
        dzdw_k = -d - z * dz_d - w * dw_d - z * w * dzdw_d
        return (dzdw_k * k - dz_k * dw_k) / (k * k) + 1.0 / zw**2


def clt_covariance_direct(
    measure: SegmentMeasure,
    kappa1: float,
    j1: int,
    kappa2: float,
    j2: int,
    *,
    eps: float = 1e-2,
    nodes: int = 512,
) -> float:
    """Covariance evaluated in the original variables with the explicit
    two-variable kernel (no change of variables); cross-validation path.

    Contour values of H' and its derivative are precomputed once per
    circle, so the double sum is plain array arithmetic.
    """
    if kappa1 < kappa2:
        kappa1, j1, kappa2, j2 = kappa2, j2, kappa1, j1
    tr = transforms(measure)

    def circle(radius, kappa, j):
        ph = np.exp(2j * np.pi * np.arange(nodes) / nodes)
        z = radius * ph
        u = 1.0 + z
        t = tr.t_on_circle(radius, nodes)
        hp = t / u - 1.0 / (u - 1.0)
        sp = np.array([stieltjes_prime(measure, tv) for tv in t])
        tp = 1.0 / (u * sp)
        h2 = (tp * u - t) / (u * u) + 1.0 / (u - 1.0) ** 2
        g = u * hp
        gp = hp + u * h2
        phi = (1.0 - kappa) * u / z + u * hp + kappa * u / (2.0 + z)
        wgt = (1j * radius * ph) * (2.0 * np.pi / nodes)
        return z, g, gp, phi**j * wgt

    z, gz, gpz, f1 = circle(eps, kappa1, j1)
    w, gw, gpw, f2 = circle(2.0 * eps, kappa2, j2)
    zw = z[:, None] - w[None, :]
    gdiff = gz[:, None] - gw[None, :]
    d = gdiff / zw
    dz_d = (gpz[:, None] * zw - gdiff) / zw**2
    dw_d = (-gpw[None, :] * zw + gdiff) / zw**2
    dzdw_d = (gpz[:, None] - gpw[None, :]) / zw**2 - 2.0 * (
        -gpw[None, :] * zw + gdiff
    ) / zw**3
    k = 1.0 - z[:, None] * w[None, :] * d
    dz_k = -w[None, :] * d - z[:, None] * w[None, :] * dz_d
    dw_k = -z[:, None] * d - z[:, None] * w[None, :] * dw_d
    dzdw_k = (
        -d - z[:, None] * dz_d - w[None, :] * dw_d - z[:, None] * w[None, :] * dzdw_d
    )
    q = (dzdw_k * k - dz_k * dw_k) / (k * k) + 1.0 / zw**2
    total = f1 @ q @ f2 / (2j * np.pi) ** 2
    return float(total.real)


def _tilde_contour(measure: SegmentMeasure, kappa: float, radius: float, n: int):
    """Image contour data: z-tilde nodes, chi-factors, and dz-tilde weights."""
    tr = transforms(measure)
    phases = np.exp(2j * np.pi * np.arange(n) / n)
    us = 1.0 + radius * phases
    ts = tr.t_on_circle(radius, n)
    ztil = 1.0 / ts
    chi = ts - 2.0 * kappa * us / (us * us - 1.0)
    sp = np.array([stieltjes_prime(measure, t) for t in ts])
    tprime = 1.0 / (us * sp)
    dz = -tprime / ts**2 * (1j * radius * phases) * (2.0 * np.pi / n)
    return ztil, chi, dz


def _cov_quad(
    measure: SegmentMeasure,
    kappa1: float,
    j1: int,
    kappa2: float,
    j2: int,
    eps: float,
    nodes: int,
) -> complex:
    z, chi1, dz = _tilde_contour(measure, kappa1, eps, nodes)
    w, chi2, dw = _tilde_contour(measure, kappa2, 2.0 * eps, nodes)
    fac1 = chi1**j1 * dz
    fac2 = chi2**j2 * dw
    ker = 1.0 / (z[:, None] - w[None, :]) ** 2
    total = fac1 @ ker @ fac2
    return total / (2j * np.pi) ** 2


def clt_covariance(
    measure: SegmentMeasure,
    kappa1: float,
    j1: int,
    kappa2: float,
    j2: int,
    *,
    eps: float = 1e-2,
    nodes: int = 1024,
) -> float:
    """Limit covariance of the scaled level moments N^{-j} p_j at heights
    kappa1, kappa2.

    Evaluated in the changed variables z-tilde = S^{(-1)}(log(1+z)), where
    the one-variable factors become the liquid-coordinate chi-functions and
    the kernel is exactly 1/(z-tilde - w-tilde)^2.  The larger kappa rides
    the inner contour.  Two node counts must agree within
    max(1e-7, 1e-4 |value|).
    """
    if not (0.0 < kappa1 <= 1.0 and 0.0 < kappa2 <= 1.0):
        raise ValueError("kappa values must lie in (0, 1]")
    if j1 < 1 or j2 < 1:
        raise ValueError("moment orders must be >= 1")
    if kappa1 < kappa2:
        kappa1, j1, kappa2, j2 = kappa2, j2, kappa1, j1
    v1 = _cov_quad(measure, kappa1, j1, kappa2, j2, eps, nodes)
    v2 = _cov_quad(measure, kappa1, j1, kappa2, j2, eps, 2 * nodes)
    tol = max(1e-7, 1e-4 * abs(v2))
    if abs(v1 - v2) > tol or abs(v2.imag) > tol:
        raise NumericalError(f"covariance quadratures disagree: {v1} vs {v2}")
    return float(v2.real)


def gff_covariance_prediction(
    measure: SegmentMeasure,
    kappa1: float,
    j1: int,
    kappa2: float,
    j2: int,
    **kwargs,
) -> float:
    """Predicted covariance of the centered height moments M_j:
    pi * C(j1+1, j2+1) / ((j1+1)(j2+1))."""
    c = clt_covariance(measure, kappa1, j1 + 1, kappa2, j2 + 1, **kwargs)
    return math.pi * c / ((j1 + 1) * (j2 + 1))


# ---------------------------------------------------------------------------
# empirical statistics


def row_for_kappa(n: int, kappa: float) -> int:
    """Row index floor(2 kappa N), clamped into [1, 2N]."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie strictly between 0 and 1")
    return min(max(int(math.floor(2.0 * kappa * n)), 1), 2 * n)


def moment_values(samples: Sequence[SignatureSequence], kappa: float, j: int):
    """Exact p_j = sum (lambda_i + n - i)^j at row floor(2 kappa N), per sample."""
    if not samples:
        raise ValueError("empty sample set")
    n = samples[0].n
    k = row_for_kappa(n, kappa)
    vals = []
    for seq in samples:
        sig = seq.row_signature(k)
        vals.append(sum(c**j for c in shifted_coords(sig)))
    level = n - (k - 1) // 2
    return vals, level


@dataclass(frozen=True)
class MomentEntry:
    kappa: float
    j: int
    row: int
    level: int
    mean: float
    variance: float
    se_mean: float
    measure_moment: float  # mean of p_j / level^{j+1}
    num_samples: int

    @property
    def kappa_effective(self) -> float:
        """Height whose limit measure the row's level actually discretises.

        The row rule k = floor(2 kappa N) makes the signature level differ
        from (1 - kappa) N by up to one unit; comparisons against limit
        moments converge at O(1/N^2) instead of O(1/N) when made at
        1 - level/N.
        """
        n_total = self.level + (self.row - 1) // 2
        return 1.0 - self.level / n_total


@dataclass(frozen=True)
class MomentStats:
    entries: dict

    def entry(self, kappa: float, j: int) -> MomentEntry:
        return self.entries[(kappa, j)]


def empirical_moments(
    samples: Sequence[SignatureSequence],
    kappas: Sequence[float],
    js: Sequence[int],
) -> MomentStats:
    """Sample means/variances of the exact moment statistics p_j^kappa."""
    if not samples:
        raise ValueError("empty sample set")
    n = samples[0].n
    out = {}
    for kappa in kappas:
        k = row_for_kappa(n, kappa)
        level = n - (k - 1) // 2
        for j in js:
            vals, _ = moment_values(samples, kappa, j)
            arr = np.array([float(v) for v in vals])
            mean = float(arr.mean())
            var = float(arr.var(ddof=1)) if len(arr) > 1 else 0.0
            out[(kappa, j)] = MomentEntry(
                kappa=kappa,
                j=j,
                row=k,
                level=level,
                mean=mean,
                variance=var,
                se_mean=math.sqrt(var / len(arr)) if len(arr) > 1 else 0.0,
                measure_moment=mean / level ** (j + 1),
                num_samples=len(arr),
            )
    return MomentStats(entries=out)


def gff_moment(samples: Sequence[SignatureSequence], kappa: float, j: int):
    """Per-sample centered height moments M_j^kappa and their statistics.

    Returns (values, entry): values is the ndarray of
    sqrt(pi) N^{-(j+1)} (p_{j+1} - mean) / (j+1) per sample.
    """
    vals, level = moment_values(samples, kappa, j + 1)
    n = samples[0].n
    arr = np.array([float(v) for v in vals])
    centered = math.sqrt(math.pi) * (arr - arr.mean()) / ((j + 1) * float(n) ** (j + 1))
    var = float(centered.var(ddof=1))
    entry = MomentEntry(
        kappa=kappa,
        j=j,
        row=row_for_kappa(n, kappa),
        level=level,
        mean=0.0,
        variance=var,
        se_mean=math.sqrt(var / len(arr)),
        measure_moment=float("nan"),
        num_samples=len(arr),
    )
    return centered, entry


def gff_covariance(
    samples: Sequence[SignatureSequence],
    pair1: tuple[float, int],
    pair2: tuple[float, int],
    n_batches: int = 20,
) -> tuple[float, float]:
    """Empirical covariance of two centered height moments with a batch SE."""
    k1, j1 = pair1
    k2, j2 = pair2
    v1, _ = gff_moment(samples, k1, j1)
    v2, _ = gff_moment(samples, k2, j2)
    cov = float(np.mean(v1 * v2))
    batches = np.array_split(v1 * v2, n_batches)
    means = np.array([b.mean() for b in batches if len(b)])
    se = float(means.std(ddof=1) / math.sqrt(len(means)))
    return cov, se


@dataclass(frozen=True)
class LocalStats:
    empirical: float
    se: float
    predicted: float
    density: float
    num_samples: int


def local_correlation(
    samples: Sequence[SignatureSequence],
    measure: SegmentMeasure,
    kappa: float,
    x_anchor: int,
    offsets: Sequence[int],
    q: float = 1.0,
) -> LocalStats:
    """Empirical inclusion frequency of sites {x_anchor + o} among the
    shifted coordinates at row floor(2 kappa N), versus the determinant of
    the sine kernel at the local density."""
    if len(offsets) > 4:
        raise ValueError("at most 4 offsets supported")
    if not samples:
        raise ValueError("empty sample set")
    n = samples[0].n
    dp = density(measure, x_anchor / n, kappa, q)
    if dp.phase != "liquid":
        raise ValueError(
            f"anchor {x_anchor} at kappa={kappa} lies in a frozen region"
        )
    p = dp.density
    sites = [x_anchor + int(o) for o in offsets]
    k = row_for_kappa(n, kappa)
    hits = 0
    for seq in samples:
        coords = set(shifted_coords(seq.row_signature(k)))
        if all(s in coords for s in sites):
            hits += 1
    emp = hits / len(samples)
    se = math.sqrt(max(emp * (1.0 - emp), 1e-12) / len(samples))
    mat = [[sine_kernel(p, a, b) for b in sites] for a in sites]
    pred = float(np.linalg.det(np.array(mat)))
    return LocalStats(
        empirical=emp, se=se, predicted=pred, density=p, num_samples=len(samples)
    )
