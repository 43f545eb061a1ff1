"""Acceptance suite: one test per criterion, each printing a pass line.

Monte Carlo criteria use fixed seeds and sample counts so failures are
reproducible; tolerances are pinned here, not configurable.  Heavy sample
batches come from session fixtures in conftest (criteria 7-10 share them).
Run with `pytest tests/test_acceptance.py -v -s`.
"""

import collections
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as scipy_stats

from aztec_rect.combinatorics import (
    DomainSpec,
    enumerate_tilings,
    height_function,
)
from aztec_rect.fluct import (
    gff_covariance,
    gff_covariance_prediction,
    local_correlation,
)
from aztec_rect.frozen import (
    boundary_point,
    dual_of_parametric,
    dual_point,
    tangency_points_kappa0,
    trace_boundary,
)
from aztec_rect.limitshape import (
    SegmentMeasure,
    density,
    limit_height,
    limit_moment,
    liquid_inverse,
    liquid_map,
)
from aztec_rect.sampler import (
    BetaWeight,
    SamplerConfig,
    count_tilings,
    sample_batch,
    sample_tiling,
    tiling_weight,
)
from aztec_rect.schur import dim, pr_prob, st_prob
from conftest import AZTEC_MEASURE, TWOSEG_MEASURE
from test_frozen import random_segments, tangency_report
from test_limitshape import aztec_density_closed_form

import random


def report(num, message):
    print(f"\nACCEPTANCE {num:2d} PASS — {message}")


def test_criterion_01_exact_counting():
    """|enumerate_tilings| equals 2^{N(N+1)/2} dim(omega, N) for every
    domain with N <= 4 and Omega_N <= 8; runtime under 2 minutes."""
    start = time.monotonic()
    domains = []
    for n in range(1, 5):
        for rest in itertools.combinations(range(2, 9), n - 1):
            domains.append(DomainSpec(n, (1, *rest)))
    assert len(domains) >= 30
    total = 0
    for dom in domains:
        tilings = enumerate_tilings(dom)
        assert len(tilings) == count_tilings(dom), dom
        assert len({t.pairs for t in tilings}) == len(tilings), dom
        total += len(tilings)
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"counting took {elapsed:.0f}s"
    report(1, f"{len(domains)} domains, {total} tilings enumerated and "
              f"counted exactly in {elapsed:.0f}s")


def test_criterion_02_measure_exactness():
    """Chain probability of every enumerated sequence equals the
    q-weighted measure exactly, q in {1/3, 1, 3}."""
    checked = 0
    for dom in (DomainSpec(2, (1, 3)), DomainSpec(3, (1, 2, 5))):
        assert dom.m in (1, 2)
        for q in (Fraction(1, 3), Fraction(1), Fraction(3)):
            beta = BetaWeight.from_q(q)
            total = Fraction(0)
            for seq in enumerate_tilings(dom):
                p = Fraction(1)
                for level in range(seq.n, 0, -1):
                    p *= st_prob(seq.mu(level), seq.nu(level), level, beta)
                    if level > 1:
                        p *= pr_prob(seq.nu(level), seq.mu(level - 1))
                assert p == tiling_weight(seq, q)
                total += p
                checked += 1
            assert total == 1
    report(2, f"{checked} chain probabilities equal the q-measure exactly "
              f"(rational arithmetic)")


def test_criterion_03_sampler_uniformity():
    """R(2,(1,3),1): q=1 chi-square over the 16 tilings has p > 1e-3 at
    1.6e5 samples; q=3 frequencies match 3^{#horizontal} within 3 sigma."""
    start = time.monotonic()
    dom = DomainSpec(2, (1, 3))
    n_samples = 160_000
    cfg = SamplerConfig(domain=dom, master_seed=2024, num_samples=n_samples)
    counts = collections.Counter(s.pairs for s in sample_batch(cfg))
    assert len(counts) == 16
    expected = n_samples / 16
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    p_value = scipy_stats.chi2.sf(chi2, 15)
    assert p_value > 1e-3, f"chi-square p = {p_value}"

    cfg3 = SamplerConfig(domain=dom, q=Fraction(3), master_seed=99,
                         num_samples=n_samples)
    counts3 = collections.Counter(s.pairs for s in sample_batch(cfg3))
    for seq in enumerate_tilings(dom):
        p = float(tiling_weight(seq, Fraction(3)))
        freq = counts3.get(seq.pairs, 0) / n_samples
        se = math.sqrt(p * (1 - p) / n_samples)
        assert abs(freq - p) <= 3 * se, (seq.pairs, freq, p)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"uniformity run took {elapsed:.0f}s"
    report(3, f"chi-square p = {p_value:.3f} (uniform), q=3 frequencies "
              f"within 3 sigma, {elapsed:.0f}s")


def test_criterion_04_arctic_circle():
    """Aztec density matches the closed form to 1e-9 on a 100x100 grid;
    the traced boundary satisfies the circle equation to 1e-10."""
    worst = 0.0
    for i in range(100):
        chi = (i + 0.5) / 100
        for j in range(100):
            kappa = (j + 0.5) / 100
            got = density(AZTEC_MEASURE, chi, kappa).density
            worst = max(worst, abs(got - aztec_density_closed_form(chi, kappa)))
    assert worst < 1e-9, f"max density deviation {worst:.2e}"

    circle_resid = 0.0
    for seg in trace_boundary(AZTEC_MEASURE, 1.0, 2000):
        for chi, kappa in seg:
            circle_resid = max(
                circle_resid,
                abs((2 * chi - 1) ** 2 + (2 * kappa - 1) ** 2 - 1),
            )
    assert circle_resid < 1e-10, f"circle residual {circle_resid:.2e}"
    report(4, f"density vs closed form: {worst:.1e}; "
              f"circle residual {circle_resid:.1e}")


def _phase_transition_kappa(measure, chi):
    lo, hi = 1e-6, 1 - 1e-6
    assert density(measure, chi, lo).phase == "liquid"
    assert density(measure, chi, hi).phase != "liquid"
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if density(measure, chi, mid).phase == "liquid":
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_criterion_05_theta_curves():
    """Phase-transition boundary satisfies kappa^2 + chi(chi-2) = 0 to
    1e-8 for theta=2 and the sextic 27 k^4 + (k^2 + (chi-4) chi)^3 = 0 to
    1e-6 for theta=4."""
    theta2 = SegmentMeasure.uniform_theta(2)
    worst2 = 0.0
    for chi in np.concatenate([np.linspace(0.1, 0.85, 9),
                               np.linspace(1.15, 1.9, 9)]):
        k = _phase_transition_kappa(theta2, float(chi))
        worst2 = max(worst2, abs(k * k + chi * (chi - 2)))
    assert worst2 < 1e-8, f"theta=2 residual {worst2:.2e}"

    theta4 = SegmentMeasure.uniform_theta(4)
    worst4 = 0.0
    for chi in np.concatenate([np.linspace(0.2, 1.7, 9),
                               np.linspace(2.3, 3.8, 9)]):
        k = _phase_transition_kappa(theta4, float(chi))
        worst4 = max(worst4, abs(27 * k**4 + (k * k + (chi - 4) * chi) ** 3))
    assert worst4 < 1e-6, f"theta=4 residual {worst4:.2e}"
    report(5, f"theta=2 residual {worst2:.1e} (tol 1e-8); "
              f"theta=4 residual {worst4:.1e} (tol 1e-6)")


def test_criterion_06_frozen_geometry():
    """Random 2- and 3-segment data: tangency to the 2s+2 lines
    (distance < 1e-6, no crossing), kappa=0 touch points are the roots of
    prod (x-a)/(x-b) = +-1 to 1e-8, duality round trips close to 1e-6."""
    rnd = random.Random(1234)
    measures = [random_segments(rnd, 2), random_segments(rnd, 2),
                random_segments(rnd, 3), random_segments(rnd, 3)]
    for m in measures:
        s = len(m.segments)
        for (kind, line), (dist, crossed) in tangency_report(m).items():
            assert dist < 1e-6, (m.segments, kind, line, dist)
            assert not crossed, (m.segments, kind, line)
        roots = tangency_points_kappa0(m)
        assert len(roots) == 2 * s - 1
        for r in roots:
            ratio = np.prod([(r - a) / (r - b) for a, b in m.segments])
            assert min(abs(ratio - 1), abs(ratio + 1)) < 1e-8
            chi, kappa = boundary_point(m, r)
            assert abs(chi - r) < 1e-8 and abs(kappa) < 1e-8
        for q in (0.5, 1.0, 2.0):
            checked = 0
            while checked < 25:
                t = rnd.uniform(-4.0, 4.0)
                if abs(t) < 0.05:
                    continue
                try:
                    xd, yd = dual_of_parametric(
                        lambda u: boundary_point(m, u, q), t)
                    x2, y2 = dual_point(m, 1.0 / t, q)
                except Exception:
                    continue
                checked += 1
                assert abs(xd - x2) < 1e-6 and abs(yd - y2) < 1e-6
    report(6, f"{len(measures)} random segment configurations: tangency, "
              f"kappa=0 roots, duality round trips all within tolerance")


@pytest.mark.slow
def test_criterion_07_height_lln(aztec100_samples):
    """Aztec N=100, 20 samples: sup over a 21x21 interior grid of
    |h_emp/N - limit_height| <= 0.1; exact-mode spot check at N=30."""
    start = time.monotonic()
    n = 100
    dom = DomainSpec.aztec(n)
    samples = aztec100_samples[:20]
    worst = 0.0
    for chi in np.linspace(0.1, 0.9, 21):
        for kappa in np.linspace(0.1, 0.9, 21):
            i, j = round(chi * n), round(kappa * n)
            emp = np.mean([height_function(s, dom, i, j) for s in samples]) / n
            lim = limit_height(AZTEC_MEASURE, 0.0, i / n, j / n)
            worst = max(worst, abs(emp - lim))
    assert worst <= 0.1, f"sup deviation {worst:.3f}"

    # exact-arithmetic spot check at N=30 (single sample, loose bound)
    dom30 = DomainSpec.aztec(30)
    seq30 = sample_tiling(SamplerConfig(domain=dom30, master_seed=5), 0)
    worst30 = 0.0
    for chi in np.linspace(0.2, 0.8, 7):
        for kappa in np.linspace(0.2, 0.8, 7):
            i, j = round(chi * 30), round(kappa * 30)
            emp = height_function(seq30, dom30, i, j) / 30
            lim = limit_height(AZTEC_MEASURE, 0.0, i / 30, j / 30)
            worst30 = max(worst30, abs(emp - lim))
    assert worst30 <= 0.25, f"exact spot check deviation {worst30:.3f}"
    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    report(7, f"sup |h_emp/N - h_lim| = {worst:.3f} (tol 0.1, N=100); "
              f"exact N=30 spot check {worst30:.3f}; {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_08_moment_lln(aztec100_samples, twoseg100_samples):
    """Empirical level-measure moments (j <= 3, kappa in {1/4, 1/2})
    within 0.02 of the limit moments, Aztec and a 2-segment domain at
    N=100.  Limits are evaluated at the effective height of the sampled
    row (1 - level/N), the finite-N mapping of the same limit object."""
    from aztec_rect.fluct import empirical_moments

    worst = 0.0
    for measure, samples in ((AZTEC_MEASURE, aztec100_samples),
                             (TWOSEG_MEASURE, twoseg100_samples)):
        stats = empirical_moments(samples, [0.25, 0.5], [1, 2, 3])
        for (kappa, j), entry in stats.entries.items():
            lim = limit_moment(measure, entry.kappa_effective, j)
            dev = abs(entry.measure_moment - lim)
            worst = max(worst, dev)
            assert dev <= 0.02, (measure.segments, kappa, j, dev)
    report(8, f"12 moment comparisons within 0.02 (worst {worst:.4f})")


@pytest.mark.slow
def test_criterion_09_clt(aztec80_samples):
    """Aztec N=80, 2000 samples: empirical covariances of the centered
    height moments M_j^kappa within 3 SE of the contour-quadrature
    predictions, (j, kappa) in {(1,1/2), (2,1/2), (1,1/4)}."""
    start = time.monotonic()
    pairs = [(0.5, 1), (0.5, 2), (0.25, 1)]
    lines = []
    for (k1, j1), (k2, j2) in itertools.combinations_with_replacement(pairs, 2):
        emp, se = gff_covariance(aztec80_samples, (k1, j1), (k2, j2))
        pred = gff_covariance_prediction(AZTEC_MEASURE, k1, j1, k2, j2)
        z = (emp - pred) / se
        assert abs(z) <= 3.0, ((k1, j1), (k2, j2), emp, pred, se, z)
        lines.append(f"M({j1},{k1})xM({j2},{k2}): z={z:+.2f}")
    elapsed = time.monotonic() - start
    assert elapsed < 1800.0
    report(9, "; ".join(lines))


@pytest.mark.slow
def test_criterion_10_local_statistics(aztec100_samples):
    """Aztec N=100 at the center: site occupation (m=1) and adjacent-pair
    inclusion (m=2) within 3 SE of the sine-kernel determinants."""
    lines = []
    for offsets in ([0], [0, 1]):
        stats = local_correlation(
            aztec100_samples, AZTEC_MEASURE, 0.5, 50, offsets)
        z = (stats.empirical - stats.predicted) / stats.se
        assert abs(z) <= 3.0, (offsets, stats)
        lines.append(f"m={len(offsets)}: emp={stats.empirical:.4f} "
                     f"pred={stats.predicted:.4f} z={z:+.2f}")
    # deterministic frozen anchor (far outside the support) errors out
    with pytest.raises(ValueError):
        local_correlation(aztec100_samples, AZTEC_MEASURE, 0.5, 130, [0])
    report(10, "; ".join(lines))


def test_criterion_11_liquid_map():
    """Round-trip and reality invariants of the liquid coordinate hold to
    1e-9 on 100 random points for two measure families."""
    rnd = random.Random(77)
    for measure in (AZTEC_MEASURE, TWOSEG_MEASURE):
        hits = 0
        while hits < 100:
            chi = rnd.uniform(measure.support_min, measure.support_max)
            kappa = rnd.uniform(0.02, 0.98)
            if density(measure, chi, kappa).phase != "liquid":
                continue
            hits += 1
            lp = liquid_map(measure, chi, kappa)
            assert lp.t.imag > 0
            assert abs(lp.chi - chi) < 1e-9 and abs(lp.kappa - kappa) < 1e-9
        done = 0
        while done < 100:
            t = complex(rnd.uniform(-2, 4), rnd.uniform(0.05, 3))
            chi, kappa = liquid_inverse(measure, t)  # reality asserted inside
            if not 0 < kappa < 1:
                continue
            done += 1
            assert abs(liquid_map(measure, chi, kappa).t - t) \
                < 1e-9 * max(1.0, abs(t))
    report(11, "liquid-map round trips and reality invariants at 1e-9, "
               "100 points per family, both directions")
