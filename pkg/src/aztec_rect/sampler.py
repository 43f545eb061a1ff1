"""Exact sequential sampling of random tilings and exact tiling counts.

A tiling is grown as the chain mu^(N) -> nu^(N) -> mu^(N-1) -> ... ->
nu^(1): strip steps add a 0/1 bump to every coordinate, projection steps
drop to the next shorter signature.  Each step is sampled coordinate by
coordinate; the conditional probabilities are ratios of determinant
partition sums, so one strip step costs O(n) exact determinants instead of
a 2^n enumeration.

Two arithmetic modes:

* ``exact`` -- big-integer determinants and bit-exact Bernoulli draws
  against rational conditionals.  Byte-identical streams for identical
  (seed, index) on any platform.  The default and the correctness
  reference.
* ``float`` -- the same conditionals evaluated through a Lagrange-basis
  reformulation of the determinants (well-scaled rows, rank-one inverse
  updates).  Only permitted for N > 40, flagged approximate, and validated
  against exact mode for small sizes.

Random words come from SplitMix64 streams derived from (master_seed,
sample index), so samples are independent and reproducible regardless of
how they are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .combinatorics import DomainSpec, SignatureSequence, boundary_signature
from .schur import (
    BetaWeight,
    Signature,
    _branch_rows,
    _vdm_sign,
    det_bareiss,
    dim,
    shifted_coords,
    signature_from_shifted,
    strip_partition_sum,
)

__all__ = [
    "RngStream",
    "SamplerConfig",
    "sample_st_step",
    "sample_pr_step",
    "sample_tiling",
    "sample_batch",
    "count_tilings",
    "tiling_weight",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class RngStream:
    """Deterministic 64-bit word stream for one (master_seed, index) pair."""

    def __init__(self, master_seed: int, index: int):
        if not 0 <= index:
            raise ValueError("index must be non-negative")
        self._state = _mix64((master_seed + _GOLDEN * (index + 1)) & _MASK)

    def next_word(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix64(self._state)

    def next_unit(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_word() >> 11) * 2.0**-53

    def bernoulli_fraction(self, p: Fraction) -> bool:
        """Exact Bernoulli(p) by base-2^64 digit comparison; unbiased."""
        num, den = p.numerator, p.denominator
        if num <= 0:
            return False
        if num >= den:
            return True
        while True:
            num <<= 64
            digit, num = divmod(num, den)
            w = self.next_word()
            if w < digit:
                return True
            if w > digit or num == 0:
                return False


@dataclass(frozen=True)
class SamplerConfig:
    domain: DomainSpec
    q: Fraction = Fraction(1)
    master_seed: int = 0
    num_samples: int = 1
    arithmetic_mode: str = "exact"

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))
        if self.q <= 0:
            raise ValueError("q must be positive")
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.arithmetic_mode not in ("exact", "float"):
            raise ValueError("arithmetic_mode must be 'exact' or 'float'")
        if self.arithmetic_mode == "float" and self.domain.n <= 40:
            raise ValueError("float mode is only permitted for N > 40")

    @property
    def beta(self) -> BetaWeight:
        return BetaWeight.from_q(self.q)


# ---------------------------------------------------------------------------
# exact path


def sample_st_step(
    mu: Sequence[int], n: int, beta: BetaWeight, rng: RngStream
) -> Signature:
    """One exact strip step: nu distributed as st_prob(mu, . , n, beta)."""
    mu = tuple(mu)
    if len(mu) != n:
        raise ValueError("signature length must equal n")
    l = shifted_coords(mu, n)
    prefix: list[int] = []
    z_cur = strip_partition_sum(l, prefix, beta)
    for _ in range(n):
        z_one = strip_partition_sum(l, prefix + [1], beta)
        if rng.bernoulli_fraction(z_one / z_cur):
            prefix.append(1)
            z_cur = z_one
        else:
            prefix.append(0)
            z_cur = z_cur - z_one
    return tuple(mu[i] + prefix[i] for i in range(n))


def _pr_intervals(nu: Sequence[int]) -> list[tuple[int, int]]:
    l = shifted_coords(nu)
    return [(l[i + 1], l[i] - 1) for i in range(len(nu) - 1)]


def sample_pr_step(nu: Sequence[int], n: int, rng: RngStream) -> Signature:
    """One exact projection step: mu distributed as pr_prob(nu, .)."""
    nu = tuple(nu)
    if len(nu) != n:
        raise ValueError("signature length must equal n")
    if n < 2:
        raise ValueError("projection requires n >= 2")
    intervals = _pr_intervals(nu)
    m = len(intervals)
    sign = _vdm_sign(m)

    def det_for(prefix: list[int], clip: tuple[int, int] | None) -> int:
        ivs = list(intervals)
        if clip is not None:
            ivs[len(prefix)] = clip
        return sign * det_bareiss(_branch_rows(ivs, prefix))

    prefix: list[int] = []
    z_cur = det_for(prefix, None)
    for i in range(m):
        lo, hi = intervals[i]
        while lo < hi:
            mid = (lo + hi) // 2
            z_mid = det_for(prefix, (lo, mid))
            if rng.bernoulli_fraction(Fraction(z_mid, z_cur)):
                hi, z_cur = mid, z_mid
            else:
                lo, z_cur = mid + 1, z_cur - z_mid
        prefix.append(lo)
    return signature_from_shifted(prefix)


def _sample_tiling_exact(cfg: SamplerConfig, index: int) -> SignatureSequence:
    rng = RngStream(cfg.master_seed, index)
    beta = cfg.beta
    n = cfg.domain.n
    mu = boundary_signature(cfg.domain)
    pairs: list[Signature] = []
    for level in range(n, 0, -1):
        nu = sample_st_step(mu, level, beta, rng)
        pairs.append(mu)
        pairs.append(nu)
        if level > 1:
            mu = sample_pr_step(nu, level, rng)
    return SignatureSequence(tuple(pairs))


# ---------------------------------------------------------------------------
# float fast path
#
# Work in the Lagrange basis attached to the current node set: with cardinal
# polynomials ell_m, the partition-sum determinant divided by V(nodes)
# becomes det[L_k(ell_m)], whose rows are unit vectors mixed with rows of
# interpolation coefficients.  Probabilities are ratios of such
# determinants under single-row replacement, i.e. dot products against one
# column of the inverse.  Cardinal values span an enormous dynamic range
# when the node set has large gaps, but determinant ratios are invariant
# under row and column scaling, so all rows are built in log space and the
# matrix is equilibrated before inversion (condition numbers then stay
# modest even for widely split node clusters).


def _cardinal_log_rows(nodes: np.ndarray, points: np.ndarray):
    """log|ell_m(points[i])| and signs for the Lagrange basis at ``nodes``.

    Points that coincide with a node produce an exact unit row
    (log 0 = -inf elsewhere).
    """
    n = len(nodes)
    diffs = nodes[:, None] - nodes[None, :]
    off = ~np.eye(n, dtype=bool)
    logw = -np.where(off, np.log(np.abs(diffs) + np.eye(n)), 0.0).sum(axis=1)
    sgnw = np.where(off & (diffs < 0), -1.0, 1.0).prod(axis=1)

    dy = points[:, None] - nodes[None, :]
    logs = np.full((len(points), n), -np.inf)
    signs = np.ones((len(points), n))
    hit = dy == 0.0
    exact = hit.any(axis=1)
    logs[exact] = np.where(hit[exact], 0.0, -np.inf)
    free = ~exact
    if free.any():
        dyf = dy[free]
        logdy = np.log(np.abs(dyf))
        sgndy = np.where(dyf < 0, -1.0, 1.0)
        logs[free] = logdy.sum(axis=1)[:, None] + logw[None, :] - logdy
        signs[free] = sgndy.prod(axis=1)[:, None] * sgnw[None, :] * sgndy
    return logs, signs


class _ScaledTracker:
    """Equilibrated matrix with row replacement and inverse updates.

    The matrix is D_r A D_c for diagonal scalings chosen to bring every
    entry to O(1); determinant ratios under row replacement are invariant
    as long as query rows are scaled like the row they replace, which
    ``query`` does via the stored scalings.
    """

    def __init__(self, row_logs, row_signs, row_scales):
        # rows already divided by exp(row_scales); fix column scales now
        mat = row_signs * np.exp(row_logs - row_scales[:, None])
        col = np.max(np.abs(mat), axis=0)
        self.log_col = np.where(col > 0, np.log(np.maximum(col, 1e-300)), 0.0)
        self.row_scales = row_scales
        self.mat = row_signs * np.exp(
            row_logs - row_scales[:, None] - self.log_col[None, :]
        )
        self.inv = np.linalg.inv(self.mat)

    def scale_row(self, i: int, logs, signs) -> np.ndarray:
        return signs * np.exp(logs - self.row_scales[i] - self.log_col)

    def ratio(self, i: int, scaled_row: np.ndarray) -> float:
        """det(A with row i -> row) / det(A)."""
        return float(scaled_row @ self.inv[:, i])

    def replace(self, i: int, scaled_row: np.ndarray, ratio: float) -> None:
        if abs(ratio) < 1e-9:
            self.mat[i] = scaled_row
            self.inv = np.linalg.inv(self.mat)
            return
        u = self.inv[:, i].copy()
        w = scaled_row @ self.inv
        w[i] -= 1.0
        self.inv -= np.outer(u, w) / ratio
        self.mat[i] = scaled_row


def _logaddexp_entry(logs_a, signs_a, logs_b, signs_b):
    """(log, sign) of signs_a exp(logs_a) + signs_b exp(logs_b)."""
    hi = np.maximum(logs_a, logs_b)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    val = signs_a * np.exp(logs_a - hi) + signs_b * np.exp(logs_b - hi)
    mag = np.abs(val)
    out_log = np.where(mag > 0, hi + np.log(np.maximum(mag, 1e-300)), -np.inf)
    return out_log, np.where(val < 0, -1.0, 1.0)


class _StStepperFloat:
    """Conditional machinery of one float strip step at level n >= 2."""

    def __init__(self, mu: tuple[int, ...], n: int, beta: float):
        self.n = n
        nodes = np.array(shifted_coords(mu, n), dtype=float)
        self.shift_logs, self.shift_signs = _cardinal_log_rows(nodes, nodes + 1.0)
        # coordinate i collides with i-1 when the bumped node hits it
        self.hits_prev = np.concatenate(
            ([False], nodes[:-1] == nodes[1:] + 1.0)
        )
        self.log_b = math.log(beta)
        self.log_1b = math.log1p(-beta)
        # free row = (1-beta) e_k + beta * shift row, assembled in log space
        diag_logs = np.full((n, n), -np.inf)
        diag_logs[np.arange(n), np.arange(n)] = self.log_1b
        free_logs, free_signs = _logaddexp_entry(
            self.shift_logs + self.log_b, self.shift_signs,
            diag_logs, np.ones((n, n)),
        )
        scales = np.maximum(np.max(free_logs, axis=1), 0.0)
        self.tracker = _ScaledTracker(free_logs, free_signs, scales)
        self.bits: list[int] = []

    def prob_one(self, i: int) -> float:
        if self.hits_prev[i] and self.bits[i - 1] == 0:
            return 0.0  # structural zero: bumping collides with coordinate i-1
        row = self.tracker.scale_row(
            i, self.shift_logs[i] + self.log_b, self.shift_signs[i]
        )
        return min(max(self.tracker.ratio(i, row), 0.0), 1.0)

    def commit(self, i: int, bit: int, p_one: float) -> None:
        self.bits.append(bit)
        if bit:
            row = self.tracker.scale_row(
                i, self.shift_logs[i] + self.log_b, self.shift_signs[i]
            )
            self.tracker.replace(i, row, p_one)
        else:
            logs = np.full(self.n, -np.inf)
            logs[i] = self.log_1b
            row = self.tracker.scale_row(i, logs, np.ones(self.n))
            self.tracker.replace(i, row, 1.0 - p_one)


def _st_step_float(mu: tuple[int, ...], n: int, beta: float, rng: RngStream):
    if n == 1:
        return (mu[0] + 1,) if rng.next_unit() < beta else (mu[0],)
    stepper = _StStepperFloat(mu, n, beta)
    eps = []
    for i in range(n):
        p1 = stepper.prob_one(i)
        bit = 1 if rng.next_unit() < p1 else 0
        stepper.commit(i, bit, p1)
        eps.append(bit)
    return tuple(mu[i] + eps[i] for i in range(n))


class _PrStepperFloat:
    """Conditional machinery of one float projection step from level n >= 3."""

    def __init__(self, nu: tuple[int, ...]):
        intervals = _pr_intervals(nu)
        self.m = len(intervals)
        nodes = np.array([iv[0] for iv in intervals], dtype=float)
        self.pts = [np.arange(lo, hi + 1) for lo, hi in intervals]
        self.cand_logs = []
        self.cand_signs = []
        row_logs = np.empty((self.m, self.m))
        row_signs = np.empty((self.m, self.m))
        scales = np.empty(self.m)
        for i, p in enumerate(self.pts):
            logs, signs = _cardinal_log_rows(nodes, p.astype(float))
            scale = max(np.max(logs), 0.0)
            self.cand_logs.append(logs)
            self.cand_signs.append(signs)
            scales[i] = scale
            total = (signs * np.exp(logs - scale)).sum(axis=0)
            mag = np.abs(total)
            row_logs[i] = np.where(
                mag > 0, scale + np.log(np.maximum(mag, 1e-300)), -np.inf
            )
            row_signs[i] = np.where(total < 0, -1.0, 1.0)
        self.tracker = _ScaledTracker(row_logs, row_signs, scales)

    def candidate_rows(self, i: int) -> np.ndarray:
        return self.cand_signs[i] * np.exp(
            self.cand_logs[i]
            - self.tracker.row_scales[i]
            - self.tracker.log_col[None, :]
        )

    def probs(self, i: int) -> np.ndarray:
        return np.clip(self.candidate_rows(i) @ self.tracker.inv[:, i], 0.0, None)

    def commit(self, i: int, idx: int, prob: float) -> None:
        self.tracker.replace(i, self.candidate_rows(i)[idx], prob)


def _pr_step_float(nu: tuple[int, ...], n: int, rng: RngStream):
    intervals = _pr_intervals(nu)
    if len(intervals) == 1:
        lo, hi = intervals[0]
        k = lo + min(int(rng.next_unit() * (hi - lo + 1)), hi - lo)
        return signature_from_shifted([k])
    stepper = _PrStepperFloat(nu)
    coords = []
    for i in range(stepper.m):
        probs = stepper.probs(i)
        target = rng.next_unit() * probs.sum()
        idx = min(int(np.searchsorted(np.cumsum(probs), target)), len(probs) - 1)
        coords.append(int(stepper.pts[i][idx]))
        stepper.commit(i, idx, float(probs[idx]))
    return signature_from_shifted(coords)


def _sample_tiling_float(cfg: SamplerConfig, index: int) -> SignatureSequence:
    from .combinatorics import validate_sequence
    from .errors import NumericalError

    rng = RngStream(cfg.master_seed, index)
    beta = float(cfg.beta.beta)
    n = cfg.domain.n
    mu = boundary_signature(cfg.domain)
    pairs: list[Signature] = []
    for level in range(n, 0, -1):
        nu = _st_step_float(mu, level, beta, rng)
        pairs.append(mu)
        pairs.append(nu)
        if level > 1:
            mu = _pr_step_float(nu, level, rng)
    seq = SignatureSequence(tuple(pairs))
    if not validate_sequence(seq, cfg.domain):
        raise NumericalError(
            f"float-path sample {index} failed chain validation; "
            "use exact mode for this domain"
        )
    return seq


# ---------------------------------------------------------------------------
# driver


def sample_tiling(cfg: SamplerConfig, index: int) -> SignatureSequence:
    """Draw the tiling with the given sample index (deterministic)."""
    if cfg.arithmetic_mode == "float":
        return _sample_tiling_float(cfg, index)
    return _sample_tiling_exact(cfg, index)


def _worker(args) -> list[tuple[int, tuple]]:
    cfg, chunk = args
    return [(i, sample_tiling(cfg, i).pairs) for i in chunk]


def _worker_cap() -> int:
    cap = os.environ.get("AZTEC_RECT_THREADS")
    if cap is not None:
        return max(1, int(cap))
    return max(1, os.cpu_count() or 1)


def sample_batch(
    cfg: SamplerConfig,
    indices: Sequence[int] | None = None,
    workers: int | None = None,
) -> list[SignatureSequence]:
    """Draw many samples, optionally across processes; output sorted by index.

    Results are identical regardless of worker count because each index
    owns an independent RNG stream.
    """
    if indices is None:
        indices = range(cfg.num_samples)
    indices = list(indices)
    if workers is None:
        workers = min(_worker_cap(), len(indices))
    if workers <= 1 or len(indices) <= 1:
        return [sample_tiling(cfg, i) for i in indices]
    chunks = [indices[k::workers] for k in range(workers)]
    out: dict[int, tuple] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_worker, [(cfg, c) for c in chunks if c]):
            out.update(part)
    return [SignatureSequence(out[i]) for i in sorted(out)]


def count_tilings(domain: DomainSpec) -> int:
    """Exact number of tilings: 2^{N(N+1)/2} * dim(omega, N)."""
    n = domain.n
    return 2 ** (n * (n + 1) // 2) * dim(boundary_signature(domain), n)


def tiling_weight(seq: SignatureSequence, q) -> Fraction:
    """Probability of one tiling under the q-weighted measure:
    q^{#horizontal} / ((1+q)^{N(N+1)/2} dim(omega, N))."""
    from .combinatorics import horizontal_domino_count

    q = Fraction(q)
    if q <= 0:
        raise ValueError("q must be positive")
    n = seq.n
    omega = seq.mu(n)
    horiz = horizontal_domino_count(seq)
    return q**horiz / ((1 + q) ** (n * (n + 1) // 2) * dim(omega, n))
