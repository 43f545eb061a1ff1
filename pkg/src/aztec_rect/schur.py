"""Exact Schur-weight engine.

Dimensions of unitary-group irreducibles, vertical-strip and interlacing
predicates, and the determinant-form partition sums that drive the
sequential tiling sampler.  All arithmetic in this module is exact
(big integers / rationals); determinants are evaluated by fraction-free
Bareiss elimination.  Vandermonde-power matrices are catastrophically
ill-conditioned in floating point, so the exact path is the correctness
reference throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Signature = tuple[int, ...]

__all__ = [
    "Signature",
    "BetaWeight",
    "as_signature",
    "is_signature",
    "shifted_coords",
    "signature_from_shifted",
    "superfactorial",
    "dim",
    "is_vertical_strip",
    "is_interlacing",
    "det_bareiss",
    "strip_partition_sum",
    "branch_partition_sum",
    "st_prob",
    "pr_prob",
]


def is_signature(parts: Sequence[int]) -> bool:
    """True iff ``parts`` is weakly decreasing with non-negative entries."""
    return all(isinstance(p, int) for p in parts) and all(
        parts[i] >= parts[i + 1] for i in range(len(parts) - 1)
    ) and (len(parts) == 0 or parts[-1] >= 0)


def as_signature(parts: Sequence[int]) -> Signature:
    sig = tuple(int(p) for p in parts)
    if not is_signature(sig):
        raise ValueError(f"not a non-negative signature: {parts!r}")
    return sig


def shifted_coords(sig: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    """Strictly decreasing coordinates l_i = sig_i + n - i (1-based i)."""
    if n is None:
        n = len(sig)
    if len(sig) != n:
        raise ValueError("length mismatch")
    return tuple(sig[i] + n - 1 - i for i in range(n))


def signature_from_shifted(coords: Sequence[int]) -> Signature:
    n = len(coords)
    return as_signature(tuple(coords[i] - (n - 1 - i) for i in range(n)))


@dataclass(frozen=True)
class BetaWeight:
    """Bernoulli weight of one strip step; beta = 1/2 is the uniform measure."""

    beta: Fraction

    def __post_init__(self):
        if not (0 < self.beta < 1):
            raise ValueError("beta must lie strictly between 0 and 1")

    @property
    def q(self) -> Fraction:
        return self.beta / (1 - self.beta)

    @classmethod
    def from_q(cls, q) -> "BetaWeight":
        q = Fraction(q)
        if q <= 0:
            raise ValueError("q must be positive")
        return cls(q / (1 + q))


def superfactorial(n: int) -> int:
    """prod_{1 <= i < j <= n} (j - i) = 1! 2! ... (n-1)!"""
    out, f = 1, 1
    for k in range(1, n):
        f *= k
        out *= f
    return out


def dim(la: Sequence[int], n: int) -> int:
    """Number of semistandard tableaux of shape ``la`` with entries <= n.

    Weyl product formula prod_{i<j} (la_i - la_j + j - i) / (j - i),
    evaluated exactly.
    """
    la = tuple(la)
    if len(la) != n:
        raise ValueError(f"signature length {len(la)} != n = {n}")
    num = 1
    for i in range(n):
        for j in range(i + 1, n):
            num *= la[i] - la[j] + j - i
    q, r = divmod(num, superfactorial(n))
    assert r == 0, "Weyl product must divide exactly"
    return q


def is_vertical_strip(mu: Sequence[int], nu: Sequence[int]) -> bool:
    """True iff nu/mu adds at most one box per row (same length)."""
    if len(mu) != len(nu):
        return False
    if not (is_signature(tuple(mu)) and is_signature(tuple(nu))):
        return False
    return all(nu[i] - mu[i] in (0, 1) for i in range(len(mu)))


def is_interlacing(mu: Sequence[int], nu: Sequence[int]) -> bool:
    """True iff nu_1 >= mu_1 >= nu_2 >= ... >= mu_{n-1} >= nu_n."""
    if len(mu) != len(nu) - 1:
        return False
    n = len(nu)
    for i in range(n - 1):
        if not (nu[i] >= mu[i] >= nu[i + 1]):
            return False
    return True


def det_bareiss(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - aik * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def _vdm_sign(n: int) -> int:
    # V(m) = prod_{i<j}(m_i - m_j) = (-1)^{n(n-1)/2} det[m_i^{j-1}]
    return -1 if (n * (n - 1) // 2) % 2 else 1


def strip_partition_sum(
    l: Sequence[int], fixed_prefix: Sequence[int], beta: BetaWeight | Fraction
) -> Fraction:
    """Weighted sum of Vandermonde products over 0/1 bumps of ``l``.

    Sums beta^|eps| (1-beta)^{n-|eps|} V(l + eps) over all eps in {0,1}^n
    extending ``fixed_prefix``, where V(m) = prod_{i<j} (m_i - m_j)
    (zero on collisions).  Evaluated as a single determinant: row i is the
    weighted monomial row of l_i + eps_i when fixed, and the beta-mixture of
    the two bump choices when free.  With an empty prefix the sum telescopes
    to V(l), which normalises the strip transition probabilities.
    """
    l = tuple(int(v) for v in l)
    n = len(l)
    if any(l[i] <= l[i + 1] for i in range(n - 1)):
        raise ValueError("shifted coordinates must be strictly decreasing")
    if len(fixed_prefix) > n:
        raise ValueError("prefix longer than coordinate vector")
    if any(e not in (0, 1) for e in fixed_prefix):
        raise ValueError("prefix entries must be 0 or 1")
    b = beta.beta if isinstance(beta, BetaWeight) else Fraction(beta)
    if not (0 < b < 1):
        raise ValueError("beta must lie strictly between 0 and 1")
    p, q = b.numerator, b.denominator
    # rows scaled by the common denominator q; det scales by q^n
    rows = []
    for i, li in enumerate(l):
        if i < len(fixed_prefix):
            w, x = (p, li + 1) if fixed_prefix[i] else (q - p, li)
            rows.append([w * x**j for j in range(n)])
        else:
            rows.append([(q - p) * li**j + p * (li + 1) ** j for j in range(n)])
    val = Fraction(_vdm_sign(n) * det_bareiss(rows), q**n)
    assert val >= 0
    return val


def _branch_rows(
    intervals: Sequence[tuple[int, int]], fixed_prefix: Sequence[int]
) -> list[list[int]]:
    m = len(intervals)
    rows = []
    for i, (lo, hi) in enumerate(intervals):
        if lo > hi:
            raise ValueError(f"empty interval {intervals[i]!r}")
        if i > 0 and hi >= intervals[i - 1][0]:
            raise ValueError("intervals must be disjoint and descending")
        if i < len(fixed_prefix):
            c = fixed_prefix[i]
            if not (lo <= c <= hi):
                raise ValueError("prefix value outside its interval")
            rows.append([c**j for j in range(m)])
        else:
            rows.append([sum(k**j for k in range(lo, hi + 1)) for j in range(m)])
    return rows


def branch_partition_sum(
    intervals: Sequence[tuple[int, int]], fixed_prefix: Sequence[int] = ()
) -> int:
    """Sum of V(k) over k_i ranging in descending disjoint integer intervals.

    ``intervals`` is ordered top-down: interval i+1 lies strictly below
    interval i, so every selection is strictly decreasing and every term
    V(k) is positive.  Coordinates listed in ``fixed_prefix`` are pinned.
    Evaluated as one determinant whose free rows hold interval power sums.
    """
    if len(fixed_prefix) > len(intervals):
        raise ValueError("prefix longer than interval list")
    rows = _branch_rows(intervals, fixed_prefix)
    val = _vdm_sign(len(intervals)) * det_bareiss(rows)
    assert val >= 0
    return val


def st_prob(
    mu: Sequence[int], nu: Sequence[int], n: int, beta: BetaWeight | Fraction
) -> Fraction:
    """Transition weight of the strip step mu -> nu at level n."""
    mu, nu = tuple(mu), tuple(nu)
    if len(mu) != n or len(nu) != n:
        raise ValueError("signatures must have length n")
    b = beta.beta if isinstance(beta, BetaWeight) else Fraction(beta)
    if not is_vertical_strip(mu, nu):
        return Fraction(0)
    added = sum(nu) - sum(mu)
    return b**added * (1 - b) ** (n - added) * Fraction(dim(nu, n), dim(mu, n))


def pr_prob(nu: Sequence[int], mu: Sequence[int]) -> Fraction:
    """Transition weight of the projection step nu (length n) -> mu (n-1)."""
    nu, mu = tuple(nu), tuple(mu)
    n = len(nu)
    if len(mu) != n - 1:
        raise ValueError("mu must be one shorter than nu")
    if not is_interlacing(mu, nu):
        return Fraction(0)
    return Fraction(dim(mu, n - 1), dim(nu, n))
