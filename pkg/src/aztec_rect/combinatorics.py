"""Finite-domain data model for rectangular Aztec diamonds.

A rectangular Aztec diamond R(N, Omega, m) is a sawtooth rectangle of
2N+1 rows of diagonal unit squares; the boundary row has N teeth at
positions Omega (strictly increasing, Omega_1 = 1) and m = Omega_N - N.
A tiling is encoded by the chain of signatures

    (mu^(N), nu^(N), mu^(N-1), ..., mu^(1), nu^(1)),

where mu^(i), nu^(i) have length i, consecutive (mu^(i), nu^(i)) differ by
a vertical strip and nu^(i+1) / mu^(i) interlace.  Row k of the domain
(counted from the boundary row, k = 1..2N+1) carries the signature with
level i = N - (k-1)//2: mu^(i) on odd rows, nu^(i) on even rows.  The
V-squares of row k sit at the 0-based slots {lambda_s + i - s}, i.e. at
the shifted coordinates of that signature -- this is the tiling <->
sequence bijection implemented here, together with the height function,
the brute-force enumeration oracle and the path-ensemble rendering
transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import GuardError
from .schur import (
    Signature,
    as_signature,
    dim,
    is_interlacing,
    is_signature,
    is_vertical_strip,
    shifted_coords,
)

__all__ = [
    "DomainSpec",
    "SignatureSequence",
    "VGrid",
    "Domino",
    "boundary_signature",
    "omega_from_segments",
    "omega_from_theta",
    "validate_sequence",
    "sequence_to_vgrid",
    "vgrid_to_sequence",
    "delta_count",
    "height_function",
    "horizontal_domino_count",
    "enumerate_tilings",
    "paths_from_vgrid",
    "dominoes_from_vgrid",
    "vertical_strips",
    "interlacings",
]


@dataclass(frozen=True)
class DomainSpec:
    """Rectangular Aztec diamond R(N, Omega, m); m is derived."""

    n: int
    omega_positions: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be a positive integer")
        om = tuple(int(v) for v in self.omega_positions)
        object.__setattr__(self, "omega_positions", om)
        if len(om) != self.n:
            raise ValueError("Omega must have length N")
        if om[0] != 1:
            raise ValueError("Omega_1 must equal 1")
        if any(om[i] >= om[i + 1] for i in range(len(om) - 1)):
            raise ValueError("Omega must be strictly increasing")

    @property
    def m(self) -> int:
        return self.omega_positions[-1] - self.n

    @property
    def width(self) -> int:
        """Number of slots in an odd row (= N + m)."""
        return self.n + self.m

    def row_slot_count(self, k: int) -> int:
        """Total squares in row k after virtual completion of the boundary."""
        if not 1 <= k <= 2 * self.n + 1:
            raise ValueError("row index out of range")
        return self.width + (1 if k % 2 == 0 else 0)

    @classmethod
    def aztec(cls, n: int) -> "DomainSpec":
        """The classical Aztec diamond: Omega = (1, 2, ..., N)."""
        return cls(n, tuple(range(1, n + 1)))


def boundary_signature(domain: DomainSpec) -> Signature:
    """Signature of the boundary row: omega_k = Omega_{N+1-k} - (N+1-k)."""
    n = domain.n
    om = domain.omega_positions
    return as_signature(tuple(om[n - k] - (n - k + 1) for k in range(1, n + 1)))


def omega_from_segments(
    segments: Sequence[tuple[float, float]], n: int
) -> tuple[int, ...]:
    """Teeth positions discretising density-1 segments [a_i, b_i] at size n.

    Segment i contributes the run round(a_i n) + 1 .. round(b_i n); the
    first segment must start at 0 so that Omega_1 = 1.
    """
    teeth: list[int] = []
    for a, b in segments:
        teeth.extend(range(round(a * n) + 1, round(b * n) + 1))
    if len(teeth) != n:
        raise ValueError(
            f"segments discretise to {len(teeth)} teeth at n = {n}, need {n}"
        )
    if teeth[0] != 1:
        raise ValueError("first segment must start at 0 (Omega_1 = 1)")
    return tuple(teeth)


def omega_from_theta(theta: int, n: int) -> tuple[int, ...]:
    """Teeth positions (1, 1 + theta, ..., 1 + (n-1) theta) whose boundary
    profile converges to the uniform density-1/theta measure on [0, theta]."""
    if theta < 1:
        raise ValueError("theta must be a positive integer")
    return tuple(1 + theta * k for k in range(n))


@dataclass(frozen=True)
class SignatureSequence:
    """The chain (mu^(N), nu^(N), ..., mu^(1), nu^(1)) encoding one tiling."""

    pairs: tuple[Signature, ...]

    def __post_init__(self):
        if len(self.pairs) % 2 != 0 or not self.pairs:
            raise ValueError("chain must hold 2N signatures")
        object.__setattr__(
            self, "pairs", tuple(tuple(int(p) for p in sig) for sig in self.pairs)
        )

    @property
    def n(self) -> int:
        return len(self.pairs) // 2

    def mu(self, i: int) -> Signature:
        if not 1 <= i <= self.n:
            raise ValueError("level out of range")
        return self.pairs[2 * (self.n - i)]

    def nu(self, i: int) -> Signature:
        if not 1 <= i <= self.n:
            raise ValueError("level out of range")
        return self.pairs[2 * (self.n - i) + 1]

    def row_signature(self, k: int) -> Signature:
        """Signature attached to row k (1 = boundary, 2N+1 = top)."""
        if not 1 <= k <= 2 * self.n + 1:
            raise ValueError("row index out of range")
        level = self.n - (k - 1) // 2
        if level == 0:
            return ()
        return self.mu(level) if k % 2 == 1 else self.nu(level)


def validate_sequence(seq: SignatureSequence, domain: DomainSpec) -> bool:
    """Check every chain condition; wrong arity is an error, not False."""
    n = domain.n
    if seq.n != n:
        raise ValueError(f"chain has {seq.n} levels, domain has {n}")
    for i in range(1, n + 1):
        if len(seq.mu(i)) != i or len(seq.nu(i)) != i:
            raise ValueError(f"level {i} signatures have the wrong length")
    if seq.mu(n) != boundary_signature(domain):
        return False
    m = domain.m
    for i in range(1, n + 1):
        mu, nu = seq.mu(i), seq.nu(i)
        if not (is_signature(mu) and is_signature(nu)):
            return False
        if mu and mu[0] > m + n - i:
            return False
        if nu and nu[0] > m + n - i + 1:
            return False
        if not is_vertical_strip(mu, nu):
            return False
        if i < n and not is_interlacing(seq.mu(i), seq.nu(i + 1)):
            return False
    return True


@dataclass(frozen=True)
class VGrid:
    """Per-row sorted 0-based V-square slots; rows[k-1] is row k."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "rows", tuple(tuple(int(p) for p in r) for r in self.rows)
        )
        for r in self.rows:
            if any(r[i] >= r[i + 1] for i in range(len(r) - 1)):
                raise ValueError("V-positions must be strictly increasing")

    @property
    def n(self) -> int:
        return (len(self.rows) - 1) // 2


def sequence_to_vgrid(seq: SignatureSequence) -> VGrid:
    """V-square slots of every row: the shifted coordinates of its signature."""
    rows = []
    for k in range(1, 2 * seq.n + 2):
        sig = seq.row_signature(k)
        rows.append(tuple(sorted(shifted_coords(sig))))
    return VGrid(tuple(rows))


def vgrid_to_sequence(grid: VGrid, domain: DomainSpec) -> SignatureSequence:
    """Inverse of :func:`sequence_to_vgrid`; validates row counts and bounds."""
    n = domain.n
    if len(grid.rows) != 2 * n + 1:
        raise ValueError("grid must have 2N+1 rows")
    pairs = []
    for k in range(2 * n, 0, -1):
        level = n - (k - 1) // 2
        row = grid.rows[k - 1]
        if len(row) != level:
            raise ValueError(f"row {k} must hold {level} V-squares")
        if row and (row[0] < 0 or row[-1] >= domain.row_slot_count(k)):
            raise ValueError(f"row {k} V-positions out of bounds")
        coords = tuple(sorted(row, reverse=True))
        sig = tuple(coords[s] - (level - 1 - s) for s in range(level))
        if not is_signature(sig):
            raise ValueError(f"row {k} positions do not form a signature")
        pairs.append(sig)
    if grid.rows[2 * n]:
        raise ValueError("top row must contain no V-squares")
    seq = SignatureSequence(tuple(reversed(pairs)))
    if not validate_sequence(seq, domain):
        raise ValueError("grid does not encode a tiling of this domain")
    return seq


def delta_count(seq: SignatureSequence, x: int, y: int) -> int:
    """Number of V-squares at or right of slot x in the row at height y.

    Counts s with mu^(N-y)_s + (N-y) - s >= x; weakly decreasing in x.
    """
    n = seq.n
    if not 0 <= y <= n:
        raise ValueError("height index out of range")
    level = n - int(math.floor(y))
    if level == 0:
        return 0
    sig = seq.mu(level)
    return sum(1 for c in shifted_coords(sig) if c >= x)


def height_function(seq: SignatureSequence, domain: DomainSpec, i: int, j: int) -> int:
    """Height at the lattice vertex (i, j), normalised to 0 at the
    upper-right corner: h = 2(2N + m - j - i - 2 Delta(i, j))."""
    n, m = domain.n, domain.m
    if seq.n != n:
        raise ValueError("sequence does not match domain")
    if not (0 <= j <= n and 0 <= i <= n + m):
        raise ValueError(f"vertex ({i}, {j}) outside the domain")
    return 2 * (2 * n + m - j - i - 2 * delta_count(seq, i, j))


def horizontal_domino_count(seq: SignatureSequence) -> int:
    """Total boxes added across all strip steps, sum_i |nu^(i)| - |mu^(i)|."""
    return sum(
        sum(seq.nu(i)) - sum(seq.mu(i)) for i in range(1, seq.n + 1)
    )


def vertical_strips(mu: Signature) -> Iterator[Signature]:
    """All signatures nu >= mu adding at most one box per row."""
    n = len(mu)
    acc: list[int] = []

    def rec(idx: int) -> Iterator[Signature]:
        if idx == n:
            yield tuple(acc)
            return
        for e in (0, 1):
            v = mu[idx] + e
            if idx == 0 or acc[idx - 1] >= v:
                acc.append(v)
                yield from rec(idx + 1)
                acc.pop()

    yield from rec(0)


def interlacings(nu: Signature) -> Iterator[Signature]:
    """All signatures mu of length n-1 interlacing with nu (length n)."""
    n = len(nu)
    acc: list[int] = []

    def rec(idx: int) -> Iterator[Signature]:
        if idx == n - 1:
            yield tuple(acc)
            return
        for v in range(nu[idx + 1], nu[idx] + 1):
            acc.append(v)
            yield from rec(idx + 1)
            acc.pop()

    yield from rec(0)


def enumerate_tilings(
    domain: DomainSpec, guard: int = 10**6
) -> list[SignatureSequence]:
    """All valid signature chains of the domain, exactly once each.

    Refuses (GuardError) when the exact tiling count exceeds ``guard``.
    """
    n = domain.n
    omega = boundary_signature(domain)
    total = 2 ** (n * (n + 1) // 2) * dim(omega, n)
    if total > guard:
        raise GuardError(
            f"domain has {total} tilings, exceeding the enumeration guard {guard}"
        )
    out: list[SignatureSequence] = []
    chain: list[Signature] = []

    def descend(mu: Signature, level: int) -> None:
        for nu in vertical_strips(mu):
            chain.append(mu)
            chain.append(nu)
            if level == 1:
                out.append(SignatureSequence(tuple(chain)))
            else:
                for mu_next in interlacings(nu):
                    descend(mu_next, level - 1)
            chain.pop()
            chain.pop()

    descend(omega, n)
    return out


def paths_from_vgrid(grid: VGrid) -> list[list[tuple[int, int]]]:
    """Non-intersecting lattice paths through the V-squares.

    Path r (1-based) follows the r-th V-square from the left through rows
    k = 1, 2, ... for as long as the row still has r V-squares; paths are
    vertex-disjoint and start at the boundary teeth.  Rendering transform
    only: entries are (row k, slot) pairs.
    """
    n = grid.n
    paths = []
    for r in range(1, n + 1):
        path = []
        for k in range(1, 2 * n + 2):
            row = grid.rows[k - 1]
            if len(row) < r:
                break
            path.append((k, row[r - 1]))
        paths.append(path)
    return paths


Domino = tuple[tuple[int, int], tuple[int, int]]


def dominoes_from_vgrid(grid: VGrid, domain: DomainSpec) -> list[Domino]:
    """Reconstruct the domino pairing from the V-squares.

    V-dominoes pair the j-th V-square of each odd row with the j-th of the
    row above; the leftover squares pair likewise across even-to-odd rows.
    Each domino is ((k1, slot1), (k2, slot2)) with k2 = k1 + 1.  The
    boundary row's virtual completion squares are not emitted.
    """
    n = domain.n
    if grid.n != n:
        raise ValueError("grid does not match domain")
    dominoes: list[Domino] = []
    for k in range(1, 2 * n + 1):
        upper = grid.rows[k]  # row k+1
        lower = grid.rows[k - 1]
        if k % 2 == 1:
            # V-dominoes: odd-row slot p sits at x = p + 1/2, pairs with
            # even-row slot p or p + 1.
            if len(lower) != len(upper):
                raise ValueError(f"rows {k},{k + 1} have mismatched V-counts")
            for p, q in zip(lower, upper):
                if q - p not in (0, 1):
                    raise ValueError("V-squares cannot be paired into dominoes")
                dominoes.append(((k, p), (k + 1, q)))
        else:
            lam_lower = [
                s for s in range(domain.row_slot_count(k)) if s not in set(lower)
            ]
            lam_upper = [
                s for s in range(domain.row_slot_count(k + 1)) if s not in set(upper)
            ]
            if len(lam_lower) != len(lam_upper):
                raise ValueError(f"rows {k},{k + 1} have mismatched gap counts")
            for q, p in zip(lam_lower, lam_upper):
                # even-row slot q sits at x = q, odd-row slot p at p + 1/2
                if q - p not in (0, 1):
                    raise ValueError("gap squares cannot be paired into dominoes")
                dominoes.append(((k, q), (k + 1, p)))
    return dominoes
