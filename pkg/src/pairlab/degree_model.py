"""Degree sequences with a subpower-law degree cap and their scalar functionals.

A sequence is a fixed tuple of positive vertex degrees with even sum.  From its
exact histogram we derive the branching ratio (expected outdegree of a
non-root vertex), the size-biased offspring law, and the Molloy-Reed sum that
separates the subcritical and supercritical phases.  All functionals are
computed from integer sums, with at most one final division, so the algebraic
identities between them hold exactly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping


class DegreeSequenceError(ValueError):
    """The degree list violates a structural invariant."""


class InfeasibleTargetError(ValueError):
    """No positive scale factor meets the branching-ratio target."""


def degree_cap(n: int, gamma: float, c: float) -> int:
    """Largest degree j at which c*n/j**gamma can still round to >= 1 vertex.

    Above this cap a subpower histogram is forced to be empty, so it bounds the
    maximum degree of any sequence satisfying the j**-gamma envelope.
    """
    return math.floor((c * n) ** (1.0 / gamma))


@dataclass(frozen=True)
class DegreeSequence:
    """Fixed tuple of positive vertex degrees with an even sum.

    ``gamma``/``c`` are optional subpower metadata: when present, the maximum
    degree must respect the corresponding cap.
    """

    degrees: tuple[int, ...]
    gamma: float | None = None
    c: float | None = None

    def __post_init__(self):
        n = len(self.degrees)
        if n < 2:
            raise DegreeSequenceError("need at least 2 vertices")
        # multigraph instances like (2, 2) or (3, 3) are legal: the pairing
        # model needs only positivity and parity, not d_i < n
        for d in self.degrees:
            if d < 1:
                raise DegreeSequenceError(f"degree {d} < 1")
        if sum(self.degrees) % 2 != 0:
            raise DegreeSequenceError("sum of degrees is odd")
        if (self.gamma is None) != (self.c is None):
            raise DegreeSequenceError("gamma and c must be given together")
        if self.gamma is not None:
            cap = degree_cap(n, self.gamma, self.c)
            if max(self.degrees) > cap:
                raise DegreeSequenceError(
                    f"max degree {max(self.degrees)} exceeds cap {cap}"
                )

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def two_m(self) -> int:
        """Total number of half-edge points (= twice the edge count)."""
        return sum(self.degrees)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Exact degree histogram of a sequence: integer counts over n vertices."""

    counts: Mapping[int, int]
    n: int

    @property
    def two_m(self) -> int:
        return sum(j * k for j, k in self.counts.items())

    @property
    def p(self) -> dict[int, Fraction]:
        """Fraction of vertices of each degree, exact."""
        return {j: Fraction(k, self.n) for j, k in sorted(self.counts.items())}

    @property
    def d_bar(self) -> Fraction:
        """Average vertex degree, exact."""
        return Fraction(self.two_m, self.n)

    @property
    def max_degree(self) -> int:
        return max(self.counts)


@dataclass(frozen=True)
class OffspringLaw:
    """Size-biased offspring distribution q_j = (j+1) p_{j+1} / d_bar."""

    q: Mapping[int, Fraction]

    def mean(self) -> Fraction:
        return sum((Fraction(j) * qj for j, qj in self.q.items()), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.q.values(), Fraction(0))


def empirical_distribution(seq: DegreeSequence) -> EmpiricalDistribution:
    """Exact integer-count histogram of the sequence."""
    return EmpiricalDistribution(counts=dict(Counter(seq.degrees)), n=seq.n)


def _factorial_sums(dist: EmpiricalDistribution) -> tuple[int, int]:
    """(sum of d_i, sum of d_i*(d_i - 1)) as exact integers."""
    s1 = sum(j * k for j, k in dist.counts.items())
    s2 = sum(j * (j - 1) * k for j, k in dist.counts.items())
    return s1, s2


def nu_exact(dist: EmpiricalDistribution) -> Fraction:
    """Branching ratio sum_j j(j-1)p_j / sum_j j p_j, exact."""
    s1, s2 = _factorial_sums(dist)
    return Fraction(s2, s1)


def nu(dist: EmpiricalDistribution) -> float:
    """Branching ratio as a float: integer sums, one final division."""
    s1, s2 = _factorial_sums(dist)
    return s2 / s1


def offspring_law(dist: EmpiricalDistribution) -> OffspringLaw:
    """Law of the outdegree of a non-root vertex reached along an edge."""
    s1, _ = _factorial_sums(dist)
    q = {
        j - 1: Fraction(j * k, s1)
        for j, k in sorted(dist.counts.items())
    }
    return OffspringLaw(q=q)


def molloy_reed_sum_exact(dist: EmpiricalDistribution) -> Fraction:
    """sum_j j(j-2) p_j, exact; equals d_bar * (nu - 1) identically."""
    return Fraction(
        sum(j * (j - 2) * k for j, k in dist.counts.items()), dist.n
    )


def molloy_reed_sum(dist: EmpiricalDistribution) -> float:
    """sum_j j(j-2) p_j; negative in the subcritical phase."""
    return sum(j * (j - 2) * k for j, k in dist.counts.items()) / dist.n


@dataclass(frozen=True)
class SubpowerReport:
    """Per-degree verdicts of the j**-gamma envelope check (report, no raise)."""

    per_degree_ok: dict[int, bool]
    max_degree_ok: bool
    parity_ok: bool
    positivity_ok: bool
    cap: int

    @property
    def valid(self) -> bool:
        return (
            all(self.per_degree_ok.values())
            and self.max_degree_ok
            and self.parity_ok
            and self.positivity_ok
        )


def validate_subpower(seq: DegreeSequence, gamma: float, c: float) -> SubpowerReport:
    """Check n*p_j <= c*n*j**-gamma + 1 per degree, plus cap/parity/positivity.

    The +1 slack absorbs the single vertex moved by parity repair.
    """
    counts = Counter(seq.degrees)
    n = seq.n
    cap = degree_cap(n, gamma, c)
    per_degree = {
        j: counts[j] <= c * n * j ** (-gamma) + 1 for j in sorted(counts)
    }
    return SubpowerReport(
        per_degree_ok=per_degree,
        max_degree_ok=max(counts) <= cap + 1,
        parity_ok=sum(seq.degrees) % 2 == 0,
        positivity_ok=min(counts) >= 1,
        cap=cap,
    )


def _assemble(n: int, counts: dict[int, int]) -> tuple[int, ...] | None:
    """Degrees sorted descending, degree-1 filler, parity repair on one filler.

    Returns None when the counts leave no room for filler but parity needs it.
    """
    heavy = sum(counts.values())
    if heavy > n:
        return None
    degrees = []
    for j in sorted(counts, reverse=True):
        degrees.extend([j] * counts[j])
    degrees.extend([1] * (n - heavy))
    if sum(degrees) % 2 != 0:
        if degrees[-1] != 1:
            return None
        degrees[-1] = 2  # parity repair: promote one degree-1 vertex
    return tuple(degrees)


def _counts_for_scale(n: int, gamma: float, scale: float, cap: int) -> dict[int, int]:
    counts = {}
    for j in range(2, cap + 1):
        k = math.floor(scale * n * j ** (-gamma))
        if k > 0:
            counts[j] = k
    return counts


def build_subpower_sequence(
    n: int, gamma: float, c: float, target_nu: float
) -> DegreeSequence:
    """Deterministic subpower sequence with branching ratio at most target_nu.

    Counts are floor(c' * n * j**-gamma) for j from the cap down to 2, with
    c' <= c the largest scale (bisected) keeping nu within target; remaining
    vertices get degree 1, and parity is repaired by promoting one of them to
    degree 2.  Identical inputs always produce the identical sequence.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if gamma <= 3:
        raise ValueError("gamma must exceed 3")
    if c <= 0:
        raise ValueError("c must be positive")
    if not 0 < target_nu <= 1:
        raise ValueError("target_nu must lie in (0, 1]")

    cap = degree_cap(n, gamma, c)

    def try_scale(scale: float) -> tuple[int, ...] | None:
        degrees = _assemble(n, _counts_for_scale(n, gamma, scale, cap))
        if degrees is None or max(degrees) >= n:
            return None
        dist = empirical_distribution(DegreeSequence(degrees))
        if nu_exact(dist) > target_nu:
            return None
        return degrees

    if cap < 2:
        degrees = _assemble(n, {})
        if degrees is None:
            raise InfeasibleTargetError("cannot repair parity at this size")
        if max(degrees) > cap:
            # parity repair overshot a sub-2 cap; drop the metadata claim
            return DegreeSequence(degrees)
        return DegreeSequence(degrees, gamma=gamma, c=c)

    degrees = try_scale(c)
    if degrees is None:
        lo, hi = 0.0, c  # feasible scales form (0, x]; bisect for x
        best = None
        for _ in range(80):
            mid = (lo + hi) / 2
            cand = try_scale(mid)
            if cand is None:
                hi = mid
            else:
                best = cand
                lo = mid
        degrees = best
    if degrees is None or degrees.count(cap) < 1:
        raise InfeasibleTargetError(
            f"no scale in (0, {c}] reaches nu <= {target_nu} "
            f"while keeping a vertex at the cap {cap}"
        )
    return DegreeSequence(degrees, gamma=gamma, c=c)


def write_degree_file(seq: DegreeSequence, path: str | Path) -> None:
    """Plain text: first line n, second line the n degrees space-separated."""
    Path(path).write_text(
        f"{seq.n}\n{' '.join(str(d) for d in seq.degrees)}\n"
    )


def read_degree_file(path: str | Path) -> DegreeSequence:
    """Load and validate a degree file written by :func:`write_degree_file`."""
    lines = Path(path).read_text().split("\n")
    if len(lines) < 2:
        raise DegreeSequenceError(f"{path}: expected two lines")
    try:
        n = int(lines[0])
        degrees = tuple(int(tok) for tok in lines[1].split())
    except ValueError as exc:
        raise DegreeSequenceError(f"{path}: {exc}") from exc
    if len(degrees) != n:
        raise DegreeSequenceError(
            f"{path}: header says {n} vertices, found {len(degrees)} degrees"
        )
    return DegreeSequence(degrees)
