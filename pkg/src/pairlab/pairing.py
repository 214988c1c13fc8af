"""Uniform pairing (configuration) model on half-edge points.

Each vertex i owns d_i points; a pairing is a uniform perfect matching on all
2m points, and projecting matched points to their owner vertices yields a
multigraph with the prescribed degrees.  Alongside the sampler there is an
exhaustive enumerator for small instances (the exact oracle used by the
tests), loop / parallel-edge counters, a component projector, and rejection
sampling of simple graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .degree_model import DegreeSequence


class InstanceTooLargeError(ValueError):
    """Instance exceeds the exhaustive-enumeration cap."""


class AttemptsExhaustedError(RuntimeError):
    """Rejection sampling failed to produce a simple graph."""

    def __init__(self, attempts: int):
        super().__init__(f"no simple graph in {attempts} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class PointSpace:
    """The 2m half-edge points, grouped contiguously by owner vertex."""

    owner: np.ndarray  # point index -> vertex index
    degrees: tuple[int, ...]

    @classmethod
    def from_degree_sequence(cls, seq: DegreeSequence) -> "PointSpace":
        owner = np.repeat(np.arange(seq.n, dtype=np.int64), seq.degrees)
        owner.setflags(write=False)
        return cls(owner=owner, degrees=seq.degrees)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def total_points(self) -> int:
        return len(self.owner)

    def points_of(self, v: int) -> range:
        start = int(np.searchsorted(self.owner, v, side="left"))
        return range(start, start + self.degrees[v])


@dataclass(frozen=True)
class Pairing:
    """Fixed-point-free involution on the point space (a perfect matching)."""

    mate: np.ndarray  # point index -> matched point index
    space: PointSpace

    def validate(self) -> None:
        mate = self.mate
        if len(mate) != self.space.total_points:
            raise ValueError("mate array length mismatch")
        idx = np.arange(len(mate))
        if np.any(mate == idx):
            raise ValueError("pairing has a fixed point")
        if not np.array_equal(mate[mate], idx):
            raise ValueError("mate map is not an involution")

    def pairs(self) -> np.ndarray:
        """(m, 2) array of point pairs, lower index first, sorted."""
        idx = np.arange(len(self.mate))
        sel = idx < self.mate
        return np.column_stack([idx[sel], self.mate[sel]])

    def key(self) -> bytes:
        """Canonical hashable identity of this pairing."""
        return self.mate.astype(np.int64).tobytes()


@dataclass(frozen=True)
class ComponentReport:
    """Component sizes plus loop / parallel-edge counts of one realization."""

    component_sizes: tuple[int, ...]  # sorted descending
    largest: int
    loops: int
    parallel_pairs: int
    simple: bool

    @property
    def n(self) -> int:
        return sum(self.component_sizes)


def _as_space(seq: DegreeSequence | PointSpace) -> PointSpace:
    if isinstance(seq, PointSpace):
        return seq
    return PointSpace.from_degree_sequence(seq)


def sample_pairing(
    seq: DegreeSequence | PointSpace, rng: np.random.Generator
) -> Pairing:
    """Draw a uniform pairing: all (2m-1)!! matchings are equally likely.

    A uniform permutation of the points is folded into consecutive pairs,
    which induces the uniform matching; deterministic given the rng state.
    """
    space = _as_space(seq)
    perm = rng.permutation(space.total_points)
    mate = np.empty(space.total_points, dtype=np.int64)
    mate[perm[0::2]] = perm[1::2]
    mate[perm[1::2]] = perm[0::2]
    return Pairing(mate=mate, space=space)


def double_factorial_odd(m: int) -> int:
    """(2m-1)!! = 1 * 3 * ... * (2m-1), the number of pairings on 2m points."""
    out = 1
    for k in range(1, 2 * m, 2):
        out *= k
    return out


def enumerate_pairings(
    seq: DegreeSequence | PointSpace, max_pairs: int = 6
) -> Iterator[Pairing]:
    """Yield every pairing exactly once; total count is (2m-1)!!.

    Capped by default at m = 6 (10395 pairings) to keep oracle runs fast.
    """
    space = _as_space(seq)
    total = space.total_points
    if total // 2 > max_pairs:
        raise InstanceTooLargeError(
            f"m = {total // 2} exceeds enumeration cap {max_pairs}"
        )

    mate = np.full(total, -1, dtype=np.int64)

    def rec(points: list[int]) -> Iterator[Pairing]:
        if not points:
            yield Pairing(mate=mate.copy(), space=space)
            return
        first = points[0]
        rest = points[1:]
        for i, partner in enumerate(rest):
            mate[first] = partner
            mate[partner] = first
            yield from rec(rest[:i] + rest[i + 1 :])

    yield from rec(list(range(total)))


def _edge_endpoints(p: Pairing) -> tuple[np.ndarray, np.ndarray]:
    """Owner vertices (u, v) of the m matching-pairs."""
    pairs = p.pairs()
    return p.space.owner[pairs[:, 0]], p.space.owner[pairs[:, 1]]


def count_loops(p: Pairing) -> int:
    """Matching-pairs whose two points share an owner vertex."""
    u, v = _edge_endpoints(p)
    return int(np.count_nonzero(u == v))


def _nonloop_multiplicities(p: Pairing) -> np.ndarray:
    """Multiplicities of distinct non-loop vertex pairs joined by an edge."""
    u, v = _edge_endpoints(p)
    sel = u != v
    lo = np.minimum(u[sel], v[sel])
    hi = np.maximum(u[sel], v[sel])
    if len(lo) == 0:
        return np.zeros(0, dtype=np.int64)
    _, counts = np.unique(lo * p.space.n + hi, return_counts=True)
    return counts


def count_parallel_pairs(p: Pairing) -> int:
    """Sum over distinct vertex pairs of C(multiplicity, 2); loops excluded."""
    counts = _nonloop_multiplicities(p)
    return int(np.sum(counts * (counts - 1) // 2))


def project_components(p: Pairing) -> ComponentReport:
    """Connected components of the projected multigraph, plus loop stats."""
    u, v = _edge_endpoints(p)
    n = p.space.n
    graph = coo_matrix((np.ones(len(u)), (u, v)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels)
    loops = int(np.count_nonzero(u == v))
    parallel = count_parallel_pairs(p)
    return ComponentReport(
        component_sizes=tuple(sorted((int(s) for s in sizes), reverse=True)),
        largest=int(sizes.max()),
        loops=loops,
        parallel_pairs=parallel,
        simple=(loops == 0 and parallel == 0),
    )


def is_simple(p: Pairing) -> bool:
    """No loops and every vertex-pair multiplicity at most 1."""
    if count_loops(p) > 0:
        return False
    counts = _nonloop_multiplicities(p)
    return bool(len(counts) == 0 or counts.max() <= 1)


def sample_simple_graph(
    seq: DegreeSequence | PointSpace,
    rng: np.random.Generator,
    max_attempts: int,
) -> tuple[Pairing, int]:
    """Rejection-sample pairings until simple; returns (pairing, attempts).

    The accepted graph is uniform over all simple graphs with the degree
    sequence; the attempt count is geometric with the simplicity probability.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    space = _as_space(seq)
    for attempt in range(1, max_attempts + 1):
        p = sample_pairing(space, rng)
        if is_simple(p):
            return p, attempt
    raise AttemptsExhaustedError(max_attempts)


def predicted_simple_probability(nu_value: float) -> float:
    """Limit of the simplicity probability, exp(-nu/2 - nu**2/4)."""
    return math.exp(-nu_value / 2 - nu_value**2 / 4)


def write_pairing(p: Pairing, path: str | Path) -> None:
    """One line 's s2' of point indices per matching-pair."""
    lines = [f"{a} {b}" for a, b in p.pairs()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pairing(path: str | Path, space: PointSpace) -> Pairing:
    mate = np.full(space.total_points, -1, dtype=np.int64)
    for line in Path(path).read_text().splitlines():
        a, b = (int(tok) for tok in line.split())
        mate[a] = b
        mate[b] = a
    p = Pairing(mate=mate, space=space)
    p.validate()
    return p


def write_edge_list(p: Pairing, path: str | Path) -> None:
    """Multigraph export: one 'u v' line per matching-pair, loops as 'u u'."""
    u, v = _edge_endpoints(p)
    lines = [f"{a} {b}" for a, b in zip(u, v)]
    Path(path).write_text("\n".join(lines) + "\n")
