"""
One-edge stable graphs and stabilization after forgetting markings.

Leg numbering on the factors of a separating graph follows the gluing
formula: the first factor carries its markings in increasing order and
then the node, the second factor carries the node first and then its
markings in increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .errors import DomainError, StructuralError
from .topft import is_stable, require_stable

IRR = "irr"
SEP = "sep"


@dataclass(frozen=True, order=True)
class OneEdgeGraph:
    kind: str
    g: int
    n: int
    g1: int = 0
    s1: tuple[int, ...] = ()
    g2: int = 0
    s2: tuple[int, ...] = ()

    @classmethod
    def irreducible(cls, g: int, n: int) -> "OneEdgeGraph":
        if g < 1:
            raise DomainError(f"no nonseparating node in genus {g}")
        require_stable(g, n)
        return cls(IRR, g, n, g1=g - 1)

    @classmethod
    def separating(cls, g1: int, s1: Sequence[int], g2: int, s2: Sequence[int]) -> "OneEdgeGraph":
        s1, s2 = tuple(sorted(s1)), tuple(sorted(s2))
        n = len(s1) + len(s2)
        if set(s1) & set(s2) or set(s1) | set(s2) != set(range(1, n + 1)):
            raise StructuralError(f"marking sets {s1} and {s2} do not partition 1..{n}")
        for gi, si in ((g1, s1), (g2, s2)):
            if not is_stable(gi, len(si) + 1):
                raise DomainError(f"unstable vertex: genus {gi} with {len(si)} legs and one half-edge")
        return cls(SEP, g1 + g2, n, g1, s1, g2, s2)

    @property
    def factors(self) -> tuple[tuple[int, int], ...]:
        """(genus, number of legs) of each factor of the gluing map's source."""
        if self.kind == IRR:
            return ((self.g - 1, self.n + 2),)
        return ((self.g1, len(self.s1) + 1), (self.g2, len(self.s2) + 1))

    def leg_position(self, factor: int, marking: int) -> int:
        """1-based leg index of ``marking`` on the given factor of a separating graph."""
        if factor == 1:
            return self.s1.index(marking) + 1
        return self.s2.index(marking) + 2

    def node_position(self, factor: int) -> int:
        return len(self.s1) + 1 if factor == 1 else 1

    def label(self) -> str:
        if self.kind == IRR:
            return "irr"
        fmt = lambda s: "{" + ",".join(map(str, s)) + "}"
        return f"sep:{self.g1}{fmt(self.s1)}|{self.g2}{fmt(self.s2)}"


def _oriented(g1, s1, g2, s2):
    """Smaller genus first; on a tie the side holding the smallest marking."""
    if g1 != g2:
        return (g1, s1, g2, s2) if g1 < g2 else (g2, s2, g1, s1)
    m1 = min(s1) if s1 else float("inf")
    m2 = min(s2) if s2 else float("inf")
    return (g1, s1, g2, s2) if m1 <= m2 else (g2, s2, g1, s1)


@lru_cache(maxsize=None)
def separating_graphs(g: int, n: int) -> tuple[OneEdgeGraph, ...]:
    """Cached form of enumerate_separating_graphs."""
    return tuple(enumerate_separating_graphs(g, n))


def oriented_separating(g1: int, s1, g2: int, s2) -> OneEdgeGraph:
    """The separating graph with the given sides, in canonical orientation."""
    graph = OneEdgeGraph.separating(g1, s1, g2, s2)
    return OneEdgeGraph(SEP, graph.g, graph.n, *_oriented(graph.g1, graph.s1, graph.g2, graph.s2))


def enumerate_separating_graphs(g: int, n: int) -> list[OneEdgeGraph]:
    require_stable(g, n)
    markings = range(1, n + 1)
    seen = set()
    for g1 in range(g + 1):
        g2 = g - g1
        for k in range(n + 1):
            for s1 in combinations(markings, k):
                s2 = tuple(i for i in markings if i not in s1)
                if is_stable(g1, k + 1) and is_stable(g2, n - k + 1):
                    seen.add(_oriented(g1, s1, g2, s2))
    return [OneEdgeGraph(SEP, g, n, *key) for key in sorted(seen)]


def enumerate_one_edge_graphs(g: int, n: int) -> list[OneEdgeGraph]:
    graphs = [OneEdgeGraph.irreducible(g, n)] if g >= 1 else []
    return graphs + list(separating_graphs(g, n))


def count_separating_graphs(g: int, n: int) -> int:
    """Number of separating graphs without materializing them."""
    from math import comb

    total = 0
    for g1 in range(g + 1):
        for k in range(n + 1):
            if is_stable(g1, k + 1) and is_stable(g - g1, n - k + 1):
                total += comb(n, k)
    # every graph is counted once per orientation, except the swap-symmetric one
    symmetric = 1 if n == 0 and g % 2 == 0 and is_stable(g // 2, 1) else 0
    return (total + symmetric) // 2


@dataclass(frozen=True)
class ContractionResult:
    kind: str  # "onto" or "boundary"
    factor: int | None = None
    legs: tuple[int, ...] = ()

    @property
    def onto(self) -> bool:
        return self.kind == "onto"


BOUNDARY = ContractionResult("boundary")


def stabilize_after_forgetting(graph: OneEdgeGraph, keep: Sequence[int], h: int, m: int) -> ContractionResult:
    """
    Forget every marking not in ``keep`` and stabilize.

    A vertex is contracted when it has genus 0 and at most two special
    points left (retained markings plus its half-edge); a single retained
    marking on a contracted vertex moves to the node of the other vertex.
    The composite lands onto the target iff exactly one vertex contracts
    and the survivor has genus h.  ``keep`` is ordered (keep[j] carries
    b_{j+1}) and the returned legs follow the same order.
    """
    if graph.kind != SEP:
        raise StructuralError("stabilize_after_forgetting needs a separating graph")
    keep = tuple(keep)
    if len(keep) != m:
        raise DomainError(f"|keep| = {len(keep)} but m = {m}")
    if len(set(keep)) != m or not all(1 <= k <= graph.n for k in keep):
        raise StructuralError(f"keep {keep} is not a set of markings in 1..{graph.n}")

    sides = ((graph.g1, set(graph.s1)), (graph.g2, set(graph.s2)))
    retained = [sum(1 for k in keep if k in s) for _, s in sides]
    contracted = [gi == 0 and r + 1 <= 2 for (gi, _), r in zip(sides, retained)]
    if contracted.count(True) != 1:
        return BOUNDARY
    survivor = 1 if contracted[1] else 2
    if sides[survivor - 1][0] != h:
        return BOUNDARY
    on_survivor = sides[survivor - 1][1]
    legs = tuple(
        graph.leg_position(survivor, k) if k in on_survivor else graph.node_position(survivor)
        for k in keep
    )
    return ContractionResult("onto", survivor, legs)


def q_image_is_boundary(g: int, n: int, h: int, keep: Sequence[int]) -> bool:
    """A nonseparating node survives every forgetful map, so the image is always boundary."""
    OneEdgeGraph.irreducible(g, n)
    return True
