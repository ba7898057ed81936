"""
The topological field theory of the genus-m surface algebra.

Two independent evaluators are provided: a closed form that reads the
answer off the insertion multiset, and a gluing oracle that multiplies
the insertions in the algebra, appends g handle elements and pairs the
result with the unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import StabilityError
from .state_space import A, BasisVector, StateSpace, Vector, handle_element, star, star_product


def is_stable(g: int, n: int) -> bool:
    return g >= 0 and n >= 0 and 2 * g - 2 + n > 0


def require_stable(g: int, n: int) -> None:
    if not is_stable(g, n):
        raise StabilityError(f"unstable moduli space: 2g-2+n = {2 * g - 2 + n} <= 0 for (g,n)=({g},{n})")


@dataclass(frozen=True)
class TopftQuery:
    g: int
    insertions: tuple[BasisVector, ...]
    space: StateSpace

    def __post_init__(self):
        object.__setattr__(self, "insertions", tuple(self.insertions))
        require_stable(self.g, len(self.insertions))
        for v in self.insertions:
            self.space.check(v)

    @property
    def n(self) -> int:
        return len(self.insertions)


def handle_factor(space: StateSpace) -> int:
    """Value of omega_{1,n}(a,...,a): 2-2m, or 2+2m without the grading."""
    return 2 - 2 * space.m if space.graded else 2 + 2 * space.m


def topft_value(space: StateSpace, g: int, insertions: Sequence[BasisVector]) -> int:
    """Closed-form evaluation; assumes stability and in-range indices."""
    if g >= 2:
        return 0
    return topft_from_others(space, g, [v for v in insertions if v.kind != "a"])


def topft_from_others(space: StateSpace, g: int, others: Sequence[BasisVector]) -> int:
    """Closed form from the non-unit insertions in order (g <= 1 handled here too)."""
    if g >= 2:
        return 0
    if g == 1:
        return handle_factor(space) if not others else 0
    if len(others) == 1:
        return 1 if others[0].kind == "d" else 0
    if len(others) == 2:
        u, v = others
        if u.index != v.index or {u.kind, v.kind} != {"b", "c"}:
            return 0
        # canonical order is b_i before c_i
        return 1 if u.kind == "b" or not space.graded else -1
    return 0


def evaluate_topft_closed(q: TopftQuery) -> Fraction:
    return Fraction(topft_value(q.space, q.g, q.insertions))


def evaluate_topft_oracle(q: TopftQuery) -> Fraction:
    space = q.space
    product = star_product((Vector.basis(v) for v in q.insertions), space)
    h = handle_element(space)
    for _ in range(q.g):
        product = star(product, h, space)
    return space.eta_vectors(product, Vector.basis(A))


def trivial_cohft_value(g: int, n: int) -> Fraction:
    """The one-dimensional trivial CohFT: Omega_{g,n}(1,...,1) = 1."""
    require_stable(g, n)
    return Fraction(1)
