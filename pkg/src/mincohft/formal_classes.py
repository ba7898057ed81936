"""
Formal cohomology classes built from a minimal class.

Only two kinds of symbols ever occur: the unit class ``1`` and the pulled
back minimal class ``γ[keep]``, where ``keep`` lists the markings that
survive the forgetful map in the order matching b_1..b_m.  Minimality is
encoded as a rewrite rule: a boundary pullback of ``γ[keep]`` is zero
unless the forgetful map contracts one of the two components.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ParityError, StabilityError, StructuralError, DomainError
from .stable_graphs import IRR, SEP, OneEdgeGraph, stabilize_after_forgetting
from .state_space import GRADED, MODES, UNGRADED
from .topft import is_stable


@dataclass(frozen=True)
class FormalGamma:
    h: int
    m: int
    deg: int
    mode: str = GRADED

    def __post_init__(self):
        h, m, deg = self.h, self.m, self.deg
        if self.mode not in MODES:
            raise StructuralError(f"unknown mode {self.mode!r}")
        if h < 0 or m < 0:
            raise StructuralError(f"genus and marking count must be nonnegative: (h,m)=({h},{m})")
        if not is_stable(h, m):
            raise StabilityError(
                f"stability violated: 2h-2+m = {2 * h - 2 + m} <= 0 for (h,m)=({h},{m})"
            )
        if self.trivial:
            if deg != 0:
                raise DomainError(f"H*(M_0,3) is concentrated in degree 0, got deg={deg}")
            return
        if deg <= 0:
            raise DomainError(f"minimal class on (h,m)=({h},{m}) must have positive degree, got deg={deg}")
        top = 2 * (3 * h - 3 + m)
        if deg > top:
            raise DomainError(f"degree {deg} exceeds the real dimension {top} of M_{h},{m}")
        if self.mode == GRADED and (deg - m) % 2:
            raise ParityError(f"parity condition violated: deg={deg}, m={m}")
        if self.mode == UNGRADED and deg % 2:
            raise ParityError(f"ungraded mode requires even degree: deg={deg}")

    @property
    def trivial(self) -> bool:
        """(h,m) = (0,3): the trivial CohFT already takes the value."""
        return (self.h, self.m) == (0, 3)


@dataclass(frozen=True, order=True)
class Symbol:
    kind: int  # 0 = unit, 1 = gamma
    keep: tuple[int, ...] = ()

    @property
    def is_gamma(self) -> bool:
        return self.kind == 1

    def __str__(self) -> str:
        if not self.kind:
            return "1"
        if self.keep == tuple(range(1, len(self.keep) + 1)):
            return "γ"
        return "γ[" + ",".join(map(str, self.keep)) + "]"


UNIT = Symbol(0)


def Gamma(keep: Iterable[int]) -> Symbol:
    return Symbol(1, tuple(keep))


Space = tuple  # (g, n)
Key = tuple  # tuple of Symbol, one per factor


class FormalClass:
    """
    Rational linear combination of symbol tuples on a product of moduli
    spaces.  Canonical: no zero coefficients.  Treated as immutable.
    """

    __slots__ = ("spaces", "terms")

    def __init__(self, spaces: Sequence[Space], terms: Mapping[Key, int | Fraction] | None = None):
        self.spaces = tuple(tuple(s) for s in spaces)
        k = len(self.spaces)
        clean = {}
        for key, c in (terms or {}).items():
            if c:
                if len(key) != k:
                    raise StructuralError(f"symbol tuple {key} does not match {k} factor(s)")
                clean[key] = Fraction(c)
        self.terms = clean

    @classmethod
    def _raw(cls, spaces: tuple, terms: dict) -> "FormalClass":
        # trusted constructor: spaces already tuples, terms nonzero Fractions/ints
        obj = cls.__new__(cls)
        obj.spaces = spaces
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, *spaces: Space) -> "FormalClass":
        return cls(spaces)

    @classmethod
    def unit(cls, space: Space, coeff: int | Fraction = 1) -> "FormalClass":
        return cls((space,), {(UNIT,): coeff})

    @classmethod
    def gamma(cls, space: Space, keep: Sequence[int], coeff: int | Fraction = 1) -> "FormalClass":
        keep = tuple(keep)
        if len(set(keep)) != len(keep) or not all(1 <= k <= space[1] for k in keep):
            raise StructuralError(f"keep {keep} is not a set of markings of M_{space[0]},{space[1]}")
        return cls((space,), {(Gamma(keep),): coeff})

    @property
    def factor_count(self) -> int:
        return len(self.spaces)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        return isinstance(other, FormalClass) and self.spaces == other.spaces and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.spaces, frozenset(self.terms.items())))

    def _same_space(self, other: "FormalClass") -> None:
        if self.spaces != other.spaces:
            raise StructuralError(f"space mismatch: {self.spaces} vs {other.spaces}")

    def __add__(self, other: "FormalClass") -> "FormalClass":
        self._same_space(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return FormalClass(self.spaces, out)

    def __neg__(self) -> "FormalClass":
        return FormalClass._raw(self.spaces, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "FormalClass") -> "FormalClass":
        return self + (-other)

    def __rmul__(self, scalar: int | Fraction) -> "FormalClass":
        if not scalar:
            return FormalClass(self.spaces)
        scalar = Fraction(scalar)
        return FormalClass._raw(self.spaces, {k: scalar * c for k, c in self.terms.items()})

    __mul__ = __rmul__

    def tensor(self, other: "FormalClass") -> "FormalClass":
        out: dict[Key, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                out[k1 + k2] = c1 * c2
        return FormalClass._raw(self.spaces + other.spaces, out)

    def coefficient(self, *symbols: Symbol) -> Fraction:
        return self.terms.get(tuple(symbols), Fraction(0))

    def unit_part(self) -> "FormalClass":
        return FormalClass._raw(self.spaces, {k: c for k, c in self.terms.items() if not any(s.kind for s in k)})

    def gamma_part(self) -> "FormalClass":
        return FormalClass._raw(self.spaces, {k: c for k, c in self.terms.items() if any(s.kind for s in k)})

    def degree(self, key: Key, gamma_deg: int) -> int:
        return gamma_deg * sum(1 for s in key if s.is_gamma)

    def validate(self, gamma: FormalGamma) -> None:
        """Every γ symbol lives on a genus-h factor and retains m markings."""
        for key in self.terms:
            for (g, n), s in zip(self.spaces, key):
                if s.is_gamma and (g != gamma.h or len(s.keep) != gamma.m or max(s.keep, default=0) > n):
                    raise StructuralError(f"{s} cannot live on M_{g},{n} for γ on M_{gamma.h},{gamma.m}")

    def sorted_terms(self) -> list[tuple[Key, Fraction]]:
        return sorted(self.terms.items())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.sorted_terms():
            if all(not s.is_gamma for s in key) and len(key) == 1:
                parts.append(str(c))
            else:
                parts.append(f"{c}·" + " ⊗ ".join(str(s) for s in key))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"FormalClass({list(self.spaces)}, {str(self)!r})"

    def to_json(self) -> dict:
        return {
            "spaces": [list(s) for s in self.spaces],
            "terms": [
                {"symbols": [str(s) if not s.is_gamma else {"gamma": list(s.keep)} for s in key], "coeff": str(c)}
                for key, c in self.sorted_terms()
            ],
        }


def _single(cls: FormalClass, graph: OneEdgeGraph) -> None:
    if cls.spaces != ((graph.g, graph.n),):
        raise StructuralError(f"class on {cls.spaces} cannot be pulled back along a graph into M_{graph.g},{graph.n}")


def pullback_gamma_q(cls: FormalClass, graph: OneEdgeGraph) -> FormalClass:
    """Pullback along the nonseparating gluing map: γ terms vanish by minimality."""
    if graph.kind != IRR:
        raise StructuralError("pullback_gamma_q needs an irreducible graph")
    _single(cls, graph)
    return FormalClass._raw(graph.factors, {k: c for k, c in cls.terms.items() if not k[0].kind})


def pullback_gamma_r(cls: FormalClass, graph: OneEdgeGraph) -> FormalClass:
    if graph.kind != SEP:
        raise StructuralError("pullback_gamma_r needs a separating graph")
    _single(cls, graph)
    out: dict[Key, Fraction] = {}
    for (sym,), c in cls.terms.items():
        if not sym.is_gamma:
            key = (UNIT, UNIT)
        else:
            res = stabilize_after_forgetting(graph, sym.keep, graph.g, len(sym.keep))
            if not res.onto:
                continue
            key = (Gamma(res.legs), UNIT) if res.factor == 1 else (UNIT, Gamma(res.legs))
        out[key] = out.get(key, 0) + c
    return FormalClass(graph.factors, out)


def pullback_forget(cls: FormalClass) -> FormalClass:
    """Pullback along the map forgetting the last marking (n+1)."""
    if cls.factor_count != 1:
        raise StructuralError("forgetful pullback acts on a single factor")
    (g, n), = cls.spaces
    return FormalClass._raw(((g, n + 1),), cls.terms)


def relabel(cls: FormalClass, new_position: Mapping[int, int] | Sequence[int]) -> FormalClass:
    """Move marking k to ``new_position[k]`` (a 1-based map; sequences are indexed from 1)."""
    if cls.factor_count != 1:
        raise StructuralError("relabel acts on a single factor")
    if not isinstance(new_position, Mapping):
        new_position = {k + 1: v for k, v in enumerate(new_position)}
    out = {}
    for (sym,), c in cls.terms.items():
        key = (Gamma(new_position[k] for k in sym.keep),) if sym.is_gamma else (sym,)
        out[key] = c
    return FormalClass(cls.spaces, out)


def check_takes_value(theory_values: Iterable[FormalClass], target: FormalClass) -> bool:
    """Whether ``target`` lies in the rational span of the values on its space."""
    import sympy

    values = [v for v in theory_values if v.spaces == target.spaces]
    if not target:
        return True
    keys = sorted({k for v in values + [target] for k in v.terms})
    rows = [[v.terms.get(k, 0) for k in keys] for v in values]
    if not rows:
        return False
    base = sympy.Matrix(rows).rank()
    return sympy.Matrix(rows + [[target.terms.get(k, 0) for k in keys]]).rank() == base
