"""
State space of the genus-m surface Frobenius algebra.

The vector space has basis a, b_1..b_m, c_1..c_m, d with Z-grading
0, 1, 1, 2; a is the unit and the only non-nilpotent basis element.
In graded mode b_i, c_i are odd and the pairing is graded-symmetric; in
ungraded mode every vector is even and the pairing is symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import StructuralError

GRADED = "graded"
UNGRADED = "ungraded"
MODES = (GRADED, UNGRADED)

_Z_GRADE = {"a": 0, "b": 1, "c": 1, "d": 2}


class BasisVector(NamedTuple):
    kind: str  # one of "a", "b", "c", "d"
    index: int = 0  # 1..m for b/c, 0 for a/d

    @property
    def z_grade(self) -> int:
        return _Z_GRADE[self.kind]

    @property
    def parity(self) -> int:
        """Intrinsic Z2 parity; StateSpace.parity accounts for ungraded mode."""
        return self.z_grade % 2

    def __str__(self) -> str:
        if self.kind in ("a", "d"):
            return self.kind
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, token: str) -> "BasisVector":
        token = token.strip()
        if token in ("a", "d"):
            return cls(token, 0)
        if len(token) >= 2 and token[0] in ("b", "c") and token[1:].isdigit():
            i = int(token[1:])
            if i >= 1:
                return cls(token[0], i)
        raise StructuralError(f"not a basis vector token: {token!r}")


A = BasisVector("a", 0)
D = BasisVector("d", 0)


def B(i: int) -> BasisVector:
    return BasisVector("b", i)


def C(i: int) -> BasisVector:
    return BasisVector("c", i)


def parse_insertions(text: str | Sequence[str]) -> tuple[BasisVector, ...]:
    tokens = text.split(",") if isinstance(text, str) else list(text)
    tokens = [t for t in (s.strip() for s in tokens) if t]
    return tuple(BasisVector.parse(t) for t in tokens)


def format_insertions(insertions: Iterable[BasisVector]) -> list[str]:
    return [str(v) for v in insertions]


class Vector:
    """Element of V as a sparse map basis vector -> Fraction (no zero entries)."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[BasisVector, int | Fraction] | None = None):
        self._coeffs = {
            k: Fraction(v) for k, v in (coeffs or {}).items() if v != 0
        }

    @classmethod
    def basis(cls, v: BasisVector, coeff: int | Fraction = 1) -> "Vector":
        return cls({v: coeff})

    def __getitem__(self, v: BasisVector) -> Fraction:
        return self._coeffs.get(v, Fraction(0))

    def items(self) -> Iterator[tuple[BasisVector, Fraction]]:
        return iter(sorted(self._coeffs.items()))

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self._coeffs
        return isinstance(other, Vector) and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self._coeffs.items()))

    def __add__(self, other: "Vector") -> "Vector":
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) + v
        return Vector(out)

    def __neg__(self) -> "Vector":
        return Vector({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other: "Vector") -> "Vector":
        return self + (-other)

    def __rmul__(self, scalar: int | Fraction) -> "Vector":
        return Vector({k: scalar * v for k, v in self._coeffs.items()})

    def __repr__(self) -> str:
        if not self._coeffs:
            return "Vector(0)"
        return "Vector(" + " + ".join(f"{c}*{k}" for k, c in self.items()) + ")"


class BivectorTerm(NamedTuple):
    left: BasisVector
    right: BasisVector
    coeff: Fraction


@dataclass(frozen=True)
class StateSpace:
    m: int
    mode: str = GRADED
    basis: tuple[BasisVector, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 0:
            raise StructuralError(f"m must be a nonnegative integer, got {self.m!r}")
        if self.mode not in MODES:
            raise StructuralError(f"unknown mode {self.mode!r}")
        basis = (A,) + tuple(B(i) for i in range(1, self.m + 1))
        basis += tuple(C(i) for i in range(1, self.m + 1)) + (D,)
        object.__setattr__(self, "basis", basis)

    @property
    def graded(self) -> bool:
        return self.mode == GRADED

    @property
    def unit(self) -> BasisVector:
        return A

    @property
    def dim(self) -> int:
        return 2 * self.m + 2

    def parity(self, v: BasisVector) -> int:
        return v.parity if self.graded else 0

    def parities(self, insertions: Iterable[BasisVector]) -> list[int]:
        if not self.graded:
            return [0 for _ in insertions]
        return [_Z_GRADE[v.kind] & 1 for v in insertions]

    def check(self, v: BasisVector) -> BasisVector:
        if v.kind in ("b", "c"):
            if not 1 <= v.index <= self.m:
                raise StructuralError(f"index of {v} out of range 1..{self.m}")
        elif v.kind not in ("a", "d") or v.index != 0:
            raise StructuralError(f"malformed basis vector {v!r}")
        return v

    def eta(self, u: BasisVector, v: BasisVector) -> Fraction:
        ku, kv = u.kind, v.kind
        if (ku, kv) in (("a", "d"), ("d", "a")):
            return Fraction(1)
        if u.index == v.index:
            if (ku, kv) == ("b", "c"):
                return Fraction(1)
            if (ku, kv) == ("c", "b"):
                return Fraction(-1) if self.graded else Fraction(1)
        return Fraction(0)

    def eta_vectors(self, x: Vector, y: Vector) -> Fraction:
        return sum(
            (cx * cy * self.eta(u, v) for u, cx in x.items() for v, cy in y.items()),
            Fraction(0),
        )

    def eta_matrix(self) -> list[list[Fraction]]:
        return [[self.eta(u, v) for v in self.basis] for u in self.basis]

    def eta_determinant(self) -> Fraction:
        import sympy

        return Fraction(str(sympy.Matrix(self.eta_matrix()).det()))

    @cached_property
    def basis_set(self) -> frozenset[BasisVector]:
        return frozenset(self.basis)

    @cached_property
    def bivector(self) -> tuple[BivectorTerm, ...]:
        """Terms of the inverse of eta, a (x) d + d (x) a - sum(b_i (x) c_i - c_i (x) b_i)."""
        bc = Fraction(-1) if self.graded else Fraction(1)
        terms = [BivectorTerm(A, D, Fraction(1)), BivectorTerm(D, A, Fraction(1))]
        for i in range(1, self.m + 1):
            terms.append(BivectorTerm(B(i), C(i), bc))
            terms.append(BivectorTerm(C(i), B(i), Fraction(1)))
        return tuple(terms)

    def star_basis(self, u: BasisVector, v: BasisVector) -> tuple[Fraction, BasisVector] | None:
        """Product of two basis vectors as (coefficient, basis vector), or None if zero."""
        self.check(u)
        self.check(v)
        if u.kind == "a":
            return Fraction(1), v
        if v.kind == "a":
            return Fraction(1), u
        if u.index == v.index:
            if (u.kind, v.kind) == ("b", "c"):
                return Fraction(1), D
            if (u.kind, v.kind) == ("c", "b"):
                return (Fraction(-1) if self.graded else Fraction(1)), D
        return None


def build_state_space(m: int, mode: str = GRADED) -> StateSpace:
    return StateSpace(m, mode)


def star(x: Vector, y: Vector, space: StateSpace) -> Vector:
    out: dict[BasisVector, Fraction] = {}
    for u, cu in x.items():
        for v, cv in y.items():
            prod = space.star_basis(u, v)
            if prod is not None:
                c, w = prod
                out[w] = out.get(w, 0) + c * cu * cv
    return Vector(out)


def star_product(vectors: Iterable[Vector], space: StateSpace) -> Vector:
    """Left-to-right product; the empty product is the unit."""
    acc = Vector.basis(A)
    for v in vectors:
        acc = star(acc, v, space)
    return acc


def handle_element(space: StateSpace) -> Vector:
    """Star-contraction of the bivector; (2 - 2m) d in graded mode."""
    acc = Vector()
    for t in space.bivector:
        acc = acc + t.coeff * star(Vector.basis(t.left), Vector.basis(t.right), space)
    return acc


def koszul_sign(perm: Sequence[int], parities: Sequence[int]) -> int:
    """
    Sign of reordering graded items.

    ``perm`` is 0-based one-line notation: the reordered sequence is
    ``[items[perm[0]], items[perm[1]], ...]`` and ``parities[j]`` is the
    parity of ``items[j]``.  The sign is -1 to the number of pairs of odd
    items whose relative order is reversed.
    """
    n = len(perm)
    if len(parities) != n:
        raise StructuralError(
            f"permutation of length {n} but {len(parities)} parities"
        )
    if sorted(perm) != list(range(n)):
        raise StructuralError(f"not a permutation of 0..{n - 1}: {list(perm)}")
    odd = [j for j in perm if parities[j] % 2]
    inversions = sum(1 for k in range(len(odd)) for l in range(k + 1, len(odd)) if odd[k] > odd[l])
    return -1 if inversions % 2 else 1
