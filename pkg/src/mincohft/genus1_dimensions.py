"""
Dimensions of spaces of minimal classes on the genus-one moduli spaces.

The weight-graded piece Gr^W_k H^k(M_{1,n}) is S[k+1] tensored with an
induced representation of dimension C(n, k), where S[k+1] is the sum of
holomorphic and antiholomorphic cusp forms of weight k+1 for SL(2, Z).
Minimal classes of degree j pair perfectly with Gr^W_{2n-j}.

The level-one cusp form dimension formula is classical (see any text on
modular forms, e.g. Serre, "A Course in Arithmetic", VII.3).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import comb

from .errors import DomainError


@dataclass(frozen=True)
class DimQuery:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"M_1,n needs n >= 1, got n={self.n}")
        if self.k < 0:
            raise DomainError(f"degree must be nonnegative, got k={self.k}")


def dim_cusp_forms(k: int) -> int:
    """dim S_k for SL(2, Z)."""
    if k < 0:
        raise DomainError(f"weight must be nonnegative, got k={k}")
    if k % 2 or k < 12:
        return 0
    return k // 12 - 1 if k % 12 == 2 else k // 12


def dim_cusp_forms_by_monomials(k: int) -> int:
    """
    Independent count: M_k has basis E4^a E6^b with 4a + 6b = k, and S_k
    has codimension one in M_k for even k >= 4.
    """
    if k < 0:
        raise DomainError(f"weight must be nonnegative, got k={k}")
    if k % 2 or k < 4:
        return 0
    modular = sum(1 for a in range(k // 4 + 1) if (k - 4 * a) % 6 == 0)
    return modular - 1


def dim_grw_k(n: int, k: int) -> int:
    """dim Gr^W_k H^k(M_{1,n})."""
    DimQuery(n, k)
    if k == 0:
        # constant functions; the representation formula only applies for k >= 1
        return 1
    if n < k:
        return 0
    return 2 * dim_cusp_forms(k + 1) * comb(n, k)


def dim_minimal(n: int, j: int) -> int:
    """dim of the degree-j minimal classes on the compactified M_{1,n}."""
    if n < 1:
        raise DomainError(f"M_1,n needs n >= 1, got n={n}")
    if not 0 <= j <= 2 * n:
        raise DomainError(f"degree j={j} outside 0..{2 * n} for M_1,{n}")
    return dim_grw_k(n, 2 * n - j)


def genus0_minimal_check(n: int, j: int) -> int:
    """In genus zero the point class is the only minimal class."""
    if n < 3:
        raise DomainError(f"M_0,n needs n >= 3, got n={n}")
    return 1 if j == 2 * (n - 3) else 0


def minimal_table(n_max: int) -> list[tuple[int, int, int]]:
    return [(n, j, dim_minimal(n, j)) for n in range(1, n_max + 1) for j in range(2 * n + 1)]


def grw_table(n_max: int) -> list[tuple[int, int, int]]:
    return [(n, k, dim_grw_k(n, k)) for n in range(1, n_max + 1) for k in range(2 * n + 1)]


def to_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def dims_csv(n_max: int, grw: bool = False) -> str:
    if grw:
        return to_csv(grw_table(n_max), ["n", "k", "dim_grw_k"])
    return to_csv(minimal_table(n_max), ["n", "j", "dim_minimal"])
