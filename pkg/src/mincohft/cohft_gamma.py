"""
The CohFT obtained from a minimal class, and mechanical axiom checks.

``OmegaGamma`` adds the pulled-back minimal class to the TopFT exactly on
the insertions that permute (b_1, ..., b_m, a, ..., a) in genus h.  The
check functions are generic: they accept any theory exposing ``space``
and ``evaluate(g, insertions)``, so the same code verifies the TopFT,
the trivial CohFT and the corrected theory.

Sign conventions.  The gluing formula for a separating graph is applied
after reordering the insertions to (factor-1 markings ascending,
factor-2 markings ascending); the Koszul sign of that reordering
multiplies the right-hand side.  Bivector entries are appended to the
first factor and prepended to the second, with no further sign.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

from .errors import DomainError, StructuralError
from .formal_classes import (
    UNIT,
    FormalClass,
    FormalGamma,
    Gamma,
    check_takes_value,
    pullback_forget,
    pullback_gamma_q,
    pullback_gamma_r,
    relabel,
)
from .stable_graphs import SEP, OneEdgeGraph, oriented_separating, separating_graphs
from .state_space import (
    A,
    B,
    BasisVector,
    BivectorTerm,
    StateSpace,
    koszul_sign,
)
from .sweep import CellResult, SweepConfig, VerificationReport, cell_rng, run_items, universe
from .topft import is_stable, require_stable, topft_from_others, topft_value


class TrivialSpace:
    """State space of the trivial CohFT: one even vector 1 with eta(1,1) = 1."""

    m = 0
    mode = "trivial"
    graded = False
    basis = (A,)
    basis_set = frozenset(basis)
    unit = A
    bivector = (BivectorTerm(A, A, Fraction(1)),)

    def parity(self, v: BasisVector) -> int:
        return 0

    def parities(self, insertions) -> list[int]:
        return [0] * len(insertions)

    def eta(self, u: BasisVector, v: BasisVector) -> Fraction:
        return Fraction(1)

    def check(self, v: BasisVector) -> BasisVector:
        if v != A:
            raise StructuralError(f"the trivial CohFT has the single basis vector 1, got {v}")
        return v


class _FractionCache(dict):
    def __missing__(self, k):
        v = self[k] = Fraction(k)
        return v


_FRACTIONS = _FractionCache()


class _Theory:
    space: StateSpace
    gamma: FormalGamma | None = None

    def __init__(self):
        self._cache: dict = {}
        self._zeros: dict = {}

    def evaluate(self, g: int, insertions: Sequence[BasisVector]) -> FormalClass:
        key = (g, insertions if type(insertions) is tuple else tuple(insertions))
        val = self._cache.get(key)
        if val is None:
            if 2 * g - 2 + len(insertions) <= 0 or g < 0:
                require_stable(g, len(key[1]))
            if not self.space.basis_set.issuperset(key[1]):
                for v in key[1]:
                    self.space.check(v)
            val = self._cache[key] = self._evaluate(g, key[1])
        return val

    def value(self, g: int, insertions: tuple) -> FormalClass:
        """Cached evaluation for insertions already known to lie in the basis."""
        key = (g, insertions)
        val = self._cache.get(key)
        if val is None:
            if g < 0 or 2 * g - 2 + len(insertions) <= 0:
                require_stable(g, len(insertions))
            val = self._cache[key] = self._evaluate(g, insertions)
        return val

    def zero(self, g: int, n: int) -> FormalClass:
        z = self._zeros.get((g, n))
        if z is None:
            z = self._zeros[(g, n)] = FormalClass._raw(((g, n),), {})
        return z

    def _evaluate(self, g, insertions) -> FormalClass:
        raise NotImplementedError

    def targeted_tuples(self, g: int, n: int, rng: random.Random, limit: int):
        return []


class TopFT(_Theory):
    """omega^m as a (degree-zero) CohFT."""

    def __init__(self, space: StateSpace):
        super().__init__()
        self.space = space

    def _evaluate(self, g, insertions):
        val = topft_value(self.space, g, insertions)
        return FormalClass._raw(((g, len(insertions)),), {(UNIT,): _FRACTIONS[val]} if val else {})


class TrivialCohFT(_Theory):
    def __init__(self):
        super().__init__()
        self.space = TrivialSpace()

    def _evaluate(self, g, insertions):
        return FormalClass._raw(((g, len(insertions)),), {(UNIT,): _FRACTIONS[1]})


def correction_data(space, gamma: FormalGamma, g: int, insertions: Sequence[BasisVector], others=None):
    """
    (sign, keep) when the insertions permute (b_1..b_m, a..a) in genus h,
    else None.  keep[j] is the 1-based marking carrying b_{j+1}; sign is
    the Koszul sign relative to the canonical order.  ``others`` may carry
    the non-a insertions to allow an early exit.
    """
    if g != gamma.h or len(insertions) < gamma.m:
        return None
    if others is not None and len(others) != gamma.m:
        return None
    pos: dict[int, int] = {}
    order: list[int] = []
    for k, v in enumerate(insertions, 1):
        if v.kind == "a":
            continue
        if v.kind != "b" or v.index in pos:
            return None
        pos[v.index] = k
        order.append(v.index)
    if len(pos) != gamma.m:
        return None
    keep = tuple(pos[j] for j in range(1, gamma.m + 1))
    sign = 1
    if space.graded:
        inv = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
        sign = -1 if inv % 2 else 1
    return sign, keep


@dataclass(frozen=True)
class OmegaQuery:
    gamma: FormalGamma
    g: int
    insertions: tuple[BasisVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "insertions", tuple(self.insertions))
        require_stable(self.g, len(self.insertions))

    @property
    def n(self) -> int:
        return len(self.insertions)


class OmegaGamma(_Theory):
    def __init__(self, gamma: FormalGamma):
        super().__init__()
        if gamma.trivial:
            raise DomainError("(h,m)=(0,3) takes the trivial CohFT branch; use TrivialCohFT")
        self.gamma = gamma
        self.space = StateSpace(gamma.m, gamma.mode)

    def _evaluate(self, g, insertions):
        # nonzero needs at most two non-unit insertions (TopFT) or exactly m (correction)
        k = len(insertions) - insertions.count(A)
        if (k > 2 or g >= 2) and (k != self.gamma.m or g != self.gamma.h):
            return self.zero(g, len(insertions))
        terms = {}
        others = [v for v in insertions if v.kind != "a"]
        val = topft_from_others(self.space, g, others)
        if val:
            terms[(UNIT,)] = _FRACTIONS[val]
        corr = correction_data(self.space, self.gamma, g, insertions, others)
        if corr is not None:
            sign, keep = corr
            terms[(Gamma(keep),)] = _FRACTIONS[sign]
        return FormalClass._raw(((g, len(insertions)),), terms)

    def correction(self, g, insertions) -> FormalClass:
        return self.evaluate(g, insertions).gamma_part()

    def targeted_tuples(self, g: int, n: int, rng: random.Random, limit: int):
        """Permutations of the correction support, and near misses of it."""
        h, m = self.gamma.h, self.gamma.m
        basis = self.space.basis
        out = []
        if n >= m:
            canonical = [B(j) for j in range(1, m + 1)] + [A] * (n - m)
            if g == h:
                out.extend(_support_permutations(canonical, rng, max(1, limit // 2)))
            for _ in range(limit - len(out)):
                t = canonical[:]
                rng.shuffle(t)
                for _ in range(rng.randint(1, 2)):
                    t[rng.randrange(n)] = rng.choice(basis)
                out.append(tuple(t))
        else:
            for _ in range(limit):
                k = rng.randint(0, n)
                t = [B(j) for j in rng.sample(range(1, m + 1), k)] + [A] * (n - k)
                rng.shuffle(t)
                if t and rng.random() < 0.5:
                    t[rng.randrange(n)] = rng.choice(basis)
                out.append(tuple(t))
        return out


def _support_permutations(canonical: list[BasisVector], rng: random.Random, limit: int):
    """Distinct orderings of the support multiset: all of them if few, else a seeded sample."""
    n = len(canonical)
    m = sum(1 for v in canonical if v.kind == "b")
    count = math.perm(n, m)
    if count <= limit:
        out = set(permutations(canonical))
        return sorted(out)
    out = {tuple(canonical)}
    while len(out) < limit:
        t = canonical[:]
        rng.shuffle(t)
        out.add(tuple(t))
    return sorted(out)


def make_theory(gamma: FormalGamma) -> _Theory:
    return TrivialCohFT() if gamma.trivial else OmegaGamma(gamma)


def evaluate_omega_gamma(q: OmegaQuery) -> FormalClass:
    return make_theory(q.gamma).evaluate(q.g, q.insertions)


# --------------------------------------------------------------------------
# classification of correction cases for separating graphs


@dataclass(frozen=True)
class CorrectionCase:
    kind: str  # "none", "case1", "case2", "case3", "case4"
    index: int | None = None

    def __str__(self) -> str:
        return self.kind if self.index is None else f"{self.kind}({self.index})"


NO_CASE = CorrectionCase("none")


def _is_support(w: Sequence[BasisVector], m: int) -> bool:
    bs = [v.index for v in w if v.kind == "b"]
    return all(v.kind in ("a", "b") for v in w) and sorted(bs) == list(range(1, m + 1))


def _only_a_plus(w: Sequence[BasisVector], extra: BasisVector | None) -> bool:
    rest = [v for v in w if v.kind != "a"]
    return rest == ([] if extra is None else [extra])


def classify_correction_case(
    graph: OneEdgeGraph, insertions: Sequence[BasisVector], term: BivectorTerm, gamma: FormalGamma
) -> CorrectionCase:
    """Which configuration of the four-case enumeration (if any) the term realizes."""
    if graph.kind != SEP or any(v.kind in "cd" for v in insertions):
        return NO_CASE
    l, r = term.left, term.right
    w1 = [insertions[k - 1] for k in graph.s1]
    w2 = [insertions[k - 1] for k in graph.s2]
    h, m = gamma.h, gamma.m
    if graph.g1 == h and graph.g2 == 0 and _is_support(w1 + [l], m):
        if l.kind == "a" and r.kind == "d" and _only_a_plus(w2, None):
            return CorrectionCase("case1")
        if l.kind == "b" and r.kind == "c" and r.index == l.index and _only_a_plus(w2, l):
            return CorrectionCase("case2", l.index)
    if graph.g2 == h and graph.g1 == 0 and _is_support([r] + w2, m):
        if l.kind == "d" and r.kind == "a" and _only_a_plus(w1, None):
            return CorrectionCase("case3")
        if l.kind == "c" and r.kind == "b" and l.index == r.index and _only_a_plus(w1, r):
            return CorrectionCase("case4", r.index)
    return NO_CASE


# --------------------------------------------------------------------------
# axiom checks


@dataclass
class CheckOutcome:
    ok: bool
    lhs: object = ""
    rhs: object = ""

    def __bool__(self) -> bool:
        return self.ok


def _sorting_data(theory, insertions):
    """Sorted representative, the koszul sign and the marking map from it to ``insertions``."""
    n = len(insertions)
    order = sorted(range(n), key=lambda k: insertions[k])
    rep = tuple(insertions[k] for k in order)
    sigma = [0] * n
    for j, k in enumerate(order):
        sigma[k] = j
    sign = koszul_sign(sigma, theory.space.parities(rep))
    new_position = {sigma[k] + 1: k + 1 for k in range(n)}
    return rep, sign, new_position


def permutation_outcome(theory, g, insertions, sigma: Sequence[int]) -> CheckOutcome:
    """Omega(v o sigma) against koszul * (Omega(v) with markings transported)."""
    ins = tuple(insertions)
    permuted = tuple(ins[j] for j in sigma)
    sign = koszul_sign(sigma, theory.space.parities(ins))
    new_position = {sigma[k] + 1: k + 1 for k in range(len(ins))}
    lhs = theory.evaluate(g, permuted)
    rhs = sign * relabel(theory.evaluate(g, ins), new_position)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def axiom_i_against_representative(theory, g, insertions) -> CheckOutcome:
    rep, sign, new_position = _sorting_data(theory, insertions)
    lhs = theory.evaluate(g, insertions)
    rhs = sign * relabel(theory.evaluate(g, rep), new_position)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def check_axiom_i(theory, g: int, insertions: Sequence[BasisVector], samples: int = 720, seed: int = 0) -> bool:
    """Graded S_n invariance over every permutation (a seeded sample when n! > samples)."""
    ins = tuple(insertions)
    n = len(ins)
    if math.factorial(n) <= samples:
        sigmas: Iterable = permutations(range(n))
    else:
        rng = cell_rng(seed, "perm", g, n)
        sigmas = (rng.sample(range(n), n) for _ in range(samples))
    return all(permutation_outcome(theory, g, ins, s).ok for s in sigmas)


def axiom_ii_q_outcome(theory, g, insertions) -> CheckOutcome:
    ins = tuple(insertions)
    graph = OneEdgeGraph.irreducible(g, len(ins))
    lhs = pullback_gamma_q(theory.evaluate(g, ins), graph)
    acc: dict = {}
    for t in theory.space.bivector:
        val = theory.value(g - 1, ins + (t.left, t.right))
        for k, c in val.terms.items():
            acc[k] = acc.get(k, 0) + t.coeff * c
    rhs = FormalClass(graph.factors, acc)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def check_axiom_ii_q(theory, g: int, insertions: Sequence[BasisVector]) -> bool:
    return axiom_ii_q_outcome(theory, g, insertions).ok


def reorder_sign(theory, insertions, graph: OneEdgeGraph) -> int:
    perm = [k - 1 for k in graph.s1 + graph.s2]
    return koszul_sign(perm, theory.space.parities(insertions))


def r_rhs_terms(theory, insertions, graph: OneEdgeGraph, first=None, second=None):
    """
    Per-bivector-term right-hand sides of the separating gluing identity,
    each already multiplied by the reordering sign and the term coefficient.
    ``first``/``second`` override the theories evaluated on the factors.
    """
    first = theory if first is None else first
    second = theory if second is None else second
    ins = tuple(insertions)
    if not theory.space.basis_set.issuperset(ins):
        for v in ins:
            theory.space.check(v)
    w1 = tuple(ins[k - 1] for k in graph.s1)
    w2 = tuple(ins[k - 1] for k in graph.s2)
    sign = reorder_sign(theory, ins, graph)
    out = []
    for t in theory.space.bivector:
        left = first.value(graph.g1, w1 + (t.left,))
        if not left:
            out.append((t, None))
            continue
        right = second.value(graph.g2, (t.right,) + w2)
        out.append((t, (sign * t.coeff) * left.tensor(right) if right else None))
    return out


def _sum(spaces, parts) -> FormalClass:
    acc: dict = {}
    for p in parts:
        if p is not None:
            for k, c in p.terms.items():
                acc[k] = acc.get(k, 0) + c
    return FormalClass(spaces, acc)


def axiom_ii_r_outcome(theory, g, insertions, graph: OneEdgeGraph, terms=None) -> CheckOutcome:
    ins = tuple(insertions)
    lhs = pullback_gamma_r(theory.evaluate(g, ins), graph)
    terms = r_rhs_terms(theory, ins, graph) if terms is None else terms
    rhs = _sum(graph.factors, (p for _, p in terms))
    return CheckOutcome(lhs == rhs, lhs, rhs)


def check_axiom_ii_r(theory, g: int, insertions: Sequence[BasisVector], graph: OneEdgeGraph) -> bool:
    return axiom_ii_r_outcome(theory, g, insertions, graph).ok


def case_outcome(theory, g, insertions, graph: OneEdgeGraph, terms=None) -> CheckOutcome:
    """
    Four-case completeness: every term contributing γ is classified, every
    classified term contributes γ, and the γ parts of both sides agree.
    """
    gamma = theory.gamma
    ins = tuple(insertions)
    lhs = pullback_gamma_r(theory.evaluate(g, ins), graph).gamma_part()
    terms = r_rhs_terms(theory, ins, graph) if terms is None else terms
    ok = True
    cases = []
    gamma_parts = []
    # every case needs insertions drawn from a and the b's only
    classify = gamma is not None and all(v.kind in "ab" for v in ins)
    for t, part in terms:
        gp = part.gamma_part() if part is not None else None
        case = classify_correction_case(graph, ins, t, gamma) if classify else NO_CASE
        if bool(gp) != (case is not NO_CASE):
            ok = False
        if case is not NO_CASE:
            cases.append(str(case))
        gamma_parts.append(gp)
    rhs = _sum(graph.factors, gamma_parts)
    if lhs and not cases:
        ok = False
    ok = ok and lhs == rhs
    return CheckOutcome(ok, lhs, f"{rhs} via {cases or 'none'}")


def axiom_iii_outcome(theory, g, insertions) -> CheckOutcome:
    ins = tuple(insertions)
    unit = theory.space.unit
    lhs = theory.evaluate(g, ins + (unit,))
    rhs = pullback_forget(theory.evaluate(g, ins))
    return CheckOutcome(lhs == rhs, lhs, rhs)


def unit_03_outcome(theory, v1: BasisVector, v2: BasisVector) -> CheckOutcome:
    lhs = theory.evaluate(0, (v1, v2, theory.space.unit))
    rhs = FormalClass.unit((0, 3), theory.space.eta(v1, v2))
    return CheckOutcome(lhs == rhs, lhs, rhs)


def check_axiom_iii(theory, g: int, insertions: Sequence[BasisVector]) -> bool:
    """Unit axiom for appending 1 to ``insertions`` (and the (0,3) identity when n = 2, g = 0)."""
    ins = tuple(insertions)
    if g == 0 and len(ins) == 2:
        return unit_03_outcome(theory, *ins).ok
    return axiom_iii_outcome(theory, g, ins).ok


def evenness_outcome(theory, g, insertions) -> CheckOutcome:
    """A γ term only appears when the insertion parity matches deg γ."""
    val = theory.evaluate(g, insertions)
    parity = sum(theory.space.parities(insertions)) % 2
    gamma = theory.gamma
    ok = all(
        not any(s.is_gamma for s in key) or (gamma.deg - parity) % 2 == 0 or not theory.space.graded
        for key in val.terms
    )
    return CheckOutcome(ok, val, f"insertion parity {parity}")


# --------------------------------------------------------------------------
# the Theorem-1 sweep


def _graph_choices(graphs: list[OneEdgeGraph], rng: random.Random, k: int) -> list[OneEdgeGraph]:
    if len(graphs) <= k:
        return graphs
    return [graphs[i] for i in sorted(rng.sample(range(len(graphs)), k))]


def contracting_graphs(g: int, insertions: Sequence[BasisVector]) -> list[OneEdgeGraph]:
    """Separating graphs with a genus-0 side holding only a's and at most one b."""
    n = len(insertions)
    a_pos = [k for k, v in enumerate(insertions, 1) if v.kind == "a"]
    b_pos = [k for k, v in enumerate(insertions, 1) if v.kind == "b"]
    out = set()
    subsets_a = [()]
    for k in a_pos:
        subsets_a += [s + (k,) for s in subsets_a]
    for sa in subsets_a:
        for extra in [()] + [(b,) for b in b_pos]:
            side = tuple(sorted(sa + extra))
            rest = tuple(k for k in range(1, n + 1) if k not in side)
            if is_stable(0, len(side) + 1) and is_stable(g, len(rest) + 1):
                out.add(oriented_separating(0, side, g, rest))
    return sorted(out)


def _check_r(cell: CellResult, theory, g, ins, graph, coverage):
    terms = r_rhs_terms(theory, ins, graph)
    out = axiom_ii_r_outcome(theory, g, ins, graph, terms)
    cell.add("ii-r", ins, out.ok, graph, out.lhs, out.rhs, coverage)
    if theory.gamma is not None:
        out = case_outcome(theory, g, ins, graph, terms)
        cell.add("cases", ins, out.ok, graph, out.lhs, out.rhs, coverage)


def sweep_cell(theory, g: int, n: int, config: SweepConfig) -> CellResult:
    """All axiom checks on the (g, n) cell."""
    cell = CellResult(g, n, config.detail)
    rng = cell_rng(config.seed, "graphs", g, n)
    coverage, tuples = universe(
        theory.space.basis, g, n, config, lambda r, k: theory.targeted_tuples(g, n, r, k)
    )
    graphs = list(separating_graphs(g, n))
    lift = n + 1 <= config.n_max
    gamma = theory.gamma
    for ins in tuples:
        out = axiom_i_against_representative(theory, g, ins)
        cell.add("i", ins, out.ok, None, out.lhs, out.rhs, coverage)
        if g >= 1:
            out = axiom_ii_q_outcome(theory, g, ins)
            cell.add("ii-q", ins, out.ok, "irr", out.lhs, out.rhs, coverage)
        if lift:
            out = axiom_iii_outcome(theory, g, ins)
            cell.add("iii", ins, out.ok, None, out.lhs, out.rhs, coverage)
        else:
            cell.untested("iii", coverage=coverage)
        if gamma is not None:
            out = evenness_outcome(theory, g, ins)
            cell.add("even", ins, out.ok, None, out.lhs, out.rhs, coverage)
        for graph in _graph_choices(graphs, rng, config.graphs_per_tuple):
            _check_r(cell, theory, g, ins, graph, coverage)
        if gamma is not None and coverage == "sampled" and theory.evaluate(g, ins).gamma_part():
            for graph in contracting_graphs(g, ins):
                _check_r(cell, theory, g, ins, graph, "targeted")
    if coverage == "exhaustive":
        # orbit representatives against every graph (or a seeded sample of graph_cap)
        reps = sorted({tuple(sorted(t)) for t in tuples})
        for rep in reps:
            for graph in _graph_choices(graphs, rng, config.graph_cap):
                _check_r(cell, theory, g, rep, graph, "orbit")
    if g == 0 and n == 3:
        basis = theory.space.basis
        for v1 in basis:
            for v2 in basis:
                out = unit_03_outcome(theory, v1, v2)
                cell.add("iii-unit", (v1, v2), out.ok, None, out.lhs, out.rhs, "exhaustive")
    return cell.finish()


def sweep_cells(config: SweepConfig) -> list[tuple[int, int]]:
    return [(g, n) for g in range(config.g_max + 1) for n in range(config.n_max + 1) if is_stable(g, n)]


def _theorem1_item(args) -> CellResult:
    gamma, config, g, n = args
    return sweep_cell(make_theory(gamma), g, n, config)


def gamma_json(gamma: FormalGamma) -> dict:
    return {"h": gamma.h, "m": gamma.m, "deg": gamma.deg, "mode": gamma.mode}


def takes_value_cell(gamma: FormalGamma, detail: str = "summary") -> CellResult:
    theory = make_theory(gamma)
    h, m = gamma.h, gamma.m
    cell = CellResult(h, m, detail)
    if gamma.trivial:
        value = theory.evaluate(0, (A, A, A))
        target = FormalClass.unit((0, 3))
        ins = (A, A, A)
    else:
        ins = tuple(B(j) for j in range(1, m + 1))
        value = theory.evaluate(h, ins)
        target = FormalClass.gamma((h, m), tuple(range(1, m + 1)))
    ok = check_takes_value([value], target)
    cell.add("takes-value", ins, ok, None, value, target, "canonical")
    return cell.finish()


def verify_theorem_1(gamma: FormalGamma, config: SweepConfig | None = None) -> VerificationReport:
    """Run every CohFT axiom check over the configured sweep and report."""
    config = config or SweepConfig(h=gamma.h, m=gamma.m, deg=gamma.deg, mode=gamma.mode)
    items = [(gamma, config, g, n) for g, n in sweep_cells(config)]
    cells = run_items(_theorem1_item, items, config.jobs)
    cells.append(takes_value_cell(gamma, config.detail))
    return VerificationReport.from_cells(gamma_json(gamma), config.sweep_json(), cells, config.detail)
