"""
First-order deformations of the TopFT, isotropy and minimal-class extraction.

A deformation table Λ assigns a FormalClass to (g, insertions) within
declared bounds; undeclared in-range entries are zero and references
beyond the bounds are reported as untested.  The axioms are the CohFT
axioms for ω + εΛ read off at order ε: the separating gluing rule has
the two mixed terms ω⊗Λ and Λ⊗ω and no Λ⊗Λ term.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterable, Sequence

from .cohft_gamma import (
    CheckOutcome,
    OmegaGamma,
    TopFT,
    _graph_choices,
    _sorting_data,
    contracting_graphs,
    r_rhs_terms,
)
from .errors import CohFTError, StructuralError
from .formal_classes import (
    UNIT,
    FormalClass,
    FormalGamma,
    Gamma,
    pullback_forget,
    pullback_gamma_q,
    pullback_gamma_r,
    relabel,
)
from .stable_graphs import OneEdgeGraph, separating_graphs
from .state_space import A, D, BasisVector, StateSpace, parse_insertions
from .sweep import CellResult, SweepConfig, VerificationReport, cell_rng, universe
from .topft import is_stable, require_stable


class OutOfRange(CohFTError):
    """A check referenced an entry beyond the declared bounds."""


@dataclass(frozen=True)
class Bounds:
    g_max: int
    n_max: int

    def contains(self, g: int, n: int) -> bool:
        return 0 <= g <= self.g_max and 0 <= n <= self.n_max


Key = tuple  # (g, insertions)


class DeformationTable:
    """
    Λ as explicit entries or as a callable.  Callable tables cover ranges
    too large to materialize; ``candidates`` then lists the keys that may
    be nonzero, for extraction.
    """

    def __init__(
        self,
        m: int,
        mode: str,
        bounds: Bounds,
        entries: dict[Key, FormalClass] | None = None,
        source: Callable[[int, tuple], FormalClass] | None = None,
        candidates: Callable[[], Iterable[Key]] | None = None,
        targeted: Callable | None = None,
    ):
        self.m = m
        self.mode = mode
        self.space = StateSpace(m, mode)
        self.bounds = bounds
        self.gamma = None
        self._source = source
        self._candidates = candidates
        self._targeted = targeted
        self.entries: dict[Key, FormalClass] = {}
        for (g, ins), cls in (entries or {}).items():
            ins = tuple(ins)
            require_stable(g, len(ins))
            for v in ins:
                self.space.check(v)
            if not bounds.contains(g, len(ins)):
                raise StructuralError(
                    f"entry (g,n)=({g},{len(ins)}) outside bounds g<={bounds.g_max}, n<={bounds.n_max}"
                )
            if cls.spaces != ((g, len(ins)),):
                raise StructuralError(f"entry at ({g},{len(ins)}) has a value on {cls.spaces}")
            if cls:
                self.entries[(g, ins)] = cls

    @property
    def explicit(self) -> bool:
        return self._source is None

    def value(self, g: int, insertions: tuple) -> FormalClass:
        n = len(insertions)
        if not self.bounds.contains(g, n):
            raise OutOfRange(f"(g,n)=({g},{n}) beyond bounds g<={self.bounds.g_max}, n<={self.bounds.n_max}")
        require_stable(g, n)
        if self._source is not None:
            return self._source(g, insertions)
        return self.entries.get((g, insertions)) or FormalClass(((g, n),))

    def evaluate(self, g: int, insertions: Sequence[BasisVector]) -> FormalClass:
        ins = tuple(insertions)
        for v in ins:
            self.space.check(v)
        return self.value(g, ins)

    def keys(self) -> list[Key]:
        if self._source is None:
            return sorted(self.entries)
        return sorted(set(self._candidates())) if self._candidates else []

    def targeted_tuples(self, g, n, rng, limit):
        return self._targeted(g, n, rng, limit) if self._targeted else []

    def with_entry(self, g: int, insertions: Sequence[BasisVector], cls: FormalClass) -> "DeformationTable":
        """Copy with one entry replaced (callable tables get an override)."""
        key = (g, tuple(insertions))
        if self._source is None:
            entries = dict(self.entries)
            entries[key] = cls
            return DeformationTable(self.m, self.mode, self.bounds, entries)
        base = self._source

        def source(gg, ins):
            return cls if (gg, ins) == key else base(gg, ins)

        return DeformationTable(self.m, self.mode, self.bounds, source=source,
                                candidates=self._candidates, targeted=self._targeted)

    # -- serialization

    def to_json(self) -> dict:
        if self._source is not None:
            raise StructuralError("callable-backed tables cannot be serialized")
        out = []
        for (g, ins), cls in sorted(self.entries.items()):
            out.append({"g": g, "n": len(ins), "insertions": [str(v) for v in ins], "value": _value_json(cls)})
        return {"m": self.m, "mode": self.mode,
                "bounds": {"g_max": self.bounds.g_max, "n_max": self.bounds.n_max}, "entries": out}

    @classmethod
    def from_json(cls, data: dict, bounds: Bounds | None = None) -> "DeformationTable":
        try:
            m = int(data["m"])
            mode = data.get("mode", "graded")
            raw = data.get("entries", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"malformed deformation table: {exc}") from exc
        entries: dict[Key, FormalClass] = {}
        for e in raw:
            g, ins = int(e["g"]), parse_insertions(e["insertions"])
            if "n" in e and int(e["n"]) != len(ins):
                raise StructuralError(f"entry declares n={e['n']} but has {len(ins)} insertions")
            key = (g, ins)
            if key in entries:
                raise StructuralError(f"duplicate entry for g={g}, insertions={e['insertions']}")
            entries[key] = _parse_value(g, len(ins), e.get("value", {}))
        if bounds is None:
            declared = data.get("bounds")
            if declared:
                bounds = Bounds(int(declared["g_max"]), int(declared["n_max"]))
            else:
                bounds = Bounds(max((g for g, _ in entries), default=0),
                                max((len(i) for _, i in entries), default=0))
        return cls(m, mode, bounds, entries)

    @classmethod
    def load(cls, path: str, bounds: Bounds | None = None) -> "DeformationTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh), bounds)


def _value_json(cls: FormalClass) -> dict | list:
    unit = cls.coefficient(UNIT)
    gammas = [(k[0].keep, c) for k, c in cls.sorted_terms() if k[0].is_gamma]
    out: dict = {}
    if unit:
        out["unit"] = str(unit)
    if len(gammas) == 1:
        out["gamma"] = {"coeff": str(gammas[0][1]), "keep": list(gammas[0][0])}
    elif gammas:
        out["gamma"] = [{"coeff": str(c), "keep": list(k)} for k, c in gammas]
    return out


def _parse_value(g: int, n: int, value: dict) -> FormalClass:
    terms = {}
    try:
        if "unit" in value:
            terms[(UNIT,)] = Fraction(str(value["unit"]))
        gam = value.get("gamma")
        for item in ([gam] if isinstance(gam, dict) else gam or []):
            keep = tuple(int(k) for k in item["keep"])
            if len(set(keep)) != len(keep) or not all(1 <= k <= n for k in keep):
                raise StructuralError(f"keep {list(keep)} is not a set of markings in 1..{n}")
            terms[(Gamma(keep),)] = terms.get((Gamma(keep),), 0) + Fraction(str(item.get("coeff", "1")))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise StructuralError(f"malformed entry value {value!r}: {exc}") from exc
    return FormalClass(((g, n),), terms)


def correction_table(gamma: FormalGamma, g_max: int | None = None, n_max: int | None = None) -> DeformationTable:
    """Λ = Ω^γ − ω^m as a callable table over the sweep range."""
    theory = OmegaGamma(gamma)
    bounds = Bounds(gamma.h + 2 if g_max is None else g_max, gamma.m + 3 if n_max is None else n_max)

    def source(g, ins):
        return theory.value(g, ins).gamma_part()

    def candidates():
        from .cohft_gamma import _support_permutations
        from .state_space import B

        canonical = [B(j) for j in range(1, gamma.m + 1)]
        rng = cell_rng(0, "candidates", gamma.h, gamma.m)
        return [(gamma.h, t) for t in _support_permutations(canonical, rng, 24)]

    return DeformationTable(gamma.m, gamma.mode, bounds, source=source, candidates=candidates,
                            targeted=theory.targeted_tuples)


# --------------------------------------------------------------------------
# axiom outcomes for Λ


def _rhs_q(lam, g, ins) -> FormalClass:
    graph = OneEdgeGraph.irreducible(g, len(ins))
    acc: dict = {}
    for t in lam.space.bivector:
        for k, c in lam.value(g - 1, ins + (t.left, t.right)).terms.items():
            acc[k] = acc.get(k, 0) + t.coeff * c
    return FormalClass(graph.factors, acc)


def deformation_q_outcome(lam, g, ins) -> CheckOutcome:
    graph = OneEdgeGraph.irreducible(g, len(ins))
    lhs = pullback_gamma_q(lam.value(g, ins), graph)
    rhs = _rhs_q(lam, g, ins)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def _rhs_r(lam, base, ins, graph) -> FormalClass:
    acc: dict = {}
    for first, second in ((base, lam), (lam, base)):
        for _, part in r_rhs_terms(base, ins, graph, first=first, second=second):
            if part is not None:
                for k, c in part.terms.items():
                    acc[k] = acc.get(k, 0) + c
    return FormalClass(graph.factors, acc)


def deformation_r_outcome(lam, base, g, ins, graph) -> CheckOutcome:
    lhs = pullback_gamma_r(lam.value(g, ins), graph)
    rhs = _rhs_r(lam, base, ins, graph)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def deformation_i_outcome(lam, g, ins) -> CheckOutcome:
    rep, sign, new_position = _sorting_data(lam, ins)
    lhs = lam.value(g, ins)
    rhs = sign * relabel(lam.value(g, rep), new_position)
    return CheckOutcome(lhs == rhs, lhs, rhs)


def deformation_iii_outcome(lam, g, ins) -> CheckOutcome:
    lhs = lam.value(g, ins + (A,))
    rhs = pullback_forget(lam.value(g, ins))
    return CheckOutcome(lhs == rhs, lhs, rhs)


def _guarded(cell: CellResult, axiom: str, fn, ins, graph=None, coverage: str = ""):
    try:
        out = fn()
    except OutOfRange:
        cell.untested(axiom, coverage=coverage)
        return None
    cell.add(axiom, ins, out.ok, graph, out.lhs, out.rhs, coverage)
    return out


def _check_config(cell, lam, base, g, ins, graphs, coverage):
    kw = {"coverage": coverage}
    _guarded(cell, "i", lambda: deformation_i_outcome(lam, g, ins), ins, **kw)
    if g >= 1:
        _guarded(cell, "ii-q", lambda: deformation_q_outcome(lam, g, ins), ins, "irr", **kw)
    for graph in graphs:
        _guarded(cell, "ii-r", lambda: deformation_r_outcome(lam, base, g, ins, graph), ins, graph, **kw)
    _guarded(cell, "iii", lambda: deformation_iii_outcome(lam, g, ins), ins, **kw)
    if any(v.kind in ("c", "d") for v in ins):
        _guarded(cell, "isotropic", lambda: _zero_outcome(lam, g, ins), ins, **kw)


def _zero_outcome(lam, g, ins) -> CheckOutcome:
    val = lam.value(g, ins)
    return CheckOutcome(not val, val, 0)


def _topft_preserving(cell: CellResult, lam) -> None:
    if not lam.bounds.contains(0, 3):
        cell.untested("topft-preserving")
        return
    basis = lam.space.basis
    for u in basis:
        for v in basis:
            for w in basis:
                ins = (u, v, w)
                _guarded(cell, "topft-preserving", lambda: _zero_outcome(lam, 0, ins), ins,
                         coverage="exhaustive")


# --------------------------------------------------------------------------
# configurations


_PARTNER = {"a": "d", "d": "a", "b": "c", "c": "b"}


def _partner(v: BasisVector) -> BasisVector:
    return BasisVector(_PARTNER[v.kind], v.index)


def _distinct_permutations(ins: tuple, rng, limit: int = 120) -> list[tuple]:
    n = len(ins)
    if math.factorial(n) <= limit:
        return sorted(set(permutations(ins)))
    out = {ins}
    for _ in range(limit):
        out.add(tuple(rng.sample(ins, n)))
    return sorted(out)


def _fillers(anchor: BasisVector) -> list[tuple]:
    return [(), (A,), (A, A), (anchor, A), (A, anchor)]


def derived_configs(lam: DeformationTable) -> dict[tuple, set]:
    """
    Configurations touching the explicit entries: the keys, their
    permutations, the forgetful neighbours, the nonseparating parents and
    the separating completions.  Maps (g, ins) to the separating graphs
    singled out for it (all graphs are added later).
    """
    rng = cell_rng(0, "derived")
    configs: dict[tuple, set] = {}
    bounds = lam.bounds

    def add(g, ins, graph=None):
        if is_stable(g, len(ins)) and bounds.contains(g, len(ins)):
            s = configs.setdefault((g, ins), set())
            if graph is not None:
                s.add(graph)

    for g, ins in lam.keys():
        for p in _distinct_permutations(ins, rng):
            add(g, p)
        add(g, ins + (A,))
        if ins and ins[-1] == A:
            add(g, ins[:-1])
        if len(ins) >= 2:
            l, r = ins[-2], ins[-1]
            if r == _partner(l):
                add(g + 1, ins[:-2])
        # this entry as the first factor: w1 + (l,) with l the last insertion
        if ins:
            w1, l = ins[:-1], ins[-1]
            r = _partner(l)
            for g2 in range(bounds.g_max - g + 1):
                for w2 in _fillers(l):
                    if is_stable(g2, len(w2) + 1):
                        full = w1 + w2
                        s1 = tuple(range(1, len(w1) + 1))
                        s2 = tuple(range(len(w1) + 1, len(full) + 1))
                        add(g + g2, full, OneEdgeGraph.separating(g, s1, g2, s2))
            # and as the second factor: (r,) + w2 with r the first insertion
            r, w2 = ins[0], ins[1:]
            l = _partner(r)
            for g1 in range(bounds.g_max - g + 1):
                for w1 in _fillers(r):
                    if is_stable(g1, len(w1) + 1):
                        full = w1 + w2
                        s1 = tuple(range(1, len(w1) + 1))
                        s2 = tuple(range(len(w1) + 1, len(full) + 1))
                        add(g1 + g, full, OneEdgeGraph.separating(g1, s1, g, s2))
    return configs


# --------------------------------------------------------------------------
# drivers


def check_deformation_axioms(
    lam: DeformationTable,
    base: TopFT | None = None,
    config: SweepConfig | None = None,
) -> VerificationReport:
    """
    Run the order-ε axioms on Λ.  Explicit tables are checked on every
    configuration touching their entries (with every separating graph);
    callable tables on the sweep universe of ``config``.
    """
    base = base or TopFT(lam.space)
    b = lam.bounds
    config = config or SweepConfig(h=0, m=lam.m, deg=0, mode=lam.mode, g_max=b.g_max, n_max=b.n_max)
    cells: list[CellResult] = []
    if lam.explicit:
        by_cell: dict[tuple[int, int], CellResult] = {}
        for (g, ins), graphs in sorted(derived_configs(lam).items()):
            n = len(ins)
            cell = by_cell.get((g, n)) or by_cell.setdefault((g, n), CellResult(g, n, config.detail))
            rng = cell_rng(config.seed, "dgraphs", g, n, *map(str, ins))
            all_graphs = set(graphs) | set(_graph_choices(list(separating_graphs(g, n)), rng, config.graph_cap))
            _check_config(cell, lam, base, g, ins, sorted(all_graphs), "derived")
        cells.extend(c.finish() for _, c in sorted(by_cell.items()))
        cell = CellResult(0, 3, config.detail)
        _topft_preserving(cell, lam)
        cells.append(cell.finish())
    else:
        for g in range(b.g_max + 1):
            for n in range(b.n_max + 1):
                if is_stable(g, n):
                    cells.append(_sweep_deformation_cell(lam, base, g, n, config))
        cell = CellResult(0, 3, config.detail)
        _topft_preserving(cell, lam)
        cells.append(cell.finish())
    _extraction_checks(cells, lam, base, config)
    gamma = {"m": lam.m, "mode": lam.mode, "table": "explicit" if lam.explicit else "callable"}
    sweep = {"g_max": b.g_max, "n_max": b.n_max, "seed": config.seed}
    if not lam.explicit:
        sweep = config.sweep_json()
    return VerificationReport.from_cells(gamma, sweep, cells, config.detail)


def _sweep_deformation_cell(lam, base, g, n, config) -> CellResult:
    cell = CellResult(g, n, config.detail)
    rng = cell_rng(config.seed, "dgraphs", g, n)
    coverage, tuples = universe(lam.space.basis, g, n, config, lambda r, k: lam.targeted_tuples(g, n, r, k))
    graphs = list(separating_graphs(g, n))
    for ins in tuples:
        chosen = _graph_choices(graphs, rng, config.graphs_per_tuple)
        if lam.value(g, ins):
            chosen = sorted(set(chosen) | set(contracting_graphs(g, ins)))
        _check_config(cell, lam, base, g, ins, chosen, coverage)
    return cell.finish()


def check_isotropic(lam: DeformationTable, config: SweepConfig | None = None) -> bool:
    """Λ vanishes whenever an insertion is some c_i or d."""
    if lam.explicit:
        return not any(any(v.kind in ("c", "d") for v in ins) for (_, ins) in lam.entries)
    b = lam.bounds
    config = config or SweepConfig(h=0, m=lam.m, deg=0, mode=lam.mode, g_max=b.g_max, n_max=b.n_max)
    for g in range(b.g_max + 1):
        for n in range(1, b.n_max + 1):
            if not is_stable(g, n):
                continue
            _, tuples = universe(lam.space.basis, g, n, config, lambda r, k: lam.targeted_tuples(g, n, r, k))
            for ins in tuples:
                if any(v.kind in ("c", "d") for v in ins) and lam.value(g, ins):
                    return False
    return True


@dataclass
class MinimalCandidate:
    g: int
    insertions: tuple[BasisVector, ...]
    value: FormalClass
    # per graph label: (direct pullback, pullback predicted by the axioms)
    pullbacks: dict[str, tuple[FormalClass, FormalClass]] = field(default_factory=dict)
    untested: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.insertions)

    @property
    def vanishes(self) -> bool:
        return all(not d and not p for d, p in self.pullbacks.values())


def extract_minimal_candidates(lam: DeformationTable, base: TopFT | None = None) -> list[MinimalCandidate]:
    """
    Nonzero entries with only b insertions, each with its boundary pullbacks
    computed both directly and through the gluing axioms.
    """
    base = base or TopFT(lam.space)
    out = []
    for g, ins in lam.keys():
        if not all(v.kind == "b" for v in ins):
            continue
        val = lam.value(g, ins)
        if not val:
            continue
        cand = MinimalCandidate(g, ins, val)
        n = len(ins)
        if g >= 1:
            graph = OneEdgeGraph.irreducible(g, n)
            try:
                cand.pullbacks["irr"] = (pullback_gamma_q(val, graph), _rhs_q(lam, g, ins))
            except OutOfRange:
                cand.untested.append("irr")
        for graph in separating_graphs(g, n):
            try:
                cand.pullbacks[graph.label()] = (pullback_gamma_r(val, graph), _rhs_r(lam, base, ins, graph))
            except OutOfRange:
                cand.untested.append(graph.label())
        out.append(cand)
    return out


def _extraction_checks(cells: list[CellResult], lam, base, config) -> None:
    by_cell: dict[tuple[int, int], CellResult] = {}
    for cand in extract_minimal_candidates(lam, base):
        cell = by_cell.setdefault((cand.g, cand.n), CellResult(cand.g, cand.n, config.detail))
        for label, (direct, predicted) in sorted(cand.pullbacks.items()):
            ok = not direct and not predicted
            cell.add("minimal", cand.insertions, ok, label, direct, predicted, "candidates")
        for _ in cand.untested:
            cell.untested("minimal", coverage="candidates")
    cells.extend(c.finish() for _, c in sorted(by_cell.items()))
