from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mincohft.cohft_gamma import (
    NO_CASE,
    OmegaGamma,
    OmegaQuery,
    TopFT,
    TrivialCohFT,
    axiom_ii_r_outcome,
    case_outcome,
    check_axiom_i,
    check_axiom_ii_q,
    check_axiom_ii_r,
    check_axiom_iii,
    classify_correction_case,
    correction_data,
    evaluate_omega_gamma,
    make_theory,
    verify_theorem_1,
)
from mincohft.errors import DomainError, StabilityError, StructuralError
from mincohft.formal_classes import UNIT, FormalClass, FormalGamma, Gamma
from mincohft.stable_graphs import OneEdgeGraph, enumerate_separating_graphs
from mincohft.state_space import A, B, C, D, StateSpace, parse_insertions
from mincohft.sweep import SweepConfig

G111 = FormalGamma(1, 11, 11)
G222 = FormalGamma(2, 2, 2)
SMALL = SweepConfig(h=2, m=2, deg=2, g_max=3, n_max=4, n_exh=3, sample_count=150, graph_cap=8, jobs=1)


def ev(gamma, g, text):
    return evaluate_omega_gamma(OmegaQuery(gamma, g, parse_insertions(text)))


def test_examples():
    assert str(ev(G111, 1, ",".join(f"b{i}" for i in range(1, 12)))) == "1·γ"
    assert ev(FormalGamma(0, 4, 2), 2, "d,d") == 0
    assert str(ev(G222, 2, "b2,a,b1")) == "-1·γ[3,1]"
    assert str(ev(G222, 2, "a,a")) == "0"
    assert str(ev(FormalGamma(1, 1, 2, "ungraded"), 1, "a")) == "4"
    assert str(ev(FormalGamma(1, 2, 2), 1, "b1,b2")) == "1·γ"
    assert str(ev(FormalGamma(1, 2, 2), 1, "b1,c1")) == "0"
    assert str(ev(FormalGamma(0, 4, 2), 0, "b1,c1,a")) == "1"


def test_correction_data():
    space = StateSpace(3)
    assert correction_data(space, FormalGamma(1, 3, 3), 1, (B(2), A, B(1), B(3))) == (-1, (3, 1, 4))
    assert correction_data(space, FormalGamma(1, 3, 3), 1, (B(2), B(2), B(3))) is None
    assert correction_data(space, FormalGamma(1, 3, 3), 0, (B(1), B(2), B(3))) is None
    assert correction_data(space, FormalGamma(1, 3, 3), 1, (B(1), C(2), B(3))) is None


def test_evaluation_errors():
    with pytest.raises(StabilityError):
        OmegaQuery(G222, 0, (A, A))
    with pytest.raises(StructuralError):
        make_theory(G222).evaluate(1, (B(3),))
    with pytest.raises(DomainError):
        OmegaGamma(FormalGamma(0, 3, 0))
    assert isinstance(make_theory(FormalGamma(0, 3, 0)), TrivialCohFT)


def test_values_take_minimal_class():
    theory = make_theory(FormalGamma(1, 3, 3))
    val = theory.evaluate(1, (B(1), B(2), B(3)))
    val.validate(theory.gamma)
    assert val.coefficient(Gamma((1, 2, 3))) == 1


@pytest.mark.parametrize("gamma", [G222, FormalGamma(1, 1, 2, "ungraded"), FormalGamma(0, 4, 2)], ids=str)
def test_axioms_on_samples(gamma):
    theory = make_theory(gamma)
    h, m = gamma.h, gamma.m
    canon = tuple(B(j) for j in range(1, m + 1))
    for ins in [canon, canon + (A,), (A,) + canon[::-1], canon + (C(1),)]:
        assert check_axiom_i(theory, h, ins)
        if h >= 1:
            assert check_axiom_ii_q(theory, h, ins)
        for graph in enumerate_separating_graphs(h, len(ins)):
            assert check_axiom_ii_r(theory, h, ins, graph)
        assert check_axiom_iii(theory, h, ins)


def test_trivial_branch():
    theory = TrivialCohFT()
    assert theory.evaluate(2, (A,)) == FormalClass.unit((2, 1))
    report = verify_theorem_1(FormalGamma(0, 3, 0), SweepConfig(h=0, m=3, deg=0, jobs=1))
    assert report.ok and report.totals["passed"] > 0


def test_classify_cases():
    g = G222
    ins = (B(1), A, B(2))
    t = {(x.left, x.right): x for x in StateSpace(2).bivector}
    # genus-2 side holds b2 and the node; genus-0 side holds b1 and a
    graph = OneEdgeGraph.separating(0, (1, 2), 2, (3,))
    assert str(classify_correction_case(graph, ins, t[(C(1), B(1))], g)) == "case4(1)"
    assert classify_correction_case(graph, ins, t[(D, A)], g) == NO_CASE
    # genus-2 side holds both b's, genus-0 side holds a's: the a-d term
    ins = (B(1), B(2), A, A)
    graph = OneEdgeGraph.separating(2, (1, 2), 0, (3, 4))
    assert str(classify_correction_case(graph, ins, t[(A, D)], g)) == "case1"
    graph = OneEdgeGraph.separating(0, (3, 4), 2, (1, 2))
    assert str(classify_correction_case(graph, ins, t[(D, A)], g)) == "case3"
    ins = (B(1), A, B(2))
    graph = OneEdgeGraph.separating(2, (1,), 0, (2, 3))
    assert str(classify_correction_case(graph, ins, t[(B(2), C(2))], g)) == "case2(2)"
    out = case_outcome(make_theory(g), 2, ins, graph)
    assert out.ok


class WrongSign(OmegaGamma):
    """Correction with the reordering sign dropped."""

    def _evaluate(self, g, insertions):
        val = super()._evaluate(g, insertions)
        return FormalClass(val.spaces, {k: abs(c) if k[0].is_gamma else c for k, c in val.terms.items()})


class NoPermutations(OmegaGamma):
    """Correction only on the canonical order b_1..b_m, a..a."""

    def _evaluate(self, g, insertions):
        val = super()._evaluate(g, insertions)
        canon = tuple(B(j) for j in range(1, self.gamma.m + 1))
        if insertions[: self.gamma.m] != canon:
            val = val.unit_part()
        return val


class NoForgetful(OmegaGamma):
    """Correction only with exactly m insertions."""

    def _evaluate(self, g, insertions):
        val = super()._evaluate(g, insertions)
        return val if len(insertions) == self.gamma.m else val.unit_part()


class WrongHandle(OmegaGamma):
    def _evaluate(self, g, insertions):
        val = super()._evaluate(g, insertions)
        if g == 1 and all(v == A for v in insertions):
            return FormalClass.unit(val.spaces[0], 7) + val.gamma_part()
        return val


def run_sweep(theory_cls, gamma, config):
    from mincohft.cohft_gamma import sweep_cell, sweep_cells

    theory = theory_cls(gamma)
    fails = set()
    for g, n in sweep_cells(config):
        cell = sweep_cell(theory, g, n, config)
        fails |= {s.axiom for s in cell.stats.values() if s.failed}
    return fails


def test_correct_theory_passes_small_sweep():
    assert run_sweep(OmegaGamma, G222, SMALL) == set()


@pytest.mark.parametrize(
    "mutant,expected",
    [(WrongSign, {"i"}), (NoPermutations, {"i"}), (NoForgetful, {"iii"}), (WrongHandle, {"ii-q"})],
    ids=lambda x: getattr(x, "__name__", str(x)),
)
def test_mutants_are_detected(mutant, expected):
    fails = run_sweep(mutant, G222, SMALL)
    assert expected <= fails


def test_verify_report_shape():
    report = verify_theorem_1(FormalGamma(1, 1, 2, "ungraded"), SweepConfig(h=1, m=1, deg=2, mode="ungraded", jobs=1))
    data = report.to_dict()
    assert set(data) == {"gamma", "sweep", "checks", "counterexamples", "totals"}
    assert data["gamma"] == {"h": 1, "m": 1, "deg": 2, "mode": "ungraded"}
    assert {"g_max", "n_max", "n_exh", "seed"} <= set(data["sweep"])
    assert all({"axiom", "g", "n", "insertions", "graph", "status"} <= set(c) for c in data["checks"])
    assert report.ok
    axioms = {c["axiom"] for c in data["checks"]}
    assert {"i", "ii-q", "ii-r", "iii", "cases", "takes-value"} <= axioms


def test_full_detail_lists_every_check():
    config = SweepConfig(h=1, m=1, deg=2, mode="ungraded", g_max=1, n_max=2, jobs=1, detail="full")
    report = verify_theorem_1(FormalGamma(1, 1, 2, "ungraded"), config)
    assert len(report.checks) == report.totals["passed"]
    assert all(isinstance(c["insertions"], list) for c in report.checks)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_separating_identities(data):
    gamma = data.draw(st.sampled_from([G222, FormalGamma(1, 3, 3), FormalGamma(0, 4, 2)]))
    theory = make_theory(gamma)
    g = data.draw(st.integers(0, gamma.h + 1))
    n = data.draw(st.integers(max(1, 3 - 2 * g), gamma.m + 2))
    graphs = enumerate_separating_graphs(g, n)
    if not graphs:
        return
    pool = list(theory.space.basis) + [A, A] + [B(j) for j in range(1, gamma.m + 1)]
    ins = tuple(data.draw(st.lists(st.sampled_from(pool), min_size=n, max_size=n)))
    graph = data.draw(st.sampled_from(graphs))
    assert axiom_ii_r_outcome(theory, g, ins, graph).ok
    assert case_outcome(theory, g, ins, graph).ok


def test_topft_theory_satisfies_axioms():
    theory = TopFT(StateSpace(2))
    for ins in [(A,), (B(1), C(1), A), (D, A, A), (C(2), B(2))]:
        g = 1
        assert check_axiom_ii_q(theory, g, ins)
        assert check_axiom_iii(theory, g, ins)
        for graph in enumerate_separating_graphs(g, len(ins)):
            assert check_axiom_ii_r(theory, g, ins, graph)
    assert theory.evaluate(1, (A, A)).coefficient(UNIT) == Fraction(-2)
