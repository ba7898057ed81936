"""
Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live; they are
also repeated in the terminal summary.  ``python tests/test_acceptance.py``
runs the same checks without pytest.
"""

import json
import os
import random
import subprocess
import sys
import time
from itertools import product
from math import comb

import pytest

from mincohft.cohft_gamma import make_theory, verify_theorem_1
from mincohft.deformations import check_deformation_axioms, check_isotropic, correction_table, extract_minimal_candidates
from mincohft.errors import CohFTError, ParityError, StabilityError
from mincohft.formal_classes import FormalGamma
from mincohft.genus1_dimensions import dim_cusp_forms_by_monomials, dim_minimal, dims_csv
from mincohft.state_space import A, B, StateSpace, Vector, handle_element, star
from mincohft.sweep import SweepConfig
from mincohft.topft import TopftQuery, evaluate_topft_closed, evaluate_topft_oracle, is_stable

BATTERY = [(1, 11, 11, "graded"), (0, 4, 2, "graded"), (1, 1, 2, "ungraded"), (2, 2, 2, "graded"),
           (1, 3, 3, "graded"), (2, 0, 2, "graded"), (0, 3, 0, "graded")]

RESULTS: list[str] = []


def emit(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)


def _battery_id(entry):
    return "({},{},{})".format(*entry[:3])


_REPORTS: dict = {}


def battery_report(entry):
    if entry not in _REPORTS:
        h, m, deg, mode = entry
        gamma = FormalGamma(h, m, deg, mode)
        t = time.perf_counter()
        report = verify_theorem_1(gamma, SweepConfig(h=h, m=m, deg=deg, mode=mode))
        _REPORTS[entry] = (gamma, report, time.perf_counter() - t)
    return _REPORTS[entry]


# criterion 1

def _oracle_layer(space, g_max, n):
    """
    All oracle values for tuples of length n, one genus at a time.

    The oracle is the left-folded star product followed by g handle factors and
    the pairing with the unit.  Since that is linear in the length-(n-1) prefix,
    each leaf is a dot product of the prefix vector with a per-(g, last vector)
    functional, both built from the oracle's own primitives.
    """
    h = handle_element(space)
    functionals = {}
    for g in range(g_max + 1):
        for v in space.basis:
            row = {}
            for e in space.basis:
                x = star(Vector.basis(e), Vector.basis(v), space)
                for _ in range(g):
                    x = star(x, h, space)
                row[e] = space.eta_vectors(x, Vector.basis(A))
            functionals[(g, v)] = row
    prefixes = {(): Vector.basis(A)}
    for _ in range(n - 1):
        prefixes = {p + (v,): star(vec, Vector.basis(v), space) for p, vec in prefixes.items() for v in space.basis}
    for p, vec in prefixes.items():
        coeffs = list(vec.items())
        for v in space.basis:
            vals = {g: sum((c * functionals[(g, v)][e] for e, c in coeffs), 0) for g in range(g_max + 1)}
            yield p + (v,), vals


def test_criterion_1_topft_oracle():
    t = time.perf_counter()
    mismatches, count = [], 0
    for m in range(4):
        space = StateSpace(m)
        for n in range(1, 7):
            for ins, vals in _oracle_layer(space, 4, n):
                for g, oracle in vals.items():
                    if not is_stable(g, n):
                        continue
                    count += 1
                    if evaluate_topft_closed(TopftQuery(g, ins, space)) != oracle:
                        mismatches.append((m, g, ins))
    # spot-check the batched layer against the per-query oracle
    rng = random.Random(0)
    for _ in range(300):
        m = rng.randrange(4)
        space = StateSpace(m)
        g = rng.randrange(5)
        n = rng.randint(max(1, 3 - 2 * g), 6)
        ins = tuple(rng.choice(space.basis) for _ in range(n))
        q = TopftQuery(g, ins, space)
        if evaluate_topft_closed(q) != evaluate_topft_oracle(q):
            mismatches.append((m, g, ins))
    elapsed = time.perf_counter() - t
    ok = not mismatches and elapsed < 60
    emit(1, ok, f"closed form = oracle on {count} exhaustive evaluations, {len(mismatches)} mismatches, {elapsed:.1f} s")
    assert not mismatches, mismatches[:5]
    assert elapsed < 60


# criteria 2 and 3

@pytest.mark.parametrize("entry", BATTERY, ids=_battery_id)
def test_criterion_2_theorem_sweep(entry):
    gamma, report, elapsed = battery_report(entry)
    axioms = {c["axiom"] for c in report.checks}
    ok = report.ok and {"i", "iii"} <= axioms and report.totals["passed"] > 0
    emit(2, ok, f"{_battery_id(entry)} {report.totals} in {elapsed:.1f} s")
    assert ok, report.counterexamples[:3]


def test_criterion_2_rejections_and_branches():
    try:
        FormalGamma(1, 0, 2)
        rejected = False
    except StabilityError:
        rejected = True
    trivial = type(make_theory(FormalGamma(0, 3, 0))).__name__ == "TrivialCohFT"
    ok = rejected and trivial
    emit(2, ok, f"(1,0) rejected by stability: {rejected}; (0,3) uses the trivial CohFT: {trivial}")
    assert ok


@pytest.mark.parametrize("entry", [e for e in BATTERY if e[:3] != (0, 3, 0)], ids=_battery_id)
def test_criterion_3_case_completeness(entry):
    _, report, _ = battery_report(entry)
    cases = [c for c in report.checks if c["axiom"] == "cases"]
    passed = sum(c["passed"] for c in cases)
    failed = sum(c["failed"] for c in cases)
    ok = failed == 0 and passed > 0
    emit(3, ok, f"{_battery_id(entry)} classified configurations: {passed} agree, {failed} disagree")
    assert ok


# criterion 4

DEFORM_CONFIG = dict(sample_count=2000, graph_cap=64)


@pytest.mark.parametrize("entry", [e for e in BATTERY if e[:3] != (0, 3, 0)], ids=_battery_id)
def test_criterion_4_deformation_round_trip(entry):
    h, m, deg, mode = entry
    gamma = FormalGamma(h, m, deg, mode)
    lam = correction_table(gamma)
    b = lam.bounds
    config = SweepConfig(h=0, m=m, deg=0, mode=mode, g_max=b.g_max, n_max=b.n_max, **DEFORM_CONFIG)
    report = check_deformation_axioms(lam, config=config)
    isotropic = check_isotropic(lam, config)
    cands = extract_minimal_candidates(lam)
    vanish = bool(cands) and all(c.vanishes and not c.untested for c in cands)
    canon = tuple(B(j) for j in range(1, m + 1))
    key = (h, canon)
    mutated = lam.with_entry(h, canon, -lam.value(*key))
    mut_report = check_deformation_axioms(mutated, config=config)
    ok = report.ok and isotropic and vanish and len(mut_report.counterexamples) >= 1
    emit(4, ok, f"{_battery_id(entry)} axioms {report.totals}, isotropic {isotropic}, "
                f"{len(cands)} minimal candidates vanish {vanish}, mutation caught {len(mut_report.counterexamples)}")
    assert ok


# criterion 5

def test_criterion_5_parity_enforcement():
    cases = [
        (lambda: FormalGamma(1, 3, 2), ParityError, "parity condition violated"),
        (lambda: FormalGamma(2, 2, 3, "ungraded"), ParityError, "ungraded mode requires even degree"),
        (lambda: FormalGamma(1, 0, 2), StabilityError, "stability violated"),
    ]
    messages = []
    ok = True
    for make, err, text in cases:
        try:
            make()
            ok = False
            messages.append("accepted")
        except err as e:
            messages.append(str(e))
            ok = ok and text in str(e)
        except CohFTError as e:
            ok = False
            messages.append(f"wrong error {e!r}")
    emit(5, ok, "; ".join(messages))
    assert ok


# criterion 6

def _independent_dims(n_max):
    rows = ["n,j,dim_minimal"]
    for n in range(1, n_max + 1):
        for j in range(2 * n + 1):
            k = 2 * n - j
            if k == 0:
                d = 1
            elif n < k:
                d = 0
            else:
                d = 2 * dim_cusp_forms_by_monomials(k + 1) * comb(n, k)
            rows.append(f"{n},{j},{d}")
    return "\n".join(rows) + "\n"


def test_criterion_6_dimension_table():
    t = time.perf_counter()
    csv = dims_csv(20)
    elapsed = time.perf_counter() - t
    spot = (dim_minimal(11, 11) == 2 and dim_minimal(10, 11) == 0 and dim_minimal(12, 13) == 24
            and all(dim_minimal(n, j) == 0 for n in range(1, 21) for j in range(0, 2 * n, 2))
            and all(dim_minimal(n, 2 * n) == 1 for n in range(1, 21)))
    ok = csv == _independent_dims(20) and spot and elapsed < 1
    emit(6, ok, f"CSV for n <= 20 matches the independent table ({len(csv.splitlines()) - 1} rows, {elapsed * 1000:.0f} ms)")
    assert ok


# criterion 7

def _verify_json(jobs, out):
    env = {k: v for k, v in os.environ.items() if k != "COHFT_JOBS"}
    cmd = [sys.executable, "-m", "mincohft", "verify", "--h", "2", "--m", "2", "--deg", "2",
           "--jobs", str(jobs), "--output", str(out)]
    subprocess.run(cmd, check=True, env=env)
    return out.read_bytes()


def test_criterion_7_determinism(tmp_path):
    one = _verify_json(1, tmp_path / "j1.json")
    two = _verify_json(2, tmp_path / "j2.json")
    again = _verify_json(1, tmp_path / "j1b.json")
    ok = one == two == again and json.loads(one)["totals"]["passed"] > 0
    emit(7, ok, f"verify (2,2,2) JSON byte-identical across --jobs 1, 2 and a rerun ({len(one)} bytes)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
