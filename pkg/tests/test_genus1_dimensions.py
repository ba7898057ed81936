from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mincohft.errors import DomainError
from mincohft.genus1_dimensions import (
    DimQuery,
    dim_cusp_forms,
    dim_cusp_forms_by_monomials,
    dim_grw_k,
    dim_minimal,
    dims_csv,
    genus0_minimal_check,
)


def test_cusp_form_examples():
    assert dim_cusp_forms(12) == 1
    assert dim_cusp_forms(11) == 0
    assert dim_cusp_forms(26) == 1
    assert dim_cusp_forms(24) == 2
    assert dim_cusp_forms(14) == 0
    assert dim_cusp_forms(0) == 0


def test_two_cusp_form_encodings_agree():
    for k in range(0, 200):
        assert dim_cusp_forms(k) == dim_cusp_forms_by_monomials(k), k


def test_grw_examples():
    assert dim_grw_k(11, 11) == 2
    assert dim_grw_k(10, 11) == 0
    assert dim_grw_k(12, 11) == 24
    assert dim_grw_k(5, 0) == 1


def test_minimal_examples():
    assert dim_minimal(11, 11) == 2
    assert dim_minimal(4, 8) == 1
    assert dim_minimal(12, 13) == 24
    assert dim_minimal(10, 9) == 0


@pytest.mark.parametrize("n", range(1, 21))
def test_even_degrees(n):
    for j in range(0, 2 * n, 2):
        assert dim_minimal(n, j) == 0
    assert dim_minimal(n, 2 * n) == 1


@given(st.integers(1, 30), st.data())
def test_vanishing_below_n(n, data):
    j = data.draw(st.integers(0, 2 * n))
    if j < n:
        assert dim_minimal(n, j) == 0
    k = 2 * n - j
    if k >= 2 and k % 2 == 0:
        assert dim_grw_k(n, k) == 0


def test_genus0():
    assert genus0_minimal_check(5, 4) == 1
    assert genus0_minimal_check(5, 2) == 0
    assert genus0_minimal_check(3, 0) == 1
    with pytest.raises(DomainError):
        genus0_minimal_check(2, 0)


def test_domain_errors():
    with pytest.raises(DomainError):
        DimQuery(0, 1)
    with pytest.raises(DomainError):
        dim_minimal(3, 7)
    with pytest.raises(DomainError):
        dim_cusp_forms(-2)


def test_csv_shape():
    lines = dims_csv(2).splitlines()
    assert lines[0] == "n,j,dim_minimal"
    assert len(lines) == 1 + 3 + 5
    assert dims_csv(1, grw=True).splitlines()[0] == "n,k,dim_grw_k"


def test_csv_matches_pairing():
    rows = [line.split(",") for line in dims_csv(20).splitlines()[1:]]
    for n, j, d in rows:
        n, j, d = int(n), int(j), int(d)
        k = 2 * n - j
        expected = 1 if k == 0 else (0 if n < k else 2 * dim_cusp_forms_by_monomials(k + 1) * comb(n, k))
        assert d == expected
