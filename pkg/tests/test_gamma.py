from itertools import product

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

import naive
from taukb.gamma import (
    BadShape,
    Diagonalizer,
    FamilyParseError,
    GammaArray,
    GammaFamily,
    Row,
    SearchSpaceTooLarge,
    Selector,
    array,
    family,
    finitely_tau_diagonalizable,
    is_gamma_array,
    o_diagonalizable,
    parse_family_file,
    random_gamma_family,
    render_family_file,
    verify_diagonalizer,
    verify_selector,
)


def sel(sets, q, e):
    return Selector(tuple(frozenset(s) for s in sets), q, e)


# --- is_gamma_array ---------------------------------------------------------

def test_all_ones_array_is_gamma():
    assert is_gamma_array(array([("", 1), ("", 1)]))


def test_row_with_zero_tail_is_not_gamma():
    assert not is_gamma_array(array([("10", 0)]))


def test_finitely_many_zeros_is_gamma():
    assert is_gamma_array(array([("0001", 1), ("10", 1)]))


def test_family_rejects_non_gamma_member():
    with pytest.raises(BadShape):
        family(array([("10", 0)]))


def test_family_rejects_mismatched_row_counts():
    with pytest.raises(BadShape):
        family(array([("1", 1)]), array([("1", 1), ("1", 1)]))


# --- verify_selector --------------------------------------------------------

def test_singleton_all_ones_family_verifies():
    fam = family(array([("", 1)] * 3))
    assert verify_selector(fam, sel([{0}, {0}, {0}], q=3, e=0), col_bound=2)


def test_empty_sets_cannot_meet_positive_quota():
    fam = family(array([("", 1)] * 3))
    assert not verify_selector(fam, sel([set(), set(), set()], q=1, e=0), col_bound=2)


def test_incomparable_pair_fails_condition_b():
    a = array([("01", 1), ("01", 1)])
    b = array([("10", 1), ("10", 1)])
    assert not verify_selector(family(a, b), sel([{0, 1}, {0, 1}], q=2, e=0), col_bound=2)


def test_selector_shape_mismatch():
    fam = family(array([("", 1)] * 3))
    with pytest.raises(BadShape):
        verify_selector(fam, sel([{0}], q=1, e=0), col_bound=2)


def test_selector_column_out_of_bound():
    fam = family(array([("", 1)]))
    with pytest.raises(BadShape):
        verify_selector(fam, sel([{5}], q=1, e=0), col_bound=2)


# --- finitely_tau_diagonalizable --------------------------------------------

def test_singleton_family_has_witness():
    fam = family(array([("0", 1), ("00", 1)]))
    witness = finitely_tau_diagonalizable(fam, col_bound=3, size_bound=1, hit_quota=2, exceptions=0)
    assert witness is not None
    assert verify_selector(fam, witness, col_bound=3)


def test_incomparable_pair_diagonalizes_with_singletons():
    a = array([("01", 1), ("01", 1)])
    b = array([("10", 1), ("10", 1)])
    witness = finitely_tau_diagonalizable(family(a, b), col_bound=3, size_bound=1,
                                          hit_quota=2, exceptions=0)
    # the tail column is the first that hits both members in every row
    assert witness is not None
    assert [sorted(s) for s in witness.sets] == [[2], [2]]


def test_empty_family_vacuously_diagonalizable():
    witness = finitely_tau_diagonalizable(GammaFamily(()), col_bound=2, size_bound=1,
                                          hit_quota=0, exceptions=0)
    assert witness is not None
    assert witness.sets == ()


def test_search_budget_guard():
    fam = random_gamma_family(0, rows=12, col_bound=6, count=2, zero_density=0.5)
    with pytest.raises(SearchSpaceTooLarge):
        finitely_tau_diagonalizable(fam, col_bound=6, size_bound=3, hit_quota=1,
                                    exceptions=0, budget=1000)


# --- o_diagonalizable --------------------------------------------------------

def test_two_singleton_rows_with_disjoint_hits_fail():
    a = array([("0100", 0)])
    b = array([("0010", 0)])
    assert o_diagonalizable([a, b], col_bound=4) is None


def test_spread_family_diagonalizes():
    fam = random_gamma_family(3, rows=3, col_bound=3, count=2, zero_density=0.9)
    bound = fam.max_word_length() + 1
    witness = o_diagonalizable(fam, col_bound=bound)
    assert witness is not None
    assert verify_diagonalizer(fam, witness, col_bound=bound)


def test_empty_family_gets_zero_vector():
    assert o_diagonalizable([], col_bound=3) == Diagonalizer(())


def test_odiag_budget_guard():
    fam = random_gamma_family(0, rows=24, col_bound=8, count=1, zero_density=0.5)
    with pytest.raises(SearchSpaceTooLarge):
        o_diagonalizable(fam, col_bound=8, budget=1000)


def test_witness_is_lexicographically_least():
    a = array([("11", 1)])
    assert o_diagonalizable([a], col_bound=2) == Diagonalizer((0,))


# --- random family generator -------------------------------------------------

def test_zero_density_zero_gives_all_ones():
    fam = random_gamma_family(5, rows=3, col_bound=4, count=2, zero_density=0.0)
    for member in fam:
        for n in range(3):
            for m in range(6):
                assert member.entry(n, m) == 1


def test_generator_deterministic_in_seed():
    assert random_gamma_family(9, 3, 4, 2, 0.5) == random_gamma_family(9, 3, 4, 2, 0.5)
    assert random_gamma_family(9, 3, 4, 2, 0.5) != random_gamma_family(10, 3, 4, 2, 0.5)


def test_generator_regression_fixture():
    fam = random_gamma_family(1, rows=3, col_bound=4, count=2, zero_density=0.5)
    assert all(is_gamma_array(m) for m in fam)
    words = [[r.word for r in m.rows] for m in fam.members]
    assert words == [["1", "", "01"], ["110", "", "010"]]


# --- agreement with the naive oracle (small cases; the full sweep lives in
# --- the acceptance suite) ---------------------------------------------------

def all_gamma_arrays(rows, cols):
    words = ["".join(bits) for bits in product("01", repeat=cols)]
    return [GammaArray(tuple(Row(w, 1) for w in combo))
            for combo in product(words, repeat=rows)]


@pytest.mark.parametrize("rows,cols", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_exhaustive_agreement_tiny(rows, cols):
    universe = all_gamma_arrays(rows, cols)
    fams = [(a,) for a in universe]
    fams += [(a, b) for i, a in enumerate(universe) for b in universe[i:]]
    for members in fams:
        fam = GammaFamily(members)
        witness = finitely_tau_diagonalizable(fam, cols, 1, 1, 0)
        assert (witness is not None) == naive.ftau_exists(members, cols, 1, 1, 0)
        if witness is not None:
            assert naive.selector_ok(members, [sorted(s) for s in witness.sets], cols, 1, 0)
        g = o_diagonalizable(members, cols)
        assert (g is not None) == naive.odiag_exists(members, cols)
        if g is not None:
            assert verify_diagonalizer(members, g, cols)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3),
       st.integers(1, 2), st.floats(0.1, 0.9))
def test_random_agreement(seed, rows, cols, count, density):
    fam = random_gamma_family(seed, rows, cols, count, density)
    witness = finitely_tau_diagonalizable(fam, cols, 1, 1, 0)
    assert (witness is not None) == naive.ftau_exists(fam.members, cols, 1, 1, 0)
    g = o_diagonalizable(fam, cols)
    assert (g is not None) == naive.odiag_exists(fam.members, cols)


# --- monotonicity in the quantifier surrogates --------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 3),
       st.integers(1, 3), st.floats(0.0, 0.9))
def test_verify_monotone_in_quota_and_exceptions(seed, rows, cols, count, density):
    fam = random_gamma_family(seed, rows, cols, count, density)
    bound = max(fam.max_word_length(), cols) + 1
    witness = finitely_tau_diagonalizable(fam, bound, 1, rows, 0)
    assert witness is not None, "tail column always provides a witness"
    weaker_q = Selector(witness.sets, witness.hit_quota - 1, witness.exceptions)
    weaker_e = Selector(witness.sets, witness.hit_quota, witness.exceptions + 1)
    if witness.hit_quota > 0:
        assert verify_selector(fam, weaker_q, bound)
    assert verify_selector(fam, weaker_e, bound)


# --- family file codec ---------------------------------------------------------

def test_family_file_round_trip():
    fams = [array([("0100", 1), ("", 1)]), array([("10", 0)])]
    text = render_family_file(fams)
    assert parse_family_file(text) == fams


def test_family_file_reports_all_bad_lines():
    with pytest.raises(FamilyParseError) as exc:
        parse_family_file("01/1\nbogus\n\n2/1\n")
    lines = [l for l, _ in exc.value.errors]
    assert lines == [2, 4]
