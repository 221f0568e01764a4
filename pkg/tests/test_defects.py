import numpy as np
import pytest

from gliderlab.defects import (Decomposition, SFTError, SFTSpec,
                               classify_dislocations, classify_interfaces,
                               compute_period, debruijn_graph, defect_field,
                               language, union_defect_field)
from gliderlab.lattice import Alphabet, BINARY, from_word, rng_stream

A3 = Alphabet(3)
# three monochromatic domains over {0,1,2}
MONO = tuple(SFTSpec(A3, tuple((s,) for s in range(3) if s != d), f"only{d}")
             for d in range(3))
MONO_UNION = SFTSpec(A3, tuple((a, b) for a in range(3) for b in range(3)
                               if a != b), "monochrome")
CHECKER = SFTSpec(BINARY, ((0, 0), (1, 1)), "checkerboard")


def test_sft_basics():
    assert CHECKER.order == 2
    assert CHECKER.admissible((0, 1, 0, 1))
    assert not CHECKER.admissible((0, 1, 1))
    assert language(CHECKER, 3) == {(0, 1, 0), (1, 0, 1)}
    with pytest.raises(SFTError):
        SFTSpec(BINARY, ((0,), (1,)))  # empty language
    nodes, edges = debruijn_graph(CHECKER)
    assert set(edges) == {((0,), (1,)), ((1,), (0,))}


def test_occurrence_intervals():
    ints = CHECKER.occurrence_intervals(np.array([0, 1, 1, 0, 0], dtype=np.uint8))
    assert ints == [(1, 2), (3, 4)]


# a semi-infinite picture: 4 black cells, 5 white, 5 gray, 3 white, with the
# monochrome continuation padded on both sides
MONO_WORD = [1] * 9 + [0] * 5 + [2] * 5 + [0] * 6
MONO_FIELD = [7, 5, 3, 1, 2, 4, 5, 3, 1, 2, 4, 5, 3, 1, 2, 4, 6]


def test_mono_defect_field_matches_picture():
    c = from_word(A3, MONO_WORD, origin=-6)
    fld = defect_field(MONO_UNION, c)
    shown = fld.values[-1 - fld.lo: 16 - fld.lo]
    assert list(shown) == MONO_FIELD
    assert fld.positions() == [2, 7, 12]


def test_interface_labels_match_picture():
    c = from_word(A3, MONO_WORD, origin=-6)
    dec = Decomposition(MONO, 2)
    reading = classify_interfaces(dec, c)
    assert reading.kind == "interface"
    assert reading.positions == [2, 7, 12]
    assert reading.label_strings() == ["1-0", "0-2", "2-0"]
    u = union_defect_field(MONO, c)
    shown = u.values[-1 - u.lo: 16 - u.lo]
    assert list(shown) == MONO_FIELD


# the checkerboard picture: three phase slips, padded with admissible
# continuations on both sides
CHECKER_WORD = [1, 0, 1, 0] + [1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1,
                               1, 0, 1] + [0, 1, 0]
CHECKER_FIELD = [7, 5, 3, 1, 2, 4, 6, 5, 3, 1, 2, 4, 5, 3, 1, 2, 4, 6]


def test_checker_defect_field_matches_picture():
    c = from_word(BINARY, CHECKER_WORD, origin=-5)
    fld = defect_field(CHECKER, c)
    shown = fld.values[-1 - fld.lo: 17 - fld.lo]
    assert list(shown) == CHECKER_FIELD
    assert fld.positions() == [2, 8, 13]


def test_checker_period_and_phases():
    pd = compute_period(CHECKER)
    assert pd.P == 2 and pd.order == 2 and pd.consistent
    assert pd.classes == {(0,): 0, (1,): 1}
    pd1 = compute_period(CHECKER, base=(1,))
    assert pd1.classes == {(1,): 0, (0,): 1}


def test_dislocation_labels_both_bases():
    c = from_word(BINARY, CHECKER_WORD, origin=-5)
    reading = classify_dislocations(CHECKER, compute_period(CHECKER), c)
    assert reading.kind == "dislocation"
    assert reading.positions == [2, 8, 13]
    assert reading.label_strings() == ["0-1", "1-0", "1-0"]
    # with the other phase base the picture's labels come out
    pic = classify_dislocations(CHECKER, compute_period(CHECKER, base=(1,)), c)
    assert pic.label_strings() == ["1-0", "0-1", "0-1"]


def test_dislocations_translation_invariant():
    pd = compute_period(CHECKER)
    a = from_word(BINARY, CHECKER_WORD, origin=-5)
    b = from_word(BINARY, CHECKER_WORD, origin=9)
    ra = classify_dislocations(CHECKER, pd, a)
    rb = classify_dislocations(CHECKER, pd, b)
    assert [p + 14 for p in ra.positions] == rb.positions
    assert ra.labels == rb.labels


def brute_field(sft, cells):
    """Largest centered admissible word length per cell, saturating when the
    window leaves the sampled array before turning inadmissible."""
    n = len(cells)
    vals, sat = np.zeros(n, dtype=np.int64), np.zeros(n, dtype=bool)
    for k in range(n):
        m = 0
        while True:
            a, b = k - (m + 1 - 1) // 2, k + (m + 1) // 2
            if a < 0 or b >= n:
                sat[k] = True
                break
            if not sft.admissible(cells[a:b + 1]):
                break
            m += 1
        vals[k] = m
    return vals, sat


def test_field_matches_brute_force():
    rng = rng_stream(17, 0)
    for trial in range(20):
        cells = rng.integers(0, 2, 40).astype(np.uint8)
        c = from_word(BINARY, cells)
        fld = defect_field(CHECKER, c)
        vals, sat = brute_field(CHECKER, cells)
        keep = ~sat & ~fld.saturated
        assert (fld.values[keep] == vals[keep]).all()
        # running off the array before an inadmissible window => saturated
        assert (~sat | fld.saturated).all()


def test_period_three_orbit():
    allowed = {(0, 0, 1), (0, 1, 0), (1, 0, 0)}
    sft = SFTSpec(BINARY, tuple(w for w in
                                ((a, b, c) for a in range(2)
                                 for b in range(2) for c in range(2))
                                if w not in allowed), "orbit001")
    pd = compute_period(sft)
    assert pd.P == 3 and pd.consistent


def test_non_transitive_sft_rejected():
    two_points = SFTSpec(BINARY, ((0, 1), (1, 0)), "twofixed")
    with pytest.raises(SFTError):
        compute_period(two_points)


def test_decomposition_requires_disjoint_domains():
    with pytest.raises(ValueError):
        Decomposition((MONO[0], MONO[0]), 2)
