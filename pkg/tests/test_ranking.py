import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_ranking, random_release
from matter.dataset import DatasetError, release_from_columns
from matter.ranking import (BudgetKind, EffortBudget, Ranking, confusion_of_prefix, cut_snm, cut_ssc,
                            import_external_ranking, write_inspections_json)


def equal_release(k, labels=None):
    ids = [f"m{i}" for i in range(k)]
    return release_from_columns(ids, [10] * k, labels if labels is not None else [0] * k)


def in_order(rel):
    return Ranking.from_order(rel.release_id, rel.ids, "fixture")


@pytest.mark.parametrize("k, fraction, x", [(10, 0.2, 2), (7, 0.2, 1), (3, 0.2, 0), (10, 1.0, 10),
                                            (10, 0.7, 7), (3, 0.1 + 0.2, 0), (100, 0.29, 29)])
def test_snm_prefix(k, fraction, x):
    rel = equal_release(k)
    res = cut_snm(in_order(rel), rel, fraction)
    assert res.x == x
    assert res.degenerate == (x == 0)
    assert res.pii <= fraction


def test_ssc_hand_trace():
    rel = release_from_columns(list("abcd"), [10, 5, 30, 55], [1, 0, 0, 1])
    res = cut_ssc(in_order(rel), rel, 0.2)
    assert res.x == 2 and res.pci == 0.15
    full = cut_ssc(in_order(rel), rel, 1.0)
    assert full.x == 4 and full.pci == 1.0


def test_ssc_first_module_over_budget():
    rel = release_from_columns(list("ab"), [60, 40], [1, 0])
    res = cut_ssc(in_order(rel), rel, 0.2)
    assert res.x == 0 and res.degenerate and res.pci == 0.0


@pytest.mark.parametrize("fraction", [0.0, -0.1, 1.01])
def test_bad_fraction(fraction):
    rel = equal_release(5)
    with pytest.raises(ValueError):
        cut_snm(in_order(rel), rel, fraction)
    with pytest.raises(ValueError):
        cut_ssc(in_order(rel), rel, fraction)
    with pytest.raises(ValueError):
        EffortBudget(BudgetKind.SNM, fraction)


def test_confusion_examples():
    rel = equal_release(4, [1, 0, 1, 0])
    r = in_order(rel)
    cm = confusion_of_prefix(r, rel, 2)
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (1, 1, 1, 1)
    cm0 = confusion_of_prefix(r, rel, 0)
    assert (cm0.tp, cm0.fp, cm0.tn, cm0.fn) == (0, 0, 2, 2)
    cmk = confusion_of_prefix(r, rel, 4)
    assert (cmk.tp, cmk.fp, cmk.tn, cmk.fn) == (2, 2, 0, 0)
    with pytest.raises(ValueError):
        confusion_of_prefix(r, rel, 5)


def test_confusion_identities_exhaustive():
    rng = random.Random(3)
    for _ in range(300):
        rel = random_release(rng, max_k=10)
        r = random_ranking(rng, rel)
        labels = [rel.module(m).label for m in r.order]
        for x in range(rel.k + 1):
            cm = confusion_of_prefix(r, rel, x)
            assert (cm.tp, cm.fp, cm.tn, cm.fn) == oracles.confusion(labels, x)
            assert cm.tp + cm.fp == x and cm.total == rel.k and cm.tp + cm.fn == rel.n


def test_cut_needs_labels_and_matching_ranking():
    unlabeled = release_from_columns(["a", "b"], [1, 2])
    with pytest.raises(DatasetError):
        cut_snm(in_order(unlabeled), unlabeled, 0.5)
    rel = equal_release(3)
    other = Ranking.from_order(rel.release_id, ["m0", "m1"], "x")
    with pytest.raises(ValueError):
        cut_snm(other, rel, 0.5)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_cuts_monotone_in_fraction(seed, f1, f2):
    rng = random.Random(seed)
    rel = random_release(rng)
    r = random_ranking(rng, rel)
    lo, hi = sorted((f1, f2))
    for cut in (cut_snm, cut_ssc):
        a, b = cut(r, rel, lo), cut(r, rel, hi)
        assert a.x <= b.x and a.confusion.tp <= b.confusion.tp
        assert a.pii <= b.pii and a.pci <= b.pci


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.integers(2, 50))
def test_sloc_scaling_leaves_cut_unchanged(seed, fraction, factor):
    rng = random.Random(seed)
    rel = random_release(rng)
    scaled = release_from_columns(rel.ids, [m.sloc * factor for m in rel.modules],
                                  [m.label for m in rel.modules])
    r = random_ranking(rng, rel)
    for cut in (cut_snm, cut_ssc):
        a, b = cut(r, rel, fraction), cut(r, scaled, fraction)
        assert a.x == b.x and a.pii == b.pii and a.pci == b.pci


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.001, 1.0))
def test_cuts_never_exceed_and_are_maximal(seed, fraction):
    rng = random.Random(seed)
    rel = random_release(rng)
    r = random_ranking(rng, rel)
    slocs = [rel.module(m).sloc for m in r.order]
    snm = cut_snm(r, rel, fraction)
    ssc = cut_ssc(r, rel, fraction)
    assert snm.pii <= fraction and ssc.pci <= fraction
    assert snm.x == oracles.snm_x(rel.k, fraction)
    assert ssc.x == oracles.ssc_x(slocs, fraction)
    f = Fraction(repr(fraction))
    if ssc.x < rel.k:
        assert Fraction(sum(slocs[: ssc.x + 1]), rel.s) > f


def test_ranking_from_scores_tie_break():
    r = Ranking.from_scores("rel", {"a": 0.9, "b": 0.1, "c": 0.5})
    assert r.order == ("a", "c", "b")
    r = Ranking.from_scores("rel", {"b": 0.5, "a": 0.5})
    assert r.order == ("a", "b")


def test_ranking_rejects_increasing_scores():
    with pytest.raises(ValueError):
        Ranking("rel", ("a", "b"), {"a": 0.1, "b": 0.2})
    with pytest.raises(ValueError):
        Ranking("rel", ("a", "b"), {"a": 0.1, "b": float("nan")})


def test_import_external(tmp_path):
    rel = release_from_columns(list("abc"), [1, 2, 3], [0, 1, 0], project="demo")
    path = tmp_path / "scores.csv"
    path.write_text("id,score\na,0.9\nb,0.1\nc,0.5\n")
    r = import_external_ranking(path, rel)
    assert r.order == ("a", "c", "b") and r.release_id == "demo"
    path.write_text("id,score\na,0.5\nb,0.5\nc,0.5\n")
    assert import_external_ranking(path, rel).order == ("a", "b", "c")


@pytest.mark.parametrize("body, pattern", [
    ("a,0.9\nb,0.1\n", "missing ids c"),
    ("a,0.9\nb,0.1\nc,1\nd,2\n", "unknown ids d"),
    ("a,0.9\na,0.1\nb,1\nc,2\n", "duplicate id 'a'"),
    ("a,0.9\nb,inf\nc,1\n", "non-finite score"),
    ("a,0.9\nb,high\nc,1\n", "non-numeric score"),
])
def test_import_external_errors(tmp_path, body, pattern):
    rel = release_from_columns(list("abc"), [1, 2, 3], [0, 1, 0])
    path = tmp_path / "scores.csv"
    path.write_text("id,score\n" + body)
    with pytest.raises(DatasetError, match=pattern):
        import_external_ranking(path, rel)


def test_inspection_json_export(tmp_path):
    import json
    rel = equal_release(10, [1, 0] * 5)
    res = cut_snm(in_order(rel), rel, 0.2)
    write_inspections_json([res], tmp_path / "cuts.json")
    row = json.loads((tmp_path / "cuts.json").read_text())[0]
    assert row == {"model": "fixture", "release": "release", "budget_kind": "snm", "fraction": 0.2,
                   "x": 2, "tp": 1, "fp": 1, "tn": 4, "fn": 4, "pii": 0.2, "pci": 0.2}
