import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrkl.errors import ParseError, PlacementError, ValidationError
from hrkl.series import (
    CLASS_NAMES,
    corrupt,
    corrupt_dataset,
    generate_gait_like,
    generate_synthetic,
    load_csv,
    load_labels,
    make_series,
    section_length,
    standardize_series,
    write_labels,
    write_long_csv,
)


def zero_runs(y):
    """(start, length) of every maximal run of exact zeros."""
    runs, start = [], None
    for i, v in enumerate(list(y) + [1.0]):
        if v == 0.0 and start is None:
            start = i
        elif v != 0.0 and start is not None:
            runs.append((start, i - start))
            start = None
    return runs


def test_standardize_population_std():
    z, degenerate = standardize_series([1.0, 2.0, 3.0, 4.0])
    assert not degenerate
    assert z.mean() == pytest.approx(0.0, abs=1e-12)
    assert z.std() == pytest.approx(1.0)


def test_constant_series_is_degenerate():
    z, degenerate = standardize_series([5.0] * 10)
    assert degenerate
    assert np.all(z == 0)


def test_make_series_maps_time_to_unit_interval():
    s = make_series("a", [10, 20, 40], [1, 2, 3])
    np.testing.assert_allclose(s.x, [0, 1 / 3, 1])
    assert not s.x.flags.writeable


@pytest.mark.parametrize("t", [[0, 0, 1], [2, 1, 3], [0]])
def test_make_series_rejects_bad_time(t):
    with pytest.raises(ValidationError):
        make_series("a", t, np.arange(len(t), dtype=float))


def test_long_and_wide_round_trip(tmp_path):
    d = generate_synthetic(3, n=20)
    path = tmp_path / "long.csv"
    write_long_csv(d, path)
    back = load_csv(path, standardize=False)
    assert back.ids == d.ids
    for a, b in zip(d.series, back.series):
        np.testing.assert_array_equal(a.y, b.y)

    wide = tmp_path / "wide.csv"
    wide.write_text("t,a,b\n2020-01-01,1,5\n2020-01-02,2,3\n2020-01-04,4,1\n")
    w = load_csv(wide)
    assert w.meta["layout"] == "wide"
    np.testing.assert_allclose(w.series[0].x, [0, 1 / 3, 1])


def test_parse_error_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("series_id,t,value\na,0,1\na,1,oops\n")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.line == 3


def test_labels_round_trip(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels(["a", "b"], [1, -1], path)
    assert load_labels(path) == {"a": 1, "b": -1}


def test_synthetic_shape_and_determinism():
    a = generate_synthetic(7)
    b = generate_synthetic(7)
    assert len(a) == 60 and all(s.n == 100 for s in a.series)
    assert a.labels == tuple(np.repeat(np.arange(len(CLASS_NAMES)), 10))
    for s, t in zip(a.series, b.series):
        np.testing.assert_array_equal(s.y, t.y)
        assert abs(s.y.mean()) < 1e-12 and s.y.std() == pytest.approx(1.0)


def test_gait_like():
    d = generate_gait_like(0)
    assert len(d) == 15 and d.labels == (0,) * 15


def test_section_length_rounds_half_up():
    assert section_length(100, 0.15) == 15
    assert section_length(10, 0.25) == 3
    assert section_length(10, 0.05) == 1


def test_corrupt_makes_two_separate_runs():
    s = generate_gait_like(1, count=1).series[0]
    out = corrupt(s, seed=4, sections=2, frac=0.15)
    runs = zero_runs(out.y)
    assert [length for _, length in runs] == [30, 30]
    untouched = np.ones(s.n, bool)
    for start, length in runs:
        untouched[start : start + length] = False
    np.testing.assert_array_equal(out.y[untouched], s.y[untouched])


def test_corrupt_rejects_impossible_requests():
    s = make_series("a", np.arange(10.0), np.arange(10.0))
    with pytest.raises(ValidationError):
        corrupt(s, 0, sections=3, frac=0.3)
    with pytest.raises(PlacementError):
        corrupt(s, 0, sections=4, frac=0.2)


def test_corrupt_dataset_labels():
    d = generate_gait_like(0)
    out = corrupt_dataset(d, ["gait_00", "gait_05"], seed=1)
    assert out.labels[0] == 1 and out.labels[5] == 1 and sum(out.labels) == 2
    with pytest.raises(ValidationError):
        corrupt_dataset(d, ["nope"], seed=1)


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(20, 300),
    sections=st.integers(1, 3),
    frac=st.floats(0.01, 0.2),
    seed=st.integers(0, 2**31),
)
def test_corrupt_run_lengths_property(n, sections, frac, seed):
    rng = np.random.default_rng(seed)
    s = make_series("s", np.arange(n, dtype=float), rng.normal(size=n) + 10.0, standardize=False)
    length = section_length(n, frac)
    try:
        out = corrupt(s, seed, sections, frac)
    except PlacementError:
        return
    runs = zero_runs(out.y)
    if length == 0:
        assert runs == []
    else:
        assert [r for _, r in runs] == [length] * sections


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_standardize_property(values):
    z, degenerate = standardize_series(values)
    if degenerate:
        assert np.all(z == 0)
    else:
        assert abs(z.mean()) < 1e-6
        assert z.std() == pytest.approx(1.0, rel=1e-6)
