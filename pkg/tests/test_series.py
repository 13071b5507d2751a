import numpy as np
import pytest

from specbench import ForecastTask, TimeSeries, make_windows, split_traditional
from specbench.errors import RangeTooShort


def series(values, sid="s"):
    return TimeSeries(id=sid, values=np.asarray(values, dtype=float))


def test_make_windows_hand_enumeration():
    pairs = make_windows(series([1, 2, 3, 4, 5]), ForecastTask(2, 1), stride=1)
    assert len(pairs) == 3
    assert [p.anchor for p in pairs] == [2, 3, 4]
    np.testing.assert_array_equal(pairs[0].context, [1, 2])
    np.testing.assert_array_equal(pairs[0].target, [3])
    np.testing.assert_array_equal(pairs[2].context, [3, 4])
    np.testing.assert_array_equal(pairs[2].target, [5])


def test_make_windows_range_too_short():
    with pytest.raises(RangeTooShort):
        make_windows(series([1, 2, 3, 4, 5]), ForecastTask(5, 1))


def test_make_windows_stride_and_count_formula():
    pairs = make_windows(series(range(7)), ForecastTask(2, 1), stride=2)
    # count = floor((7 - 2 - 1) / 2) + 1 = 3
    assert [p.anchor for p in pairs] == [2, 4, 6]

    for stride in (1, 2, 3, 5):
        pairs = make_windows(series(range(40)), ForecastTask(6, 3), stride=stride)
        assert len(pairs) == (40 - 6 - 3) // stride + 1


def test_stride_equals_subsampled_stride_one():
    ts = series(np.random.default_rng(1).normal(size=60))
    task = ForecastTask(5, 2)
    dense = make_windows(ts, task, stride=1)
    for s in (2, 3, 4):
        strided = make_windows(ts, task, stride=s)
        subsampled = dense[::s]
        assert len(strided) == len(subsampled)
        for a, b in zip(strided, subsampled):
            assert a.anchor == b.anchor
            np.testing.assert_array_equal(a.context, b.context)
            np.testing.assert_array_equal(a.target, b.target)


def test_windows_are_exact_slices():
    values = np.random.default_rng(2).normal(size=30)
    ts = series(values)
    for pair in make_windows(ts, ForecastTask(4, 3)):
        np.testing.assert_array_equal(pair.context, values[pair.anchor - 4 : pair.anchor])
        np.testing.assert_array_equal(pair.target, values[pair.anchor : pair.anchor + 3])


def test_split_traditional_paper_shape():
    ts = series(np.random.default_rng(3).normal(size=1200))
    task = ForecastTask(256, 192)
    split = split_traditional(ts, task, split_point=1008)
    assert all(p.anchor + task.horizon <= 1008 for p in split.train)
    assert all(p.anchor >= 1008 for p in split.test)
    # contexts of the first test window end exactly at the split point
    assert split.test[0].anchor == 1008
    assert len(split.test) == 1


def test_split_traditional_single_test_window_boundary():
    ts = series(np.random.default_rng(4).normal(size=50))
    task = ForecastTask(10, 5)
    split = split_traditional(ts, task, split_point=45)
    assert len(split.test) == 1
    assert split.test[0].anchor == 45


def test_split_traditional_preconditions():
    ts = series(np.random.default_rng(5).normal(size=50))
    task = ForecastTask(10, 5)
    with pytest.raises(RangeTooShort):
        split_traditional(ts, task, split_point=14)  # T < l + h
    with pytest.raises(RangeTooShort):
        split_traditional(ts, task, split_point=46)  # no room for a test target


def test_split_separation_invariant():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(40, 120))
        l = int(rng.integers(4, 12))
        h = int(rng.integers(2, 8))
        T = int(rng.integers(l + h, n - h + 1))
        split = split_traditional(series(rng.normal(size=n)), ForecastTask(l, h), T)
        assert all(p.anchor + h <= T for p in split.train)
        assert all(p.anchor >= T for p in split.test)


def test_invalid_containers():
    with pytest.raises(ValueError):
        TimeSeries(id="", values=np.ones(3))
    with pytest.raises(ValueError):
        TimeSeries(id="x", values=np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        ForecastTask(0, 4)
