import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import direct_si, direct_sobel, direct_ti
from vcx.features import GeometryMismatch
from vcx.siti import (
    EmptyStream,
    PlaneTooSmall,
    SitiRecord,
    sequence_siti,
    si_frame,
    sobel_magnitude,
    summarize_siti,
    ti_frame,
)


def step_plane(rows, cols, edge):
    plane = np.zeros((rows, cols), np.uint8)
    plane[:, edge:] = 255
    return plane


def test_constant_plane_sobel_is_zero():
    mag = sobel_magnitude(np.full((10, 12), 77, np.uint8))
    assert mag.shape == (8, 10)
    assert not mag.any()


def test_vertical_step_edge():
    plane = step_plane(8, 8, 4)
    mag = sobel_magnitude(plane)
    # interior columns 3 and 4 straddle the edge (output columns 2 and 3)
    assert (mag[:, 2:4] == 1020).all()
    assert not mag[:, :2].any() and not mag[:, 4:].any()
    np.testing.assert_array_equal(mag, direct_sobel(plane))


def test_plane_too_small():
    with pytest.raises(PlaneTooSmall):
        sobel_magnitude(np.zeros((2, 2)))
    with pytest.raises(PlaneTooSmall):
        si_frame(np.zeros((3, 2)))


def test_si_constant_is_zero():
    assert si_frame(np.full((5, 5), 9)) == 0


def test_si_two_point_distribution():
    # interior columns 1..4; columns 2 and 3 see the edge
    plane = step_plane(6, 6, 3)
    mag = sobel_magnitude(plane)
    assert sorted(set(mag.ravel())) == [0.0, 1020.0]
    assert (mag == 1020).sum() == mag.size // 2
    assert si_frame(plane) == pytest.approx(510.0, rel=1e-12)


def test_si_matches_direct_oracle(rng):
    for _ in range(25):
        plane = rng.integers(0, 256, (rng.integers(3, 20), rng.integers(3, 20)))
        assert si_frame(plane) == pytest.approx(direct_si(plane), rel=1e-6)


def test_ti_examples(rng):
    prev = rng.integers(0, 200, (16, 16)).astype(np.uint8)
    assert ti_frame(prev, prev) == 0
    assert ti_frame(prev + np.uint8(40), prev) == 0
    cur = rng.integers(0, 256, (16, 16)).astype(np.uint8)
    assert ti_frame(cur, prev) == pytest.approx(direct_ti(cur, prev), rel=1e-6)


def test_ti_signed_difference_does_not_wrap():
    prev = np.array([[255, 0]], np.uint8)
    cur = np.array([[0, 255]], np.uint8)
    assert ti_frame(cur, prev) == pytest.approx(255.0)


def test_ti_geometry_mismatch():
    with pytest.raises(GeometryMismatch):
        ti_frame(np.zeros((4, 4)), np.zeros((4, 5)))


def test_single_frame_sequence(rng):
    plane = rng.integers(0, 256, (12, 12))
    records, summary = sequence_siti([plane])
    assert records == [SitiRecord(0, si_frame(plane), None)]
    assert summary.SI == si_frame(plane) and summary.TI == 0


def test_constant_sequence():
    _, summary = sequence_siti([np.full((8, 8), 50)] * 4)
    assert (summary.SI, summary.TI) == (0, 0)


def test_three_frame_maxima(rng):
    planes = [rng.integers(0, a, (16, 16)) for a in (40, 250, 90)]
    records, summary = sequence_siti(planes)
    si = [si_frame(p) for p in planes]
    ti = [ti_frame(planes[1], planes[0]), ti_frame(planes[2], planes[1])]
    assert [r.si_frame for r in records] == si
    assert [r.ti_frame for r in records[1:]] == ti
    assert summary.SI == max(si) and summary.TI == max(ti)
    assert summary.SI == si[1]


def test_empty_sequence():
    with pytest.raises(EmptyStream):
        sequence_siti([])
    with pytest.raises(EmptyStream):
        summarize_siti([])


planes = st.tuples(st.integers(3, 16), st.integers(3, 16), st.integers(0, 2**32 - 1)).map(
    lambda a: np.random.default_rng(a[2]).integers(0, 150, (a[0], a[1])))


@settings(max_examples=60, deadline=None)
@given(planes, st.integers(1, 100))
def test_offset_invariance(plane, offset):
    assert si_frame(plane + offset) == si_frame(plane)
    prev = plane[::-1]
    assert ti_frame(plane + offset, prev + offset) == ti_frame(plane, prev)


@settings(max_examples=60, deadline=None)
@given(planes, st.integers(1, 6))
def test_si_scales_linearly(plane, scale):
    assert si_frame(scale * plane) == pytest.approx(scale * si_frame(plane), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(planes, min_size=1, max_size=5))
def test_summary_bounds_every_frame(seq):
    shape = seq[0].shape
    seq = [np.resize(p, shape) for p in seq]
    records, summary = sequence_siti(seq)
    assert all(summary.SI >= r.si_frame for r in records)
    assert all(summary.TI >= r.ti_frame for r in records[1:])
