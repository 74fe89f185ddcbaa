"""Comparison reports and error-map rendering."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rangenull import ImageTensor, compare, error_map, pd_combine, pool_down


class TestCompare:
    def test_identical_inputs_hit_cap(self, stream):
        a = ImageTensor(stream.uniform((3, 4, 4)))
        report = compare(a, a)
        assert report.mse == 0.0
        assert report.psnr == 300.0
        assert report.l1 == 0.0
        assert report.max_abs == 0.0
        assert report.pixel_count == 48

    def test_uniform_offset(self, stream):
        a = ImageTensor(stream.uniform((1, 8, 8)))
        b = ImageTensor(a.data + 0.01)
        report = compare(a, b)
        assert abs(report.mse - 1e-4) < 1e-12
        assert abs(report.psnr - 40.0) < 1e-9
        assert abs(report.l1 - 0.01) < 1e-12
        assert abs(report.max_abs - 0.01) < 1e-15

    def test_single_pixel_error(self):
        a = ImageTensor(np.zeros((1, 1, 10)))
        data = np.zeros((1, 1, 10))
        data[0, 0, 3] = 0.1
        report = compare(a, ImageTensor(data))
        assert abs(report.l1 - 0.01) < 1e-15
        assert abs(report.mse - 1e-3) < 1e-15
        assert abs(report.max_abs - 0.1) < 1e-15

    @given(
        arrays(np.float64, (2, 3, 3), elements=st.floats(-5, 5, allow_nan=False, width=64)),
        arrays(np.float64, (2, 3, 3), elements=st.floats(-5, 5, allow_nan=False, width=64)),
    )
    def test_symmetric(self, a, b):
        ta, tb = ImageTensor(a), ImageTensor(b)
        assert compare(ta, tb) == compare(tb, ta)

    def test_invariants(self, stream):
        a = ImageTensor(stream.gaussian((3, 5, 5)))
        b = ImageTensor(stream.gaussian((3, 5, 5)))
        report = compare(a, b)
        assert 0.0 <= report.l1 <= report.max_abs
        assert report.mse <= report.max_abs**2

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            compare(ImageTensor(np.zeros((1, 2, 2))), ImageTensor(np.zeros((1, 2, 3))))

    def test_json_is_flat_numbers(self, stream):
        a = ImageTensor(stream.uniform((1, 2, 2)))
        payload = json.loads(compare(a, a).to_json())
        assert sorted(payload) == ["l1", "max_abs", "mse", "pixel_count", "psnr"]
        assert all(isinstance(v, (int, float)) for v in payload.values())

    def test_wiring_with_pooling(self, stream):
        y = ImageTensor(stream.uniform((3, 4, 4)))
        r = ImageTensor(stream.gaussian((3, 12, 12)) * 7)
        report = compare(y, pool_down(pd_combine(y, r, 3), 3))
        assert report.max_abs <= 1e-12


class TestErrorMap:
    def test_zero_difference_is_black(self, stream):
        a = ImageTensor(stream.uniform((3, 4, 4)))
        assert np.all(error_map(a, a).data == 0.0)

    def test_saturated_difference_is_white(self):
        a = ImageTensor(np.zeros((1, 2, 2)))
        b = ImageTensor(np.full((1, 2, 2), 0.2))
        out = error_map(a, b, gain=5.0)  # 5 * 0.2 = 1 saturates the ramp
        assert np.all(out.data == 1.0)

    def test_midpoint_color(self):
        a = ImageTensor(np.zeros((1, 1, 1)))
        b = ImageTensor(np.full((1, 1, 1), 0.1))
        out = error_map(a, b, gain=5.0)  # magnitude 0.5
        assert out.data.ravel().tolist() == [1.0, 0.5, 0.0]

    def test_channel_mean_before_ramp(self):
        gt = ImageTensor(np.zeros((3, 1, 1)))
        sr = ImageTensor(np.array([0.3, 0.0, 0.0]).reshape(3, 1, 1))
        out = error_map(gt, sr, gain=1.0)  # channel magnitudes (0.3, 0, 0) -> mean 0.1
        assert abs(out.data[0, 0, 0] - 0.3) < 1e-12

    def test_monotone_in_difference(self, stream):
        base = ImageTensor(np.zeros((3, 6, 6)))
        small = ImageTensor(stream.uniform((3, 6, 6)) * 0.1)
        larger = ImageTensor(small.data * 1.7)
        lo = error_map(base, small).data
        hi = error_map(base, larger).data
        assert np.all(hi >= lo - 1e-15)

    def test_gain_monotonicity(self, stream):
        gt = ImageTensor(stream.uniform((1, 4, 4)))
        sr = ImageTensor(stream.uniform((1, 4, 4)))
        lo = error_map(gt, sr, gain=5.0).data
        hi = error_map(gt, sr, gain=10.0).data
        assert np.all(hi >= lo - 1e-15)

    def test_gain_validation(self, stream):
        a = ImageTensor(stream.uniform((1, 2, 2)))
        with pytest.raises(ValueError):
            error_map(a, a, gain=0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            error_map(ImageTensor(np.zeros((1, 2, 2))), ImageTensor(np.zeros((3, 2, 2))))
