import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aerofl import quantize as Q

LOW_BITS = (2, 4, 8)

finite_tensors = arrays(
    np.float64, st.integers(1, 64),
    elements=st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False, width=64),
)


class TestQuantize:
    def test_ternary_example(self):
        q = Q.quantize(np.array([0.5, -0.2, 0.1]), 2)
        assert q.scale == 0.5
        assert q.codes.tolist() == [1, 0, 0]
        np.testing.assert_allclose(Q.dequantize(q), [0.5, 0.0, 0.0])

    def test_fp32_passthrough_exact(self):
        x = np.random.default_rng(0).normal(size=100).astype(np.float32)
        q = Q.quantize(x, 32)
        np.testing.assert_array_equal(Q.dequantize(q), x)

    def test_zero_delta_guard(self):
        q = Q.quantize(np.zeros(10), 8)
        assert q.scale == 0.0
        assert np.all(q.codes == 0)
        np.testing.assert_array_equal(Q.dequantize(q), 0.0)

    def test_invalid_bits(self):
        with pytest.raises(ValueError):
            Q.quantize(np.ones(3), 16)

    def test_max_element_reconstructs_exactly(self):
        rng = np.random.default_rng(1)
        for b in LOW_BITS:
            x = rng.normal(size=50)
            q = Q.quantize(x, b)
            recon = Q.dequantize(q)
            i = np.argmax(np.abs(x))
            assert abs(abs(recon[i]) - q.scale) < 1e-12

    def test_half_step_error_bound_linspace(self):
        x = np.linspace(-1, 1, 256)
        q = Q.quantize(x, 8)
        err = np.abs(x - Q.dequantize(q).astype(np.float64))
        assert err.max() <= q.scale / (2 * 127) + 1e-12

    @given(x=finite_tensors, bits=st.sampled_from(LOW_BITS))
    @settings(max_examples=100, deadline=None)
    def test_code_range_and_error_bound(self, x, bits):
        q = Q.quantize(x, bits)
        qmax = 2 ** (bits - 1) - 1
        assert np.abs(q.codes).max(initial=0) <= qmax
        err = np.abs(x - Q.dequantize(q).astype(np.float64))
        # float32 storage of the reconstruction adds ~1e-7 relative slack
        assert np.all(err <= q.scale / (2 * qmax) + 1e-6 * max(q.scale, 1.0))

    @given(x=finite_tensors, bits=st.sampled_from(LOW_BITS))
    @settings(max_examples=100, deadline=None)
    def test_symmetry(self, x, bits):
        q_pos = Q.quantize(x, bits)
        q_neg = Q.quantize(-x, bits)
        assert q_neg.scale == q_pos.scale
        np.testing.assert_array_equal(q_neg.codes, -q_pos.codes)

    @given(x=finite_tensors, bits=st.sampled_from(LOW_BITS))
    @settings(max_examples=100, deadline=None)
    def test_idempotence(self, x, bits):
        q1 = Q.quantize(x, bits)
        q2 = Q.quantize(Q.dequantize(q1).astype(np.float64), bits)
        assert q2.scale == pytest.approx(q1.scale, rel=1e-6)
        np.testing.assert_array_equal(q2.codes, q1.codes)

    def test_mixed_bits_rejected_in_delta(self):
        t2 = Q.quantize(np.ones(3), 2)
        t4 = Q.quantize(np.ones(3), 4)
        with pytest.raises(ValueError, match="mixed"):
            Q.QuantizedDelta(tensors={"a": t2, "b": t4}, client_id=1, round_index=0)


class TestDistortion:
    def test_fp32_zero(self):
        x = np.random.default_rng(2).normal(size=1000)
        assert Q.distortion(x, 32) == 0.0

    def test_on_grid_zero(self):
        grid = np.array([-0.5, 0.0, 0.5])
        assert Q.distortion(grid, 2) == pytest.approx(0.0, abs=1e-15)

    def test_statistical_monotonicity_in_bits(self):
        x = np.random.default_rng(42).normal(size=10_000)
        d = {b: Q.distortion(x, b) for b in LOW_BITS}
        assert d[2] > d[4] > d[8]


class TestPayloadBytes:
    @pytest.mark.parametrize("bits,expected_b,expected_kib", [
        (32, 38_788.0, "37.88"),
        (8, 9_697.0, "9.47"),
        (4, 4_848.5, "4.73"),
        (2, 2_424.25, "2.37"),
    ])
    def test_reference_sizes(self, bits, expected_b, expected_kib):
        size = Q.payload_bytes(9_697, bits)
        assert size == expected_b
        assert f"{size / 1024:.2f}" == expected_kib

    def test_scale_overhead(self):
        assert Q.payload_bytes(9_697, 4, include_scales=True) == 4_848.5 + 32
        assert Q.payload_bytes(9_697, 32, include_scales=True) == 38_788.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            Q.payload_bytes(0, 4)


class TestWireFormat:
    @pytest.mark.parametrize("bits", LOW_BITS)
    def test_round_trip_random(self, bits):
        rng = np.random.default_rng(bits)
        x = rng.normal(size=(7, 11))
        q = Q.quantize(x, bits)
        raw = Q.pack_codes(q)
        back = Q.unpack_codes(raw, bits, q.shape, q.scale)
        np.testing.assert_array_equal(back.codes, q.codes)
        assert back.scale == q.scale

    def test_packed_length(self):
        q = Q.quantize(np.random.default_rng(0).normal(size=9_697), 4)
        assert len(Q.pack_codes(q)) == 4_849  # ceil(9697 * 4 / 8)

    def test_empty_tensor(self):
        q = Q.QuantizedTensor(codes=np.zeros((0,), np.int32), scale=0.0,
                              bits=4, shape=(0,))
        assert Q.pack_codes(q) == b""
        back = Q.unpack_codes(b"", 4, (0,), 0.0)
        assert back.codes.size == 0

    def test_truncated_stream_rejected(self):
        q = Q.quantize(np.random.default_rng(1).normal(size=10), 4)
        raw = Q.pack_codes(q)
        with pytest.raises(Q.WireFormatError):
            Q.unpack_codes(raw[:-1], 4, q.shape, q.scale)

    def test_dirty_padding_rejected(self):
        q = Q.quantize(np.random.default_rng(2).normal(size=5), 4)
        raw = bytearray(Q.pack_codes(q))
        raw[-1] |= 0x01  # 5 nibbles used, last nibble is padding
        with pytest.raises(Q.WireFormatError, match="padding"):
            Q.unpack_codes(bytes(raw), 4, q.shape, q.scale)

    def test_b32_not_packable(self):
        q = Q.quantize(np.ones(3, np.float32), 32)
        with pytest.raises(ValueError):
            Q.pack_codes(q)
