"""Symmetric uniform quantization of weight deltas and the packed wire format.

Per-tensor scheme: codes = clip(round((2^(b-1)-1) * x / alpha)) with
alpha = max|x|, giving a signed grid of 2^b - 1 levels. b=2 degenerates
to the ternary grid {-alpha, 0, +alpha}. b=32 is an identity passthrough
(raw float32 values travel unquantized).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VALID_BITS = (2, 4, 8, 32)
SCALE_BYTES_PER_DELTA = 8 * 4  # one float32 scale per parameter tensor


class WireFormatError(ValueError):
    """Corrupt packed code stream."""


@dataclass(frozen=True)
class QuantizedTensor:
    codes: np.ndarray   # int32 codes for b<32; raw float32 values for b=32
    scale: float        # alpha = max|x| of the source tensor (unused at b=32)
    bits: int
    shape: tuple[int, ...]

    def __post_init__(self):
        if self.bits not in VALID_BITS:
            raise ValueError(f"bits must be one of {VALID_BITS}, got {self.bits}")
        if self.bits < 32:
            qmax = 2 ** (self.bits - 1) - 1
            if self.codes.size and int(np.abs(self.codes).max()) > qmax:
                raise ValueError(f"codes exceed +-{qmax} for b={self.bits}")


@dataclass(frozen=True)
class QuantizedDelta:
    """One client's full update: 8 quantized tensors sharing a bit-width."""

    tensors: dict[str, QuantizedTensor]
    client_id: int
    round_index: int

    def __post_init__(self):
        bit_set = {t.bits for t in self.tensors.values()}
        if len(bit_set) > 1:
            raise ValueError(f"mixed bit-widths in one delta: {sorted(bit_set)}")


def _round_half_away(x: np.ndarray) -> np.ndarray:
    # np.round ties to even; the grid needs sign-symmetric tie breaking.
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(delta: np.ndarray, bits: int) -> QuantizedTensor:
    """Quantize one tensor. b=32 passes raw values through unchanged."""
    if bits not in VALID_BITS:
        raise ValueError(f"bits must be one of {VALID_BITS}, got {bits}")
    delta = np.asarray(delta)
    if bits == 32:
        # identity passthrough: raw values travel unquantized
        return QuantizedTensor(
            codes=delta.copy(), scale=0.0, bits=32, shape=delta.shape
        )
    alpha = float(np.abs(delta).max()) if delta.size else 0.0
    qmax = 2 ** (bits - 1) - 1
    if alpha == 0.0:
        codes = np.zeros(delta.shape, dtype=np.int32)
    else:
        scaled = qmax * delta.astype(np.float64) / alpha
        codes = np.clip(_round_half_away(scaled), -qmax, qmax).astype(np.int32)
    return QuantizedTensor(codes=codes, scale=alpha, bits=bits, shape=delta.shape)


def dequantize(q: QuantizedTensor) -> np.ndarray:
    """Reconstruct real values: codes * alpha / (2^(b-1)-1)."""
    if q.bits == 32:
        return q.codes.copy()
    qmax = 2 ** (q.bits - 1) - 1
    if q.scale == 0.0:
        return np.zeros(q.shape, dtype=np.float64)
    return q.codes.astype(np.float64) * (q.scale / qmax)


def distortion(delta: np.ndarray, bits: int) -> float:
    """Squared reconstruction error ||x - deq(quant(x))||^2 (64-bit sum)."""
    delta = np.asarray(delta, dtype=np.float64)
    recon = dequantize(quantize(delta, bits)).astype(np.float64)
    diff = delta - recon
    return float(np.dot(diff.ravel(), diff.ravel()))


def payload_bytes(param_count: int, bits: int, include_scales: bool = False) -> float:
    """Per-round upload size in bytes: param_count * b / 8 (+ scales)."""
    if param_count <= 0:
        raise ValueError("param_count must be positive")
    if bits not in VALID_BITS:
        raise ValueError(f"bits must be one of {VALID_BITS}, got {bits}")
    size = param_count * bits / 8
    if include_scales and bits < 32:
        size += SCALE_BYTES_PER_DELTA
    return size


def pack_codes(q: QuantizedTensor) -> bytes:
    """Bit-pack codes MSB-first, b bits each, two's-complement, byte-padded."""
    if q.bits not in (2, 4, 8):
        raise ValueError(f"packing supports b in (2, 4, 8), got {q.bits}")
    b = q.bits
    codes = q.codes.ravel().astype(np.int64)
    fields = (codes & ((1 << b) - 1)).astype(np.uint8)
    per_byte = 8 // b
    n = len(fields)
    padded = np.zeros(-(-n // per_byte) * per_byte, dtype=np.uint8)
    padded[:n] = fields
    groups = padded.reshape(-1, per_byte)
    out = np.zeros(len(groups), dtype=np.uint8)
    for i in range(per_byte):
        out |= groups[:, i] << (8 - b * (i + 1))
    return out.tobytes()


def unpack_codes(
    raw: bytes, bits: int, shape: tuple[int, ...], scale: float
) -> QuantizedTensor:
    """Exact inverse of pack_codes; rejects bad lengths and dirty padding."""
    if bits not in (2, 4, 8):
        raise ValueError(f"packing supports b in (2, 4, 8), got {bits}")
    b = bits
    n = int(np.prod(shape, dtype=np.int64)) if shape else 1
    n = 0 if 0 in shape else n
    expected_len = -(-n * b // 8)
    if len(raw) != expected_len:
        raise WireFormatError(
            f"expected {expected_len} bytes for {n} codes at b={b}, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype=np.uint8)
    per_byte = 8 // b
    mask = (1 << b) - 1
    fields = np.zeros(len(data) * per_byte, dtype=np.uint8)
    for i in range(per_byte):
        fields[i::per_byte] = (data >> (8 - b * (i + 1))) & mask
    if np.any(fields[n:]):
        raise WireFormatError("nonzero padding bits in packed stream")
    codes = fields[:n].astype(np.int32)
    codes[codes >= (1 << (b - 1))] -= 1 << b
    qmax = 2 ** (b - 1) - 1
    if codes.size and (codes.min() < -qmax or codes.max() > qmax):
        raise WireFormatError(f"decoded code outside +-{qmax}")
    return QuantizedTensor(
        codes=codes.reshape(shape), scale=scale, bits=bits, shape=tuple(shape)
    )
