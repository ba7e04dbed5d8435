"""Analytical FPGA resource projections and LoRaWAN link arithmetic.

Scaling model: LUT = params * b / 6, DSP = params * b / 18 (floored),
latency = b / 2 microseconds at 500 MHz. DSP is the binding resource
for the default ZCU102 budget.
"""

from __future__ import annotations

from dataclasses import dataclass

VALID_BITS = (2, 4, 8, 32)


@dataclass(frozen=True)
class DeviceBudget:
    name: str
    lut: int
    dsp: int
    bram36: int

    def __post_init__(self):
        if min(self.lut, self.dsp, self.bram36) <= 0:
            raise ValueError("device capacities must be positive")


ZCU102 = DeviceBudget(name="ZCU102", lut=274_080, dsp=2_520, bram36=912)


@dataclass(frozen=True)
class FpgaProjection:
    bits: int
    lut: int
    lut_pct: float
    dsp: int
    dsp_pct: float
    latency_us: float
    fits: bool


def project(
    param_count: int = 9_697, bits: int = 32, device: DeviceBudget = ZCU102
) -> FpgaProjection:
    """Project resource use of a bits-wide datapath onto a device budget."""
    if bits not in VALID_BITS:
        raise ValueError(f"bits must be one of {VALID_BITS}, got {bits}")
    if param_count <= 0:
        raise ValueError("param_count must be positive")
    lut = param_count * bits // 6
    dsp = param_count * bits // 18
    lut_pct = 100.0 * lut / device.lut
    dsp_pct = 100.0 * dsp / device.dsp
    return FpgaProjection(
        bits=bits,
        lut=lut,
        lut_pct=lut_pct,
        dsp=dsp,
        dsp_pct=dsp_pct,
        latency_us=bits / 2.0,
        fits=lut_pct <= 100.0 and dsp_pct <= 100.0,
    )


def spare_dsp(projection: FpgaProjection, device: DeviceBudget = ZCU102) -> int:
    """Remaining DSP budget after the projected datapath (negative if over)."""
    return device.dsp - projection.dsp


def lorawan_schedule(
    payload_bytes: float, link_bps: float = 5_000.0, duty_cycle: float = 0.01
) -> tuple[float, float]:
    """Airtime per round and duty-cycle-limited minimum round interval (s)."""
    if payload_bytes <= 0 or link_bps <= 0 or not 0 < duty_cycle <= 1:
        raise ValueError("payload, link rate, and duty cycle must be positive")
    airtime = payload_bytes * 8.0 / link_bps
    return airtime, airtime / duty_cycle
