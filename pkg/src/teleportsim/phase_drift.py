"""Sensitivity of time-bin phases to laser-frequency drift.

Two phases matter: the phase the modulator imprints between the early
and late bins of the input photon, and the phase the analyzing
interferometer applies to the signal photon.  Both are linear in an
optical frequency, so a frequency drift maps linearly onto a phase
drift; the input phase turns out to need over two orders of magnitude
better frequency stability than the analyzer phase.

Unit convention: the large interferometer phase is carried in cycles
(units of 2*pi), matching the arithmetic that yields the headline
sensitivity coefficients; ``bin_phase`` itself returns radians.  The
refractive index and length of the modulator only appear as a product,
which is calibrated from the printed input-phase sensitivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

C_VACUUM_M_S = 299792458.0

#: Calibrated modulator n*L product, metres.
DEFAULT_MODULATOR_NL_M = 0.2205
#: Optical path-length difference n*L of the analyzing interferometer:
#: a 32 ns bin separation at 2e8 m/s in fiber.
DEFAULT_AMZI_NL_M = 32e-9 * 2.0e8
#: Wavelength used for the interferometer reference-phase arithmetic.
DEFAULT_PHASE_REF_WAVELENGTH_M = 1536.17e-9


@dataclass(frozen=True)
class OpticalPathParams:
    """Optical path products, frequencies and the source mode offset."""

    modulator_nl_m: float = DEFAULT_MODULATOR_NL_M
    amzi_nl_m: float = DEFAULT_AMZI_NL_M
    f_input_hz: float = C_VACUUM_M_S / 1540.9e-9
    f_pump_hz: float = 195e12
    phase_ref_wavelength_m: float = DEFAULT_PHASE_REF_WAVELENGTH_M
    fsr_hz: float = 100e9
    n_sp: int = 3

    def __post_init__(self):
        for name in ("modulator_nl_m", "amzi_nl_m", "f_input_hz", "f_pump_hz",
                     "phase_ref_wavelength_m", "fsr_hz"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


def bin_phase(nl_m: float, frequency_hz: float) -> float:
    """Phase 2*pi*n*L*f/c in radians across an optical path product n*L."""
    return 2.0 * math.pi * nl_m * frequency_hz / C_VACUUM_M_S


def bin_phase_cycles(nl_m: float, frequency_hz: float) -> float:
    """Same phase in cycles (units of 2*pi), i.e. n*L/lambda."""
    return nl_m * frequency_hz / C_VACUUM_M_S


def input_bin_phase(params: OpticalPathParams) -> float:
    """Modulator phase between the two bins of the input photon, radians."""
    return bin_phase(params.modulator_nl_m, params.f_input_hz)


def pump_reference_phase_cycles(params: OpticalPathParams) -> float:
    """Interferometer phase at the reference wavelength, in cycles (~4.17e6)."""
    return params.amzi_nl_m / params.phase_ref_wavelength_m


def signal_frequency(f_pump_hz: float, n_sp: int, fsr_hz: float) -> float:
    """Signal frequency f_pump + N_sp * FSR of the ring source."""
    if fsr_hz <= 0.0:
        raise ValueError("free spectral range must be positive")
    return f_pump_hz + n_sp * fsr_hz


def analyzer_phase_sensitivity(params: OpticalPathParams) -> float:
    """d(analyzer phase)/d(f_pump): -phi_pump * N_sp * FSR / f_pump^2.

    The interferometer phase is locked through the pump laser, so only
    the mode-offset term drifts with the pump frequency.  ``phi_pump``
    enters in cycles, per the module's unit convention.
    """
    phi_pump = pump_reference_phase_cycles(params)
    return -phi_pump * params.n_sp * params.fsr_hz / params.f_pump_hz**2


def input_phase_sensitivity(params: OpticalPathParams) -> float:
    """d(input phase)/d(f_input) = 2*pi*n*L/c, radians per Hz."""
    return 2.0 * math.pi * params.modulator_nl_m / C_VACUUM_M_S
