"""Entanglement heralding and distribution rates for memory-based links.

Rates for an elementary link (two source+memory nodes heralded by a
central station) and for a two-link repeater, under the single-photon
and two-photon detection protocols, with non-temporal multiplexing M,
temporal multiplexing M_time and a memory duty cycle.  With on-demand
spin-wave storage one heralded link can wait for the other, which turns
the squared multiplexing bracket of the repeater into a single power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

#: Light speed in fiber, km/s.
DEFAULT_C_FIBER_KM_S = 2.0e5


class Detection(Enum):
    SINGLE_PHOTON = "single"
    TWO_PHOTON = "two"


@dataclass(frozen=True)
class Protocol:
    detection: Detection
    spin_wave: bool = False


@dataclass(frozen=True)
class LinkParams:
    """Parameters of one elementary link."""

    l0_km: float
    r_idler_hz: float
    delta_t_s: float
    m_modes: int
    m_time: int
    eta_duty: float
    eta_il_idler: float
    eta_il_signal: float
    eta_storage: float
    c_fiber_km_s: float = DEFAULT_C_FIBER_KM_S

    def __post_init__(self):
        if not self.l0_km > 0.0:
            raise ValueError("link length must be positive")
        if not self.c_fiber_km_s > 0.0:
            raise ValueError("fiber light speed must be positive")
        if self.r_idler_hz < 0.0 or self.delta_t_s < 0.0:
            raise ValueError("idler rate and detection window must be >= 0")
        if self.m_modes < 1 or self.m_time < 1:
            raise ValueError("mode numbers must be >= 1")
        for name in ("eta_duty", "eta_il_idler", "eta_il_signal", "eta_storage"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        # per-trial click probability; the rate formulas presume q <= 1
        if self.click_prob() > 1.0:
            raise ValueError(
                f"R_idler * delta_t * eta_IL_idler = {self.click_prob()} exceeds 1"
            )

    def click_prob(self) -> float:
        return self.r_idler_hz * self.delta_t_s * self.eta_il_idler


def _success_prob(p: LinkParams, proto: Protocol) -> float:
    q = p.click_prob()
    if proto.detection is Detection.SINGLE_PHOTON:
        return q
    return 0.5 * q * q


def _multiplex_bracket(p: LinkParams, proto: Protocol) -> float:
    return 1.0 - (1.0 - _success_prob(p, proto)) ** p.m_modes


def heralding_rate(p: LinkParams, proto: Protocol) -> float:
    """Herald rate of one elementary link, 1/s."""
    return (p.c_fiber_km_s / p.l0_km) * _multiplex_bracket(p, proto) * p.m_time * p.eta_duty


def link_distribution_rate(p: LinkParams, proto: Protocol) -> float:
    """Memory-to-memory entanglement distribution rate of one link, 1/s."""
    signal = p.eta_il_signal * p.eta_storage
    if proto.detection is Detection.TWO_PHOTON:
        signal = signal * signal
    return heralding_rate(p, proto) * signal


def repeater_rate(p: LinkParams, proto: Protocol) -> float:
    """Distribution rate of a basic two-link repeater, 1/s.

    The multiplexing bracket enters with power a = 1 when spin-wave
    storage lets a heralded link wait, and a = 2 without it.
    """
    a = 1 if proto.spin_wave else 2
    signal = p.eta_il_signal * p.eta_storage
    if proto.detection is Detection.TWO_PHOTON:
        signal = signal * signal
    return (
        (p.c_fiber_km_s / p.l0_km)
        * _multiplex_bracket(p, proto) ** a
        * signal
        * 0.5
        * p.m_time
        * p.eta_duty
    )
