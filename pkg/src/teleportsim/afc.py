"""Atomic-frequency-comb memory: storage time and recall efficiency.

The storage time of a two-level AFC equals the inverse comb period.  The
measured efficiency is a pure count-ratio product; the theoretical
efficiency uses the standard square-tooth forward-recall result

    eta = (d/F)^2 exp(-d/F) sinc^2(pi/F) exp(-d0)

with peak optical depth ``d``, finesse ``F`` and residual background
depth ``d0``.  The (d, d0) pair of a given comb is underdetermined by an
efficiency measurement alone, so no unique calibration is asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AfcConfig:
    """Comb parameters; frequencies in MHz, depths dimensionless."""

    comb_period_mhz: float
    finesse: float
    optical_depth: float = 0.0
    background_depth: float = 0.0
    bandwidth_mhz: float = 200.0

    def __post_init__(self):
        if not self.comb_period_mhz > 0.0:
            raise ValueError("comb period must be positive")
        if not self.finesse >= 1.0:
            raise ValueError("finesse must be >= 1")
        if self.optical_depth < 0.0 or self.background_depth < 0.0:
            raise ValueError("optical depths must be >= 0")
        if not self.bandwidth_mhz > 0.0:
            raise ValueError("bandwidth must be positive")


@dataclass(frozen=True)
class CountQuadruple:
    """Counts entering the measured-efficiency ratio."""

    cc_echo: float
    cc_transmission: float
    sc_transmission: float
    sc_input: float

    def __post_init__(self):
        for name in ("cc_echo", "cc_transmission", "sc_transmission", "sc_input"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def storage_time_ns(config: AfcConfig) -> float:
    """Echo delay 1 / comb period, in ns."""
    return 1e3 / config.comb_period_mhz


def measured_efficiency(counts: CountQuadruple) -> float:
    """eta = C.C.(echo)/C.C.(transmission) x S.C.(transmission)/S.C.(input)."""
    if counts.cc_transmission <= 0 or counts.sc_input <= 0:
        raise ValueError("cc_transmission and sc_input must be positive")
    return (counts.cc_echo / counts.cc_transmission) * (
        counts.sc_transmission / counts.sc_input
    )


def afc_efficiency_theory(config: AfcConfig) -> float:
    """Forward-recall efficiency of a square-tooth AFC.

    ``(d/F)^2 exp(-d/F) sinc^2(pi/F) exp(-d0)``; the sinc term is the
    dephasing loss of the finite-finesse comb.
    """
    d_eff = config.optical_depth / config.finesse
    dephasing = float(np.sinc(1.0 / config.finesse)) ** 2
    return d_eff**2 * math.exp(-d_eff) * dephasing * math.exp(-config.background_depth)


def efficiency_vs_detuning(
    config: AfcConfig, detuning_mhz: float, overlap_width_mhz: float
) -> float:
    """Gaussian spectral-overlap model of the efficiency-vs-detuning curve.

    Simulation convenience only; the width is a fit parameter, not a
    derived quantity.
    """
    if overlap_width_mhz <= 0.0:
        raise ValueError("overlap width must be positive")
    return afc_efficiency_theory(config) * math.exp(-((detuning_mhz / overlap_width_mhz) ** 2))
