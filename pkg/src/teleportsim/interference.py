"""Time-resolved two-photon interference and the teleportation error model.

Hong-Ou-Mandel interference between the coherent input and the thermal
idler is modelled with Gaussian spatial-temporal modes of unit width; all
times (``tau``, ``delta_tau``) and the angular detuning ``delta`` are
expressed in these dimensionless units.  ``beat_config_from_physical``
converts from ns/GHz given the pulse intensity FWHM.  The common optical
carrier frequency cancels in every observable and is not a parameter.

Normalization note: the coincidence density of a same-side photon pair
is written in the literature with unit time-integral; physically two
photons entering the splitter through one port end up in different output
ports with probability 1/2.  ``coincidence_density`` keeps the
literature's unit-normalized form (its overall scale is a fit amplitude),
while ``hom_visibility`` uses the physical 1/2 weight.  The physical
weight reproduces the canonical balanced-intensity visibility ceilings
1/2 (coherent x coherent), 2/5 (coherent x thermal) and 1/3
(thermal x thermal).

The quantum-bit-error-rate model expresses the expected teleportation
fidelity of equator and pole input states through the three-fold event
probabilities P(l, m, n) and the measured indistinguishability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

from scipy.integrate import quad

from .photon_stats import PairSourceModel, joint_input_pmf, threefold_event_prob

_SQRT_PI = math.sqrt(math.pi)

#: Dimensionless intensity FWHM of the unit-width Gaussian mode.
_GAUSSIAN_INTENSITY_FWHM = 2.0 * math.sqrt(0.5 * math.log(2.0))

#: Default integration window, in Gaussian widths; captures > 99.99% of
#: every density that appears here.
DEFAULT_WINDOW = 4.0

#: Event cells entering the equator fidelity, (l, m, n).
EQUATOR_CELLS = ((1, 1, 1), (1, 1, 2), (2, 0, 1), (2, 0, 2), (0, 2, 1), (0, 2, 2))
#: Cells entering the pole fidelity; two input photons in one time bin
#: cannot produce the early/late herald pattern, so (2, 0, n) drops out.
POLE_CELLS = ((1, 1, 1), (1, 1, 2), (0, 2, 1), (0, 2, 2))


@dataclass(frozen=True)
class BeatConfig:
    """Mean photon numbers plus detuning/arrival offset of the two photons."""

    mu_c: float
    mu_t: float
    delta: float = 0.0
    delta_tau: float = 0.0

    def __post_init__(self):
        if self.mu_c < 0.0 or self.mu_t < 0.0:
            raise ValueError("mean photon numbers must be >= 0")
        if not (math.isfinite(self.delta) and math.isfinite(self.delta_tau)):
            raise ValueError("delta and delta_tau must be finite")


def pulse_time_unit_ns(pulse_fwhm_ns: float = 4.0) -> float:
    """Physical duration of one dimensionless time unit for a given FWHM."""
    if pulse_fwhm_ns <= 0.0:
        raise ValueError("pulse FWHM must be positive")
    return pulse_fwhm_ns / _GAUSSIAN_INTENSITY_FWHM


def beat_config_from_physical(
    mu_c: float,
    mu_t: float,
    delta_ghz: float = 0.0,
    delta_tau_ns: float = 0.0,
    pulse_fwhm_ns: float = 4.0,
) -> BeatConfig:
    """Convert a detuning in GHz and an arrival offset in ns to model units."""
    t0 = pulse_time_unit_ns(pulse_fwhm_ns)
    return BeatConfig(
        mu_c=mu_c,
        mu_t=mu_t,
        delta=2.0 * math.pi * delta_ghz * t0,
        delta_tau=delta_tau_ns / t0,
    )


def single_pair_coincidence_density(tau: float, config: BeatConfig) -> float:
    """Coincidence density for one photon in each input port.

    ``[cosh(2 tau dtau) - cos(tau Delta)] / (2 sqrt(pi)) * exp(-(tau^2 + dtau^2))``;
    identically zero for indistinguishable photons (delta = delta_tau = 0).
    """
    dt = config.delta_tau
    envelope = math.exp(-(tau * tau + dt * dt))
    return (math.cosh(2.0 * tau * dt) - math.cos(tau * config.delta)) / (2.0 * _SQRT_PI) * envelope


def coincidence_density(tau: float, config: BeatConfig) -> float:
    """Two-fold coincidence density including the two-photon backgrounds.

    Combines the interference term weighted by P(1, 1) with the
    Gaussian same-side backgrounds weighted by P(2, 0) and P(0, 2); the
    backgrounds keep the unit-normalized literature form (see module
    docstring).  Used for fitting beat fringes.
    """
    w11 = joint_input_pmf(config.mu_c, config.mu_t, 1, 1)
    w20 = joint_input_pmf(config.mu_c, config.mu_t, 2, 0)
    w02 = joint_input_pmf(config.mu_c, config.mu_t, 0, 2)
    same_side = math.exp(-tau * tau) / _SQRT_PI
    return single_pair_coincidence_density(tau, config) * w11 + same_side * (w20 + w02)


def _physical_density(tau: float, config: BeatConfig) -> float:
    # Same structure as coincidence_density with the physical 1/2 weight
    # on the same-side backgrounds.
    w11 = joint_input_pmf(config.mu_c, config.mu_t, 1, 1)
    w20 = joint_input_pmf(config.mu_c, config.mu_t, 2, 0)
    w02 = joint_input_pmf(config.mu_c, config.mu_t, 0, 2)
    same_side = math.exp(-tau * tau) / (2.0 * _SQRT_PI)
    return single_pair_coincidence_density(tau, config) * w11 + same_side * (w20 + w02)


def integrated_coincidence(config: BeatConfig, window: float = DEFAULT_WINDOW) -> float:
    """Physically-normalized coincidence probability integrated over |tau| <= window."""
    if window <= 0.0:
        raise ValueError("window must be positive")
    val, _ = quad(_physical_density, -window, window, args=(config,), epsabs=1e-14, epsrel=1e-12)
    return val


def integrated_coincidence_distinguishable(config: BeatConfig, window: float = DEFAULT_WINDOW) -> float:
    """Distinguishable-limit reference (detuning -> infinity) of the same integral."""
    if window <= 0.0:
        raise ValueError("window must be positive")
    w11 = joint_input_pmf(config.mu_c, config.mu_t, 1, 1)
    w20 = joint_input_pmf(config.mu_c, config.mu_t, 2, 0)
    w02 = joint_input_pmf(config.mu_c, config.mu_t, 0, 2)
    # the beat term averages to 1/2 of the Gaussian envelope; each photon
    # pair then coincides with probability 1/2 inside the window
    return 0.5 * math.erf(window) * (w11 + w20 + w02)


def hom_visibility(mu_c: float, mu_t: float, window: float = DEFAULT_WINDOW) -> float:
    """HOM visibility 1 - C(indistinguishable) / C(distinguishable).

    Both coincidence integrals use perfectly overlapped modes
    (delta = delta_tau = 0) against the distinguishable-limit reference,
    integrated over the same window.
    """
    if mu_c < 0.0 or mu_t < 0.0:
        raise ValueError("mean photon numbers must be >= 0")
    if mu_c == 0.0 and mu_t == 0.0:
        raise ValueError("at least one mean photon number must be positive")
    config = BeatConfig(mu_c=mu_c, mu_t=mu_t, delta=0.0, delta_tau=0.0)
    c_dist = integrated_coincidence_distinguishable(config, window)
    if c_dist == 0.0:
        # single source only: no cross pairs, no dip
        return 0.0
    c_ind = integrated_coincidence(config, window)
    return 1.0 - c_ind / c_dist


def indistinguishability(v_exp: float, v_theory: float) -> float:
    """Measured-to-ideal visibility ratio, varsigma = V_exp / V_theory."""
    if not 0.0 < v_theory <= 1.0:
        raise ValueError(f"theory visibility must lie in (0, 1], got {v_theory!r}")
    if not 0.0 <= v_exp <= v_theory:
        raise ValueError(
            f"experimental visibility {v_exp!r} must lie in [0, v_theory={v_theory!r}]"
        )
    return v_exp / v_theory


@dataclass(frozen=True)
class QberInputs:
    """Indistinguishability plus the P(l, m, n) table feeding the QBER model."""

    varsigma: float
    event_probs: Mapping[tuple[int, int, int], float]

    def __post_init__(self):
        if not 0.0 <= self.varsigma <= 1.0:
            raise ValueError(f"varsigma must lie in [0, 1], got {self.varsigma!r}")
        for cell, p in self.event_probs.items():
            if p < 0.0:
                raise ValueError(f"negative event probability at {cell}: {p!r}")

    def prob(self, cell: tuple[int, int, int]) -> float:
        return float(self.event_probs.get(cell, 0.0))


def qber_event_probs(
    mu_in: float, source: PairSourceModel, eta_det: float = 1.0
) -> dict[tuple[int, int, int], float]:
    """Build the P(l, m, n) cells used by the equator/pole fidelity model."""
    return {
        cell: threefold_event_prob(*cell, mu_in=mu_in, source=source, eta_det=eta_det)
        for cell in EQUATOR_CELLS
    }


def fidelity_equator(inputs: QberInputs) -> float:
    """Expected teleportation fidelity of equator input states.

    F = 1/2 + (varsigma/2) * [P(1,1,1) + P(1,1,2)] / [sum of all six cells].
    """
    good = inputs.prob((1, 1, 1)) + inputs.prob((1, 1, 2))
    total = sum(inputs.prob(c) for c in EQUATOR_CELLS)
    if total == 0.0:
        raise ValueError("all equator event probabilities vanish; fidelity undefined")
    return 0.5 + 0.5 * inputs.varsigma * good / total


def qber_equator(inputs: QberInputs) -> float:
    return 1.0 - fidelity_equator(inputs)


def fidelity_poles(inputs: QberInputs) -> float:
    """Expected teleportation fidelity of pole input states.

    Independent of the indistinguishability: heralds from a correct pair
    are always right in the early/late basis, heralds from two idler
    photons are right half the time.
    """
    good = inputs.prob((1, 1, 1)) + inputs.prob((1, 1, 2))
    bad_half = inputs.prob((0, 2, 1)) + inputs.prob((0, 2, 2))
    total = good + bad_half
    if total == 0.0:
        raise ValueError("all pole event probabilities vanish; fidelity undefined")
    return (good + 0.5 * bad_half) / total


def qber_poles(inputs: QberInputs) -> float:
    return 1.0 - fidelity_poles(inputs)


def with_detuning(config: BeatConfig, delta: float) -> BeatConfig:
    """Copy of ``config`` with a different detuning (used by scans)."""
    return replace(config, delta=delta)
