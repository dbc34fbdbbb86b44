"""Classical teleportation-fidelity bounds and decoy-state certification.

For weak-coherent inputs a classical measure-and-prepare strategy can
exceed the single-photon bound of 2/3 by exploiting multi-photon pulses,
and a lossy channel lets it postselect the most informative pulses.  The
efficiency-corrected bound is computed with the optimal greedy strategy:
the adversary declares success preferentially on the highest
photon-number pulses until the allowed success fraction (relative to
nonvacuum pulses) is exhausted, averaging the N-photon estimation
fidelity (N+1)/(N+2) over the accepted set.

The decoy-state bounds convert gains and error rates measured at three
mean photon numbers into a lower bound on the single-photon-component
teleportation fidelity.  The error-rate bound divides by the
single-photon yield bound Y1 (the vacuum yield printed in some sources
in its place renders the bound vacuous for realistic data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .photon_stats import poisson_pmf

_SERIES_TAIL_TOL = 1e-12


def classical_bound_unit_eff(mu: float) -> float:
    """Best classical fidelity for Poissonian inputs at unit efficiency.

    F = sum_{N>=1} (N+1)/(N+2) * P(mu, N) / (1 - P(mu, 0)), strictly
    increasing in mu from 2/3 to 1.
    """
    if not (math.isfinite(mu) and mu > 0.0):
        raise ValueError(f"mu must be > 0, got {mu!r}")
    nonvacuum = -math.expm1(-mu)  # 1 - P(mu, 0), accurate for small mu
    total = 0.0
    n = 1
    while True:
        p = poisson_pmf(mu, n)
        total += (n + 1) / (n + 2) * p
        # the Poisson tail beyond n is < p * mu/(n+1) / (1 - mu/(n+1)) once n >= mu
        if n > mu and p < _SERIES_TAIL_TOL * max(total, 1e-300) * (1.0 - mu / (n + 1)):
            break
        n += 1
    return total / nonvacuum


@dataclass(frozen=True)
class ClassicalBoundParams:
    """Input mean photon number and heralding efficiency per BSM."""

    mu: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"mu must be > 0, got {self.mu!r}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")


def classical_bound_with_eff(params: ClassicalBoundParams) -> float:
    """Classical fidelity bound with postselection headroom eta.

    Greedy water-filling over photon number: accept pulses from the
    largest N downwards, with fractional acceptance at the marginal N,
    until the accepted fraction of nonvacuum pulses reaches eta.
    """
    mu, eta = params.mu, params.eta
    if eta == 1.0:
        # no postselection headroom; identical by definition
        return classical_bound_unit_eff(mu)

    nonvacuum = -math.expm1(-mu)
    quota = eta * nonvacuum

    # photon-number probabilities down from a cap that holds the whole tail
    n_cap = max(8, int(mu + 12.0 * math.sqrt(mu) + 30.0))
    probs = [poisson_pmf(mu, n) for n in range(n_cap + 1)]

    remaining = quota
    weighted = 0.0
    for n in range(n_cap, 0, -1):
        take = min(probs[n], remaining)
        weighted += (n + 1) / (n + 2) * take
        remaining -= take
        if remaining <= 0.0:
            break
    return weighted / quota


def heralding_efficiency(cc_bsm_signal: float, cc_bsm: float) -> float:
    """Probability of a retrieved signal detection per Bell-measurement herald."""
    if cc_bsm <= 0:
        raise ValueError("cc_bsm must be positive")
    if cc_bsm_signal < 0:
        raise ValueError("cc_bsm_signal must be >= 0")
    return cc_bsm_signal / cc_bsm


def efficiency_budget(eta_storage: float, eta_t: float, eta_h: float) -> float:
    """Channel efficiency as the product of storage, transmission and heralding."""
    for name, v in (("eta_storage", eta_storage), ("eta_t", eta_t), ("eta_h", eta_h)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return eta_storage * eta_t * eta_h


@dataclass(frozen=True)
class DecoyDataset:
    """Signal plus two decoy intensities with measured gains and fidelities."""

    mu_s: float
    nu_1: float
    nu_2: float
    q_s: float
    q_1: float
    q_2: float
    f_s: float
    f_1: float
    f_2: float

    def __post_init__(self):
        if not (self.mu_s > self.nu_1 > self.nu_2 >= 0.0):
            raise ValueError("need mu_s > nu_1 > nu_2 >= 0")
        if not self.nu_1 + self.nu_2 < self.mu_s:
            raise ValueError("decoy condition nu_1 + nu_2 < mu_s violated")
        for name in ("q_s", "q_1", "q_2"):
            q = getattr(self, name)
            if not (0.0 < q <= 1.0):
                raise ValueError(f"gain {name} must lie in (0, 1], got {q!r}")
        for name in ("f_s", "f_1", "f_2"):
            f = getattr(self, name)
            if not (0.0 <= f <= 1.0):
                raise ValueError(f"fidelity {name} must lie in [0, 1], got {f!r}")


def decoy_y0_lower(d: DecoyDataset) -> float:
    """Lower bound on the vacuum yield, clamped at zero."""
    numer = d.nu_1 * d.q_2 * math.exp(d.nu_2) - d.nu_2 * d.q_1 * math.exp(d.nu_1)
    return max(numer / (d.nu_1 - d.nu_2), 0.0)


def decoy_y1_lower(d: DecoyDataset) -> float:
    """Lower bound on the single-photon yield."""
    denom = d.mu_s * d.nu_1 - d.mu_s * d.nu_2 - d.nu_1**2 + d.nu_2**2
    if denom <= 0.0:
        raise ValueError("nonpositive decoy denominator; check intensities")
    y0 = decoy_y0_lower(d)
    bracket = (
        d.q_1 * math.exp(d.nu_1)
        - d.q_2 * math.exp(d.nu_2)
        - (d.nu_1**2 - d.nu_2**2) / d.mu_s**2 * (d.q_s * math.exp(d.mu_s) - y0)
    )
    return d.mu_s / denom * bracket


def decoy_f1_lower(d: DecoyDataset) -> float:
    """Lower bound on the single-photon teleportation fidelity.

    F1 >= 1 - [E1 Q1 e^{nu1} - E2 Q2 e^{nu2}] / [(nu1 - nu2) Y1_lower]
    with E = 1 - F.  The denominator uses the single-photon yield bound.
    """
    y1 = decoy_y1_lower(d)
    if y1 <= 0.0:
        raise ValueError("single-photon yield bound is nonpositive; data too noisy")
    e1, e2 = 1.0 - d.f_1, 1.0 - d.f_2
    e_upper = (e1 * d.q_1 * math.exp(d.nu_1) - e2 * d.q_2 * math.exp(d.nu_2)) / (
        (d.nu_1 - d.nu_2) * y1
    )
    return 1.0 - e_upper


def fidelity_from_visibility(v: float) -> float:
    """F = (1 + V) / 2 for an interference visibility V in [-1, 1]."""
    if not -1.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [-1, 1], got {v!r}")
    return 0.5 * (1.0 + v)
