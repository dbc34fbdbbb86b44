"""Photon-number statistics for the coherent input and the thermal idler.

The input photons are drawn from an attenuated laser (Poissonian), the
unheralded idler of the pair source is single-mode thermal.  This module
also provides binomial loss thinning and the joint three-fold event
probabilities P(l, m, n): exactly ``l`` input photons and ``m`` idler
photons at the Bell-measurement beam splitter while ``n`` signal photons
reach the detector.

Correlated-pair model: the source emits k pairs with thermal weight;
the idler and signal counts are independent binomial thinnings of k
with their respective arm transmissions, and the coherent input is an
independent Poissonian.  ``mu_in`` is the mean input photon number at
the beam splitter; ``mu_pair`` is the mean pair number at the source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Default truncation order; keeps the truncation defect below 1e-9 for
#: the mean photon numbers of interest (mu <~ 0.1).
DEFAULT_N_MAX = 10

_PAIR_TAIL_EXTRA = 64  # extra thermal orders summed in threefold_event_prob


def poisson_pmf(mu: float, n: int) -> float:
    """P(mu, n) = exp(-mu) mu^n / n! for a coherent state."""
    _check_mu_n(mu, n)
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


def thermal_pmf(mu: float, n: int) -> float:
    """P(mu, n) = mu^n / (1 + mu)^(n+1) for a single-mode thermal state."""
    _check_mu_n(mu, n)
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu / (1.0 + mu)) - math.log1p(mu))


def joint_input_pmf(mu_c: float, mu_t: float, m: int, n: int) -> float:
    """Probability of m coherent and n thermal photons at the beam splitter."""
    return poisson_pmf(mu_c, m) * thermal_pmf(mu_t, n)


def _check_mu_n(mu: float, n: int) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 0):
        raise ValueError(f"photon number must be a nonnegative integer, got {n!r}")
    if not (math.isfinite(mu) and mu >= 0.0):
        raise ValueError(f"mean photon number must be >= 0, got {mu!r}")


@dataclass
class PhotonNumberDist:
    """Truncated photon-number distribution over n = 0 .. n_max."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ValueError("probs must be a nonempty 1-d vector")
        if np.any(self.probs < -1e-15):
            raise ValueError("negative probability in photon-number distribution")
        self.probs = np.clip(self.probs, 0.0, None)
        total = float(self.probs.sum())
        if total > 1.0 + 1e-12:
            raise ValueError(f"photon-number probabilities sum to {total} > 1")

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def truncation_defect(self) -> float:
        return max(0.0, 1.0 - float(self.probs.sum()))


def poisson_dist(mu: float, n_max: int = DEFAULT_N_MAX) -> PhotonNumberDist:
    return PhotonNumberDist(np.array([poisson_pmf(mu, n) for n in range(n_max + 1)]))


def thermal_dist(mu: float, n_max: int = DEFAULT_N_MAX) -> PhotonNumberDist:
    return PhotonNumberDist(np.array([thermal_pmf(mu, n) for n in range(n_max + 1)]))


def loss_thinning(dist: PhotonNumberDist, eta: float) -> PhotonNumberDist:
    """Binomial loss channel: out(k) = sum_n p(n) C(n,k) eta^k (1-eta)^(n-k)."""
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"transmission must lie in [0, 1], got {eta!r}")
    n_max = dist.n_max
    out = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        p = dist.probs[n]
        if p == 0.0:
            continue
        for k in range(n + 1):
            out[k] += p * _binom_pmf(n, k, eta)
    return PhotonNumberDist(out)


def _binom_pmf(n: int, k: int, p: float) -> float:
    if k < 0 or k > n:
        return 0.0
    # 0**0 == 1 covers the p in {0, 1} edges
    return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)


@dataclass(frozen=True)
class PairSourceModel:
    """Pair source plus the loss budget of its two arms.

    ``eta_idler_path`` is source -> beam splitter, ``eta_signal_path``
    source -> detector (storage and transmission folded in by the caller
    as needed).
    """

    mu_pair: float
    eta_idler_path: float = 1.0
    eta_signal_path: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu_pair) and self.mu_pair >= 0.0):
            raise ValueError(f"mu_pair must be >= 0, got {self.mu_pair!r}")
        for name in ("eta_idler_path", "eta_signal_path"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


def threefold_event_prob(
    l: int,
    m: int,
    n: int,
    *,
    mu_in: float,
    source: PairSourceModel,
    eta_det: float = 1.0,
) -> float:
    """P(l, m, n) under the correlated-pair model.

    ``eta_det`` multiplies the signal-arm transmission (detector
    efficiency on the signal branch).  The idler and signal thinnings are
    conditionally independent given the emitted pair number.
    """
    for name, v in (("l", l), ("m", m), ("n", n)):
        if not (isinstance(v, (int, np.integer)) and v >= 0):
            raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
    if not (0.0 <= eta_det <= 1.0):
        raise ValueError(f"eta_det must lie in [0, 1], got {eta_det!r}")
    eta_i = source.eta_idler_path
    eta_s = source.eta_signal_path * eta_det

    p_pairs = 0.0
    k_lo = max(m, n)
    for k in range(k_lo, k_lo + _PAIR_TAIL_EXTRA + 1):
        w = thermal_pmf(source.mu_pair, k)
        if w == 0.0 and k > k_lo:
            break
        p_pairs += w * _binom_pmf(k, m, eta_i) * _binom_pmf(k, n, eta_s)
    return poisson_pmf(mu_in, l) * p_pairs
