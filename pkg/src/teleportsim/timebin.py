"""Exact algebra of time-bin qubits, Bell states and the teleportation map.

A time-bin qubit lives in the two temporal modes {early, late}.  The
entangled resource is |Phi+> = (|ee> + |ll>)/sqrt(2); heralding on the
Bell state |Psi-> of the (input, idler) pair maps the signal photon to
``-sigma_y`` applied to the input state.

Analyzer convention
-------------------
A time-bin analyzer (an unbalanced interferometer with phase ``theta``)
has two output ports.  Two phase conventions circulate for such an
interferometer; they differ by ``theta -> -theta`` and a port swap.  This
module pins the convention in which the teleported equator state
``alpha=beta=1/sqrt(2)`` with input phase ``phi`` produces port
probabilities  ``(1 +/- cos(phi - theta)) / 2``.  Concretely, the '+'
port projects onto ``(|e> - e^{-i theta}|l>)/sqrt(2)`` and the '-' port
onto ``(|e> + e^{-i theta}|l>)/sqrt(2)``.  Only the labelling depends on
the convention; port probabilities always sum to one.

All state comparisons are fidelities |<a|b>|^2 -- physical states are
rays, so amplitude-wise equality is never asserted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

NORM_TOL = 1e-12
INPUT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class TimeBinQubit:
    """Pure single-photon state ``amp_early |e> + amp_late |l>``.

    Amplitudes must be normalized to within ``NORM_TOL``.
    """

    amp_early: complex
    amp_late: complex

    def __post_init__(self):
        n = abs(self.amp_early) ** 2 + abs(self.amp_late) ** 2
        if not math.isfinite(n) or abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"time-bin qubit not normalized: |amp|^2 = {n!r}")

    @property
    def prob_early(self) -> float:
        return abs(self.amp_early) ** 2

    @property
    def prob_late(self) -> float:
        return abs(self.amp_late) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_early, self.amp_late], dtype=complex)

    @staticmethod
    def from_array(v) -> "TimeBinQubit":
        v = np.asarray(v, dtype=complex)
        n = math.sqrt(float(np.vdot(v, v).real))
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return TimeBinQubit(complex(v[0] / n), complex(v[1] / n))


def ket_e() -> TimeBinQubit:
    return TimeBinQubit(1.0, 0.0)


def ket_l() -> TimeBinQubit:
    return TimeBinQubit(0.0, 1.0)


def ket_plus() -> TimeBinQubit:
    s = 1.0 / math.sqrt(2.0)
    return TimeBinQubit(s, s)


def ket_minus() -> TimeBinQubit:
    s = 1.0 / math.sqrt(2.0)
    return TimeBinQubit(s, -s)


def ket_plus_i() -> TimeBinQubit:
    s = 1.0 / math.sqrt(2.0)
    return TimeBinQubit(s, 1j * s)


def ket_minus_i() -> TimeBinQubit:
    s = 1.0 / math.sqrt(2.0)
    return TimeBinQubit(s, -1j * s)


#: The four cardinal input states used throughout the analysis chain.
CARDINAL_STATES = {
    "e": ket_e,
    "l": ket_l,
    "plus": ket_plus,
    "minus": ket_minus,
    "plus_i": ket_plus_i,
    "minus_i": ket_minus_i,
}


def fidelity(a: TimeBinQubit, b: TimeBinQubit) -> float:
    """Ray fidelity |<a|b>|^2 between two pure states."""
    ov = np.vdot(a.as_array(), b.as_array())
    return float(abs(ov) ** 2)


def make_input_state(alpha: float, beta: float, phi: float) -> TimeBinQubit:
    """Build ``alpha |e> + beta e^{i phi} |l>`` with real alpha, beta.

    Requires ``alpha**2 + beta**2 = 1`` to within ``INPUT_NORM_TOL``; the
    amplitudes are renormalized exactly before constructing the state.
    """
    n = alpha * alpha + beta * beta
    if not math.isfinite(n) or abs(n - 1.0) > INPUT_NORM_TOL:
        raise ValueError(f"alpha^2 + beta^2 = {n!r}, expected 1 within {INPUT_NORM_TOL}")
    s = math.sqrt(n)
    return TimeBinQubit(alpha / s, beta * cmath.exp(1j * phi) / s)


@dataclass
class TwoQubitState:
    """Two time-bin qubits; amplitudes over the basis (ee, el, le, ll)."""

    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (4,):
            raise ValueError("two-qubit state needs 4 amplitudes over (ee, el, le, ll)")
        n = float(np.vdot(self.amps, self.amps).real)
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"two-qubit state not normalized: |amp|^2 = {n!r}")

    @staticmethod
    def phi_plus() -> "TwoQubitState":
        s = 1.0 / math.sqrt(2.0)
        return TwoQubitState(np.array([s, 0.0, 0.0, s], dtype=complex))

    @staticmethod
    def from_product(a: TimeBinQubit, b: TimeBinQubit) -> "TwoQubitState":
        return TwoQubitState(np.kron(a.as_array(), b.as_array()))


class BellKind(Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"


_SQ2 = 1.0 / math.sqrt(2.0)
#: Bell vectors of the (input, idler) pair over the basis (ee, el, le, ll).
BELL_VECTORS = {
    BellKind.PHI_PLUS: np.array([_SQ2, 0.0, 0.0, _SQ2], dtype=complex),
    BellKind.PHI_MINUS: np.array([_SQ2, 0.0, 0.0, -_SQ2], dtype=complex),
    BellKind.PSI_PLUS: np.array([0.0, _SQ2, _SQ2, 0.0], dtype=complex),
    BellKind.PSI_MINUS: np.array([0.0, _SQ2, -_SQ2, 0.0], dtype=complex),
}


@dataclass(frozen=True)
class BellOutcome:
    """One branch of the Bell decomposition of input (x) resource pair."""

    kind: BellKind
    probability: float
    conditional: TimeBinQubit


@dataclass(frozen=True)
class AnalyzerSetting:
    """Phase of the analyzing interferometer, reduced mod 2*pi on use."""

    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("analyzer phase must be finite")


def decompose_joint(state: TimeBinQubit) -> list[BellOutcome]:
    """Decompose ``state (x) |Phi+>`` over the Bell basis of (input, idler).

    Returns the four outcomes, each with probability exactly 1/4 and the
    normalized conditional state carried by the signal photon.
    """
    # joint amplitude tensor amp[a, i, s] = psi[a] * Phi+[i, s]
    psi = state.as_array()
    phi = TwoQubitState.phi_plus().amps.reshape(2, 2)
    amp = np.einsum("a,is->ais", psi, phi)

    outcomes = []
    for kind in BellKind:
        bell = BELL_VECTORS[kind].reshape(2, 2)
        cond = np.einsum("ai,ais->s", bell.conj(), amp)
        p = float(np.vdot(cond, cond).real)
        outcomes.append(BellOutcome(kind, p, TimeBinQubit.from_array(cond)))
    return outcomes


# -sigma_y in the (e, l) basis; the heralded signal state is -sigma_y |psi_in>.
_MINUS_SIGMA_Y = np.array([[0.0, 1j], [-1j, 0.0]], dtype=complex)


def teleport_map(state: TimeBinQubit) -> TimeBinQubit:
    """State of the signal photon heralded by a |Psi-> Bell measurement."""
    out = _MINUS_SIGMA_Y @ state.as_array()
    return TimeBinQubit(complex(out[0]), complex(out[1]))


def analyzer_projection_prob(state: TimeBinQubit, setting: AnalyzerSetting, port: int) -> float:
    """Detection probability at one analyzer output port.

    ``port`` is +1 or -1.  Under the module's convention (see module
    docstring) the teleported equator state with input phase ``phi``
    yields ``(1 +/- cos(phi - theta))/2`` on the two ports; the ports sum
    to one for every state and theta.
    """
    if port not in (+1, -1):
        raise ValueError("port must be +1 or -1")
    phase = cmath.exp(1j * (setting.theta % (2.0 * math.pi)))
    amp = state.amp_early - port * phase * state.amp_late
    return 0.5 * float(abs(amp) ** 2)
