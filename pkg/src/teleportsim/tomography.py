"""Single-qubit state and process tomography with Poissonian error bars.

State reconstruction follows the Stokes route: projection counts on the
three cardinal bases give S = (S0, S1, S2, S3), the density matrix is
``rho = (1/2) sum_i S_i sigma_i``, and any unphysical result is projected
to the closest physical state by clipping negative eigenvalues and
renormalizing the trace.

Process reconstruction determines the chi matrix of
``rho_out = sum_{l,k} chi_lk sigma_l rho_in sigma_k`` from the four probe
states {|e>, |l>, |+>, |+i>}.  Those probes span the operator space, so
the linear system is exactly determined and any linear map sending them
to trace-one outputs is automatically trace preserving; the solved chi is
then projected onto the positive, trace-preserving set.

Index convention: the Pauli basis is ordered (I, sigma_x, sigma_y,
sigma_z), so the ideal teleportation channel -- a sigma_y unitary -- has
its unit weight at the diagonal slot ``SIGMA_Y_INDEX = 2`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .timebin import TimeBinQubit

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

#: Diagonal chi slot of the ideal (sigma_y) teleportation channel.
SIGMA_Y_INDEX = 2

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
STATE_EIG_TOL = 1e-10
PROCESS_TP_TOL = 1e-8
PROCESS_EIG_TOL = 1e-8

#: Bloch-vector length beyond which counts are considered corrupted
#: rather than merely noisy.
_GROSS_BLOCH_LIMIT = 1.5

_PROJECTION_NAMES = ("e", "l", "plus", "minus", "plus_i", "minus_i")


@dataclass(frozen=True)
class ProjectionCounts:
    """Counts for the six cardinal projections of one reconstructed state."""

    e: float
    l: float
    plus: float
    minus: float
    plus_i: float
    minus_i: float
    integration_time_s: float | None = None

    def __post_init__(self):
        for name in _PROJECTION_NAMES:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"count {name} must be finite and >= 0, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in _PROJECTION_NAMES], dtype=float)

    @staticmethod
    def from_array(values, integration_time_s: float | None = None) -> "ProjectionCounts":
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise ValueError("expected 6 counts (e, l, plus, minus, plus_i, minus_i)")
        return ProjectionCounts(*values, integration_time_s=integration_time_s)


def stokes_from_counts(counts: ProjectionCounts, *, empty_pair_to_zero: bool = False) -> np.ndarray:
    """Stokes vector (S0, S1, S2, S3) from the six projection counts.

    Each basis pair is normalized separately, so S0 = 1 by construction.
    An empty basis pair is an error unless ``empty_pair_to_zero`` maps it
    to a vanishing component (used by the Monte Carlo resampler).
    """
    pairs = {
        "Z": (counts.e, counts.l),
        "X": (counts.plus, counts.minus),
        "Y": (counts.plus_i, counts.minus_i),
    }
    comps = {}
    for axis, (a, b) in pairs.items():
        total = a + b
        if total <= 0:
            if not empty_pair_to_zero:
                raise ValueError(f"basis pair {axis} has no counts")
            comps[axis] = 0.0
        else:
            comps[axis] = (a - b) / total
    return np.array([1.0, comps["X"], comps["Y"], comps["Z"]])


def rho_from_stokes(stokes) -> np.ndarray:
    """Density matrix (1/2) sum_i S_i sigma_i, projected to physicality."""
    stokes = np.asarray(stokes, dtype=float)
    if stokes.shape != (4,):
        raise ValueError("Stokes vector must have four components")
    if abs(stokes[0] - 1.0) > 1e-9:
        raise ValueError(f"S0 must equal 1, got {stokes[0]!r}")
    bloch = float(np.linalg.norm(stokes[1:]))
    if bloch > _GROSS_BLOCH_LIMIT:
        raise ValueError(f"Bloch vector length {bloch} exceeds {_GROSS_BLOCH_LIMIT}; data corrupted")
    rho = 0.5 * sum(s * p for s, p in zip(stokes, PAULI))
    return project_to_physical_state(rho)


def project_to_physical_state(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    rho = 0.5 * (rho + rho.conj().T)
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] >= 0.0:
        return rho / np.trace(rho).real
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    return rho / np.trace(rho).real


def validate_density_matrix(rho: np.ndarray) -> None:
    """Raise unless rho is Hermitian, unit-trace and positive within tolerance."""
    if rho.shape != (2, 2):
        raise ValueError("expected a 2x2 density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho)[0] < -STATE_EIG_TOL:
        raise ValueError("density matrix has a negative eigenvalue")


def pure_state_density(psi: TimeBinQubit) -> np.ndarray:
    v = psi.as_array()
    return np.outer(v, v.conj())


def state_fidelity(rho: np.ndarray, psi: TimeBinQubit) -> float:
    """F = <psi| rho |psi>, clamped to [0, 1] against rounding noise."""
    v = psi.as_array()
    f = float(np.real(v.conj() @ rho @ v))
    return min(1.0, max(0.0, f))


def average_fidelity(f_e: float, f_l: float, f_plus: float, f_plus_i: float) -> float:
    """Mean fidelity over the Bloch sphere from four cardinal-state fidelities.

    F_bar = (F_e + F_l + 2 F_+ + 2 F_+i) / 6.
    """
    for f in (f_e, f_l, f_plus, f_plus_i):
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fidelity {f!r} outside [0, 1]")
    return (f_e + f_l + 2.0 * f_plus + 2.0 * f_plus_i) / 6.0


# ---------------------------------------------------------------------------
# process tomography


def _chi_system_matrix() -> np.ndarray:
    # A[(m, j), (l, k)] = Tr(sigma_m sigma_l sigma_j sigma_k)
    a = np.empty((16, 16), dtype=complex)
    for m in range(4):
        for j in range(4):
            for l in range(4):
                for k in range(4):
                    a[4 * m + j, 4 * l + k] = np.trace(PAULI[m] @ PAULI[l] @ PAULI[j] @ PAULI[k])
    return a


_CHI_SYSTEM = _chi_system_matrix()

# TP constraint sum_lk chi_lk sigma_k sigma_l = I as a linear map on vec(chi)
_TP_MATRIX = np.array(
    [[(PAULI[k] @ PAULI[l])[a, b] for l in range(4) for k in range(4)]
     for a in range(2) for b in range(2)],
    dtype=complex,
)
_TP_PINV = np.linalg.pinv(_TP_MATRIX)
_TP_TARGET = np.eye(2, dtype=complex).reshape(-1)


def qpt_reconstruct(
    rho_out_e: np.ndarray,
    rho_out_l: np.ndarray,
    rho_out_plus: np.ndarray,
    rho_out_plus_i: np.ndarray,
) -> np.ndarray:
    """Chi matrix of the channel mapping the four probes to the given outputs.

    Inputs are the reconstructed output density matrices for the probe
    states |e>, |l>, |+> and |+i>.  The exactly-determined linear system
    is solved directly; the result is then projected onto the Hermitian,
    positive, trace-preserving set.
    """
    for rho in (rho_out_e, rho_out_l, rho_out_plus, rho_out_plus_i):
        validate_density_matrix(np.asarray(rho, dtype=complex))

    # images of the Pauli basis under the (linearly extended) channel
    e_i = rho_out_e + rho_out_l
    e_x = 2.0 * rho_out_plus - e_i
    e_y = 2.0 * rho_out_plus_i - e_i
    e_z = rho_out_e - rho_out_l
    images = (e_i, e_x, e_y, e_z)

    b = np.empty(16, dtype=complex)
    for m in range(4):
        for j in range(4):
            b[4 * m + j] = np.trace(PAULI[m] @ images[j])
    try:
        chi_vec = np.linalg.solve(_CHI_SYSTEM, b)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - fixed system
        raise np.linalg.LinAlgError(f"singular process-reconstruction system: {exc}")
    chi = chi_vec.reshape(4, 4)
    return project_to_physical_process(chi)


def project_to_physical_process(chi: np.ndarray, max_iter: int = 400, tol: float = 1e-12) -> np.ndarray:
    """Alternate positivity and trace-preservation projections on chi.

    For data already physical this is a no-op; for noisy reconstructions
    it converges to a chi that satisfies both constraints within the
    module tolerances.
    """
    chi = np.asarray(chi, dtype=complex)
    for _ in range(max_iter):
        chi = 0.5 * (chi + chi.conj().T)
        vals, vecs = np.linalg.eigh(chi)
        clipped = np.clip(vals, 0.0, None)
        psd_defect = float(-vals[0]) if vals[0] < 0 else 0.0
        chi = (vecs * clipped) @ vecs.conj().T
        residual = _TP_MATRIX @ chi.reshape(-1) - _TP_TARGET
        tp_defect = float(np.max(np.abs(residual)))
        chi = (chi.reshape(-1) - _TP_PINV @ residual).reshape(4, 4)
        if psd_defect < tol and tp_defect < tol:
            break
    return 0.5 * (chi + chi.conj().T)


def validate_process_matrix(chi: np.ndarray) -> None:
    if chi.shape != (4, 4):
        raise ValueError("expected a 4x4 chi matrix")
    if np.max(np.abs(chi - chi.conj().T)) > HERMITICITY_TOL:
        raise ValueError("chi matrix is not Hermitian")
    residual = _TP_MATRIX @ chi.reshape(-1) - _TP_TARGET
    if np.max(np.abs(residual)) > PROCESS_TP_TOL:
        raise ValueError("chi matrix is not trace preserving")
    if np.linalg.eigvalsh(chi)[0] < -PROCESS_EIG_TOL:
        raise ValueError("chi matrix has a negative eigenvalue")


def apply_process(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """rho_out = sum_lk chi_lk sigma_l rho sigma_k."""
    out = np.zeros((2, 2), dtype=complex)
    for l in range(4):
        for k in range(4):
            out += chi[l, k] * PAULI[l] @ rho @ PAULI[k]
    return out


def chi_of_unitary(u: np.ndarray) -> np.ndarray:
    """Rank-one chi matrix of the unitary channel rho -> u rho u^dag."""
    v = np.array([np.trace(p @ u) / 2.0 for p in PAULI])
    return np.outer(v, v.conj())


def chi_identity() -> np.ndarray:
    return chi_of_unitary(PAULI[0])


def chi_sigma_y() -> np.ndarray:
    return chi_of_unitary(PAULI[2])


def process_fidelity(chi: np.ndarray, chi_ideal: np.ndarray) -> float:
    """f = Tr(chi_ideal chi); real in [0, 1] for physical arguments."""
    f = float(np.real(np.trace(np.asarray(chi_ideal) @ np.asarray(chi))))
    return min(1.0, max(0.0, f))


# ---------------------------------------------------------------------------
# Monte Carlo uncertainty propagation


@dataclass(frozen=True)
class MonteCarloErrors:
    """Sample standard deviations from Poissonian count resampling."""

    fidelity_std: float
    stokes_std: np.ndarray  # std of (S1, S2, S3)
    n_samples: int


def monte_carlo_errors(
    counts: ProjectionCounts,
    target: TimeBinQubit,
    n_samples: int = 2000,
    seed: int = 0,
) -> MonteCarloErrors:
    """Propagate Poissonian count noise through the full reconstruction.

    Each sample redraws all six counts from Poissonians with the observed
    means and reruns Stokes reconstruction, physicality projection and
    the fidelity against ``target``.  Samples use counter-based
    sub-streams keyed by (seed, sample index), so the result does not
    depend on any execution split.
    """
    if n_samples < 100:
        raise ValueError("need at least 100 Monte Carlo samples")
    means = counts.as_array()
    fids = np.empty(n_samples)
    stokes = np.empty((n_samples, 3))
    for i in range(n_samples):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, i], dtype=np.uint64)))
        resampled = ProjectionCounts.from_array(rng.poisson(means).astype(float))
        s = stokes_from_counts(resampled, empty_pair_to_zero=True)
        rho = rho_from_stokes(s)
        fids[i] = state_fidelity(rho, target)
        stokes[i] = s[1:]
    return MonteCarloErrors(
        fidelity_std=float(np.std(fids, ddof=1)),
        stokes_std=np.std(stokes, axis=0, ddof=1),
        n_samples=n_samples,
    )
