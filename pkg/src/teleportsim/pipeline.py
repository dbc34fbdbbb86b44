"""Seeded end-to-end Monte Carlo of the teleportation experiment.

Each trial emits a weak-coherent input pulse pair and a thermally
distributed number of photon pairs, propagates photons through the arm
losses, interferes input and idler photons on the Bell-measurement beam
splitter, stores surviving signal photons and projects the retrieved
photons on the analyzer.  A herald is the |Psi-> click pattern: the two
beam-splitter detectors firing in opposite time bins.

Interference is sampled at the event level as an indistinguishability
mixture: with probability ``varsigma`` a (1 input, 1 idler) pair behaves
as indistinguishable -- same-bin pairs bunch into one output port, and a
heralding opposite-bin pair teleports the input state onto its signal
partner -- otherwise the photons route independently and the stored
photon carries only its classical time-bin record.  This reproduces the
P(l, m, n) error model by construction.  Interference among three or
more photons (order mu^3) is not modelled.

Determinism: trials are partitioned into fixed-size chunks, each driven
by a counter-based Philox stream keyed by (seed, stream, chunk).  The
same seed always yields the same event stream, independent of how the
chunks are executed.  The indistinguishability parameter only changes
threshold comparisons, never the number of random draws, so runs that
differ only in ``varsigma`` stay aligned draw-for-draw.

Detection bookkeeping: the event stream carries every click.  For
tomography counts, each heralded trial contributes at most one analyzer
outcome; among the retrieved photons of that trial the pick prefers the
partner of the heralding idler (uniform tie-break), mirroring a
non-number-resolving detector registering a single qubit outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .timebin import AnalyzerSetting, TimeBinQubit, analyzer_projection_prob, ket_plus, teleport_map
from .tomography import ProjectionCounts

#: Trials per random-stream chunk; fixed so that trial i always belongs
#: to chunk i // CHUNK_TRIALS regardless of the total trial count.
CHUNK_TRIALS = 1 << 18

DETECTOR_BSM_A = "BSM_A"
DETECTOR_BSM_B = "BSM_B"
DETECTOR_ANALYZER_PLUS = "ANALYZER_PLUS"
DETECTOR_ANALYZER_MINUS = "ANALYZER_MINUS"
DETECTORS = (DETECTOR_BSM_A, DETECTOR_BSM_B, DETECTOR_ANALYZER_PLUS, DETECTOR_ANALYZER_MINUS)

BIN_EARLY = "early"
BIN_LATE = "late"
TIME_BINS = (BIN_EARLY, BIN_LATE)

ANALYZER_MODE_AMZI = "amzi"
ANALYZER_MODE_DIRECT = "direct"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter set of one simulated run.

    Defaults follow the experimental operating point: input mean photon
    number 0.0825, pair emission 0.019, indistinguishability 0.8375,
    4 ns bins separated by 32 ns at 10 MHz, a 6 ns coincidence window and
    2187 ns storage at 1.1% efficiency.  ``mu_input`` is the mean photon
    number at the beam splitter; the idler reaches the splitter through
    ``eta_idler_path`` and the signal reaches the analyzer through
    ``eta_signal_path`` and, in the echo, ``eta_storage``.
    """

    mu_input: float = 0.0825
    mu_pair: float = 0.019
    varsigma: float = 0.8375
    input_state: TimeBinQubit = field(default_factory=ket_plus)
    analyzer_mode: str = ANALYZER_MODE_AMZI
    analyzer_theta: float = 0.0
    n_trials: int = 100_000
    seed: int = 0
    eta_idler_path: float = 1.0
    eta_signal_path: float = 1.0
    eta_storage: float = 0.011
    dark_count_rate_hz: float = 0.0
    bin_separation_ns: float = 32.0
    bin_width_ns: float = 4.0
    rep_rate_hz: float = 10e6
    coincidence_window_ns: float = 6.0
    storage_time_ns: float = 2187.0
    idler_arrival_offset_ns: float = 0.0

    def __post_init__(self):
        if self.mu_input < 0.0 or self.mu_pair < 0.0:
            raise ValueError("mean photon numbers must be >= 0")
        if not 0.0 <= self.varsigma <= 1.0:
            raise ValueError("varsigma must lie in [0, 1]")
        for name in ("eta_idler_path", "eta_signal_path", "eta_storage"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.analyzer_mode not in (ANALYZER_MODE_AMZI, ANALYZER_MODE_DIRECT):
            raise ValueError(f"unknown analyzer mode {self.analyzer_mode!r}")
        if self.n_trials < 0:
            raise ValueError("n_trials must be >= 0")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.dark_count_rate_hz < 0.0:
            raise ValueError("dark count rate must be >= 0")
        for name in ("bin_separation_ns", "bin_width_ns", "rep_rate_hz",
                     "coincidence_window_ns", "storage_time_ns"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not math.isfinite(self.analyzer_theta):
            raise ValueError("analyzer phase must be finite")
        if not math.isfinite(self.idler_arrival_offset_ns):
            raise ValueError("idler arrival offset must be finite")

    @property
    def period_ns(self) -> float:
        return 1e9 / self.rep_rate_hz


@dataclass(frozen=True)
class DetectionEvent:
    """One detector click."""

    trial_id: int
    detector_id: str
    time_bin: str
    timestamp_ns: int


@dataclass
class CoincidenceHistogram:
    """Histogram of click time differences between one detector pair."""

    bin_edges_ns: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.bin_edges_ns = np.asarray(self.bin_edges_ns, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.size != self.bin_edges_ns.size - 1:
            raise ValueError("counts must have one entry per bin")
        if np.any(self.counts < 0):
            raise ValueError("histogram counts must be >= 0")


@dataclass
class _ChunkResult:
    """Raw arrays produced by one simulated chunk."""

    start_trial: int
    n: int
    herald: np.ndarray          # (n,) bool
    clean: np.ndarray           # (n,) bool, heralded clean teleport events
    picked_valid: np.ndarray    # (n,) bool, heralded trial with analyzer outcome
    picked_plus: np.ndarray     # (n,) bool, amzi '+' port of the picked photon
    picked_late: np.ndarray     # (n,) bool, time bin of the picked photon
    bsm_trial: np.ndarray       # clicks: trial index within chunk
    bsm_det: np.ndarray         # 0 = BSM_A, 1 = BSM_B
    bsm_late: np.ndarray
    bsm_time_ns: np.ndarray
    ana_trial: np.ndarray       # analyzer clicks (all retrieved photons)
    ana_plus: np.ndarray        # amzi port flag (unused in direct mode)
    ana_late: np.ndarray


def _chunk_rng(seed: int, stream: int, chunk_idx: int) -> np.random.Generator:
    key = np.array([seed, (stream << 48) + chunk_idx], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _simulate_chunk(cfg: ExperimentConfig, stream: int, chunk_idx: int, n: int) -> _ChunkResult:
    rng = _chunk_rng(cfg.seed, stream, chunk_idx)
    start_trial = chunk_idx * CHUNK_TRIALS

    # --- source draws (fixed order; varsigma must not change consumption)
    l = rng.poisson(cfg.mu_input, n)
    k = rng.geometric(1.0 / (1.0 + cfg.mu_pair), n) - 1
    coin = rng.random(n) < cfg.varsigma

    tot_l = int(l.sum())
    in_trial = np.repeat(np.arange(n), l)
    in_late = rng.random(tot_l) < cfg.input_state.prob_late
    in_det = rng.random(tot_l) < 0.5  # False -> BSM_A, True -> BSM_B

    tot_k = int(k.sum())
    pair_trial = np.repeat(np.arange(n), k)
    pair_late = rng.random(tot_k) < 0.5
    idler_at_bs = rng.random(tot_k) < cfg.eta_idler_path
    signal_detected = (rng.random(tot_k) < cfg.eta_signal_path) & (
        rng.random(tot_k) < cfg.eta_storage
    )
    idler_det = rng.random(tot_k) < 0.5
    u_pick = rng.random(n)
    u_port = rng.random(tot_k)

    # --- photons at the beam splitter
    m = np.bincount(pair_trial[idler_at_bs], minlength=n) if tot_k else np.zeros(n, dtype=int)

    in_start = np.concatenate(([0], np.cumsum(l)))[:-1]
    arr_pos = np.flatnonzero(idler_at_bs)
    arr_trial = pair_trial[arr_pos]

    one_one = (l == 1) & (m == 1)
    oo_trials = np.flatnonzero(one_one)
    if oo_trials.size:
        oo_in_pos = in_start[oo_trials]
        oo_arr_pos = arr_pos[np.searchsorted(arr_trial, oo_trials)]
        same_bin = in_late[oo_in_pos] == pair_late[oo_arr_pos]
        # indistinguishable same-bin pairs bunch into one output port
        bunch = same_bin & coin[oo_trials]
        idler_det[oo_arr_pos[bunch]] = in_det[oo_in_pos[bunch]]
        opposite = np.zeros(n, dtype=bool)
        opposite[oo_trials] = ~same_bin
    else:
        opposite = np.zeros(n, dtype=bool)

    # --- click grid: (trial, detector, bin), separated by photon origin
    in_cnt = np.zeros(4 * n, dtype=np.int32)
    if tot_l:
        np.add.at(in_cnt, 4 * in_trial + 2 * in_det + in_late, 1)
    id_cnt = np.zeros(4 * n, dtype=np.int32)
    if arr_pos.size:
        np.add.at(
            id_cnt,
            4 * arr_trial + 2 * idler_det[arr_pos] + pair_late[arr_pos],
            1,
        )
    clicks = (in_cnt + id_cnt) > 0
    if cfg.dark_count_rate_hz > 0.0:
        p_dark = cfg.dark_count_rate_hz * cfg.bin_width_ns * 1e-9
        clicks |= (rng.random(4 * n) < p_dark)
    clicks = clicks.reshape(n, 2, 2)

    herald = (clicks[:, 0, 0] & clicks[:, 1, 1]) | (clicks[:, 0, 1] & clicks[:, 1, 0])
    clean = one_one & opposite & coin & herald

    # --- BSM click events with first-photon timestamps
    flat = np.flatnonzero(clicks.reshape(-1))
    b_trial = flat // 4
    b_det = (flat % 4) // 2
    b_late = flat % 2
    t_bin = (start_trial + b_trial) * cfg.period_ns + b_late * cfg.bin_separation_ns
    t_idler = t_bin + cfg.idler_arrival_offset_ns
    has_in = in_cnt[flat] > 0
    has_id = id_cnt[flat] > 0
    b_time = np.where(
        has_in & has_id,
        np.minimum(t_bin, t_idler),
        np.where(has_in, t_bin, np.where(has_id, t_idler, t_bin)),
    )

    # --- analyzer clicks for every retrieved photon
    p_plus_clean = _clean_port_plus_prob(cfg)
    det_pos = np.flatnonzero(signal_detected)
    ana_trial = pair_trial[det_pos]
    ana_late = pair_late[det_pos]
    # the heralding partner of a clean trial carries the teleported state
    partner_clean = clean[ana_trial] & idler_at_bs[det_pos]
    p_plus = np.where(partner_clean, p_plus_clean, 0.5)
    ana_plus = u_port[det_pos] < p_plus

    # --- per-trial tomography pick among this trial's analyzer clicks
    picked_valid = np.zeros(n, dtype=bool)
    picked_plus = np.zeros(n, dtype=bool)
    picked_late = np.zeros(n, dtype=bool)
    her_with_signal = herald[ana_trial]
    if np.any(her_with_signal):
        cand = det_pos[her_with_signal]
        cand_trial = pair_trial[cand]
        order = np.argsort(cand_trial, kind="stable")
        cand = cand[order]
        cand_trial = cand_trial[order]
        starts = np.searchsorted(cand_trial, np.arange(n))
        ends = np.searchsorted(cand_trial, np.arange(n) + 1)
        for t in np.unique(cand_trial):
            pool = cand[starts[t]:ends[t]]
            partner = pool[idler_at_bs[pool]]
            if partner.size:
                pool = partner
            j = pool[min(int(u_pick[t] * pool.size), pool.size - 1)]
            picked_valid[t] = True
            picked_plus[t] = ana_plus[np.searchsorted(det_pos, j)]
            picked_late[t] = pair_late[j]

    return _ChunkResult(
        start_trial=start_trial,
        n=n,
        herald=herald,
        clean=clean,
        picked_valid=picked_valid,
        picked_plus=picked_plus,
        picked_late=picked_late,
        bsm_trial=b_trial,
        bsm_det=b_det,
        bsm_late=b_late,
        bsm_time_ns=b_time,
        ana_trial=ana_trial,
        ana_plus=ana_plus,
        ana_late=ana_late,
    )


def _clean_port_plus_prob(cfg: ExperimentConfig) -> float:
    if cfg.analyzer_mode != ANALYZER_MODE_AMZI:
        return 0.5
    teleported = teleport_map(cfg.input_state)
    return analyzer_projection_prob(teleported, AnalyzerSetting(cfg.analyzer_theta), +1)


def _iter_chunks(cfg: ExperimentConfig, stream: int = 0) -> Iterator[_ChunkResult]:
    remaining = cfg.n_trials
    chunk_idx = 0
    while remaining > 0:
        n = min(CHUNK_TRIALS, remaining)
        yield _simulate_chunk(cfg, stream, chunk_idx, n)
        remaining -= n
        chunk_idx += 1


def simulate_trials(config: ExperimentConfig, stream: int = 0) -> Iterator[DetectionEvent]:
    """Yield every detector click of the run, ordered by trial.

    The stream is deterministic for a fixed (config, stream); reruns are
    byte-identical.
    """
    bsm_names = (DETECTOR_BSM_A, DETECTOR_BSM_B)
    for chunk in _iter_chunks(config, stream):
        events: list[DetectionEvent] = []
        for i in range(chunk.bsm_trial.size):
            events.append(
                DetectionEvent(
                    trial_id=chunk.start_trial + int(chunk.bsm_trial[i]),
                    detector_id=bsm_names[int(chunk.bsm_det[i])],
                    time_bin=TIME_BINS[int(chunk.bsm_late[i])],
                    timestamp_ns=int(round(float(chunk.bsm_time_ns[i]))),
                )
            )
        base = chunk.start_trial
        for i in range(chunk.ana_trial.size):
            t = base + int(chunk.ana_trial[i])
            late = int(chunk.ana_late[i])
            if config.analyzer_mode == ANALYZER_MODE_AMZI:
                det = DETECTOR_ANALYZER_PLUS if chunk.ana_plus[i] else DETECTOR_ANALYZER_MINUS
            else:
                det = DETECTOR_ANALYZER_PLUS
            stamp = (
                t * config.period_ns
                + late * config.bin_separation_ns
                + config.storage_time_ns
            )
            events.append(
                DetectionEvent(
                    trial_id=t,
                    detector_id=det,
                    time_bin=TIME_BINS[late],
                    timestamp_ns=int(round(stamp)),
                )
            )
        events.sort(key=_event_order)
        yield from events


def _event_order(ev: DetectionEvent) -> tuple:
    return (ev.trial_id, DETECTORS.index(ev.detector_id), TIME_BINS.index(ev.time_bin))


def bsm_filter(events: Sequence[DetectionEvent]) -> list[int]:
    """Trial ids heralded by the |Psi-> pattern.

    One of the two beam-splitter detectors fired in the early bin and the
    other fired in the late bin of the same trial; two clicks on one
    detector never herald.
    """
    fired: dict[int, set[tuple[str, str]]] = {}
    for ev in events:
        if ev.detector_id in (DETECTOR_BSM_A, DETECTOR_BSM_B):
            fired.setdefault(ev.trial_id, set()).add((ev.detector_id, ev.time_bin))
    heralded = []
    for trial, cells in fired.items():
        ae = (DETECTOR_BSM_A, BIN_EARLY) in cells
        al = (DETECTOR_BSM_A, BIN_LATE) in cells
        be = (DETECTOR_BSM_B, BIN_EARLY) in cells
        bl = (DETECTOR_BSM_B, BIN_LATE) in cells
        if (ae and bl) or (al and be):
            heralded.append(trial)
    return sorted(heralded)


def build_histogram(
    events: Sequence[DetectionEvent],
    pair: tuple[str, str],
    span_ns: float,
    bin_width_ns: float = 1.0,
) -> CoincidenceHistogram:
    """Histogram of t(first) - t(second) over same-trial click pairs."""
    if span_ns <= 0.0 or bin_width_ns <= 0.0:
        raise ValueError("span and bin width must be positive")
    first: dict[int, list[int]] = {}
    second: dict[int, list[int]] = {}
    for ev in events:
        if ev.detector_id == pair[0]:
            first.setdefault(ev.trial_id, []).append(ev.timestamp_ns)
        if ev.detector_id == pair[1]:
            second.setdefault(ev.trial_id, []).append(ev.timestamp_ns)
    diffs = [
        t1 - t2
        for trial, times1 in first.items()
        if trial in second
        for t1 in times1
        for t2 in second[trial]
        if abs(t1 - t2) <= span_ns
    ]
    n_bins = max(1, int(round(2.0 * span_ns / bin_width_ns)))
    counts, edges = np.histogram(diffs, bins=n_bins, range=(-span_ns, span_ns))
    return CoincidenceHistogram(bin_edges_ns=edges, counts=counts)


#: Stream indices used by the projection runs (z, x, y).
_BASIS_STREAMS = {"z": 1, "x": 2, "y": 3}


def run_teleportation_experiment(
    config: ExperimentConfig,
    projection_set: Sequence[str] = ("e", "l", "plus", "minus", "plus_i", "minus_i"),
) -> ProjectionCounts:
    """Heralded, storage-delayed analyzer counts for the six projections.

    Runs one sub-experiment per measurement basis (direct detection for
    early/late, the analyzer at theta = 0 for the +/- pair and at
    theta = pi/2 for the circular pair), each with ``config.n_trials``
    trials on its own deterministic sub-stream.  The returned counts feed
    ``tomography.stokes_from_counts`` directly.
    """
    wanted = set(projection_set)
    unknown = wanted - {"e", "l", "plus", "minus", "plus_i", "minus_i"}
    if unknown:
        raise ValueError(f"unknown projections: {sorted(unknown)}")

    counts = dict.fromkeys(("e", "l", "plus", "minus", "plus_i", "minus_i"), 0.0)

    if wanted & {"e", "l"}:
        sub = replace(config, analyzer_mode=ANALYZER_MODE_DIRECT)
        early, late = _accumulate_direct(sub, _BASIS_STREAMS["z"])
        counts["e"], counts["l"] = float(early), float(late)

    if wanted & {"plus", "minus"}:
        sub = replace(config, analyzer_mode=ANALYZER_MODE_AMZI, analyzer_theta=0.0)
        plus_port, minus_port = _accumulate_ports(sub, _BASIS_STREAMS["x"])
        # at theta = 0 the '+' port projects onto |->, the '-' port onto |+>
        counts["plus"], counts["minus"] = float(minus_port), float(plus_port)

    if wanted & {"plus_i", "minus_i"}:
        sub = replace(config, analyzer_mode=ANALYZER_MODE_AMZI, analyzer_theta=math.pi / 2.0)
        plus_port, minus_port = _accumulate_ports(sub, _BASIS_STREAMS["y"])
        # at theta = pi/2 the '+' port projects onto |+i>
        counts["plus_i"], counts["minus_i"] = float(plus_port), float(minus_port)

    return ProjectionCounts(
        e=counts["e"],
        l=counts["l"],
        plus=counts["plus"],
        minus=counts["minus"],
        plus_i=counts["plus_i"],
        minus_i=counts["minus_i"],
    )


def _accumulate_direct(cfg: ExperimentConfig, stream: int) -> tuple[int, int]:
    early = late = 0
    for chunk in _iter_chunks(cfg, stream):
        sel = chunk.picked_valid
        late += int(np.count_nonzero(chunk.picked_late[sel]))
        early += int(np.count_nonzero(sel)) - int(np.count_nonzero(chunk.picked_late[sel]))
    return early, late


def _accumulate_ports(cfg: ExperimentConfig, stream: int) -> tuple[int, int]:
    plus = minus = 0
    for chunk in _iter_chunks(cfg, stream):
        sel = chunk.picked_valid
        n_plus = int(np.count_nonzero(chunk.picked_plus[sel]))
        plus += n_plus
        minus += int(np.count_nonzero(sel)) - n_plus
    return plus, minus


def herald_count(config: ExperimentConfig, stream: int = 0) -> int:
    """Number of heralded trials of the run (diagnostic convenience)."""
    return sum(int(np.count_nonzero(c.herald)) for c in _iter_chunks(config, stream))
