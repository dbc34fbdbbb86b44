"""Command-line entry point for all analyses.

Every subcommand resolves its configuration (defaults, then an optional
flat key=value config file, then flags), writes plot-ready CSV data or
event records into the output directory together with a ``manifest.json``
provenance record, and prints the headline numbers.  Data files embed the
deterministic manifest hash and are byte-identical across reruns with
the same inputs; the manifest file additionally records wall-clock
metadata.

Exit codes: 0 success, 1 validation error, 2 numerical failure.  Errors
are also emitted as a single JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .afc import AfcConfig, CountQuadruple, afc_efficiency_theory, measured_efficiency, storage_time_ns
from .bounds import (
    ClassicalBoundParams,
    DecoyDataset,
    classical_bound_unit_eff,
    classical_bound_with_eff,
    decoy_f1_lower,
    decoy_y0_lower,
    decoy_y1_lower,
)
from .interference import (
    beat_config_from_physical,
    coincidence_density,
    hom_visibility,
    integrated_coincidence,
    integrated_coincidence_distinguishable,
    pulse_time_unit_ns,
)
from .io import (
    RunManifest,
    format_number,
    parse_flat_config,
    write_events,
    write_manifest,
    write_table,
)
from .phase_drift import (
    OpticalPathParams,
    analyzer_phase_sensitivity,
    input_phase_sensitivity,
    pump_reference_phase_cycles,
    signal_frequency,
)
from .pipeline import ExperimentConfig, herald_count, run_teleportation_experiment, simulate_trials
from .repeater import Detection, LinkParams, Protocol, heralding_rate, link_distribution_rate, repeater_rate
from .timebin import CARDINAL_STATES, make_input_state
from .tomography import (
    ProjectionCounts,
    chi_sigma_y,
    monte_carlo_errors,
    process_fidelity,
    qpt_reconstruct,
    rho_from_stokes,
    state_fidelity,
    stokes_from_counts,
)


class _Parser(argparse.ArgumentParser):
    # route argparse's own failures through the validation exit code
    def error(self, message):
        raise ValueError(message)


def _emit_error(kind: str, exc: Exception) -> None:
    record = {"error": kind, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise ValueError("missing subcommand (see --help)")
        return args.func(args)
    except ValueError as exc:
        _emit_error("validation", exc)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        _emit_error("numerical", exc)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teleportsim", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("hom-scan", parents=[_common()], add_help=True,
                       help="integrated coincidences vs frequency detuning")
    p.add_argument("--mu-c", type=float, default=0.0825)
    p.add_argument("--mu-t", type=float, default=0.019)
    p.add_argument("--delta-max-ghz", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--pulse-fwhm-ns", type=float, default=4.0)
    p.add_argument("--window", type=float, default=4.0)
    p.set_defaults(func=_cmd_hom_scan)

    p = sub.add_parser("beat", parents=[_common()],
                       help="time-resolved coincidence density (quantum beat)")
    p.add_argument("--mu-c", type=float, default=0.0825)
    p.add_argument("--mu-t", type=float, default=0.019)
    p.add_argument("--delta-ghz", type=float, default=0.511)
    p.add_argument("--delta-tau-ns", type=float, default=0.0)
    p.add_argument("--tau-max-ns", type=float, default=12.0)
    p.add_argument("--steps", type=int, default=241)
    p.add_argument("--pulse-fwhm-ns", type=float, default=4.0)
    p.set_defaults(func=_cmd_beat)

    p = sub.add_parser("teleport-sim", parents=[_common()],
                       help="seeded Monte Carlo of the full experiment")
    p.add_argument("--config", default="paper-defaults",
                   help="flat config file or the builtin 'paper-defaults'")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--format", choices=("csv", "records"), default="csv")
    p.set_defaults(func=_cmd_teleport_sim)

    p = sub.add_parser("qst", parents=[_common()], help="single-qubit state tomography")
    p.add_argument("--counts-file", required=True)
    p.add_argument("--target", choices=sorted(CARDINAL_STATES), required=True)
    p.add_argument("--mc-samples", type=int, default=0)
    p.set_defaults(func=_cmd_qst)

    p = sub.add_parser("qpt", parents=[_common()], help="quantum process tomography")
    p.add_argument("--counts-e", required=True)
    p.add_argument("--counts-l", required=True)
    p.add_argument("--counts-plus", required=True)
    p.add_argument("--counts-plus-i", required=True)
    p.set_defaults(func=_cmd_qpt)

    p = sub.add_parser("bounds-classical", parents=[_common()],
                       help="classical teleportation-fidelity bounds")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--mu-min", type=float, default=None)
    p.add_argument("--mu-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=51)
    p.set_defaults(func=_cmd_bounds_classical)

    p = sub.add_parser("bounds-decoy", parents=[_common()],
                       help="decoy-state single-photon fidelity bound")
    p.add_argument("--data", required=True, help="flat file with mu_s nu_1 nu_2 q_s q_1 q_2 f_s f_1 f_2")
    p.set_defaults(func=_cmd_bounds_decoy)

    p = sub.add_parser("afc", parents=[_common()], help="AFC memory arithmetic")
    p.add_argument("--period-mhz", type=float, required=True)
    p.add_argument("--finesse", type=float, required=True)
    p.add_argument("--optical-depth", type=float, default=0.0)
    p.add_argument("--background-depth", type=float, default=0.0)
    p.add_argument("--cc-echo", type=float, default=None)
    p.add_argument("--cc-transmission", type=float, default=None)
    p.add_argument("--sc-transmission", type=float, default=None)
    p.add_argument("--sc-input", type=float, default=None)
    p.set_defaults(func=_cmd_afc)

    p = sub.add_parser("repeater-rate", parents=[_common()],
                       help="elementary-link and repeater rates")
    p.add_argument("--l0-km", type=float, required=True)
    p.add_argument("--r-idler-hz", type=float, required=True)
    p.add_argument("--delta-t-s", type=float, required=True)
    p.add_argument("--m-modes", type=int, default=1)
    p.add_argument("--m-time", type=int, default=1)
    p.add_argument("--eta-duty", type=float, default=1.0)
    p.add_argument("--eta-il-idler", type=float, default=1.0)
    p.add_argument("--eta-il-signal", type=float, default=1.0)
    p.add_argument("--eta-storage", type=float, default=1.0)
    p.add_argument("--c-fiber-km-s", type=float, default=2.0e5)
    p.set_defaults(func=_cmd_repeater)

    p = sub.add_parser("phase-drift", parents=[_common()],
                       help="phase sensitivity to laser-frequency drift")
    p.add_argument("--modulator-nl-m", type=float, default=None)
    p.add_argument("--amzi-nl-m", type=float, default=None)
    p.add_argument("--f-input-hz", type=float, default=None)
    p.add_argument("--f-pump-hz", type=float, default=None)
    p.add_argument("--fsr-hz", type=float, default=None)
    p.add_argument("--n-sp", type=int, default=None)
    p.set_defaults(func=_cmd_phase_drift)

    return parser


def _common() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--out", default=".", help="output directory")
    shared.add_argument("--seed", type=int, default=0)
    return shared


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(args, config: dict, inputs: tuple[str, ...], outputs: tuple[str, ...]) -> RunManifest:
    manifest = RunManifest(
        subcommand=args.subcommand,
        config=config,
        seed=args.seed,
        version=__version__,
        inputs=inputs,
        outputs=outputs,
    )
    write_manifest(_out_dir(args) / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# subcommands


def _cmd_hom_scan(args) -> int:
    if args.steps < 2:
        raise ValueError("need at least 2 sweep steps")
    config = {
        "mu_c": args.mu_c, "mu_t": args.mu_t, "delta_max_ghz": args.delta_max_ghz,
        "steps": args.steps, "pulse_fwhm_ns": args.pulse_fwhm_ns, "window": args.window,
    }
    manifest = _finish(args, config, (), ("hom_scan.csv",))
    deltas = np.linspace(-args.delta_max_ghz, args.delta_max_ghz, args.steps)
    rows = []
    for d in deltas:
        cfg = beat_config_from_physical(args.mu_c, args.mu_t, delta_ghz=float(d),
                                        pulse_fwhm_ns=args.pulse_fwhm_ns)
        rows.append((float(d), integrated_coincidence(cfg, args.window)))
    write_table(_out_dir(args) / "hom_scan.csv", ("delta_ghz", "coincidence"), rows, manifest.hash())
    vis = hom_visibility(args.mu_c, args.mu_t, args.window)
    print(f"hom-scan: visibility at zero detuning = {format_number(vis)}")
    return 0


def _cmd_beat(args) -> int:
    if args.steps < 2:
        raise ValueError("need at least 2 sweep steps")
    config = {
        "mu_c": args.mu_c, "mu_t": args.mu_t, "delta_ghz": args.delta_ghz,
        "delta_tau_ns": args.delta_tau_ns, "tau_max_ns": args.tau_max_ns,
        "steps": args.steps, "pulse_fwhm_ns": args.pulse_fwhm_ns,
    }
    manifest = _finish(args, config, (), ("beat.csv",))
    cfg = beat_config_from_physical(args.mu_c, args.mu_t, delta_ghz=args.delta_ghz,
                                    delta_tau_ns=args.delta_tau_ns,
                                    pulse_fwhm_ns=args.pulse_fwhm_ns)
    t0 = pulse_time_unit_ns(args.pulse_fwhm_ns)
    taus = np.linspace(-args.tau_max_ns, args.tau_max_ns, args.steps)
    rows = [(float(t), coincidence_density(float(t) / t0, cfg)) for t in taus]
    write_table(_out_dir(args) / "beat.csv", ("tau_ns", "density"), rows, manifest.hash())
    print(f"beat: density at tau=0 is {format_number(coincidence_density(0.0, cfg))}")
    return 0


_SIM_DEFAULTS = {
    "mu_input": 0.0825, "mu_pair": 0.019, "varsigma": 0.8375,
    "input_alpha": 1.0 / math.sqrt(2.0), "input_beta": 1.0 / math.sqrt(2.0), "input_phi": 0.0,
    "analyzer_theta": 0.0, "n_trials": 100_000,
    "eta_idler_path": 1.0, "eta_signal_path": 1.0, "eta_storage": 0.011,
    "dark_count_rate_hz": 0.0, "bin_separation_ns": 32.0, "bin_width_ns": 4.0,
    "rep_rate_hz": 10e6, "coincidence_window_ns": 6.0, "storage_time_ns": 2187.0,
    "idler_arrival_offset_ns": 0.0,
}


def _resolve_sim_config(args) -> tuple[dict, ExperimentConfig]:
    resolved = dict(_SIM_DEFAULTS)
    if args.config != "paper-defaults":
        text = Path(args.config).read_text(encoding="utf-8")
        overrides = parse_flat_config(text)
        unknown = set(overrides) - set(_SIM_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in overrides.items():
            resolved[key] = int(value) if key == "n_trials" else float(value)
    if args.trials is not None:
        resolved["n_trials"] = args.trials
    state = make_input_state(resolved["input_alpha"], resolved["input_beta"], resolved["input_phi"])
    cfg = ExperimentConfig(
        mu_input=resolved["mu_input"],
        mu_pair=resolved["mu_pair"],
        varsigma=resolved["varsigma"],
        input_state=state,
        analyzer_theta=resolved["analyzer_theta"],
        n_trials=int(resolved["n_trials"]),
        seed=args.seed,
        eta_idler_path=resolved["eta_idler_path"],
        eta_signal_path=resolved["eta_signal_path"],
        eta_storage=resolved["eta_storage"],
        dark_count_rate_hz=resolved["dark_count_rate_hz"],
        bin_separation_ns=resolved["bin_separation_ns"],
        bin_width_ns=resolved["bin_width_ns"],
        rep_rate_hz=resolved["rep_rate_hz"],
        coincidence_window_ns=resolved["coincidence_window_ns"],
        storage_time_ns=resolved["storage_time_ns"],
        idler_arrival_offset_ns=resolved["idler_arrival_offset_ns"],
    )
    return resolved, cfg


def _cmd_teleport_sim(args) -> int:
    resolved, cfg = _resolve_sim_config(args)
    outputs = ["teleport_counts.csv"]
    if args.format == "records":
        outputs.append("events.records")
    resolved_meta = dict(resolved)
    resolved_meta["format"] = args.format
    manifest = _finish(args, resolved_meta, (), tuple(outputs))
    out = _out_dir(args)

    counts = run_teleportation_experiment(cfg)
    rows = [(name, getattr(counts, name)) for name in ("e", "l", "plus", "minus", "plus_i", "minus_i")]
    write_table(out / "teleport_counts.csv", ("projection", "counts"), rows, manifest.hash())

    if args.format == "records":
        write_events(out / "events.records", simulate_trials(cfg), manifest.hash())

    total = sum(getattr(counts, n) for n in ("e", "l", "plus", "minus", "plus_i", "minus_i"))
    print(f"teleport-sim: {int(total)} heralded analyzer counts over 3 bases "
          f"x {cfg.n_trials} trials")
    return 0


def _read_counts_file(path: str) -> ProjectionCounts:
    data = parse_flat_config(Path(path).read_text(encoding="utf-8"))
    keys = {"e", "l", "plus", "minus", "plus_i", "minus_i"}
    unknown = set(data) - keys - {"integration_time_s"}
    if unknown:
        raise ValueError(f"unknown count keys in {path}: {sorted(unknown)}")
    missing = keys - set(data)
    if missing:
        raise ValueError(f"missing count keys in {path}: {sorted(missing)}")
    t = float(data["integration_time_s"]) if "integration_time_s" in data else None
    return ProjectionCounts(
        e=float(data["e"]), l=float(data["l"]),
        plus=float(data["plus"]), minus=float(data["minus"]),
        plus_i=float(data["plus_i"]), minus_i=float(data["minus_i"]),
        integration_time_s=t,
    )


def _cmd_qst(args) -> int:
    counts = _read_counts_file(args.counts_file)
    config = {"counts_file": args.counts_file, "target": args.target, "mc_samples": args.mc_samples}
    manifest = _finish(args, config, (args.counts_file,), ("qst.csv",))

    stokes = stokes_from_counts(counts)
    rho = rho_from_stokes(stokes)
    target = CARDINAL_STATES[args.target]()
    fid = state_fidelity(rho, target)
    rows = [
        ("s1", stokes[1]), ("s2", stokes[2]), ("s3", stokes[3]),
        ("rho_ee_re", rho[0, 0].real), ("rho_ee_im", rho[0, 0].imag),
        ("rho_el_re", rho[0, 1].real), ("rho_el_im", rho[0, 1].imag),
        ("rho_le_re", rho[1, 0].real), ("rho_le_im", rho[1, 0].imag),
        ("rho_ll_re", rho[1, 1].real), ("rho_ll_im", rho[1, 1].imag),
        ("fidelity", fid),
    ]
    if args.mc_samples:
        errors = monte_carlo_errors(counts, target, n_samples=args.mc_samples, seed=args.seed)
        rows.append(("fidelity_std", errors.fidelity_std))
    write_table(_out_dir(args) / "qst.csv", ("quantity", "value"), rows, manifest.hash())
    print(f"qst: fidelity to |{args.target}> = {format_number(fid)}")
    return 0


def _cmd_qpt(args) -> int:
    files = {
        "e": args.counts_e, "l": args.counts_l,
        "plus": args.counts_plus, "plus_i": args.counts_plus_i,
    }
    config = {f"counts_{k}": v for k, v in files.items()}
    manifest = _finish(args, config, tuple(files.values()), ("qpt.csv",))

    rhos = {}
    for name, path in files.items():
        counts = _read_counts_file(path)
        rhos[name] = rho_from_stokes(stokes_from_counts(counts))
    chi = qpt_reconstruct(rhos["e"], rhos["l"], rhos["plus"], rhos["plus_i"])
    fid = process_fidelity(chi, chi_sigma_y())
    rows = [("process_fidelity_vs_sigma_y", fid)]
    for l in range(4):
        for k in range(4):
            rows.append((f"chi_{l}{k}_re", chi[l, k].real))
            rows.append((f"chi_{l}{k}_im", chi[l, k].imag))
    write_table(_out_dir(args) / "qpt.csv", ("quantity", "value"), rows, manifest.hash())
    print(f"qpt: process fidelity vs ideal sigma_y channel = {format_number(fid)}")
    return 0


def _cmd_bounds_classical(args) -> int:
    config = {"mu": args.mu, "eta": args.eta, "mu_min": args.mu_min,
              "mu_max": args.mu_max, "steps": args.steps}
    manifest = _finish(args, config, (), ("classical_bounds.csv",))
    bound_unit = classical_bound_unit_eff(args.mu)
    bound_eff = classical_bound_with_eff(ClassicalBoundParams(mu=args.mu, eta=args.eta))
    rows = [(args.mu, args.eta, bound_unit, bound_eff)]
    if args.mu_min is not None and args.mu_max is not None:
        for mu in np.linspace(args.mu_min, args.mu_max, args.steps):
            rows.append((
                float(mu), args.eta,
                classical_bound_unit_eff(float(mu)),
                classical_bound_with_eff(ClassicalBoundParams(mu=float(mu), eta=args.eta)),
            ))
    write_table(_out_dir(args) / "classical_bounds.csv",
                ("mu", "eta", "bound_unit_eff", "bound_with_eff"), rows, manifest.hash())
    print(f"bounds-classical: F_classical(mu={args.mu}, eta={args.eta}) = {format_number(bound_eff)}")
    return 0


def _cmd_bounds_decoy(args) -> int:
    data = parse_flat_config(Path(args.data).read_text(encoding="utf-8"))
    keys = {"mu_s", "nu_1", "nu_2", "q_s", "q_1", "q_2", "f_s", "f_1", "f_2"}
    unknown = set(data) - keys
    if unknown:
        raise ValueError(f"unknown decoy keys: {sorted(unknown)}")
    missing = keys - set(data)
    if missing:
        raise ValueError(f"missing decoy keys: {sorted(missing)}")
    dataset = DecoyDataset(**{k: float(v) for k, v in data.items()})
    config = {k: float(data[k]) for k in sorted(keys)}
    manifest = _finish(args, config, (args.data,), ("decoy_bounds.csv",))
    y0 = decoy_y0_lower(dataset)
    y1 = decoy_y1_lower(dataset)
    f1 = decoy_f1_lower(dataset)
    rows = [("y0_lower", y0), ("y1_lower", y1), ("f1_lower", f1)]
    write_table(_out_dir(args) / "decoy_bounds.csv", ("quantity", "value"), rows, manifest.hash())
    print(f"bounds-decoy: F1_lower = {format_number(f1)}")
    return 0


def _cmd_afc(args) -> int:
    cfg = AfcConfig(
        comb_period_mhz=args.period_mhz,
        finesse=args.finesse,
        optical_depth=args.optical_depth,
        background_depth=args.background_depth,
    )
    config = {"period_mhz": args.period_mhz, "finesse": args.finesse,
              "optical_depth": args.optical_depth, "background_depth": args.background_depth}
    manifest = _finish(args, config, (), ("afc.csv",))
    rows = [
        ("storage_time_ns", storage_time_ns(cfg)),
        ("efficiency_theory", afc_efficiency_theory(cfg)),
    ]
    count_flags = (args.cc_echo, args.cc_transmission, args.sc_transmission, args.sc_input)
    if any(v is not None for v in count_flags):
        if any(v is None for v in count_flags):
            raise ValueError("measured efficiency needs all four count flags")
        quad = CountQuadruple(*count_flags)
        rows.append(("efficiency_measured", measured_efficiency(quad)))
    write_table(_out_dir(args) / "afc.csv", ("quantity", "value"), rows, manifest.hash())
    print(f"afc: storage time = {format_number(storage_time_ns(cfg))} ns, "
          f"theory efficiency = {format_number(afc_efficiency_theory(cfg))}")
    return 0


def _cmd_repeater(args) -> int:
    params = LinkParams(
        l0_km=args.l0_km,
        r_idler_hz=args.r_idler_hz,
        delta_t_s=args.delta_t_s,
        m_modes=args.m_modes,
        m_time=args.m_time,
        eta_duty=args.eta_duty,
        eta_il_idler=args.eta_il_idler,
        eta_il_signal=args.eta_il_signal,
        eta_storage=args.eta_storage,
        c_fiber_km_s=args.c_fiber_km_s,
    )
    config = {k: getattr(args, k) for k in (
        "l0_km", "r_idler_hz", "delta_t_s", "m_modes", "m_time", "eta_duty",
        "eta_il_idler", "eta_il_signal", "eta_storage", "c_fiber_km_s")}
    manifest = _finish(args, config, (), ("repeater_rates.csv",))
    rows = []
    for detection in Detection:
        for spin_wave in (False, True):
            proto = Protocol(detection=detection, spin_wave=spin_wave)
            rows.append((
                detection.value, int(spin_wave),
                heralding_rate(params, proto),
                link_distribution_rate(params, proto),
                repeater_rate(params, proto),
            ))
    write_table(_out_dir(args) / "repeater_rates.csv",
                ("detection", "spin_wave", "heralding_rate_hz",
                 "link_rate_hz", "repeater_rate_hz"), rows, manifest.hash())
    single = Protocol(Detection.SINGLE_PHOTON, spin_wave=True)
    print(f"repeater-rate: single-photon spin-wave repeater rate = "
          f"{format_number(repeater_rate(params, single))} 1/s")
    return 0


def _cmd_phase_drift(args) -> int:
    defaults = OpticalPathParams()
    params = OpticalPathParams(
        modulator_nl_m=args.modulator_nl_m if args.modulator_nl_m is not None else defaults.modulator_nl_m,
        amzi_nl_m=args.amzi_nl_m if args.amzi_nl_m is not None else defaults.amzi_nl_m,
        f_input_hz=args.f_input_hz if args.f_input_hz is not None else defaults.f_input_hz,
        f_pump_hz=args.f_pump_hz if args.f_pump_hz is not None else defaults.f_pump_hz,
        fsr_hz=args.fsr_hz if args.fsr_hz is not None else defaults.fsr_hz,
        n_sp=args.n_sp if args.n_sp is not None else defaults.n_sp,
    )
    config = {
        "modulator_nl_m": params.modulator_nl_m, "amzi_nl_m": params.amzi_nl_m,
        "f_input_hz": params.f_input_hz, "f_pump_hz": params.f_pump_hz,
        "fsr_hz": params.fsr_hz, "n_sp": params.n_sp,
    }
    manifest = _finish(args, config, (), ("phase_drift.csv",))
    d_in = input_phase_sensitivity(params)
    d_an = analyzer_phase_sensitivity(params)
    rows = [
        ("input_sensitivity_rad_per_hz", d_in),
        ("analyzer_sensitivity_rad_per_hz", d_an),
        ("stability_ratio", abs(d_in / d_an)),
        ("pump_phase_cycles", pump_reference_phase_cycles(params)),
        ("signal_frequency_hz", signal_frequency(params.f_pump_hz, params.n_sp, params.fsr_hz)),
    ]
    write_table(_out_dir(args) / "phase_drift.csv", ("quantity", "value"), rows, manifest.hash())
    print(f"phase-drift: input {format_number(d_in)} rad/Hz, "
          f"analyzer {format_number(d_an)} rad/Hz")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
