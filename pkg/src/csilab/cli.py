"""Command-line pipelines: simulate, analyze, sweep, theory, report.

Every failure path maps to an exit code instead of a traceback: 2 for
configuration or parameter problems, 3 for ordinary I/O failures, 4 for
malformed trace containers.  Output files are written to a temporary
sibling and renamed into place, so an error never leaves partial CSVs
behind.

The --config flag accepts either a preset name (G2, G5, G8, G10,
G10_IDEAL) or the path of an INI scenario file; with neither, the G10
preset applies.
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from .errors import (
    BandError,
    ConfigError,
    CsilabError,
    DomainError,
    SpecError,
    TraceFileError,
)
from .estimators import (
    csi_frequency_test,
    cutoff_sweep,
    filtered_violation,
    g2_curves,
    normalized_spectra,
)
from .fock import fock_oracle_moments
from .scenarios import Scenario, load_scenario, preset, preset_names
from .synth import synthesize
from .theory import SqueezeParams, db, g2_ideal, squeezing_ideal, violation_factor_ideal
from .tracefile import read_tracefile, write_tracefile

ORACLE_TOL = 1e-8


def _resolve_scenario(config: str | None) -> Scenario:
    if config is None:
        return preset("G10")
    if config.upper() in preset_names():
        return preset(config)
    return load_scenario(config)


def _apply_overrides(sc: Scenario, seed, sets) -> Scenario:
    acq = sc.acquisition
    if seed is not None:
        acq = dataclasses.replace(acq, rng_seed=seed)
    if sets is not None:
        acq = dataclasses.replace(acq, num_sets=sets)
    return dataclasses.replace(sc, acquisition=acq)


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path, columns: dict) -> None:
    arr = np.column_stack(list(columns.values()))
    tmp = f"{path}.tmp"
    np.savetxt(tmp, arr, delimiter=",", fmt="%.9e", comments="",
               header=",".join(columns))
    os.replace(tmp, path)


def _parse_cutoffs(text: str):
    return [float(tok) for tok in text.replace(",", " ").split()]


def cmd_simulate(args) -> int:
    sc = _apply_overrides(_resolve_scenario(args.config), args.seed, args.sets)
    ts = synthesize(sc.model, sc.acquisition)
    write_tracefile(ts, args.out)
    acq = ts.acquisition
    print(f"scenario {sc.name}: {acq.num_sets} sets x {acq.samples_per_set} "
          f"samples x 4 channels at {acq.sample_rate / 1e9:g} GS/s")
    print("dc means: " + "  ".join(f"{x:.6g}" for x in ts.dc_means))
    print(f"seed 0x{acq.rng_seed:X} -> {args.out} "
          f"({os.path.getsize(args.out)} bytes)")
    return 0


def _analysis_summary(sc: Scenario, ts, compensate: bool):
    a = sc.analysis
    stats = filtered_violation(ts, a.bandpass)
    rep = normalized_spectra(ts, compensate=compensate, band=a.spectra_band,
                             smooth_hz=a.smooth_hz)
    band = (a.bandpass.f_lo, a.bandpass.f_hi)
    lhs, rhs, classical = csi_frequency_test(rep, ts, band)
    curves = g2_curves(ts, a.tau_max)

    verdict = "CSI VIOLATED" if stats["violated"] else "CSI NOT VIOLATED"
    lines = [
        f"scenario: {sc.name}",
        f"sets: {ts.num_sets} ({stats['num_degenerate']} degenerate)",
        f"band: {band[0] / 1e6:.2f}-{band[1] / 1e6:.2f} MHz",
        f"delay estimate: {stats['delay'] * 1e9:.3f} ns",
        f"V = {stats['v_mean']:.6f} +/- {stats['v_sigma']:.6f} (set-to-set std)",
        f"standard error {stats['v_sem']:.6f}, sigma_count = {stats['sigma_count']:.1f}",
        f"verdict: {verdict}",
        f"spectral test: lhs = {lhs:.6g}, rhs = {rhs:.6g}, "
        f"{'classical' if classical else 'violated'} "
        f"(agrees: {'yes' if classical != stats['violated'] else 'NO'})",
        f"squeezing: max {rep.squeezing_db_max:.2f} dB below SQL, "
        f"bandwidth {rep.squeezing_bandwidth / 1e6:.2f} MHz",
    ]
    return curves, rep, "\n".join(lines) + "\n"


def _write_analysis(outdir, curves, rep, summary: str) -> None:
    os.makedirs(outdir, exist_ok=True)
    _write_csv(os.path.join(outdir, "g2_curves.csv"), {
        "tau_s": curves.tau_grid,
        "g2_ab": curves.g2_ab,
        "g2_aa": curves.g2_aa,
        "g2_bb": curves.g2_bb,
    })
    keep = ~np.isnan(rep.s_p_norm)
    _write_csv(os.path.join(outdir, "spectra.csv"), {
        "f_hz": rep.frequencies[keep],
        "s_p_norm": rep.s_p_norm[keep],
        "s_c_norm": rep.s_c_norm[keep],
        "s_diff_norm": rep.s_diff_norm[keep],
    })
    _write_text(os.path.join(outdir, "summary.txt"), summary)


def cmd_analyze(args) -> int:
    ts = read_tracefile(args.trace)
    sc = _resolve_scenario(args.config)
    curves, rep, summary = _analysis_summary(sc, ts, not args.no_compensate_delay)
    _write_analysis(args.out, curves, rep, summary)
    print(summary, end="")
    return 0


def cmd_sweep(args) -> int:
    ts = read_tracefile(args.trace)
    sc = _resolve_scenario(args.config)
    a = sc.analysis
    rows = cutoff_sweep(ts, _parse_cutoffs(args.cutoffs),
                        f_lo=a.bandpass.f_lo, order=a.bandpass.order)
    os.makedirs(args.out, exist_ok=True)
    _write_csv(os.path.join(args.out, "vsweep.csv"), {
        "f_hi_hz": rows[:, 0], "v_mean": rows[:, 1], "v_sigma": rows[:, 2],
    })
    for f_hi, v, sig in rows:
        print(f"f_hi {f_hi / 1e6:6.2f} MHz  V = {v:.4f} +/- {sig:.4f}")
    return 0


def _oracle_check(gains, alpha=1.0) -> float:
    worst = 0.0
    for gain in gains:
        p = SqueezeParams.from_gain(gain, alpha=alpha)
        if not 0.0 < p.s <= 0.6:
            continue  # Fock-space truncation is only honest for small nonzero s
        ideal = g2_ideal(p)
        oracle = fock_oracle_moments(p)
        for a, b in [
            (ideal.g2_aa, oracle.g2_aa),
            (ideal.g2_bb, oracle.g2_bb),
            (ideal.g2_ab0, oracle.g2_ab0),
        ]:
            worst = max(worst, abs(a - b) / abs(b))
    return worst


def cmd_theory(args) -> int:
    gains = args.gain or [10.0]
    for g in gains:
        if g < 1.0:
            raise DomainError(f"gain must be >= 1, got {g}")
    print("gain  V_ideal  squeezing_db(eta={:.2f})".format(args.eta))
    for g in gains:
        sq = db(squeezing_ideal(g, args.eta))
        print(f"{g:4.6g}  {violation_factor_ideal(g):.4f}  {sq:+.2f}")
    if args.oracle:
        checkable = [
            g for g in gains if 0.0 < SqueezeParams.from_gain(g, alpha=1.0).s <= 0.6
        ]
        worst = _oracle_check(checkable or [1.05, 1.1, 1.2])
        print(f"fock oracle max relative deviation: {worst:.3e}")
        if worst > ORACLE_TOL:
            print("ORACLE MISMATCH", file=sys.stderr)
            return 1
    return 0


def cmd_report(args) -> int:
    sc = _apply_overrides(_resolve_scenario(args.config), args.seed, args.sets)
    ts = synthesize(sc.model, sc.acquisition)
    os.makedirs(args.out, exist_ok=True)
    write_tracefile(ts, os.path.join(args.out, "traces.cstf"))
    curves, rep, summary = _analysis_summary(sc, ts, not args.no_compensate_delay)
    _write_analysis(args.out, curves, rep, summary)
    if args.cutoffs:
        cutoffs = _parse_cutoffs(args.cutoffs)
    else:
        top = int(sc.analysis.bandpass.f_hi / 1e6)
        cutoffs = [f * 1e6 for f in range(1, max(top, 1) + 1)]
    a = sc.analysis
    rows = cutoff_sweep(ts, cutoffs, f_lo=a.bandpass.f_lo, order=a.bandpass.order)
    _write_csv(os.path.join(args.out, "vsweep.csv"), {
        "f_hi_hz": rows[:, 0], "v_mean": rows[:, 1], "v_sigma": rows[:, 2],
    })
    print(summary, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="csilab",
        description="twin-beam Cauchy-Schwarz test simulator and analyzer",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize traces into a container")
    sim.add_argument("--config", help="preset name or scenario INI path")
    sim.add_argument("--out", required=True, help="output trace file")
    sim.add_argument("--seed", type=lambda s: int(s, 0))
    sim.add_argument("--sets", type=int)
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="estimate correlations and spectra")
    ana.add_argument("trace", help="trace container to analyze")
    ana.add_argument("--config", help="preset name or scenario INI path")
    ana.add_argument("--out", required=True, help="output directory")
    ana.add_argument("--no-compensate-delay", action="store_true")
    ana.set_defaults(func=cmd_analyze)

    sw = sub.add_parser("sweep", help="violation factor vs high-frequency cutoff")
    sw.add_argument("trace")
    sw.add_argument("--config", help="preset name or scenario INI path")
    sw.add_argument("--cutoffs", required=True,
                    help="comma or space separated cutoff list in Hz")
    sw.add_argument("--out", required=True, help="output directory")
    sw.set_defaults(func=cmd_sweep)

    th = sub.add_parser("theory", help="closed-form predictions table")
    th.add_argument("--gain", type=float, action="append",
                    help="may repeat; default 10")
    th.add_argument("--eta", type=float, default=0.8)
    th.add_argument("--oracle", action="store_true",
                    help="cross-check the Gaussian moments against the Fock oracle")
    th.set_defaults(func=cmd_theory)

    rep = sub.add_parser("report", help="simulate + analyze + sweep in one run")
    rep.add_argument("--config", help="preset name or scenario INI path")
    rep.add_argument("--out", required=True, help="output directory")
    rep.add_argument("--seed", type=lambda s: int(s, 0))
    rep.add_argument("--sets", type=int)
    rep.add_argument("--cutoffs", help="override the sweep cutoff list (Hz)")
    rep.add_argument("--no-compensate-delay", action="store_true")
    rep.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TraceFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, SpecError, DomainError, BandError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CsilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
