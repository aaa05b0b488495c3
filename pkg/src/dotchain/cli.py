"""Command-line front end.

    dotchain fig3 | fig4 | transfer-scan | distribute | gates-check
        [--config FILE] [--out-dir DIR] [--seed N] [--format csv|report]

Scenario files are INI-style ``key = value`` text in the sections
``[chain] [drive] [blocking] [protocol] [output]``; physical values carry
their unit in the key name. Unknown sections or keys are rejected.

Exit codes: 0 success, 1 validation error, 2 numerical-quality failure,
3 a reproduced claim or identity check failed.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import figures
from .errors import ConfigError, DotChainError, NumericalError, ValidationError
from .gates import BellPrepSpec, run_gate_checks
from .evolve import first_minimum
from .protocol import ArmSpec, reports_csv, run_distribution, synchronized_rabi, transfer_trajectory
from .svgplot import line_chart

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


SCHEMA = {
    "chain": {
        "n_dots": (int, 5),
        "v_f_mev": (float, 0.2),
        "lengths": (_ints, (5, 7)),
        "n_min": (int, 2),
        "n_max": (int, 11),
    },
    "drive": {
        "rabi_over_vf": (_floats, (1.0, 5.0, 25.0, 50.0)),
        "t_max_ps": (float, None),
        "dt_ps": (float, 0.005),
    },
    "blocking": {
        "ratios": (_floats, (0.0, 2.0, 5.0, 10.0, 20.0, 40.0)),
        "inset_ratio": (float, 20.0),
        "inset_t_max_ps": (float, 3.0),
        "dt_ps": (float, 0.005),
    },
    "protocol": {
        "bus_length_a": (int, 5),
        "bus_length_b": (int, 5),
        "shift_ratio": (float, 20.0),
        "decay_rate_per_ps": (float, 0.001),
        "ideal_controls": (_bool, True),
        "explicit_blocking": (_bool, False),
        "strict_timing": (_bool, False),
        "swap_duration_ps": (float, 1.0),
        "swap_fidelity": (float, 0.99),
        "control_rabi_over_vf": (float, 25.0),
        "coulomb_shift_mev": (float, 4.0),
        "rabi_half_mev": (float, 2.0),
        "rabi_pi_mev": (float, None),
        "transfer_dt_ps": (float, 0.02),
    },
    "output": {
        "plots": (_bool, True),
        "trajectories": (_bool, False),
    },
}


def load_config(path: str | os.PathLike | None) -> dict[str, dict]:
    """Parse a scenario file against :data:`SCHEMA`, filling defaults."""
    config = {sec: {k: default for k, (_, default) in keys.items()} for sec, keys in SCHEMA.items()}
    if path is None:
        return config
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            convert = SCHEMA[section][key][0]
            try:
                config[section][key] = convert(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
    return config


class Outputs:
    """Collects files and writes them all at the end, each atomically."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            target = self.out_dir / name
            fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
            written.append(target)
        return written


def _check(lines: list[str], label: str, ok: bool) -> bool:
    lines.append(f"{'PASS' if ok else 'FAIL'}  {label}")
    return ok


def _emit(fmt: str, csv_text: str, lines: list[str]) -> None:
    if fmt == "csv":
        sys.stdout.write(csv_text)
    else:
        print("\n".join(lines))


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


# ---------------------------------------------------------------------------
# commands


def cmd_fig3(config, outputs: Outputs, fmt: str) -> int:
    chain, drive = config["chain"], config["drive"]
    v_f = chain["v_f_mev"]
    curves = figures.control_array_curves(chain["n_dots"], v_f, drive["rabi_over_vf"],
                                          dt=drive["dt_ps"], t_max=drive["t_max_ps"])
    summary = figures.rabi_summary_csv(curves)
    outputs.add("fig3_summary.csv", summary)
    for c in curves:
        name = f"fig3_rabi_{_tag(c.rabi_over_vf)}vf"
        text = c.trajectory.csv_text(["P_ground", "P_all_excited"])
        outputs.add(f"{name}.csv", text)
        if config["output"]["plots"]:
            outputs.add(f"{name}.svg", line_chart(
                text, "t_ps", ["P_ground", "P_all_excited"],
                title=f"{chain['n_dots']}-dot control array, rabi = {c.rabi_over_vf:g} V_F",
                xlabel="t (ps)", ylabel="population"))
    lines = []
    ok = True
    for c in curves:
        if v_f and c.rabi_over_vf == 25:
            ok &= _check(lines, f"rabi 25 V_F: peak {c.peak:.4f} >= 0.99 at {c.peak_time:.3f} ps < 1 ps",
                         c.peak >= 0.99 and c.peak_time < 1.0)
        if v_f and c.rabi_over_vf == 1:
            ok &= _check(lines, f"rabi 1 V_F: peak {c.peak:.4f} < 0.9", c.peak < 0.9)
    _emit(fmt, summary, lines or [summary.rstrip()])
    return EXIT_OK if ok else EXIT_CHECK


def inset_agreement(inset, names) -> float:
    """Largest spread between inset curves up to the earliest first minimum."""
    t_stop = min(first_minimum(inset, n).time for n in names)
    keep = inset.times <= t_stop
    curves = np.array([inset[n][keep] for n in names])
    return float(np.max(curves.max(axis=0) - curves.min(axis=0)))


def cmd_fig4(config, outputs: Outputs, fmt: str) -> int:
    chain, block = config["chain"], config["blocking"]
    v_f, lengths = chain["v_f_mev"], chain["lengths"]
    points = figures.blocking_sweep(lengths, v_f, block["ratios"])
    main = figures.blocking_main_csv(points)
    outputs.add("fig4_main.csv", main)
    inset = figures.blocking_inset(lengths, v_f, block["inset_ratio"], block["inset_t_max_ps"], block["dt_ps"])
    inset_names = list(inset.observables)
    inset_text = inset.csv_text(inset_names)
    outputs.add("fig4_inset.csv", inset_text)
    if config["output"]["plots"]:
        for n in lengths:
            rows = [p for p in points if p.n_sites == n and not p.flagged]
            sub = "ratio,overlap_at_ta\n" + "".join(f"{p.ratio:g},{p.overlap:.10g}\n" for p in rows)
            outputs.add(f"fig4_main_N{n}.svg", line_chart(
                sub, "ratio", ["overlap_at_ta"], title=f"overlap at t_a, {n}-site chain",
                xlabel="shift / V_F", ylabel="overlap", markers=True))
        outputs.add("fig4_inset.svg", line_chart(
            inset_text, "t_ps", inset_names, title=f"return probability, shift = {block['inset_ratio']:g} V_F",
            xlabel="t (ps)", ylabel="overlap"))

    lines = []
    ok = True
    main_n = lengths[0]
    series = [p for p in points if p.n_sites == main_n]
    for p in series:
        if p.ratio == 20:
            ok &= _check(lines, f"N={main_n} ratio 20: overlap {p.overlap:.5f} >= 0.99",
                         p.overlap is not None and p.overlap >= 0.99)
    vals = [p.overlap for p in sorted(series, key=lambda p: p.ratio)]
    ok &= _check(lines, "overlap non-decreasing in ratio",
                 None not in vals and all(b >= a for a, b in zip(vals, vals[1:])))
    if len(lengths) > 1:
        gap = inset_agreement(inset, inset_names)
        ok &= _check(lines, f"inset curves agree before the first minimum: max gap {gap:.2e} <= 0.01", gap <= 0.01)
    _emit(fmt, main, lines)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_transfer_scan(config, outputs: Outputs, fmt: str) -> int:
    chain = config["chain"]
    points, claim = figures.transfer_scan(chain["n_min"], chain["n_max"], chain["v_f_mev"],
                                          dt=config["protocol"]["transfer_dt_ps"])
    text = figures.transfer_scan_csv(points, claim)
    outputs.add("transfer_scan.csv", text)
    if config["output"]["plots"]:
        outputs.add("transfer_scan.svg", line_chart(
            text, "n_sites", ["fidelity", "average_state_fidelity"], title="first transfer resonance",
            xlabel="sites", ylabel="fidelity", markers=True))
    lines = []
    ok = True
    for p in points:
        if p.n_sites <= 10:
            ok &= _check(lines, f"N={p.n_sites}: fidelity {p.fidelity:.4f} >= 0.94 "
                                f"(average-state {p.average_fidelity:.4f})",
                         p.fidelity >= figures.TARGET_TRANSFER_FIDELITY)
    lines.append(claim.describe())
    ok &= _check(lines, "transfer time within a factor of 2 of 10 ps", claim.within_factor_two)
    _emit(fmt, text, lines)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_distribute(config, outputs: Outputs, fmt: str) -> int:
    chain, proto = config["chain"], config["protocol"]
    v_f = chain["v_f_mev"]
    arms = [ArmSpec(proto[f"bus_length_{s}"], v_f, shift=proto["shift_ratio"] * v_f,
                    decay_rate=proto["decay_rate_per_ps"]) for s in "ab"]
    shift = proto["coulomb_shift_mev"]
    bell = BellPrepSpec(coulomb_shift=shift, rabi_half=proto["rabi_half_mev"],
                        rabi_pi=proto["rabi_pi_mev"] or synchronized_rabi(shift, 2))
    report = run_distribution(
        *arms,
        ideal_controls=proto["ideal_controls"],
        explicit_blocking=proto["explicit_blocking"],
        bell=bell,
        control_rabi=proto["control_rabi_over_vf"] * v_f,
        swap_duration=proto["swap_duration_ps"],
        swap_fidelity=proto["swap_fidelity"],
        strict_timing=proto["strict_timing"],
    )
    text = report.text()
    csv_text = reports_csv([report])
    outputs.add("distribution_report.txt", text)
    outputs.add("distribution.csv", csv_text)
    if config["output"]["trajectories"]:
        for tag, arm in zip("AB", arms):
            outputs.add(f"transfer_arm_{tag}.csv", transfer_trajectory(arm, proto["transfer_dt_ps"]).csv_text())
    lines = [text.rstrip()]
    ok = _check(lines, f"elapsed {report.elapsed:.3f} ps <= 20 ps", report.elapsed <= 20.0)
    _emit(fmt, csv_text, lines)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_gates_check(config, outputs: Outputs, fmt: str, seed: int, tolerance: float) -> int:
    results = run_gate_checks(seed=seed, tol=tolerance)
    text = "".join(r.line() + "\n" for r in results)
    outputs.add("gates_check.txt", text)
    print(text, end="")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (INI-style key = value)")
    common.add_argument("--out-dir", default="out", help="directory for CSV/SVG/report files")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks")
    common.add_argument("--format", choices=("csv", "report"), default="report", help="what to print")

    parser = argparse.ArgumentParser(prog="dotchain", description=__doc__.split("\n\n")[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fig3", parents=[common], help="control-array Rabi driving")
    sub.add_parser("fig4", parents=[common], help="blocking overlap sweep and inset")
    sub.add_parser("transfer-scan", parents=[common], help="first transfer resonance vs chain length")
    sub.add_parser("distribute", parents=[common], help="full six-step distribution run")
    g = sub.add_parser("gates-check", parents=[common], help="gate identities and SWAP-in test")
    g.add_argument("--tolerance", type=float, default=1e-10,
                   help="pass threshold; set absurdly small to exercise the failure path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        outputs = Outputs(Path(args.out_dir))
        if args.command == "gates-check":
            code = cmd_gates_check(config, outputs, args.format, args.seed, args.tolerance)
        else:
            handler = {"fig3": cmd_fig3, "fig4": cmd_fig4, "transfer-scan": cmd_transfer_scan,
                       "distribute": cmd_distribute}[args.command]
            code = handler(config, outputs, args.format)
        outputs.commit()
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, DotChainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
