"""Command line front end.

Subcommands: simulate, measures, divisibility, trajectories, schedule.
States are entered as four comma-separated reals p00,p11,re01,im01 and
printed as nested [re, im] pairs. Exit codes: 0 success, 2 configuration
error, 3 numeric invariant violation, 4 unsupported feature.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .chains import (
    CUSTOM,
    MARKOV_XOR,
    REPEATED_XOR,
    SQRT_XOR,
    WINDOW_QUBIT_CAP,
    ChainModel,
    advanced_overlap_schedule,
    chain_schedule,
    custom_chain,
    delta,
    markov_xor_step,
    overlap_schedule,
    run_window,
    satellite_count,
    schedule_from_records,
    simulate_embedding,
    single_molecule_schedule,
    system_maps,
    window_width,
)
from .channels import divisibility_scan
from .gates import sqrt_xor_gate, xor_gate
from .linalg import DensityMatrix, partial_trace
from .measures import nm_report
from .trajectories import (
    UnsupportedScheduleError,
    _builtin_setup,
    _evolve_block,
    _uniform_block,
    sample_trajectory,
)

_FIGURES = {
    "1a": chain_schedule,
    "1b": overlap_schedule,
    "1d": single_molecule_schedule,
    "5": advanced_overlap_schedule,
}


class ConfigError(Exception):
    """Bad flags, bad files, bad numbers in the configuration."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _mat(m: np.ndarray) -> list:
    return [[_pair(x) for x in row] for row in m]


def _parse_state(text: str, flag: str) -> DensityMatrix:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"{flag} expects p00,p11,re01,im01 (got {len(parts)} fields)")
    try:
        p00, p11, re01, im01 = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{flag}: fields must be real numbers") from None
    m = np.array([[p00, re01 + 1j * im01], [re01 - 1j * im01, p11]], dtype=complex)
    try:
        dm = DensityMatrix(m, ("sys",))
        dm.validate_positive()
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from None
    return dm


def _load_schedule(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            records = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"--schedule: cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--schedule: {path} is not valid JSON: {exc}") from None
    if not isinstance(records, list):
        raise ConfigError("--schedule: file must hold a JSON list of events")
    try:
        return schedule_from_records(records)
    except ValueError as exc:
        raise ConfigError(f"--schedule: {exc}") from None


def _build_model(args) -> ChainModel:
    if args.model == CUSTOM:
        if not getattr(args, "schedule", None):
            raise ConfigError("--model custom requires --schedule")
        schedule = _load_schedule(args.schedule)
        width = window_width(schedule)
        if width > WINDOW_QUBIT_CAP:
            raise ConfigError(
                f"schedule needs a {width}-qubit window; the engine cap is {WINDOW_QUBIT_CAP}"
            )
        gate = sqrt_xor_gate() if getattr(args, "gate", "xor") == "sqrt-xor" else xor_gate()
        return custom_chain(gate, schedule, phi=args.phi)
    if getattr(args, "schedule", None):
        raise ConfigError("--schedule only applies to --model custom")
    try:
        return ChainModel(args.model, args.phi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _memory_arg(args, model):
    mem_text = getattr(args, "memory", None)
    if mem_text is None:
        return None
    if model.kind not in (REPEATED_XOR, SQRT_XOR):
        raise ConfigError(f"--memory does not apply to --model {model.kind}")
    return _parse_state(mem_text, "--memory")


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        n = args.threads
    else:
        raw = os.environ.get("NMCHAIN_THREADS", "1")
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"NMCHAIN_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def _cmd_simulate(args) -> int:
    model = _build_model(args)
    rho0 = _parse_state(args.initial, "--initial")
    mem0 = _memory_arg(args, model)
    if model.kind == CUSTOM:
        steps = args.steps if args.steps is not None else model.schedule.horizon
        if steps > model.schedule.horizon:
            raise ConfigError(
                f"--steps {steps} exceeds the schedule horizon {model.schedule.horizon}"
            )
    else:
        if args.steps is None:
            raise ConfigError("--steps is required for the built-in models")
        steps = args.steps
    if steps < 0:
        raise ConfigError("--steps must be non-negative")

    rows = []
    if model.kind == MARKOV_XOR:
        state = rho0
        for t in range(steps + 1):
            rows.append({"t": t, "system": state, "compound": None})
            state = markov_xor_step(state, model.phi)
    elif model.kind in (REPEATED_XOR, SQRT_XOR):
        compounds = simulate_embedding(model, rho0, steps, mem0)
        for t, comp in enumerate(compounds):
            rows.append({"t": t, "system": partial_trace(comp, "sys"), "compound": comp})
    else:
        marginals = run_window(model, rho0, steps)
        for t, st in enumerate(marginals):
            rows.append({"t": t, "system": st, "compound": None})

    with_delta = model.kind == SQRT_XOR
    if args.format == "json":
        for row in rows:
            rec = {"t": row["t"], "rho_system": _mat(row["system"].matrix)}
            if row["compound"] is not None:
                rec["rho_compound"] = _mat(row["compound"].matrix)
            if with_delta:
                rec["delta"] = _pair(delta(row["compound"]))
            print(json.dumps(rec))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        header = ["t", "p00", "p11", "re01", "im01"]
        if with_delta:
            header += ["delta_re", "delta_im"]
        writer.writerow(header)
        for row in rows:
            m = row["system"].matrix
            vals = [str(row["t"]), _fmt(m[0, 0].real), _fmt(m[1, 1].real), _fmt(m[0, 1].real), _fmt(m[0, 1].imag)]
            if with_delta:
                d = delta(row["compound"])
                vals += [_fmt(d.real), _fmt(d.imag)]
            writer.writerow(vals)
    return 0


def _cmd_measures(args) -> int:
    model = _build_model(args)
    rho0 = _parse_state(args.initial, "--initial")
    report = nm_report(model, rho0).clamped()
    basis = None
    if report.argmax_basis is not None:
        basis = {"theta": report.argmax_basis.theta, "psi": report.argmax_basis.psi}
    out = {
        "count_qubits": report.count_qubits,
        "mutual_info": report.mutual_info,
        "classical_J": report.classical_J,
        "discord": report.discord,
        "argmax_basis": basis,
        "classification": report.classification,
    }
    if args.format == "json":
        print(json.dumps(out))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["count_qubits", "mutual_info", "classical_J", "discord", "theta", "psi", "classification"])
        writer.writerow([
            report.count_qubits,
            "" if report.mutual_info is None else _fmt(report.mutual_info),
            "" if report.classical_J is None else _fmt(report.classical_J),
            "" if report.discord is None else _fmt(report.discord),
            "" if basis is None else _fmt(basis["theta"]),
            "" if basis is None else _fmt(basis["psi"]),
            report.classification,
        ])
    return 0


def _cmd_divisibility(args) -> int:
    model = _build_model(args)
    mem0 = _memory_arg(args, model)
    steps = args.steps if args.steps is not None else 10
    if steps < 1:
        raise ConfigError("--steps must be at least 1")
    if model.kind == CUSTOM and steps > model.schedule.horizon:
        raise ConfigError(f"--steps {steps} exceeds the schedule horizon {model.schedule.horizon}")
    mem_arr = mem0.matrix if mem0 is not None else None
    maps = system_maps(model, steps, mem_arr)
    results = divisibility_scan(maps, cp_tol=args.tol_cp)
    if args.format == "json":
        for t, step in enumerate(results, start=1):
            print(json.dumps({
                "t": t,
                "exists": step.exists,
                "min_choi_eig": step.min_choi_eig,
                "smallest_singular": step.smallest_singular,
            }))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["t", "exists", "min_choi_eig"])
        for t, step in enumerate(results, start=1):
            if step.exists is None:
                writer.writerow([t, "indeterminate", ""])
            else:
                writer.writerow([t, "true" if step.exists else "false", _fmt(step.min_choi_eig)])
    return 0


def _cmd_trajectories(args) -> int:
    model = _build_model(args)
    rho0 = _parse_state(args.initial, "--initial")
    if args.steps is None:
        raise ConfigError("--steps is required")
    if args.steps < 1:
        raise ConfigError("--steps must be at least 1")
    samples = args.samples if args.samples is not None else 1
    if samples < 1:
        raise ConfigError("--samples must be at least 1")
    seed = args.seed if args.seed is not None else 0
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("--seed must fit an unsigned 64-bit integer")
    threads = _threads(args)

    if model.kind == CUSTOM:
        records = [
            sample_trajectory(model, rho0, args.steps, seed, index=i, keep_states=True)
            for i in range(samples)
        ]
        outcome_rows = [list(r.outcomes) for r in records]
        log_ps = [r.log_probability for r in records]
        finals = np.stack([r.conditional_states[-1].matrix for r in records])
        mean = finals.mean(axis=0)
        width = max(len(r) for r in outcome_rows)
        freqs = []
        for t in range(width):
            counts: dict = {}
            for row in outcome_rows:
                if t < len(row):
                    counts[row[t]] = counts.get(row[t], 0) + 1
            freqs.append({str(k): v for k, v in sorted(counts.items())})
    else:
        kraus, _, start = _builtin_setup(model)
        ops = np.stack(kraus.operators)
        state0 = start(rho0)
        threads = max(1, min(threads, samples))
        bounds = np.linspace(0, samples, threads + 1).astype(int)
        chunks = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
        parts = []
        for lo, hi in chunks:
            uniforms = _uniform_block(seed, lo, hi, args.steps)
            parts.append(_evolve_block(ops, state0, uniforms))
        states = np.concatenate([p[0] for p in parts])
        log_p_arr = np.concatenate([p[1] for p in parts])
        outcomes = np.concatenate([p[2] for p in parts])
        outcome_rows = [[int(x) for x in row] for row in outcomes]
        log_ps = [float(x) for x in log_p_arr]
        mean = states.mean(axis=0)
        freqs = []
        for t in range(args.steps):
            counts = np.bincount(outcomes[:, t], minlength=len(kraus.labels))
            freqs.append({str(kraus.labels[k]): int(counts[k]) for k in range(len(kraus.labels))})

    if args.format == "json":
        for row, lp in zip(outcome_rows, log_ps):
            print(json.dumps({"outcomes": row, "log_p": lp}))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["outcomes", "log_p"])
        for row, lp in zip(outcome_rows, log_ps):
            writer.writerow(["".join(str(x) for x in row), _fmt(lp)])
    summary = {
        "n_samples": samples,
        "seed": seed,
        "mean_state": _mat(mean),
        "outcome_frequencies": freqs,
    }
    print(json.dumps(summary), file=sys.stderr)
    return 0


def _cmd_schedule(args) -> int:
    if args.horizon < 1:
        raise ConfigError("--horizon must be at least 1")
    sched = _FIGURES[args.figure](args.horizon)
    print(json.dumps(sched.to_records()))
    print(f"satellite_count = {satellite_count(sched)}", file=sys.stderr)
    return 0


def _add_model_flags(p, with_memory=True):
    p.add_argument("--model", required=True, choices=[MARKOV_XOR, REPEATED_XOR, SQRT_XOR, CUSTOM],
                   help="collision model")
    p.add_argument("--phi", required=True, type=float, help="molecule preparation angle (radians)")
    p.add_argument("--schedule", help="JSON schedule file (custom model only)")
    p.add_argument("--gate", choices=["xor", "sqrt-xor"], default="xor",
                   help="collision gate for --model custom (default xor)")
    if with_memory:
        p.add_argument("--memory", help="initial memory state p00,p11,re01,im01 (two-collision models)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmchain",
        description="Collision chains of qubits: simulate, embed, and measure memory effects.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="stream per-step states")
    _add_model_flags(p)
    p.add_argument("--steps", type=int, help="number of collisions (default: schedule horizon for custom)")
    p.add_argument("--initial", required=True, help="system state p00,p11,re01,im01")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("measures", help="memory count and stationary correlation measures")
    _add_model_flags(p, with_memory=False)
    p.add_argument("--initial", required=True, help="system state p00,p11,re01,im01")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_measures)

    p = sub.add_parser("divisibility", help="stepwise CP checks of the reduced system maps")
    _add_model_flags(p)
    p.add_argument("--steps", type=int, help="number of steps to scan (default 10)")
    p.add_argument("--tol-cp", type=float, default=1e-9, help="CP tolerance on the Choi spectrum")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_divisibility)

    p = sub.add_parser("trajectories", help="sample selective readout records")
    _add_model_flags(p, with_memory=False)
    p.add_argument("--steps", type=int, help="trajectory length in collisions")
    p.add_argument("--initial", required=True, help="system state p00,p11,re01,im01")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--samples", type=int, help="number of trajectories (default 1)")
    p.add_argument("--threads", type=int, help="worker threads (default: NMCHAIN_THREADS or 1)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_trajectories)

    p = sub.add_parser("schedule", help="print a built-in collision layout")
    p.add_argument("--figure", required=True, choices=sorted(_FIGURES), help="layout name")
    p.add_argument("--horizon", required=True, type=int, help="number of steps")
    p.set_defaults(func=_cmd_schedule)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedScheduleError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return 4
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numeric invariant violated: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
