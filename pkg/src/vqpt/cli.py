"""Command-line front end.

Every command resolves its flags, derives all randomness from the master
seed, writes plain CSV/JSON outputs into --out, and records a manifest
from which `vqpt rerun` reproduces the run byte-identically. Exit codes:
0 success, 1 numeric failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import AnsatzSpec, Variant, apply_ansatz
from .estimator import EXACT, ShotPlan, uvqsvd_eigenphase
from .qcore import Rng, StateVector, UnitaryMatrix, haar_unitary
from .training import TrainConfig, depth_scan, fit_exponential, train
from .qpuf import ACTORS, ExperimentConfig, run_experiment, write_reports_csv

MANIFEST_SCHEMA = "vqpt.manifest/1"
CSV_SCHEMAS = {
    "trace": ["iteration", "cost", "fidelity", "similarity"],
    "eigenpairs": ["index", "phase", "magnitude", "eigvec_fidelity"],
    "scan_runs": ["depth", "target", "iterations", "reached"],
    "scan_summary": ["depth", "aggregate_iterations", "resource", "is_opt"],
    "dopt": ["n", "d_opt", "resource"],
    "fit": ["a", "b", "c", "rms_residual", "converged"],
    "attack": ["t", "a", "actor", "mean_deviation", "std_deviation", "users", "forgeries"],
}


def _int_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    return values


def _plan(shots: int, rng: Rng) -> ShotPlan:
    return EXACT if shots == 0 else ShotPlan(shots, rng)


def _write_manifest(out: Path, command: str, flags: dict, seed: int,
                    started: str, outputs: list[str], summary: dict) -> None:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "flags": flags,
        "seed": seed,
        "version": __version__,
        "started_at": started,
        "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": sorted(outputs),
        "csv_schemas": CSV_SCHEMAS,
        "summary": summary,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Training commands.


def _train_flags(args, variant: str) -> dict:
    return {
        "qubits": args.qubits, "depth": args.depth, "iters": args.iters,
        "shots": args.shots, "seed": args.seed, "targets": args.targets,
        "threshold": args.threshold, "lr": args.lr, "variant": variant,
        "diagonal_target": getattr(args, "diagonal_target", False),
        "oracle_check": getattr(args, "oracle_check", False),
    }


def _sample_target(kind: str, dim: int, rng: Rng) -> UnitaryMatrix:
    if kind == "diagonal":
        phases = rng.uniform(0.0, 2.0 * np.pi, dim)
        return UnitaryMatrix(dim, np.diag(np.exp(1j * phases)))
    return haar_unitary(dim, rng)


def _run_training_command(args, algorithm: str) -> int:
    out = _prepare_out(args)
    started = _now()
    variant = Variant.PTVQC if algorithm == "ptvqc" else Variant.UVQSVD
    spec = AnsatzSpec(args.qubits, args.depth, variant)
    master = Rng(args.seed)
    kind = "diagonal" if getattr(args, "diagonal_target", False) else "haar"

    outputs: list[str] = []
    all_reached = True
    aborted = False
    final_costs: list[float] = []
    best_fidelities: list[float] = []
    for idx in range(args.targets):
        target = _sample_target(kind, 2 ** args.qubits, master.child(0, idx))
        cfg = TrainConfig(max_iters=args.iters, cost_threshold=args.threshold,
                          learning_rate=args.lr,
                          plan=_plan(args.shots, master.child(1, idx)),
                          seed=master.derive_seed(2, idx))
        trace = train(algorithm, target, spec, cfg)
        name = f"trace_t{idx:02d}.csv"
        trace.write_csv(out / name)
        outputs.append(name)
        checkpoint = f"params_t{idx:02d}.json"
        with open(out / checkpoint, "w", encoding="utf-8") as fh:
            json.dump({"spec": spec.to_json(), "values": trace.final_params.to_json()},
                      fh, sort_keys=True)
            fh.write("\n")
        outputs.append(checkpoint)
        all_reached &= trace.reached
        aborted |= trace.aborted
        if trace.records:
            final_costs.append(trace.records[-1].cost)
            best_fidelities.append(max(r.fidelity for r in trace.records))
        if algorithm == "uvqsvd":
            rows = []
            true_vecs = None
            if args.oracle_check:
                _, true_vecs = np.linalg.eig(target.mat)
            for i in range(2 ** args.qubits):
                mag, phase = uvqsvd_eigenphase(target, spec, trace.final_params, i, EXACT)
                if true_vecs is not None:
                    learned = apply_ansatz(spec, trace.final_params,
                                           StateVector.basis(args.qubits, i)).amps
                    fid = float(np.max(np.abs(true_vecs.conj().T @ learned) ** 2))
                else:
                    fid = float("nan")
                rows.append((i, float(phase), float(mag), fid))
            name = f"eigenpairs_t{idx:02d}.csv"
            _write_csv(out / name, CSV_SCHEMAS["eigenpairs"], rows)
            outputs.append(name)

    summary = {
        "all_reached": all_reached, "aborted": aborted,
        "final_costs": final_costs, "best_fidelities": best_fidelities,
    }
    _write_manifest(out, algorithm, _train_flags(args, variant.value), args.seed,
                    started, outputs, summary)
    if aborted:
        return 1
    return 0 if all_reached else 1


def cmd_ptvqc(args) -> int:
    return _run_training_command(args, "ptvqc")


def cmd_uvqsvd(args) -> int:
    return _run_training_command(args, "uvqsvd")


# ---------------------------------------------------------------------------
# Depth scan.


def cmd_depth_scan(args) -> int:
    out = _prepare_out(args)
    started = _now()
    flags = {
        "algorithm": args.algorithm, "qubits": args.qubits, "depths": args.depths,
        "targets": args.targets, "threshold": args.threshold, "iters": args.iters,
        "lr": args.lr, "shots": args.shots, "selftest": args.selftest,
    }
    outputs: list[str] = []
    summary: dict = {}

    if args.selftest:
        # Round-trip the fit on synthetic noiseless data.
        truth = (0.5, 0.9, 1.0)
        ns = list(range(1, 7))
        pts = [(n, truth[0] * np.exp(truth[1] * n) + truth[2]) for n in ns]
        fit = fit_exponential(pts)
        recovered = (abs(fit.a - truth[0]) < 1e-6 and abs(fit.b - truth[1]) < 1e-6
                     and abs(fit.c - truth[2]) < 1e-6)
        _write_csv(out / "fit.csv", CSV_SCHEMAS["fit"],
                   [(fit.a, fit.b, fit.c, fit.residual, int(fit.converged))])
        outputs.append("fit.csv")
        summary = {"selftest": True, "recovered": recovered,
                   "fit": [fit.a, fit.b, fit.c], "truth": list(truth)}
        _write_manifest(out, "depth-scan", flags, args.seed, started, outputs, summary)
        return 0 if recovered else 1

    if not args.qubits or not args.depths:
        print("depth-scan: --qubits and --depths must be non-empty", file=sys.stderr)
        return 2

    master = Rng(args.seed)
    dopt_rows = []
    for n in args.qubits:
        result = depth_scan(args.algorithm, n, args.depths, n_targets=args.targets,
                            cost_threshold=args.threshold, max_iters=args.iters,
                            learning_rate=args.lr,
                            plan=_plan(args.shots, master.child(3, n)),
                            seed=master.derive_seed(4, n))
        runs_name, summary_name = f"scan_n{n}_runs.csv", f"scan_n{n}_summary.csv"
        result.write_runs_csv(out / runs_name)
        result.write_summary_csv(out / summary_name)
        outputs += [runs_name, summary_name]
        dopt_rows.append((n, result.d_opt, float(result.resource[result.d_opt])))
    _write_csv(out / "dopt.csv", CSV_SCHEMAS["dopt"], dopt_rows)
    outputs.append("dopt.csv")
    summary["d_opt"] = {str(n): d for n, d, _ in dopt_rows}

    if len(dopt_rows) >= 3:
        fit = fit_exponential([(n, d) for n, d, _ in dopt_rows])
        _write_csv(out / "fit.csv", CSV_SCHEMAS["fit"],
                   [(fit.a, fit.b, fit.c, fit.residual, int(fit.converged))])
        outputs.append("fit.csv")
        summary["fit"] = {"a": fit.a, "b": fit.b, "c": fit.c,
                          "rms_residual": fit.residual, "converged": fit.converged}
    _write_manifest(out, "depth-scan", flags, args.seed, started, outputs, summary)
    return 0


# ---------------------------------------------------------------------------
# Token attack experiment.


def cmd_qpuf_attack(args) -> int:
    out = _prepare_out(args)
    started = _now()
    actors = tuple(args.actors.split(","))
    for actor in actors:
        if actor not in ACTORS:
            print(f"qpuf-attack: unknown actor {actor!r}", file=sys.stderr)
            return 2
    flags = {
        "t": args.t, "a": args.a, "users": args.users, "actors": args.actors,
        "forgeries": args.forgeries, "attacker_depth": args.attacker_depth,
        "attacker_iters": args.attacker_iters, "attacker_shots": args.attacker_shots,
        "attacker_threshold": args.attacker_threshold, "random_haar": args.random_haar,
    }
    config = ExperimentConfig(
        users=args.users, actors=actors, forgeries_per_user=args.forgeries,
        attacker_depth={t: args.attacker_depth for t in args.t} if args.attacker_depth else None,
        attacker_iters=args.attacker_iters, attacker_shots=args.attacker_shots,
        attacker_threshold=args.attacker_threshold, random_forger_haar=args.random_haar,
        seed=args.seed)
    reports = run_experiment(args.t, args.a, config)
    write_reports_csv(reports, out / "attack.csv")
    summary = {
        "cells": len(args.t) * len(args.a),
        "failed_users": {f"{r.t},{r.a},{r.actor}": r.failed_users
                         for r in reports if r.failed_users},
    }
    _write_manifest(out, "qpuf-attack", flags, args.seed, started, ["attack.csv"], summary)
    if any(np.isnan(r.mean_deviation) for r in reports):
        return 1
    return 0


# ---------------------------------------------------------------------------
# Rerun from a manifest.


def cmd_rerun(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema") != MANIFEST_SCHEMA:
        print(f"rerun: unsupported manifest schema {manifest.get('schema')!r}", file=sys.stderr)
        return 2
    command = manifest["command"]
    flags = manifest["flags"]
    argv = [command]
    if command in ("ptvqc", "uvqsvd"):
        argv += ["--qubits", str(flags["qubits"]), "--depth", str(flags["depth"]),
                 "--iters", str(flags["iters"]), "--shots", str(flags["shots"]),
                 "--seed", str(manifest["seed"]), "--targets", str(flags["targets"]),
                 "--threshold", str(flags["threshold"]), "--lr", str(flags["lr"])]
        if flags.get("diagonal_target"):
            argv.append("--diagonal-target")
        if flags.get("oracle_check"):
            argv.append("--oracle-check")
    elif command == "depth-scan":
        argv += ["--algorithm", flags["algorithm"],
                 "--qubits", ",".join(map(str, flags["qubits"])),
                 "--depths", ",".join(map(str, flags["depths"])),
                 "--targets", str(flags["targets"]), "--threshold", str(flags["threshold"]),
                 "--iters", str(flags["iters"]), "--lr", str(flags["lr"]),
                 "--shots", str(flags["shots"]), "--seed", str(manifest["seed"])]
        if flags.get("selftest"):
            argv.append("--selftest")
    elif command == "qpuf-attack":
        argv += ["--t", ",".join(map(str, flags["t"])),
                 "--a", ",".join(map(str, flags["a"])),
                 "--users", str(flags["users"]), "--actors", flags["actors"],
                 "--attacker-iters", str(flags["attacker_iters"]),
                 "--attacker-shots", str(flags.get("attacker_shots", 1024)),
                 "--attacker-threshold", str(flags.get("attacker_threshold", 0.20)),
                 "--seed", str(manifest["seed"])]
        if flags.get("forgeries"):
            argv += ["--forgeries", str(flags["forgeries"])]
        if flags.get("attacker_depth"):
            argv += ["--attacker-depth", str(flags["attacker_depth"])]
        if flags.get("random_haar"):
            argv.append("--random-haar")
    else:
        print(f"rerun: unknown command {command!r}", file=sys.stderr)
        return 2
    argv += ["--out", args.out]
    return main(argv)


# ---------------------------------------------------------------------------
# Parser.


def _add_common_training_flags(sub, default_depth: int) -> None:
    sub.add_argument("--qubits", type=int, required=True)
    sub.add_argument("--depth", type=int, default=default_depth)
    sub.add_argument("--iters", type=int, default=100)
    sub.add_argument("--shots", type=int, default=0, help="0 means exact expectations")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--targets", type=int, default=1)
    sub.add_argument("--threshold", type=float, default=0.10)
    sub.add_argument("--lr", type=float, default=0.1)
    sub.add_argument("--out", type=str, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqpt",
                                     description="Variational unitary learning toolkit")
    parser.add_argument("--version", action="version", version=f"vqpt {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("ptvqc", help="learn a unitary with the interference cost")
    _add_common_training_flags(sub, default_depth=3)
    sub.set_defaults(func=cmd_ptvqc)

    sub = subs.add_parser("uvqsvd", help="learn eigenpairs up to phase")
    _add_common_training_flags(sub, default_depth=2)
    sub.add_argument("--diagonal-target", action="store_true",
                     help="sample a diagonal target instead of a Haar one")
    sub.add_argument("--oracle-check", action="store_true",
                     help="also score learned eigenvectors against exact eigenvectors")
    sub.set_defaults(func=cmd_uvqsvd)

    sub = subs.add_parser("depth-scan", help="resource scan over circuit depths")
    sub.add_argument("--algorithm", choices=("ptvqc", "uvqsvd"), default="ptvqc")
    sub.add_argument("--qubits", type=_int_list, default=[])
    sub.add_argument("--depths", type=_int_list, default=[])
    sub.add_argument("--targets", type=int, default=10)
    sub.add_argument("--threshold", type=float, default=0.10)
    sub.add_argument("--iters", type=int, default=100)
    sub.add_argument("--lr", type=float, default=0.1)
    sub.add_argument("--shots", type=int, default=0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--selftest", action="store_true",
                     help="fit round-trip on synthetic injected data")
    sub.add_argument("--out", type=str, required=True)
    sub.set_defaults(func=cmd_depth_scan)

    sub = subs.add_parser("qpuf-attack", help="token forgery experiment")
    sub.add_argument("--t", type=_int_list, required=True)
    sub.add_argument("--a", type=_int_list, required=True)
    sub.add_argument("--users", type=int, default=10)
    sub.add_argument("--actors", type=str, default="trusted,random,uvqsvd")
    sub.add_argument("--forgeries", type=int, default=None,
                     help="override the default 25 * 2^a rounds per user")
    sub.add_argument("--attacker-depth", type=int, default=None)
    sub.add_argument("--attacker-iters", type=int, default=300)
    sub.add_argument("--attacker-shots", type=int, default=1024,
                     help="adversary measurement budget per circuit; 0 = exact")
    sub.add_argument("--attacker-threshold", type=float, default=0.20)
    sub.add_argument("--random-haar", action="store_true",
                     help="uninformed forger resamples Haar states instead of |0...0>")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", type=str, required=True)
    sub.set_defaults(func=cmd_qpuf_attack)

    sub = subs.add_parser("rerun", help="re-execute a run from its manifest")
    sub.add_argument("--manifest", type=str, required=True)
    sub.add_argument("--out", type=str, required=True)
    sub.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"vqpt: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
