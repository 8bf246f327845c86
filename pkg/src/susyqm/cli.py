"""Command-line interface.

Subcommands:

* ``spectrum``   -- exact eigenvalues and a SUSY-breaking verdict
* ``pauli``      -- Pauli-term count (and optional full term list)
* ``avqe``       -- run the adaptive VQE, write trace JSON/CSV
* ``vqe``        -- optimize a fixed ansatz, exact or shot-sampled
* ``noise-scan`` -- full vs 4-gate-truncated ansatz error across a
  two-qubit depolarizing noise grid

Every command accepts --out FILE to write a JSON run record that echoes
the full effective configuration next to the results.  Relative output
paths are placed under $SUSYQM_OUTDIR when that variable is set.
shots = 0 selects the exact statevector path; any nonzero shot count
switches to sampled estimation, which is where the noise flags apply.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .avqe import (
    AvqeAborted,
    avqe_run,
    extrapolate_ansatz,  # noqa: F401  (re-exported for library users of the CLI module)
    truncate_ansatz,
)
from .model import SuperpotentialSpec, build_hamiltonian, exact_spectrum
from .opt import OptimizerConfig, minimize
from .pauli import decompose, group_commuting
from .sim import Ansatz, NoiseModel, expectation, prepare_state, sample_expectation


@dataclass
class RunRecord:
    command: str
    config: dict
    outputs: dict
    timestamp: str | None
    seed: int | None
    artifact_version: str = __version__


def _cutoff_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("lambda must be a power of two >= 2")
    if value < 2 or value & (value - 1):
        raise argparse.ArgumentTypeError("lambda must be a power of two >= 2")
    return value


def _noise_arg(text: str) -> NoiseModel:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("noise must be p1,p2,r01,r10")
    try:
        p1, p2, r01, r10 = (float(p) for p in parts)
        return NoiseModel(p1=p1, p2=p2, r01=r01, r10=r10)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _grid_arg(text: str) -> list[float]:
    items = [p for p in text.split(",") if p.strip()]
    try:
        return [float(p) for p in items]
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be comma-separated numbers")


def _resolve(path: str) -> Path:
    p = Path(path)
    outdir = os.environ.get("SUSYQM_OUTDIR")
    if outdir and not p.is_absolute():
        p = Path(outdir) / p
    return p


def _write_record(record: RunRecord, path: str) -> None:
    target = _resolve(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(asdict(record), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    target = _resolve(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _spec_from(args) -> SuperpotentialSpec:
    return SuperpotentialSpec(kind=args.superpotential, m=args.m, g=args.g, mu=args.mu)


def _spec_config(args) -> dict:
    return {
        "superpotential": args.superpotential,
        "lambda": args.cutoff,
        "m": args.m,
        "g": args.g,
        "mu": args.mu,
    }


def cmd_spectrum(args) -> int:
    spec = _spec_from(args)
    h = build_hamiltonian(spec, args.cutoff)
    evals = exact_spectrum(h, k=args.k)
    print(f"superpotential {spec.kind}, cutoff {args.cutoff} ({h.n_qubits} qubits)")
    for i, e in enumerate(evals):
        print(f"E_{i} = {e:+.10f}")
    e0 = float(evals[0])
    if e0 < args.verdict_tol:
        verdict = "SUSY preserved (E0 ≈ 0)"
    else:
        verdict = "SUSY broken (E0 > 0, check degeneracy)"
    detail = f"E0 = {e0:.6e}"
    if args.k >= 2:
        detail += f", E1 - E0 = {float(evals[1]) - e0:.3e}"
    advisory = args.cutoff < 8
    print(f"{verdict}  [{detail}]")
    if advisory:
        print("note: cutoff < 8, truncation artifacts possible; verdict is advisory")
    if args.out:
        record = RunRecord(
            command="spectrum",
            config={**_spec_config(args), "k": args.k, "verdict_tol": args.verdict_tol},
            outputs={
                "eigenvalues": [float(e) for e in evals],
                "verdict": verdict,
                "advisory": advisory,
            },
            timestamp=_now(),
            seed=None,
        )
        _write_record(record, args.out)
    return 0


def cmd_pauli(args) -> int:
    spec = _spec_from(args)
    h = build_hamiltonian(spec, args.cutoff)
    psum = decompose(h, threshold=args.threshold)
    groups = group_commuting(psum)
    print(f"superpotential {spec.kind}, cutoff {args.cutoff} ({h.n_qubits} qubits)")
    print(f"N_P = {len(psum)}")
    print(f"measurement groups: {len(groups)}")
    if args.emit_json:
        print(json.dumps(psum.to_json(), indent=2))
    if args.out:
        record = RunRecord(
            command="pauli",
            config={**_spec_config(args), "threshold": args.threshold},
            outputs={
                "n_terms": len(psum),
                "n_groups": len(groups),
                "terms": psum.to_json(),
            },
            timestamp=_now(),
            seed=None,
        )
        _write_record(record, args.out)
    return 0


def _avqe_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        max_evals=args.max_evals, restarts=args.restarts, seed=args.seed
    )


def _trace_csv_rows(trace) -> list[list]:
    return [
        [s.step_index, s.n_params, repr(float(s.energy_after)), repr(trace.e_exact)]
        for s in trace.steps
    ]


def cmd_avqe(args) -> int:
    spec = _spec_from(args)
    config = {
        **_spec_config(args),
        "threshold": args.threshold,
        "max_gates": args.max_gates,
        "restarts": args.restarts,
        "max_evals": args.max_evals,
        "seed": args.seed,
    }
    try:
        trace = avqe_run(
            spec,
            args.cutoff,
            threshold=args.threshold,
            max_gates=args.max_gates,
            opt_config=_avqe_config(args),
        )
    except AvqeAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        record = RunRecord(
            command="avqe",
            config=config,
            outputs={"trace": exc.trace.to_json(), "aborted": True},
            timestamp=None,
            seed=args.seed,
        )
        if args.out:
            _write_record(record, args.out)
        if args.csv:
            _write_csv(
                args.csv, ["step", "n_gates", "energy", "e_exact"], _trace_csv_rows(exc.trace)
            )
        return 1
    labels = " ".join(g.label() for g in trace.final_ansatz.gates)
    print(f"superpotential {spec.kind}, cutoff {args.cutoff}")
    print(f"ansatz ({trace.final_ansatz.n_params} gates): {labels}")
    print(
        f"final energy {trace.final_energy:+.8f}  exact {trace.e_exact:+.8f}  "
        f"|diff| {abs(trace.final_energy - trace.e_exact):.2e}"
    )
    # the trace record carries no timestamp so identical runs are
    # byte-identical files
    if args.out:
        record = RunRecord(
            command="avqe",
            config=config,
            outputs={"trace": trace.to_json(), "aborted": False},
            timestamp=None,
            seed=args.seed,
        )
        _write_record(record, args.out)
    if args.csv:
        _write_csv(
            args.csv, ["step", "n_gates", "energy", "e_exact"], _trace_csv_rows(trace)
        )
    return 0


def _load_ansatz_theta(args, spec) -> tuple[Ansatz, np.ndarray]:
    """Resolve --ansatz into a circuit and a starting parameter vector."""
    if args.ansatz in ("full", "trunc4"):
        trace = avqe_run(
            spec,
            args.cutoff,
            threshold=args.threshold,
            max_gates=args.max_gates,
            opt_config=_avqe_config(args),
        )
        if args.ansatz == "full":
            return trace.final_ansatz, trace.final_theta
        truncated = truncate_ansatz(trace.final_ansatz, 4)
        return truncated, np.zeros(truncated.n_params)
    path = _resolve(args.ansatz)
    data = json.loads(path.read_text(encoding="utf-8"))
    ansatz = Ansatz.from_json(data)
    return ansatz, np.array([g.theta for g in ansatz.gates])


def cmd_vqe(args) -> int:
    spec = _spec_from(args)
    noise = args.noise if args.noise is not None else NoiseModel()
    if args.shots == 0 and not noise.is_zero:
        print("error: noise requires the sampled path (set --shots > 0)", file=sys.stderr)
        return 2
    if args.shots < 0:
        print("error: shots must be >= 0", file=sys.stderr)
        return 2
    h = build_hamiltonian(spec, args.cutoff)
    e_exact = float(exact_spectrum(h, k=1)[0])
    ansatz, theta0 = _load_ansatz_theta(args, spec)
    if ansatz.n_qubits != h.n_qubits:
        print(
            f"error: ansatz has {ansatz.n_qubits} qubits, Hamiltonian needs {h.n_qubits}",
            file=sys.stderr,
        )
        return 2

    def objective(vec):
        return expectation(prepare_state(ansatz, vec), h)

    result = minimize(objective, theta0, _avqe_config(args))
    outputs = {
        "ansatz": ansatz.to_json(),
        "theta_opt": [float(t) for t in result.theta_opt],
        "energy": result.energy,
        "evals": result.evals,
        "e_exact": e_exact,
        "error": abs(result.energy - e_exact),
    }
    labels = " ".join(g.label() for g in ansatz.gates)
    print(f"superpotential {spec.kind}, cutoff {args.cutoff}")
    print(f"ansatz ({ansatz.n_params} gates): {labels}")
    print(f"optimized energy {result.energy:+.8f}  exact {e_exact:+.8f}")
    if args.shots > 0:
        psum = decompose(h)
        estimate, stderr = sample_expectation(
            None,
            psum,
            shots=args.shots,
            noise=noise,
            seed=args.seed,
            prep=ansatz,
            prep_theta=result.theta_opt,
        )
        outputs["sampled_energy"] = estimate
        outputs["stderr"] = stderr
        outputs["shots"] = args.shots
        print(f"sampled energy {estimate:+.8f} +/- {stderr:.8f} ({args.shots} shots)")
    if args.out:
        record = RunRecord(
            command="vqe",
            config={
                **_spec_config(args),
                "ansatz": args.ansatz,
                "shots": args.shots,
                "noise": asdict(noise),
                "threshold": args.threshold,
                "max_gates": args.max_gates,
                "restarts": args.restarts,
                "max_evals": args.max_evals,
                "seed": args.seed,
            },
            outputs=outputs,
            timestamp=_now(),
            seed=args.seed,
        )
        _write_record(record, args.out)
    return 0


def cmd_noise_scan(args) -> int:
    if not args.p2_grid:
        print("error: --p2-grid must contain at least one value", file=sys.stderr)
        return 2
    if args.shots < 1:
        print("error: noise-scan needs --shots >= 1", file=sys.stderr)
        return 2
    spec = _spec_from(args)
    h = build_hamiltonian(spec, args.cutoff)
    e_exact = float(exact_spectrum(h, k=1)[0])
    psum = decompose(h)
    trace = avqe_run(
        spec,
        args.cutoff,
        threshold=args.threshold,
        max_gates=args.max_gates,
        opt_config=_avqe_config(args),
    )
    full_ansatz, full_theta = trace.final_ansatz, trace.final_theta
    truncated = truncate_ansatz(full_ansatz, 4)

    def objective(vec):
        return expectation(prepare_state(truncated, vec), h)

    trunc_result = minimize(
        objective, np.zeros(truncated.n_params), _avqe_config(args)
    )
    variants = [
        ("full", full_ansatz, full_theta),
        ("trunc4", truncated, trunc_result.theta_opt),
    ]
    rows = []
    print(
        f"superpotential {spec.kind}, cutoff {args.cutoff}: "
        f"full = {full_ansatz.n_params} gates, trunc4 = {truncated.n_params} gates"
    )
    print(f"{'p2':>10}  {'ansatz':>8}  mean_energy_error")
    for gi, p2 in enumerate(args.p2_grid):
        noise = NoiseModel(p1=args.p1, p2=p2, r01=args.r01, r10=args.r10)
        for vi, (name, ansatz, theta) in enumerate(variants):
            errors = np.empty(args.seeds)
            for si in range(args.seeds):
                seed = int(
                    np.random.SeedSequence([args.seed, gi, vi, si]).generate_state(1)[0]
                )
                estimate, _ = sample_expectation(
                    None,
                    psum,
                    shots=args.shots,
                    noise=noise,
                    seed=seed,
                    prep=ansatz,
                    prep_theta=theta,
                )
                errors[si] = abs(estimate - e_exact)
            mean_error = float(errors.mean())
            rows.append([repr(float(p2)), name, repr(mean_error)])
            print(f"{p2:>10g}  {name:>8}  {mean_error:.6f}")
    if args.csv:
        _write_csv(args.csv, ["p2", "ansatz_variant", "mean_energy_error"], rows)
    if args.out:
        record = RunRecord(
            command="noise-scan",
            config={
                **_spec_config(args),
                "p2_grid": list(args.p2_grid),
                "p1": args.p1,
                "r01": args.r01,
                "r10": args.r10,
                "shots": args.shots,
                "seeds": args.seeds,
                "threshold": args.threshold,
                "max_gates": args.max_gates,
                "restarts": args.restarts,
                "max_evals": args.max_evals,
                "seed": args.seed,
            },
            outputs={
                "rows": [
                    {
                        "p2": float(r[0]),
                        "ansatz_variant": r[1],
                        "mean_energy_error": float(r[2]),
                    }
                    for r in rows
                ],
                "full_ansatz": full_ansatz.to_json(),
                "trunc4_ansatz": truncated.to_json(),
                "e_exact": e_exact,
            },
            timestamp=_now(),
            seed=args.seed,
        )
        _write_record(record, args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--superpotential", required=True, choices=("HO", "AHO", "DW"),
        help="which superpotential to build",
    )
    parser.add_argument(
        "--lambda", dest="cutoff", required=True, type=_cutoff_arg,
        help="boson mode cutoff; a power of two >= 2",
    )
    parser.add_argument("--m", type=float, default=1.0, help="mass coupling (default 1)")
    parser.add_argument("--g", type=float, default=1.0, help="interaction coupling (default 1)")
    parser.add_argument("--mu", type=float, default=1.0, help="well offset coupling (default 1)")
    parser.add_argument("--out", default=None, help="write a JSON run record here")


def _add_opt_flags(parser: argparse.ArgumentParser, restarts_default: int) -> None:
    parser.add_argument("--threshold", type=float, default=1e-6,
                        help="adaptive-loop energy convergence threshold (default 1e-6)")
    parser.add_argument("--max-gates", type=int, default=30,
                        help="maximum ansatz length (default 30)")
    parser.add_argument("--restarts", type=int, default=restarts_default,
                        help=f"optimizer restarts (default {restarts_default})")
    parser.add_argument("--max-evals", type=int, default=2000,
                        help="objective evaluations per restart (default 2000)")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="susyqm",
        description="Supersymmetric quantum mechanics on qubits: spectra, "
        "Pauli decompositions, and adaptive VQE studies.",
        epilog="Relative --out/--csv paths are placed under $SUSYQM_OUTDIR "
        "when set. CSV columns: avqe steps -> step,n_gates,energy,e_exact; "
        "noise-scan -> p2,ansatz_variant,mean_energy_error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="exact eigenvalues and SUSY verdict")
    _add_common(p)
    p.add_argument("--k", type=int, default=4, help="how many low eigenvalues (default 4)")
    p.add_argument("--verdict-tol", type=float, default=1e-3,
                   help="E0 below this reads as unbroken SUSY (default 1e-3)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("pauli", help="Pauli decomposition summary")
    _add_common(p)
    p.add_argument("--threshold", type=float, default=1e-12,
                   help="coefficient pruning threshold (default 1e-12)")
    p.add_argument("--json", dest="emit_json", action="store_true",
                   help="print the full term list as JSON")
    p.set_defaults(func=cmd_pauli)

    p = sub.add_parser("avqe", help="adaptive ansatz construction")
    _add_common(p)
    _add_opt_flags(p, restarts_default=100)
    p.add_argument("--csv", default=None, help="write per-step energies as CSV")
    p.set_defaults(func=cmd_avqe)

    p = sub.add_parser("vqe", help="optimize one ansatz, optionally shot-sampled")
    _add_common(p)
    _add_opt_flags(p, restarts_default=100)
    p.add_argument("--ansatz", default="full",
                   help="'full', 'trunc4', or a path to an ansatz JSON file")
    p.add_argument("--shots", type=int, default=0,
                   help="0 = exact statevector, otherwise sampled (default 0)")
    p.add_argument("--noise", type=_noise_arg, default=None,
                   help="p1,p2,r01,r10 (sampled path only)")
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("noise-scan",
                       help="full vs truncated ansatz error over a p2 grid")
    _add_common(p)
    _add_opt_flags(p, restarts_default=10)
    p.add_argument("--p2-grid", type=_grid_arg,
                   default=[0.0, 0.002, 0.005, 0.01, 0.02, 0.05],
                   help="comma-separated two-qubit depolarizing probabilities")
    p.add_argument("--p1", type=float, default=0.0, help="one-qubit gate noise (default 0)")
    p.add_argument("--r01", type=float, default=0.0, help="readout 0->1 flip rate (default 0)")
    p.add_argument("--r10", type=float, default=0.0, help="readout 1->0 flip rate (default 0)")
    p.add_argument("--shots", type=int, default=4096, help="shots per estimate (default 4096)")
    p.add_argument("--seeds", type=int, default=20,
                   help="independent estimates per grid point (default 20)")
    p.add_argument("--csv", default=None, help="write the scan table as CSV")
    p.set_defaults(func=cmd_noise_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
