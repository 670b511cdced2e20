"""Command-line front-end.

Every subcommand runs the pipeline up to its stage and writes the artifacts
of the stages it ran: ``system.mtx``, ``design*.mtx``, ``trajectory*.csv``
and ``report.txt``.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import pipeline
from .errors import ConfigError, DivergenceError, DomainError, SoilObsError, SynthesisError
from .matrixio import dump_matrices, load_matrices, write_report
from .scenario import VARIANT_CHOICES, bundled_scenario, load_scenario
from .simulator import write_csv

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_DIVERGENCE = 4
EXIT_NUMERICAL = 5

STAGES = ("assemble", "check", "lipschitz", "synthesize", "simulate", "run")


class StageError(Exception):
    def __init__(self, stage, code, message):
        super().__init__(message)
        self.stage, self.code = stage, code


def _load(args):
    try:
        if args.scenario is None:
            raise ConfigError("--scenario is required")
        if args.scenario.startswith("bundled:"):
            sc = bundled_scenario(args.scenario.split(":", 1)[1])
        else:
            sc = load_scenario(args.scenario)
        reduced = True if (args.reduced or args.command == "reduce") else None
        return sc.with_overrides(
            variant=args.variant, reduced=reduced, dt=args.dt, t_end=args.t_end,
            full_state=True if args.full_state else None,
        )
    except (ConfigError, DomainError) as exc:
        raise StageError("config", EXIT_CONFIG, str(exc)) from exc


def _suffix(sc, variant):
    return f"_{variant}" if len(sc.variants()) > 1 else ""


def _system_matrices(model):
    s = model.system
    mats = {"A": s.A, "B": s.B, "C": s.C}
    if model.reduced:
        mats["C_d"] = s.C_d.reshape(-1, 1)
    else:
        mats.update(M=s.M, A_tilde=model.coupling.A_tilde, A_eff=model.A_eff)
    return mats


def execute(sc, out: Path, upto: str) -> int:
    """Run stages up to ``upto`` for a validated scenario; write artifacts to ``out``."""
    level = STAGES.index("simulate" if upto == "run" else upto)
    try:
        model = pipeline.build_model(sc)
    except DomainError as exc:
        raise StageError("config", EXIT_CONFIG, str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "scenario": {
            "name": sc.name,
            "model": "reduced" if sc.reduced else "full",
            "N": sc.grid.N,
            "n": model.system.n,
            "m": model.system.m,
            "p": model.system.C.shape[0],
            "y_axis": sc.grid.y_axis,
            "sensors": "; ".join(f"{j},{k}" for j, k in sc.grid.sensors),
        }
    }
    if sc.reduced:
        report["reduction"] = {
            "A_d": model.system.A_d,
            "initial_product": sc.initial_product,
            "initial_product_interpretation": "per-point product c_na*c_oc*c_mi feeding C_d",
            "C_d_entry": float(model.system.C_d[0]),
            "disturbance_gamma": sc.disturbance_gamma,
        }
    try:
        dump_matrices(out / "system.mtx", _system_matrices(model))
        if level >= 1:
            rep, bare = pipeline.observability(model)
            sec = {
                "observable": rep.observable,
                "detectable": rep.detectable,
                "rank_defect": rep.numerical_rank_defect,
                "tolerance": rep.tolerance,
                "min_relative_sv": rep.min_relative_sv,
            }
            if bare is not None:
                sec.update(uncoupled_observable=bare.observable, uncoupled_min_relative_sv=bare.min_relative_sv)
            report["observability"] = sec
        cert = None
        if level >= 2:
            cert = pipeline.lipschitz(model)
            if cert is not None:
                report["lipschitz"] = {
                    "rho": cert.rho,
                    "gamma": cert.gamma,
                    "frobenius_A_tilde": cert.frobenius_norm,
                    "search_box": [v for b in cert.search_box for v in b],
                    "resolution": cert.resolution,
                }
        designs = {}
        if level >= 3:
            gamma = pipeline.design_gamma(model, cert)
            try:
                designs = pipeline.synthesize_all(model, gamma, sc.variants())
            except SynthesisError as exc:
                report["synthesis_failure"] = {"message": str(exc), **{k: v for k, v in exc.diagnostic.items() if k != "attempts"}}
                raise StageError("synthesis", EXIT_SYNTHESIS, str(exc)) from exc
            for v, d in designs.items():
                path = out / f"design{_suffix(sc, v)}.mtx"
                dump_matrices(path, pipeline.design_matrices(model, d))
                chk = pipeline.reverify(load_matrices(path), v)
                report[f"design_{v}"] = {
                    "gamma": d.gamma,
                    "gamma_max": d.gamma_max,
                    "converges": d.converges,
                    "residual_max_eig": d.residual_max,
                    "strict_margin": d.margin,
                    "abscissa": d.abscissa,
                    "construction": ", ".join(f"{k}={val!r}" for k, val in d.construction.items()),
                    "reverified": chk.passed,
                    "reverified_residual_max_eig": chk.residual_max,
                }
        if level >= 4:
            for v, d in designs.items():
                try:
                    rec = pipeline.simulate(model, d)
                except DivergenceError as exc:
                    raise StageError("simulate", EXIT_DIVERGENCE, f"{v}: {exc}") from exc
                write_csv(out / f"trajectory{_suffix(sc, v)}.csv", rec, sc.full_state)
                summ = pipeline.summarize(model, rec)
                report[f"simulation_{v}"] = {
                    "dt": sc.dt,
                    "t_end": sc.t_end,
                    "eps": summ.eps,
                    "t_cross": summ.t_cross,
                    "initial_error": summ.initial_error,
                    "final_error": summ.final_error,
                    "final_over_initial": summ.final_error / summ.initial_error if summ.initial_error else None,
                    "decay_rate": summ.decay_rate,
                }
    finally:
        write_report(out / "report.txt", report)
    return EXIT_OK


def _check_certificate(path, variant) -> int:
    try:
        mats = load_matrices(path)
    except OSError as exc:
        raise StageError("config", EXIT_CONFIG, f"cannot read {path}: {exc}") from exc
    if variant is None or variant == "both":
        variant = "thau" if "Q" in mats else "rh"
    missing = {"A_eff", "C", "L", "P", "gamma"} - set(mats)
    if missing:
        raise StageError("config", EXIT_CONFIG, f"{path} lacks matrices {sorted(missing)}")
    chk = pipeline.reverify(mats, variant)
    print(f"variant = {variant}")
    print(f"passed = {str(chk.passed).lower()}")
    print(f"residual_max_eig = {chk.residual_max!r}")
    print(f"strict_margin = {chk.strict_margin!r}")
    print(f"p_min_eig = {chk.p_min_eig!r}")
    print(f"abscissa = {chk.abscissa!r}")
    if chk.gamma_max is not None:
        print(f"gamma_max = {chk.gamma_max!r}")
        print(f"converges = {str(chk.converges).lower()}")
    return EXIT_OK if chk.passed else EXIT_FAILED_CHECK


def _sweep_one(path, out_root, command_args):
    ns = argparse.Namespace(**{**vars(command_args), "scenario": path})
    try:
        sc = _load(ns)
        return path, execute(sc, Path(out_root) / sc.name, "run"), ""
    except StageError as exc:
        return path, exc.code, f"[{exc.stage}] {exc}"
    except SoilObsError as exc:
        return path, EXIT_NUMERICAL, f"[numerical] {exc}"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soilobs", description="Soil nitrate observer pipeline")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in STAGES + ("reduce",):
        p = sub.add_parser(name)
        p.add_argument("--scenario", help="scenario file, or bundled:<name>")
        p.add_argument("--out", help="output directory (default: from the scenario)")
        p.add_argument("--variant", choices=VARIANT_CHOICES)
        p.add_argument("--reduced", action="store_true", help="use the reduced disturbance model")
        p.add_argument("--dt", type=float, help="integration step in s")
        p.add_argument("--t-end", dest="t_end", type=float, help="simulation horizon in s")
        p.add_argument("--full-state", action="store_true", help="write every state column to the CSV")
        if name == "check":
            p.add_argument("--certificate", help="re-verify a dumped design file and exit")
        if name == "run":
            p.add_argument("--sweep", nargs="+", metavar="SCENARIO", help="run several scenarios in parallel")
            p.add_argument("--jobs", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check" and args.certificate:
            return _check_certificate(args.certificate, args.variant)
        if args.command == "run" and args.sweep:
            out_root = args.out or "out"
            worst = EXIT_OK
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = [pool.submit(_sweep_one, s, out_root, args) for s in args.sweep]
                for fut in futures:
                    path, code, msg = fut.result()
                    if code:
                        print(f"soilobs: {path}: {msg}", file=sys.stderr)
                    worst = max(worst, code)
            return worst
        sc = _load(args)
        out = Path(args.out or sc.output_dir)
        upto = "assemble" if args.command == "reduce" else args.command
        code = execute(sc, out, upto)
        print(f"wrote artifacts to {out}")
        return code
    except StageError as exc:
        print(f"soilobs: [{exc.stage}] {exc}", file=sys.stderr)
        return exc.code
    except SoilObsError as exc:
        print(f"soilobs: [numerical] {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
