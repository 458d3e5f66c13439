"""``oimlab`` command line: info, analyze, sweep, solve, verify, simulate-trajectory.

Exit codes: 0 success, 1 property or Jacobian/Hessian agreement violation,
2 usage, parse or I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import _backend, __version__
from ._parallel import RNG_NAME, sample_rng
from .dynamics import (TWO_PI, IntegratorConfig, OimParams, dissipation_rate, energy,
                       energy_gradient, integrate, spins_to_phases,
                       velocity, write_trajectory_csv)
from .experiments import ks_sweep, solve
from .fixed_points import enumerate_spin_fixed_points
from .ising import (MAX_ENUMERATION_N, EdgeListError, EnumerationGuardError, IsingInstance,
                    cut_value, ising_energy, read_edge_list, spins_from_index, spins_to_str,
                    to_ising)
from .stability import (DEFAULT_EIGEN_TOL, classify, eigenvalues_symmetric, hessian, inf_norm,
                        jacobian, scaled_tol)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ratios(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model and run options")
    g.add_argument("--k", type=float, default=1.0, help="coupling strength K (default: 1.0)")
    g.add_argument("--ks", type=float, default=1.0,
                   help="second-harmonic injection strength K_s (default: 1.0)")
    g.add_argument("--alpha", type=float, default=0.5,
                   help="gradient-flow constant for the stability checks (default: 0.5)")
    g.add_argument("--dt", type=float, default=0.01, help="RK4 step (default: 0.01)")
    g.add_argument("--tmax", type=float, default=100.0, help="integration horizon (default: 100)")
    g.add_argument("--stop-tol", type=float, default=1e-8,
                   help="early stop when ||f||_inf drops below this (default: 1e-8)")
    g.add_argument("--stride", type=int, default=10,
                   help="record every k-th integration step (default: 10)")
    g.add_argument("--bin-tol", type=float, default=0.1,
                   help="phase-to-spin readout tolerance in rad (default: 0.1)")
    g.add_argument("--eigen-tol", type=float, default=DEFAULT_EIGEN_TOL,
                   help="relative eigenvalue sign tolerance (default: 1e-8)")
    g.add_argument("--starts", type=int, default=50, help="number of random starts (default: 50)")
    g.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    g.add_argument("--ratios", type=_ratios, default=None, help="K_s/K ratios, e.g. 0.5,1,2")
    g.add_argument("--output", "-o", default=None, help="write output here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default="json",
                   help="output format (default: json)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="oimlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", parents=[common], help="summarize a graph file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("analyze", parents=[common],
                       help="classify every binary fixed point with both stability tests")
    p.add_argument("graph")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", parents=[common], help="classify fixed points across K_s/K ratios")
    p.add_argument("graph")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("solve", parents=[common], help="multistart OIM solve")
    p.add_argument("graph")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="run the property checks on an instance")
    p.add_argument("graph")
    p.add_argument("--samples", type=int, default=5, help="random states per check (default: 5)")
    p.add_argument("--debug-asymmetrize", type=float, default=0.0, metavar="EPS",
                   help="add EPS to W[0,1] only (negative control; checks must fail)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate-trajectory", parents=[common],
                       help="integrate one trajectory and export it")
    p.add_argument("graph")
    p.add_argument("--init", type=_ratios, default=None,
                   help="initial phases, comma-separated (default: seeded uniform)")
    p.set_defaults(func=cmd_simulate)
    return parser


# -- helpers ---------------------------------------------------------------

def _params(args) -> OimParams:
    try:
        return OimParams(args.k, args.ks, args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cfg(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(args.dt, args.tmax, args.stop_tol, args.stride)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_run_options(args):
    if not 0 < args.bin_tol < math.pi / 4:
        raise UsageError("--bin-tol must lie in (0, pi/4)")
    if not args.eigen_tol > 0:
        raise UsageError("--eigen-tol must be positive")


def _run_config(args) -> dict:
    skip = {"func", "command", "graph", "output", "format"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _metadata(args, **extra) -> dict:
    return {"tool": "oimlab", "version": __version__, "backend": _backend.NAME,
            "rng_name": RNG_NAME, "graph": args.graph, "run_config": _run_config(args), **extra}


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(args, text: str):
    with _sink(args.output) as out:
        out.write(text if text.endswith("\n") else text + "\n")


def _load(args):
    g = read_edge_list(args.graph)
    return g, to_ising(g)


# -- subcommands -----------------------------------------------------------

def cmd_info(args) -> int:
    g, inst = _load(args)
    lines = [f"n={g.n} m={g.m}"]
    if g.m:
        ws = [e for _, _, e in g.edges]
        lines.append(f"edge weights: min={min(ws):.17g} max={max(ws):.17g} "
                     f"total={g.total_weight():.17g}")
    pos = int(np.count_nonzero(np.triu(inst.w, 1) > 0))
    neg = int(np.count_nonzero(np.triu(inst.w, 1) < 0))
    lines.append(f"couplings W=-E: positive={pos} negative={neg} zero={g.n * (g.n - 1) // 2 - pos - neg}")
    if g.n <= 40:
        lines.append("W sign pattern:")
        for row in inst.w:
            lines.append(" ".join("+" if v > 0 else "-" if v < 0 else "." for v in row))
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _guarded(inst):
    if inst.n > MAX_ENUMERATION_N:
        raise EnumerationGuardError(
            f"N={inst.n} exceeds the enumeration guard N<={MAX_ENUMERATION_N}; "
            "use `oimlab solve` for large instances")


def cmd_analyze(args) -> int:
    _check_run_options(args)
    params = _params(args)
    _, inst = _load(args)
    _guarded(inst)
    cat = enumerate_spin_fixed_points(inst, params, args.bin_tol, args.eigen_tol)
    if args.format == "csv":
        _emit(args, cat.to_csv())
    else:
        doc = cat.to_dict()
        doc["metadata"].update(_metadata(args))
        _emit(args, json.dumps(doc, indent=2))
    disagree = [i for i, r in enumerate(cat.records) if not r.report.agree]
    if disagree:
        print(f"Jacobian/Hessian classifications disagree at records {disagree}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    _check_run_options(args)
    if not args.ratios:
        raise UsageError("sweep requires --ratios a,b,c")
    _, inst = _load(args)
    _guarded(inst)
    try:
        table = ks_sweep(inst, args.k, args.ratios, alpha=args.alpha, eigen_tol=args.eigen_tol)
    except EnumerationGuardError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        _emit(args, table.to_csv())
    else:
        rows = [{"ks_over_k": r.ks_over_k, "fp_id": r.fp_id, "spins": r.spins,
                 "ising_energy": r.ising_energy, "min_eig_H": r.min_eig_hessian,
                 "classification": r.classification.value,
                 "is_global_optimum": r.is_global_optimum} for r in table.rows]
        _emit(args, json.dumps({"metadata": _metadata(args), "rows": rows}, indent=2))
    if not all(r.agree for r in table.rows):
        print("Jacobian/Hessian classifications disagree in the sweep", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_solve(args) -> int:
    _check_run_options(args)
    if args.starts < 1:
        raise UsageError("--starts must be >= 1")
    params, cfg = _params(args), _cfg(args)
    g, inst = _load(args)
    res = solve(inst, params, args.starts, args.seed, cfg, args.bin_tol)
    cut = None if res.spins is None else cut_value(g, res.spins)
    oim_e = None if res.spins is None else energy(params, inst, spins_to_phases(res.spins))
    if args.format == "csv":
        if res.spins is None:
            row = "nonbinary,,,"
        else:
            row = (f"{spins_to_str(res.spins)},{res.ising_energy:.17g},{cut:.17g},{oim_e:.17g}")
        _emit(args, "spins,ising_energy,cut_value,oim_energy\n" + row)
    else:
        doc = res.to_dict()
        doc["cut_value"] = cut
        doc["oim_energy"] = oim_e
        doc["metadata"].update(_metadata(args))
        _emit(args, json.dumps(doc, indent=2))
    return EXIT_OK


def _verify_checks(inst: IsingInstance, params: OimParams, cfg: IntegratorConfig, seed: int,
                   samples: int):
    """Yield ``(name, passed, detail)`` for each property."""
    n = inst.n
    scale = max(1.0, params.k * inf_norm(inst.w) + params.ks)
    states = [sample_rng(seed, i).uniform(0.0, TWO_PI, size=n) for i in range(samples)]

    fd_err = ident_err = 0.0
    h = 1e-5
    for th in states:
        grad = energy_gradient(params, inst, th)
        ident_err = max(ident_err, float(np.max(np.abs(grad + 2.0 * velocity(params, inst, th)))))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd = (energy(params, inst, th + e) - energy(params, inst, th - e)) / (2 * h)
            fd_err = max(fd_err, abs(fd - grad[i]))
    ok = fd_err <= 1e-6 * scale and ident_err <= 1e-12 * scale
    yield ("gradient-identity", ok,
           f"max|grad-FD|={fd_err:.3g} (tol {1e-6 * scale:.3g}), "
           f"max|grad+2f|={ident_err:.3g} (tol {1e-12 * scale:.3g})")

    resid = 0.0
    for th in states:
        resid = max(resid, float(np.max(np.abs(jacobian(params, inst, th)
                                               + params.alpha * hessian(params, inst, th)))))
    yield ("jacobian-hessian-identity", resid <= 1e-12 * scale,
           f"max|J+alpha*H|={resid:.3g} (tol {1e-12 * scale:.3g}, alpha={params.alpha:g})")

    mirror_ok, detail = True, ""
    worst = 0.0
    for th in states:
        hm, jm = hessian(params, inst, th), jacobian(params, inst, th)
        try:
            sh, sj = eigenvalues_symmetric(hm), eigenvalues_symmetric(jm)
        except (ValueError, ArithmeticError) as exc:
            mirror_ok, detail = False, f"eigen-solve failed: {exc}"
            break
        err = float(np.max(np.abs(sj.values + params.alpha * sh.values[::-1])))
        worst = max(worst, err / scaled_tol(hm))
        tol_h = scaled_tol(hm, DEFAULT_EIGEN_TOL)
        if err > tol_h or classify(sh, "hessian", tol_h) != classify(sj, "jacobian",
                                                                     params.alpha * tol_h):
            mirror_ok = False
    if not detail:
        detail = f"max eigen mismatch / tol = {worst:.3g}"
    yield ("eigenvalue-mirror", mirror_ok, detail)

    worst_rise, worst_rate = -math.inf, -math.inf
    for i in range(samples):
        traj = integrate(params, inst, states[i], cfg)
        if len(traj.energies) > 1:
            worst_rise = max(worst_rise, float(np.max(np.diff(traj.energies))))
        worst_rate = max(worst_rate, max(dissipation_rate(params, inst, s) for s in traj.states))
    yield ("dissipation-monotone", worst_rise <= 1e-9 and worst_rate <= 0.0,
           f"max energy rise={worst_rise:.3g} (tol 1e-9), max dE/dt={worst_rate:.3g}")

    if n <= 12:
        configs = [spins_from_index(b, n) for b in range(1 << n)]
    else:
        rng = sample_rng(seed, samples)
        configs = [np.where(rng.random(n) < 0.5, 1, -1) for _ in range(256)]
    terms = params.k * float(np.abs(inst.w).sum()) + n * params.ks
    tol = 1e-12 * max(1.0, terms)
    err = max(abs(energy(params, inst, spins_to_phases(s))
                  - (2 * params.k * ising_energy(inst, s) - n * params.ks)) for s in configs)
    yield ("spin-energy-affine", err <= tol,
           f"max|E-(2K*H-N*Ks)|={err:.3g} over {len(configs)} configs (tol {tol:.3g})")


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    params, cfg = _params(args), _cfg(args)
    _, inst = _load(args)
    if args.debug_asymmetrize:
        if inst.n < 2:
            raise UsageError("--debug-asymmetrize needs at least two nodes")
        w = np.array(inst.w)
        w[0, 1] += args.debug_asymmetrize
        inst = IsingInstance.unchecked(w)
    results = list(_verify_checks(inst, params, cfg, args.seed, args.samples))
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    if args.format == "json":
        doc = {"metadata": _metadata(args),
               "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results]}
        _emit(args, json.dumps(doc, indent=2))
        if args.output is not None:
            print("\n".join(lines))
    else:
        _emit(args, "\n".join(lines))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    params, cfg = _params(args), _cfg(args)
    _, inst = _load(args)
    if args.init is not None:
        if len(args.init) != inst.n:
            raise UsageError(f"--init needs {inst.n} phases, got {len(args.init)}")
        theta0 = np.array(args.init)
    else:
        theta0 = sample_rng(args.seed, 0).uniform(0.0, TWO_PI, size=inst.n)
    traj = integrate(params, inst, theta0, cfg)
    if args.format == "csv":
        with _sink(args.output) as out:
            write_trajectory_csv(traj, out)
    else:
        doc = {"metadata": _metadata(args), "converged": traj.converged,
               "final_velocity_norm": traj.final_velocity_norm,
               "times": traj.times.tolist(), "states": traj.states.tolist(),
               "energies": traj.energies.tolist()}
        _emit(args, json.dumps(doc))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except EdgeListError as exc:
        print(f"oimlab: {args.graph}: {exc}", file=sys.stderr)
    except EnumerationGuardError as exc:
        print(f"oimlab: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"oimlab: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
