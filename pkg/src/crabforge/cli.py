"""Command line driver.

Subcommands::

    crabforge optimize        run optimization campaigns, write solution files
    crabforge robust-noise    -1 dB white-noise tolerance search per solution
    crabforge robust-distort  -1 dB coefficient-distortion tolerance search
    crabforge emit            signals / spectra / sigma sweeps of one solution
    crabforge report          summary tables from an output directory

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig
from .crab import CrabSolution
from .gates import GATE_NAMES, build_gate
from .model import CHANNEL_NAMES, EV_PER_GHZ
from .optimize import run_campaign
from .robustness import (
    distortion_energy_bound,
    half_normal_mean,
    sweep_infidelity_vs_sigma,
    tolerance_search,
)
from .seeds import derive_seed
from .spectrum import dft_spectrum

log = logging.getLogger("crabforge")

KIND_INDEX = {"noise": 1, "distortion": 2}
EMIT_CHOICES = ("signals", "spectrum", "sweep-noise", "sweep-distortion", "all")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    cfg.apply_env()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.output_dir = args.out
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    if getattr(args, "runs", None) is not None:
        cfg.runs = args.runs
    if getattr(args, "max_evals", None) is not None:
        cfg.optimizer["max_cost_evaluations"] = args.max_evals
    if getattr(args, "polish", False):
        cfg.optimizer["polish"] = True
    if getattr(args, "num_steps", None) is not None:
        cfg.crab["num_steps"] = args.num_steps
    if getattr(args, "gate", None):
        cfg.gates = list(GATE_NAMES) if "all" in args.gate else list(dict.fromkeys(args.gate))
    for name in ("realizations", "start_sigma", "max_steps"):
        value = getattr(args, name, None)
        if value is not None:
            key = "realizations_required" if name == "realizations" else name
            cfg.disturbance[key] = value
    return cfg.validate()


def _jobs(cfg: RunConfig) -> int:
    return cfg.jobs or os.cpu_count() or 1


def _solution_paths(outdir: Path) -> list[Path]:
    return sorted((outdir / "solutions").glob("*.json"))


def _fmt_sci(x) -> str:
    return "n/a" if x is None or (isinstance(x, float) and np.isnan(x)) else f"{x:.4e}"


# ---------------------------------------------------------------------------
# optimize


def cmd_optimize(args) -> int:
    cfg = _load_config(args)
    model = cfg.transmon_model()
    opt = cfg.optimizer_config()
    outdir = Path(cfg.output_dir)
    snapshot = cfg.snapshot()
    rows, lines, warnings = [], [], 0
    for name in cfg.gates:
        gate = build_gate(name)
        log.info("optimizing %s: %d runs from seed %d", name, cfg.runs, opt.seed)
        campaign = run_campaign(model, gate, opt, cfg.runs, jobs=_jobs(cfg))
        for solution, wall in zip(campaign.solutions, campaign.wall_times):
            sid = f"{name}_{solution.rng_seed}"
            solution.metadata.update(solution_id=sid)
            sub = "solutions" if solution.converged else "failed"
            io.save_solution(outdir / sub / f"{sid}.json", solution, snapshot)
        warnings += campaign.num_failed
        rows.append(
            [
                name,
                len(campaign.solutions),
                len(campaign.converged),
                campaign.first_try_rate,
                campaign.average_infidelity,
                campaign.minimum_infidelity,
            ]
        )
        lines.append(
            f"{name:<9} {_fmt_sci(campaign.average_infidelity):>12} {_fmt_sci(campaign.minimum_infidelity):>12}"
            f"   ({len(campaign.converged)}/{len(campaign.solutions)} converged)"
        )
    header = ["gate", "runs", "converged", "first_try_rate", "average_infidelity", "minimum_infidelity"]
    io.write_csv(outdir / "summary_optimize.csv", header, rows)
    text = "\n".join([f"{'gate':<9} {'average':>12} {'minimum':>12}", *lines]) + "\n"
    (outdir / "summary_optimize.txt").write_text(text)
    print(text, end="")
    if warnings:
        print(f"warning: {warnings} run(s) did not converge", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# robustness


def _search_task(task):
    path, kind, dist_cfg = task
    solution = io.load_solution(path)
    return path, solution, tolerance_search(solution, None, kind, dist_cfg)


def cmd_robust(args, kind: str) -> int:
    cfg = _load_config(args)
    outdir = Path(cfg.output_dir)
    paths = _solution_paths(outdir)
    warnings = 0
    tasks = []
    for path in paths:
        try:
            solution = io.load_solution(path)
        except (io.SolutionFileError, OSError, ValueError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            warnings += 1
            continue
        if args.gate and "all" not in args.gate and solution.gate_name not in args.gate:
            continue
        if not solution.converged:
            continue
        seed = derive_seed(cfg.seed, KIND_INDEX[kind], solution.rng_seed)
        tasks.append((path, kind, cfg.disturbance_config(seed)))
    if not tasks:
        print("no solutions found", file=sys.stderr)
        return 1

    jobs = min(_jobs(cfg), len(tasks))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_search_task, tasks))
    else:
        results = [_search_task(t) for t in tasks]

    per_gate: dict[str, list] = {}
    for path, solution, report in results:
        io.write_csv(
            outdir / "tolerance" / kind / f"{path.stem}.csv",
            ["sigma", "sigma_ev", "pass_count", "first_fail_infidelity"],
            [[s.sigma, s.sigma * EV_PER_GHZ, s.pass_count, s.first_fail_infidelity] for s in report.steps],
        )
        if not report.found:
            print(f"warning: {path.stem}: no tolerated sigma within {len(report.steps)} steps", file=sys.stderr)
            warnings += 1
            continue
        per_gate.setdefault(solution.gate_name, []).append(report.tolerated_sigma)

    rows = []
    for gate in [g for g in GATE_NAMES if g in per_gate]:
        sig = np.array(per_gate[gate])
        avg, mx = float(sig.mean()), float(sig.max())
        n_coeff = 1 if kind == "noise" else 2 * _num_components(outdir, gate)
        bound = distortion_energy_bound(avg, n_coeff)
        rows.append([gate, sig.size, avg, mx, avg * EV_PER_GHZ, mx * EV_PER_GHZ, bound * EV_PER_GHZ])
    header = [
        "gate", "solutions", "average_sigma", "max_sigma",
        "average_sigma_ev", "max_sigma_ev", "energy_bound_ev",
    ]
    io.write_csv(outdir / f"summary_{kind}.csv", header, rows)
    print(f"{'gate':<9} {'average [eV]':>13} {'maximum [eV]':>13}  solutions")
    for r in rows:
        print(f"{r[0]:<9} {r[4]:>13.3e} {r[5]:>13.3e}  {r[1]}")
    if warnings:
        print(f"warning: {warnings} warning(s)", file=sys.stderr)
    return 0


def _num_components(outdir: Path, gate: str) -> int:
    for path in _solution_paths(outdir):
        if path.stem.startswith(gate + "_"):
            try:
                return io.load_solution(path).basis.num_components
            except (io.SolutionFileError, OSError, ValueError):
                continue
    return 10


# ---------------------------------------------------------------------------
# emit


def _sigma_ladder(args) -> list[float]:
    if args.sigmas:
        return [float(s) for s in args.sigmas]
    start = args.start_sigma if args.start_sigma is not None else 0.1
    return [start * 10 ** (-n / 20) for n in range(0, args.sweep_db + 1, args.sweep_step_db)]


def cmd_emit(args) -> int:
    try:
        solution = io.load_solution(args.solution)
    except (io.SolutionFileError, OSError) as exc:
        raise UsageError(f"cannot load solution: {exc}") from exc
    outdir = Path(args.out)
    what = set(args.what)
    if "all" in what:
        what = set(EMIT_CHOICES) - {"all"}
    written = []
    grid = solution.grid()
    if "signals" in what:
        rows = np.column_stack([grid.times, grid.values.T]).tolist()
        written.append(io.write_csv(outdir / "signals.csv", ["t_ns", *CHANNEL_NAMES], rows))
    if "spectrum" in what:
        channels = args.channels or list(CHANNEL_NAMES)
        for ch in channels:
            table = dft_spectrum(grid, CHANNEL_NAMES.index(ch))
            rows = np.column_stack([table.frequencies, table.amplitudes]).tolist()
            written.append(io.write_csv(outdir / f"spectrum_{ch}.csv", ["freq_ghz", "amplitude"], rows))
    for kind in ("noise", "distortion"):
        if f"sweep-{kind}" not in what:
            continue
        sweep = sweep_infidelity_vs_sigma(
            solution, None, kind, _sigma_ladder(args), args.realizations, args.seed
        )
        rows = [[r.sigma, r.sigma * EV_PER_GHZ, r.mean_infidelity, r.min_infidelity, r.max_infidelity] for r in sweep]
        header = ["sigma", "sigma_ev", "mean_infidelity", "min_infidelity", "max_infidelity"]
        written.append(io.write_csv(outdir / f"sweep_{kind}.csv", header, rows))
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    outdir = Path(args.out)
    paths = _solution_paths(outdir)
    if not paths:
        print("no solutions found", file=sys.stderr)
        return 1
    by_gate: dict[str, list[CrabSolution]] = {}
    for path in paths:
        try:
            s = io.load_solution(path)
        except (io.SolutionFileError, OSError, ValueError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            continue
        by_gate.setdefault(s.gate_name, []).append(s)

    out = ["Infidelities (converged solutions)", f"{'gate':<9} {'average':>12} {'minimum':>12}  n"]
    for gate in [g for g in GATE_NAMES if g in by_gate]:
        vals = np.array([s.achieved_infidelity for s in by_gate[gate] if s.converged])
        if vals.size:
            out.append(f"{gate:<9} {vals.mean():>12.4e} {vals.min():>12.4e}  {vals.size}")
    for kind, title in (("noise", "White noise tolerance"), ("distortion", "Coefficient distortion tolerance")):
        summary = outdir / f"summary_{kind}.csv"
        if not summary.exists():
            continue
        out += ["", title, f"{'gate':<9} {'average [eV]':>13} {'maximum [eV]':>13} {'mean |D| bound [eV]':>20}"]
        for row in io.read_csv(summary):
            out.append(
                f"{row['gate']:<9} {float(row['average_sigma_ev']):>13.3e} "
                f"{float(row['max_sigma_ev']):>13.3e} {float(row['energy_bound_ev']):>20.3e}"
            )
    if (outdir / "summary_noise.csv").exists() and (outdir / "summary_distortion.csv").exists():
        noise = {r["gate"]: float(r["average_sigma_ev"]) for r in io.read_csv(outdir / "summary_noise.csv")}
        dist = {r["gate"]: r for r in io.read_csv(outdir / "summary_distortion.csv")}
        out += ["", f"{'gate':<9} {'mu_noise [eV]':>14} {'mu_dist [eV]':>14}"]
        for gate in [g for g in GATE_NAMES if g in noise and g in dist]:
            out.append(
                f"{gate:<9} {half_normal_mean(noise[gate]):>14.3e} {float(dist[gate]['energy_bound_ev']):>14.3e}"
            )
    text = "\n".join(out) + "\n"
    (outdir / "report.txt").write_text(text)
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crabforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, gates=True):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides campaign.output_dir)")
        p.add_argument("--seed", type=int, help="base seed (overrides config and $CRABFORGE_SEED)")
        p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
        if gates:
            p.add_argument("--gate", action="append", choices=[*GATE_NAMES, "all"])

    p = sub.add_parser("optimize", help="run optimization campaigns")
    common(p)
    p.add_argument("--runs", type=int, help="solutions per gate")
    p.add_argument("--max-evals", type=int, help="cost evaluation budget per run")
    p.add_argument("--num-steps", type=int, help="time slices per propagation")
    p.add_argument("--polish", action="store_true", help="do not stop at the infidelity threshold")
    p.set_defaults(func=cmd_optimize)

    for name, kind in (("robust-noise", "noise"), ("robust-distort", "distortion")):
        p = sub.add_parser(name, help=f"{kind} tolerance search over stored solutions")
        common(p)
        p.add_argument("--realizations", type=int, help="draws that must all pass per step")
        p.add_argument("--start-sigma", type=float, help="first sigma of the ladder (rad/ns)")
        p.add_argument("--max-steps", type=int, help="ladder length")
        p.set_defaults(func=lambda a, k=kind: cmd_robust(a, k))

    p = sub.add_parser("emit", help="write plot data for one solution")
    p.add_argument("solution", help="solution JSON file")
    p.add_argument("--what", action="append", choices=EMIT_CHOICES, required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--channels", action="append", choices=CHANNEL_NAMES)
    p.add_argument("--sigmas", nargs="+", type=float, help="explicit sigma list for sweeps (rad/ns)")
    p.add_argument("--start-sigma", type=float, help="largest sigma of the default sweep ladder")
    p.add_argument("--sweep-db", type=int, default=60, help="ladder depth in dB")
    p.add_argument("--sweep-step-db", type=int, default=2, help="ladder spacing in dB")
    p.add_argument("--realizations", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("report", help="print summary tables of an output directory")
    p.add_argument("--out", default="runs", help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
