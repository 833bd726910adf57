"""Command-line entry point: ``walkpca <subcommand> ...``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 simulation
divergence, 4 I/O or file-format failure.
"""

import argparse
import json
import sys
from pathlib import Path

from . import analytic, compare, noise, processes, tables
from .config import BUNDLED, load_config
from .errors import DivergenceError, FormatError, WalkPcaError
from .experiment import run_experiment, write_json
from .pca import DEFAULT_MAX_N, pca_trajectory
from .processes import LINREG, ProcessSpec
from .trajectory_io import random_project, read_trajectory, subsample, write_trajectory, write_trajectory_text

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4


def _out_path(args, given, default_name):
    if given:
        return Path(given)
    return Path(args.out_dir) / default_name


def _process_args(p, need_d=True):
    p.add_argument("--process", required=True, help="flat, momentum, ou, decayed or linreg")
    p.add_argument("--n", type=int, required=True, help="number of steps")
    if need_d:
        p.add_argument("--d", type=int, required=True, help="state dimension")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--decay-rate", type=float, default=1.0)
    p.add_argument("--decay-applies-to", choices=("var", "std"), default="var")
    p.add_argument("--lr", type=float, default=1e-3)


def _spec(args):
    return ProcessSpec(args.process, gamma=args.gamma, alpha=args.alpha, decay_rate=args.decay_rate,
                       decay_applies_to=args.decay_applies_to, lr=args.lr)


def cmd_simulate(args):
    spec = _spec(args)
    out = _out_path(args, args.out, "trajectory.traj")
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == LINREG:
        traj, loss = processes.simulate_linreg_sgd(args.d, spec.lr, args.n, args.seed)
        tables.write_series(out.with_name(out.name + ".loss.csv"), "loss", loss)
    else:
        if args.noise == "factor":
            model = noise.make_factor_covariance(noise.random_factor(args.d, args.factor_cols, args.factor_seed))
        else:
            model = noise.make_isotropic(args.d)
        traj = processes.simulate(spec, args.n, model, args.seed)
    (write_trajectory_text if args.text else write_trajectory)(traj, out)
    if args.distance:
        tables.write_series(args.distance, "distance", processes.distance_from_origin(traj))
    print(out)
    return EXIT_OK


def cmd_pca(args):
    traj = read_trajectory(args.inp)
    if args.project_dim:
        traj = random_project(traj, args.project_dim, args.project_seed)
    if args.stride > 1:
        traj = subsample(traj, args.stride)
    res = pca_trajectory(traj, args.k, max_n=args.max_n)
    spec_path = _out_path(args, args.spectrum_out, "spectrum.csv")
    proj_path = _out_path(args, args.projections_out, "projections.csv")
    spec_path.parent.mkdir(parents=True, exist_ok=True)
    proj_path.parent.mkdir(parents=True, exist_ok=True)
    tables.write_spectrum(spec_path, res.eigenvalues, res.explained_ratio)
    tables.write_projections(proj_path, res.projections[:, :min(args.proj_components, args.k)])
    print(spec_path)
    print(proj_path)
    return EXIT_OK


def cmd_predict(args):
    spec = _spec(args)
    pred = analytic.predicted_spectrum(spec, args.n, args.k)
    out = _out_path(args, args.out, "predicted.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    tables.write_spectrum(out, pred.eigenvalues, pred.ratios)
    print(out)
    return EXIT_OK


def _parse_range(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def cmd_compare(args):
    emp = tables.read_spectrum(args.empirical)
    pred = tables.read_spectrum(args.predicted)
    report = compare.ComparisonReport(spectrum=compare.spectrum_error(emp, pred, args.k_range, scale=args.scale))
    if args.projections:
        comps, P = tables.read_projections(args.projections)
        lams = [emp.eigenvalues[c - 1] for c in comps]
        report.projection = compare.projection_metrics(P, comps, P.shape[0], lams)
    if args.distance:
        dist = tables.read_csv(args.distance)["distance"]
        r_c = analytic.critical_radius(args.alpha) if args.alpha else None
        report.plateau = compare.plateau_metrics(dist, args.tail_fraction, r_c)
    if args.averaging:
        report.averaging = {
            "series_file": str(args.averaging),
            "n_c": analytic.mixing_steps(args.alpha) if args.alpha else None,
        }
    doc = report.to_dict()
    out = _out_path(args, args.out, "report.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json(out, doc)
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_project(args):
    traj = read_trajectory(args.inp)
    out = _out_path(args, args.out, "projected.traj")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory(random_project(traj, args.target_dim, args.seed), out)
    print(out)
    return EXIT_OK


def cmd_run(args):
    cfg = load_config(args.config)
    out_dir = args.out_dir if args.out_dir_given else cfg.out_dir or args.out_dir
    summary = run_experiment(cfg, out_dir, threads=args.threads, figures=args.figures or None)
    print(Path(out_dir) / cfg.name / "summary.json")
    for label, entry in summary["runs"].items():
        agg = entry["aggregate"]
        print(f"{label}: mean rho_1 = {agg['mean_ratio_k1']:.4f}, sum rho_1..12 = {agg['mean_ratio_sum_k12']:.4f}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out-dir", default=None, help="directory for outputs (default: current directory)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for multi-seed runs")

    parser = argparse.ArgumentParser(prog="walkpca", description="PCA of high-dimensional random walks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a trajectory and write it to a file")
    _process_args(p)
    p.add_argument("--noise", choices=("isotropic", "factor"), default="isotropic")
    p.add_argument("--factor-seed", type=int, default=0)
    p.add_argument("--factor-cols", type=int, default=None)
    p.add_argument("--out", help="trajectory file (default <out-dir>/trajectory.traj)")
    p.add_argument("--text", action="store_true", help="write the comma-separated text variant")
    p.add_argument("--distance", help="also write the distance-from-origin CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pca", parents=[common], help="PCA of a trajectory file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--project-dim", type=int, default=None)
    p.add_argument("--project-seed", type=int, default=0)
    p.add_argument("--proj-components", type=int, default=5)
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    p.add_argument("--spectrum-out")
    p.add_argument("--projections-out")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("predict", parents=[common], help="closed-form spectrum")
    _process_args(p, need_d=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", parents=[common], help="compare an empirical spectrum to a prediction")
    p.add_argument("--empirical", required=True)
    p.add_argument("--predicted", required=True)
    p.add_argument("--k-range", type=_parse_range, default=(1, 20))
    p.add_argument("--scale", choices=("ratio", "raw"), default="ratio")
    p.add_argument("--projections")
    p.add_argument("--distance")
    p.add_argument("--averaging")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tail-fraction", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("project", parents=[common], help="random Gaussian projection of a trajectory")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--target-dim", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("run", parents=[common], help=f"run a config file or bundled config ({', '.join(BUNDLED)})")
    p.add_argument("config")
    p.add_argument("--figures", action="store_true", help="render PNG figures next to the CSV files")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.out_dir_given = args.out_dir is not None
    if args.out_dir is None:
        args.out_dir = "."
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WalkPcaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
