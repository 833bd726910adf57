"""Config-driven experiment runner.

Layout written under ``<out_dir>/<config name>/``::

    [<param>_<value>/]seed_<s>/spectrum.csv     k, eigenvalue, explained_ratio
                               predicted.csv    same columns, closed form
                               projections.csv  t, proj_k1, ...
                               tableau_<i>_<j>.csv
                               distance.csv     t, distance
                               averaging.csv    t, error        (OU, when enabled)
                               report.json
    [<param>_<value>/]spectrum_mean.csv
    summary.json

CSV files are byte-reproducible for a fixed config. ``report.json`` and
``summary.json`` carry an ``elapsed_seconds`` field that is not.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analytic, compare, noise, processes, tables
from .config import ExperimentConfig
from .errors import SpecError
from .pca import pca_trajectory
from .processes import DECAYED, FLAT, LINREG, MOMENTUM, OU, ProcessSpec
from .trajectory_io import random_project, subsample

CLOSED_FORM = (FLAT, MOMENTUM, OU)
DEFAULT_BURN_IN_FACTOR = 10.0


def build_noise(cfg: ExperimentConfig) -> noise.NoiseModel:
    if cfg.noise == "factor":
        return noise.make_factor_covariance(noise.random_factor(cfg.d, cfg.factor_cols, cfg.factor_seed))
    return noise.make_isotropic(cfg.d)


def prepare(traj, cfg: ExperimentConfig):
    """Optional random projection, then optional stride, as configured."""
    if cfg.project_dim:
        traj = random_project(traj, cfg.project_dim, cfg.project_seed)
    if cfg.stride > 1:
        traj = subsample(traj, cfg.stride)
    return traj


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, default=_json_default) + "\n", encoding="utf-8")


def _tableau_pairs(cfg, k):
    return [tuple(p) for p in cfg.tableau_pairs if max(p) <= k]


def analyse(traj, spec: ProcessSpec, cfg: ExperimentConfig, out: Path, figures: bool = False):
    """PCA, closed-form prediction and shape checks for one (prepared) trajectory."""
    out.mkdir(parents=True, exist_ok=True)
    k = min(cfg.k, traj.n)
    res = pca_trajectory(traj, k)
    tables.write_spectrum(out / "spectrum.csv", res.eigenvalues, res.explained_ratio)

    pairs = _tableau_pairs(cfg, k)
    ncomp = min(k, max([cfg.proj_components] + [max(p) for p in pairs]))
    tables.write_projections(out / "projections.csv", res.projections[:, :ncomp])
    for i, j in pairs:
        cols = [np.arange(1, traj.n + 1), res.projections[:, i - 1], res.projections[:, j - 1]]
        header = ["t", f"proj_k{i}", f"proj_k{j}"]
        if res.eigenvalues[i - 1] > 0 and res.eigenvalues[j - 1] > 0:
            cols += [analytic.lissajous_projection(i, traj.n, res.eigenvalues[i - 1]),
                     analytic.lissajous_projection(j, traj.n, res.eigenvalues[j - 1])]
            header += [f"lissajous_k{i}", f"lissajous_k{j}"]
        tables.write_csv(out / f"tableau_{i}_{j}.csv", header, cols)

    report = compare.ComparisonReport()
    predicted = None
    if spec.kind in CLOSED_FORM and traj.n > 2:
        predicted = analytic.predicted_spectrum(spec, traj.n, min(k, traj.n - 1))
        tables.write_spectrum(out / "predicted.csv", predicted.eigenvalues, predicted.ratios)
        lo, hi = cfg.k_range
        if cfg.compare_spectrum and hi <= len(predicted.eigenvalues):
            by_scale = {s: compare.spectrum_error(res, predicted, (lo, hi), scale=s) for s in ("ratio", "raw")}
            report.spectrum = by_scale[cfg.spectrum_scale]
            other = "raw" if cfg.spectrum_scale == "ratio" else "ratio"
            report.extra[f"spectrum_{other}"] = {
                "median_rel_error": by_scale[other].median_rel_error,
                "max_rel_error": by_scale[other].max_rel_error,
            }
    if spec.kind in (FLAT, MOMENTUM) and cfg.compare_spectrum and cfg.k_range[1] <= k:
        lo, hi = cfg.k_range
        limit = analytic.flat_variance_ratio(np.arange(1, hi + 1))
        m = compare.spectrum_error(res.explained_ratio[:hi], limit, (lo, hi), scale="raw")
        report.extra["spectrum_limit"] = {"median_rel_error": m.median_rel_error, "max_rel_error": m.max_rel_error}

    if cfg.compare_projection:
        comps = [c for c in range(1, min(cfg.proj_components, k) + 1) if res.eigenvalues[c - 1] > 0]
        if comps:
            report.projection = compare.projection_metrics(
                res.projections[:, [c - 1 for c in comps]], comps, traj.n, res.eigenvalues[[c - 1 for c in comps]]
            )

    if figures:
        from . import plotting

        plotting.plot_spectrum(out / "spectrum.png", res.explained_ratio,
                               None if predicted is None else predicted.ratios,
                               analytic.flat_variance_ratio(np.arange(1, k + 1)) if spec.kind == FLAT else None)
        if pairs:
            plotting.plot_tableau(out / "tableau.png", res.projections, res.eigenvalues, pairs)
    return res, report


def _ou_extras(traj, spec, cfg, out, report, figures):
    distances = processes.distance_from_origin(traj)
    tables.write_series(out / "distance.csv", "distance", distances)
    r_c = analytic.critical_radius(spec.alpha) if spec.kind == OU and spec.alpha > 0 else None
    if cfg.compare_plateau:
        report.plateau = compare.plateau_metrics(distances, cfg.tail_fraction, r_c)
    if figures:
        from . import plotting

        plotting.plot_series(out / "distance.png", distances, "distance from origin", r_c, "r_c")

    if cfg.compare_averaging and spec.kind == OU and spec.alpha > 0:
        n_c = analytic.mixing_steps(spec.alpha)
        factor = DEFAULT_BURN_IN_FACTOR if cfg.burn_in_factor is None else cfg.burn_in_factor
        burn = int(math.ceil(factor * n_c))
        if burn >= traj.n - 1:
            raise SpecError(f"burn-in of {burn} steps leaves no samples (n={traj.n})")
        err = compare.iterate_average_error(traj.states[burn:])
        tables.write_series(out / "averaging.csv", "error", err)

        def at(mult):
            t = int(round(mult * n_c))
            return float(err[t - 1]) if 1 <= t <= err.shape[0] else None

        e1, enc, e10, e100 = float(err[0]), at(1), at(10), at(100)
        report.averaging = {
            "series_file": "averaging.csv",
            "n_c": n_c,
            "burn_in": burn,
            "error_first": e1,
            "error_at_n_c": enc,
            "error_at_10_n_c": e10,
            "error_at_100_n_c": e100,
            "flat_region_ratio": None if enc is None else enc / e1,
            "decay_ratio_100_over_10": None if (e10 is None or e100 is None) else e100 / e10,
            "predicted_radius": analytic.critical_radius(spec.alpha),
        }
        if figures:
            from . import plotting

            plotting.plot_series(out / "averaging.png", err, "iterate-average error", logy=True, xmarker=n_c)


def _run_walk(cfg, spec, seed, out, noise_model, figures):
    traj = processes.simulate(spec, cfg.n, noise_model, seed)
    _, report = analyse(prepare(traj, cfg), spec, cfg, out, figures)
    _ou_extras(traj, spec, cfg, out, report, figures)
    return report


def _run_linreg(cfg, spec, seed, out, figures):
    out.mkdir(parents=True, exist_ok=True)
    traj, loss = processes.simulate_linreg_sgd(cfg.d, spec.lr, cfg.n, seed)
    tables.write_series(out / "loss.csv", "loss", loss)
    stride = cfg.decay_stride
    sub = subsample(traj, stride)
    norms = processes.step_norms(sub)
    steps = np.arange(1, sub.n + 1) * stride
    tables.write_csv(out / "step_norms.csv", ["t", "step_norm"], [steps, norms])
    rate, r2 = processes.fit_exponential_decay(norms)
    per_step = min(rate ** (1.0 / stride), 1.0)

    sgd_cfg = ExperimentConfig(**{**cfg.to_dict(), "stride": 1, "project_dim": None})
    _, report = analyse(sub, spec, sgd_cfg, out, figures)
    report.extra["decay_fit"] = {
        "stride": stride,
        "rate_per_record": rate,
        "rate_per_step": per_step,
        "r_squared": r2,
    }

    walk_spec = ProcessSpec(DECAYED, decay_rate=per_step, decay_applies_to=cfg.decay_applies_to)
    walk = processes.simulate(walk_spec, cfg.n, noise.make_isotropic(cfg.d), seed)
    _, walk_report = analyse(subsample(walk, stride), walk_spec, sgd_cfg, out / "decayed_walk", figures)
    walk_report.extra["process"] = walk_spec.describe()
    write_json(out / "decayed_walk" / "report.json", walk_report.to_dict())
    if figures:
        from . import plotting

        plotting.plot_decay_fit(out / "step_norms.png", steps, norms, rate)
    return report


def run_seed(cfg: ExperimentConfig, spec: ProcessSpec, seed: int, out: Path, noise_model=None, figures=False) -> dict:
    """Simulate and analyse one seed; writes the seed directory and returns its report."""
    start = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    if spec.kind == LINREG:
        report = _run_linreg(cfg, spec, seed, out, figures)
    else:
        report = _run_walk(cfg, spec, seed, out, noise_model or build_noise(cfg), figures)
    doc = {"process": spec.describe(), "seed": seed, "n": cfg.n, "d": cfg.d}
    doc.update(report.to_dict())
    doc["elapsed_seconds"] = time.perf_counter() - start
    write_json(out / "report.json", doc)
    return doc


def _aggregate(out: Path, seed_dirs) -> dict:
    spectra = [tables.read_spectrum(d / "spectrum.csv") for d in seed_dirs]
    k = min(len(s.k) for s in spectra)
    eig = np.mean([s.eigenvalues[:k] for s in spectra], axis=0)
    rat = np.mean([s.explained_ratio[:k] for s in spectra], axis=0)
    tables.write_spectrum(out / "spectrum_mean.csv", eig, rat)
    return {"mean_ratio_k1": float(rat[0]), "mean_ratio_sum_k12": float(rat[:12].sum())}


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1, figures=None) -> dict:
    """Run every (sweep value, seed) of a config and write all artifacts."""
    start = time.perf_counter()
    figures = cfg.figures if figures is None else figures
    root = Path(out_dir if out_dir is not None else (cfg.out_dir or ".")) / cfg.name
    root.mkdir(parents=True, exist_ok=True)
    noise_model = None if processes.canonical_kind(cfg.process) == LINREG else build_noise(cfg)

    jobs = []
    for label, spec in cfg.sweep():
        base = root / label if label else root
        for seed in cfg.seeds:
            jobs.append((label, spec, seed, base / f"seed_{seed}"))

    def work(job):
        _, spec, seed, path = job
        return run_seed(cfg, spec, seed, path, noise_model, figures)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(work, jobs))
    else:
        reports = [work(j) for j in jobs]

    summary = {"config": cfg.to_dict(), "runs": {}}
    for label, _ in cfg.sweep():
        mine = [(j, r) for j, r in zip(jobs, reports) if j[0] == label]
        base = root / label if label else root
        entry = {"reports": {str(j[2]): r for j, r in mine}}
        entry["aggregate"] = _aggregate(base, [j[3] for j, _ in mine])
        summary["runs"][label or "default"] = entry
    summary["elapsed_seconds"] = time.perf_counter() - start
    write_json(root / "summary.json", summary)
    return summary
