"""Experiment configuration: one flat JSON document per experiment.

``gamma`` and ``alpha`` may be given as lists; each value becomes its own
sub-run under ``<name>/<param>_<value>/``.
"""

import json
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import SpecError
from .processes import MOMENTUM, OU, ProcessSpec, canonical_kind

CONFIG_VERSION = 1
BUNDLED = ("flat_fig1", "ou_fig2", "momentum_supp", "noniso_supp", "polyak_supp", "decay_fig")


class ConfigError(SpecError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


@dataclass
class ExperimentConfig:
    version: int = CONFIG_VERSION
    name: str = "experiment"
    process: str = "flat"
    n: int = 1000
    d: int = 10000
    gamma: object = 0.0
    alpha: object = 0.0
    decay_rate: float = 1.0
    decay_applies_to: str = "var"
    lr: float = 1e-3
    noise: str = "isotropic"
    factor_seed: int = 0
    factor_cols: Optional[int] = None
    seeds: list = field(default_factory=lambda: [0])
    k: int = 200
    stride: int = 1
    project_dim: Optional[int] = None
    project_seed: int = 0
    proj_components: int = 5
    tableau_pairs: list = field(default_factory=lambda: [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4]])
    k_range: list = field(default_factory=lambda: [1, 20])
    spectrum_scale: str = "ratio"
    tail_fraction: float = 0.2
    burn_in_factor: Optional[float] = None
    decay_stride: int = 100
    compare_spectrum: bool = True
    compare_projection: bool = True
    compare_plateau: bool = True
    compare_averaging: bool = False
    figures: bool = False
    out_dir: Optional[str] = None

    def sweep(self):
        """Yield ``(label, ProcessSpec)`` for every parameter value in the config."""
        kind = canonical_kind(self.process)
        if kind == MOMENTUM and isinstance(self.gamma, list):
            return [(f"gamma_{g!r}", self._spec(gamma=g)) for g in self.gamma]
        if kind == OU and isinstance(self.alpha, list):
            return [(f"alpha_{a!r}", self._spec(alpha=a)) for a in self.alpha]
        return [(None, self._spec())]

    def _spec(self, **over) -> ProcessSpec:
        kw = dict(
            kind=self.process,
            gamma=self.gamma if not isinstance(self.gamma, list) else 0.0,
            alpha=self.alpha if not isinstance(self.alpha, list) else 0.0,
            decay_rate=self.decay_rate,
            decay_applies_to=self.decay_applies_to,
            lr=self.lr,
        )
        kw.update(over)
        try:
            return ProcessSpec(**kw)
        except SpecError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELDS = {f.name for f in fields(ExperimentConfig)}


def _require(cond, key, message):
    if not cond:
        raise ConfigError(f"config key {key!r}: {message}", key=key)


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key in doc:
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}", key=key)
    _require(doc.get("version") == CONFIG_VERSION, "version", f"must be {CONFIG_VERSION}")
    cfg = ExperimentConfig(**doc)

    try:
        kind = canonical_kind(cfg.process)
    except SpecError as exc:
        raise ConfigError(str(exc), key="process") from None
    _require(isinstance(cfg.n, int) and cfg.n >= 2, "n", "must be an integer >= 2")
    _require(isinstance(cfg.d, int) and cfg.d >= 1, "d", "must be a positive integer")
    _require(isinstance(cfg.seeds, list) and cfg.seeds and all(isinstance(s, int) for s in cfg.seeds),
             "seeds", "must be a non-empty list of integers")
    _require(isinstance(cfg.k, int) and cfg.k >= 1, "k", "must be a positive integer")
    _require(isinstance(cfg.stride, int) and cfg.stride >= 1, "stride", "must be a positive integer")
    _require(cfg.noise in ("isotropic", "factor"), "noise", "must be 'isotropic' or 'factor'")
    _require(cfg.project_dim is None or (isinstance(cfg.project_dim, int) and cfg.project_dim >= 1),
             "project_dim", "must be null or a positive integer")
    _require(isinstance(cfg.k_range, list) and len(cfg.k_range) == 2 and 1 <= cfg.k_range[0] <= cfg.k_range[1],
             "k_range", "must be [lo, hi] with 1 <= lo <= hi")
    _require(cfg.spectrum_scale in ("ratio", "raw"), "spectrum_scale", "must be 'ratio' or 'raw'")
    _require(0.0 < cfg.tail_fraction <= 1.0, "tail_fraction", "must lie in (0, 1]")
    _require(isinstance(cfg.proj_components, int) and cfg.proj_components >= 1,
             "proj_components", "must be a positive integer")
    _require(all(isinstance(p, list) and len(p) == 2 and min(p) >= 1 for p in cfg.tableau_pairs),
             "tableau_pairs", "must be a list of [i, j] component pairs")
    _require(isinstance(cfg.decay_stride, int) and cfg.decay_stride >= 1, "decay_stride", "must be a positive integer")
    _require(cfg.burn_in_factor is None or cfg.burn_in_factor >= 0, "burn_in_factor", "must be null or >= 0")
    if kind == OU:
        alphas = cfg.alpha if isinstance(cfg.alpha, list) else [cfg.alpha]
        _require(all(0.0 < a < 2.0 for a in alphas), "alpha", "each value must lie in (0, 2)")
    # remaining parameter ranges are enforced by ProcessSpec
    cfg.sweep()
    return cfg


def bundled_config_path(name: str) -> Path:
    return Path(str(resources.files("walkpca") / "configs" / f"{name}.json"))


def load_config(path_or_name) -> ExperimentConfig:
    """Load a config file, or a bundled config by name (e.g. ``flat_fig1``)."""
    p = Path(path_or_name)
    if not p.exists() and str(path_or_name) in BUNDLED:
        p = bundled_config_path(str(path_or_name))
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config {path_or_name!r} not found (bundled: {', '.join(BUNDLED)})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    return config_from_dict(doc)
