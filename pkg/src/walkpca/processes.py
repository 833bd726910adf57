"""Simulators for high-dimensional walks and per-step trajectory diagnostics.

All simulators share one noise-drawing scheme (one ``noise.sample`` call per
step, in order), so degenerate parameter choices reproduce the flat walk
bit for bit: momentum with ``gamma=0``, OU with ``alpha=0`` and a decayed
walk with ``decay_rate=1``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import noise as noise_mod
from .errors import DimensionMismatchError, DivergenceError, DomainError, SpecError

FLAT = "flat"
MOMENTUM = "momentum"
OU = "ou"
DECAYED = "decayed"
LINREG = "linreg"
KINDS = (FLAT, MOMENTUM, OU, DECAYED, LINREG)
TARGET_STREAM = 1

_ALIASES = {
    "flat": FLAT,
    "momentum": MOMENTUM,
    "ou": OU,
    "ornsteinuhlenbeck": OU,
    "ornstein-uhlenbeck": OU,
    "decayed": DECAYED,
    "decayedstep": DECAYED,
    "linreg": LINREG,
    "linregsgd": LINREG,
}


def canonical_kind(kind: str) -> str:
    try:
        return _ALIASES[str(kind).lower().replace("_", "")]
    except KeyError:
        raise SpecError(f"unknown process kind {kind!r}; expected one of {KINDS}") from None


@dataclass
class Trajectory:
    """An ``n x d`` design matrix of states x_1..x_n (x_0 is implicit)."""

    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.float64)
        if states.ndim != 2:
            raise DimensionMismatchError(f"states must be 2-D, got shape {states.shape}")
        n, d = states.shape
        if n < 2 or d < 1:
            raise DimensionMismatchError(f"trajectory needs n >= 2 and d >= 1, got {n} x {d}")
        if not np.all(np.isfinite(states)):
            raise DivergenceError("trajectory contains non-finite entries")
        self.states = states
        self.meta = dict(self.meta)
        self.meta["n"] = n
        self.meta["d"] = d

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def d(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """Which process to simulate and its parameters.

    ``alpha`` accepts 0 (the flat-walk limit) in addition to the open interval
    (0, 2). ``decay_applies_to`` selects whether ``decay_rate`` multiplies the
    noise variance ("var", so the std shrinks by ``decay_rate**(t/2)``) or the
    standard deviation directly ("std").
    """

    kind: str = FLAT
    gamma: float = 0.0
    alpha: float = 0.0
    decay_rate: float = 1.0
    decay_applies_to: str = "var"
    lr: float = 1e-3
    target_seed: int = 0
    initial_state: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if not 0.0 <= self.gamma < 1.0:
            raise SpecError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 <= self.alpha < 2.0:
            raise SpecError(f"alpha must lie in [0, 2), got {self.alpha}")
        if not 0.0 < self.decay_rate <= 1.0:
            raise SpecError(f"decay_rate must lie in (0, 1], got {self.decay_rate}")
        if self.decay_applies_to not in ("std", "var"):
            raise SpecError(f"decay_applies_to must be 'std' or 'var', got {self.decay_applies_to!r}")
        if not self.lr > 0.0:
            raise SpecError(f"lr must be positive, got {self.lr}")
        if self.initial_state is not None:
            x0 = np.array(self.initial_state, dtype=np.float64)
            if x0.ndim != 1:
                raise SpecError("initial_state must be a vector")
            x0.setflags(write=False)
            object.__setattr__(self, "initial_state", x0)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == MOMENTUM:
            out["gamma"] = self.gamma
        elif self.kind == OU:
            out["alpha"] = self.alpha
        elif self.kind == DECAYED:
            out["decay_rate"] = self.decay_rate
            out["decay_applies_to"] = self.decay_applies_to
        elif self.kind == LINREG:
            out["lr"] = self.lr
            out["target_seed"] = self.target_seed
        return out


def _noise_scales(spec: ProcessSpec, n: int) -> np.ndarray:
    t = np.arange(1, n + 1, dtype=np.float64)
    power = t if spec.decay_applies_to == "std" else t / 2.0
    return spec.decay_rate ** power


def _start(spec: ProcessSpec, d: int) -> np.ndarray:
    if spec.initial_state is None:
        return np.zeros(d)
    if spec.initial_state.shape[0] != d:
        raise DimensionMismatchError(
            f"initial_state has dimension {spec.initial_state.shape[0]}, noise has {d}"
        )
    return spec.initial_state.copy()


def _diverged(t: int, x: np.ndarray, spec: ProcessSpec) -> DivergenceError:
    finite = x[np.isfinite(x)]
    peak = float(np.max(np.abs(finite))) if finite.size else float("nan")
    return DivergenceError(
        f"{spec.kind} state became non-finite at step {t} "
        f"(params {spec.describe()}, largest finite |x_i| = {peak:.3g})",
        step=t,
    )


def simulate(spec: ProcessSpec, n: int, noise: noise_mod.NoiseModel, seed) -> Trajectory:
    """Run one of the noise-driven recurrences for ``n`` steps.

    flat      x_t = x_{t-1} + xi_t
    momentum  v_t = gamma v_{t-1} + xi_t,  x_t = x_{t-1} + v_t  (v_0 = 0)
    ou        x_t = (1 - alpha) x_{t-1} + xi_t
    decayed   x_t = x_{t-1} + s_t xi_t,  s_t = decay_rate**t (std) or **(t/2) (var)
    """
    if spec.kind == LINREG:
        raise SpecError("use simulate_linreg_sgd for the linreg process")
    if n < 2:
        raise SpecError(f"need at least 2 steps, got {n}")
    d = noise.dim
    rng = np.random.default_rng(seed)
    x = _start(spec, d)
    states = np.empty((n, d))

    # overflow surfaces as DivergenceError below, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        if spec.kind == FLAT:
            for t in range(n):
                x = x + noise_mod.sample(noise, rng)
                states[t] = x
        elif spec.kind == MOMENTUM:
            v = np.zeros(d)
            g = spec.gamma
            for t in range(n):
                v = g * v + noise_mod.sample(noise, rng)
                x = x + v
                states[t] = x
        elif spec.kind == OU:
            keep = 1.0 - spec.alpha
            for t in range(n):
                x = keep * x + noise_mod.sample(noise, rng)
                states[t] = x
        elif spec.kind == DECAYED:
            scales = _noise_scales(spec, n)
            for t in range(n):
                x = x + scales[t] * noise_mod.sample(noise, rng)
                states[t] = x
        else:  # pragma: no cover - canonical_kind guards this
            raise SpecError(spec.kind)

    if not np.all(np.isfinite(states)):
        bad = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
        raise _diverged(bad + 1, states[bad], spec)

    meta = {"process": spec.describe(), "seed": seed, "noise": noise.describe(), "stride": 1}
    return Trajectory(states, meta)


def simulate_linreg_sgd(d: int, lr: float, n: int, seed, target_seed=None, initial=None):
    """Single-sample SGD on y = W x with loss 0.5 (y - y')^2.

    The hidden target W ~ N(0, I/d) is drawn once from a stream derived from
    ``target_seed`` (defaults to ``seed``); every step draws a fresh input x ~ N(0, I_d).
    Returns the trajectory of estimates (one row per step, after the update)
    and the loss evaluated on each step's input before its update.

    Single-sample updates contract the error only when ``lr < 2/(d + 2)``.
    """
    if d < 1:
        raise SpecError(f"d must be positive, got {d}")
    if not lr > 0:
        raise SpecError(f"lr must be positive, got {lr}")
    if n < 2:
        raise SpecError(f"need at least 2 steps, got {n}")
    target_seed = seed if target_seed is None else target_seed
    target_rng = np.random.default_rng([int(target_seed), TARGET_STREAM])
    W = target_rng.standard_normal(d) / np.sqrt(d)
    rng = np.random.default_rng(seed)
    w = np.zeros(d) if initial is None else np.array(initial, dtype=np.float64)
    if w.shape != (d,):
        raise DimensionMismatchError(f"initial estimate has shape {w.shape}, expected ({d},)")

    states = np.empty((n, d))
    loss = np.empty(n)
    for t in range(n):
        x = rng.standard_normal(d)
        with np.errstate(over="ignore", invalid="ignore"):
            resid = w @ x - W @ x
            loss[t] = 0.5 * resid * resid
            w = w - (lr * resid) * x
        if not np.isfinite(loss[t]) or not np.all(np.isfinite(w)):
            raise DivergenceError(
                f"linreg SGD diverged at step {t + 1} (lr={lr}, d={d}); "
                f"single-sample SGD needs lr < {2.0 / (d + 2):.3g}",
                step=t + 1,
            )
        states[t] = w

    spec = ProcessSpec(LINREG, lr=lr, target_seed=target_seed)
    meta = {"process": spec.describe(), "seed": seed, "stride": 1}
    traj = Trajectory(states, meta)
    traj.meta["target"] = W
    return traj, loss


def step_norms(traj: Trajectory, origin=None) -> np.ndarray:
    """Norms ||x_t - x_{t-1}|| for t = 1..n, with x_0 the origin."""
    x0 = np.zeros((1, traj.d)) if origin is None else np.asarray(origin, float).reshape(1, -1)
    steps = np.diff(np.vstack([x0, traj.states]), axis=0)
    return np.linalg.norm(steps, axis=1)


def distance_from_origin(traj: Trajectory) -> np.ndarray:
    return np.linalg.norm(traj.states, axis=1)


def fit_exponential_decay(series):
    """Least-squares line through ``log(series)`` against the step index.

    Returns
    -------
    rate : float
        Per-step multiplicative factor ``exp(slope)``.
    r_squared : float
        Coefficient of determination of the log-linear fit; 0 when the
        series is constant (no variance to explain).
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise DomainError("need a 1-D series with at least 3 points")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise DomainError("exponential fit requires strictly positive finite values")
    logy = np.log(y)
    t = np.arange(y.size, dtype=np.float64)
    tc = t - t.mean()
    yc = logy - logy.mean()
    slope = float(tc @ yc / (tc @ tc))
    ss_tot = float(yc @ yc)
    if ss_tot == 0.0:
        return float(np.exp(slope)), 0.0
    resid = yc - slope * tc
    r2 = 1.0 - float(resid @ resid) / ss_tot
    return float(np.exp(slope)), r2


def concatenate_blocks(trajs) -> Trajectory:
    """Stack coordinate blocks of equal length side by side."""
    trajs = list(trajs)
    ns = {t.n for t in trajs}
    if len(ns) != 1:
        raise DimensionMismatchError(f"blocks have different lengths {sorted(ns)}")
    meta = {"blocks": [t.meta.get("process") for t in trajs], "stride": 1}
    return Trajectory(np.hstack([t.states for t in trajs]), meta)


def simulate_anisotropic_ou(alphas, dims, n: int, seed) -> Trajectory:
    """OU walk in a potential with one curvature per coordinate block.

    Each block is an independent isotropic OU run; blocks are rescaled so
    every coordinate has step variance ``1 / sum(dims)`` and the combined
    noise covariance keeps unit trace.
    """
    alphas = list(alphas)
    dims = [int(k) for k in dims]
    if len(alphas) != len(dims) or not alphas:
        raise SpecError("alphas and dims must be non-empty and of equal length")
    total = sum(dims)
    seeds = np.random.SeedSequence(seed).spawn(len(dims))
    blocks = []
    for a, k, ss in zip(alphas, dims, seeds):
        tr = simulate(ProcessSpec(OU, alpha=a), n, noise_mod.make_isotropic(k), ss)
        tr.states *= np.sqrt(k / total)
        blocks.append(tr)
    out = concatenate_blocks(blocks)
    out.meta["process"] = {"kind": "anisotropic_ou", "alphas": alphas, "dims": dims}
    out.meta["seed"] = seed
    return out
