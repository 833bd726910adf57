"""Trajectory files, subsampling and streaming random Gaussian projection.

Binary layout (little-endian)::

    b"WSP1" | u32 version (=1) | u32 n | u32 d | n*d float64, row-major

The text variant has one state per line, comma-separated decimals, no
header. ``read_trajectory`` sniffs the magic bytes to pick a parser.
"""

import os
import struct

import numpy as np

from .errors import DimensionMismatchError, FormatError, SpecError
from .processes import Trajectory

MAGIC = b"WSP1"
VERSION = 1
_HEADER = struct.Struct("<4sIII")
HEADER_SIZE = _HEADER.size
_U32_MAX = 2 ** 32 - 1

# Fixed so a given seed always maps to the same projection matrix.
PROJECTION_BLOCK = 2048
# stream tag; 1 and 2 are taken by the regression target and noise factors
PROJECTION_STREAM = 3


def write_trajectory(traj: Trajectory, path) -> None:
    n, d = traj.states.shape
    if n > _U32_MAX or d > _U32_MAX:
        raise FormatError(f"trajectory {n} x {d} exceeds the u32 header fields")
    payload = np.ascontiguousarray(traj.states, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(payload.tobytes(order="C"))


def write_trajectory_text(traj: Trajectory, path) -> None:
    """Text variant; ``repr`` gives the shortest round-trip decimal for each float."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in traj.states.tolist():
            fh.write(",".join(map(repr, row)))
            fh.write("\n")


def _read_binary(raw: bytes, path) -> np.ndarray:
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = n * d * 8
    have = len(raw) - HEADER_SIZE
    if expected > have:
        raise FormatError(f"{path}: truncated payload, header declares {n} x {d} "
                          f"({expected} bytes) but only {have} bytes follow")
    if expected < have:
        raise FormatError(f"{path}: {have - expected} trailing bytes after the declared payload")
    return np.frombuffer(raw, dtype="<f8", count=n * d, offset=HEADER_SIZE).reshape(n, d).astype(np.float64)


def _read_text(raw: bytes, path) -> np.ndarray:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: neither a WSP1 binary file nor UTF-8 text") from None
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise FormatError(f"{path}: line {lineno} has {len(fields)} columns, expected {width}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise FormatError(f"{path}: line {lineno} contains a non-numeric field") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def read_trajectory(path) -> Trajectory:
    """Load a binary or text trajectory. 32-bit inputs end up as float64."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] == MAGIC:
        states = _read_binary(raw, path)
    else:
        states = _read_text(raw, path)
    try:
        return Trajectory(states, {"source": os.fspath(path), "stride": 1})
    except DimensionMismatchError as exc:
        raise FormatError(f"{path}: {exc}") from None


def subsample(traj: Trajectory, stride: int) -> Trajectory:
    """Keep rows t = stride, 2*stride, ... (1-based)."""
    if int(stride) != stride or stride < 1:
        raise SpecError(f"stride must be a positive integer, got {stride!r}")
    stride = int(stride)
    if stride > traj.n:
        raise SpecError(f"stride {stride} exceeds trajectory length {traj.n}")
    kept = traj.states[stride - 1::stride]
    if kept.shape[0] < 2:
        raise SpecError(f"stride {stride} leaves fewer than 2 of {traj.n} rows")
    meta = dict(traj.meta)
    meta["stride"] = meta.get("stride", 1) * stride
    return Trajectory(kept.copy(), meta)


def _block_matrix(seed, block: int, target_dim: int, width: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), PROJECTION_STREAM, int(block)])
    return rng.standard_normal((width, target_dim)) * (1.0 / np.sqrt(target_dim))


def projection_matrix(d: int, target_dim: int, seed, block_size: int = PROJECTION_BLOCK) -> np.ndarray:
    """Materialise the ``target_dim x d`` matrix used by ``random_project``."""
    cols = [
        _block_matrix(seed, b, target_dim, min(block_size, d - j0)).T
        for b, j0 in enumerate(range(0, d, block_size))
    ]
    return np.hstack(cols)


def random_project(traj: Trajectory, target_dim: int, seed, block_size: int = PROJECTION_BLOCK) -> Trajectory:
    """Map each state through a Gaussian matrix with N(0, 1/target_dim) entries.

    The matrix is generated one block of input coordinates at a time, each
    block from its own ``(seed, block_index)`` stream, and never held whole.
    """
    if int(target_dim) != target_dim or target_dim < 1:
        raise SpecError(f"target_dim must be a positive integer, got {target_dim!r}")
    X = traj.states
    out = np.zeros((traj.n, int(target_dim)))
    for b, j0 in enumerate(range(0, traj.d, block_size)):
        j1 = min(j0 + block_size, traj.d)
        out += X[:, j0:j1] @ _block_matrix(seed, b, int(target_dim), j1 - j0)
    meta = dict(traj.meta)
    meta["projection"] = {"target_dim": int(target_dim), "seed": seed, "from_dim": traj.d}
    return Trajectory(out, meta)
