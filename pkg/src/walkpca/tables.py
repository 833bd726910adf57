"""Delimited numeric tables (CSV) written with shortest round-trip floats."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import FormatError


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, columns) -> None:
    cols = [np.asarray(c) for c in columns]
    n = cols[0].shape[0] if cols else 0
    if any(c.shape[0] != n for c in cols):
        raise ValueError("columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i].item()) for c in cols) + "\n")


def read_csv(path) -> dict:
    """Read a numeric CSV with a header into ``{column: float array}``."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        data = {h: [] for h in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}")
            try:
                for h, v in zip(header, row):
                    data[h].append(float(v))
            except ValueError:
                raise FormatError(f"{path}: line {lineno} has a non-numeric field") from None
    return {h: np.array(v) for h, v in data.items()}


@dataclass
class SpectrumTable:
    k: np.ndarray
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray


SPECTRUM_HEADER = ("k", "eigenvalue", "explained_ratio")


def write_spectrum(path, eigenvalues, ratios) -> None:
    k = np.arange(1, len(eigenvalues) + 1)
    write_csv(path, SPECTRUM_HEADER, [k, eigenvalues, ratios])


def read_spectrum(path) -> SpectrumTable:
    data = read_csv(path)
    missing = [c for c in SPECTRUM_HEADER if c not in data]
    if missing:
        raise FormatError(f"{path}: missing spectrum columns {missing}")
    return SpectrumTable(data["k"].astype(int), data["eigenvalue"], data["explained_ratio"])


def write_projections(path, projections, components=None) -> None:
    P = np.asarray(projections)
    components = list(range(1, P.shape[1] + 1)) if components is None else list(components)
    header = ["t"] + [f"proj_k{k}" for k in components]
    t = np.arange(1, P.shape[0] + 1)
    write_csv(path, header, [t] + [P[:, j] for j in range(P.shape[1])])


def read_projections(path):
    """Returns ``(components, matrix)`` from a projection CSV."""
    data = read_csv(path)
    names = [h for h in data if h.startswith("proj_k")]
    comps = [int(h[len("proj_k"):]) for h in names]
    return comps, np.column_stack([data[h] for h in names])


def write_series(path, name, values, t=None) -> None:
    values = np.asarray(values)
    t = np.arange(1, values.shape[0] + 1) if t is None else np.asarray(t)
    write_csv(path, ["t", name], [t, values])
