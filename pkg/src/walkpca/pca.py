"""PCA of trajectories through the n x n Gram matrix.

For a trajectory with far fewer steps than dimensions, the nonzero spectrum
of the d x d covariance equals that of the n x n Gram matrix of the centered
design matrix, and the projection onto component k is sqrt(lambda_k) times
the k-th unit eigenvector of the Gram matrix. ``pca_direct`` takes the long
way (d x d covariance, own Jacobi solver) and exists as a test oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError, SpecError
from .processes import Trajectory

DEFAULT_MAX_N = 5000
DIRECT_MAX_D = 500
ZERO_CUTOFF = 1e-12


@dataclass
class PcaResult:
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray
    time_modes: np.ndarray
    projections: np.ndarray
    total_variance: float

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]


def center(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DimensionMismatchError("center needs a 2-D matrix with at least 2 rows")
    return X - X.mean(axis=0)


def gram(Xc) -> np.ndarray:
    G = Xc @ Xc.T
    # symmetrise away BLAS rounding asymmetry
    return 0.5 * (G + G.T)


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive (first on ties)."""
    V = np.array(V, dtype=np.float64, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _check_symmetric(A: np.ndarray, rtol: float = 1e-10) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > rtol * max(scale, np.finfo(float).tiny):
        raise SpecError("matrix is not symmetric to 1e-10 relative")


def eigh_symmetric(G):
    """Eigenvalues in descending order with orthonormal, sign-fixed eigenvectors.

    Backed by LAPACK (``numpy.linalg.eigh``).
    """
    G = np.asarray(G, dtype=np.float64)
    _check_symmetric(G)
    try:
        w, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], fix_signs(V[:, order])


def _round_robin(m: int):
    """Pairings for one Jacobi sweep: every index pair exactly once, in rounds of disjoint pairs."""
    players = list(range(m + (m % 2)))
    half = len(players) // 2
    rounds = []
    for _ in range(len(players) - 1):
        pairs = [(players[i], players[-1 - i]) for i in range(half)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < m and q < m]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A, tol: float = 1e-15, max_sweeps: int = 60):
    """Parallel-order (round-robin) Jacobi eigenvalue iteration.

    Each round applies a set of disjoint plane rotations at once, each one
    zeroing its off-diagonal pair; sweeps repeat until the off-diagonal
    Frobenius norm falls below ``tol * ||A||_F``. Returns eigenvalues in
    descending order and sign-fixed eigenvectors.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    _check_symmetric(A)
    m = A.shape[0]
    V = np.eye(m)
    norm = np.linalg.norm(A)
    if norm == 0.0 or m == 1:
        return np.diag(A).copy(), V
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        # summed directly; total minus diagonal cancels near convergence
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol * norm:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > 1e-300
            safe = np.where(active, apq, 1.0)
            tau = (A[Q, Q] - A[P, P]) / (2.0 * safe)
            big = np.abs(tau) > 1e150
            tau_c = np.where(big, 0.0, tau)
            t = np.where(big, 0.5 / np.where(big, tau, 1.0),
                         np.sign(tau_c + (tau_c == 0)) / (np.abs(tau_c) + np.sqrt(1.0 + tau_c * tau_c)))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            for M in (A, V):
                mp, mq = M[:, P].copy(), M[:, Q].copy()
                M[:, P] = c * mp - s * mq
                M[:, Q] = s * mp + c * mq
            ap, aq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * ap - s[:, None] * aq
            A[Q, :] = s[:, None] * ap + c[:, None] * aq
            A[P, Q] = np.where(active, 0.0, A[P, Q])
            A[Q, P] = A[P, Q]
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], fix_signs(V[:, order])


def _clamp(w: np.ndarray) -> np.ndarray:
    w = np.array(w, dtype=np.float64, copy=True)
    top = w[0] if w.size else 0.0
    w[w < ZERO_CUTOFF * max(top, 0.0)] = 0.0
    return w


def _states(traj):
    return traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=np.float64)


def pca_trajectory(traj, k: int, max_n: int = DEFAULT_MAX_N) -> PcaResult:
    """Top-``k`` PCA of a trajectory via the Gram matrix of its centered states.

    Cost is O(n^3 + n^2 d); ``max_n`` guards against accidentally huge ``n``.
    """
    X = _states(traj)
    n = X.shape[0]
    if k < 1 or k > n:
        raise SpecError(f"component count k={k} must lie in [1, n={n}]")
    if max_n is not None and n > max_n:
        raise SpecError(f"n={n} exceeds the PCA cap of {max_n}; pass max_n to override")
    Xc = center(X)
    G = gram(Xc)
    total = float(np.trace(G))
    w, U = eigh_symmetric(G)
    w = _clamp(w)[:k]
    U = U[:, :k]
    ratios = w / total if total > 0 else np.zeros_like(w)
    return PcaResult(w, ratios, U, U * np.sqrt(w), total)


def pca_direct(traj, k: int, max_d: int = DIRECT_MAX_D) -> PcaResult:
    """Oracle: eigendecompose the d x d covariance with ``jacobi_eigh``."""
    X = _states(traj)
    n, d = X.shape
    if k < 1 or k > n:
        raise SpecError(f"component count k={k} must lie in [1, n={n}]")
    if d > max_d:
        raise SpecError(f"d={d} exceeds the direct-PCA oracle cap of {max_d}")
    Xc = center(X)
    C = Xc.T @ Xc
    C = 0.5 * (C + C.T)
    w, V = jacobi_eigh(C)
    w = _clamp(w)
    total = float(np.sum(Xc * Xc))

    kk = min(k, d)
    proj = Xc @ V[:, :kk]
    modes = np.zeros((n, k))
    projections = np.zeros((n, k))
    for j in range(kk):
        if w[j] <= 0.0:
            continue
        mode = proj[:, j] / np.sqrt(w[j])
        # same sign convention as the Gram route, applied in the time domain
        i = int(np.argmax(np.abs(mode)))
        sgn = -1.0 if mode[i] < 0 else 1.0
        modes[:, j] = sgn * mode
        projections[:, j] = sgn * proj[:, j]
    eig = np.zeros(k)
    eig[:kk] = w[:kk]
    ratios = eig / total if total > 0 else np.zeros(k)
    return PcaResult(eig, ratios, modes, projections, total)
