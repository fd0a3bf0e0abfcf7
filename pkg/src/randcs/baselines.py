"""Reference solvers the benchmark compares against.

Orthogonal matching pursuit for conventional compressed sensing, and
binary iterative hard thresholding (plain and normalized) for the 1-bit
setting where only the signs of the measurements are available.  All three
consume a single sensing matrix and a single measurement vector.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .numerics import DimensionMismatchError, matvec
from .recovery import RecoveredSignal
from .sensing import Signal

_PIVOT_RTOL = 1e-12


class RankDeficiencyError(RuntimeError):
    """The selected-column least-squares system is numerically singular."""


def hard_threshold(x: np.ndarray, s: int) -> np.ndarray:
    """Keep the s largest-magnitude entries of x, zeroing the rest.

    Ties in magnitude are broken toward the lowest index.  Runs in
    expected linear time via selection of the s-th largest magnitude.
    """
    n = x.shape[0]
    if s <= 0:
        return np.zeros_like(x)
    if s >= n:
        return x.copy()
    mags = np.abs(x)
    cut = np.partition(mags, n - s)[n - s]
    keep = mags > cut
    deficit = s - int(np.count_nonzero(keep))
    if deficit > 0:
        keep[np.flatnonzero(mags == cut)[:deficit]] = True
    out = np.zeros_like(x)
    out[keep] = x[keep]
    return out


def sign_quantize(A: np.ndarray, z: Signal | np.ndarray) -> np.ndarray:
    """One-bit measurements: +1 where a coordinate of A @ z is positive, else -1."""
    zv = z.values if isinstance(z, Signal) else np.asarray(z, dtype=np.float64)
    return _sign_pm1(matvec(A, zv))


def _sign_pm1(y: np.ndarray) -> np.ndarray:
    # zero maps to -1, matching the measurement quantizer
    return np.where(y > 0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class OmpState:
    """Greedy state after one selection: residual, chosen columns, fitted coefficients."""

    residual: np.ndarray
    selected: tuple[int, ...]
    coefficients: np.ndarray


def _back_substitute(R: np.ndarray, c: np.ndarray) -> np.ndarray:
    t = c.shape[0]
    x = np.empty(t)
    for i in range(t - 1, -1, -1):
        x[i] = (c[i] - R[i, i + 1 : t] @ x[i + 1 : t]) / R[i, i]
    return x


def omp_steps(
    A: np.ndarray, b: np.ndarray, s_budget: int, residual_tol: float = 0.0
) -> Iterator[OmpState]:
    """Iterate orthogonal matching pursuit, yielding the state after each selection.

    Each step picks the unselected column with the largest normalized
    correlation |<A_j, residual>| / ||A_j|| (ties to the lowest index),
    extends an incrementally updated QR factorization of the selected
    columns, and re-fits the least-squares coefficients.  Stops after
    ``s_budget`` selections or once ||residual|| <= residual_tol.

    Raises :class:`RankDeficiencyError` when a new column is numerically
    dependent on the selected ones (pivot below 1e-12 of the first pivot).
    """
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"cannot run matching pursuit with {A.shape} matrix and dim-{b.shape} vector"
        )
    k, n = A.shape
    if not 0 <= s_budget <= min(k, n):
        raise ValueError(f"sparsity budget must lie in [0, min(k, n)], got {s_budget}")

    col_norms = np.linalg.norm(A, axis=0)
    safe_norms = np.where(col_norms > 0, col_norms, np.inf)
    residual = b.astype(np.float64, copy=True)
    Q = np.empty((k, s_budget))
    R = np.zeros((s_budget, s_budget))
    qtb = np.empty(s_budget)
    selected: list[int] = []
    first_pivot = None

    for t in range(s_budget):
        if np.linalg.norm(residual) <= residual_tol:
            return
        scores = np.abs(A.T @ residual) / safe_norms
        if selected:
            scores[selected] = -np.inf
        j = int(np.argmax(scores))
        col = A[:, j]
        # orthogonalize against Q, twice for numerical safety
        proj = Q[:, :t].T @ col
        w = col - Q[:, :t] @ proj
        proj2 = Q[:, :t].T @ w
        w -= Q[:, :t] @ proj2
        pivot = np.linalg.norm(w)
        if first_pivot is None:
            first_pivot = pivot
        if pivot <= _PIVOT_RTOL * first_pivot:
            raise RankDeficiencyError(
                f"column {j} is numerically dependent on the {t} selected columns"
            )
        Q[:, t] = w / pivot
        R[: t, t] = proj + proj2
        R[t, t] = pivot
        qtb[t] = Q[:, t] @ residual
        residual = residual - Q[:, t] * qtb[t]
        selected.append(j)
        coeffs = _back_substitute(R[: t + 1, : t + 1], qtb[: t + 1])
        yield OmpState(
            residual=residual.copy(), selected=tuple(selected), coefficients=coeffs
        )


def omp(
    A: np.ndarray, b: np.ndarray, s_budget: int, residual_tol: float = 0.0
) -> RecoveredSignal:
    """Orthogonal matching pursuit; see :func:`omp_steps` for the loop itself."""
    state = None
    for state in omp_steps(A, b, s_budget, residual_tol):
        pass
    values = np.zeros(A.shape[1])
    support: frozenset[int] = frozenset()
    if state is not None:
        values[list(state.selected)] = state.coefficients
        support = frozenset(state.selected)
    return RecoveredSignal(values=values, support=support, method="omp")


@dataclass(frozen=True, eq=False)
class IhtState:
    """One hard-thresholded iterate of the 1-bit descent loop."""

    iterate: np.ndarray
    iteration: int
    step_size: float


def iht_steps(
    A: np.ndarray,
    signs: np.ndarray,
    s_budget: int,
    max_iters: int = 100,
    step: float = 1.0,
    normalize: bool = False,
) -> Iterator[IhtState]:
    """Binary iterative hard thresholding from a zero start.

    Update: x <- hard_threshold_s(x + (step / k) * A^T (signs - sign(A x))),
    where sign uses the same zero-to-minus-one convention as the quantizer.
    With ``normalize=True`` the iterate is rescaled to unit norm after each
    thresholding (skipped while the iterate is zero).
    """
    if max_iters < 1:
        raise ValueError(f"need at least one iteration, got {max_iters}")
    if A.ndim != 2 or signs.ndim != 1 or A.shape[0] != signs.shape[0]:
        raise DimensionMismatchError(
            f"cannot iterate with {A.shape} matrix and dim-{signs.shape} sign vector"
        )
    k = A.shape[0]
    x = np.zeros(A.shape[1])
    for it in range(1, max_iters + 1):
        mismatch = signs - _sign_pm1(A @ x)
        x = hard_threshold(x + (step / k) * (A.T @ mismatch), s_budget)
        if normalize:
            norm = np.linalg.norm(x)
            if norm > 0:
                x = x / norm
        yield IhtState(iterate=x, iteration=it, step_size=step)


def _run_iht(A, signs, s_budget, max_iters, step, normalize, method) -> RecoveredSignal:
    x = np.zeros(A.shape[1])
    for state in iht_steps(A, signs, s_budget, max_iters, step, normalize):
        x = state.iterate
    return RecoveredSignal(
        values=x,
        support=frozenset(int(i) for i in np.flatnonzero(x)),
        method=method,
    )


def biht(
    A: np.ndarray, signs: np.ndarray, s_budget: int, max_iters: int = 100, step: float = 1.0
) -> RecoveredSignal:
    """Binary iterative hard thresholding for 1-bit measurements."""
    return _run_iht(A, signs, s_budget, max_iters, step, False, "biht")


def nbiht(
    A: np.ndarray, signs: np.ndarray, s_budget: int, max_iters: int = 100, step: float = 1.0
) -> RecoveredSignal:
    """Normalized variant: each intermediate iterate is rescaled to unit norm."""
    return _run_iht(A, signs, s_budget, max_iters, step, True, "nbiht")
