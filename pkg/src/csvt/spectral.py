"""Singular values of the column-centred data matrix.

Data matrices are ``p x n`` float arrays with one sample per column.  Small
inputs go through a direct SVD; large ones through the symmetric
eigendecomposition of the smaller centred Gram matrix, accumulated over
blocks so the centred matrix itself is never formed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

DEFAULT_DIRECT_CUTOFF = 2048
DEFAULT_BLOCK_SIZE = 4096

Strategy = Literal["auto", "direct", "gram"]
Side = Literal["rows", "cols"]


class GramAllocationError(MemoryError):
    """The requested Gram side does not fit in memory; try the other side."""


@dataclass(frozen=True)
class SpectrumResult:
    singular_values: np.ndarray
    strategy: str  # "direct", "gram_rows" or "gram_cols"
    wall_time: float

    def __len__(self) -> int:
        return len(self.singular_values)


def as_data_matrix(X) -> np.ndarray:
    """Validate ``X`` as a finite ``p x n`` matrix and return it as float64."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"data matrix must be 2-D (p x n), got shape {arr.shape}")
    p, n = arr.shape
    if p < 1 or n < 1:
        raise ValueError(f"data matrix must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("data matrix contains non-finite entries")
    return arr


def column_mean(X) -> np.ndarray:
    """Sample mean of the columns, a length-``p`` vector."""
    return as_data_matrix(X).mean(axis=1)


def _zeros_square(m: int) -> np.ndarray:
    try:
        return np.zeros((m, m))
    except MemoryError as exc:  # pragma: no cover - depends on the host
        raise GramAllocationError(
            f"cannot allocate a {m} x {m} Gram matrix; use the other side"
        ) from exc


def _symmetrize(G: np.ndarray) -> np.ndarray:
    G += G.T
    G *= 0.5
    return G


def centered_gram_from_blocks(blocks: Iterable[np.ndarray]) -> tuple[np.ndarray, int]:
    """One pass over column blocks, returning ``(X~ X~^T, n)``.

    Works on any iterable of ``p x b`` arrays, e.g. a file read in chunks.
    Columns are shifted by the mean of the first block before accumulating,
    which keeps the subtraction ``S - n d d^T`` well conditioned when the data
    carry a large common offset.
    """
    G = None
    total = None
    shift = None
    buf = ones = None
    n = 0
    for block in blocks:
        block = np.asarray(block, dtype=np.float64)
        if block.ndim != 2 or block.shape[1] == 0:
            continue
        b = block.shape[1]
        if G is None:
            p = block.shape[0]
            shift = block.mean(axis=1)
            G = _zeros_square(p)
            total = np.zeros(p)
        elif block.shape[0] != G.shape[0]:
            raise ValueError("all blocks must have the same number of rows")
        if buf is None or buf.shape[1] < b:
            buf = np.empty((G.shape[0], b))
            ones = np.ones(b)
        B = buf[:, :b]
        np.subtract(block, shift[:, None], out=B)
        G += B @ B.T
        total += B @ ones[:b]
        n += b
    if G is None:
        raise ValueError("no data in block stream")
    d = total / n
    G -= n * np.outer(d, d)
    return _symmetrize(G), n


def centered_gram(X, side: Side = "rows", block_size: int = DEFAULT_BLOCK_SIZE) -> np.ndarray:
    """Centred Gram matrix of ``X`` for the chosen side.

    ``side="rows"`` gives the ``p x p`` matrix ``X~ X~^T``, accumulated over
    column blocks.  ``side="cols"`` gives the ``n x n`` matrix ``X~^T X~``,
    accumulated over row blocks; each row block holds complete rows, so it
    is centred exactly before its contribution is added.  The result is
    symmetrized before returning.
    """
    X = as_data_matrix(X)
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    p, n = X.shape
    if side == "rows":
        blocks = (X[:, a:a + block_size] for a in range(0, n, block_size))
        G, _ = centered_gram_from_blocks(blocks)
        return G
    if side == "cols":
        G = _zeros_square(n)
        for a in range(0, p, block_size):
            B = X[a:a + block_size]
            B = B - B.mean(axis=1, keepdims=True)
            G += B.T @ B
        return _symmetrize(G)
    raise ValueError(f"side must be 'rows' or 'cols', got {side!r}")


def _gram(X: np.ndarray, side: Side, block_size: int) -> np.ndarray:
    # uncentred counterpart of centered_gram, same blocking
    p, n = X.shape
    if side == "rows":
        G = _zeros_square(p)
        for a in range(0, n, block_size):
            B = X[:, a:a + block_size]
            G += B @ B.T
    else:
        G = _zeros_square(n)
        for a in range(0, p, block_size):
            B = X[a:a + block_size]
            G += B.T @ B
    return _symmetrize(G)


def singular_values_from_gram(G: np.ndarray) -> np.ndarray:
    """Non-increasing singular values from a PSD Gram matrix.

    Eigenvalues below ``dim * eps * lambda_max`` are at rounding level and
    are set to zero before the square root, as in the usual numerical-rank
    tolerance.  Without this a zero singular value would come back near
    ``sqrt(eps) * sigma_1``.
    """
    w = np.linalg.eigvalsh(G)[::-1]
    if w.size and w[0] > 0:
        w[w < w[0] * G.shape[0] * np.finfo(np.float64).eps] = 0.0
    np.clip(w, 0.0, None, out=w)
    return np.sqrt(w)


def singular_values(
    X,
    strategy: Strategy = "auto",
    *,
    center: bool = False,
    direct_cutoff: int = DEFAULT_DIRECT_CUTOFF,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SpectrumResult:
    """Singular values of ``X`` (or of its column-centred version).

    Parameters
    ----------
    X : array_like, shape (p, n)
        Data matrix, samples as columns.
    strategy : {"auto", "direct", "gram"}
        ``"auto"`` uses a direct SVD when ``max(p, n) <= direct_cutoff`` and
        the Gram route otherwise.
    center : bool
        Subtract the column mean first.
    direct_cutoff : int
        Size limit for the direct route under ``"auto"``.
    block_size : int
        Columns (or rows) per accumulation block on the Gram route.

    Returns
    -------
    SpectrumResult
        ``min(p, n)`` values, sorted non-increasing.
    """
    X = as_data_matrix(X)
    p, n = X.shape
    if strategy == "auto":
        strategy = "direct" if max(p, n) <= direct_cutoff else "gram"
    t0 = time.perf_counter()
    if strategy == "direct":
        A = X - X.mean(axis=1, keepdims=True) if center else X
        sv = np.linalg.svd(A, compute_uv=False)
        used = "direct"
    elif strategy == "gram":
        side: Side = "rows" if p <= n else "cols"
        G = centered_gram(X, side, block_size) if center else _gram(X, side, block_size)
        sv = singular_values_from_gram(G)
        used = f"gram_{side}"
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return SpectrumResult(sv, used, time.perf_counter() - t0)


def singular_values_centered(
    X,
    strategy: Strategy = "auto",
    *,
    direct_cutoff: int = DEFAULT_DIRECT_CUTOFF,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SpectrumResult:
    """Singular values of ``X - mean(X) 1^T``; see :func:`singular_values`."""
    return singular_values(
        X, strategy, center=True, direct_cutoff=direct_cutoff, block_size=block_size
    )


def spectral_norm(X) -> float:
    """Largest singular value of ``X`` (no centring)."""
    return float(singular_values(X, "auto").singular_values[0])
