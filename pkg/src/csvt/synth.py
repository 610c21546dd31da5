"""Synthetic Gaussian mixture data.

Centres are orthogonal with a common scale so every pair sits at distance
``delta`` (condition number 1).  Cluster sizes follow a floor on the
smallest cluster set by the balance parameter ``beta``.  The module also
builds the single-component and collinear-centre datasets used to show
what goes wrong without centring.

Random numbers come from :func:`make_rng` / :func:`replication_rng`
(SFC64 seeded through :class:`numpy.random.SeedSequence`), so a given
seed reproduces the same bytes on every run.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimator import TnRule, threshold


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed)))


def replication_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent stream for one replication, keyed by e.g. (point, rep)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.SFC64(ss))


def orthonormal_centers(p: int, K: int, delta: float, mode: str = "basis", seed=None) -> np.ndarray:
    """``p x K`` centre matrix ``(delta / sqrt 2) Q`` with orthonormal ``Q``.

    ``mode="basis"`` takes the first ``K`` standard basis vectors;
    ``mode="qr_random"`` orthonormalises a seeded Gaussian matrix.
    """
    if K > p:
        raise ValueError(f"need K <= p for orthonormal centres, got K={K}, p={p}")
    if K < 1:
        raise ValueError("K must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if mode == "basis":
        Q = np.eye(p, K)
    elif mode == "qr_random":
        Q, R = np.linalg.qr(make_rng(seed).standard_normal((p, K)))
        Q = Q * np.sign(np.diag(R))  # fix column signs
    else:
        raise ValueError(f"unknown centre mode {mode!r}")
    return (delta / math.sqrt(2.0)) * Q


def allocate_sizes(n: int, K: int, beta: float, rng=None, smallest: int | None = None):
    """Cluster sizes with a guaranteed smallest cluster.

    Every cluster gets ``n_min = max(1, floor(beta n / K))``.  One cluster
    (random unless ``smallest`` is given) stays at ``n_min``; the remaining
    ``n - K n_min`` samples are dealt round-robin to the other clusters in
    ascending index order.

    Returns ``(sizes, smallest)``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if n < K:
        raise ValueError(f"need n >= K, got n={n}, K={K}")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if K == 1:
        return np.array([n], dtype=np.int64), 0
    n_min = max(1, math.floor(beta * n / K))
    if smallest is None:
        smallest = int(make_rng(rng).integers(K))
    if not 0 <= smallest < K:
        raise ValueError(f"smallest must be a cluster index, got {smallest}")
    sizes = np.full(K, n_min, dtype=np.int64)
    others = np.array([k for k in range(K) if k != smallest])
    q, rem = divmod(n - K * n_min, K - 1)
    sizes[others] += q
    sizes[others[:rem]] += 1
    return sizes, smallest


def theoretical_delta(
    n: int,
    p: int,
    K: int,
    beta: float,
    kappa: float = 1.0,
    tn: TnRule = "log",
    gamma: float = 1.0,
) -> float:
    """Separation at ``gamma`` times the consistency bound:
    ``gamma * 2 sqrt(2) * kappa / sqrt(beta) * sqrt(K / n) * T``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if kappa < 1:
        raise ValueError("kappa is a condition number and must be >= 1")
    T = threshold(p, n, tn).value
    return gamma * 2.0 * math.sqrt(2.0) * kappa / math.sqrt(beta) * math.sqrt(K / n) * T


def _pairwise_min_distance(M: np.ndarray) -> float:
    sq = (M * M).sum(axis=0)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (M.T @ M)
    K = M.shape[1]
    D2[np.diag_indices(K)] = np.inf
    return float(math.sqrt(max(D2.min(), 0.0)))


@dataclass
class MixtureDesign:
    """Ground truth for one synthetic mixture.

    ``center_matrix`` is ``None`` for basis-mode orthonormal centres, which
    are stored implicitly (column ``k`` is ``delta / sqrt 2`` times the
    ``k``-th basis vector) so very large ``p`` costs nothing.
    """

    p: int
    n: int
    K: int
    delta: float
    beta: float
    sizes: np.ndarray
    labels: np.ndarray
    kappa: float = 1.0
    center_matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.sizes) != self.K or self.sizes.sum() != self.n or self.sizes.min() < 1:
            raise ValueError("sizes must have K positive entries summing to n")
        if self.labels.shape != (self.n,):
            raise ValueError("labels must have length n")
        if self.K > min(self.p, self.n):
            raise ValueError(f"K={self.K} exceeds min(p, n)={min(self.p, self.n)}")
        if self.center_matrix is not None and self.center_matrix.shape != (self.p, self.K):
            raise ValueError("center_matrix must be p x K")

    @property
    def center_scale(self) -> float:
        return self.delta / math.sqrt(2.0)

    @property
    def n_min(self) -> int:
        return int(self.sizes.min())

    @property
    def effective_beta(self) -> float:
        """``min_k n_k / (n / K)`` for the realised sizes."""
        return self.n_min * self.K / self.n

    def centers(self) -> np.ndarray:
        if self.center_matrix is not None:
            return self.center_matrix
        return orthonormal_centers(self.p, self.K, self.delta, "basis")

    def membership(self) -> np.ndarray:
        """``n x K`` 0/1 membership matrix."""
        Z = np.zeros((self.n, self.K))
        Z[np.arange(self.n), self.labels] = 1.0
        return Z

    def signal(self) -> np.ndarray:
        """Noiseless ``p x n`` matrix whose column ``i`` is the centre of sample ``i``."""
        if self.center_matrix is not None:
            return self.center_matrix[:, self.labels].copy()
        P = np.zeros((self.p, self.n))
        P[self.labels, np.arange(self.n)] = self.center_scale
        return P


def _shuffled_labels(sizes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return rng.permutation(labels)


def make_design(
    n: int,
    p: int,
    K: int,
    beta: float,
    rng=None,
    *,
    gamma: float = 1.0,
    tn: TnRule = "log",
    center_mode: str = "basis",
    delta: float | None = None,
) -> MixtureDesign:
    """Orthonormal-centre design with ``delta`` at ``gamma`` times the bound.

    Draws, in order: the smallest cluster index, the label permutation, and
    (for ``qr_random``) the centre seed.
    """
    if K > min(p, n):
        raise ValueError(f"K={K} exceeds min(p, n)={min(p, n)}")
    rng = make_rng(rng)
    if delta is None:
        delta = theoretical_delta(n, p, K, beta, 1.0, tn, gamma)
    sizes, _ = allocate_sizes(n, K, beta, rng)
    labels = _shuffled_labels(sizes, rng)
    M = None
    if center_mode != "basis":
        M = orthonormal_centers(p, K, delta, center_mode, seed=int(rng.integers(2**63)))
    return MixtureDesign(p, n, K, delta, beta, sizes, labels, 1.0, M)


def design_from_centers(centers, sizes, rng=None, shuffle: bool = True) -> MixtureDesign:
    """Design with arbitrary full-rank centres; ``delta``, ``kappa`` and
    ``beta`` are measured from the inputs."""
    M = np.asarray(centers, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.int64)
    p, K = M.shape
    n = int(sizes.sum())
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= 0:
        raise ValueError("centre matrix must have full column rank")
    kappa = float(sv[0] / sv[-1])
    delta = _pairwise_min_distance(M) if K > 1 else float(np.linalg.norm(M))
    labels = np.repeat(np.arange(K), sizes)
    if shuffle:
        labels = make_rng(rng).permutation(labels)
    beta = float(sizes.min() * K / n)
    return MixtureDesign(p, n, K, delta, beta, sizes, labels, kappa, M)


@dataclass(frozen=True)
class NoiseModel:
    """Noise added to the signal.

    ``kind`` is ``"unit"`` (i.i.d. standard normal), ``"heteroscedastic"``
    (column ``i`` scaled by ``eta_i ~ Uniform(eta_lo, eta_max)``, redrawn for
    every dataset; the endpoints are sorted if ``eta_max < eta_lo``) or
    ``"none"``.
    """

    kind: str = "unit"
    eta_lo: float = 0.5
    eta_max: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit", "heteroscedastic", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "heteroscedastic" and (self.eta_lo <= 0 or self.eta_max <= 0):
            raise ValueError("eta_lo and eta_max must be positive")

    @classmethod
    def heteroscedastic(cls, eta_max: float, eta_lo: float = 0.5) -> "NoiseModel":
        return cls("heteroscedastic", eta_lo, eta_max)

    def column_scales(self, n: int, rng: np.random.Generator) -> np.ndarray | None:
        if self.kind != "heteroscedastic":
            return None
        lo, hi = sorted((self.eta_lo, self.eta_max))
        return rng.uniform(lo, hi, n)


UNIT_NOISE = NoiseModel("unit")
NO_NOISE = NoiseModel("none")


def sample_noise(p: int, n: int, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    if noise.kind == "none":
        return np.zeros((p, n))
    E = rng.standard_normal((p, n))
    scales = noise.column_scales(n, rng)
    if scales is not None:
        E *= scales
    return E


def sample_dataset(design: MixtureDesign, noise: NoiseModel = UNIT_NOISE, rng=None):
    """Draw ``X = M Z^T + E``; returns ``(X, labels)``.

    Samples appear in the (already shuffled) order of ``design.labels``.
    """
    rng = make_rng(rng)
    X = sample_noise(design.p, design.n, noise, rng)
    if design.center_matrix is None:
        X[design.labels, np.arange(design.n)] += design.center_scale
    else:
        X += design.center_matrix[:, design.labels]
    return X, design.labels.copy()


def pathology_signal(t: float, delta: float, n1: int, n2: int, p: int):
    """Collinear two-cluster signal ``c 1^T + v w^T`` with ``c = t v``.

    ``v`` points along the first axis with length ``delta / 2``; the first
    ``n1`` columns belong to cluster 0.  Returns ``(P, labels)``.
    """
    if p < 2:
        raise ValueError("need p >= 2")
    if n1 < 1 or n2 < 1:
        raise ValueError("cluster sizes must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = np.zeros(p)
    v[0] = delta / 2.0
    w = np.concatenate([np.ones(n1), -np.ones(n2)])
    P = np.outer(v, t + w)
    labels = np.concatenate([np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)])
    return P, labels


def pathology_dataset(t: float, delta: float, n1: int, n2: int, p: int, rng=None, noise: NoiseModel = UNIT_NOISE):
    """Two collinear centres ``(t + 1) v`` and ``(t - 1) v`` plus noise.

    The uncentred count sees one component once ``t`` is large; the centred
    spectrum does not depend on ``t``.  Returns ``(X, labels)`` with columns
    in a seeded random order.
    """
    if t <= 1:
        raise ValueError("t must exceed 1")
    rng = make_rng(rng)
    P, labels = pathology_signal(t, delta, n1, n2, p)
    X = sample_noise(p, n1 + n2, noise, rng) + P
    order = rng.permutation(n1 + n2)
    return X[:, order], labels[order]


def single_component_dataset(mu_norm: float, n: int, p: int, rng=None, noise: NoiseModel = UNIT_NOISE) -> np.ndarray:
    """One component with mean ``(mu_norm / sqrt p) 1_p``."""
    if mu_norm < 0:
        raise ValueError("mu_norm must be >= 0")
    rng = make_rng(rng)
    mu = np.full(p, mu_norm / math.sqrt(p))
    return sample_noise(p, n, noise, rng) + mu[:, None]


def labels_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_labels.csv")


def export_dataset(X, path, labels=None) -> None:
    """Write ``X`` as CSV with samples as rows; labels go to a sidecar file."""
    X = np.asarray(X, dtype=np.float64)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for col in X.T:
            writer.writerow([repr(float(v)) for v in col])
    if labels is not None:
        with labels_path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for lab in labels:
                writer.writerow([int(lab)])
