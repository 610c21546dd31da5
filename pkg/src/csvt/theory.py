"""Numerical checks of the signal and noise bounds behind the estimator.

Every check works on small designs with exact (LAPACK) SVDs of the
noiseless signal, so it verifies the inequalities directly instead of
trusting the proofs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import synth
from .estimator import csvt, raw_count, threshold
from .synth import MixtureDesign, NoiseModel, UNIT_NOISE, make_rng

REL_TOL = 1e-9
MAX_ORACLE_ENTRIES = 10**6


@dataclass(frozen=True)
class SignalBoundReport:
    sigma_observed: float
    bound: float
    satisfied: bool
    # sharper intermediate bound, when the check has one
    sigma_aux: float | None = None
    bound_aux: float | None = None


def _svals(A: np.ndarray) -> np.ndarray:
    return np.linalg.svd(A, compute_uv=False)


def _holds(observed: float, bound: float) -> bool:
    return bool(observed >= bound - REL_TOL * abs(bound))


def _check_small(design: MixtureDesign) -> None:
    if design.K < 2:
        raise ValueError("signal bounds are stated for K >= 2")
    if design.p * design.n > MAX_ORACLE_ENTRIES:
        raise ValueError("design too large for the exact-SVD oracle")


def signal_bound(design: MixtureDesign) -> float:
    """``(delta / kappa) sqrt(beta n / (2K))`` with the realised ``beta``."""
    return design.delta / design.kappa * math.sqrt(design.effective_beta * design.n / (2 * design.K))


def centered_signal(design: MixtureDesign) -> np.ndarray:
    P = design.signal()
    return P - P.mean(axis=1, keepdims=True)


def centered_signal_bound(design: MixtureDesign) -> SignalBoundReport:
    """Compare ``sigma_{K-1}`` of the centred signal with the lower bound."""
    _check_small(design)
    s = _svals(centered_signal(design))[design.K - 2]
    bound = signal_bound(design)
    return SignalBoundReport(float(s), bound, _holds(s, bound))


def uncentered_signal_bound(design: MixtureDesign) -> SignalBoundReport:
    """Compare ``sigma_K`` of the raw signal with the same lower bound.

    Also checks the intermediate step ``sigma_K(P) = sigma_K(M D^{1/2}) >=
    sigma_K(M) sqrt(min n_k)``; ``satisfied`` requires all of it.
    """
    _check_small(design)
    K = design.K
    sK = _svals(design.signal())[K - 1]
    bound = signal_bound(design)
    M = design.centers()
    MD = M * np.sqrt(design.sizes)[None, :]
    sK_md = _svals(MD)[K - 1]
    aux_bound = _svals(M)[K - 1] * math.sqrt(design.n_min)
    same = abs(sK - sK_md) <= REL_TOL * max(sK, 1.0)
    ok = _holds(sK, bound) and _holds(sK_md, aux_bound) and same
    return SignalBoundReport(float(sK), bound, bool(ok), float(sK_md), float(aux_bound))


def gram_structure_check(design: MixtureDesign, atol: float = 1e-10) -> bool:
    """Check ``A A^T = D - n n^T / n`` for ``A = Z^T H`` and its consequences.

    Verifies the identity (tolerance scaled by ``n``), that ``1_K`` is a null
    vector, and ``sigma_{K-1}(A) >= sqrt(min_k n_k)``.
    """
    n = design.n
    Z = design.membership()
    A = Z.T - Z.sum(axis=0)[:, None] / n  # Z^T H without forming H
    AAt = A @ A.T
    counts = design.sizes.astype(np.float64)
    target = np.diag(counts) - np.outer(counts, counts) / n
    tol = atol * max(1.0, n)
    ok = np.allclose(AAt, target, rtol=0.0, atol=tol)
    ok &= np.allclose(AAt @ np.ones(design.K), 0.0, rtol=0.0, atol=tol)
    if design.K >= 2:
        s = _svals(A)[design.K - 2]
        ok &= _holds(s, math.sqrt(design.n_min))
    return bool(ok)


def noise_bound_test(p: int, n: int, t: float, reps: int, rng=None):
    """Monte Carlo frequency of ``||E|| >= sqrt(p) + sqrt(n) + t``.

    Returns ``(violation_rate, bound)`` with ``bound = exp(-t^2 / 2)``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    rng = make_rng(rng)
    level = math.sqrt(p) + math.sqrt(n) + t
    hits = 0
    for _ in range(reps):
        E = rng.standard_normal((p, n))
        hits += _svals(E)[0] >= level
    return hits / reps, math.exp(-t * t / 2.0)


def binomial_slack(bound: float, reps: int, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(bound * (1.0 - bound) / reps)


@dataclass(frozen=True)
class WeylReport:
    lower_ok: bool
    upper_ok: bool
    sigma_hat: np.ndarray
    sigma_signal: np.ndarray
    noise_norm: float

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def weyl_gap_check(design: MixtureDesign, noise: NoiseModel = UNIT_NOISE, rng=None) -> WeylReport:
    """Check both perturbation inequalities on one sampled dataset:
    ``s_{K-1}(X~) >= s_{K-1}(P~) - ||E~||`` and ``s_K(X~) <= ||E~||``.
    """
    _check_small(design)
    rng = make_rng(rng)
    K = design.K
    E = synth.sample_noise(design.p, design.n, noise, rng)
    Pc = centered_signal(design)
    Ec = E - E.mean(axis=1, keepdims=True)
    s_hat = _svals(Pc + Ec)
    s_sig = _svals(Pc)
    e_norm = float(_svals(Ec)[0]) if E.any() else 0.0
    scale = max(s_hat[0], 1.0)
    lower = s_hat[K - 2] >= s_sig[K - 2] - e_norm - REL_TOL * scale
    upper = s_hat[K - 1] <= s_sig[K - 1] + e_norm + REL_TOL * scale
    return WeylReport(bool(lower), bool(upper), s_hat, s_sig, e_norm)


def pathology_sigma1(delta: float, n1: int, n2: int) -> float:
    """Top singular value of the centred collinear-centre signal:
    ``delta * sqrt(n1 n2 / (n1 + n2))``, for every shift ``t``."""
    if n1 < 1 or n2 < 1:
        raise ValueError("cluster sizes must be >= 1")
    return delta * math.sqrt(n1 * n2 / (n1 + n2))


def pathology_exact(t: float, delta: float, n1: int, n2: int, p: int = 2):
    """Exact ``(sigma_1(P~), sigma_2(P~), sigma_1(P), sigma_2(P))`` of the
    collinear-centre signal."""
    P, _ = synth.pathology_signal(t, delta, n1, n2, p)
    s_raw = _svals(P)
    s_cen = _svals(P - P.mean(axis=1, keepdims=True))
    return float(s_cen[0]), float(s_cen[1]), float(s_raw[0]), float(s_raw[1])


def pathology_raw_lower_bound(t: float, delta: float, n: int) -> float:
    """``(delta / 2)(t sqrt(n) - sqrt(n))``, a floor on the raw top singular value."""
    return delta / 2.0 * (t - 1.0) * math.sqrt(n)


def pathology_delta(n1: int, n2: int, p: int, tn="log", margin: float = 2.0) -> float:
    """Smallest ``delta`` whose centred signal reaches ``margin * T``."""
    T = threshold(p, n1 + n2, tn).value
    return margin * T / math.sqrt(n1 * n2 / (n1 + n2))


# ---------------------------------------------------------------------------
# demo tables

def _table(s_raw, s_cen, T):
    rows = []
    for i in range(max(len(s_raw), len(s_cen))):
        rows.append({
            "index": i + 1,
            "sigma_raw": float(s_raw[i]) if i < len(s_raw) else None,
            "sigma_centered": float(s_cen[i]) if i < len(s_cen) else None,
            "threshold": T,
        })
    return rows


def demo_table(which: str, seed: int = 0) -> list[dict]:
    """Singular values of one dataset, raw and centred, with the threshold.

    ``fig1``: one component, ``n=100, p=20``, mean ``0.1 * 1_p``.
    ``remark2``: ``n=1000, p=20, K=5``, balanced, separation at the bound.
    ``pathology``: collinear centres, ``n1=n2=100, p=50, t=100``.
    """
    rng = make_rng(seed)
    if which == "fig1":
        n, p = 100, 20
        X = synth.single_component_dataset(0.1 * math.sqrt(p), n, p, rng)
    elif which == "remark2":
        n, p = 1000, 20
        design = synth.make_design(n, p, 5, 1.0, rng)
        X, _ = synth.sample_dataset(design, UNIT_NOISE, rng)
    elif which == "pathology":
        n1 = n2 = 100
        p = 50
        X, _ = synth.pathology_dataset(100.0, pathology_delta(n1, n2, p), n1, n2, p, rng)
        n = n1 + n2
    else:
        raise ValueError(f"unknown demo {which!r}")
    T = threshold(p, n).value
    s_raw = _svals(X)
    s_cen = _svals(X - X.mean(axis=1, keepdims=True))
    return _table(s_raw, s_cen, T)


# ---------------------------------------------------------------------------
# verification suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_small_design(rng: np.random.Generator, orthonormal: bool | None = None) -> MixtureDesign:
    """Random design with ``p <= 30, n <= 120, 2 <= K <= 8, beta in [0.2, 1]``.

    Half the time (unless forced) the centres are Gaussian rather than
    orthonormal, so ``kappa > 1`` also gets exercised.
    """
    K = int(rng.integers(2, 9))
    p = int(rng.integers(K, 31))
    n = int(rng.integers(max(2 * K, 10), 121))
    beta = float(rng.choice(np.round(np.arange(0.2, 1.01, 0.1), 1)))
    if orthonormal is None:
        orthonormal = bool(rng.integers(2))
    if orthonormal:
        return synth.make_design(n, p, K, beta, rng, center_mode="qr_random")
    sizes, _ = synth.allocate_sizes(n, K, beta, rng)
    M = rng.standard_normal((p, K)) * rng.uniform(0.5, 5.0)
    return synth.design_from_centers(M, sizes, rng)


def run_verification(seed: int = 0, n_designs: int = 200) -> list[CheckResult]:
    """Run every oracle once; used by the ``verify`` CLI command."""
    rng = make_rng(seed)
    out: list[CheckResult] = []

    designs = [random_small_design(rng) for _ in range(n_designs)]
    bad = [i for i, d in enumerate(designs) if not centered_signal_bound(d).satisfied]
    out.append(CheckResult("centred signal bound", not bad, f"{n_designs - len(bad)}/{n_designs} designs"))
    bad = [i for i, d in enumerate(designs) if not uncentered_signal_bound(d).satisfied]
    out.append(CheckResult("uncentred signal bound", not bad, f"{n_designs - len(bad)}/{n_designs} designs"))
    bad = [i for i, d in enumerate(designs) if not gram_structure_check(d)]
    out.append(CheckResult("membership Gram identity", not bad, f"{n_designs - len(bad)}/{n_designs} designs"))

    rate, bound = noise_bound_test(50, 50, 3.0, 1000, rng)
    limit = bound + binomial_slack(bound, 1000)
    out.append(CheckResult("noise norm tail", rate <= limit, f"rate={rate:.4f} limit={limit:.4f}"))

    design = synth.make_design(200, 15, 4, 1.0, rng)
    fails = sum(not weyl_gap_check(design, UNIT_NOISE, rng).ok for _ in range(100))
    out.append(CheckResult("Weyl gap", fails == 0, f"{100 - fails}/100 seeds"))

    closed = pathology_sigma1(2.0, 100, 100)
    errs = [abs(pathology_exact(t, 2.0, 100, 100, 5)[0] - closed) / closed for t in (2.0, 10.0, 1000.0)]
    out.append(CheckResult("pathology closed form", max(errs) <= 1e-9, f"max rel err={max(errs):.2e}"))

    raw_zero = k_one = 0
    for _ in range(100):
        X = synth.single_component_dataset(0.1 * math.sqrt(20), 100, 20, rng)
        raw_zero += raw_count(X) == 0
        k_one += csvt(X).k_hat == 1
    out.append(CheckResult("single component", raw_zero >= 95 and k_one >= 95,
                           f"raw=0 in {raw_zero}/100, k_hat=1 in {k_one}/100"))
    return out
