"""Eigengaps, their power law, and Davis-Kahan eigenvector robustness bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Spectrum, make_spectrum
from .errors import DegenerateSample, InsufficientLength, MissingTrace, RankOutOfRange
from .powerlaw import PowerLawFit, mle_fit, zipf_normalizer


@dataclass(frozen=True, eq=False)
class EigengapSeries:
    gaps: np.ndarray
    spectrum: Spectrum

    def __len__(self):
        return self.gaps.size

    def resorted(self) -> np.ndarray:
        """Gap magnitudes sorted descending (rank re-sorted by gap size)."""
        return np.sort(self.gaps)[::-1]


@dataclass(frozen=True)
class GapPrediction:
    k: int
    exact: float  # lambda_k * (1 - (k/(k+1))**s)
    approx: float  # Tr(H) / Z_d * (k+1)**-(s+1)
    trace: float
    trace_source: str  # "hint" or "top-k"


@dataclass(frozen=True)
class DkBound:
    k: int
    bound: float  # math.inf when the smaller neighbouring gap is zero
    epsilon_m_op: float


def gaps(s: Spectrum, k: Optional[int] = None) -> EigengapSeries:
    """``delta_i = lambda_i - lambda_{i+1}`` for the top ``k`` eigenvalues."""
    k = len(s) if k is None else k
    if k < 2:
        raise InsufficientLength("need at least 2 eigenvalues for a gap")
    if k > len(s):
        raise InsufficientLength(f"k={k} exceeds spectrum length {len(s)}")
    top = s.values[:k]
    g = top[:-1] - top[1:]
    g.setflags(write=False)
    return EigengapSeries(g, s)


def gap_law_predicted(s: Spectrum, fit: PowerLawFit, k: int, *,
                      allow_topk_trace: bool = True) -> GapPrediction:
    """Predicted gap at rank ``k`` (1-based) from the fitted Zipf slope.

    The trace comes from ``s.trace_hint`` when present, in which case the Zipf
    normaliser runs over ``s.n_total`` ranks; otherwise the top-K sum and K
    ranks are used, flagged as ``trace_source="top-k"``.
    """
    if not 1 <= k <= len(s):
        raise RankOutOfRange(f"rank {k} outside 1..{len(s)}")
    slope = fit.s_hat
    if s.trace_hint is not None:
        trace, source = s.trace_hint, "hint"
        n = s.n_total if s.n_total is not None else len(s)
    elif allow_topk_trace:
        n = fit.k_samples
        trace, source = math.fsum(s.values[:n]), "top-k"
    else:
        raise MissingTrace("spectrum carries no trace and top-K fallback is disabled")
    lam_k = float(s.values[k - 1])
    exact = lam_k * (1.0 - (k / (k + 1.0)) ** slope)
    approx = trace / zipf_normalizer(n, slope) * (k + 1.0) ** (-(slope + 1.0))
    return GapPrediction(k, exact, approx, trace, source)


def gap_spectrum(g: EigengapSeries) -> Spectrum:
    return make_spectrum(g.gaps, "eigengap")


def fit_gap_law(g: EigengapSeries, k: Optional[int] = None) -> PowerLawFit:
    """Power-law fit over the top ``k`` re-sorted gap magnitudes."""
    k = len(g) if k is None else k
    if np.all(g.gaps == 0):
        raise DegenerateSample("every gap is zero")
    return mle_fit(gap_spectrum(g), k)


def dk_bound(s: Spectrum, k: int, epsilon_m_op: float) -> DkBound:
    """``2 eps ||M|| / min(lambda_{k-1} - lambda_k, lambda_k - lambda_{k+1})``, ``k`` 1-based."""
    if not 2 <= k <= len(s) - 1:
        raise RankOutOfRange(f"rank {k} needs both neighbours; valid ranks are 2..{len(s) - 1}")
    if epsilon_m_op < 0:
        raise ValueError("epsilon_m_op must be non-negative")
    v = s.values
    min_gap = min(v[k - 2] - v[k - 1], v[k - 1] - v[k])
    bound = math.inf if min_gap <= 0 else 2.0 * epsilon_m_op / min_gap
    return DkBound(k, bound, epsilon_m_op)


def dk_bound_powerlaw(fit: PowerLawFit, lambda1: float, k: int, epsilon_m_op: float) -> float:
    """Closed-form bound ``2 eps ||M|| (k+1)**(s+1) / lambda_1`` under Zipf gaps."""
    if not lambda1 > 0:
        raise ValueError("lambda1 must be positive")
    return 2.0 * epsilon_m_op * (k + 1.0) ** (fit.s_hat + 1.0) / lambda1


def eigenvector_sines(h: np.ndarray, h_perturbed: np.ndarray) -> np.ndarray:
    """``sin`` of the angle between matching eigenvectors, ranked descending.

    The perturbed vector is sign-aligned with the original before taking
    ``sqrt(1 - <u, u~>**2)``.
    """
    _, u = np.linalg.eigh(h)
    _, ut = np.linalg.eigh(h_perturbed)
    u, ut = u[:, ::-1], ut[:, ::-1]
    cos = np.einsum("ij,ij->j", u, ut)
    ut = ut * np.where(cos < 0, -1.0, 1.0)
    cos = np.einsum("ij,ij->j", u, ut)
    return np.sqrt(np.clip(1.0 - cos**2, 0.0, None))
