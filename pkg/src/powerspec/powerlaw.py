"""Maximum-likelihood power-law fits and Kolmogorov-Smirnov goodness of fit.

The hypothesised density is ``p(x) ∝ x**(-beta)`` on ``[x_min, inf)`` with
``x_min`` taken as the smallest retained eigenvalue.  The rank-size (Zipf)
slope follows as ``s = 1 / (beta - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Spectrum
from .errors import (
    DegenerateSample,
    InsufficientLength,
    InvalidFit,
    MismatchedFit,
    NonPositiveEigenvalue,
    UnsupportedAlpha,
)

# Massey (1951) large-sample coefficients: d_c = c(alpha) / sqrt(K)
KS_COEFFICIENTS = {0.2: 1.07, 0.15: 1.14, 0.1: 1.22, 0.05: 1.36, 0.01: 1.63}


@dataclass(frozen=True)
class PowerLawFit:
    beta_hat: float
    sigma: float
    s_hat: float
    lambda_cutoff: float
    k_samples: int
    z_d: Optional[float] = None

    def __post_init__(self):
        if not self.beta_hat > 1:
            raise InvalidFit(f"beta_hat={self.beta_hat} must exceed 1")

    @classmethod
    def from_beta(cls, beta_hat: float, k_samples: int, lambda_cutoff: float,
                  z_d: Optional[float] = None) -> "PowerLawFit":
        if not beta_hat > 1:
            raise InvalidFit(f"beta_hat={beta_hat} must exceed 1")
        return cls(
            beta_hat=beta_hat,
            sigma=(beta_hat - 1) / math.sqrt(k_samples),
            s_hat=1.0 / (beta_hat - 1),
            lambda_cutoff=lambda_cutoff,
            k_samples=k_samples,
            z_d=z_d,
        )

    def as_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "sigma": self.sigma,
            "s_hat": self.s_hat,
            "lambda_cutoff": self.lambda_cutoff,
            "k": self.k_samples,
        }


@dataclass(frozen=True)
class KsVerdict:
    d_ks: float
    d_c: float
    alpha: float
    k_samples: int

    @property
    def is_power_law(self) -> bool:
        """True when the power-law hypothesis is not rejected at ``alpha``."""
        return self.d_ks <= self.d_c

    def as_dict(self) -> dict:
        return {"d_ks": self.d_ks, "d_c": self.d_c, "alpha": self.alpha, "accept": self.is_power_law}


def _top_positive(s: Spectrum, k: int) -> np.ndarray:
    if k < 2:
        raise InsufficientLength("a power-law fit needs at least 2 samples")
    if k > len(s):
        raise InsufficientLength(f"k={k} exceeds spectrum length {len(s)}")
    top = s.values[:k]
    if top[0] == top[-1]:
        raise DegenerateSample("all retained values are equal")
    bad = np.flatnonzero(top <= 0)
    if bad.size:
        raise NonPositiveEigenvalue(int(bad[0]), float(top[bad[0]]))
    return top


def mle_fit(s: Spectrum, k: int, *, normalizer_n: Optional[int] = None) -> PowerLawFit:
    """Fit ``beta`` to the top ``k`` values with cutoff ``lambda_k``.

    ``beta_hat = 1 + K / sum(log(lambda_i / lambda_cutoff))`` and the standard
    error is ``(beta_hat - 1) / sqrt(K)``.  If ``normalizer_n`` is given, the
    Zipf normaliser over that many ranks is attached as ``z_d``.
    """
    top = _top_positive(s, k)
    cutoff = float(top[-1])
    log_sum = math.fsum(np.log(top / cutoff))
    if log_sum <= 0:
        raise DegenerateSample("log-ratio sum is zero")
    beta = 1.0 + k / log_sum
    z_d = None if normalizer_n is None else zipf_normalizer(normalizer_n, 1.0 / (beta - 1.0))
    return PowerLawFit.from_beta(beta, k, cutoff, z_d)


def critical_value(k: int, alpha: float = 0.05) -> float:
    for level, coef in KS_COEFFICIENTS.items():
        if math.isclose(alpha, level, rel_tol=1e-9):
            return coef / math.sqrt(k)
    raise UnsupportedAlpha(f"alpha={alpha} not in {sorted(KS_COEFFICIENTS)}")


def pareto_cdf(x, beta: float, cutoff: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    ratio = np.maximum(x / cutoff, 1.0)
    return 1.0 - ratio ** (1.0 - beta)


def ks_distance(samples, beta: float, cutoff: float) -> float:
    """Exact sup-distance between the sample ECDF and the Pareto CDF.

    The ECDF is a right-continuous step function, so the supremum is attained
    either at a sample point or just before it; both are checked.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    k = x.size
    f = pareto_cdf(x, beta, cutoff)
    i = np.arange(1, k + 1)
    return float(max(np.max(i / k - f), np.max(f - (i - 1) / k)))


def ks_test(s: Spectrum, fit: PowerLawFit, alpha: float = 0.05) -> KsVerdict:
    d_c = critical_value(fit.k_samples, alpha)
    if fit.k_samples > len(s):
        raise MismatchedFit(f"fit used K={fit.k_samples} but the spectrum has {len(s)} values")
    top = s.values[: fit.k_samples]
    d = ks_distance(top, fit.beta_hat, fit.lambda_cutoff)
    return KsVerdict(d_ks=d, d_c=d_c, alpha=alpha, k_samples=fit.k_samples)


def fit_and_test(s: Spectrum, k: int, alpha: float = 0.05) -> tuple[PowerLawFit, KsVerdict]:
    fit = mle_fit(s, k)
    return fit, ks_test(s, fit, alpha)


def zipf_slope_regression(s: Spectrum, k: int) -> float:
    """Minus the least-squares slope of ``log lambda_k`` against ``log k``."""
    if k < 3:
        raise InsufficientLength("slope regression needs at least 3 points")
    if k > len(s):
        raise InsufficientLength(f"k={k} exceeds spectrum length {len(s)}")
    top = s.values[:k]
    bad = np.flatnonzero(top <= 0)
    if bad.size:
        raise NonPositiveEigenvalue(int(bad[0]), float(top[bad[0]]))
    x = np.log(np.arange(1, k + 1, dtype=np.float64))
    y = np.log(top)
    xc = x - x.mean()
    return float(-(xc @ (y - y.mean())) / (xc @ xc))


def zipf_normalizer(n: int, s: float) -> float:
    """``sum_{k=1}^{n} k**(-s)`` by direct summation."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not s > 0:
        raise ValueError("s must be positive")
    # smallest terms first keeps the pairwise sum accurate
    ranks = np.arange(n, 0, -1, dtype=np.float64)
    return math.fsum(ranks ** (-s))


def pareto_sample(rng: np.random.Generator, size: int, beta: float, cutoff: float = 1.0) -> np.ndarray:
    """Inverse-CDF draws ``cutoff * u**(-1/(beta-1))``."""
    u = 1.0 - rng.random(size)  # (0, 1]
    return cutoff * u ** (-1.0 / (beta - 1.0))
