"""Entropy functionals of a spectral density and a numerical stationarity test.

Densities live on a log-spaced grid over a bounded support and every integral
is a trapezoid sum on that grid.  The stationarity test perturbs the power-law
density ``p ∝ lambda**beta_vol`` inside the set of normalised densities and
checks that the total entropy ``S_p + beta_vol * S_vol`` only drops, and only
at second order in the perturbation size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PerturbationInfeasible


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


@dataclass(frozen=True, eq=False)
class DensityGrid:
    points: np.ndarray
    p: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def integrate(self, f) -> float:
        return float(self.weights @ f)

    @classmethod
    def from_values(cls, points, values, normalize: bool = True) -> "DensityGrid":
        x = np.asarray(points, dtype=np.float64)
        if x.ndim != 1 or x.size < 2 or not (x[0] > 0 and np.all(np.diff(x) > 0)):
            raise ValueError("grid must be increasing and strictly positive")
        p = np.asarray(values, dtype=np.float64)
        if np.any(p < 0):
            raise ValueError("density must be non-negative")
        w = _trapezoid_weights(x)
        if normalize:
            p = p / (w @ p)
        return cls(x, p, w)


def log_grid(support, m: int = 4096) -> np.ndarray:
    lo, hi = support
    if not 0 < lo < hi:
        raise ValueError("support must satisfy 0 < lo < hi")
    if m < 2:
        raise ValueError("grid needs at least 2 points")
    return np.geomspace(lo, hi, m)


def spectral_entropy(g: DensityGrid) -> float:
    """``-∫ p log p``, with ``0 log 0 = 0``."""
    p = g.p
    safe = np.where(p > 0, p, 1.0)
    return -g.integrate(np.where(p > 0, p * np.log(safe), 0.0))


def volume_entropy(g: DensityGrid) -> float:
    """``∫ p log lambda``."""
    return g.integrate(g.p * np.log(g.points))


def total_entropy(g: DensityGrid, beta_vol: float) -> float:
    return spectral_entropy(g) + beta_vol * volume_entropy(g)


def maxent_density(beta_vol: float, support=(1.0, 100.0), m: int = 4096) -> DensityGrid:
    """Grid density ``p ∝ lambda**beta_vol``, normalised on the support."""
    x = log_grid(support, m)
    return DensityGrid.from_values(x, x**beta_vol)


def sample_density(g: DensityGrid, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling with the CDF linear between grid nodes."""
    dx = np.diff(g.points)
    cdf = np.concatenate([[0.0], np.cumsum(dx * (g.p[:-1] + g.p[1:]) / 2)])
    cdf /= cdf[-1]
    return np.interp(rng.random(size), cdf, g.points)


@dataclass(frozen=True)
class StationarityReport:
    beta_vol: float
    support: tuple
    m: int
    eps: float
    trials: int
    projected: bool
    s_total_star: float
    delta_s: np.ndarray = field(repr=False)  # at eps
    delta_s_small: np.ndarray = field(repr=False)  # same perturbations at eps / 10
    first_order: np.ndarray = field(repr=False)  # linear term of each delta_s
    slack: float

    @property
    def max_delta(self) -> float:
        return float(self.delta_s.max())

    @property
    def scaling_ratio(self) -> float:
        """Median ``|dS(eps)| / |dS(eps/10)|``; 100 for a pure second-order response."""
        small = np.abs(self.delta_s_small)
        small = np.where(small > 0, small, np.finfo(float).tiny)
        return float(np.median(np.abs(self.delta_s) / small))

    @property
    def no_increase(self) -> bool:
        return bool(np.all(self.delta_s <= self.slack) and np.all(self.delta_s_small <= self.slack))

    @property
    def second_order(self) -> bool:
        return 50.0 <= self.scaling_ratio <= 200.0

    @property
    def passed(self) -> bool:
        return self.no_increase and self.second_order

    def as_dict(self) -> dict:
        return {
            "beta_vol": self.beta_vol,
            "support": list(self.support),
            "m": self.m,
            "eps": self.eps,
            "trials": self.trials,
            "projected": self.projected,
            "s_total_star": self.s_total_star,
            "max_delta_s": self.max_delta,
            "max_delta_s_small_eps": float(self.delta_s_small.max()),
            "max_abs_first_order": float(np.abs(self.first_order).max()),
            "slack": self.slack,
            "scaling_ratio": self.scaling_ratio,
            "passed": self.passed,
        }


def stationarity_check(beta_vol: float, support=(1.0, 100.0), trials: int = 200, eps: float = 1e-3,
                       *, m: int = 4096, seed: int = 0, project: bool = True) -> StationarityReport:
    """Perturb the maximum-entropy density and record the entropy change.

    Each trial draws Gaussian noise on the grid, removes its integral (when
    ``project``), and rescales it so that ``|eta| <= p*`` pointwise; the
    perturbed density is ``p* + eps * eta``, renormalised.  The same draws are
    replayed at ``eps / 10`` to measure how ``dS`` scales.  Without projection
    the perturbed density is left unnormalised, which exposes the first-order
    term that the normalisation constraint otherwise cancels.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 < eps < 1:
        raise PerturbationInfeasible(f"eps={eps} cannot keep p* + eps*eta positive; need 0 < eps < 1")
    star = maxent_density(beta_vol, support, m)
    s_star = total_entropy(star, beta_vol)
    # derivative of the entropy functional at p*, per grid node
    gradient = -np.log(star.p) - 1.0 + beta_vol * np.log(star.points)
    width = star.support[1] - star.support[0]
    rng = np.random.default_rng(seed)

    def perturbed_delta(eta, scale):
        q = star.p + scale * eta
        if np.any(q < 0):
            raise PerturbationInfeasible("perturbation drove the density negative")
        g = DensityGrid.from_values(star.points, q, normalize=project)
        return total_entropy(g, beta_vol) - s_star

    delta, delta_small, first = np.empty(trials), np.empty(trials), np.empty(trials)
    for t in range(trials):
        eta = rng.standard_normal(m)
        if project:
            eta -= star.integrate(eta) / width
        eta /= np.max(np.abs(eta) / star.p)
        delta[t] = perturbed_delta(eta, eps)
        delta_small[t] = perturbed_delta(eta, eps / 10)
        first[t] = eps * star.integrate(gradient * eta)
    slack = 10.0 / m**2 * abs(s_star)
    return StationarityReport(beta_vol, tuple(support), m, eps, trials, project, s_star,
                              delta, delta_small, first, slack)
