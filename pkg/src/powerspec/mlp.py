"""A tiny tanh classifier whose full Hessian is cheap enough to build densely.

Parameters live in one flat vector.  Each layer contributes its weight matrix
(fan_in x fan_out, row-major) followed by its bias.  The Hessian is built by
central differences of the analytic gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import Spectrum, make_spectrum
from .errors import AsymmetryTooLarge, Divergence, NonPositiveEigenvalue
from .powerlaw import critical_value, fit_and_test

DEFAULT_SIZES = (10, 16, 16, 2)
ASYMMETRY_TOL = 1e-4


def n_params(sizes) -> int:
    return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass(frozen=True, eq=False)
class MlpState:
    theta: np.ndarray
    sizes: tuple = DEFAULT_SIZES
    seed: Optional[int] = None
    loss: Optional[float] = None  # last recorded training loss
    steps: int = 0

    def __post_init__(self):
        th = np.array(self.theta, dtype=np.float64).ravel()
        if th.size != n_params(self.sizes):
            raise ValueError(f"theta has {th.size} entries, layer sizes need {n_params(self.sizes)}")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "sizes", tuple(self.sizes))

    @property
    def n(self) -> int:
        return self.theta.size

    def layers(self, theta: Optional[np.ndarray] = None):
        th = self.theta if theta is None else theta
        return unpack(th, self.sizes)


def unpack(theta: np.ndarray, sizes) -> list[tuple[np.ndarray, np.ndarray]]:
    out, o = [], 0
    for a, b in zip(sizes[:-1], sizes[1:]):
        w = theta[o:o + a * b].reshape(a, b)
        o += a * b
        out.append((w, theta[o:o + b]))
        o += b
    return out


def init_state(seed: int, sizes=DEFAULT_SIZES) -> MlpState:
    """Uniform ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))`` weights and biases."""
    rng = np.random.default_rng([seed, 1])
    parts = []
    for a, b in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(a)
        parts.append(rng.uniform(-bound, bound, a * b))
        parts.append(rng.uniform(-bound, bound, b))
    return MlpState(np.concatenate(parts), sizes, seed)


@dataclass(frozen=True, eq=False)
class ToyDataset:
    x: np.ndarray  # (N, d_in)
    y: np.ndarray  # (N,) integer labels

    def __len__(self):
        return self.y.size

    def repeated(self, times: int) -> "ToyDataset":
        return ToyDataset(np.tile(self.x, (times, 1)), np.tile(self.y, times))


def make_dataset(seed: int, n: int = 200, dim: int = 10, separation: float = 3.0) -> ToyDataset:
    """Two unit-covariance Gaussian blobs, means ``±separation/2`` on the first axis.

    Labels alternate, so the classes are balanced to within one sample.
    """
    rng = np.random.default_rng([seed, 0])
    y = np.arange(n) % 2
    x = rng.standard_normal((n, dim))
    x[:, 0] += separation * (y - 0.5)
    return ToyDataset(x, y)


def loss_and_grad(m: MlpState, d: ToyDataset, theta: Optional[np.ndarray] = None) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient by backpropagation."""
    th = m.theta if theta is None else theta
    layers = unpack(th, m.sizes)
    acts = [d.x]
    h = d.x
    for i, (w, b) in enumerate(layers):
        z = h @ w + b
        h = np.tanh(z) if i < len(layers) - 1 else z
        acts.append(h)
    logits = acts[-1] - acts[-1].max(axis=1, keepdims=True)
    logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
    rows = np.arange(len(d))
    loss = -math.fsum(logp[rows, d.y]) / len(d)

    delta = np.exp(logp)
    delta[rows, d.y] -= 1.0
    delta /= len(d)
    grads = []
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads.append(np.concatenate([(acts[i].T @ delta).ravel(), delta.sum(axis=0)]))
        if i > 0:
            delta = (delta @ w.T) * (1.0 - acts[i] ** 2)
    return float(loss), np.concatenate(grads[::-1])


def gradient_check(m: MlpState, d: ToyDataset, coords: int = 20, h: float = 1e-5,
                   seed: int = 0) -> float:
    """Worst relative error of the analytic gradient against central differences.

    Components smaller than ``1e-5 * max(1, loss)`` are within reach of the
    difference quotient's rounding noise, so the denominator is floored there.
    """
    rng = np.random.default_rng(seed)
    loss, g = loss_and_grad(m, d)
    floor = 1e-5 * max(1.0, abs(loss))
    worst = 0.0
    for i in rng.choice(m.n, size=min(coords, m.n), replace=False):
        step = h * (1.0 + abs(m.theta[i]))
        e = np.zeros(m.n)
        e[i] = step
        fd = (loss_and_grad(m, d, m.theta + e)[0] - loss_and_grad(m, d, m.theta - e)[0]) / (2 * step)
        scale = max(abs(fd), abs(g[i]), floor)
        worst = max(worst, abs(fd - g[i]) / scale)
    return worst


def train(m: MlpState, d: ToyDataset, steps: int, lr: float,
          target_loss: Optional[float] = None) -> MlpState:
    """Full-batch gradient descent; stops early once ``target_loss`` is reached."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if not lr > 0:
        raise ValueError("lr must be positive")
    theta = m.theta.copy()
    loss = m.loss
    taken = 0
    for _ in range(steps):
        loss, g = loss_and_grad(m, d, theta)
        if not math.isfinite(loss) or not np.all(np.isfinite(g)):
            raise Divergence(f"loss became non-finite after {m.steps + taken} steps")
        if target_loss is not None and loss <= target_loss:
            break
        theta -= lr * g
        taken += 1
    if taken:
        loss = loss_and_grad(m, d, theta)[0]
        if not math.isfinite(loss):
            raise Divergence(f"loss became non-finite after {m.steps + taken} steps")
    return replace(m, theta=theta, loss=loss, steps=m.steps + taken)


@dataclass(frozen=True, eq=False)
class FdHessian:
    matrix: np.ndarray  # symmetrised
    asymmetry: float  # max|H - H^T| / max|H| before symmetrising


def hessian_fd(grad_fn: Callable[[np.ndarray], np.ndarray], theta: np.ndarray, h: float = 1e-5,
               tol: float = ASYMMETRY_TOL) -> FdHessian:
    """Central-difference Jacobian of ``grad_fn``, step ``h * (1 + |theta_i|)`` per column."""
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.size
    cols = np.empty((n, n))
    for i in range(n):
        step = h * (1.0 + abs(theta[i]))
        e = np.zeros(n)
        e[i] = step
        cols[:, i] = (grad_fn(theta + e) - grad_fn(theta - e)) / (2 * step)
    scale = np.abs(cols).max()
    asym = float(np.abs(cols - cols.T).max() / scale) if scale > 0 else 0.0
    if asym > tol:
        raise AsymmetryTooLarge(asym)
    return FdHessian(0.5 * (cols + cols.T), asym)


def hessian(m: MlpState, d: ToyDataset, h: float = 1e-5) -> FdHessian:
    return hessian_fd(lambda th: loss_and_grad(m, d, th)[1], m.theta, h)


def hessian_spectrum(m: MlpState, d: ToyDataset, h: float = 1e-5) -> Spectrum:
    fd = hessian(m, d, h)
    w = np.linalg.eigvalsh(fd.matrix)
    return make_spectrum(w, "mlp", trace_hint=float(np.trace(fd.matrix)))


@dataclass
class ArmResult:
    label: str
    loss: float
    steps: int
    grad_check: float
    asymmetry: float
    accept: bool
    d_ks: float  # 1.0 when the top-K block is not all positive and no fit exists
    s_hat: Optional[float]
    beta_hat: Optional[float]
    note: str = ""
    spectrum: Optional[Spectrum] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out.pop("spectrum")
        return out


@dataclass
class ContrastReport:
    seed: int
    k: int
    alpha: float
    d_c: float
    random: ArmResult
    trained: ArmResult

    def as_dict(self) -> dict:
        return {"seed": self.seed, "k": self.k, "alpha": self.alpha, "d_c": self.d_c,
                "random": self.random.as_dict(), "trained": self.trained.as_dict()}


def _arm(label, m, d, k, alpha, h) -> ArmResult:
    fd = hessian(m, d, h)
    w = np.linalg.eigvalsh(fd.matrix)
    spec = make_spectrum(w, "mlp", trace_hint=float(np.trace(fd.matrix)))
    loss = loss_and_grad(m, d)[0]
    check = gradient_check(m, d, seed=m.seed or 0)
    try:
        fit, ks = fit_and_test(spec, k, alpha)
    except NonPositiveEigenvalue as exc:
        # a Hessian with fewer than K positive eigenvalues has no power-law top block
        return ArmResult(label, loss, m.steps, check, fd.asymmetry, False, 1.0, None, None, str(exc), spec)
    return ArmResult(label, loss, m.steps, check, fd.asymmetry, ks.is_power_law, ks.d_ks,
                     fit.s_hat, fit.beta_hat, "", spec)


def spectrum_contrast(seed: int, alpha: float = 0.05, k: int = 100, *, steps: int = 5000,
                      lr: float = 0.5, target_loss: float = 0.05, n_samples: int = 200,
                      h: float = 1e-5) -> ContrastReport:
    """Power-law verdicts for the Hessian at random init and after training."""
    d_c = critical_value(k, alpha)
    data = make_dataset(seed, n_samples)
    start = init_state(seed)
    trained = train(start, data, steps, lr, target_loss)
    return ContrastReport(seed, k, alpha, d_c,
                          _arm("random", start, data, k, alpha, h),
                          _arm("trained", trained, data, k, alpha, h))

