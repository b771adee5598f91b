"""Matrix-free symmetric Lanczos with full reorthogonalization.

Only the algebraically largest eigenvalues are targeted.  When the Krylov
space becomes invariant (``beta == 0``) the iteration restarts from a fresh
random vector orthogonal to the basis, so repeated eigenvalues are found as
well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import Spectrum
from .errors import DimensionMismatch, NotSquare, NotSymmetric, ParseError, Stagnation

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SymmetricOperator:
    dim: int
    apply: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v):
        out = np.asarray(self.apply(v), dtype=np.float64)
        if out.shape != (self.dim,):
            raise DimensionMismatch(f"operator returned shape {out.shape}, expected ({self.dim},)")
        return out

    @classmethod
    def from_matrix(cls, matrix) -> "SymmetricOperator":
        a = np.asarray(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSquare(f"matrix shape {a.shape} is not square")
        return cls(a.shape[0], a.__matmul__)


@dataclass(frozen=True)
class LanczosConfig:
    k: int
    max_iters: Optional[int] = None  # None: up to the operator dimension
    tol: float = 1e-10
    seed: int = 0
    reorthogonalize: bool = True

    def validate(self, dim: int) -> int:
        if not 1 <= self.k <= dim:
            raise ValueError(f"k={self.k} must lie in 1..{dim}")
        iters = dim if self.max_iters is None else self.max_iters
        if iters < self.k:
            raise ValueError("max_iters must be at least k")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        return min(iters, dim)


def symmetry_probe(op: SymmetricOperator, rng: np.random.Generator, pairs: int = 3) -> float:
    """Largest relative mismatch of <Av, w> against <v, Aw> over random pairs."""
    worst = 0.0
    for _ in range(pairs):
        v = rng.standard_normal(op.dim)
        w = rng.standard_normal(op.dim)
        av, aw = op(v), op(w)
        scale = np.linalg.norm(av) * np.linalg.norm(w) + np.linalg.norm(v) * np.linalg.norm(aw)
        if scale == 0:
            continue
        worst = max(worst, abs(av @ w - v @ aw) / scale)
    return worst


def _unit_random(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _orthogonalize(r, basis):
    # two passes of classical Gram-Schmidt restore orthogonality to working precision
    for _ in range(2):
        r = r - basis.T @ (basis @ r)
    return r


def lanczos_topk(op: SymmetricOperator, cfg: LanczosConfig) -> Spectrum:
    """Top ``cfg.k`` eigenvalues of ``op``, descending.

    Convergence is declared once every wanted Ritz pair has residual
    ``beta_j * |last component of its Ritz vector|`` at most ``tol * ||H||``,
    with ``||H||`` estimated by the largest Ritz value magnitude.  If the
    iteration cap is hit first, :class:`Stagnation` is raised carrying the
    partial estimate.
    """
    n = op.dim
    iters = cfg.validate(n)
    rng = np.random.default_rng(cfg.seed)
    probe = symmetry_probe(op, np.random.default_rng([cfg.seed, 1]))
    if probe > SYMMETRY_TOL:
        raise NotSymmetric(probe)

    basis = np.zeros((iters, n))
    alphas = np.zeros(iters)
    betas = np.zeros(iters)  # betas[j] couples q_j and q_{j+1}
    q = _unit_random(rng, n)
    q_prev = np.zeros(n)
    beta_prev = 0.0
    theta = resid = None

    for j in range(iters):
        basis[j] = q
        w = op(q)
        alpha = q @ w
        w = w - alpha * q - beta_prev * q_prev
        if cfg.reorthogonalize:
            w = _orthogonalize(w, basis[: j + 1])
        alphas[j] = alpha
        beta = np.linalg.norm(w)
        breakdown = beta <= 1e-12 * max(abs(alpha), 1.0)

        m = j + 1
        # a breakdown step only proves convergence for the current block, which
        # may be missing copies of repeated eigenvalues
        if m == n or (m >= cfg.k and not breakdown):
            theta, vecs = eigh_tridiagonal(alphas[:m], betas[: m - 1])
            theta, vecs = theta[::-1], vecs[:, ::-1]
            norm_est = max(np.abs(theta).max(), np.finfo(float).tiny)
            resid = beta * np.abs(vecs[-1, : cfg.k])
            if m == n or np.all(resid <= cfg.tol * norm_est):
                return Spectrum(theta[: cfg.k].copy(), "lanczos", n_total=n)
        if j == iters - 1:
            break

        if breakdown:
            # invariant subspace: restart orthogonally, leaving T block diagonal
            r = _orthogonalize(rng.standard_normal(n), basis[: j + 1])
            q_prev, q = q, r / np.linalg.norm(r)
            beta_prev = 0.0
            betas[j] = 0.0
        else:
            q_prev, q = q, w / beta
            beta_prev = beta
            betas[j] = beta

    partial = Spectrum(theta[: cfg.k].copy(), "lanczos", n_total=n) if theta is not None else None
    raise Stagnation(f"Lanczos did not converge in {iters} iterations", partial=partial, residuals=resid)


def dense_eigh(matrix) -> Spectrum:
    """All eigenvalues of a dense symmetric matrix, descending."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix shape {a.shape} is not square")
    scale = np.abs(a).max()
    asym = np.abs(a - a.T).max() / scale if scale > 0 else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(asym)
    w = np.linalg.eigvalsh(0.5 * (a + a.T))
    return Spectrum(w[::-1].copy(), "dense", n_total=a.shape[0], trace_hint=float(np.trace(a)))


def read_matrix(path) -> np.ndarray:
    """Dense row-major text: first line ``n``, then ``n`` rows of ``n`` numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    rows = [(i, ln.split()) for i, ln in enumerate(lines, start=1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParseError(1, "empty matrix file")
    lineno, head = rows[0]
    try:
        n = int(head[0])
    except (ValueError, IndexError):
        raise ParseError(lineno, "first line must be the dimension n") from None
    if len(rows) - 1 != n:
        raise ParseError(lineno, f"expected {n} rows, found {len(rows) - 1}")
    out = np.empty((n, n))
    for r, (lineno, toks) in enumerate(rows[1:]):
        if len(toks) != n:
            raise ParseError(lineno, f"expected {n} entries, found {len(toks)}")
        try:
            out[r] = [float(t) for t in toks]
        except ValueError:
            raise ParseError(lineno, "non-numeric entry") from None
    return out


def write_matrix(matrix, path) -> None:
    a = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{a.shape[0]}\n")
        for row in a:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
