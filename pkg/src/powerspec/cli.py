"""``powerspec`` command line.

Every subcommand prints exactly one JSON document to stdout and logs to
stderr.  Exit status: 0 on success or an accepted power law, 3 when the
tested hypothesis is rejected, 2 on any error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import anm, eigengap, lanczos, maxent, mlp, powerlaw
from .core import ensure_dir, read_spectrum, write_rank_size_csv, write_spectrum
from .errors import SpectralError, Stagnation

log = logging.getLogger("powerspec")

EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 2, 3


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    fit: Optional[dict] = None
    ks: Optional[dict] = None
    extras: dict = field(default_factory=dict)
    runtime_ms: float = 0.0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls(**json.loads(text))


def _digest(path) -> dict:
    p = Path(path)
    h = hashlib.sha256(p.read_bytes()).hexdigest()
    return {"path": str(p), "sha256": h}


def _finite_or_none(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def _verdict_code(ks: Optional[dict]) -> int:
    if ks is None:
        return EXIT_OK
    return EXIT_OK if ks["accept"] else EXIT_REJECT


# -- subcommands -------------------------------------------------------------

def cmd_fit(args) -> tuple[Report, int]:
    s = read_spectrum(args.spectrum)
    k = len(s) if args.k is None else args.k
    fit, ks = powerlaw.fit_and_test(s, k, args.alpha)
    extras = {"n_values": len(s), "source": s.source,
              "zipf_slope_regression": powerlaw.zipf_slope_regression(s, k) if k >= 3 else None}
    r = Report("fit", {"spectrum": _digest(args.spectrum), "k": k, "alpha": args.alpha},
               fit.as_dict(), ks.as_dict(), extras)
    return r, _verdict_code(r.ks)


def cmd_gaps(args) -> tuple[Report, int]:
    s = read_spectrum(args.spectrum)
    k = len(s) if args.k is None else args.k
    series = eigengap.gaps(s, k)
    fit = eigengap.fit_gap_law(series, args.k_gap)
    ks = powerlaw.ks_test(eigengap.gap_spectrum(series), fit, args.alpha)
    out = Path(ensure_dir(args.out_dir))
    by_rank, resorted = out / "gaps_by_rank.csv", out / "gaps_resorted.csv"
    write_rank_size_csv(series.gaps, by_rank)
    write_rank_size_csv(series.resorted(), resorted)

    extras = {
        "telescoping_sum": math.fsum(series.gaps),
        "lambda1_minus_lambdak": float(s.values[0] - s.values[k - 1]),
        "csv": {"by_rank": str(by_rank), "resorted": str(resorted)},
    }
    try:
        spec_fit = powerlaw.mle_fit(s, k)
        extras["spectrum_s_hat"] = spec_fit.s_hat
        extras["predicted_gap_exponent"] = spec_fit.s_hat + 1.0
    except SpectralError as exc:
        log.warning("spectrum fit skipped: %s", exc)
    if args.epsilon is not None:
        rows = []
        for rank in range(2, len(s)):
            b = eigengap.dk_bound(s, rank, args.epsilon)
            rows.append({"k": rank, "bound": _finite_or_none(b.bound)})
        extras["davis_kahan"] = {"epsilon_m_op": args.epsilon, "rows": rows}
    inputs = {"spectrum": _digest(args.spectrum), "k": k, "k_gap": fit.k_samples, "alpha": args.alpha}
    r = Report("gaps", inputs, fit.as_dict(), ks.as_dict(), extras)
    return r, _verdict_code(r.ks)


def cmd_anm(args) -> tuple[Report, int]:
    if not args.cutoff > 0:
        raise ValueError("--cutoff must be positive")
    out = Path(ensure_dir(args.out_dir))
    if len(args.targets) == 1:
        target = args.targets[0]
        p = anm.load_structure(target)
        row, vib, fit, ks = anm.analyze_structure(p, args.cutoff, args.alpha, args.k)
        csv = out / f"{p.source_id or 'structure'}_sigma_hat.csv"
        write_rank_size_csv(vib.sigma_hat, csv)
        extras = {"row": row.as_dict(), "n_modes": vib.n_modes, "n_zero_modes": vib.n_zero, "csv": str(csv)}
        inputs = {"target": _digest(target) if Path(target).is_file() else {"pdb_code": target},
                  "cutoff": args.cutoff, "alpha": args.alpha, "k": args.k}
        r = Report("anm", inputs, fit.as_dict(), ks.as_dict(), extras)
        return r, _verdict_code(r.ks)

    batch = anm.batch_analyze(args.targets, args.cutoff, args.alpha, jobs=args.jobs)
    csv = out / "batch_s_hat.csv"
    write_rank_size_csv(sorted((row.s_hat for row in batch.rows), reverse=True), csv)
    inputs = {"targets": list(args.targets), "cutoff": args.cutoff, "alpha": args.alpha, "jobs": args.jobs}
    r = Report("anm", inputs, None, None, {**batch.as_dict(), "csv": str(csv)})
    if not batch.rows:
        log.error("no structure could be analysed")
        return r, EXIT_ERROR
    return r, EXIT_OK if all(row.verdict for row in batch.rows) else EXIT_REJECT


def cmd_mlp(args) -> tuple[Report, int]:
    rep = mlp.spectrum_contrast(args.seed, args.alpha, args.k, steps=args.steps, lr=args.lr)
    out = Path(ensure_dir(args.out_dir))
    files = {}
    for arm in (rep.random, rep.trained):
        path = out / f"mlp_{arm.label}_seed{args.seed}.txt"
        write_spectrum(arm.spectrum, path)
        files[arm.label] = str(path)
    trained = rep.trained
    fit = ks = None
    if trained.beta_hat is not None:
        fit = powerlaw.PowerLawFit.from_beta(trained.beta_hat, args.k,
                                             float(trained.spectrum.values[args.k - 1])).as_dict()
        ks = {"d_ks": trained.d_ks, "d_c": rep.d_c, "alpha": args.alpha, "accept": trained.accept}
    inputs = {"seed": args.seed, "steps": args.steps, "lr": args.lr, "k": args.k, "alpha": args.alpha}
    r = Report("mlp", inputs, fit, ks, {"contrast": rep.as_dict(), "spectra": files})
    return r, EXIT_OK


def cmd_lanczos(args) -> tuple[Report, int]:
    a = lanczos.read_matrix(args.matrix)
    op = lanczos.SymmetricOperator.from_matrix(a)
    cfg = lanczos.LanczosConfig(args.k, args.max_iters, args.tol, args.seed)
    s = lanczos.lanczos_topk(op, cfg)
    write_spectrum(s, args.out)
    inputs = {"matrix": _digest(args.matrix), "k": args.k, "tol": args.tol, "seed": args.seed}
    r = Report("lanczos", inputs, None, None, {"spectrum_file": str(args.out), "values": s.values.tolist()})
    return r, EXIT_OK


def cmd_maxent(args) -> tuple[Report, int]:
    rep = maxent.stationarity_check(args.beta_vol, tuple(args.support), args.trials, args.eps,
                                    m=args.grid, seed=args.seed)
    inputs = {"beta_vol": args.beta_vol, "support": list(args.support), "trials": args.trials,
              "eps": args.eps, "grid": args.grid, "seed": args.seed}
    r = Report("maxent", inputs, None, None, rep.as_dict())
    return r, EXIT_OK if rep.passed else EXIT_REJECT


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="powerspec", description="Power-law analysis of eigenvalue spectra.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="MLE power-law fit and KS test of a spectrum file")
    p.add_argument("spectrum")
    p.add_argument("--k", type=int, default=None, help="number of top values to fit (default: all)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gaps", help="eigengap power law and rank-size exports")
    p.add_argument("spectrum")
    p.add_argument("--k", type=int, default=None, help="top eigenvalues to difference (default: all)")
    p.add_argument("--k-gap", type=int, default=None, help="top gaps to fit (default: all)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=None, help="eps*||M||_op for a Davis-Kahan table")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("anm", help="elastic-network inverse-Hessian power law of PDB structures")
    p.add_argument("targets", nargs="+", help="PDB file paths or 4-character codes")
    p.add_argument("--cutoff", type=float, default=anm.DEFAULT_CUTOFF)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--k", type=int, default=None, help="override the top-tenth fit size (single target)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_anm)

    p = sub.add_parser("mlp", help="trained vs random tiny-network Hessian spectra")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_mlp)

    p = sub.add_parser("lanczos", help="top-k eigenvalues of a dense matrix file")
    p.add_argument("matrix")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="spectrum.txt")
    p.set_defaults(func=cmd_lanczos)

    p = sub.add_parser("maxent", help="numerical stationarity of the power-law entropy optimum")
    p.add_argument("--beta-vol", type=float, required=True)
    p.add_argument("--support", type=float, nargs=2, default=(1.0, 100.0), metavar=("LO", "HI"))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_maxent)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        report, code = args.func(args)
    except Stagnation as exc:
        log.error("%s", exc)
        partial = exc.partial.values.tolist() if exc.partial is not None else None
        report, code = Report(args.command, extras={"error": str(exc), "partial": partial}), EXIT_ERROR
    except (SpectralError, OSError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        report, code = Report(args.command, extras={"error": f"{type(exc).__name__}: {exc}"}), EXIT_ERROR
    report.runtime_ms = (time.perf_counter() - t0) * 1e3
    sys.stdout.write(report.to_json() + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
