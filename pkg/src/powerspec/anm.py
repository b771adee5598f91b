"""Anisotropic network model of a protein and its inverse-Hessian spectrum.

One node per residue, placed at the C-alpha atom.  Residues closer than the
cutoff ``r_c`` are joined by springs of stiffness ``kappa``; the resulting
3N x 3N Hessian has six rigid-body zero modes when the contact graph is
connected.
"""

from __future__ import annotations

import gzip
import logging
import math
import os
import re
import urllib.request
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Spectrum
from .errors import (
    CoincidentResidues,
    InvalidStructure,
    MalformedRecord,
    NoCaAtoms,
    SpectralError,
    StructureNotFound,
    TooFewModes,
    UnexpectedZeroModes,
)
from .powerlaw import KsVerdict, PowerLawFit, ks_test, mle_fit

log = logging.getLogger(__name__)

CACHE_ENV = "POWERSPEC_PDB_CACHE"
RCSB_URL = "https://files.rcsb.org/download/{code}.pdb"
DEFAULT_CUTOFF = 9.0
DEFAULT_ZERO_TOL = 1e-8
# 3 * N_AA brackets used for aggregate statistics, half-open except the last
SIZE_STRATA = ((300, 1000), (1000, 3000), (3000, 6000))


@dataclass(frozen=True)
class Residue:
    chain: str
    resseq: int
    icode: str
    resname: str


@dataclass(frozen=True, eq=False)
class ProteinStructure:
    residues: tuple
    coords: np.ndarray  # (N, 3) C-alpha positions in Angstrom
    source_id: str = ""

    def __post_init__(self):
        xyz = np.array(self.coords, dtype=np.float64).reshape(-1, 3)
        if len(self.residues) != xyz.shape[0]:
            raise InvalidStructure("residue list and coordinates differ in length")
        if xyz.shape[0] < 2:
            raise InvalidStructure("a network needs at least 2 residues")
        if not np.all(np.isfinite(xyz)):
            raise InvalidStructure("non-finite coordinate")
        xyz.setflags(write=False)
        object.__setattr__(self, "coords", xyz)
        object.__setattr__(self, "residues", tuple(self.residues))

    @property
    def n_residues(self) -> int:
        return len(self.residues)

    def transformed(self, rotation=None, translation=None) -> "ProteinStructure":
        xyz = self.coords
        if rotation is not None:
            xyz = xyz @ np.asarray(rotation).T
        if translation is not None:
            xyz = xyz + np.asarray(translation)
        return ProteinStructure(self.residues, xyz, self.source_id)


def parse_pdb(text: str, source_id: str = "") -> ProteinStructure:
    """C-alpha trace of the first model in fixed-column PDB text.

    Only ``ATOM`` records named ``CA`` are used.  The first record seen for a
    (chain, resSeq, iCode) key wins, which keeps the first alternate location.
    """
    residues, coords, seen = [], [], set()
    in_model = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        tag = line[:6]
        if tag == "MODEL ":
            in_model = True
            continue
        if tag == "ENDMDL" and in_model:
            break
        if tag != "ATOM  " or line[12:16].strip() != "CA":
            continue
        if len(line) < 54:
            raise MalformedRecord(lineno, "ATOM record shorter than 54 columns")
        try:
            resseq = int(line[22:26])
            xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError:
            raise MalformedRecord(lineno, "unreadable residue number or coordinate") from None
        key = (line[21], resseq, line[26])
        if key in seen:
            continue
        seen.add(key)
        residues.append(Residue(line[21], resseq, line[26].strip(), line[17:20].strip()))
        coords.append(xyz)
    if not residues:
        raise NoCaAtoms(f"no C-alpha ATOM records in {source_id or 'input'}")
    return ProteinStructure(tuple(residues), np.array(coords), source_id)


# -- structure files ---------------------------------------------------------

_CODE = re.compile(r"^[0-9][A-Za-z0-9]{3}$")


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "powerspec" / "pdb"


def _read_text(path: Path) -> str:
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8", errors="replace") as fh:
            return fh.read()
    return path.read_text(encoding="utf-8", errors="replace")


def _cached_file(code: str, directory: Path) -> Optional[Path]:
    lc, uc = code.lower(), code.upper()
    for name in (f"{uc}.pdb", f"{lc}.pdb", f"pdb{lc}.ent", f"{uc}.pdb.gz", f"{lc}.pdb.gz", f"pdb{lc}.ent.gz"):
        if (directory / name).is_file():
            return directory / name
    return None


def fetch_pdb(code: str, directory: Optional[Path] = None, timeout: float = 30.0) -> Path:
    """Return a local copy of PDB entry ``code``, downloading it if needed."""
    directory = Path(directory) if directory is not None else cache_dir()
    hit = _cached_file(code, directory)
    if hit is not None:
        return hit
    url = RCSB_URL.format(code=code.upper())
    log.info("downloading %s", url)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            data = resp.read()
    except OSError as exc:
        raise StructureNotFound(f"{code}: not in cache {directory} and download failed ({exc})") from None
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{code.upper()}.pdb"
    target.write_bytes(data)
    return target


def load_structure(spec: str, directory: Optional[Path] = None) -> ProteinStructure:
    """Parse a structure from a file path, or from a 4-character PDB code."""
    path = Path(spec)
    if path.is_file():
        name = path.name.split(".")[0]
        return parse_pdb(_read_text(path), name)
    if _CODE.match(spec):
        return parse_pdb(_read_text(fetch_pdb(spec, directory)), spec.upper())
    raise StructureNotFound(f"{spec}: no such file, and not a PDB code")


# -- elastic network ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AnmModel:
    gamma: np.ndarray  # N x N contact Laplacian (Kirchhoff matrix)
    hessian: np.ndarray  # 3N x 3N
    r_c: float
    kappa: float
    structure: Optional[ProteinStructure] = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.gamma.shape[0]


def contact_pairs(coords: np.ndarray, r_c: float) -> tuple[np.ndarray, np.ndarray]:
    diff = coords[None, :, :] - coords[:, None, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    i, j = np.nonzero(np.triu(dist2 <= r_c * r_c, k=1))
    return i, j


def build_anm(p: ProteinStructure, r_c: float = DEFAULT_CUTOFF, kappa: float = 1.0) -> AnmModel:
    """Assemble the contact Laplacian and the ANM Hessian.

    For a contact ``i-j`` with native separation ``d = r_j - r_i``, the
    off-diagonal block is ``-kappa d d^T / |d|^2``; each diagonal block is the
    negated sum of its row's off-diagonal blocks.
    """
    if not r_c > 0:
        raise ValueError("cutoff r_c must be positive")
    xyz = p.coords
    n = xyz.shape[0]
    i, j = contact_pairs(xyz, r_c)
    d = xyz[j] - xyz[i]
    s2 = np.einsum("pk,pk->p", d, d)
    if np.any(s2 == 0):
        at = int(np.flatnonzero(s2 == 0)[0])
        raise CoincidentResidues(int(i[at]), int(j[at]))

    gamma = np.zeros((n, n))
    gamma[i, j] = gamma[j, i] = -1.0
    gamma[np.diag_indices(n)] = -gamma.sum(axis=1)

    blocks = -kappa * d[:, :, None] * d[:, None, :] / s2[:, None, None]
    h = np.zeros((n, 3, n, 3))
    h[i, :, j, :] = blocks
    h[j, :, i, :] = blocks  # each block is symmetric
    diag = np.zeros((n, 3, 3))
    np.add.at(diag, i, -blocks)
    np.add.at(diag, j, -blocks)
    h[np.arange(n), :, np.arange(n), :] = diag
    return AnmModel(gamma, h.reshape(3 * n, 3 * n), float(r_c), float(kappa), p)


@dataclass(frozen=True, eq=False)
class VibrationalSpectrum:
    eigenvalues: np.ndarray  # all 3N, ascending
    n_zero: int
    sigma: np.ndarray  # 1 / nonzero eigenvalue, descending
    source_id: str = ""

    @property
    def sigma_hat(self) -> np.ndarray:
        return self.sigma / self.sigma[0]

    @property
    def n_modes(self) -> int:
        return self.sigma.size

    def inverse_spectrum(self) -> Spectrum:
        return Spectrum(self.sigma, "anm-inverse", n_total=self.sigma.size,
                        trace_hint=math.fsum(self.sigma))


def vibrational_spectrum(m: AnmModel, zero_tol: float = DEFAULT_ZERO_TOL) -> VibrationalSpectrum:
    """Diagonalise the Hessian and invert its non-rigid modes.

    Modes below ``zero_tol * max eigenvalue`` count as rigid-body motions;
    anything other than exactly six raises :class:`UnexpectedZeroModes`.
    """
    w = np.linalg.eigvalsh(m.hessian)
    top = w[-1]
    if not top > 0:
        raise UnexpectedZeroModes(w.size)
    zero = int(np.count_nonzero(w < zero_tol * top))
    if zero != 6:
        raise UnexpectedZeroModes(zero)
    modes = w[zero:]
    sid = m.structure.source_id if m.structure is not None else ""
    return VibrationalSpectrum(w, zero, 1.0 / modes, sid)


def protein_powerlaw(v: VibrationalSpectrum, alpha: float = 0.05,
                     k: Optional[int] = None) -> tuple[PowerLawFit, KsVerdict]:
    """Fit the top tenth of the inverse spectrum (or the top ``k``) and KS-test it."""
    if v.n_modes < 60:
        raise TooFewModes(f"{v.n_modes} non-rigid modes; at least 60 are required")
    k = v.n_modes // 10 if k is None else k
    s = v.inverse_spectrum()
    fit = mle_fit(s, k)
    return fit, ks_test(s, fit, alpha)


# -- batches -----------------------------------------------------------------

@dataclass
class ProteinRow:
    pdb_id: str
    n_residues: int
    k_fit: int
    beta_hat: float
    sigma: float
    s_hat: float
    d_ks: float
    d_c: float
    verdict: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def analyze_structure(p: ProteinStructure, r_c: float = DEFAULT_CUTOFF, alpha: float = 0.05,
                      k: Optional[int] = None, zero_tol: float = DEFAULT_ZERO_TOL):
    v = vibrational_spectrum(build_anm(p, r_c), zero_tol)
    fit, ks = protein_powerlaw(v, alpha, k)
    row = ProteinRow(p.source_id, p.n_residues, fit.k_samples, fit.beta_hat, fit.sigma, fit.s_hat,
                     ks.d_ks, ks.d_c, ks.is_power_law)
    return row, v, fit, ks


def _analyze_path(args):
    spec, r_c, alpha, zero_tol, directory = args
    try:
        p = load_structure(spec, directory)
        row, *_ = analyze_structure(p, r_c, alpha, zero_tol=zero_tol)
        return spec, row, None
    except (SpectralError, OSError, ValueError) as exc:
        return spec, None, f"{type(exc).__name__}: {exc}"


def size_stratum(n_residues: int) -> Optional[str]:
    dof = 3 * n_residues
    last = len(SIZE_STRATA) - 1
    for idx, (lo, hi) in enumerate(SIZE_STRATA):
        if lo <= dof < hi or (idx == last and dof == hi):
            return f"{lo}-{hi}"
    return None


def _summary(rows) -> dict:
    s = np.array([r.s_hat for r in rows])
    b = np.array([r.beta_hat for r in rows])
    ratio = np.array([r.d_ks / r.d_c for r in rows])
    ddof = 1 if len(rows) > 1 else 0
    return {
        "count": len(rows),
        "mean_s_hat": float(s.mean()),
        "std_s_hat": float(s.std(ddof=ddof)),
        "mean_beta_hat": float(b.mean()),
        "std_beta_hat": float(b.std(ddof=ddof)),
        "mean_dks_over_dc": float(ratio.mean()),
        "all_accept": bool(all(r.verdict for r in rows)),
    }


@dataclass
class BatchReport:
    rows: list
    failures: dict  # input -> error message
    strata: dict
    overall: Optional[dict]

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "failures": self.failures,
            "strata": self.strata,
            "overall": self.overall,
        }


def batch_analyze(paths: Sequence[str], r_c: float = DEFAULT_CUTOFF, alpha: float = 0.05, *,
                  jobs: int = 1, zero_tol: float = DEFAULT_ZERO_TOL,
                  directory: Optional[Path] = None) -> BatchReport:
    """Analyse many structures; per-file failures are collected, not raised."""
    paths = list(paths)
    if not paths:
        raise ValueError("no structures given")
    tasks = [(str(p), r_c, alpha, zero_tol, directory) for p in paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_analyze_path, tasks))
    else:
        results = [_analyze_path(t) for t in tasks]

    rows, failures = [], {}
    for spec, row, err in results:
        if row is None:
            failures[spec] = err
        else:
            rows.append(row)
    strata = {}
    for lo, hi in SIZE_STRATA:
        label = f"{lo}-{hi}"
        members = [r for r in rows if size_stratum(r.n_residues) == label]
        if members:
            strata[label] = _summary(members)
    return BatchReport(rows, failures, strata, _summary(rows) if rows else None)
