"""Power-law analysis of eigenvalue spectra: Hessians, eigengaps and protein elastic networks."""

from .core import Spectrum, make_spectrum, read_spectrum, trace_normalize, write_spectrum
from .errors import SpectralError
from .powerlaw import KsVerdict, PowerLawFit, critical_value, fit_and_test, ks_test, mle_fit

__version__ = "0.1.0"
