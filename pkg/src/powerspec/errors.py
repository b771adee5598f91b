"""Exception types raised across the package.

Every error derives from :class:`SpectralError`, and most also derive from the
builtin exception a caller would naturally catch (``ValueError`` for bad input,
``ArithmeticError`` for numerical failure).
"""


class SpectralError(Exception):
    """Base class for all package errors."""


# -- spectra and files -------------------------------------------------------

class EmptyInput(SpectralError, ValueError):
    pass


class NonFiniteValue(SpectralError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"non-finite value {value!r} at index {index}")


class NonPositiveEigenvalue(SpectralError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"eigenvalue at rank {index + 1} is not positive ({value!r})")


class ParseError(SpectralError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InsufficientLength(SpectralError, ValueError):
    pass


# -- linear algebra ----------------------------------------------------------

class NotSquare(SpectralError, ValueError):
    pass


class NotSymmetric(SpectralError, ValueError):
    def __init__(self, discrepancy, message=None):
        self.discrepancy = discrepancy
        super().__init__(message or f"operator is not symmetric (relative discrepancy {discrepancy:.3e})")


class DimensionMismatch(SpectralError, ValueError):
    pass


class Stagnation(SpectralError, ArithmeticError):
    """Lanczos ran out of iterations; ``partial`` holds the unconverged estimate."""

    def __init__(self, message, partial=None, residuals=None):
        self.partial = partial
        self.residuals = residuals
        super().__init__(message)


# -- statistics --------------------------------------------------------------

class DegenerateSample(SpectralError, ValueError):
    pass


class InvalidFit(SpectralError, ValueError):
    pass


class UnsupportedAlpha(SpectralError, ValueError):
    pass


class MismatchedFit(SpectralError, ValueError):
    pass


class MissingTrace(SpectralError, ValueError):
    pass


class RankOutOfRange(SpectralError, IndexError):
    pass


class PerturbationInfeasible(SpectralError, ValueError):
    pass


# -- proteins ----------------------------------------------------------------

class NoCaAtoms(SpectralError, ValueError):
    pass


class MalformedRecord(SpectralError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InvalidStructure(SpectralError, ValueError):
    pass


class CoincidentResidues(SpectralError, ValueError):
    def __init__(self, i, j):
        self.pair = (i, j)
        super().__init__(f"residues {i} and {j} occupy the same position")


class UnexpectedZeroModes(SpectralError, ValueError):
    def __init__(self, count):
        self.count = count
        super().__init__(f"expected 6 rigid-body zero modes, found {count}")


class TooFewModes(SpectralError, ValueError):
    pass


class StructureNotFound(SpectralError, FileNotFoundError):
    pass


# -- neural network oracle ---------------------------------------------------

class AsymmetryTooLarge(SpectralError, ArithmeticError):
    def __init__(self, asymmetry):
        self.asymmetry = asymmetry
        super().__init__(f"finite-difference Hessian asymmetry {asymmetry:.3e} exceeds tolerance")


class Divergence(SpectralError, ArithmeticError):
    pass
