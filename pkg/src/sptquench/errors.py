"""Exception hierarchy shared across the package."""


class SptQuenchError(Exception):
    """Base class for all package errors."""


# --- dense linear algebra ---

class NotHermitian(SptQuenchError):
    pass


class ConvergenceFailure(SptQuenchError):
    pass


class OddDimension(SptQuenchError):
    pass


class NotSkewSymmetric(SptQuenchError):
    pass


class DimensionMismatch(SptQuenchError):
    pass


# --- free fermions ---

class StripExceeded(SptQuenchError):
    pass


class GapClosure(SptQuenchError):
    pass


class ContourSingular(SptQuenchError):
    pass


class GridTooCoarse(SptQuenchError):
    pass


class EmptySpectrum(SptQuenchError):
    pass


class CapTooLarge(SptQuenchError):
    pass


class NotParticleHole(SptQuenchError):
    pass


class NotSymmetricBipartition(SptQuenchError):
    pass


# --- Lieb-Robinson machinery ---

class NoValidStrip(SptQuenchError):
    pass


class DefectivePoint(SptQuenchError):
    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"defective eigenproblem at k = {k}")


class BandTrackingFailure(SptQuenchError):
    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"band tracking ambiguous near k = {k}")


class InvalidGeometry(SptQuenchError):
    pass


class NoConvergence(SptQuenchError):
    pass


# --- tensor networks ---

class NonInjective(SptQuenchError):
    pass


class NotSymmetric(SptQuenchError):
    pass


class NonUnitaryV(SptQuenchError):
    pass


class TooFewValues(SptQuenchError):
    pass


# --- matrix-product unitaries ---

class NotUnitary(SptQuenchError):
    pass


class SizeOverflow(SptQuenchError):
    pass


class NotSimpleWithin(SptQuenchError):
    def __init__(self, k_max, certificates=None):
        self.k_max = k_max
        self.certificates = certificates or {}
        super().__init__(f"no simple blocking found for k <= {k_max}")


# --- channel bounds ---

class VerificationFailure(SptQuenchError):
    def __init__(self, residual, message=None):
        self.residual = residual
        super().__init__(message or f"minimal-polynomial residual {residual:g}")


class PoleHit(SptQuenchError):
    pass


class ValidityViolated(SptQuenchError):
    pass


# --- models / experiments ---

class InvalidCocycle(SptQuenchError):
    pass


class ConfigError(SptQuenchError):
    pass
