"""Exception types raised across the package."""


class QRiccatiError(Exception):
    """Base class for all package errors."""


class ZeroQuaternion(QRiccatiError, ZeroDivisionError):
    pass


class NonUnitQuaternion(QRiccatiError, ValueError):
    pass


class VanishingLambda(QRiccatiError, ValueError):
    pass


class CapExceeded(QRiccatiError):
    """No period multiplier up to the cap satisfies the constructive bound."""


class CertificationFailure(QRiccatiError):
    """A guarantee that should hold under the checked hypotheses was violated numerically."""


class CalibrationFailed(QRiccatiError):
    def __init__(self, message, last_signs=None, last_scale=None):
        super().__init__(message)
        self.last_signs = last_signs
        self.last_scale = last_scale


class MidpointEscape(QRiccatiError):
    def __init__(self, message, midpoint=None, t_escape=None):
        super().__init__(message)
        self.midpoint = midpoint
        self.t_escape = t_escape


class NotApplicable(QRiccatiError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoConvergence(QRiccatiError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Unclassified(QRiccatiError, ValueError):
    pass


class ParseError(QRiccatiError, ValueError):
    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(QRiccatiError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class StrictRefusal(QRiccatiError):
    """A reduction step was refused because strict mode disallows it."""
