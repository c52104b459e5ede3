"""Exception hierarchy shared by all chemflood modules."""


class ChemfloodError(Exception):
    """Base class for all package errors."""


class DomainError(ChemfloodError, ValueError):
    """Evaluation requested outside the unit square (or outside a function's domain)."""


class StructureError(ChemfloodError):
    """The model geometry falls outside the supported class (e.g. multi-valued
    coincidence locus, wrong curvature at the saddle, missing curve intersection)."""


class NumericalError(ChemfloodError):
    """An iteration failed to converge.  Carries the last iterate when available."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConnectionNotFoundError(NumericalError):
    """Phase-plane shooting found no sign change of the miss distance."""


class RankineHugoniotError(ChemfloodError):
    """States are not connectable by a single discontinuity."""


class DegenerateStateError(ChemfloodError):
    """Both states of a candidate shock coincide."""


class UnsupportedCaseError(ChemfloodError):
    """Riemann data in the excluded corner s_L = 0 with c_L != c_R."""


class CompatibilityError(ChemfloodError):
    """Internal wave-assembly bug: a construction violated speed compatibility."""
