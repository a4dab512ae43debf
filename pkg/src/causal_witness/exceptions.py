"""Exception hierarchy shared by the builders, the simulator and the CLI."""


class CausalWitnessError(Exception):
    """Base class for all package errors."""


class UndefinedWeakValueError(CausalWitnessError, ValueError):
    """Raised when a weak value is requested for orthogonal pre/post selections."""


class UndefinedPseudoStateError(UndefinedWeakValueError):
    """Raised when a pseudo-state would require dividing by a zero overlap."""


class DegenerateSelectionError(CausalWitnessError, ValueError):
    """Raised when every outcome path of a selection has zero amplitude."""


class TemperaturePoleError(CausalWitnessError, ValueError):
    """Raised when a population vanishes and the effective temperature diverges."""


class BasisError(CausalWitnessError, ValueError):
    """Raised when a matrix is not diagonal in the required basis."""


class InsufficientStatisticsError(CausalWitnessError, RuntimeError):
    """Raised when a simulated run detects no photons."""
