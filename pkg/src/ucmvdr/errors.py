"""Exception hierarchy for ucmvdr."""


class UcmvdrError(Exception):
    """Base class for all package errors."""


class DomainError(UcmvdrError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(UcmvdrError, ArithmeticError):
    """A numerical routine failed or its input is numerically degenerate."""


class SingularCovarianceError(NumericalError):
    def __init__(self, min_eigenvalue, threshold):
        self.min_eigenvalue = float(min_eigenvalue)
        self.threshold = float(threshold)
        super().__init__(
            f"covariance is singular to working precision: min eigenvalue "
            f"{self.min_eigenvalue:.3e} <= threshold {self.threshold:.3e}"
        )


class DegeneratePolynomialError(NumericalError):
    """Leading coefficient vanishes, so the nominal degree would drop."""


class DegenerateZeroError(NumericalError):
    def __init__(self, index, value):
        self.index = int(index)
        self.value = complex(value)
        super().__init__(
            f"zero #{self.index} = {self.value!r} is at the origin; its angle is undefined"
        )


class CalibrationError(UcmvdrError):
    def __init__(self, target, achievable):
        self.target = float(target)
        self.achievable = (float(achievable[0]), float(achievable[1]))
        super().__init__(
            f"target mean WNG {self.target:.6g} is unreachable; the loading bracket "
            f"achieves [{self.achievable[0]:.6g}, {self.achievable[1]:.6g}]"
        )


class ConfigError(UcmvdrError, ValueError):
    """Experiment configuration is malformed or inconsistent."""
