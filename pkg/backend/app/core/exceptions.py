"""Error hierarchy; every error carries the process exit code the CLI reports"""
from typing import Optional


class ToolkitError(Exception):
    """Base error with an exit code and a human readable detail"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(ToolkitError):
    """Malformed command line or configuration"""
    exit_code = 1


class ConfigError(UsageError):
    """Config file rejected; names the key and the expected type"""

    def __init__(self, key: str, expected: str, detail: Optional[str] = None):
        self.key = key
        self.expected = expected
        super().__init__(detail or f"config key '{key}': expected {expected}")


class DomainError(ToolkitError):
    """A mathematical precondition of the requested computation failed"""
    exit_code = 2


class MeanConstraintError(DomainError):
    def __init__(self, measured: float, expected: float, tol: float):
        self.measured = measured
        self.expected = expected
        super().__init__(
            f"mean constraint violated: measured mean {measured:.17g}, "
            f"expected {expected:.17g} (tolerance {tol:g})"
        )


class CertificateUnavailableError(DomainError):
    """phi too large for certificate (8 phi^(1/3) >= 1)"""


class NoPositiveZeroError(DomainError):
    """xi <= xi_d: the reduced energy has no strictly positive zero"""


class DropletTooLargeError(DomainError):
    """Droplet or ball does not fit the torus / rescaled box"""


class RebalanceError(DomainError):
    """Truncation removed mass that cannot be restored on the low phase"""


class NoLowerStateError(DomainError):
    """The droplet family reached no state below the uniform energy"""


class UnstableStepError(DomainError):
    """String method step too large: the path maximum keeps increasing"""


class SnapshotFormatError(DomainError):
    """CHF1 header or payload malformed"""


class ConsistencyError(ToolkitError):
    """An internal closed-form self-check failed"""
    exit_code = 1
