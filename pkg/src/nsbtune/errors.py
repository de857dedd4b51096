"""Exception types shared across the package.

Diagnostics carry label ids (and source positions where available) so that
CLI output can point back into the program text.
"""


class NsbtuneError(Exception):
    """Base class for all package errors."""


class SyntaxError(NsbtuneError):  # noqa: A001 - deliberate shadowing inside this namespace
    """Malformed source text. Carries 1-based line and column."""

    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DuplicateRequire(NsbtuneError):
    """Two require_nsb directives target the same variable."""

    def __init__(self, var):
        super().__init__(f"duplicate require_nsb for variable '{var}'")
        self.var = var


class UseBeforeDef(NsbtuneError):
    """A variable is read on some path with no reaching definition."""

    def __init__(self, var, label=None):
        where = f" (label {label})" if label is not None else ""
        super().__init__(f"variable '{var}' may be read before assignment{where}")
        self.var = var
        self.label = label


class DivergenceError(NsbtuneError):
    """A while loop exceeded the iteration cap."""

    def __init__(self, label, cap):
        super().__init__(f"loop at label {label} exceeded {cap} iterations")
        self.label = label
        self.cap = cap


class MathDomainError(NsbtuneError):
    """Domain violation (sqrt of a negative, division by zero) at runtime."""

    def __init__(self, what, label, trial=0):
        super().__init__(f"{what} at label {label} (trial {trial})")
        self.what = what
        self.label = label
        self.trial = trial


class MissingRange(NsbtuneError):
    """Constraint generation found no range record for a label."""

    def __init__(self, label):
        super().__init__(f"no range information for label {label}")
        self.label = label


class DivisorMayVanish(NsbtuneError):
    """A division's divisor was observed at magnitude zero; its lower
    magnitude bound is undefined and the division rule cannot be emitted."""

    def __init__(self, label):
        super().__init__(f"divisor at label {label} may be zero; cannot bound the quotient error")
        self.label = label


class OverflowGuard(NsbtuneError):
    """A solved precision exceeded the sanity cap, indicating a modeling error."""

    def __init__(self, label, value, cap=1024):
        super().__init__(f"precision T({label}) = {value} exceeds the cap {cap}")
        self.label = label
        self.value = value


class Unrepresentable(NsbtuneError):
    """A significand width exceeds the widest supported IEEE format."""

    def __init__(self, nsb):
        super().__init__(f"nsb {nsb} exceeds 113 (binary128 significand)")
        self.nsb = nsb


class ReachedZeroNsb(NsbtuneError):
    """Strict emulation reached a value site whose assigned width is zero."""

    def __init__(self, label):
        super().__init__(f"control reached label {label} with nsb 0")
        self.label = label
