"""Exception hierarchy shared by all qaut modules."""


class QautError(Exception):
    """Base class for every error raised by qaut."""


class DimensionMismatch(QautError, ValueError):
    pass


class NonFiniteEntry(QautError, ValueError):
    pass


class NotHermitian(QautError, ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"matrix is not Hermitian (max |A - A*| = {deviation:.3e})")
        self.deviation = deviation


class NotPSD(QautError, ValueError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class TraceNotOne(QautError, ValueError):
    def __init__(self, trace: float):
        super().__init__(f"density operator must have unit trace, got {trace:.12g}")
        self.trace = trace


class CompletenessViolation(QautError, ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"completeness violated: max |sum K*K - I| = {deviation:.3e}")
        self.deviation = deviation


class NotIsometric(QautError, ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"operator is not an isometry: max |W*W - I| = {deviation:.3e}")
        self.deviation = deviation


class NotUnitary(QautError, ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"operator is not unitary: max |U*U - I| = {deviation:.3e}")
        self.deviation = deviation


class UnknownLabel(QautError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown label"


class ZeroProbabilityOutcome(QautError, ValueError):
    def __init__(self, label: str, probability: float):
        super().__init__(f"outcome {label!r} has probability {probability:.3e}; effect undefined")
        self.label = label
        self.probability = probability


class ProbabilityOutOfRange(QautError, ArithmeticError):
    """A computed probability fell outside [-tol, 1 + tol]."""


class ResidualMass(QautError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"branch tree has unterminated mass {residual:.3e}")
        self.residual = residual
