"""Exception hierarchy.

Everything raised deliberately by the library derives from :class:`StotError`,
so callers (and the CLI) can separate contract failures from programming errors.
"""


class StotError(Exception):
    pass


class DimensionMismatch(StotError, ValueError):
    pass


class NotHermitian(StotError, ValueError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"operator is not Hermitian: max|M - M^dag| = {residual:.3e} > {tol:.1e}")
        self.residual = residual


class NotPositive(StotError, ValueError):
    def __init__(self, min_eigenvalue: float, tol: float):
        super().__init__(f"operator is not PSD: min eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}")
        self.min_eigenvalue = min_eigenvalue


class NotNormalized(StotError, ValueError):
    pass


class InvalidMeasurement(StotError, ValueError):
    pass


class NotCompletelyPositive(StotError, ValueError):
    def __init__(self, min_eigenvalue: float, tol: float):
        super().__init__(
            f"map is not completely positive: min Choi eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}"
        )
        self.min_eigenvalue = min_eigenvalue


class NotTracePreserving(StotError, ValueError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"map is not trace preserving: residual {residual:.3e} > {tol:.1e}")
        self.residual = residual


class EigenDecompositionError(StotError, ArithmeticError):
    pass


class ImaginaryResidueExceeded(StotError, ArithmeticError):
    def __init__(self, residue: float, tol: float):
        super().__init__(f"imaginary residue {residue:.3e} exceeds {tol:.1e}")
        self.residue = residue


class InvalidPartition(StotError, ValueError):
    pass


class NoSolution(StotError, ArithmeticError):
    """The anticommutator equation has no solution.

    ``blocks`` lists the offending ``(k, l)`` eigenbasis block indices, where
    ``s_k + s_l`` vanishes but the target block does not.
    """

    def __init__(self, blocks, residual: float):
        self.blocks = [tuple(int(x) for x in b) for b in blocks]
        self.residual = residual
        super().__init__(
            f"no solution: kernel blocks {self.blocks} carry target norm up to {residual:.3e}"
        )


class IllConditionedFrame(StotError, ArithmeticError):
    pass
