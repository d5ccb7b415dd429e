"""Exception classes raised by the qso package."""


class QSOError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(QSOError, ValueError):
    pass


class NegativeEntry(QSOError, ValueError):
    def __init__(self, i, j, k, value):
        self.index = (i, j, k)
        self.value = value
        super().__init__(f"negative hereditary coefficient P[{i},{j},{k}] = {value!r}")


class RowSumViolation(QSOError, ValueError):
    def __init__(self, i, j, total):
        self.pair = (i, j)
        self.total = total
        super().__init__(f"row ({i},{j}) sums to {total!r}, expected 1")


class NotVolterra(QSOError, ValueError):
    pass


class NoConvergence(QSOError, RuntimeError):
    def __init__(self, message, best_residual=float("nan"), best_x=None):
        self.best_residual = best_residual
        self.best_x = best_x
        super().__init__(f"{message} (best residual {best_residual:.3e})")


class NoCertificate(QSOError, ValueError):
    pass


class EmbeddingResidualFail(QSOError, RuntimeError):
    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"reduced problem solved but residual on the original operator is "
            f"{residual:.3e} > {tol:.3e}"
        )


class NotProbability(QSOError, ValueError):
    def __init__(self, mass):
        self.mass = mass
        super().__init__(f"masses sum to {mass!r}, not 1")


class OverlapOutOfRange(QSOError, ValueError):
    pass


class GeometryMissing(QSOError, ValueError):
    pass


class PartitionMismatch(QSOError, ValueError):
    pass


class NotNormalized(QSOError, ValueError):
    def __init__(self, i, j, total):
        self.pair = (i, j)
        self.total = total
        super().__init__(f"kernel block ({i},{j}) integrates to {total!r}, expected 1")


class NotSurjective(QSOError, ValueError):
    pass
