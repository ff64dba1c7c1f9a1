"""Exception types raised across the package."""


class ModopError(Exception):
    """Base class for every error raised by modop."""


class ShapeMismatch(ModopError, ValueError):
    pass


class NotPositive(ModopError, ValueError):
    pass


class NotHermitian(ModopError, ValueError):
    pass


class SingularMatrix(ModopError, ValueError):
    pass


class NoConvergence(ModopError, RuntimeError):
    pass


class StructureViolation(ModopError, ValueError):
    pass


class PreconditionFailed(ModopError):
    """A verifier was handed inputs that do not satisfy its hypotheses.

    ``hypothesis`` names the violated condition and ``residual`` carries the
    measured value that breached it.
    """

    def __init__(self, hypothesis, residual=None, threshold=None):
        self.hypothesis = hypothesis
        self.residual = residual
        self.threshold = threshold
        msg = hypothesis
        if residual is not None:
            msg = f"{hypothesis} (residual {residual:.3e} > {threshold:.3e})"
        super().__init__(msg)


class TransformSingular(ModopError, ValueError):
    pass


class ConfigInvalid(ModopError, ValueError):
    pass
