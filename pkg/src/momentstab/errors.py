"""Exception and warning types shared across the package."""


class MomentStabError(Exception):
    """Base class for all numerical and domain errors raised here."""


class NonSimpleDominant(MomentStabError):
    """Dominant eigenvalue is repeated or tied in magnitude with another."""


class ComplexDominant(MomentStabError):
    """Dominant eigenvalue is not real."""


class DefectiveMatrix(MomentStabError):
    """Eigenvector matrix is numerically singular."""


class AsymmetricSystem(MomentStabError):
    """Symmetrically correlated noise was requested for an asymmetric matrix."""


class UnsupportedNoise(MomentStabError):
    """The requested operation is not defined for this noise model."""


class NonConvergence(MomentStabError):
    """An iterative eigenvalue computation hit its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateWindow(MomentStabError):
    """Fit window too short or contains unusable estimates."""


class SignFlip(MomentStabError):
    """Every run flipped sign, leaving nothing to take logs of."""


class UnstableMean(MomentStabError):
    """The unperturbed system does not converge (lambda >= 1)."""


MeanUnstable = UnstableMean


class NegativeEntry(MomentStabError):
    """Structural classification needs a nonnegative matrix."""


class NotPrimitive(MomentStabError):
    """Operation requires a primitive matrix."""


class RejectionExhausted(MomentStabError):
    """Random matrix generator exceeded its rejection cap."""


class ConfigError(MomentStabError):
    """Malformed experiment configuration."""


class RegimeViolation(UserWarning):
    """An approximation was evaluated outside its domain of validity."""


class OverflowWarning(UserWarning):
    """A simulated trajectory left the floating point range."""


class HeavyTailWarning(UserWarning):
    """Divergent moments are underestimated by finite ensembles at large t."""
