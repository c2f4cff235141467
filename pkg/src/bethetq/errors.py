"""Exception hierarchy for the solver suite.

Every failure mode that the pipeline can recover from (by escalating the
working precision and re-solving) derives from ``EscalationNeeded``; genuine
structural findings derive from ``AnomalyFound`` so that callers can
distinguish "compute harder" from "the result disagrees with the expected
root structure".
"""


class BetheTQError(Exception):
    """Base class for all errors raised by this package."""


class EscalationNeeded(BetheTQError):
    """Recoverable numerical failure: retry at higher working precision."""


class AnomalyFound(BetheTQError):
    """A certified computation disagrees with the expected root structure."""


class NonConvergence(EscalationNeeded):
    """Newton-Raphson exceeded its iteration budget."""


class DegenerateRoots(EscalationNeeded):
    """Two solver roots collided within the convergence tolerance."""


class NearRootDivision(BetheTQError):
    """Transfer-matrix evaluation requested too close to a q-polynomial zero."""


class SymmetryViolation(EscalationNeeded):
    """A quantity that must be real carries a non-negligible imaginary part."""


class PrecisionExhausted(EscalationNeeded):
    """The linear solve lost all significant bits; escalate and retry."""


class SingularClosure(BetheTQError):
    """The closing equation has an exactly zero seed coefficient."""


class IllConditionedInterpolation(EscalationNeeded):
    """Leading-coefficient recovery drifted too far from the monic value 1."""


class RootCertificationFailure(EscalationNeeded):
    """A polished root fails its Bethe-equation residual certification."""


class MultiplicityCollision(EscalationNeeded):
    """Two recovered polynomial roots coincide within the classification tolerance."""


class AmbiguousClassification(EscalationNeeded):
    """A root sits too close to a family boundary to classify honestly."""


class CountMismatch(BetheTQError):
    """Two root sets that must pair off one-to-one have different sizes."""


class StructuralAnomaly(AnomalyFound):
    """Certified root families violate the expected ground-state structure."""


class BoundViolation(AnomalyFound):
    """The imaginary-string count left its bracketing bounds.

    Carries the offending chain length in ``n``.
    """

    def __init__(self, n, message):
        super().__init__(message)
        self.n = n


class MissingRange(BetheTQError):
    """A figure or report was requested for chain lengths that were not computed."""
