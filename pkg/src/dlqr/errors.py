"""Exception types shared across the package."""


class DlqrError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DlqrError, ValueError):
    """Bad construction parameters, dimension mismatches, bad config values."""


class NotStabilizingError(DlqrError):
    """A gain K was required to be stabilizing but is not.

    Carries the offending spectral abscissa.
    """

    def __init__(self, abscissa, message=None):
        self.abscissa = float(abscissa)
        super().__init__(message or f"gain is not stabilizing (spectral abscissa {abscissa:.6g})")


class LyapunovSingularError(DlqrError):
    """The Kronecker system of a Lyapunov equation is singular or near-singular.

    Typically signals an iterate on (or numerically at) the stability boundary.
    """

    def __init__(self, cond_estimate, message=None):
        self.cond_estimate = float(cond_estimate)
        super().__init__(
            message or f"Lyapunov system near-singular (condition estimate {cond_estimate:.3g})"
        )


class NumericFailureError(DlqrError):
    """An iterative numeric routine (eigenvalue QR) failed to converge."""


class DegenerateStepError(DlqrError):
    """The restricted linear system of an alternating step is singular."""


class LineSearchError(DlqrError):
    """Backtracking exhausted all trial steps without sufficient decrease.

    ``trials`` holds the logged (step, objective) pairs.
    """

    def __init__(self, trials, message=None):
        self.trials = list(trials)
        super().__init__(message or f"line search failed after {len(self.trials)} trials")


class SamplingError(DlqrError):
    """Rejection sampling exceeded its retry budget."""

    def __init__(self, attempts, accepted, message=None):
        self.attempts = int(attempts)
        self.accepted = int(accepted)
        rate = accepted / attempts if attempts else 0.0
        self.acceptance_rate = rate
        super().__init__(
            message
            or f"no stabilizing sample in {attempts} draws (acceptance rate ~{rate:.4f})"
        )


class OutOfAtlasError(DlqrError):
    """A gain lies outside the box covered by a component atlas."""


class UnsupportedDimensionError(DlqrError):
    """Atlas construction guarded against too many free dimensions."""
