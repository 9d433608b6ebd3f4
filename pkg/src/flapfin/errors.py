"""Exception hierarchy shared by all modules."""


class FlapfinError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FlapfinError):
    """Run configuration is malformed or inconsistent."""


class OutOfBounds(FlapfinError):
    """A parameter vector violates the box constraints."""


class DegenerateTrajectory(FlapfinError):
    """The trajectory has no well-defined tangent everywhere."""


class DegenerateForce(FlapfinError):
    """A force ratio or direction is undefined because a magnitude vanished."""


class AllCandidatesFailed(FlapfinError):
    """Every candidate of a generation failed to evaluate."""


class SchemaMismatch(FlapfinError):
    """A persisted document carries an incompatible schema version."""


class MissingSnapshot(FlapfinError):
    """No optimizer snapshot exists for the requested generation."""


class NotPositiveDefinite(FlapfinError):
    """A covariance matrix is not symmetric positive-definite."""


class NonUniformSampling(FlapfinError):
    """A periodic trace is not uniformly sampled over exactly one period."""
