"""Semantic exception hierarchy for the lglab package."""


class LglabError(Exception):
    """Base class for all lglab errors."""


class ValidationError(LglabError):
    """A probability table or model component failed validation."""


class ModelError(LglabError):
    """A domain error: unresolved name, mismatched state space, missing row."""


class PreconditionError(ModelError):
    """An operation's stated precondition does not hold for the given inputs."""


class ClassificationError(ModelError):
    """Classification cannot proceed (e.g. no eigenstate preparation declared)."""


class SchemaError(LglabError):
    """A model file does not conform to the published schema."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class EngineDefectError(LglabError):
    """An exact internal identity was violated.

    This signals a defect in the propagation engine or a corrupted model,
    never a property of a valid input. It must not be caught and ignored.
    """
