"""Typed error hierarchy.

Every failure the engine can signal carries a stable machine-readable
``code`` (the class name) next to the human message, so the CLI and the
HTTP service can surface both without string matching.
"""


class MeasureError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# geometry
class ZeroVector(MeasureError):
    pass


class DegenerateInput(MeasureError):
    pass


class NotFinite(MeasureError):
    pass


class DegenerateLine(MeasureError):
    pass


# homography estimation
class InsufficientPoints(MeasureError):
    pass


class DegenerateConfiguration(MeasureError):
    pass


class MappedToInfinity(MeasureError):
    pass


class NoConsensus(MeasureError):
    pass


# reference object specs
class ParseError(MeasureError):
    pass


class ValidationError(MeasureError):
    pass


# metrology
class DegeneratePair(MeasureError):
    pass


class DegenerateGeometry(MeasureError):
    pass


class DegenerateDirection(MeasureError):
    pass


class ZeroLength(MeasureError):
    pass


class MissingFace(MeasureError):
    pass


# synthetic scenes
class BehindCamera(MeasureError):
    pass


class InvalidPose(MeasureError):
    pass


# session service
class UnknownReference(MeasureError):
    pass


class UndecodableImage(MeasureError):
    pass


class SessionNotFound(MeasureError):
    pass


class CalibrationRequired(MeasureError):
    pass
