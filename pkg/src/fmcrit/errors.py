"""Exception hierarchy."""


class GeometryError(ValueError):
    pass


class DegenerateLineError(GeometryError):
    """A line with (l1, l2) = (0, 0) was used where a direction is needed."""


class BehindCameraError(GeometryError):
    pass


class CoincidentCentersError(GeometryError):
    pass


class DegenerateEpipolarLineError(GeometryError):
    """A point sits at an epipole, so its epipolar line is undefined."""


class PointAtEpipoleError(GeometryError):
    pass


class NumericalFailure(ArithmeticError):
    pass


class GenerationError(RuntimeError):
    pass


class MaxTrialsExceeded(GenerationError):
    def __init__(self, trials: int, message: str | None = None):
        self.trials = trials
        super().__init__(message or f"no acceptable correspondence after {trials} trials")


class SamplingExhausted(GenerationError):
    pass


class SchemaMismatch(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
