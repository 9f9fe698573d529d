class LabError(Exception):
    """Base class for every error raised by the link-simulation lab."""


class NumericsError(LabError):
    """Numerical kernel failure; `index` is the batch position when known."""

    def __init__(self, message: str, index: int = None):
        super().__init__(message)
        self.index = index


class ChannelError(LabError):
    pass


class ModemError(LabError):
    pass


class DetectorError(LabError):
    pass


class AnalysisError(LabError):
    pass


class ConfigError(LabError):
    """Invalid experiment configuration; `key` names the offending field."""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key


class SimulationError(LabError):
    """
    Failure inside a Monte Carlo trial.

    Carries enough to replay the failing realization on its own.
    """

    def __init__(self, message: str, realization: int = None,
                 stream_id: int = None, coordinates: dict = None):
        super().__init__(message)
        self.realization = realization
        self.stream_id = stream_id
        self.coordinates = dict(coordinates or {})

    def __reduce__(self):
        return (self.__class__, (self.args[0], self.realization, self.stream_id, self.coordinates))

    def __str__(self):
        base = super().__str__()
        extra = []
        if self.realization is not None:
            extra.append(f"realization={self.realization}")
        if self.stream_id is not None:
            extra.append(f"stream_id={self.stream_id}")
        extra.extend(f"{k}={v}" for k, v in self.coordinates.items())
        return f"{base} ({', '.join(extra)})" if extra else base


class OutputError(LabError):
    pass
