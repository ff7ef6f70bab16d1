"""Multidimensional anomaly analysis of interaction logs."""

import json

from ._cubelens import (
    DataError,
    Service,
    bin_time,
    deviation_poisson,
    deviation_ratio,
    log_poisson_cdf,
    normalize_hashtag,
    parse_log,
    poisson_cdf,
    preset_names,
    run,
    synth,
)

__all__ = [
    "ApiError",
    "DataError",
    "Service",
    "Session",
    "bin_time",
    "deviation_poisson",
    "deviation_ratio",
    "log_poisson_cdf",
    "normalize_hashtag",
    "parse_log",
    "poisson_cdf",
    "preset_names",
    "run",
    "synth",
]

__version__ = "0.1.0"


class ApiError(Exception):
    def __init__(self, status, message):
        super().__init__(f"{status}: {message}")
        self.status = status
        self.message = message


class Session:
    """JSON client over an in-process service."""

    def __init__(self, service):
        self.service = service

    @classmethod
    def from_text(cls, text, tz="UTC", communities=None):
        return cls(Service.from_text(text, tz, communities))

    @classmethod
    def from_file(cls, path, tz="UTC", communities=None):
        return cls(Service.from_file(str(path), tz, None if communities is None else str(communities)))

    def _decode(self, status, body):
        payload = json.loads(body)
        if status != 200:
            raise ApiError(status, payload["error"]["message"])
        return payload

    def get(self, path, **params):
        params = {k: str(v) for k, v in params.items()}
        return self._decode(*self.service.query("GET", path, params, ""))

    def evaluate(self, **request):
        return self._decode(*self.service.query("POST", "/evaluate", {}, json.dumps(request)))
