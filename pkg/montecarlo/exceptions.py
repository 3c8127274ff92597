"""
Error hierarchy for the Monte Carlo engine.

Each exception carries the process exit code the management commands map it
to, the same way REST framework exceptions carry an HTTP status code:
0 ok, 2 configuration, 3 numeric degeneracy, 4 I/O.
"""
from typing import Optional


class MonteCarloError(Exception):
    """Base class for engine failures."""

    exit_code = 1
    default_detail = 'Monte Carlo engine failure.'
    default_code = 'error'

    def __init__(self, detail: Optional[str] = None, code: Optional[str] = None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def __str__(self):
        return str(self.detail)


class ConfigurationError(MonteCarloError, ValueError):
    exit_code = 2
    default_detail = 'Invalid configuration.'
    default_code = 'invalid_config'

    def __init__(self, detail=None, code=None, errors: Optional[dict] = None):
        super().__init__(detail, code)
        self.errors = errors or {}


class DegeneratePopulationError(MonteCarloError):
    """All weights are -inf or some weight is NaN."""

    exit_code = 3
    default_detail = 'Degenerate particle population.'
    default_code = 'degenerate_population'

    def __init__(self, detail=None, code=None, time_index: Optional[int] = None):
        if time_index is not None:
            detail = f"{detail or self.default_detail} (t={time_index})"
        super().__init__(detail, code)
        self.time_index = time_index


class NumericalError(MonteCarloError):
    exit_code = 3
    default_detail = 'Internal numerical failure.'
    default_code = 'numerical_failure'


class ElementKernelError(MonteCarloError):
    """A per-element kernel failed inside a parallel map."""

    exit_code = 3
    default_detail = 'Per-element kernel failed.'
    default_code = 'kernel_failure'

    def __init__(self, index: int, detail=None, code=None):
        super().__init__(f"element {index}: {detail or self.default_detail}", code)
        self.index = index
        self.reason = detail or self.default_detail


class ArtifactIOError(MonteCarloError, OSError):
    exit_code = 4
    default_detail = 'Artifact I/O failure.'
    default_code = 'io_failure'
