"""Exception types with machine-readable payloads.

Every error carries a short ``code`` plus a ``context`` dict so the CLI can
emit structured JSON on any failure path.
"""

from __future__ import annotations


class ShadowKinkError(Exception):
    """Base class for all operational errors."""

    code = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_json(self) -> dict:
        ctx = {k: _jsonable(v) for k, v in self.context.items()}
        return {"code": self.code, "message": self.message, "context": ctx}


def _jsonable(v):
    try:
        import numpy as np

        if isinstance(v, np.generic):
            return v.item()
        if isinstance(v, np.ndarray):
            return v.tolist()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return repr(v)


class ConfigError(ShadowKinkError):
    """Bad run configuration (unknown keys, malformed or missing fields)."""

    code = "config"


class PreconditionError(ShadowKinkError):
    """An operation was called outside its documented domain."""

    code = "precondition"


class NoRootError(ShadowKinkError):
    code = "no-root"


class AmbiguousRootError(ShadowKinkError):
    code = "ambiguous-root"


class ValidationError(ShadowKinkError):
    """A structural assumption on (mu, f) failed; context lists the clause."""

    code = "assumptions"


class DegenerateQuotientError(ShadowKinkError):
    code = "degenerate-quotient"


class InvalidSpecError(ShadowKinkError):
    code = "invalid-spec"


class NonconvergenceError(ShadowKinkError):
    """Newton failed for every seed; context holds per-seed diagnostics."""

    code = "nonconvergence"


class TopologyError(ShadowKinkError):
    """A solution has the wrong number of sign changes.

    The offending solution, when available, is attached to ``.solution``
    for inspection.
    """

    code = "topology"

    def __init__(self, message: str, solution=None, **context):
        super().__init__(message, **context)
        self.solution = solution


class BranchCaptureError(ShadowKinkError):
    """Newton converged into the wrong solution basin."""

    code = "branch-capture"


class PoleError(ShadowKinkError):
    """A transformed solution has a pole inside the real window."""

    code = "pole"


class ConventionError(ShadowKinkError):
    """Neither sign convention of a transformation produced a solution."""

    code = "convention"


class WindowError(ShadowKinkError):
    code = "window"


class MarginError(ShadowKinkError):
    """The algebraic root left its uniqueness neighborhood."""

    code = "margin"


class MissingZeroError(ShadowKinkError):
    code = "missing-zero"
