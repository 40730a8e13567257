"""Exception hierarchy shared across the engine."""


class VibrosceneError(Exception):
    """Base class for all engine errors."""


# --- scene manifest / geometry ---

class ParseError(VibrosceneError):
    """Manifest or script document is not valid JSON / not the documented shape."""


class ValidationError(VibrosceneError):
    """Document parsed but violates a scene invariant (duplicate ids, bad size, ...)."""


class DegenerateSize(VibrosceneError):
    """A size component is zero or negative."""


# --- inference agents ---

class MissingBinding(VibrosceneError):
    """A prompt template placeholder has no binding."""

    def __init__(self, name: str):
        super().__init__(f"missing binding for placeholder {name!r}")
        self.name = name


class BackendError(VibrosceneError):
    """Agent backend unreachable, misconfigured, or returned a transport error."""


class MalformedResponse(VibrosceneError):
    """Agent response could not be parsed into the expected structure."""

    def __init__(self, detail: str, field: str | None = None):
        super().__init__(detail)
        self.field = field


class EstimationUnavailable(VibrosceneError):
    """Material estimator answered with the all-zero sentinel."""


class InvariantViolation(VibrosceneError):
    """Agent output parsed but breaks a declared output invariant."""


class UnknownMaterial(VibrosceneError):
    """Material name not present in the reference property table."""


# --- contact graph ---

class UnknownNode(VibrosceneError):
    """Object id not present in the graph."""


class SelfLoop(VibrosceneError):
    """Attempt to connect a node to itself."""


class NoPath(VibrosceneError):
    """A path selection was requested on an empty path set."""


# --- propagation ---

class DomainError(VibrosceneError):
    """Physical parameter outside its valid domain."""


class MissingMaterial(VibrosceneError):
    """An object on a propagation path has no material properties."""


# --- dsp / audio ---

class UnstableState(VibrosceneError):
    """Filter state went non-finite; state has been reset."""


class LengthMismatch(VibrosceneError):
    """Blocks of different lengths were mixed."""


class MissingAudio(VibrosceneError):
    """A vibration source has no resolved audio asset."""


class DecodeError(VibrosceneError):
    """Audio file could not be decoded."""


class UnsupportedFormat(VibrosceneError):
    """Audio file decoded but uses an unsupported encoding."""


class ResolutionFailed(VibrosceneError):
    """All audio resolution stages (corpus, retrieval, generation) missed."""
