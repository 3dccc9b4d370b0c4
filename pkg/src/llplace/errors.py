"""Exception hierarchy shared across the package."""

from __future__ import annotations


class LLplaceError(Exception):
    """Base class for all package-specific failures."""


# --- catalog / retrieval ---


class CatalogLoadError(LLplaceError):
    """Catalog source could not be parsed into asset records."""


class RetrievalError(LLplaceError):
    """Asset lookup failed for a query description."""


class NoMatchError(RetrievalError):
    """Every catalog record scored zero similarity against the query."""


# --- structured output parsing ---


class ParseError(LLplaceError):
    """Base for all model-output parsing failures."""


class MissingDelimiter(ParseError):
    """The requested output block does not occur in the text."""


class MultipleOutputBlocks(ParseError):
    """More than one closing delimiter of the requested kind was found."""


class UnterminatedBlock(ParseError):
    """An opening delimiter occurs without a matching closing delimiter."""


class MalformedJson(ParseError):
    """Block content is not valid JSON in the expected record shape."""


class UnknownObject(ParseError):
    """A parsed record names an object that was not expected."""


class CountMismatch(ParseError):
    """Parsed object names do not cover the expected set exactly."""


class MissingField(ParseError):
    """A required key is absent from a parsed record."""


class MissingAspect(ParseError):
    """A judge response lacks one of the three grading aspects."""


# --- session / backends ---


class BackendError(LLplaceError):
    """Transport-level completion failure (HTTP error, timeout, exhausted replay)."""


class SessionPhaseError(LLplaceError):
    """Operation is not valid in the session's current phase."""


class GenerationFailed(LLplaceError):
    """Generation turn could not be parsed even after the retry.

    Carries the last raw backend response for debugging.
    """

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class EditFailed(LLplaceError):
    """Edit turn could not be parsed even after the retry; layout unchanged."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class UnknownTarget(LLplaceError):
    """A removal description matched no object in the current layout."""


# --- heuristic placement ---


class PlacementInfeasible(LLplaceError):
    """The placer exhausted its attempt budget for one object."""

    def __init__(self, name: str):
        super().__init__(f"no feasible placement found for {name!r}")
        self.name = name
