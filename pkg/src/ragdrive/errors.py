"""Exception hierarchy shared by all engine modules.

Every error the engine raises on purpose derives from EngineError so the
CLI can map failures to a single machine-parsable line and exit code 1.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-raised errors."""


# --- taxonomy ---------------------------------------------------------------

class NoMatchError(EngineError):
    """No meta-action phrase could be found in the text."""


class AmbiguousMatchError(EngineError):
    """Two or more non-nested meta-action phrases matched the text."""


# --- scenes / manifest ------------------------------------------------------

class ParseError(EngineError):
    """Malformed manifest line or field."""


class DuplicateIdError(EngineError):
    """A scene_id (or record id) appeared more than once."""


class MissingImageError(EngineError):
    """A referenced image file does not exist."""


class InsufficientScenesError(EngineError):
    """Requested split sizes exceed the number of scenes."""


# --- labeling ---------------------------------------------------------------

class InsufficientPosesError(EngineError):
    """Fewer than two poses, or poses do not span the labeling window."""


# --- embedding store / retrieval --------------------------------------------

class DimensionMismatchError(EngineError):
    """Vector dimensions disagree with each other or with the store header."""


class CorruptStoreError(EngineError):
    """Store file failed checksum, magic, or structural validation."""


class VersionMismatchError(EngineError):
    """Store file was written by an unsupported format version."""


class RecordNotFoundError(EngineError):
    """No record exists for the requested scene_id."""


class ZeroVectorError(EngineError):
    """Cosine similarity is undefined for a zero-norm vector."""


class OmegaRangeError(EngineError):
    """Blend weight omega must lie in [0, 1]."""


class EmptyStoreError(EngineError):
    """Retrieval requires a non-empty store."""


# --- spatial loss -----------------------------------------------------------

class EmptyBatchError(EngineError):
    """Loss over an empty sample list is undefined."""


class InvalidProbabilityError(EngineError):
    """Probability vector has negative mass or does not sum to one."""


# --- model gateway ----------------------------------------------------------

class TransportError(EngineError):
    """Transient transport failure after exhausting retries."""


class BadResponseError(EngineError):
    """Service response violated the wire schema."""


class DimDriftError(EngineError):
    """Embedding service changed its advertised dimension mid-run."""


class ContextTooLargeError(EngineError):
    """Service reported the request exceeds its context limit."""


# --- decision ---------------------------------------------------------------

class MissingGtActionError(EngineError):
    """Retrieved scene carries no ground-truth action to inject."""


# --- evaluation -------------------------------------------------------------

class EmptyInputError(EngineError):
    """Metric over an empty pair list is undefined."""
