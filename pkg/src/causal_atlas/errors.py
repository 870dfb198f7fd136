"""Exception hierarchy shared by the compiler, query layer and CLI."""

from __future__ import annotations


class AtlasError(Exception):
    """Base class for every data-level failure raised by this package."""


class CanonError(AtlasError, ValueError):
    """A label normalizes to the empty string."""


class LcmFormatError(AtlasError, ValueError):
    """An LCM file is not valid JSON or not a JSON object."""


class ClaimsFormatError(AtlasError, ValueError):
    """A claims CSV is missing mandatory columns."""


class NotFound(AtlasError, LookupError):
    """Unknown node label, node id or edge id."""


class DegenerateAtlas(AtlasError):
    """A statistic is undefined on this atlas (no edges, zero mass, zero median)."""


class HashCollision(AtlasError):
    """Two distinct canonical keys hash to the same 64-bit id."""


class IntegrityError(AtlasError):
    """Referential integrity violated, or conflicting edge definitions across atlases."""


class CorruptAtlas(AtlasError):
    """A persisted table does not match the digest recorded in its manifest."""


class VersionError(AtlasError):
    """The manifest declares a schema version this build cannot read."""
