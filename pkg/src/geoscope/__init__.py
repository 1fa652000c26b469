"""geoscope: spatial, temporal and thematic annotation and retrieval for
scholarly metadata corpora."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    AnnotatedDocument,
    DocumentRecord,
    FeatureClass,
    GazetteerResolution,
    InvariantViolation,
    Language,
    Source,
    SpatialAnnotation,
    SpatialIndicator,
    SpatialKind,
    TemporalAnnotation,
    ThematicAnnotation,
    TimexClass,
)
from .dates import PartialDate  # noqa: F401
from .modsxml import MalformedXml, DtdViolation, parse_mods_ti, serialize_mods_ti  # noqa: F401
