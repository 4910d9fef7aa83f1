"""boilercut: frequent-line boilerplate detection and stripping for text corpora."""

from .counters import (
    Crc64CountStore,
    ExactCountStore,
    FrequencyStore,
    FrozenFrequentSet,
    HashCounterStore,
    MisraGriesStore,
    StoreStateError,
    crc64,
    make_store,
)
from .detector import BoundaryReport, DetectorConfig, detect, strip_boilerplate
from .estimator import BoilerplateStripper
from .preprocess import NormalizedLine, RawLine, extract_window, normalize_line, split_lines

__version__ = "0.1.0"

__all__ = [
    "BoilerplateStripper",
    "BoundaryReport",
    "Crc64CountStore",
    "DetectorConfig",
    "ExactCountStore",
    "FrequencyStore",
    "FrozenFrequentSet",
    "HashCounterStore",
    "MisraGriesStore",
    "NormalizedLine",
    "RawLine",
    "StoreStateError",
    "crc64",
    "detect",
    "extract_window",
    "make_store",
    "normalize_line",
    "split_lines",
    "strip_boilerplate",
    "__version__",
]
