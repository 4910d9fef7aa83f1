"""A scikit-learn style estimator wrapping the two-pass pipeline.

``fit`` learns the frequent-line set over a corpus of documents (pass 1) and
``transform``/``predict`` detect and strip boilerplate per document (pass 2),
so the stripper drops into sklearn pipelines next to the usual text
vectorizers.
"""

from __future__ import annotations

import os
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import counters
from .corpus import record_windows
from .detector import BoundaryReport, DetectorConfig, detect, strip_boilerplate
from .preprocess import RawLine, split_lines


def _check_documents(X) -> list:
    """Validate that X is an iterable of documents (not one lone string)."""
    if isinstance(X, (str, bytes)) or isinstance(X, os.PathLike):
        raise ValueError(
            "expected an iterable of documents; got a single document instead"
        )
    documents = list(X)
    for doc in documents:
        if not isinstance(doc, (str, bytes, os.PathLike)):
            raise TypeError(f"documents must be str, bytes or paths, got {type(doc).__name__}")
    return documents


class BoilerplateStripper(BaseEstimator, TransformerMixin):
    """Detect and strip frequent-line boilerplate from document edges.

    Parameters
    ----------
    backend : str, default "exact"
        Counting backend: "exact", "crc64", "kbit" or "misra-gries".
    threshold : int, default 10
        Occurrences at which a line counts as frequent.
    gap_max : int, default 10
        Consecutive infrequent lines that end a boilerplate region.
    p_max, e_max : int, default 300
        Non-trivial line window scanned at the top and bottom of each file.
    heuristics : bool, default True
        Also honour explicit start/end marker lines near the file edges.
    hash_bits, counter_width, morris : k-bit backend knobs.
    mg_counters, mg_threshold : majority backend knobs.
    input : {"content", "filename"}, default "content"
        Whether documents are raw text or paths to read.
    random_state : int, default 0
        Seed for the probabilistic counter mode.
    """

    def __init__(
        self,
        backend: str = "exact",
        threshold: int = counters.DEFAULT_FREQUENT_THRESHOLD,
        gap_max: int = 10,
        p_max: int = 300,
        e_max: int = 300,
        heuristics: bool = True,
        hash_bits: int = counters.DEFAULT_HASH_BITS,
        counter_width: int = counters.DEFAULT_COUNTER_WIDTH,
        morris: bool = False,
        mg_counters: int = counters.DEFAULT_MAJORITY_COUNTERS,
        mg_threshold: int = counters.DEFAULT_MAJORITY_THRESHOLD,
        input: str = "content",
        random_state: int = 0,
    ):
        self.backend = backend
        self.threshold = threshold
        self.gap_max = gap_max
        self.p_max = p_max
        self.e_max = e_max
        self.heuristics = heuristics
        self.hash_bits = hash_bits
        self.counter_width = counter_width
        self.morris = morris
        self.mg_counters = mg_counters
        self.mg_threshold = mg_threshold
        self.input = input
        self.random_state = random_state

    def _document_lines(self, doc) -> list[RawLine]:
        if self.input == "filename":
            return split_lines(Path(doc).read_bytes())
        if self.input == "content":
            return split_lines(doc)
        raise ValueError(f"input must be 'content' or 'filename', got {self.input!r}")

    def _config(self) -> DetectorConfig:
        return DetectorConfig(
            gap_max=self.gap_max,
            p_max=self.p_max,
            e_max=self.e_max,
            heuristics_enabled=self.heuristics,
        )

    def fit(self, X, y=None):
        """Learn the frequent-line set from the document windows."""
        documents = _check_documents(X)
        config = self._config()  # validates the scan constants up front
        store = counters.make_store(
            self.backend,
            threshold=self.threshold,
            hash_bits=self.hash_bits,
            counter_width=self.counter_width,
            morris=self.morris,
            seed=self.random_state,
            mg_counters=self.mg_counters,
            mg_threshold=self.mg_threshold,
        )
        for doc in documents:
            record_windows(store, self._document_lines(doc), config.p_max, config.e_max)
        store.seal()
        self.store_ = store
        self.n_documents_ = len(documents)
        return self

    def _check_fitted(self):
        if not hasattr(self, "store_"):
            raise NotFittedError(
                "This BoilerplateStripper instance is not fitted yet; call fit first."
            )

    def predict(self, X) -> list[BoundaryReport]:
        """Detected boundaries for each document, in input order."""
        self._check_fitted()
        documents = _check_documents(X)
        config = self._config()
        return [
            detect(self._document_lines(doc), self.store_.is_frequent, config, str(i))
            for i, doc in enumerate(documents)
        ]

    def transform(self, X) -> list[str]:
        """Each document with its detected preamble and epilogue removed."""
        self._check_fitted()
        documents = _check_documents(X)
        config = self._config()
        stripped = []
        for i, doc in enumerate(documents):
            lines = self._document_lines(doc)
            report = detect(lines, self.store_.is_frequent, config, str(i))
            body = strip_boilerplate(lines, report)
            stripped.append("\n".join(line.text for line in body))
        return stripped
