"""Exception hierarchy for the toolkit.

Every error a caller is expected to branch on has its own class. The CLI turns
any ``AGTDError`` into exit status 2.
"""

from typing import Optional


class AGTDError(Exception):
    """Base class for all toolkit errors."""
    pass


class CorpusFormatError(AGTDError, ValueError):
    """Raised when a JSON-lines corpus cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None, key: Optional[str] = None):
        self.line_number = line_number
        self.key = key
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class PairingError(AGTDError, ValueError):
    """Raised when human and AI documents cannot be paired unambiguously."""
    pass


class ContextError(AGTDError, ValueError):
    """Raised when a query word is missing from one side of a pair."""
    pass


class AllPairsSkippedError(AGTDError):
    """Raised when every pair of a model has an empty shared vocabulary."""

    def __init__(self, model: str, n_pairs: int):
        self.model = model
        self.n_pairs = n_pairs
        super().__init__(
            f"All {n_pairs} pairs for model '{model}' were skipped (no shared vocabulary)"
        )


class SpectrumError(AGTDError, ValueError):
    pass


class StreamError(AGTDError, ValueError):
    pass


class EmbeddingError(AGTDError, ValueError):
    pass


class PointCloudFormatError(AGTDError, ValueError):
    """Raised when a point-cloud file is malformed."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class GeometryError(AGTDError, ValueError):
    """Raised when a cloud is too small for the requested estimator."""
    pass


class CloudTooLargeError(AGTDError, ValueError):
    pass


class NonPhysicalSlopeError(AGTDError):
    """Raised when the MST growth fit has slope >= 1 (degenerate cloud)."""
    pass


class RewriterError(AGTDError):
    """Raised when the external rewriter fails, times out or prints nothing."""

    def __init__(self, message: str, returncode: Optional[int] = None, stderr: str = ""):
        self.returncode = returncode
        self.stderr = stderr
        if returncode is not None:
            message = f"{message} (exit status {returncode})"
        if stderr:
            message = f"{message}: {stderr.strip()}"
        super().__init__(message)


class FeatureError(AGTDError, ValueError):
    pass


class TrainingError(AGTDError, ValueError):
    pass


class FeatureMismatchError(AGTDError, ValueError):
    pass


class UnknownReportSchemaError(AGTDError, ValueError):
    pass


class ManifestError(AGTDError):
    pass
