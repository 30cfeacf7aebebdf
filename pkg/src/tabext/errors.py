"""Exception types shared across the toolkit.

Everything raised on bad input data or broken contracts derives from
:class:`TabextError`, so callers (notably the CLI) can distinguish data
errors from genuine bugs.
"""


class TabextError(Exception):
    """Base class for all data/contract violations raised by this package."""


class MalformedHeader(TabextError):
    """The TSV header row does not match the expected 12-column layout."""


class BadRow(TabextError):
    """A TSV data row is structurally invalid (column count, field values)."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingPageRow(TabextError):
    """A word row appeared before the page row that defines its page."""


class BadGeometry(TabextError):
    """A token box exceeds its page bounds beyond the clamping limit."""


class EmptyText(TabextError):
    """Pattern classification was asked to label an empty string."""


class SchemaMismatch(TabextError):
    """Feature schema versions of two artifacts do not agree."""


class EmptyTrainingSet(TabextError):
    """Normalization statistics were requested for zero examples."""


class TooFewDocuments(TabextError):
    """Not enough documents for a meaningful train/test/validation split."""


class UnknownToken(TabextError):
    """A label refers to a token that was never ingested."""


class LabelNotFound(TabextError):
    """No label record exists for the requested token."""


class DimensionMismatch(TabextError):
    """An input vector does not match the network's declared dimensions."""


class EmptyDataset(TabextError):
    """Training was started with no examples."""


class DivergedLoss(TabextError):
    """Training produced a non-finite loss."""


class LengthMismatch(TabextError):
    """Prediction and label lists have different lengths."""


class EmptyInput(TabextError):
    """Metrics were requested for zero predictions."""


class InfeasibleSpec(TabextError):
    """A synthetic layout spec cannot be placed on the requested page."""
