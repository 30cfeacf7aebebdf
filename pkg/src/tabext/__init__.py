"""Invoice table-token extraction toolkit.

Ingests OCR TSV output, computes layout/text features per token, trains a
binary table-element classifier with a hand-rolled MLP, and serves
predictions for human review and label correction.
"""

__version__ = "0.1.0"
