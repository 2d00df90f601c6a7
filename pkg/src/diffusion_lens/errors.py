"""Exception hierarchy shared across the pipeline.

Each error class carries the CLI exit code it maps to.
"""


class DiffusionLensError(Exception):
    exit_code = 1


class ConfigError(DiffusionLensError):
    """Bad or missing configuration: paths, labels, spec fields."""

    exit_code = 2


class InputFormatError(DiffusionLensError):
    """Malformed input file (events, embeddings, series)."""

    exit_code = 3


class CorpusRejectedError(InputFormatError):
    """More than half of the input rows failed to parse."""


class NumericalError(DiffusionLensError):
    """Non-finite values encountered during integration or fitting."""

    exit_code = 4


class DegenerateSeriesError(DiffusionLensError):
    """Series cannot support a fit (e.g. N <= I(0), or too few nonzero days)."""
