"""Exception hierarchy.

``DataError`` subclasses describe bad inputs (files, labels, shapes) and
``ModelError`` subclasses describe unusable model files; the CLI maps the two
families to distinct exit codes.
"""


class StressIdError(Exception):
    pass


class DataError(StressIdError):
    pass


class ModelError(StressIdError):
    pass


class MissingFile(DataError):
    pass


class MalformedHeader(DataError):
    pass


class EmptyFile(DataError):
    pass


class UnknownLabel(DataError):
    def __init__(self, raw, row=None):
        self.raw = raw
        self.row = row
        where = f" at row {row}" if row is not None else ""
        super().__init__(f"unknown label {raw!r}{where}")


class InvalidSpec(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class DomainError(DataError, ValueError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class EmptyNode(DataError, ValueError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class UnknownMetric(DataError, KeyError):
    pass


class IoError(ModelError):
    pass


class VersionMismatch(ModelError):
    pass


class CorruptModel(ModelError):
    pass


class ExperimentError(StressIdError):
    """Wraps a failure inside one (dataset, feature config) cell."""

    def __init__(self, cell, cause):
        self.cell = cell
        self.cause = cause
        super().__init__(f"[{cell}] {type(cause).__name__}: {cause}")
