# -*- coding: utf-8 -*-


class MlnetregError(Exception):
    pass


class DataError(MlnetregError):
    """
    Input data is malformed or inconsistent.
    """


class NumericalError(MlnetregError):
    """
    A numerical routine failed or an identifiability assumption is violated.
    """


class ParseError(DataError):
    """
    A file could not be parsed.
    """

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(f"{location}{message}")


class DimensionMismatch(DataError):
    pass


class AsymmetricInput(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class EmptyCommunity(DataError):
    pass


class ZeroVariance(DataError):
    pass


class DegenerateRange(DataError):
    """
    All nonzero entries are equal, so there is no range to rescale.
    """


class InsufficientData(DataError):
    pass


class NoCovariatesSurvive(DataError):
    pass


class NonConvergence(NumericalError):
    pass


class RankDeficient(NumericalError):
    """
    A design matrix is not of full column rank.
    """


class SpectralGapTooSmall(NumericalError):
    pass


class NegativeEntries(NumericalError):
    """
    The leading eigenvector has materially negative entries (disconnected supra graph).
    """


class AllReplicationsFailed(NumericalError):
    pass
