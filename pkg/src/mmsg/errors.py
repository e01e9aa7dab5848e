"""Exception hierarchy. Each family carries the CLI exit code it maps to."""


class MMSGError(Exception):
    exit_code = 1


class InvalidConfig(MMSGError, ValueError):
    exit_code = 3


class DimensionMismatch(InvalidConfig):
    pass


class NonFinite(InvalidConfig):
    pass


class DataError(MMSGError):
    exit_code = 5


class ParseError(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class NumericalError(MMSGError, ArithmeticError):
    exit_code = 6


class RankDeficient(NumericalError):
    pass


class RankMismatch(RankDeficient):
    pass


class Singular(NumericalError):
    pass


class SingularVertexMatrix(Singular):
    pass


class NoConvergence(NumericalError):
    pass


class Asymmetric(NumericalError):
    pass


class DegenerateInput(NumericalError):
    pass


class CellFailure(MMSGError):
    exit_code = 7


IO_EXIT_CODE = 4
