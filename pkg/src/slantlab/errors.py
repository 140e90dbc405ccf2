"""Exception hierarchy shared by all slantlab modules."""


class SlantLabError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(SlantLabError, ValueError):
    pass


class DomainError(SlantLabError, ValueError):
    pass


class ExprSyntaxError(SlantLabError):
    """Malformed expression text; carries a 1-based line and column."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class EvaluationDomainError(DomainError):
    """Raised when an expression is evaluated outside its domain."""

    def __init__(self, message, subexpression):
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


class ImmersionDegeneracyError(SlantLabError):
    def __init__(self, x, ratio):
        super().__init__(
            f"jacobian is rank deficient at x={list(map(float, x))} "
            f"(singular value ratio {ratio:.3e})"
        )
        self.x = x
        self.ratio = ratio


class ContractViolation(SlantLabError):
    pass


class WarpedStructureError(SlantLabError):
    pass


class ConfigError(SlantLabError):
    pass
