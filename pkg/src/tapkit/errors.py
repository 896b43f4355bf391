"""Exception types shared across the toolkit."""


class TapError(Exception):
    """Base class for all toolkit errors."""


class MalformedInput(TapError):
    """Input bytes do not follow the expected file schema."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class DistributionNotNormalized(MalformedInput):
    def __init__(self, where, total, line=None):
        self.where = where
        self.total = total
        super().__init__(f"distribution at {where} sums to {total:.9g}", line=line)


class EdgeEndpointMissing(TapError):
    pass


class SelfLoop(TapError):
    pass


class SpanOutOfBounds(TapError):
    pass


class UnknownRole(TapError):
    pass


class InvalidGraph(TapError):
    def __init__(self, violations):
        self.violations = list(violations)
        ids = sorted({v.id.name for v in self.violations})
        super().__init__(f"graph violates {', '.join(ids)}")


class InconsistentFrame(TapError):
    pass


class InstanceTooLarge(TapError):
    pass


class BudgetExhaustedWithNoIncumbent(TapError):
    pass


class NoNumberFound(TapError):
    pass


class UnitMismatchWithinSeries(TapError):
    pass


class NoComparedRole(TapError):
    pass


class DegenerateData(UserWarning):
    """All labels identical: alpha is undefined and reported as 1.0."""
