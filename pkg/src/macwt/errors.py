"""Exception types raised across the package."""


class MacWiretapError(ValueError):
    """Base class for every error raised by macwt."""


class ShapeMismatch(MacWiretapError):
    pass


class RowSumViolation(MacWiretapError):
    def __init__(self, pair, total):
        self.pair = pair
        self.total = total
        super().__init__(
            f"transition slice at (x1, x2) = {pair} sums to {total!r}, expected 1"
        )


class ProbabilityOutOfRange(MacWiretapError):
    pass


class AlphabetMismatch(MacWiretapError):
    pass


class AxisMismatch(MacWiretapError):
    pass


class LengthMismatch(MacWiretapError):
    pass


class SymbolOutOfRange(MacWiretapError):
    pass


class ZeroMarginal(MacWiretapError):
    pass


class ZeroConditional(MacWiretapError):
    pass


class EpsilonOutOfRange(MacWiretapError):
    pass


class IndexOutOfRange(MacWiretapError):
    pass


class NonpositiveMu(MacWiretapError):
    pass


class EmptySystem(MacWiretapError):
    pass


class BudgetExceeded(MacWiretapError):
    """An exact computation would exceed the enumeration budget."""

    def __init__(self, what, size, budget):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: {size} elementary terms exceeds budget {budget}")


class Overflow(BudgetExceeded):
    """A message count derived from a rate exceeds the enumeration budget."""


class ConfigParseError(MacWiretapError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
