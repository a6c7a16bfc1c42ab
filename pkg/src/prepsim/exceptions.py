"""Exception hierarchy for prepsim."""


class PrepsimError(ValueError):
    """Base class for every error raised by prepsim."""


class DimensionError(PrepsimError):
    """Operands do not share a compatible tensor-product structure."""


class OperatorValidationError(PrepsimError):
    """A matrix violates the invariants of the kind it was tagged with."""


class ImpossibleEventError(PrepsimError):
    """Conditioning on an event whose probability is (numerically) zero."""


class ImplicationError(PrepsimError):
    """An event F is not contained in a localization event P (F != F P)."""


class ScenarioError(PrepsimError):
    """A scenario file could not be parsed or violates an invariant.

    ``field`` names the offending entry, ``line`` is set when the parser
    could locate the problem in the source text.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
