"""Exception types shared across the engine.

Every failure mode raised by the library is a subclass of IdentifaceError,
so callers (CLI, service) can map errors to exit codes / HTTP statuses
without string matching.
"""


class IdentifaceError(Exception):
    """Base class for all engine errors."""

    code = "error"


class DimensionError(IdentifaceError):
    """Shapes or image dimensions inconsistent with the operation."""

    code = "dimension_error"


class NumericError(IdentifaceError):
    """Non-finite values or numerically invalid state."""

    code = "numeric_error"


class LabelError(IdentifaceError):
    """Class label outside the valid range."""

    code = "label_error"


class StateError(IdentifaceError):
    """Operation invoked in an invalid order (e.g. backward before forward)."""

    code = "state_error"


class ParseError(IdentifaceError):
    """Malformed manifest, config or landmark file."""

    code = "parse_error"


class FormatError(IdentifaceError):
    """Unsupported or corrupt file format (images, model files)."""

    code = "format_error"


class RangeError(IdentifaceError):
    """Argument outside its documented range."""

    code = "range_error"


class PlanError(IdentifaceError):
    """Augmentation plan impossible for the given counts."""

    code = "plan_error"


class DegeneracyError(IdentifaceError):
    """Degenerate geometry or single-class data."""

    code = "degeneracy_error"


class DataError(IdentifaceError):
    """Dataset content violates what the operation requires."""

    code = "data_error"


class SpecError(IdentifaceError):
    """Model specification is internally inconsistent."""

    code = "spec_error"


class InfeasibleSplitError(IdentifaceError):
    """Requested split policy cannot be satisfied by the data."""

    code = "infeasible_split"
