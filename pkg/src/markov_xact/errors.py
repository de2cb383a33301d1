"""Exception hierarchy shared by every module.

Each exception carries a short machine-readable ``code`` used by the CLI's
``ERROR <code>: <message>`` line.
"""

from __future__ import annotations


class MarkovError(Exception):
    code = "markov_error"


class ValidationError(MarkovError, ValueError):
    code = "validation_error"


class NotSquare(ValidationError):
    code = "not_square"


class NegativeEntry(ValidationError):
    code = "negative_entry"


class RowSumViolation(ValidationError):
    code = "row_sum_violation"


class NotAProbability(ValidationError):
    code = "not_a_probability"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class IndexOutOfRange(ValidationError, IndexError):
    code = "index_out_of_range"


class InvalidInput(ValidationError):
    code = "invalid_input"


class PathTooShort(ValidationError):
    code = "path_too_short"


class NotIrreducible(MarkovError):
    code = "not_irreducible"


class NotReversible(MarkovError):
    code = "not_reversible"


class ZeroStationaryMass(MarkovError):
    code = "zero_stationary_mass"


class GapUnreachable(MarkovError):
    code = "gap_unreachable"
