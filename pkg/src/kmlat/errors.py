"""Exception hierarchy.

Every domain error carries a stable ``code`` used by the CLI error JSON.
"""


class KmlatError(Exception):
    code = "error"


class InvalidGCM(KmlatError, ValueError):
    code = "invalid_gcm"


class NotRealRoot(KmlatError, ValueError):
    code = "not_real_root"


class SimpleRootCase(KmlatError, ValueError):
    code = "simple_root_case"


class NotReduced(KmlatError, ValueError):
    code = "not_reduced"


class WrongMatrixShape(KmlatError, ValueError):
    code = "wrong_matrix_shape"


class HeightTooSmall(KmlatError, ValueError):
    code = "height_too_small"


class TruncationLoss(KmlatError, ArithmeticError):
    code = "truncation_loss"


class NotPrime(KmlatError, ValueError):
    code = "not_prime"


class Reducible(KmlatError, ValueError):
    code = "reducible_modulus"


class AtomNotInParabolic(KmlatError, ValueError):
    code = "atom_not_in_parabolic"


class NormalizationBudgetExceeded(KmlatError, RuntimeError):
    code = "budget_exceeded"


class ExplorationTruncated(KmlatError, RuntimeError):
    code = "exploration_truncated"


class DeterminantNotOne(KmlatError, ValueError):
    code = "determinant_not_one"


class InvalidInjection(KmlatError, ValueError):
    code = "invalid_injection"


class InvalidGroupTable(KmlatError, ValueError):
    code = "invalid_group_table"


class BadDelta(KmlatError, ValueError):
    code = "bad_delta"


class ParseError(KmlatError, ValueError):
    code = "parse_error"


class FieldTooLarge(KmlatError, ValueError):
    code = "field_too_large"
