"""Exception taxonomy shared across the package.

The command-line driver maps these onto exit codes: verification failures
(IdentityError) exit 2, precision shortfalls (PrecisionError) exit 3, and
invalid input of any kind (InputError and its causes) exit 4.
"""


class AlgebraError(ValueError):
    """Invalid algebraic input (non-prime p, reducible modulus, ...)."""


class InexactRootError(ArithmeticError):
    """A requested p-th or q-th root does not exist in the ring."""


class PoleError(ArithmeticError):
    """Evaluation requested at a pole."""


class PrecisionError(ArithmeticError):
    """A series carries too few known terms for the requested operation."""


class TagError(ValueError):
    """Incompatible fractional normalization tags in a series operation."""


class NotPrincipalError(ValueError):
    """Divisor is not principal, so no function realizes it."""


class ClassNumberError(ValueError):
    """The coefficient curve does not have a single rational point."""


class IdentityError(AssertionError):
    """An exact structural identity failed to hold."""


class InputError(ValueError):
    """Malformed user input: config files, CLI arguments, serialized data."""
