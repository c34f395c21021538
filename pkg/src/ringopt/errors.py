"""Exception hierarchy.

Everything the tool raises on bad input derives from :class:`InputError`
(the CLI maps those to exit code 2).  Internal contract violations such as a
malformed plan derive from :class:`RingOptError` directly.
"""


class RingOptError(Exception):
    pass


class InputError(RingOptError):
    """Bad user input.  ``offset`` is a character offset into the text being
    parsed when one is known; ``line``/``column`` are filled in by
    :func:`ringopt.annotations.scan_source` for whole files."""

    def __init__(self, message, offset=None, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.offset = offset
        self.line = line
        self.column = column

    def located(self, line, column):
        self.line = line
        self.column = column
        return self

    def __str__(self):
        if self.line is not None:
            return f"{self.line}:{self.column}: {self.message}"
        if self.offset is not None:
            return f"offset {self.offset}: {self.message}"
        return self.message


# expression / normalization
class ExpressionSyntaxError(InputError):
    pass


class NonPolynomial(InputError):
    pass


class VariableInExponent(InputError):
    pass


class EmptyExpression(InputError):
    pass


class UnsupportedDegree(InputError):
    pass


# annotations
class MalformedRingProp(InputError):
    pass


class UnsupportedCarrier(InputError):
    pass


class OrphanPragma(InputError):
    pass


class DuplicatePragma(InputError):
    pass


class UnbalancedBraces(InputError):
    pass


class VariableSelectionError(InputError):
    pass


# plans and evaluation
class InvalidDag(RingOptError):
    pass


class UnboundName(RingOptError):
    pass


class DomainTooLarge(InputError):
    pass


# code generation
class SignatureMismatch(RingOptError):
    pass


class NoAnnotatedFunctions(InputError):
    pass


class EmptySchemeList(InputError):
    pass
