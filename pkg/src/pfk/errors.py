"""Exception hierarchy shared by the kernel, the front end and the translator."""

from __future__ import annotations


class PfkError(Exception):
    """Base class.  ``pos`` is an optional ``(line, column)`` source position."""

    def __init__(self, message: str = "", pos: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.pos = pos
        self.path: str | None = None

    @property
    def kind(self) -> str:
        return type(self).__name__

    def at(self, pos):
        if self.pos is None:
            self.pos = pos
        return self

    def in_file(self, path):
        if self.path is None:
            self.path = str(path)
        return self

    def __str__(self):
        where = [self.path] if self.path else []
        if self.pos is not None:
            where += [str(self.pos[0]), str(self.pos[1])]
        return f"{':'.join(where)}: {self.message}" if where else self.message


# -- kernel --------------------------------------------------------------------


class KernelError(PfkError):
    pass


class BudgetExhausted(KernelError):
    pass


class UnboundVariable(KernelError):
    pass


class UnknownConstant(KernelError):
    pass


class NotAFunction(KernelError):
    pass


class SortError(KernelError):
    pass


class TypeMismatch(KernelError):
    def __init__(self, message, got=None, expected=None, pos=None):
        super().__init__(message, pos)
        self.got = got
        self.expected = expected


class IllFormedContext(KernelError):
    def __init__(self, message, entry=None, cause=None, pos=None):
        super().__init__(message, pos)
        self.entry = entry
        self.cause = cause


class DuplicateConstant(KernelError):
    pass


class MalformedRule(KernelError):
    pass


class NonLinearPattern(MalformedRule):
    pass


class HeadNotConstant(MalformedRule):
    pass


class TypePreservationFailure(KernelError):
    pass


class PreludeViolation(KernelError):
    pass


class AssertionFailure(KernelError):
    pass


# -- front end -----------------------------------------------------------------


class ParseError(PfkError):
    def __init__(self, message, pos=None, expected=()):
        super().__init__(message, pos)
        self.expected = tuple(sorted(set(expected)))

    def __str__(self):
        base = super().__str__()
        if self.expected:
            base += f" (expected one of: {', '.join(self.expected)})"
        return base


class RequireError(PfkError):
    pass


class DuplicateParameter(PfkError):
    pass


# -- translator ----------------------------------------------------------------


class InterpError(PfkError):
    pass


class MissingParameter(InterpError):
    def __init__(self, constant: str, message: str | None = None, pos=None):
        super().__init__(message or f"no parameter for constant {constant}", pos)
        self.constant = constant


class KindPlusUnsupported(InterpError):
    pass


class TransferFailure(InterpError):
    def __init__(self, message, cause: PfkError | None = None, pos=None):
        super().__init__(message, pos)
        self.cause = cause
