"""Error types shared across the toolchain.

Every user-visible failure derives from CigenError so the CLI can map it to
exit code 1.  InternalCheckError marks failures of the tool's own validation
and equivalence gates and maps to exit code 2.
"""

from __future__ import annotations


class CigenError(Exception):
    """Base class for all tool errors caused by user input."""


class SpecSyntaxError(CigenError):
    """Malformed CI spec text.  Carries position and the expected token."""

    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{suffix}")


class UndeclaredIdentifier(CigenError):
    """An expression identifier that is not a declared input."""

    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(f"{line}:{col}: undeclared input '{name}'")


class DuplicateDeclaration(CigenError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(f"{line}:{col}: duplicate declaration of '{name}'")


class WidthOutOfRange(CigenError):
    def __init__(self, width: int, line: int = 0, col: int = 0):
        self.width = width
        super().__init__(f"{line}:{col}: width {width} out of range 1..32")


class OpcodeOutOfRange(CigenError):
    def __init__(self, opcode: int, line: int = 0, col: int = 0):
        self.opcode = opcode
        super().__init__(f"{line}:{col}: opcode {opcode} out of range 0..4")


class NoInputs(CigenError):
    """A design with zero used operands cannot be loaded."""


class WidthMismatch(CigenError):
    """Component inputs whose widths disagree with the component contract."""


class NotWidening(CigenError):
    """An extension whose target width does not exceed the source width."""


class DivideByZero(CigenError):
    """Division with a zero divisor.  In simulation carries the cycle index."""

    def __init__(self, message: str = "divide by zero", cycle: int | None = None,
                 node: int | None = None):
        self.cycle = cycle
        self.node = node
        if cycle is not None:
            message = f"{message} at cycle {cycle}"
        super().__init__(message)


class InputOutOfRange(CigenError):
    """An input binding that does not fit its declared width and signedness."""


class ProtocolViolation(CigenError):
    """Handshake misuse detected under the simulator's strict mode."""


class LexError(CigenError):
    """Unterminated string, character or comment while scanning C source."""


class NoMatchFound(CigenError):
    """No rewritable occurrence of the CI expression in the C source."""


class InternalCheckError(Exception):
    """Structural validation or equivalence failed on tool-generated output."""
