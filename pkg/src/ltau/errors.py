"""Diagnostic and runtime error types shared across the toolchain."""

from __future__ import annotations

from typing import Any


class LtauError(Exception):
    """Base class.  Every diagnostic names the rule or stage that raised it."""

    rule: str = ""

    def __init__(self, message: str, *, rule: str | None = None, span=None,
                 expected: Any = None, actual: Any = None) -> None:
        super().__init__(message)
        self.message = message
        if rule is not None:
            self.rule = rule
        self.span = span
        self.expected = expected
        self.actual = actual

    @property
    def kind(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rule": self.rule,
            "message": self.message,
            "span": str(self.span) if self.span else None,
            "expected": None if self.expected is None else str(self.expected),
            "actual": None if self.actual is None else str(self.actual),
        }

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        rule = f"[{self.rule}] " if self.rule else ""
        return f"{where}{rule}{self.kind}: {self.message}"


# front end ---------------------------------------------------------------

class ParseError(LtauError):
    rule = "parse"


class SignatureError(LtauError):
    rule = "signature"


# typing ------------------------------------------------------------------

class CheckError(LtauError):
    """Any rejection by the type checker."""


class UnboundVariable(CheckError):
    rule = "Var"


class TypeMismatch(CheckError):
    pass


class UnknownConstant(CheckError):
    rule = "Const"


class UnknownOperation(CheckError):
    rule = "Op"


class ArityMismatch(CheckError):
    rule = "Const"


class TemporalViolation(CheckError):
    rule = "Unbox"


class GradeMismatch(CheckError):
    rule = "Handle"


class NotAFunction(CheckError):
    rule = "Apply"


class NotAPair(CheckError):
    rule = "Match"


class NotBoxed(CheckError):
    rule = "Unbox"


class MissingClause(CheckError):
    rule = "Handle"


class SymbolicUnderflow(CheckError):
    """A symbolic grade comparison has no answer valid for every rho."""


# structural rules -------------------------------------------------------

class SideConditionViolated(LtauError):
    rule = "renaming"


# semantics ---------------------------------------------------------------

class MonitorViolation(LtauError):
    rule = "monitor"

    def __init__(self, time: int, required: int, resource: int | None = None) -> None:
        super().__init__(f"unbox at time {time} but resource available only at {required}",
                         expected=required, actual=time)
        self.time = time
        self.required = required
        self.resource = resource


class Stuck(LtauError):
    rule = "eval"


class OutOfFuel(Stuck):
    pass


class AvailabilityMismatch(LtauError):
    rule = "strength"


class CarrierNotFinite(LtauError):
    rule = "tree_eq"


class CarrierViolation(LtauError):
    rule = "op"
