"""Time grades: naturals, optionally extended with one rigid variable ``rho``.

A grade is the linear form ``const + coeff * rho``.  Concrete grades have
``coeff == 0``.  The rigid variable only shows up while checking handler
clauses, where it stands for the (universally quantified) duration of the
clause's continuation.
"""

from __future__ import annotations

from dataclasses import dataclass


class GradeError(ValueError):
    """Raised when grade arithmetic leaves the supported linear fragment."""


@dataclass(frozen=True, order=False)
class Grade:
    const: int = 0
    coeff: int = 0

    def __post_init__(self) -> None:
        if self.const < 0 or self.coeff < 0:
            raise GradeError(f"negative grade ({self.const}, {self.coeff})")

    @classmethod
    def of(cls, value: int | Grade) -> Grade:
        if isinstance(value, Grade):
            return value
        return cls(int(value), 0)

    @property
    def is_concrete(self) -> bool:
        return self.coeff == 0

    def __add__(self, other: int | Grade) -> Grade:
        other = Grade.of(other)
        return Grade(self.const + other.const, self.coeff + other.coeff)

    __radd__ = __add__

    def __le__(self, other: int | Grade) -> bool:
        # Sound for every instantiation of rho, complete only for concrete grades.
        other = Grade.of(other)
        return self.const <= other.const and self.coeff <= other.coeff

    def __lt__(self, other: int | Grade) -> bool:
        other = Grade.of(other)
        return self <= other and self != other

    def monus(self, other: int | Grade) -> Grade:
        """Truncated subtraction ``self ∸ other``.

        With symbolic grades the result must stay a linear form that is valid
        for every value of rho, so the subtrahend's coefficient may not exceed
        ours, and the constant may only truncate when both coefficients agree.
        """
        other = Grade.of(other)
        if other.coeff > self.coeff:
            raise GradeError(f"cannot compute {self} ∸ {other}")
        if self.coeff == other.coeff:
            return Grade(max(self.const - other.const, 0), 0)
        if other.const > self.const:
            raise GradeError(f"cannot compute {self} ∸ {other}")
        return Grade(self.const - other.const, self.coeff - other.coeff)

    def instantiate(self, rho: int | Grade) -> Grade:
        rho = Grade.of(rho)
        return Grade(self.const + self.coeff * rho.const, self.coeff * rho.coeff)

    def __int__(self) -> int:
        if not self.is_concrete:
            raise GradeError(f"grade {self} is not concrete")
        return self.const

    def __str__(self) -> str:
        if self.coeff == 0:
            return str(self.const)
        var = "rho" if self.coeff == 1 else f"{self.coeff}*rho"
        return var if self.const == 0 else f"{self.const}+{var}"


ZERO = Grade()
RHO = Grade(0, 1)
