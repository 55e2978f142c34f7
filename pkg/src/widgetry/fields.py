"""Field descriptors: exact rationals and prime fields GF(p).

A scalar is a plain value — ``fractions.Fraction`` over the rationals, an
``int`` in ``[0, p)`` over GF(p). The descriptor carries the arithmetic;
containers (widgets, matrices) carry the descriptor. ``Fraction`` already
guarantees lowest terms and a positive denominator, so rational invariants
hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

from .errors import InputError

Scalar = Union[Fraction, int]


def is_prime(p: int) -> bool:
    """Trial division up to sqrt(p); moduli are small in practice."""
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    r = isqrt(p)
    while f <= r:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RationalField:
    """Arbitrary-precision rational arithmetic via ``fractions.Fraction``."""

    name = "rational"

    def zero(self) -> Fraction:
        return Fraction(0)

    def one(self) -> Fraction:
        return Fraction(1)

    def coerce(self, x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return Fraction(x)
        raise InputError(f"not a rational scalar: {x!r}")

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise InputError("division by zero")
        return 1 / Fraction(a)

    def is_zero(self, a) -> bool:
        return a == 0

    def parse_coord(self, value, where: str) -> Fraction:
        """Accept a JSON int or an "a/b" string with b > 0."""
        if isinstance(value, bool) or isinstance(value, float):
            raise InputError(f"{where}: rational coordinates must be integers "
                             f'or "a/b" strings, got {value!r}')
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            num, sep, den = value.partition("/")
            if not sep:
                try:
                    return Fraction(int(num))
                except ValueError:
                    raise InputError(f"{where}: malformed rational {value!r}") from None
            try:
                n, d = int(num), int(den)
            except ValueError:
                raise InputError(f"{where}: malformed rational {value!r}") from None
            if d <= 0:
                raise InputError(f"{where}: denominator must be positive in {value!r}")
            return Fraction(n, d)
        raise InputError(f"{where}: malformed rational {value!r}")

    def coord_to_json(self, a: Fraction):
        if a.denominator == 1:
            return int(a)
        return f"{a.numerator}/{a.denominator}"

    def format(self, a: Fraction) -> str:
        return str(a)

    def random_scalar(self, rng, bound: int) -> Fraction:
        return Fraction(rng.randint(-bound, bound))

    def nonzero_constants(self):
        """Deterministic sweep 1, -1, 2, -2, 3, ... (never exhausts)."""
        k = 1
        while True:
            yield Fraction(k)
            yield Fraction(-k)
            k += 1

    def __repr__(self) -> str:
        return "RationalField()"


@dataclass(frozen=True)
class PrimeField:
    """GF(p) with values stored as ints reduced into [0, p)."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise InputError(f"modulus {self.p} is not prime")

    @property
    def name(self) -> str:
        return f"gf({self.p})"

    def zero(self) -> int:
        return 0

    def one(self) -> int:
        return 1 % self.p

    def coerce(self, x) -> int:
        if isinstance(x, int) and not isinstance(x, bool):
            return x % self.p
        raise InputError(f"not a GF({self.p}) scalar: {x!r}")

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise InputError("division by zero")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def parse_coord(self, value, where: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise InputError(f"{where}: GF({self.p}) coordinates must be "
                             f"integers, got {value!r}")
        if not 0 <= value < self.p:
            raise InputError(f"{where}: value {value} not reduced into "
                             f"[0, {self.p})")
        return value

    def coord_to_json(self, a: int) -> int:
        return a

    def format(self, a: int) -> str:
        return str(a)

    def random_scalar(self, rng, bound: int) -> int:
        # bound is ignored: GF(p) scalars are uniform over the field
        return rng.randrange(self.p)

    def nonzero_constants(self):
        """Deterministic sweep 1, 2, ..., p-1 (finite)."""
        return iter(range(1, self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


FieldDesc = Union[RationalField, PrimeField]

RATIONAL = RationalField()


def field_to_json(field: FieldDesc):
    if isinstance(field, RationalField):
        return "rational"
    return {"prime": field.p}


def field_from_json(value) -> FieldDesc:
    if value == "rational":
        return RATIONAL
    if isinstance(value, dict) and set(value) == {"prime"}:
        p = value["prime"]
        if not isinstance(p, int) or isinstance(p, bool):
            raise InputError(f"field: prime must be an integer, got {p!r}")
        return PrimeField(p)
    raise InputError(f"field: expected \"rational\" or {{\"prime\": P}}, got {value!r}")


def parse_field_spec(text: str) -> FieldDesc:
    """CLI-style field spec: "rational" or "gf:P"."""
    if text == "rational":
        return RATIONAL
    if text.startswith("gf:"):
        try:
            p = int(text[3:])
        except ValueError:
            raise InputError(f"bad field spec {text!r}") from None
        return PrimeField(p)
    raise InputError(f"bad field spec {text!r} (want 'rational' or 'gf:P')")
