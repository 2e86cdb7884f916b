"""Coefficient domains for stream values.

Three scalar domains are provided: the two-element field GF(2), exact
rationals backed by ``fractions.Fraction``, and finite enumerated alphabets
(equality and total order only, no arithmetic).  ``ProductDomain`` bundles
scalar domains into tuple-valued coefficients for vector streams; it carries
no arithmetic of its own.

All arithmetic is exact.  Floating point never appears, so distances and
causality checks downstream are decidable at any finite inspection depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple

from .errors import DomainMismatchError, NotInvertibleError, UnsupportedOperationError


class Domain:
    """A coefficient domain: value validation, formatting, optional field ops."""

    kind: str = "abstract"
    is_field: bool = False

    @property
    def width(self) -> int:
        return 1

    def validate(self, value) -> None:
        raise NotImplementedError

    def contains(self, value) -> bool:
        try:
            self.validate(value)
        except (TypeError, ValueError):
            return False
        return True

    # Field structure; overridden where it exists.
    @property
    def zero(self):
        raise UnsupportedOperationError(f"{self.kind} has no additive structure")

    @property
    def one(self):
        raise UnsupportedOperationError(f"{self.kind} has no multiplicative structure")

    def add(self, a, b):
        raise UnsupportedOperationError(f"{self.kind} does not support add")

    def mul(self, a, b):
        raise UnsupportedOperationError(f"{self.kind} does not support mul")

    def neg(self, a):
        raise UnsupportedOperationError(f"{self.kind} does not support neg")

    def inv(self, a):
        raise UnsupportedOperationError(f"{self.kind} does not support inv")

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def eq(self, a, b) -> bool:
        self.validate(a)
        self.validate(b)
        return a == b

    def is_zero(self, a) -> bool:
        return self.eq(a, self.zero)

    # Textual syntax used by the DSL, CLI and serializers.
    def format(self, value) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def sort_key(self, value):
        """Total order on values, used only to make reports deterministic."""
        return value

    def enumerate_values(self) -> Optional[Tuple]:
        """All values for finite domains, None otherwise."""
        return None


@dataclass(frozen=True)
class GF2Domain(Domain):
    """The Boolean field {0, 1} with xor/and arithmetic."""

    kind: str = "gf2"
    is_field: bool = True

    def validate(self, value):
        if value not in (0, 1):
            raise ValueError(f"not a gf2 value: {value!r}")

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    def add(self, a, b):
        return (a + b) & 1

    def mul(self, a, b):
        return a & b

    def neg(self, a):
        return a

    def inv(self, a):
        if a == 0:
            raise NotInvertibleError("inverse of zero in gf2")
        return 1

    def format(self, value):
        return str(value)

    def parse(self, text):
        if text == "0":
            return 0
        if text == "1":
            return 1
        raise ValueError(f"not a gf2 literal: {text!r}")

    def enumerate_values(self):
        return (0, 1)


@dataclass(frozen=True)
class RationalDomain(Domain):
    """Exact rationals; Fraction keeps values in lowest terms."""

    kind: str = "exact-rational"
    is_field: bool = True

    def validate(self, value):
        if not isinstance(value, Fraction):
            raise ValueError(f"not a Fraction: {value!r}")

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise NotInvertibleError("inverse of zero")
        return 1 / a

    def format(self, value):
        return str(value)

    def parse(self, text):
        return Fraction(text)

    def enumerate_values(self):
        return None


@dataclass(frozen=True)
class AlphabetDomain(Domain):
    """A finite set of symbols with equality and declaration order only."""

    symbols: Tuple[str, ...]
    kind: str = "finite-alphabet"
    is_field: bool = False

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ValueError("alphabet must have at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    def validate(self, value):
        if value not in self.symbols:
            raise ValueError(f"not an alphabet symbol: {value!r}")

    def format(self, value):
        return value

    def parse(self, text):
        self.validate(text)
        return text

    def sort_key(self, value):
        return self.symbols.index(value)

    def enumerate_values(self):
        return self.symbols


@dataclass(frozen=True)
class ProductDomain(Domain):
    """Tuple-valued coefficients over component domains.

    Used for vector streams: a width-n stream is one stream of n-tuples.
    Components keep their own arithmetic; the product itself exposes none.
    """

    components: Tuple[Domain, ...]
    kind: str = "product"
    is_field: bool = False

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("product domain needs at least one component")

    @property
    def width(self):
        return len(self.components)

    def validate(self, value):
        if not isinstance(value, tuple) or len(value) != len(self.components):
            raise ValueError(f"not a width-{len(self.components)} tuple: {value!r}")
        for comp, v in zip(self.components, value):
            comp.validate(v)

    def format(self, value):
        return "(" + "|".join(c.format(v) for c, v in zip(self.components, value)) + ")"

    def parse(self, text):
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"not a tuple literal: {text!r}")
        parts = text[1:-1].split("|")
        if len(parts) != len(self.components):
            raise ValueError(f"wrong tuple width in {text!r}")
        return tuple(c.parse(p) for c, p in zip(self.components, parts))

    def sort_key(self, value):
        return tuple(c.sort_key(v) for c, v in zip(self.components, value))

    def enumerate_values(self):
        per = [c.enumerate_values() for c in self.components]
        if any(v is None for v in per):
            return None
        out = [()]
        for values in per:
            out = [prev + (v,) for prev in out for v in values]
        return tuple(out)


GF2 = GF2Domain()
RAT = RationalDomain()


def product(*components: Domain) -> Domain:
    """Product of domains; a single component collapses to itself."""
    if len(components) == 1:
        return components[0]
    return ProductDomain(tuple(components))


def same_domain(a: Domain, b: Domain) -> None:
    if a != b:
        raise DomainMismatchError(f"domain mismatch: {a.kind} vs {b.kind}")


def field_arith(domain: Domain, op: str, a, b=None):
    """Exact field arithmetic dispatch: op in {add, mul, neg, inv}."""
    if not domain.is_field:
        raise UnsupportedOperationError(f"no field arithmetic on {domain.kind}")
    domain.validate(a)
    if op in ("add", "mul"):
        if b is None:
            raise ValueError(f"{op} needs two operands")
        domain.validate(b)
        return domain.add(a, b) if op == "add" else domain.mul(a, b)
    if op == "neg":
        return domain.neg(a)
    if op == "inv":
        return domain.inv(a)
    raise ValueError(f"unknown field op: {op!r}")


def coeff_eq(domain: Domain, a, b) -> bool:
    """Exact structural equality of two coefficients of the same domain."""
    return domain.eq(a, b)


def rational(p, q=None) -> Fraction:
    return Fraction(p) if q is None else Fraction(p, q)


def enumerate_words(domain: Domain, length: int) -> Iterable[tuple]:
    """All coefficient words of the given length, in deterministic order."""
    values = domain.enumerate_values()
    if values is None:
        from .errors import NonEnumerableDomainError

        raise NonEnumerableDomainError(f"cannot enumerate {domain.kind} words")
    if length == 0:
        yield ()
        return
    stack = [()]
    for _ in range(length):
        stack = [w + (v,) for w in stack for v in values]
    yield from stack
