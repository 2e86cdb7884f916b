"""Lazy, memoized infinite streams as formal power series.

A ``Stream`` wraps a pure coefficient producer ``k -> value`` behind a dense
memo cache, so every coefficient is computed once and repeated or interleaved
reads always agree.  Ring operations (componentwise addition, convolution
product), the multiplicative inverse and functional composition are provided
for field domains; ``cons`` and the indeterminate work over any domain.

``Prefix`` is a finite word of coefficients, ``PrefixSet`` a deduplicated set
of equal-length prefixes.  Both are immutable and hashable and serialize to
JSON arrays of coefficient strings (and CSV rows for prefixes).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterable, Iterator, Optional, Sequence, Tuple

from .coeff import Domain, same_domain
from .errors import (
    CausalStreamsError,
    CompositionError,
    LengthMismatchError,
    NotInvertibleError,
)


@dataclass(frozen=True)
class Prefix:
    """The first ``len(word)`` coefficients of a stream, in order."""

    domain: Domain
    word: Tuple

    def __post_init__(self):
        for v in self.word:
            self.domain.validate(v)

    def __len__(self):
        return len(self.word)

    def __getitem__(self, k):
        return self.word[k]

    def __iter__(self):
        return iter(self.word)

    def truncate(self, n: int) -> "Prefix":
        if n > len(self.word):
            raise LengthMismatchError(f"cannot truncate length {len(self.word)} to {n}")
        return Prefix(self.domain, self.word[:n])

    def append(self, value) -> "Prefix":
        self.domain.validate(value)
        return Prefix(self.domain, self.word + (value,))

    def concat(self, other: "Prefix") -> "Prefix":
        same_domain(self.domain, other.domain)
        return Prefix(self.domain, self.word + other.word)

    def extends(self, other: "Prefix") -> bool:
        same_domain(self.domain, other.domain)
        return len(self.word) >= len(other.word) and self.word[: len(other.word)] == other.word

    def to_strings(self) -> list:
        return [self.domain.format(v) for v in self.word]

    def to_json(self) -> str:
        return json.dumps(self.to_strings())

    def to_csv_row(self) -> str:
        return ",".join(self.to_strings())

    @classmethod
    def from_strings(cls, domain: Domain, items: Sequence[str]) -> "Prefix":
        return cls(domain, tuple(domain.parse(s) for s in items))

    @classmethod
    def from_json(cls, domain: Domain, text: str) -> "Prefix":
        return cls.from_strings(domain, json.loads(text))

    @classmethod
    def from_csv_row(cls, domain: Domain, row: str) -> "Prefix":
        row = row.strip()
        if row == "":
            return cls(domain, ())
        return cls.from_strings(domain, [part.strip() for part in row.split(",")])

    def sort_key(self):
        return tuple(self.domain.sort_key(v) for v in self.word)

    def __repr__(self):
        return f"Prefix({self.to_csv_row()!r})"


def empty_prefix(domain: Domain) -> Prefix:
    return Prefix(domain, ())


@dataclass(frozen=True)
class PrefixSet:
    """A finite, deduplicated set of prefixes of one common length.

    May be empty: the empty set encodes the image of abort-like maps.
    """

    domain: Domain
    length: int
    members: FrozenSet[Prefix] = field(default_factory=frozenset)

    def __post_init__(self):
        for p in self.members:
            same_domain(p.domain, self.domain)
            if len(p) != self.length:
                raise LengthMismatchError(
                    f"member of length {len(p)} in prefix set of length {self.length}"
                )

    @classmethod
    def of(cls, domain: Domain, length: int, members: Iterable[Prefix]) -> "PrefixSet":
        return cls(domain, length, frozenset(members))

    @classmethod
    def singleton(cls, p: Prefix) -> "PrefixSet":
        return cls(p.domain, len(p), frozenset([p]))

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[Prefix]:
        return iter(self.sorted_members())

    def __contains__(self, p: Prefix) -> bool:
        return p in self.members

    def is_empty(self) -> bool:
        return not self.members

    def sorted_members(self) -> list:
        return sorted(self.members, key=Prefix.sort_key)

    def truncate(self, n: int) -> "PrefixSet":
        return PrefixSet.of(self.domain, n, (p.truncate(n) for p in self.members))

    def union(self, other: "PrefixSet") -> "PrefixSet":
        self._check_compatible(other)
        return PrefixSet(self.domain, self.length, self.members | other.members)

    def intersection(self, other: "PrefixSet") -> "PrefixSet":
        self._check_compatible(other)
        return PrefixSet(self.domain, self.length, self.members & other.members)

    def issubset(self, other: "PrefixSet") -> bool:
        self._check_compatible(other)
        return self.members <= other.members

    def _check_compatible(self, other: "PrefixSet") -> None:
        same_domain(self.domain, other.domain)
        if self.length != other.length:
            raise LengthMismatchError(
                f"prefix set lengths differ: {self.length} vs {other.length}"
            )

    def to_lists(self) -> list:
        return sorted(p.to_strings() for p in self.members)

    def to_json(self) -> str:
        return json.dumps(self.to_lists())

    @classmethod
    def from_json(cls, domain: Domain, text: str, length: Optional[int] = None) -> "PrefixSet":
        rows = json.loads(text)
        prefixes = [Prefix.from_strings(domain, row) for row in rows]
        if length is None:
            if not prefixes:
                raise LengthMismatchError("length required for an empty prefix set")
            length = len(prefixes[0])
        return cls.of(domain, length, prefixes)

    def __repr__(self):
        inner = ", ".join(p.to_csv_row() for p in self.sorted_members())
        return f"PrefixSet(len={self.length}, {{{inner}}})"


def full_prefix_set(domain: Domain, length: int) -> PrefixSet:
    """All words of the given length; finite domains only."""
    from .coeff import enumerate_words

    return PrefixSet.of(domain, length, (Prefix(domain, w) for w in enumerate_words(domain, length)))


class Stream:
    """An infinite coefficient sequence with a memoized pure generator.

    The generator is called with increasing indices and may consult earlier
    coefficients of the stream itself (feedback definitions do); consulting
    the index being computed, or a later one, raises immediately instead of
    diverging.
    """

    __slots__ = ("domain", "_fn", "_memo", "_lock", "_computing", "name")

    def __init__(self, domain: Domain, fn: Callable[[int], object], name: str = ""):
        self.domain = domain
        self._fn = fn
        self._memo: list = []
        self._lock = threading.RLock()
        self._computing = False
        self.name = name

    @classmethod
    def recursive(cls, domain: Domain, step: Callable[["Stream", int], object], name: str = "") -> "Stream":
        """A self-referential stream: ``step(self, k)`` may read ``self.at(j)`` for j < k."""
        s = cls(domain, lambda k: None, name=name)
        s._fn = lambda k: step(s, k)
        return s

    def at(self, k: int):
        """The coefficient of X^k; computed once, then served from the cache."""
        if k < 0:
            raise IndexError("negative coefficient index")
        memo = self._memo
        if k < len(memo):
            return memo[k]
        with self._lock:
            if self._computing and k >= len(self._memo):
                raise CausalStreamsError(
                    f"non-productive self-reference at coefficient {k}"
                    + (f" of {self.name}" if self.name else "")
                )
            while k >= len(self._memo):
                j = len(self._memo)
                self._computing = True
                try:
                    v = self._fn(j)
                finally:
                    self._computing = False
                self.domain.validate(v)
                self._memo.append(v)
            return self._memo[k]

    def __getitem__(self, k: int):
        return self.at(k)

    def prefix(self, n: int) -> Prefix:
        return Prefix(self.domain, tuple(self.at(k) for k in range(n)))

    # Ring operations (field domains).
    def __add__(self, other: "Stream") -> "Stream":
        return add(self, other)

    def __sub__(self, other: "Stream") -> "Stream":
        return add(self, neg(other))

    def __neg__(self) -> "Stream":
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, Stream):
            return mul(self, other)
        return scalar(other, self)

    def __rmul__(self, other):
        return scalar(other, self)

    def inverse(self) -> "Stream":
        return inverse(self)

    def __repr__(self):
        shown = ",".join(self.domain.format(v) for v in self._memo[:8])
        label = self.name or "stream"
        return f"<{label} [{shown},...]>"


def coefficient_at(f: Stream, k: int):
    return f.at(k)


def prefix_of(f: Stream, n: int) -> Prefix:
    return f.prefix(n)


def from_fn(domain: Domain, fn: Callable[[int], object], name: str = "") -> Stream:
    return Stream(domain, fn, name=name)


def constant(domain: Domain, a) -> Stream:
    """The embedding of a value: (a, 0, 0, ...)."""
    domain.validate(a)
    z = domain.zero
    return Stream(domain, lambda k: a if k == 0 else z, name=f"const({domain.format(a)})")


def zero(domain: Domain) -> Stream:
    z = domain.zero
    return Stream(domain, lambda k: z, name="zero")


def one(domain: Domain) -> Stream:
    return constant(domain, domain.one)


def indeterminate(domain: Domain) -> Stream:
    """The stream X = (0, 1, 0, 0, ...)."""
    z, o = domain.zero, domain.one
    return Stream(domain, lambda k: o if k == 1 else z, name="X")


def from_word(domain: Domain, word: Sequence, tail=None, name: str = "") -> Stream:
    """A stream starting with ``word``; the tail repeats ``tail`` (default: zero)."""
    word = tuple(word)
    for v in word:
        domain.validate(v)
    fill = domain.zero if tail is None else tail
    domain.validate(fill)
    return Stream(domain, lambda k: word[k] if k < len(word) else fill, name=name)


def from_prefix(p: Prefix, tail=None) -> Stream:
    return from_word(p.domain, p.word, tail=tail)


def add(f: Stream, g: Stream) -> Stream:
    same_domain(f.domain, g.domain)
    dom = f.domain
    return Stream(dom, lambda k: dom.add(f.at(k), g.at(k)))


def neg(f: Stream) -> Stream:
    dom = f.domain
    return Stream(dom, lambda k: dom.neg(f.at(k)))


def mul(f: Stream, g: Stream) -> Stream:
    """Discrete convolution: [X^k](f.g) = sum of f_i . g_(k-i)."""
    same_domain(f.domain, g.domain)
    dom = f.domain

    def conv(k):
        acc = dom.zero
        for i in range(k + 1):
            acc = dom.add(acc, dom.mul(f.at(i), g.at(k - i)))
        return acc

    return Stream(dom, conv)


def scalar(a, f: Stream) -> Stream:
    """Dot product: multiply every coefficient by the scalar a."""
    dom = f.domain
    dom.validate(a)
    return Stream(dom, lambda k: dom.mul(a, f.at(k)))


def cons(a, f: Stream) -> Stream:
    """Head a, then f delayed by one tick; cons(0, f) is the unit delay X.f."""
    dom = f.domain
    dom.validate(a)
    return Stream(dom, lambda k: a if k == 0 else f.at(k - 1))


def head(f: Stream):
    return f.at(0)


def tail(f: Stream) -> Stream:
    return Stream(f.domain, lambda k: f.at(k + 1))


def delay(f: Stream) -> Stream:
    return cons(f.domain.zero, f)


def inverse(f: Stream) -> Stream:
    """Multiplicative inverse; exists iff the constant term is nonzero.

    Standard recurrence: g_0 = 1/a_0 and
    g_k = -(1/a_0) . sum_{i=1..k} a_i . g_{k-i}.
    """
    dom = f.domain
    a0 = f.at(0)
    if dom.is_zero(a0):
        raise NotInvertibleError("constant term is zero; no multiplicative inverse")
    inv0 = dom.inv(a0)

    def step(g: Stream, k: int):
        if k == 0:
            return inv0
        acc = dom.zero
        for i in range(1, k + 1):
            acc = dom.add(acc, dom.mul(f.at(i), g.at(k - i)))
        return dom.neg(dom.mul(inv0, acc))

    return Stream.recursive(dom, step, name="inverse")


def fcompose(outer: Stream, inner: Stream) -> Stream:
    """Substitute ``inner`` for the indeterminate in ``outer``.

    Requires [X^0]inner = 0, which makes each output coefficient a finite
    sum: c_k = sum_{n<=k} outer_n . [X^k](inner^n).  No constraint is placed
    on outer's constant term.
    """
    same_domain(outer.domain, inner.domain)
    dom = outer.domain
    if not dom.is_zero(inner.at(0)):
        raise CompositionError("inner series must have zero constant term")

    powers = [one(dom)]

    def coeff(k):
        while len(powers) <= k:
            powers.append(mul(powers[-1], inner))
        acc = dom.zero
        for n in range(k + 1):
            acc = dom.add(acc, dom.mul(outer.at(n), powers[n].at(k)))
        return acc

    return Stream(dom, coeff)


def first_nonzero_index(f: Stream, depth: int) -> Optional[int]:
    """Least k < depth with a nonzero coefficient, or None."""
    for k in range(depth):
        if not f.domain.is_zero(f.at(k)):
            return k
    return None
