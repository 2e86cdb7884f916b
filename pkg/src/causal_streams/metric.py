"""Prefix valuation, distance, product and Hausdorff distance, balls.

Every distance here is a certified dyadic: either exactly 2^(-k), because a
difference was observed at index k, or "at most 2^(-N)" because nothing
differed within the inspection depth N.  Since ord = infinity is undecidable
at finite depth, the at-most tag is an honest semidecision rather than an
unsound claim of equality; all downstream theorem checks are phrased to be
monotone in this refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence

from .coeff import Domain, same_domain
from .errors import ArityMismatchError, EmptySetError, LengthMismatchError
from .streams import Prefix, PrefixSet, Stream


@dataclass(frozen=True)
class Dyadic:
    """A certified distance value 2^(-exponent), exact or an upper bound."""

    tag: str  # "exact" or "at-most"
    exponent: int

    def __post_init__(self):
        if self.tag not in ("exact", "at-most"):
            raise ValueError(f"bad dyadic tag: {self.tag!r}")
        if self.exponent < 0:
            raise ValueError("dyadic exponent must be nonnegative")

    @classmethod
    def exact(cls, k: int) -> "Dyadic":
        return cls("exact", k)

    @classmethod
    def at_most(cls, n: int) -> "Dyadic":
        return cls("at-most", n)

    @property
    def is_exact(self) -> bool:
        return self.tag == "exact"

    @property
    def upper(self) -> Fraction:
        """Upper bound on the true distance (the value itself when exact)."""
        return Fraction(1, 2**self.exponent)

    def le(self, other: "Dyadic") -> bool:
        """Certified comparison of upper bounds: self <= other as distances."""
        return self.exponent >= other.exponent

    def le_bound(self, exponent: int) -> bool:
        """Certified bound: true distance <= 2^(-exponent)."""
        return self.exponent >= exponent

    def __str__(self):
        if self.is_exact:
            return f"2^-{self.exponent}"
        return f"<=2^-{self.exponent}"

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        if text.startswith("<=2^-"):
            return cls.at_most(int(text[5:]))
        if text.startswith("2^-"):
            return cls.exact(int(text[3:]))
        raise ValueError(f"not a dyadic literal: {text!r}")


def dyadic_sup(values: Sequence[Dyadic]) -> Dyadic:
    """Supremum of certified distances.

    Exact whenever some exact value dominates every upper bound; an upper
    bound otherwise.  With all inputs inspected at a common depth the result
    is exact unless every input is an at-most.
    """
    if not values:
        raise ValueError("sup of no distances")
    exacts = [d.exponent for d in values if d.is_exact]
    bounds = [d.exponent for d in values if not d.is_exact]
    if exacts:
        k = min(exacts)
        if not bounds or k <= min(bounds):
            return Dyadic.exact(k)
        return Dyadic.at_most(min(bounds))
    return Dyadic.at_most(min(bounds))


def dyadic_inf(values: Sequence[Dyadic]) -> Dyadic:
    """Infimum of certified distances; an at-most element always wins."""
    if not values:
        raise ValueError("inf of no distances")
    exacts = [d.exponent for d in values if d.is_exact]
    bounds = [d.exponent for d in values if not d.is_exact]
    if bounds:
        return Dyadic.at_most(max(bounds))
    return Dyadic.exact(max(exacts))


def valuation(f: Stream, depth: int) -> Dyadic:
    """2^(-k) for the least k < depth with a nonzero coefficient."""
    for k in range(depth):
        if not f.domain.is_zero(f.at(k)):
            return Dyadic.exact(k)
    return Dyadic.at_most(depth)


def distance(f: Stream, g: Stream, depth: int) -> Dyadic:
    """Prefix distance: first index where coefficients differ."""
    same_domain(f.domain, g.domain)
    for k in range(depth):
        if not f.domain.eq(f.at(k), g.at(k)):
            return Dyadic.exact(k)
    return Dyadic.at_most(depth)


def word_distance(p: Prefix, q: Prefix) -> Dyadic:
    """Distance of two equal-length words; inspection depth is the length."""
    same_domain(p.domain, q.domain)
    if len(p) != len(q):
        raise LengthMismatchError(f"word lengths differ: {len(p)} vs {len(q)}")
    for k in range(len(p)):
        if not p.domain.eq(p[k], q[k]):
            return Dyadic.exact(k)
    return Dyadic.at_most(len(p))


def product_distance(fs: Sequence[Stream], gs: Sequence[Stream], depth: int) -> Dyadic:
    """Sup of componentwise distances on a product of streams."""
    if len(fs) != len(gs) or len(fs) == 0:
        raise ArityMismatchError(f"product arity mismatch: {len(fs)} vs {len(gs)}")
    return dyadic_sup([distance(f, g, depth) for f, g in zip(fs, gs)])


def point_set_distance(p: Prefix, qs: PrefixSet) -> Dyadic:
    """d(p, Q) = inf over members; Q must be nonempty."""
    if qs.is_empty():
        raise EmptySetError("distance to an empty set is undefined")
    return dyadic_inf([word_distance(p, q) for q in qs.members])


def hausdorff(ps: PrefixSet, qs: PrefixSet) -> Dyadic:
    """Hausdorff distance of two nonempty, equal-length prefix sets."""
    if ps.is_empty() or qs.is_empty():
        raise EmptySetError("Hausdorff distance needs nonempty sets")
    same_domain(ps.domain, qs.domain)
    if ps.length != qs.length:
        raise LengthMismatchError(f"set lengths differ: {ps.length} vs {qs.length}")
    directed: List[Dyadic] = [point_set_distance(p, qs) for p in ps.members]
    directed += [point_set_distance(q, ps) for q in qs.members]
    return dyadic_sup(directed)


@dataclass(frozen=True)
class Ball:
    """The closed ball of radius 2^(-k): all streams extending a length-k prefix."""

    center: Prefix

    @property
    def radius_exponent(self) -> int:
        return len(self.center)

    @property
    def radius(self) -> Fraction:
        return Fraction(1, 2 ** len(self.center))

    def contains(self, f: Stream) -> bool:
        same_domain(self.center.domain, f.domain)
        return f.prefix(len(self.center)) == self.center

    def contains_prefix(self, p: Prefix) -> bool:
        return p.extends(self.center)

    def rebuilt_from(self, f: Stream) -> "Ball":
        """The same ball, recentered on any member (ultrametric center invariance)."""
        return Ball(f.prefix(len(self.center)))


def ball_membership(b: Ball, f: Stream) -> bool:
    return b.contains(f)
