"""Strongest-post and weakest-pre set transformers at the prefix level.

sp is the direct image of a prefix set, wp the inverse inclusion: the set of
input prefixes whose whole branch set lands inside the postcondition.  The
two are adjoint, which is what the Hoare-style contract check rides on.  All
computations are over finite prefix sets; wp over non-enumerable coefficient
domains needs an explicit universe of candidate input prefixes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .coeff import enumerate_words
from .errors import LengthMismatchError, NonEnumerableDomainError
from .streams import Prefix, PrefixSet, full_prefix_set
from .transformers import NDetTransformer, apply_ndet, as_ndet


def sp(T, P: PrefixSet) -> PrefixSet:
    """Strongest post: the union of branch sets over members of P."""
    Tn = as_ndet(T)
    if P.domain != Tn.in_domain:
        raise LengthMismatchError("precondition domain does not match the transformer")
    out = set()
    for p in P.members:
        out |= Tn.branches(p).members
    return PrefixSet.of(Tn.out_domain, P.length + Tn.delay, out)


def wp(T, Q: PrefixSet, universe: Optional[PrefixSet] = None) -> PrefixSet:
    """Weakest pre: input prefixes of length len(Q) - delay mapped inside Q.

    Candidates are enumerated for finite input domains; otherwise a universe
    of candidate prefixes (of length at least len(Q) - delay) must be given.
    """
    Tn = as_ndet(T)
    if Q.domain != Tn.out_domain:
        raise LengthMismatchError("postcondition domain does not match the transformer")
    if Q.length < Tn.delay:
        raise LengthMismatchError(
            f"postcondition length {Q.length} below the delay {Tn.delay}")
    in_len = Q.length - Tn.delay
    candidates = _candidates(Tn, in_len, universe)
    good = [p for p in candidates if Tn.branches(p).issubset(Q)]
    return PrefixSet.of(Tn.in_domain, in_len, good)


def _candidates(Tn: NDetTransformer, length: int, universe: Optional[PrefixSet]):
    if universe is not None:
        if universe.domain != Tn.in_domain:
            raise LengthMismatchError("universe domain does not match the transformer")
        if universe.length < length:
            raise LengthMismatchError(
                f"universe length {universe.length} below required {length}")
        return sorted({p.truncate(length) for p in universe.members}, key=Prefix.sort_key)
    if Tn.in_domain.enumerate_values() is None:
        raise NonEnumerableDomainError(
            "weakest pre over a non-enumerable domain needs a universe")
    return [Prefix(Tn.in_domain, w) for w in enumerate_words(Tn.in_domain, length)]


@dataclass(frozen=True)
class Contract:
    """A Hoare-style stream contract {pre} T {post} at the prefix level."""

    pre: PrefixSet
    transformer: object
    post: PrefixSet

    def __post_init__(self):
        Tn = as_ndet(self.transformer)
        if self.post.length != self.pre.length + Tn.delay:
            raise LengthMismatchError(
                f"postcondition length {self.post.length} incompatible with "
                f"precondition length {self.pre.length} and delay {Tn.delay}")


@dataclass(frozen=True)
class HoareVerdict:
    holds: bool
    counterexample: Optional[Prefix] = None
    escaping: Optional[Prefix] = None

    def __bool__(self):
        return self.holds


def hoare_check(c: Contract) -> HoareVerdict:
    """{P} T {Q} holds iff sp(T, P) is inside Q; the witness escapes Q."""
    Tn = as_ndet(c.transformer)
    for p in sorted(c.pre.members, key=Prefix.sort_key):
        for out in apply_ndet(Tn, p).sorted_members():
            if out not in c.post:
                return HoareVerdict(False, counterexample=p, escaping=out)
    return HoareVerdict(True)


def full_universe(T, length: int) -> PrefixSet:
    """All input words of a length; finite input domains only."""
    return full_prefix_set(as_ndet(T).in_domain, length)
