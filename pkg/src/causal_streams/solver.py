"""Exact prefix computation of fixpoints, with anytime certificates.

Strong causality makes fixpoint prefixes exact rather than approximate: a
prefix of length m determines the fixpoint prefix of length m + delta, so
walking the word function out from the empty prefix yields the first N
coefficients of the unique fixpoint in ceil(N / delta) applications.  The
Picard bound 2^(-k*delta) is still computed and reported, which is what makes
a run interruptible with an honest certificate.

Stream inclusions are solved by a letterwise depth-first search over branch
choices; weakly causal (delta = 0) transformers are never solved, only
diagnosed, following the fixpoint-or-invariant-distance dichotomy.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .errors import (
    EmptyImageError,
    LengthMismatchError,
    NonEnumerableDomainError,
    NotStronglyCausalError,
)
from .metric import Ball, Dyadic, point_set_distance, word_distance
from .streams import Prefix, PrefixSet, Stream, empty_prefix, full_prefix_set
from .settrans import sp, wp
from .transformers import (
    DetTransformer,
    NDetTransformer,
    as_ndet,
    lift,
    random_word,
    zip_prefix,
)

DEFAULT_BUDGET = 10**6


def node_budget(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("CAUSAL_STREAMS_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class Strategy:
    """How to explore branch choices: first, random(seed) or exhaustive(budget)."""

    kind: str = "first"
    seed: int = 0
    budget: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("first", "random", "exhaustive"):
            raise ValueError(f"unknown strategy: {self.kind!r}")

    @classmethod
    def first(cls) -> "Strategy":
        return cls("first")

    @classmethod
    def random(cls, seed: int = 0) -> "Strategy":
        return cls("random", seed=seed)

    @classmethod
    def exhaustive(cls, budget: Optional[int] = None) -> "Strategy":
        return cls("exhaustive", budget=budget)


@dataclass(frozen=True)
class SolveResult:
    """Solution prefixes with a residual certificate.

    ``certificate`` bounds the distance between any returned prefix extended
    to a stream and its image under the transformer; the prefixes themselves
    are exact through ``depth``.
    """

    prefixes: Tuple[Prefix, ...]
    depth: int
    certificate: Dyadic
    iterations: int
    strategy: Optional[Strategy] = None
    status: str = "ok"  # ok | no-solution | budget-exhausted
    explored: int = 0

    @property
    def prefix(self) -> Prefix:
        if len(self.prefixes) != 1:
            raise ValueError(f"expected one prefix, have {len(self.prefixes)}")
        return self.prefixes[0]

    def found(self) -> bool:
        return bool(self.prefixes)

    def to_json_dict(self) -> dict:
        out = {
            "depth": self.depth,
            "certificate": str(self.certificate),
            "iterations": self.iterations,
            "status": self.status,
            "prefixes": sorted(p.to_strings() for p in self.prefixes),
        }
        if self.strategy is not None:
            out["strategy"] = self.strategy.kind
            out["seed"] = self.strategy.seed
            if self.strategy.kind == "exhaustive":
                out["explored"] = self.explored
        return out


def solve_det(T: DetTransformer, depth: int) -> SolveResult:
    """The exact first ``depth`` coefficients of the unique fixpoint.

    Starting from the empty prefix, each word-function application extends
    the known fixpoint prefix by the delay, so the result is reached in
    ceil(depth / delay) applications and is iteration-exact.
    """
    if T.delay < 1:
        raise NotStronglyCausalError("solve_det needs a strongly causal transformer")
    if T.in_domain != T.out_domain:
        raise LengthMismatchError("fixpoints need matching input and output domains")
    p = empty_prefix(T.in_domain)
    iterations = 0
    while len(p) < depth:
        p = T.word(p)
        iterations += 1
    return SolveResult(
        prefixes=(p.truncate(depth),),
        depth=depth,
        certificate=Dyadic.at_most(depth),
        iterations=iterations,
    )


def picard_trace(T: DetTransformer, f0: Union[Stream, Sequence[Stream]],
                 k_max: int, depth: int) -> List[Tuple[Prefix, Dyadic]]:
    """Picard iterates with certified distances to the fixpoint.

    Returns (prefix of f_k, d(f_k, fixpoint)) for k = 0 .. k_max; each
    certified distance is bounded by 2^(-k * delay).
    """
    if T.delay < 1:
        raise NotStronglyCausalError("Picard iteration needs a strongly causal transformer")
    streams = [f0] if isinstance(f0, Stream) else list(f0)
    fixpoint = solve_det(T, depth).prefix
    trace: List[Tuple[Prefix, Dyadic]] = []
    current = streams
    for _ in range(k_max + 1):
        p = zip_prefix(T.in_domain, current, depth)
        trace.append((p, word_distance(p, fixpoint)))
        current = lift(T, current)
    return trace


def check_membership(T, p: Prefix) -> bool:
    """Bounded-depth membership: every window of p sits in its branch set.

    True iff p[:m + delay] is an admissible output for input p[:m], for
    every m with m + delay <= len(p).
    """
    Tn = as_ndet(T)
    for m in range(0, len(p) - Tn.delay + 1):
        if not Tn.contains(p.truncate(m), p.truncate(m + Tn.delay)):
            return False
    return True


def _letter_candidates(Tn: NDetTransformer, p: Prefix) -> List:
    """Admissible next letters: last letters of branch members extending p.

    Position len(p) is bound by the branch set of the input truncated
    delay-many steps back; longer windows only repeat earlier constraints.
    Transformers whose branch sets are expensive to materialize supply a
    ``letters_fn`` computing the same candidates directly.
    """
    if Tn.letters_fn is not None:
        letters = Tn.letters_fn(p)
        if letters is None:
            raise EmptyImageError("empty branch image", prefix=p)
        return list(letters)
    length = len(p)
    m = max(0, length + 1 - Tn.delay)
    branch = Tn.branches(p.truncate(m))
    if branch.is_empty():
        raise EmptyImageError("empty branch image", prefix=p.truncate(m))
    letters = []
    seen = set()
    for w in branch.sorted_members():
        head = w.truncate(length + 1)
        if head.extends(p) and head[length] not in seen:
            seen.add(head[length])
            letters.append(head[length])
    return letters


def solve_inclusion(T, depth: int, strategy: Strategy = Strategy.first()) -> SolveResult:
    """Depth-N solution prefixes of the stream inclusion f in T(f).

    Explores the branch tree letter by letter; a returned prefix p satisfies
    p[:m + delay] in T(p[:m]) for every window inside the depth, which is
    the bounded-depth meaning of membership.  Exhaustive mode returns the
    complete set of depth-N candidates within the node budget.
    """
    Tn = as_ndet(T)
    if Tn.delay < 1:
        raise NotStronglyCausalError(
            "inclusion solving needs a strongly causal transformer; "
            "weakly causal maps are only diagnosed")
    if Tn.in_domain != Tn.out_domain:
        raise LengthMismatchError("inclusions need matching input and output domains")
    exhaustive = strategy.kind == "exhaustive"
    budget = node_budget(strategy.budget)
    rng = random.Random(strategy.seed) if strategy.kind == "random" else None
    solutions: List[Prefix] = []
    explored = 0
    exhausted = False

    stack: List[Prefix] = [empty_prefix(Tn.in_domain)]
    while stack:
        p = stack.pop()
        explored += 1
        if explored > budget:
            exhausted = True
            break
        if len(p) == depth:
            solutions.append(p)
            if not exhaustive:
                break
            continue
        try:
            letters = _letter_candidates(Tn, p)
        except EmptyImageError:
            if exhaustive:
                continue  # abort-like branch; the rest of the tree may still solve
            raise
        if rng is not None:
            rng.shuffle(letters)
        for letter in reversed(letters):
            stack.append(p.append(letter))

    iterations = math.ceil(depth / Tn.delay) if depth else 0
    status = "ok"
    if exhausted:
        status = "budget-exhausted"
    elif not solutions:
        status = "no-solution"
    return SolveResult(
        prefixes=tuple(sorted(solutions, key=Prefix.sort_key)),
        depth=depth,
        certificate=Dyadic.at_most(depth),
        iterations=iterations,
        strategy=strategy,
        status=status,
        explored=explored,
    )


def fix_sp(T, depth: int) -> PrefixSet:
    """Depth-N truncation of the unique fixpoint of the strongest post.

    Iterates F_{k+1} = sp(T, F_k) from the length-0 set until the Banach
    bound 2^(-k * delay) falls below 2^(-depth); by strong causality the
    result does not depend on the starting set.
    """
    return fix_sp_from(T, depth, None)


def fix_sp_from(T, depth: int, start: Optional[PrefixSet]) -> PrefixSet:
    """fix_sp begun from an arbitrary starting set (same result, by Banach)."""
    Tn = as_ndet(T)
    if Tn.delay < 1:
        raise NotStronglyCausalError("sp fixpoints need a strongly causal transformer")
    if Tn.in_domain != Tn.out_domain:
        raise LengthMismatchError("sp fixpoints need matching input and output domains")
    F = start if start is not None else PrefixSet.of(
        Tn.in_domain, 0, [empty_prefix(Tn.in_domain)])
    # Enough applications for the bound 2^(-k*delay) to drop below 2^(-depth).
    steps = max(0, math.ceil((depth - F.length) / Tn.delay))
    extra = math.ceil(F.length / Tn.delay) if F.length else 0
    for _ in range(steps + extra):
        F = sp(Tn, F)
    return F.truncate(depth)


def fix_wp(T, depth: int, universe: Optional[PrefixSet] = None) -> PrefixSet:
    """Depth-N truncation of the unique fixpoint of the weakest pre.

    Each wp application shortens prefixes by the delay, so the iteration
    starts from candidates of length depth + k * delay and runs k =
    ceil(depth / delay) steps; any starting set gives the same result.
    Non-enumerable domains need a universe at least that long.
    """
    Tn = as_ndet(T)
    if Tn.delay < 1:
        raise NotStronglyCausalError("wp fixpoints need a strongly causal transformer")
    if Tn.in_domain != Tn.out_domain:
        raise LengthMismatchError("wp fixpoints need matching input and output domains")
    steps = math.ceil(depth / Tn.delay) if depth else 0
    start_len = depth + steps * Tn.delay
    if universe is not None:
        if universe.length < start_len:
            raise LengthMismatchError(
                f"universe length {universe.length} below required {start_len}")
        G = universe.truncate(start_len)
    else:
        if Tn.in_domain.enumerate_values() is None:
            raise NonEnumerableDomainError(
                "wp fixpoint over a non-enumerable domain needs a universe")
        G = full_prefix_set(Tn.in_domain, start_len)
    for _ in range(steps):
        G = wp(Tn, G, universe=universe)
    return G


@dataclass(frozen=True)
class InductionVerdict:
    holds: bool
    witness: Optional[Prefix] = None
    escaping: Optional[Prefix] = None
    checked: int = 0
    confirmed: int = 0

    def __bool__(self):
        return self.holds


def induction_check(T, predicate: Callable[[Prefix], bool], depth: int,
                    samples: int = 300, seed: int = 0,
                    enumeration_cap: int = 4096) -> InductionVerdict:
    """Verify the induction step and confirm it on solver output.

    For every checked prefix p satisfying the (caller-asserted prefix-closed)
    predicate, every branch of T at p must satisfy it too.  On success the
    fixpoint prefixes from the solver are confirmed against the predicate.
    """
    Tn = as_ndet(T)
    if Tn.delay < 1:
        raise NotStronglyCausalError("fixpoint induction needs a strongly causal transformer")
    from .transformers import _candidate_inputs

    checked = 0
    for p in _candidate_inputs(Tn.in_domain, max(0, depth - Tn.delay),
                               samples, seed, enumeration_cap):
        if not predicate(p):
            continue
        # Spot-check prefix closedness while we are here.
        if len(p) > 0 and not predicate(p.truncate(len(p) - 1)):
            raise ValueError(f"predicate is not prefix-closed at {p!r}")
        checked += 1
        for w in Tn.branches(p).sorted_members():
            if not predicate(w):
                return InductionVerdict(False, witness=p, escaping=w, checked=checked)
    if Tn.deterministic or Tn.branching == 1:
        confirm = [solve_det_via_ndet(Tn, depth)]
    else:
        confirm = list(fix_sp(Tn, depth))
    confirmed = 0
    for p in confirm:
        if not predicate(p):
            return InductionVerdict(False, witness=p, checked=checked, confirmed=confirmed)
        confirmed += 1
    return InductionVerdict(True, checked=checked, confirmed=confirmed)


def solve_det_via_ndet(Tn: NDetTransformer, depth: int) -> Prefix:
    """Walk the unique fixpoint of a singleton-branching transformer."""
    p = empty_prefix(Tn.in_domain)
    while len(p) < depth:
        members = Tn.branches(p).sorted_members()
        if len(members) != 1:
            raise ValueError("transformer is not deterministic")
        p = members[0]
    return p.truncate(depth)


@dataclass(frozen=True)
class Diagnosis:
    """Outcome of the weakly-causal dichotomy check.

    Either a membership-consistent prefix survives to the requested depth,
    or the sampled input-to-image distance is the same exact value across a
    common ball (the invariant-distance alternative), or neither could be
    established; all three are semidecisions.
    """

    kind: str  # fixpoint-prefix-found | invariant-distance | inconclusive
    prefix: Optional[Prefix] = None
    r: Optional[Dyadic] = None
    ball: Optional[Ball] = None
    samples_run: int = 0

    def found_fixpoint(self) -> bool:
        return self.kind == "fixpoint-prefix-found"


def diagnose_nonexpansive(T, depth: int, samples: int = 64, seed: int = 0) -> Diagnosis:
    """Dichotomy diagnosis for weakly causal (delta = 0) transformers.

    Searches for a membership-consistent prefix to the given depth; if none
    survives, samples inputs and reports whether the distance to the nearest
    image branch is a constant exact value on a common ball.
    """
    Tn = as_ndet(T)
    if Tn.delay != 0:
        raise ValueError("diagnosis applies to weakly causal transformers only")
    if Tn.in_domain != Tn.out_domain:
        raise LengthMismatchError("diagnosis needs matching input and output domains")

    found = _consistent_prefix_search(Tn, depth, samples, seed)
    if found is not None:
        return Diagnosis("fixpoint-prefix-found", prefix=found)

    rng = random.Random(seed)
    distances: List[Dyadic] = []
    sampled: List[Prefix] = []
    for _ in range(samples):
        u = random_word(Tn.in_domain, depth, rng)
        image = Tn.branches(u)
        if image.is_empty():
            continue
        sampled.append(u)
        distances.append(point_set_distance(u, image))
    if not distances:
        return Diagnosis("inconclusive", samples_run=len(sampled))
    first = distances[0]
    if first.is_exact and all(d == first for d in distances):
        common = _common_prefix(sampled)
        return Diagnosis("invariant-distance", r=first, ball=Ball(common),
                         samples_run=len(sampled))
    return Diagnosis("inconclusive", samples_run=len(sampled))


def _consistent_prefix_search(Tn: NDetTransformer, depth: int,
                              samples: int, seed: int) -> Optional[Prefix]:
    """Depth-first search for p with p[:m] in T(p[:m]) at every length.

    Candidate letters are enumerated over finite domains and sampled over
    infinite ones (a semidecision either way for delta = 0).
    """
    values = Tn.in_domain.enumerate_values()
    rng = random.Random(seed)

    def candidates() -> List:
        if values is not None:
            return list(values)
        from .transformers import random_letter

        return [random_letter(Tn.in_domain, rng) for _ in range(max(4, samples // 8))]

    start = empty_prefix(Tn.in_domain)
    if not Tn.contains(start, start):
        return None
    stack = [start]
    visited = 0
    while stack:
        p = stack.pop()
        visited += 1
        if visited > node_budget():
            return None
        if len(p) == depth:
            return p
        for letter in reversed(candidates()):
            q = p.append(letter)
            if Tn.contains(q, q):
                stack.append(q)
    return None


def _common_prefix(prefixes: Sequence[Prefix]) -> Prefix:
    first = prefixes[0]
    n = len(first)
    for p in prefixes[1:]:
        j = 0
        while j < n and first.domain.eq(first[j], p[j]):
            j += 1
        n = j
    return first.truncate(n)
