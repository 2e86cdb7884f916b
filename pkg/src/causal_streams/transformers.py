"""Stream transformers as delay-certified word functions.

A transformer is represented extensionally at the word level: a pure function
from input prefixes of length k to output prefixes (deterministic) or finite
output prefix sets (nondeterministic) of length k + delta, where delta is the
declared delay.  delta >= 1 claims strong causality, delta = 0 weak causality.
This length-indexed form is the computable counterpart of the function-space
view of causal transformers, and it makes strongest-post/weakest-pre and
Hausdorff computations finite.

Composition operators, refinement checking, a sampled causality falsifier and
the small circuit/register/mix primitive library live here.  The falsifier is
exactly that: absence of a counterexample is not a proof, and the verdict
says so.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .coeff import Domain, GF2, ProductDomain, RAT, product
from .errors import (
    ArityMismatchError,
    DelayMismatchError,
    DomainMismatchError,
    LengthMismatchError,
    NotStronglyCausalError,
)
from .metric import Dyadic, hausdorff, word_distance
from .streams import Prefix, PrefixSet, Stream, empty_prefix, from_word, full_prefix_set


def components(domain: Domain) -> Tuple[Domain, ...]:
    if isinstance(domain, ProductDomain):
        return domain.components
    return (domain,)


def pad_value(domain: Domain):
    """A throwaway letter used to extend prefixes where one is needed."""
    if isinstance(domain, ProductDomain):
        return tuple(pad_value(c) for c in domain.components)
    if domain.is_field:
        return domain.zero
    return domain.enumerate_values()[0]


def zip_prefix(domain: Domain, streams: Sequence[Stream], n: int) -> Prefix:
    """Bundle component streams into one prefix over the (product) domain."""
    comps = components(domain)
    if len(streams) != len(comps):
        raise ArityMismatchError(f"expected {len(comps)} streams, got {len(streams)}")
    for s, d in zip(streams, comps):
        if s.domain != d:
            raise DomainMismatchError(f"stream domain {s.domain.kind} differs from {d.kind}")
    if len(comps) == 1:
        return streams[0].prefix(n)
    word = tuple(tuple(s.at(k) for s in streams) for k in range(n))
    return Prefix(domain, word)


def split_prefix(p: Prefix) -> List[Prefix]:
    """Unbundle a product prefix into its scalar component prefixes."""
    comps = components(p.domain)
    if len(comps) == 1:
        return [p]
    return [
        Prefix(comps[i], tuple(letter[i] for letter in p.word))
        for i in range(len(comps))
    ]


class DetTransformer:
    """A deterministic transformer as a length-indexed word function.

    ``word_fn`` must be pure and consistent: for any word p and k <= k',
    word_fn(p[:k]) is a prefix of word_fn(p[:k']).  Consistency encodes the
    causality of the represented stream map and is spot-checked by
    ``check_consistency``; it is not enforced per call.
    """

    def __init__(self, in_domain: Domain, out_domain: Domain, delay: int,
                 word_fn: Callable[[Prefix], Prefix], name: str = ""):
        if delay < 0:
            raise ValueError("delay must be nonnegative")
        self.in_domain = in_domain
        self.out_domain = out_domain
        self.delay = delay
        self._word_fn = word_fn
        self.name = name

    deterministic = True

    @property
    def arity_in(self) -> int:
        return self.in_domain.width

    @property
    def arity_out(self) -> int:
        return self.out_domain.width

    def word(self, p: Prefix) -> Prefix:
        if p.domain != self.in_domain:
            raise DomainMismatchError(
                f"input domain {p.domain.kind} differs from {self.in_domain.kind}")
        out = self._word_fn(p)
        if len(out) != len(p) + self.delay:
            raise LengthMismatchError(
                f"{self.name or 'transformer'}: output length {len(out)} "
                f"!= {len(p)} + delay {self.delay}")
        return out

    def __repr__(self):
        return f"<det {self.name or 'transformer'} delta={self.delay}>"


class NDetTransformer:
    """A finite-branching nondeterministic transformer at the word level.

    ``branch_fn`` maps an input prefix of length k to the set of admissible
    output prefixes of length k + delay.  The empty set is allowed only for
    abort-like maps.  ``branching`` bounds the per-step choice fan-out.
    """

    def __init__(self, in_domain: Domain, out_domain: Domain, delay: int,
                 branch_fn: Callable[[Prefix], PrefixSet], branching: int = 1,
                 name: str = "", member_fn: Optional[Callable[[Prefix, Prefix], bool]] = None,
                 letters_fn: Optional[Callable[[Prefix], list]] = None):
        if delay < 0:
            raise ValueError("delay must be nonnegative")
        self.in_domain = in_domain
        self.out_domain = out_domain
        self.delay = delay
        self._branch_fn = branch_fn
        self.branching = branching
        self.name = name
        self._member_fn = member_fn
        self.letters_fn = letters_fn

    deterministic = False

    def contains(self, p: Prefix, w: Prefix) -> bool:
        """Is w an admissible output for input p?

        Equivalent to ``w in branches(p)`` but may be answered without
        materializing the branch set (mix's sets grow exponentially).
        """
        if len(w) != len(p) + self.delay:
            return False
        if self._member_fn is not None:
            return self._member_fn(p, w)
        return w in self.branches(p)

    @property
    def arity_in(self) -> int:
        return self.in_domain.width

    @property
    def arity_out(self) -> int:
        return self.out_domain.width

    def branches(self, p: Prefix) -> PrefixSet:
        if p.domain != self.in_domain:
            raise DomainMismatchError(
                f"input domain {p.domain.kind} differs from {self.in_domain.kind}")
        out = self._branch_fn(p)
        if out.length != len(p) + self.delay:
            raise LengthMismatchError(
                f"{self.name or 'transformer'}: branch length {out.length} "
                f"!= {len(p)} + delay {self.delay}")
        if out.domain != self.out_domain:
            raise DomainMismatchError("branch set has the wrong domain")
        return out

    def __repr__(self):
        return f"<ndet {self.name or 'transformer'} delta={self.delay} b<={self.branching}>"


Transformer = (DetTransformer, NDetTransformer)


def apply_ndet(T, p: Prefix) -> PrefixSet:
    """The admissible output prefixes of length len(p) + delay."""
    if isinstance(T, DetTransformer):
        return PrefixSet.singleton(T.word(p))
    return T.branches(p)


def as_ndet(T) -> NDetTransformer:
    """Singleton embedding of a deterministic transformer (an isometry)."""
    if isinstance(T, NDetTransformer):
        return T
    return NDetTransformer(
        T.in_domain, T.out_domain, T.delay,
        lambda p: PrefixSet.singleton(T.word(p)),
        branching=1, name=T.name,
    )


def lift(T: DetTransformer, streams: Sequence[Stream]) -> List[Stream]:
    """Realize the word function as a lazy map on streams.

    Output coefficient j is read from the word function applied to the input
    prefix of length max(0, j + 1 - delay).
    """
    in_comps = components(T.in_domain)
    if len(streams) != len(in_comps):
        raise ArityMismatchError(
            f"{T.name or 'transformer'} expects {len(in_comps)} inputs, got {len(streams)}")
    out_comps = components(T.out_domain)

    def make(i: int) -> Stream:
        def coeff(j: int):
            n = max(0, j + 1 - T.delay)
            w = T.word(zip_prefix(T.in_domain, streams, n))
            letter = w[j]
            return letter if len(out_comps) == 1 else letter[i]

        return Stream(out_comps[i], coeff, name=f"{T.name}[{i}]" if T.name else "")

    return [make(i) for i in range(len(out_comps))]


def from_stream_fn(in_domain: Domain, out_domain: Domain, delay: int,
                   fn: Callable[[List[Stream]], List[Stream]], name: str = "") -> DetTransformer:
    """Build a word function from a stream-level map.

    The input word is padded with throwaway letters to form streams; for a
    genuinely delay-causal ``fn`` the first len(p) + delay output coefficients
    do not depend on the padding.
    """
    in_comps = components(in_domain)
    out_comps = components(out_domain)

    def word_fn(p: Prefix) -> Prefix:
        parts = split_prefix(p)
        ins = [from_word(d, part.word, tail=pad_value(d))
               for d, part in zip(in_comps, parts)]
        outs = fn(ins)
        if len(outs) != len(out_comps):
            raise ArityMismatchError(f"stream fn returned {len(outs)} outputs")
        n = len(p) + delay
        if len(out_comps) == 1:
            return outs[0].prefix(n)
        word = tuple(tuple(s.at(k) for s in outs) for k in range(n))
        return Prefix(out_domain, word)

    return DetTransformer(in_domain, out_domain, delay, word_fn, name=name)


def weaken_delay(T, new_delay: int):
    """Redeclare a transformer at a smaller delay (always sound)."""
    if new_delay > T.delay:
        raise DelayMismatchError(f"cannot raise delay {T.delay} to {new_delay}")
    if new_delay == T.delay:
        return T
    if isinstance(T, DetTransformer):
        return DetTransformer(
            T.in_domain, T.out_domain, new_delay,
            lambda p: T.word(p).truncate(len(p) + new_delay),
            name=f"{T.name}@{new_delay}" if T.name else "")
    return NDetTransformer(
        T.in_domain, T.out_domain, new_delay,
        lambda p: T.branches(p).truncate(len(p) + new_delay),
        branching=T.branching, name=f"{T.name}@{new_delay}" if T.name else "")


def magic(in_domain: Domain, out_domain: Domain, delay: int = 0) -> NDetTransformer:
    """The miracle: empty image everywhere, so every contract on it holds.

    Note the image convention is the one under which the weakest-pre laws
    come out right (wp(magic)(Q) is everything); the original presentation
    assigns magic the full image instead.
    """
    return NDetTransformer(
        in_domain, out_domain, delay,
        lambda p: PrefixSet(out_domain, len(p) + delay),
        branching=1, name="magic")


def abort(in_domain: Domain, out_domain: Domain, delay: int = 0) -> NDetTransformer:
    """Chaos: the full image at every prefix (enumerable output domains only)."""
    return NDetTransformer(
        in_domain, out_domain, delay,
        lambda p: full_prefix_set(out_domain, len(p) + delay),
        branching=max(2, len(out_domain.enumerate_values() or ()) or 2),
        name="abort")


def identity(domain: Domain) -> DetTransformer:
    return DetTransformer(domain, domain, 0, lambda p: p, name="Id")


# ---------------------------------------------------------------------------
# Composition

def compose(kind: str, S, T):
    """seq, par, angelic or demonic composition at the word level.

    Declared delays: seq adds, par takes the minimum, angelic/demonic require
    equal operand delays (their common value is then both the min and the
    max, so the usual max rule is satisfied).  Allowing unequal delays under
    a max rule would overclaim: the union of a 1-delayed and a 2-delayed
    branch set is only determined one step ahead.
    """
    if kind == "seq":
        return _compose_seq(S, T)
    if kind == "par":
        return _compose_par(S, T)
    if kind in ("angelic", "demonic"):
        return _compose_choice(kind, S, T)
    raise ValueError(f"unknown composition kind: {kind!r}")


def _compose_seq(S, T):
    if S.out_domain != T.in_domain:
        raise ArityMismatchError(
            f"seq: output domain {S.out_domain.kind} does not feed {T.in_domain.kind}")
    delay = S.delay + T.delay
    name = f"({S.name};{T.name})"
    if isinstance(S, DetTransformer) and isinstance(T, DetTransformer):
        return DetTransformer(S.in_domain, T.out_domain, delay,
                              lambda p: T.word(S.word(p)), name=name)
    Sn, Tn = as_ndet(S), as_ndet(T)

    def branch(p: Prefix) -> PrefixSet:
        out = set()
        for mid in Sn.branches(p).members:
            out |= Tn.branches(mid).members
        return PrefixSet.of(T.out_domain, len(p) + delay, out)

    return NDetTransformer(S.in_domain, T.out_domain, delay, branch,
                           branching=Sn.branching * Tn.branching, name=name)


def _compose_par(S, T):
    if S.in_domain != T.in_domain:
        raise ArityMismatchError("par: operands must share the input domain")
    delay = min(S.delay, T.delay)
    out_domain = product(*(components(S.out_domain) + components(T.out_domain)))
    name = f"({S.name}|{T.name})"

    def pair(u: Prefix, v: Prefix, n: int) -> Prefix:
        su, sv = split_prefix(u.truncate(n)), split_prefix(v.truncate(n))
        parts = su + sv
        word = tuple(tuple(part[k] for part in parts) for k in range(n))
        return Prefix(out_domain, word)

    if isinstance(S, DetTransformer) and isinstance(T, DetTransformer):
        return DetTransformer(
            S.in_domain, out_domain, delay,
            lambda p: pair(S.word(p), T.word(p), len(p) + delay), name=name)
    Sn, Tn = as_ndet(S), as_ndet(T)

    def branch(p: Prefix) -> PrefixSet:
        n = len(p) + delay
        out = {pair(u, v, n)
               for u in Sn.branches(p).members
               for v in Tn.branches(p).members}
        return PrefixSet.of(out_domain, n, out)

    return NDetTransformer(S.in_domain, out_domain, delay, branch,
                           branching=Sn.branching * Tn.branching, name=name)


def _compose_choice(kind: str, S, T):
    if S.in_domain != T.in_domain or S.out_domain != T.out_domain:
        raise ArityMismatchError(f"{kind}: operands must share domains")
    if S.delay != T.delay:
        raise DelayMismatchError(
            f"{kind}: operand delays {S.delay} and {T.delay} differ; "
            "weaken_delay one operand first")
    delay = S.delay
    Sn, Tn = as_ndet(S), as_ndet(T)
    symbol = "+" if kind == "angelic" else "&"
    name = f"({S.name}{symbol}{T.name})"

    def branch(p: Prefix) -> PrefixSet:
        a, b = Sn.branches(p), Tn.branches(p)
        return a.union(b) if kind == "angelic" else a.intersection(b)

    branching = (Sn.branching + Tn.branching) if kind == "angelic" \
        else min(Sn.branching, Tn.branching)
    return NDetTransformer(S.in_domain, S.out_domain, delay, branch,
                           branching=branching, name=name)


# ---------------------------------------------------------------------------
# Random sampling helpers (seeded; used by the falsifiers below and by tests)

def random_letter(domain: Domain, rng: random.Random):
    if isinstance(domain, ProductDomain):
        return tuple(random_letter(c, rng) for c in domain.components)
    values = domain.enumerate_values()
    if values is not None:
        return rng.choice(values)
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def random_word(domain: Domain, length: int, rng: random.Random) -> Prefix:
    return Prefix(domain, tuple(random_letter(domain, rng) for _ in range(length)))


def random_letter_differing(domain: Domain, avoid, rng: random.Random):
    for _ in range(64):
        v = random_letter(domain, rng)
        if v != avoid:
            return v
    raise ValueError("domain appears to have a single value")


# ---------------------------------------------------------------------------
# Refinement and causality checking

@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    counterexample: Optional[Prefix] = None
    checked: int = 0

    def __bool__(self):
        return self.holds


def refines(S, T, depth: int, samples: int = 200, seed: int = 0,
            enumeration_cap: int = 4096) -> RefinementVerdict:
    """Does S refine T: S's branch set inside T's at every checked prefix.

    All prefixes up to the depth are enumerated when the input domain is
    finite and small enough; otherwise seeded random prefixes are used.
    """
    if S.in_domain != T.in_domain or S.out_domain != T.out_domain:
        raise ArityMismatchError("refinement needs matching domains")
    if S.delay != T.delay:
        raise DelayMismatchError("refinement needs matching declared delays")
    Sn, Tn = as_ndet(S), as_ndet(T)
    checked = 0
    for p in _candidate_inputs(S.in_domain, depth, samples, seed, enumeration_cap):
        checked += 1
        if not Sn.branches(p).issubset(Tn.branches(p)):
            return RefinementVerdict(False, counterexample=p, checked=checked)
    return RefinementVerdict(True, checked=checked)


def _candidate_inputs(domain: Domain, depth: int, samples: int, seed: int,
                      cap: int):
    values = domain.enumerate_values()
    total = 0
    if values is not None:
        per = len(values)
        count, length = 1, 0
        enumerable = True
        while length <= depth:
            total += count
            if total > cap:
                enumerable = False
                break
            count *= per
            length += 1
        if enumerable:
            from .coeff import enumerate_words

            for length in range(depth + 1):
                for w in enumerate_words(domain, length):
                    yield Prefix(domain, w)
            return
    rng = random.Random(seed)
    for _ in range(samples):
        yield random_word(domain, rng.randint(0, depth), rng)


@dataclass(frozen=True)
class CausalityVerdict:
    no_violation: bool
    counterexample: Optional[tuple] = None  # (p, q, common_length)
    samples_run: int = 0

    def __bool__(self):
        return self.no_violation


def check_causality(T, claimed_delay: int, depth: int, samples: int = 1000,
                    seed: int = 0, set_budget: int = 4096,
                    common_cap: int = 8) -> CausalityVerdict:
    """Sampled falsifier for a claimed delay.

    Draws input pairs sharing a common prefix of length k and verifies, in
    certified dyadic arithmetic, the Hausdorff contraction bound
    H(T(p), T(q)) <= 2^(-claimed_delay) * d(p, q) at the word level; the
    bound at exponent k + delay is equivalent to the output prefix sets
    agreeing through index k + delay - 1.  Branch sets larger than
    ``set_budget`` shorten the comparison window (branch sets may grow
    exponentially with prefix length); no violation found is not a proof.
    """
    rng = random.Random(seed)
    Tn = as_ndet(T)
    ran = 0
    for _ in range(samples):
        k = rng.randint(0, min(common_cap, max(depth - 1, 0)))
        tail_len = rng.randint(1, max(1, min(depth - k, common_cap)))
        common = random_word(T.in_domain, k, rng)
        a = random_letter(T.in_domain, rng)
        b = random_letter_differing(T.in_domain, a, rng)
        p = common.append(a)
        q = common.append(b)
        for _ in range(tail_len - 1):
            p = p.append(random_letter(T.in_domain, rng))
            q = q.append(random_letter(T.in_domain, rng))
        ran += 1
        # d(p, q) = 2^(-k) by construction; required output bound is k + delay.
        length = len(p)
        while length > k:
            bp = Tn.branches(p.truncate(length))
            bq = Tn.branches(q.truncate(length))
            if len(bp) <= set_budget and len(bq) <= set_budget:
                break
            length -= 1
        else:
            bp = Tn.branches(p.truncate(k))
            bq = Tn.branches(q.truncate(k))
        window = min(k + claimed_delay, length + Tn.delay)
        if bp.is_empty() != bq.is_empty():
            return CausalityVerdict(False, (p, q, k), ran)
        if bp.is_empty():
            continue
        h = hausdorff(bp.truncate(window), bq.truncate(window))
        if not h.le_bound(window):
            return CausalityVerdict(False, (p, q, k), ran)
    return CausalityVerdict(True, samples_run=ran)


@dataclass(frozen=True)
class ConsistencyVerdict:
    holds: bool
    witness: Optional[tuple] = None
    checked: int = 0

    def __bool__(self):
        return self.holds


def check_consistency(T, depth: int, samples: int = 200, seed: int = 0) -> ConsistencyVerdict:
    """Spot-check the word-function consistency invariant.

    Deterministic: outputs on a prefix agree with outputs on its extensions.
    Nondeterministic: branch sets extend and cover between adjacent lengths.
    """
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        length = rng.randint(1, depth)
        p = random_word(T.in_domain, length, rng)
        cut = rng.randint(0, length - 1)
        checked += 1
        if isinstance(T, DetTransformer):
            long_out = T.word(p)
            short_out = T.word(p.truncate(cut))
            if not long_out.extends(short_out):
                return ConsistencyVerdict(False, (p, cut), checked)
        else:
            shorter = T.branches(p.truncate(length - 1))
            longer = T.branches(p)
            for w in longer.members:
                if not any(w.extends(v) for v in shorter.members):
                    return ConsistencyVerdict(False, (p, w), checked)
            for v in shorter.members:
                if not any(w.extends(v) for w in longer.members):
                    return ConsistencyVerdict(False, (p, v), checked)
    return ConsistencyVerdict(True, checked=checked)


def loop_transformer(T: DetTransformer, name: str = "") -> DetTransformer:
    """The feedback closure: maps every input to the unique fixpoint of T.

    Defined for strongly causal T with matching input/output arity; the
    word function walks the fixpoint out by repeated self-application.
    """
    if T.delay < 1:
        raise NotStronglyCausalError("loop needs a strongly causal operand")
    if T.in_domain != T.out_domain:
        raise ArityMismatchError("loop needs matching input and output domains")
    from .solver import solve_det

    def word_fn(p: Prefix) -> Prefix:
        need = len(p) + T.delay
        result = solve_det(T, need)
        return result.prefix

    return DetTransformer(T.in_domain, T.out_domain, T.delay, word_fn,
                          name=name or f"loop({T.name})")


# ---------------------------------------------------------------------------
# Builtin library

def mul_by(r, domain: Domain = RAT) -> DetTransformer:
    domain.validate(r)
    return DetTransformer(
        domain, domain, 0,
        lambda p: Prefix(domain, tuple(domain.mul(r, v) for v in p.word)),
        name=f"M_{domain.format(r)}")


def adder(domain: Domain = RAT) -> DetTransformer:
    in_domain = ProductDomain((domain, domain))
    return DetTransformer(
        in_domain, domain, 0,
        lambda p: Prefix(domain, tuple(domain.add(a, b) for a, b in p.word)),
        name="A")


def copier(domain: Domain = RAT) -> DetTransformer:
    out_domain = ProductDomain((domain, domain))
    return DetTransformer(
        domain, out_domain, 0,
        lambda p: Prefix(out_domain, tuple((v, v) for v in p.word)),
        name="C")


def cons_transformer(a, domain: Domain = RAT) -> DetTransformer:
    domain.validate(a)
    return DetTransformer(
        domain, domain, 1,
        lambda p: Prefix(domain, (a,) + p.word),
        name=f"cons_{domain.format(a)}")


def unit_delay(domain: Domain = RAT) -> DetTransformer:
    t = cons_transformer(domain.zero, domain)
    t.name = "D1"
    return t


def register(width: int = 1, init=None) -> DetTransformer:
    """A clocked register: load the input value when enabled, else hold.

    The loaded value is visible at the loading tick, which keeps the
    transformer 0-causal; out_0 falls back to ``init`` when not enabled.
    """
    if width < 1:
        raise ValueError("register width must be >= 1")
    value_domain: Domain = GF2 if width == 1 else ProductDomain((GF2,) * width)
    if init is None:
        init = pad_value(value_domain)
    value_domain.validate(init)
    in_domain = ProductDomain((value_domain, GF2))

    def word_fn(p: Prefix) -> Prefix:
        out = []
        held = init
        for value, enable in p.word:
            if enable == 1:
                held = value
            out.append(held)
        return Prefix(value_domain, tuple(out))

    return DetTransformer(in_domain, value_domain, 0, word_fn,
                          name=f"register{width}")


def _mix_received(f_word: Tuple, g_word: Tuple, upto: int) -> List[int]:
    """received[j] = ones seen in both inputs strictly before tick j."""
    received = [0] * (upto + 1)
    for j in range(1, upto + 1):
        received[j] = received[j - 1] \
            + (1 if j - 1 < len(f_word) and f_word[j - 1] == 1 else 0) \
            + (1 if j - 1 < len(g_word) and g_word[j - 1] == 1 else 0)
    return received


def mix_words(f_word: Tuple, g_word: Tuple, out_len: int) -> List[Tuple[int, ...]]:
    """All output words of the count-constraint realization of mix.

    A 1 may be emitted at tick j only against a 1 received strictly before
    tick j; this is what lets the feedback law "no input ones means no
    output ones" hold.  Requires out_len <= len(inputs) + 1.
    """
    if out_len > len(f_word) + 1:
        raise LengthMismatchError("mix output window exceeds input knowledge")
    received = _mix_received(f_word, g_word, out_len)
    words: List[Tuple[int, ...]] = [()]
    for j in range(out_len):
        budget = received[j]
        nxt = []
        for w in words:
            emitted = sum(w)
            nxt.append(w + (0,))
            if emitted + 1 <= budget:
                nxt.append(w + (1,))
        words = nxt
    return words


def mix_word_ok(f_word: Tuple, g_word: Tuple, w: Tuple) -> bool:
    """Membership in the mix branch set without materializing it."""
    if len(w) > len(f_word) + 1:
        raise LengthMismatchError("mix output window exceeds input knowledge")
    received = _mix_received(f_word, g_word, len(w))
    emitted = 0
    for j, bit in enumerate(w):
        if bit == 1:
            emitted += 1
            if emitted > received[j]:
                return False
    return True


def mix() -> NDetTransformer:
    """Nondeterministic mixing of two Boolean streams.

    This is one specific weakly causal realization of the specification
    "the output carries as many ones as both inputs combined": a safety
    automaton that never emits a one before having received one.  Eventual
    emission of every received one is a liveness property invisible at any
    finite depth, so the realization refines the specification rather than
    matching it.
    """
    in_domain = ProductDomain((GF2, GF2))

    def branch(p: Prefix) -> PrefixSet:
        fw = tuple(v[0] for v in p.word)
        gw = tuple(v[1] for v in p.word)
        return PrefixSet.of(GF2, len(p),
                            (Prefix(GF2, w) for w in mix_words(fw, gw, len(p))))

    def member(p: Prefix, w: Prefix) -> bool:
        fw = tuple(v[0] for v in p.word)
        gw = tuple(v[1] for v in p.word)
        return mix_word_ok(fw, gw, w.word)

    return NDetTransformer(in_domain, GF2, 0, branch, branching=2, name="mix",
                           member_fn=member)


def builtin(name: str, **params):
    """The named primitive with its exact delay; see the factory functions."""
    factories = {
        "M_r": lambda: mul_by(params.pop("r"), params.pop("domain", RAT)),
        "A": lambda: adder(params.pop("domain", RAT)),
        "C": lambda: copier(params.pop("domain", RAT)),
        "D1": lambda: unit_delay(params.pop("domain", RAT)),
        "cons_a": lambda: cons_transformer(params.pop("a"), params.pop("domain", RAT)),
        "register": lambda: register(params.pop("width", 1), params.pop("init", None)),
        "mix": mix,
    }
    if name not in factories:
        raise ValueError(f"unknown builtin: {name!r}")
    try:
        t = factories[name]()
    except KeyError as exc:
        raise ValueError(f"missing parameter for {name}: {exc}") from None
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    return t
