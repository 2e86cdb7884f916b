import random
from fractions import Fraction as F

import pytest

from causal_streams import (
    GF2,
    RAT,
    Contract,
    LengthMismatchError,
    NonEnumerableDomainError,
    Prefix,
    PrefixSet,
    abort,
    as_ndet,
    full_prefix_set,
    hoare_check,
    identity,
    magic,
    sp,
    unit_delay,
    wp,
)
from causal_streams import NDetTransformer, compose, hausdorff, word_distance
from causal_streams.coeff import enumerate_words


def pset(*words, length=None):
    length = length if length is not None else len(words[0])
    return PrefixSet.of(GF2, length, [Prefix(GF2, tuple(w)) for w in words])


def rand_ndet(rng, delay=1, name="T"):
    """A random small nondeterministic transformer over gf2, consistent by
    construction: branches at length k are all one-letter extensions of the
    branches at k - 1 selected by a random but pure rule."""
    salt = rng.randint(0, 2**30)

    def choices(p, j):
        h = hash((salt, p.word[: j + 1])) & 3
        if h == 0:
            return (0,)
        if h == 1:
            return (1,)
        return (0, 1)

    def branch(p):
        outs = [()]
        for j in range(len(p) + delay):
            upto = p.word[: max(0, j + 1 - delay)]
            opts = choices(Prefix(GF2, upto), j)
            outs = [w + (b,) for w in outs for b in opts]
        return PrefixSet.of(GF2, len(p) + delay, [Prefix(GF2, w) for w in outs])

    return NDetTransformer(GF2, GF2, delay, branch, branching=2, name=name)


def test_sp_examples():
    D1 = as_ndet(unit_delay(GF2))
    assert sp(D1, PrefixSet(GF2, 1)).is_empty()
    assert sp(D1, pset((1,))) == pset((0, 1))
    assert sp(as_ndet(identity(GF2)), pset((0, 1), (1, 1))) == pset((0, 1), (1, 1))


def test_wp_examples():
    D1 = as_ndet(unit_delay(GF2))
    assert wp(D1, pset((0, 0), (0, 1))) == pset((0,), (1,))
    assert wp(D1, full_prefix_set(GF2, 3)) == full_prefix_set(GF2, 2)
    chaos = abort(GF2, GF2, delay=1)
    assert wp(chaos, pset((0, 0))).is_empty()
    miracle = magic(GF2, GF2, delay=1)
    assert wp(miracle, pset((0, 0))) == full_prefix_set(GF2, 1)


def test_wp_needs_universe_over_rationals():
    D1 = as_ndet(unit_delay(RAT))
    q = PrefixSet.of(RAT, 2, [Prefix(RAT, (F(0), F(7)))])
    with pytest.raises(NonEnumerableDomainError):
        wp(D1, q)
    universe = PrefixSet.of(RAT, 1, [Prefix(RAT, (F(7),)), Prefix(RAT, (F(8),))])
    assert wp(D1, q, universe=universe) == PrefixSet.of(RAT, 1, [Prefix(RAT, (F(7),))])


def test_wp_length_validation():
    D1 = as_ndet(unit_delay(GF2))
    with pytest.raises(LengthMismatchError):
        wp(D1, PrefixSet(GF2, 0))


def test_hoare_examples():
    D1 = as_ndet(unit_delay(GF2))
    assert hoare_check(Contract(PrefixSet(GF2, 1), D1, pset((0, 0))))
    ident = as_ndet(identity(GF2))
    P = pset((0, 1), (1, 0))
    assert hoare_check(Contract(P, ident, P))
    verdict = hoare_check(Contract(pset((1,)), D1, pset((0, 0))))
    assert not verdict.holds
    assert verdict.counterexample == Prefix(GF2, (1,))
    assert verdict.escaping == Prefix(GF2, (0, 1))


def random_subset(rng, length):
    words = list(enumerate_words(GF2, length))
    return PrefixSet.of(GF2, length,
                        [Prefix(GF2, w) for w in words if rng.random() < 0.5])


def test_adjunction_and_galois_consequences():
    rng = random.Random(41)
    for _ in range(200):
        k = rng.randint(0, 4)
        T = rand_ndet(rng)
        P = random_subset(rng, k)
        Q = random_subset(rng, k + 1)
        lhs = sp(T, P).issubset(Q)
        rhs = P.issubset(wp(T, Q))
        assert lhs == rhs
        assert P.issubset(wp(T, sp(T, P)))
        assert sp(T, wp(T, Q)).issubset(Q)


def test_sp_wp_monotone():
    rng = random.Random(43)
    for _ in range(60):
        T = rand_ndet(rng)
        small = random_subset(rng, 3)
        big = small.union(random_subset(rng, 3))
        assert sp(T, small).issubset(sp(T, big))
        q_small = random_subset(rng, 4)
        q_big = q_small.union(random_subset(rng, 4))
        assert wp(T, q_small).issubset(wp(T, q_big))


def test_wp_seq_law():
    rng = random.Random(47)
    for _ in range(60):
        S = rand_ndet(rng, name="S")
        T = rand_ndet(rng, name="T")
        Q = random_subset(rng, 4)
        st = compose("seq", S, T)
        assert wp(st, Q) == wp(S, wp(T, Q))


def test_wp_demonic_law_sound_direction():
    # wp(S)(Q) & wp(T)(Q) lands inside wp(S meet T)(Q): if both images sit in
    # Q then so does their intersection.  Equality fails in general, below.
    rng = random.Random(53)
    for _ in range(60):
        S = rand_ndet(rng, name="S")
        T = rand_ndet(rng, name="T")
        Q = random_subset(rng, 3)
        met = compose("demonic", S, T)
        assert wp(S, Q).intersection(wp(T, Q)).issubset(wp(met, Q))


def test_wp_demonic_equality_has_a_counterexample():
    # Documented failure of the printed equality law: with disjoint images
    # the intersection is empty, hence inside any Q, while neither operand's
    # image is.
    def const(bit):
        def branch(p):
            return PrefixSet.of(GF2, len(p), [Prefix(GF2, (bit,) * len(p))])
        return NDetTransformer(GF2, GF2, 0, branch, name=f"const{bit}")

    S, T = const(0), const(1)
    met = compose("demonic", S, T)
    Q = pset((0,))
    wl = wp(met, Q)
    wr = wp(S, Q).intersection(wp(T, Q))
    assert wr.issubset(wl) and wl != wr


def test_wp_angelic_union_image_is_intersection_law():
    # For union images T(x) | S(x) inside Q means both inside Q, so the true
    # law pairs angelic choice with intersection on the wp side; the printed
    # union law fails on the same instances.
    rng = random.Random(59)
    saw_union_failure = False
    for _ in range(60):
        S = rand_ndet(rng, name="S")
        T = rand_ndet(rng, name="T")
        Q = random_subset(rng, 3)
        joined = compose("angelic", S, T)
        assert wp(joined, Q) == wp(S, Q).intersection(wp(T, Q))
        if wp(joined, Q) != wp(S, Q).union(wp(T, Q)):
            saw_union_failure = True
    assert saw_union_failure


def test_sp_wp_lipschitz_transfer():
    # Contraction of sp at the transformer's delay, on nonempty set pairs.
    rng = random.Random(61)
    for _ in range(40):
        T = rand_ndet(rng)
        k = rng.randint(1, 4)
        P = random_subset(rng, k)
        Q = random_subset(rng, k)
        if P.is_empty() or Q.is_empty():
            continue
        d_in = hausdorff(P, Q)
        d_out = hausdorff(sp(T, P), sp(T, Q))
        assert d_out.le_bound(min(d_in.exponent + T.delay, k + T.delay))
