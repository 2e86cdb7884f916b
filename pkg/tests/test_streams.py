import random
import threading
from fractions import Fraction as F

import pytest

from causal_streams import (
    GF2,
    RAT,
    CompositionError,
    NotInvertibleError,
    Prefix,
    PrefixSet,
    add,
    cons,
    constant,
    fcompose,
    from_word,
    indeterminate,
    inverse,
    mul,
    one,
    prefix_of,
    scalar,
    tail,
    zero,
)
from causal_streams.streams import Stream, head

from .oracles import conv_gf2, conv_q


def rat(*xs):
    return from_word(RAT, [F(x) for x in xs])


def geometric():
    """1/(1-X) built by inversion."""
    return inverse(rat(1, -1))


def test_coefficient_examples():
    assert head(one(RAT)) == 1
    x = indeterminate(RAT)
    assert x.at(1) == 1 and x.at(0) == 0
    assert geometric().at(7) == 1


def test_prefix_examples():
    assert len(prefix_of(rat(5), 0)) == 0
    assert prefix_of(indeterminate(RAT), 3).word == (F(0), F(1), F(0))
    assert prefix_of(geometric(), 4).word == (F(1), F(1), F(1), F(1))


def test_add_examples():
    f = rat(3, 1, 4)
    assert prefix_of(add(f, zero(RAT)), 5).word == prefix_of(f, 5).word
    a = from_word(GF2, [1, 1, 0])
    b = from_word(GF2, [1, 0, 1])
    assert prefix_of(add(a, b), 4).word == (0, 1, 1, 0)
    nat = rat(1, 2, 3)
    assert prefix_of(add(nat, nat), 3).word == (F(2), F(4), F(6))


def test_mul_examples():
    f = rat(2, 7, 1)
    assert prefix_of(mul(f, one(RAT)), 5).word == prefix_of(f, 5).word
    assert prefix_of(mul(geometric(), rat(1, -1)), 6).word == (F(1), 0, 0, 0, 0, 0)
    g = from_word(GF2, [1, 1])
    expect = tuple(conv_gf2([1, 1], [1, 1], 6))
    assert prefix_of(mul(g, g), 6).word == expect == (1, 0, 1, 0, 0, 0)


def test_mul_matches_convolution_oracle():
    rng = random.Random(5)
    a = [F(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(8)]
    b = [F(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(8)]
    got = prefix_of(mul(from_word(RAT, a), from_word(RAT, b)), 12).word
    assert list(got) == conv_q(a, b, 12)


def test_scalar_examples():
    f = rat(1, 2, 3)
    assert prefix_of(scalar(F(1), f), 3).word == (1, 2, 3)
    assert prefix_of(scalar(F(0), f), 3).word == (0, 0, 0)
    assert prefix_of(scalar(F(2), f), 3).word == (2, 4, 6)


def test_cons_and_head_tail():
    f = rat(1, 2, 3)
    assert prefix_of(cons(F(0), f), 4).word == (0, 1, 2, 3)
    assert prefix_of(cons(F(5), zero(RAT)), 3).word == (5, 0, 0)
    rebuilt = cons(head(f), tail(f))
    assert prefix_of(rebuilt, 6).word == prefix_of(f, 6).word


def test_inverse_examples():
    assert prefix_of(inverse(one(RAT)), 4).word == (1, 0, 0, 0)
    assert prefix_of(geometric(), 5).word == (1, 1, 1, 1, 1)
    g = inverse(rat(2, -1))
    assert prefix_of(g, 3).word == (F(1, 2), F(1, 4), F(1, 8))
    assert prefix_of(mul(rat(2, -1), g), 16).word == (F(1),) + (F(0),) * 15


def test_inverse_requires_nonzero_head():
    with pytest.raises(NotInvertibleError):
        inverse(indeterminate(RAT))


def test_fcompose_examples():
    x = indeterminate(RAT)
    f = rat(4, -1, 2, 9)
    assert prefix_of(fcompose(f, x), 6).word == prefix_of(f, 6).word
    # (X + X^2)^2 expanded by the convolution oracle
    inner = [0, 1, 1]
    expect = tuple(F(v) for v in conv_q(inner, inner, 6))
    assert prefix_of(fcompose(mul(x, x), from_word(RAT, [F(0), F(1), F(1)])), 6).word == expect
    assert expect == (0, 0, 1, 2, 1, 0)
    # geometric series at 2X: verify (1 - 2X) * result = 1 to depth 16
    comp = fcompose(geometric(), scalar(F(2), x))
    assert prefix_of(comp, 4).word == (1, 2, 4, 8)
    assert prefix_of(mul(rat(1, -2), comp), 16).word == (F(1),) + (F(0),) * 15


def test_fcompose_rejects_nonzero_inner_head():
    with pytest.raises(CompositionError):
        fcompose(one(RAT), one(RAT))
    # A nonzero constant term on the outer series is fine.
    assert fcompose(one(RAT), indeterminate(RAT)).at(0) == 1


def random_stream(rng, n=8):
    return from_word(RAT, [F(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(n)])


def test_ring_laws_at_depth_32():
    rng = random.Random(11)
    for _ in range(20):
        f, g, h = (random_stream(rng) for _ in range(3))
        n = 32
        assert prefix_of(add(f, g), n).word == prefix_of(add(g, f), n).word
        assert prefix_of(mul(f, g), n).word == prefix_of(mul(g, f), n).word
        assert prefix_of(add(add(f, g), h), n).word == prefix_of(add(f, add(g, h)), n).word
        assert prefix_of(mul(mul(f, g), h), n).word == prefix_of(mul(f, mul(g, h)), n).word
        assert (prefix_of(mul(f, add(g, h)), n).word
                == prefix_of(add(mul(f, g), mul(f, h)), n).word)


def first_nonzero(f, depth=64):
    for k in range(depth):
        if f.at(k) != 0:
            return k
    return None


def test_ord_multiplicativity():
    rng = random.Random(13)
    for _ in range(40):
        lead_f = rng.randint(0, 4)
        lead_g = rng.randint(0, 4)
        f = from_word(RAT, [F(0)] * lead_f + [F(rng.randint(1, 5))]
                      + [F(rng.randint(-3, 3)) for _ in range(4)])
        g = from_word(RAT, [F(0)] * lead_g + [F(rng.randint(1, 5))]
                      + [F(rng.randint(-3, 3)) for _ in range(4)])
        assert first_nonzero(mul(f, g)) == lead_f + lead_g


def test_memoization_transparency():
    calls = []

    def gen(k):
        calls.append(k)
        return F(k)

    s = Stream(RAT, gen)
    assert s.at(5) == 5
    assert s.at(2) == 2
    assert s.at(5) == 5
    assert prefix_of(s, 6).word == (0, 1, 2, 3, 4, 5)
    assert calls == [0, 1, 2, 3, 4, 5]


def test_interleaved_reads_agree():
    a = geometric()
    b = geometric()
    left = [a.at(k) for k in (7, 0, 3, 7, 1)]
    right = [b.at(k) for k in (0, 1, 3, 7, 7)]
    assert left == [1] * 5 and right == [1] * 5


def test_concurrent_reads_are_consistent():
    s = mul(geometric(), geometric())  # (1, 2, 3, ...)
    results = []

    def reader():
        results.append(tuple(s.at(k) for k in range(32)))

    threads = [threading.Thread(target=reader) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1
    assert results[0][:4] == (1, 2, 3, 4)


def test_non_productive_self_reference_raises():
    from causal_streams.errors import CausalStreamsError

    s = Stream.recursive(RAT, lambda self, k: self.at(k))
    with pytest.raises(CausalStreamsError):
        s.at(0)


def test_prefix_serialization_round_trips():
    p = prefix_of(rat("1/2", 3, "-4/7"), 3)
    assert Prefix.from_json(RAT, p.to_json()) == p
    assert Prefix.from_csv_row(RAT, p.to_csv_row()) == p
    assert Prefix.from_csv_row(RAT, "") == Prefix(RAT, ())
    q = prefix_of(from_word(GF2, [1, 0, 1]), 3)
    assert Prefix.from_json(GF2, q.to_json()) == q


def test_prefix_set_serialization_round_trips():
    s = PrefixSet.of(GF2, 2, [Prefix(GF2, (0, 1)), Prefix(GF2, (1, 1))])
    assert PrefixSet.from_json(GF2, s.to_json()) == s
    assert s.to_lists() == [["0", "1"], ["1", "1"]]
