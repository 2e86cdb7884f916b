"""Exact lazy-stream fixpoint engine and causality analyzer.

Streams are formal power series with exact coefficients (GF(2), rationals,
finite alphabets) under the prefix ultrametric.  Causal stream transformers
are represented as delay-certified word functions; systems of stream
equations and inclusions are parsed, analyzed for causality and solved by
certified fixpoint iteration.
"""

from .coeff import (
    AlphabetDomain,
    Domain,
    GF2,
    ProductDomain,
    RAT,
    coeff_eq,
    field_arith,
    product,
    rational,
)
from .errors import (
    ArityMismatchError,
    BudgetExhaustedError,
    CausalStreamsError,
    CompositionError,
    DelayMismatchError,
    DomainMismatchError,
    EmptyImageError,
    EmptySetError,
    LengthMismatchError,
    NonEnumerableDomainError,
    NotInvertibleError,
    NotStronglyCausalError,
    ParseError,
    RejectedSystemError,
    UnsupportedOperationError,
)
from .streams import (
    Prefix,
    PrefixSet,
    Stream,
    add,
    coefficient_at,
    cons,
    constant,
    delay,
    empty_prefix,
    fcompose,
    from_fn,
    from_prefix,
    from_word,
    full_prefix_set,
    head,
    indeterminate,
    inverse,
    mul,
    one,
    prefix_of,
    scalar,
    tail,
    zero,
)
from .metric import (
    Ball,
    Dyadic,
    ball_membership,
    distance,
    dyadic_inf,
    dyadic_sup,
    hausdorff,
    point_set_distance,
    product_distance,
    valuation,
    word_distance,
)
from .transformers import (
    DetTransformer,
    NDetTransformer,
    abort,
    adder,
    apply_ndet,
    as_ndet,
    builtin,
    check_causality,
    check_consistency,
    compose,
    cons_transformer,
    copier,
    from_stream_fn,
    identity,
    lift,
    loop_transformer,
    magic,
    mix,
    mul_by,
    refines,
    register,
    unit_delay,
    weaken_delay,
)
from .settrans import Contract, full_universe, hoare_check, sp, wp
from .solver import (
    Diagnosis,
    SolveResult,
    Strategy,
    check_membership,
    diagnose_nonexpansive,
    fix_sp,
    fix_sp_from,
    fix_wp,
    induction_check,
    picard_trace,
    solve_det,
    solve_inclusion,
)
from .dsl import (
    CausalityReport,
    ElaboratedSystem,
    EqnSystem,
    analyze_causality,
    elaborate,
    evaluate_straight_line,
    format_system,
    parse,
)

__version__ = "0.1.0"
