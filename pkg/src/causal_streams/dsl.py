"""Parser, causality analysis and elaboration for stream equation systems.

Concrete syntax (whitespace-insensitive, ``#`` line comments, usual file
extension ``.cse``)::

    system  ::= decl* defn*
    decl    ::= "stream" IDENT ":" ("bool" | "rat" | "alphabet" "{" IDENT ("," IDENT)* "}")
                ["input"] ";"
    defn    ::= IDENT "=" expr ";" | IDENT "in" setexpr ";"
    expr    ::= literal | IDENT | expr "+" expr | expr "*" expr | RATIONAL "." expr
              | "X" "*" expr | "cons" "(" literal "," expr ")"
              | "if" expr "then" expr "else" expr | "not" expr
              | "register" "(" expr "," expr "," literal ")" | "(" expr ")"
    setexpr ::= "{" expr ("," expr)* "}" | "mix" "(" expr "," expr ")"

Literals over field domains denote the ring embedding (a, 0, 0, ...); over
finite alphabets they denote the constant stream.  ``if``/``not`` are
pointwise over a Boolean condition stream.

Static analysis assigns each operator its delay (X*/cons: 1, everything else
0, mix edges 1 by its strictly-delayed realization), sums delays around
dependency cycles and reports strongly-causal when every cycle is delayed.
An unconditional zero-delay cycle is rejected outright; zero-delay cycles
guarded by a conditional can still be fine, which the bounded, input-relative
semantic check decides positionwise, SAL-style.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx

from .coeff import AlphabetDomain, Domain, GF2, RAT, product
from .errors import ParseError, RejectedSystemError
from .streams import Prefix, PrefixSet, Stream, from_word
from .transformers import DetTransformer, NDetTransformer, random_letter


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    raw: str
    value: object = dc_field(default=None, compare=False)
    domain: Optional[Domain] = dc_field(default=None, compare=False)
    span: Tuple[int, int] = dc_field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Ref(Expr):
    name: str
    span: Tuple[int, int] = dc_field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class XAtom(Expr):
    span: Tuple[int, int] = dc_field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Scale(Expr):
    factor: Fraction
    operand: Expr


@dataclass(frozen=True)
class Cons(Expr):
    head: Lit
    operand: Expr


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class Register(Expr):
    value: Expr
    enable: Expr
    init: Lit


@dataclass(frozen=True)
class SetLit:
    alternatives: Tuple[Expr, ...]


@dataclass(frozen=True)
class MixExpr:
    left: Expr
    right: Expr


SetExpr = Union[SetLit, MixExpr]


@dataclass(frozen=True)
class Decl:
    name: str
    domain: Domain
    is_input: bool
    span: Tuple[int, int] = dc_field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Defn:
    name: str
    kind: str  # "eq" | "in"
    rhs: Union[Expr, SetExpr]
    span: Tuple[int, int] = dc_field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class EqnSystem:
    decls: Tuple[Decl, ...]
    defns: Tuple[Defn, ...]

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.is_input)

    @property
    def defined_names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.decls if not d.is_input)

    def defn(self, name: str) -> Defn:
        for d in self.defns:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def has_inclusions(self) -> bool:
        return any(d.kind == "in" for d in self.defns)


# ---------------------------------------------------------------------------
# Tokenizer

KEYWORDS = {"stream", "bool", "rat", "alphabet", "input", "in", "cons", "if",
            "then", "else", "not", "mix", "register", "X"}
PUNCT = {":", ";", "=", "{", "}", "(", ")", ",", "+", "*", "."}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | NUMBER | RATIONAL | keyword or punctuation literal
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("RATIONAL", text[i:j], start_line, start_col))
            else:
                tokens.append(Token("NUMBER", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c in PUNCT:
            tokens.append(Token(c, c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent; if/then/else loosest, then +, then *, then unary)

class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def parse_system(self) -> EqnSystem:
        decls: List[Decl] = []
        while self.at("stream"):
            decls.append(self.parse_decl())
        defns: List[Defn] = []
        while not self.at("EOF"):
            defns.append(self.parse_defn())
        return EqnSystem(tuple(decls), tuple(defns))

    def parse_decl(self) -> Decl:
        t0 = self.expect("stream")
        name = self.expect("IDENT").text
        self.expect(":")
        t = self.next()
        if t.kind == "bool":
            domain: Domain = GF2
        elif t.kind == "rat":
            domain = RAT
        elif t.kind == "alphabet":
            self.expect("{")
            symbols = [self.expect("IDENT").text]
            while self.at(","):
                self.next()
                symbols.append(self.expect("IDENT").text)
            self.expect("}")
            domain = AlphabetDomain(tuple(symbols))
        else:
            raise ParseError(f"expected a domain, found {t.text!r}", t.line, t.col)
        is_input = False
        if self.at("input"):
            self.next()
            is_input = True
        self.expect(";")
        return Decl(name, domain, is_input, span=(t0.line, t0.col))

    def parse_defn(self) -> Defn:
        name_tok = self.expect("IDENT")
        t = self.next()
        if t.kind == "=":
            rhs: Union[Expr, SetExpr] = self.parse_expr()
        elif t.kind == "in":
            rhs = self.parse_setexpr()
        else:
            raise ParseError(f"expected '=' or 'in', found {t.text!r}", t.line, t.col)
        self.expect(";")
        return Defn(name_tok.text, "eq" if t.kind == "=" else "in", rhs,
                    span=(name_tok.line, name_tok.col))

    def parse_setexpr(self) -> SetExpr:
        t = self.peek()
        if t.kind == "mix":
            self.next()
            self.expect("(")
            left = self.parse_expr()
            self.expect(",")
            right = self.parse_expr()
            self.expect(")")
            return MixExpr(left, right)
        if t.kind == "{":
            self.next()
            alts = [self.parse_expr()]
            while self.at(","):
                self.next()
                alts.append(self.parse_expr())
            self.expect("}")
            return SetLit(tuple(alts))
        raise ParseError(f"expected a set expression, found {t.text!r}", t.line, t.col)

    def parse_expr(self) -> Expr:
        if self.at("if"):
            self.next()
            cond = self.parse_expr()
            self.expect("then")
            then = self.parse_expr()
            self.expect("else")
            other = self.parse_expr()
            return Ite(cond, then, other)
        return self.parse_sum()

    def parse_sum(self) -> Expr:
        e = self.parse_term()
        while self.at("+"):
            self.next()
            e = Add(e, self.parse_term())
        return e

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while self.at("*"):
            self.next()
            e = Mul(e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "not":
            self.next()
            return Not(self.parse_unary())
        if t.kind in ("NUMBER", "RATIONAL"):
            # A numeral followed by '.' is a scalar factor, else a literal.
            num = self.next()
            if self.at("."):
                self.next()
                return Scale(Fraction(num.text), self.parse_unary())
            return Lit(num.text, span=(num.line, num.col))
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.next()
        if t.kind == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "X":
            return XAtom(span=(t.line, t.col))
        if t.kind == "cons":
            self.expect("(")
            head = self.parse_literal()
            self.expect(",")
            e = self.parse_expr()
            self.expect(")")
            return Cons(head, e)
        if t.kind == "register":
            self.expect("(")
            value = self.parse_expr()
            self.expect(",")
            enable = self.parse_expr()
            self.expect(",")
            init = self.parse_literal()
            self.expect(")")
            return Register(value, enable, init)
        if t.kind == "IDENT":
            return Ref(t.text, span=(t.line, t.col))
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)

    def parse_literal(self) -> Lit:
        t = self.next()
        if t.kind in ("NUMBER", "RATIONAL", "IDENT"):
            return Lit(t.text, span=(t.line, t.col))
        raise ParseError(f"expected a literal, found {t.text!r}", t.line, t.col)


# ---------------------------------------------------------------------------
# Name resolution and domain checking

def _resolve_system(sys_: EqnSystem) -> EqnSystem:
    seen = set()
    for d in sys_.decls:
        if d.name in seen:
            raise ParseError(f"duplicate declaration of {d.name!r}", *d.span)
        seen.add(d.name)
    defined = set()
    for f in sys_.defns:
        if f.name not in seen:
            raise ParseError(f"definition of undeclared stream {f.name!r}", *f.span)
        if sys_.decl(f.name).is_input:
            raise ParseError(f"input stream {f.name!r} cannot be defined", *f.span)
        if f.name in defined:
            raise ParseError(f"duplicate definition of {f.name!r}", *f.span)
        defined.add(f.name)
    for d in sys_.decls:
        if not d.is_input and d.name not in defined:
            raise ParseError(f"stream {d.name!r} has no definition", *d.span)

    decls = {d.name: d for d in sys_.decls}

    def resolve(e: Expr, dom: Domain) -> Expr:
        if isinstance(e, Lit):
            return _resolve_literal(e, dom)
        if isinstance(e, Ref):
            if e.name in decls:
                refdom = decls[e.name].domain
                if refdom != dom:
                    raise ParseError(
                        f"stream {e.name!r} has domain {refdom.kind}, expected {dom.kind}",
                        *e.span)
                return e
            if isinstance(dom, AlphabetDomain) and e.name in dom.symbols:
                return Lit(e.name, value=e.name, domain=dom, span=e.span)
            raise ParseError(f"undeclared name {e.name!r}", *e.span)
        if isinstance(e, XAtom):
            if not dom.is_field:
                raise ParseError(f"X needs a field domain, not {dom.kind}", *e.span)
            return e
        if isinstance(e, Add):
            _need_field(dom, e)
            return Add(resolve(e.left, dom), resolve(e.right, dom))
        if isinstance(e, Mul):
            _need_field(dom, e)
            return Mul(resolve(e.left, dom), resolve(e.right, dom))
        if isinstance(e, Scale):
            if dom != RAT:
                raise ParseError("scalar factors apply to rational streams only")
            return Scale(e.factor, resolve(e.operand, dom))
        if isinstance(e, Cons):
            return Cons(_resolve_literal(e.head, dom), resolve(e.operand, dom))
        if isinstance(e, Ite):
            return Ite(resolve(e.cond, GF2), resolve(e.then, dom), resolve(e.other, dom))
        if isinstance(e, Not):
            if dom != GF2:
                raise ParseError("'not' applies to bool streams only")
            return Not(resolve(e.operand, GF2))
        if isinstance(e, Register):
            if dom != GF2:
                raise ParseError("register streams are bool in this syntax")
            return Register(resolve(e.value, GF2), resolve(e.enable, GF2),
                            _resolve_literal(e.init, GF2))
        raise ParseError(f"cannot resolve expression {e!r}")

    def resolve_set(se: SetExpr, dom: Domain) -> SetExpr:
        if isinstance(se, SetLit):
            return SetLit(tuple(resolve(a, dom) for a in se.alternatives))
        if dom != GF2:
            raise ParseError("mix applies to bool streams only")
        return MixExpr(resolve(se.left, GF2), resolve(se.right, GF2))

    defns = []
    for f in sys_.defns:
        dom = decls[f.name].domain
        rhs = resolve(f.rhs, dom) if f.kind == "eq" else resolve_set(f.rhs, dom)
        defns.append(Defn(f.name, f.kind, rhs, span=f.span))
    return EqnSystem(sys_.decls, tuple(defns))


def _need_field(dom: Domain, e: Expr) -> None:
    if not dom.is_field:
        raise ParseError(f"arithmetic needs a field domain, not {dom.kind}")


def _resolve_literal(lit: Lit, dom: Domain) -> Lit:
    try:
        value = dom.parse(lit.raw)
    except ValueError as exc:
        raise ParseError(str(exc), *lit.span) from None
    return Lit(lit.raw, value=value, domain=dom, span=lit.span)


def parse(text: str) -> EqnSystem:
    """Parse and resolve an equation system; diagnostics carry line:column."""
    return _resolve_system(_Parser(tokenize(text)).parse_system())


# ---------------------------------------------------------------------------
# Printing (round-trips through parse)

def format_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return e.raw
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, XAtom):
        return "X"
    if isinstance(e, Add):
        return f"{format_expr(e.left)} + {format_expr(e.right)}"
    if isinstance(e, Mul):
        return f"{_atomize(e.left)} * {_atomize(e.right)}"
    if isinstance(e, Scale):
        return f"{e.factor} . {_atomize(e.operand)}"
    if isinstance(e, Cons):
        return f"cons({e.head.raw}, {format_expr(e.operand)})"
    if isinstance(e, Ite):
        return (f"if {format_expr(e.cond)} then {format_expr(e.then)} "
                f"else {format_expr(e.other)}")
    if isinstance(e, Not):
        return f"not {_atomize(e.operand)}"
    if isinstance(e, Register):
        return (f"register({format_expr(e.value)}, {format_expr(e.enable)}, "
                f"{e.init.raw})")
    raise TypeError(f"not an expression: {e!r}")


def _atomize(e: Expr) -> str:
    if isinstance(e, (Add, Ite, Mul, Scale)):
        return f"({format_expr(e)})"
    return format_expr(e)


def format_system(sys_: EqnSystem) -> str:
    lines = []
    for d in sys_.decls:
        if isinstance(d.domain, AlphabetDomain):
            dom = "alphabet {" + ", ".join(d.domain.symbols) + "}"
        else:
            dom = "bool" if d.domain == GF2 else "rat"
        suffix = " input" if d.is_input else ""
        lines.append(f"stream {d.name} : {dom}{suffix};")
    for f in sys_.defns:
        if f.kind == "eq":
            lines.append(f"{f.name} = {format_expr(f.rhs)};")
        elif isinstance(f.rhs, MixExpr):
            lines.append(f"{f.name} in mix({format_expr(f.rhs.left)}, "
                         f"{format_expr(f.rhs.right)});")
        else:
            alts = ", ".join(format_expr(a) for a in f.rhs.alternatives)
            lines.append(f"{f.name} in {{{alts}}};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Static causality analysis

def _dep_delays(e: Union[Expr, SetExpr], conditional: bool = False) -> Dict[str, Tuple[int, bool]]:
    """Min delay (and whether guarded by a conditional) per referenced stream."""

    def merge(acc, new):
        for name, (d, c) in new.items():
            if name not in acc:
                acc[name] = (d, c)
                continue
            od, oc = acc[name]
            if d < od:
                acc[name] = (d, c)
            elif d == od:
                # Conditional only if every minimal-delay occurrence is.
                acc[name] = (d, oc and c)
        return acc

    def shift(m, by):
        return {k: (d + by, c) for k, (d, c) in m.items()}

    if isinstance(e, Lit) or isinstance(e, XAtom):
        return {}
    if isinstance(e, Ref):
        return {e.name: (0, conditional)}
    if isinstance(e, Add):
        return merge(_dep_delays(e.left, conditional), _dep_delays(e.right, conditional))
    if isinstance(e, Mul):
        if isinstance(e.left, XAtom):
            return shift(_dep_delays(e.right, conditional), 1)
        if isinstance(e.right, XAtom):
            return shift(_dep_delays(e.left, conditional), 1)
        return merge(_dep_delays(e.left, conditional), _dep_delays(e.right, conditional))
    if isinstance(e, Scale):
        return _dep_delays(e.operand, conditional)
    if isinstance(e, Cons):
        return shift(_dep_delays(e.operand, conditional), 1)
    if isinstance(e, Ite):
        acc = _dep_delays(e.cond, conditional)
        acc = merge(acc, _dep_delays(e.then, True))
        return merge(acc, _dep_delays(e.other, True))
    if isinstance(e, Not):
        return _dep_delays(e.operand, conditional)
    if isinstance(e, Register):
        return merge(_dep_delays(e.value, conditional), _dep_delays(e.enable, conditional))
    if isinstance(e, SetLit):
        acc: Dict[str, Tuple[int, bool]] = {}
        for a in e.alternatives:
            acc = merge(acc, _dep_delays(a, conditional))
        return acc
    if isinstance(e, MixExpr):
        # The mix realization emits a one only against a strictly earlier
        # input one, so its edges carry delay 1.
        acc = shift(_dep_delays(e.left, conditional), 1)
        return merge(acc, shift(_dep_delays(e.right, conditional), 1))
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class CausalityReport:
    """Outcome of delay inference, loop analysis and the semantic check."""

    verdict: str  # strongly-causal | weakly-causal-only | semantic-check-passed | rejected
    dependency_delays: Dict[str, Dict[str, int]]
    cycles: Tuple[Tuple[Tuple[str, ...], int], ...]
    delay: Optional[int] = None  # min cycle delay for strongly-causal systems
    semantic_depth: Optional[int] = None
    rejected_at: Optional[int] = None
    stuck: Tuple[str, ...] = ()
    semantic_inputs: Optional[Dict[str, Prefix]] = None
    reason: str = ""

    @property
    def is_rejected(self) -> bool:
        return self.verdict == "rejected"

    @property
    def is_strongly_causal(self) -> bool:
        return self.verdict == "strongly-causal"

    def to_json_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "dependency_delays": {k: dict(sorted(v.items()))
                                  for k, v in sorted(self.dependency_delays.items())},
            "cycles": [{"nodes": list(nodes), "delay": d} for nodes, d in self.cycles],
        }
        if self.delay is not None:
            out["delay"] = self.delay
        if self.semantic_depth is not None:
            out["semantic_depth"] = self.semantic_depth
            if self.semantic_inputs is not None:
                out["semantic_inputs"] = {k: p.to_strings()
                                          for k, p in sorted(self.semantic_inputs.items())}
        if self.rejected_at is not None:
            out["rejected_at"] = self.rejected_at
            out["stuck"] = list(self.stuck)
        if self.reason:
            out["reason"] = self.reason
        return out


MAX_REPORTED_CYCLES = 64


def analyze_causality(sys_: EqnSystem, semantic_depth: Optional[int] = None,
                      inputs: Optional[Dict[str, Stream]] = None,
                      seed: int = 0) -> CausalityReport:
    """Static delay/loop analysis, then the bounded semantic check if asked.

    The semantic check is input-relative: it runs on the supplied concrete
    inputs, or on seeded random ones, and the report records both the depth
    and the input prefixes under which it passed.
    """
    graph = nx.DiGraph()
    dep_table: Dict[str, Dict[str, int]] = {}
    defined = set(sys_.defined_names)
    for f in sys_.defns:
        deps = _dep_delays(f.rhs)
        dep_table[f.name] = {t: d for t, (d, _) in sorted(deps.items())}
        graph.add_node(f.name)
        for target, (d, cond) in deps.items():
            if target in defined:
                graph.add_edge(f.name, target, delay=d, conditional=cond)

    # Reported cycle list is capped; the verdict below never relies on it.
    cycles: List[Tuple[Tuple[str, ...], int]] = []
    for nodes in itertools.islice(nx.simple_cycles(graph), MAX_REPORTED_CYCLES):
        pivot = nodes.index(min(nodes))
        nodes = nodes[pivot:] + nodes[:pivot]
        ring = list(nodes) + [nodes[0]]
        total = sum(graph.edges[a, b]["delay"] for a, b in zip(ring, ring[1:]))
        cycles.append((tuple(nodes), total))
    cycles.sort(key=lambda c: (c[1], c[0]))

    # Exact minimum cycle delay: cheapest edge plus the cheapest way back.
    min_cycle_delay: Optional[int] = None
    if graph.number_of_edges():
        dist = dict(nx.all_pairs_dijkstra_path_length(graph, weight="delay"))
        for u, v, data in graph.edges(data=True):
            back = dist.get(v, {}).get(u)
            if back is not None:
                total = data["delay"] + back
                min_cycle_delay = total if min_cycle_delay is None else min(min_cycle_delay, total)

    zero_uncond = nx.DiGraph()
    zero_uncond.add_nodes_from(graph.nodes)
    zero_uncond.add_edges_from(
        (u, v) for u, v, data in graph.edges(data=True)
        if data["delay"] == 0 and not data["conditional"])
    has_unconditional_zero_cycle = not nx.is_directed_acyclic_graph(zero_uncond)
    if min_cycle_delay is None or min_cycle_delay >= 1:
        # Acyclic systems get delay 1 by convention: their elaborated
        # transformer is a constant map, causal at every delay.
        return CausalityReport(
            "strongly-causal", dep_table, tuple(cycles),
            delay=min_cycle_delay if min_cycle_delay is not None else 1)
    if has_unconditional_zero_cycle:
        return CausalityReport(
            "rejected", dep_table, tuple(cycles),
            reason="unconditional zero-delay dependency cycle")
    if semantic_depth is None:
        return CausalityReport("weakly-causal-only", dep_table, tuple(cycles))
    return _semantic_check(sys_, dep_table, tuple(cycles), semantic_depth, inputs, seed)


_UNKNOWN = object()


def _semantic_check(sys_: EqnSystem, dep_table, cycles, depth: int,
                    inputs: Optional[Dict[str, Stream]], seed: int) -> CausalityReport:
    if sys_.has_inclusions:
        return CausalityReport(
            "weakly-causal-only", dep_table, cycles,
            reason="semantic check applies to equation-only systems")
    rng = random.Random(seed)
    input_prefixes: Dict[str, Prefix] = {}
    input_values: Dict[str, list] = {}
    for name in sys_.input_names:
        dom = sys_.decl(name).domain
        if inputs is not None and name in inputs:
            word = tuple(inputs[name].at(k) for k in range(depth))
        else:
            word = tuple(random_letter(dom, rng) for _ in range(depth))
        input_prefixes[name] = Prefix(dom, word)
        input_values[name] = list(word)

    known: Dict[Tuple[str, int], object] = {}
    rhs = {f.name: f.rhs for f in sys_.defns}
    domains = {d.name: d.domain for d in sys_.decls}

    def get(name: str, j: int):
        if name in input_values:
            return input_values[name][j] if j < depth else _UNKNOWN
        return known.get((name, j), _UNKNOWN)

    for j in range(depth):
        pending = set(sys_.defined_names)
        while pending:
            progress = False
            for name in sorted(pending):
                v = _eval_partial(rhs[name], j, get, domains[name])
                if v is not _UNKNOWN:
                    known[(name, j)] = v
                    pending.discard(name)
                    progress = True
            if not progress:
                return CausalityReport(
                    "rejected", dep_table, cycles,
                    semantic_depth=depth, rejected_at=j,
                    stuck=tuple(sorted(pending)),
                    semantic_inputs=input_prefixes,
                    reason=f"coefficients unresolvable at position {j}")
    return CausalityReport(
        "semantic-check-passed", dep_table, cycles,
        semantic_depth=depth, semantic_inputs=input_prefixes)


def _eval_partial(e: Expr, j: int, get, dom: Domain):
    """Positionwise evaluation returning _UNKNOWN when inputs are missing.

    A known condition selects its branch without looking at the other one
    (the SAL trick), and convolution terms vanish against known zeros.
    """
    if isinstance(e, Lit):
        if dom.is_field:
            return e.value if j == 0 else dom.zero
        return e.value
    if isinstance(e, Ref):
        return get(e.name, j)
    if isinstance(e, XAtom):
        return dom.one if j == 1 else dom.zero
    if isinstance(e, Add):
        a = _eval_partial(e.left, j, get, dom)
        b = _eval_partial(e.right, j, get, dom)
        if a is _UNKNOWN or b is _UNKNOWN:
            return _UNKNOWN
        return dom.add(a, b)
    if isinstance(e, Mul):
        total = dom.zero
        for i in range(j + 1):
            a = _eval_partial(e.left, i, get, dom)
            b = _eval_partial(e.right, j - i, get, dom)
            if a is not _UNKNOWN and dom.is_zero(a):
                continue
            if b is not _UNKNOWN and dom.is_zero(b):
                continue
            if a is _UNKNOWN or b is _UNKNOWN:
                return _UNKNOWN
            total = dom.add(total, dom.mul(a, b))
        return total
    if isinstance(e, Scale):
        v = _eval_partial(e.operand, j, get, dom)
        return _UNKNOWN if v is _UNKNOWN else dom.mul(e.factor, v)
    if isinstance(e, Cons):
        if j == 0:
            return e.head.value
        return _eval_partial(e.operand, j - 1, get, dom)
    if isinstance(e, Ite):
        c = _eval_partial(e.cond, j, get, GF2)
        if c is _UNKNOWN:
            return _UNKNOWN
        branch = e.then if c == 1 else e.other
        return _eval_partial(branch, j, get, dom)
    if isinstance(e, Not):
        v = _eval_partial(e.operand, j, get, GF2)
        return _UNKNOWN if v is _UNKNOWN else (v + 1) & 1
    if isinstance(e, Register):
        en = _eval_partial(e.enable, j, get, GF2)
        if en is _UNKNOWN:
            return _UNKNOWN
        if en == 1:
            return _eval_partial(e.value, j, get, dom)
        if j == 0:
            return e.init.value
        return _eval_partial(e, j - 1, get, dom)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Elaboration

def _eval_total(e: Expr, j: int, get, dom: Domain):
    """Positionwise evaluation; ``get(name, j)`` resolves stream references."""
    if isinstance(e, Lit):
        if dom.is_field:
            return e.value if j == 0 else dom.zero
        return e.value
    if isinstance(e, Ref):
        return get(e.name, j)
    if isinstance(e, XAtom):
        return dom.one if j == 1 else dom.zero
    if isinstance(e, Add):
        return dom.add(_eval_total(e.left, j, get, dom), _eval_total(e.right, j, get, dom))
    if isinstance(e, Mul):
        total = dom.zero
        for i in range(j + 1):
            a = _eval_total(e.left, i, get, dom)
            if dom.is_zero(a):
                continue
            b = _eval_total(e.right, j - i, get, dom)
            total = dom.add(total, dom.mul(a, b))
        return total
    if isinstance(e, Scale):
        return dom.mul(e.factor, _eval_total(e.operand, j, get, dom))
    if isinstance(e, Cons):
        return e.head.value if j == 0 else _eval_total(e.operand, j - 1, get, dom)
    if isinstance(e, Ite):
        c = _eval_total(e.cond, j, get, GF2)
        return _eval_total(e.then if c == 1 else e.other, j, get, dom)
    if isinstance(e, Not):
        return (_eval_total(e.operand, j, get, GF2) + 1) & 1
    if isinstance(e, Register):
        if _eval_total(e.enable, j, get, GF2) == 1:
            return _eval_total(e.value, j, get, dom)
        return e.init.value if j == 0 else _eval_total(e, j - 1, get, dom)
    raise TypeError(f"not an expression: {e!r}")


def evaluate_straight_line(sys_: EqnSystem, inputs: Dict[str, Stream]) -> Dict[str, Stream]:
    """Direct stream-kernel evaluation of a cycle-free, equation-only system."""
    rhs = {f.name: f.rhs for f in sys_.defns}
    domains = {d.name: d.domain for d in sys_.decls}
    cache: Dict[str, Stream] = dict(inputs)

    def stream_for(name: str) -> Stream:
        if name not in cache:
            expr = rhs[name]
            dom = domains[name]
            cache[name] = Stream(dom, lambda j, e=expr, d=dom: _eval_total(e, j, get, d),
                                 name=name)
        return cache[name]

    def get(name: str, j: int):
        return stream_for(name).at(j)

    return {name: stream_for(name) for name in sys_.defined_names}


class ElaboratedSystem:
    """A parsed system recast as one vector-valued transformer.

    The defined streams become the components of a tuple-valued state; input
    streams are parameters bound when the transformer is built.  Strongly
    causal equation systems elaborate to the solution map (the feedback
    closure of the one-step transformer, a constant and therefore everywhere
    consistent word function); systems with inclusions elaborate to a
    windowed branch function; weakly causal systems elaborate at delay zero
    for diagnosis only.
    """

    def __init__(self, system: EqnSystem, report: CausalityReport):
        if report.is_rejected:
            raise RejectedSystemError(f"system rejected: {report.reason}")
        self.system = system
        self.report = report
        self.defined_names = system.defined_names
        self.input_names = system.input_names
        self._domains = {d.name: d.domain for d in system.decls}
        self.domain = product(*[self._domains[n] for n in self.defined_names])
        if report.is_strongly_causal:
            self.kind = "ndet" if system.has_inclusions else "det"
            self.delay = report.delay
        else:
            self.kind = "weak"
            self.delay = 0
        self._index = {n: i for i, n in enumerate(self.defined_names)}

    def _component(self, letter, name: str):
        if len(self.defined_names) == 1:
            return letter
        return letter[self._index[name]]

    def _letter(self, values: Dict[str, object]):
        if len(self.defined_names) == 1:
            return values[self.defined_names[0]]
        return tuple(values[n] for n in self.defined_names)

    def component_prefix(self, p: Prefix, name: str) -> Prefix:
        """Project one defined stream out of a solution prefix."""
        dom = self._domains[name]
        return Prefix(dom, tuple(self._component(v, name) for v in p.word))

    def _bind_inputs(self, inputs: Optional[Dict[str, Stream]]) -> Dict[str, Stream]:
        inputs = dict(inputs or {})
        missing = [n for n in self.input_names if n not in inputs]
        if missing:
            raise RejectedSystemError(f"unbound input streams: {', '.join(missing)}")
        for name, stream in inputs.items():
            if name not in self.input_names:
                raise RejectedSystemError(f"{name!r} is not an input stream")
            if stream.domain != self._domains[name]:
                raise RejectedSystemError(f"input {name!r} has the wrong domain")
        return inputs

    def transformer(self, inputs: Optional[Dict[str, Stream]] = None):
        """The solving form: feedback closure (det/ndet) or one-step (weak).

        Branch sets of the closure are run prefixes of the system, constant
        in the history argument, so the declared delay holds by construction
        and membership search enumerates exactly the system's solutions.
        """
        inputs = self._bind_inputs(inputs)
        if self.kind == "det":
            return self._solution_map(inputs)
        if self.kind == "ndet":
            return self._window_ndet(inputs)
        return self._step_ndet(inputs, 0)

    def step_transformer(self, inputs: Optional[Dict[str, Stream]] = None):
        """The faithful per-step image: right-hand sides applied to the
        history, nondeterminism expanded alternative by alternative.

        This is the transformer whose strongest-post fixpoint saturates the
        way the set-transformer calculus expects; its word function is only
        consistent along histories that follow the equations.
        """
        inputs = self._bind_inputs(inputs)
        return self._step_ndet(inputs, self.delay)

    # -- strongly causal equations: the solution map ------------------------

    def _solution_map(self, inputs: Dict[str, Stream]) -> DetTransformer:
        rhs = {f.name: f.rhs for f in self.system.defns}
        memo: Dict[Tuple[str, int], object] = {}
        running: set = set()

        def get(name: str, j: int):
            if name in inputs:
                return inputs[name].at(j)
            key = (name, j)
            if key in memo:
                return memo[key]
            if key in running:
                raise RejectedSystemError(
                    f"zero-delay dependency surfaced at {name}[{j}]")
            running.add(key)
            try:
                v = _eval_total(rhs[name], j, get, self._domains[name])
            finally:
                running.discard(key)
            memo[key] = v
            return v

        def word_fn(p: Prefix) -> Prefix:
            n = len(p) + self.delay
            word = tuple(self._letter({s: get(s, j) for s in self.defined_names})
                         for j in range(n))
            return Prefix(self.domain, word)

        return DetTransformer(self.domain, self.domain, self.delay, word_fn,
                              name="system")

    # -- strongly causal systems with inclusions ----------------------------

    def _window_ndet(self, inputs: Dict[str, Stream]) -> NDetTransformer:
        det_rhs = {f.name: f.rhs for f in self.system.defns if f.kind == "eq"}
        incl_rhs = {f.name: f.rhs for f in self.system.defns if f.kind == "in"}
        setlit = {n: se for n, se in incl_rhs.items() if isinstance(se, SetLit)}
        mixes = {n: se for n, se in incl_rhs.items() if isinstance(se, MixExpr)}
        delta = self.delay
        domains = self._domains

        def env_from_word(w: Prefix):
            def get(name: str, j: int):
                if name in inputs:
                    return inputs[name].at(j)
                return self._component(w[j], name)
            return get

        def member(p: Prefix, w: Prefix) -> bool:
            # Fixpoint-window check: every component of w follows its
            # definition positionwise, references resolving inside w.
            get = env_from_word(w)
            for name, expr in det_rhs.items():
                for j in range(len(w)):
                    if self._component(w[j], name) != _eval_total(expr, j, get, domains[name]):
                        return False
            for name, se in setlit.items():
                if not any(
                    all(self._component(w[j], name) == _eval_total(alt, j, get, domains[name])
                        for j in range(len(w)))
                    for alt in se.alternatives
                ):
                    return False
            for name, se in mixes.items():
                from .transformers import mix_word_ok

                fw = tuple(_eval_total(se.left, j, get, GF2) for j in range(max(0, len(w) - 1)))
                gw = tuple(_eval_total(se.right, j, get, GF2) for j in range(max(0, len(w) - 1)))
                word = tuple(self._component(w[j], name) for j in range(len(w)))
                if not mix_word_ok(fw, gw, word):
                    return False
            return True

        def letters(p: Prefix):
            L = len(p)

            def history_get(name: str, j: int):
                if name in inputs:
                    return inputs[name].at(j)
                if j < L:
                    return self._component(p[j], name)
                raise KeyError((name, j))

            viable: Dict[str, list] = {}
            for name, se in setlit.items():
                dom = domains[name]
                alts = []
                for alt in se.alternatives:
                    try:
                        if all(self._component(p[j], name) == _eval_total(alt, j, history_get, dom)
                               for j in range(L)):
                            alts.append(alt)
                    except KeyError:
                        continue
                viable[name] = alts
            mix_allowed: Dict[str, list] = {}
            for name, se in mixes.items():
                emitted = sum(1 for j in range(L) if self._component(p[j], name) == 1)
                received = sum(1 for j in range(L)
                               if _eval_total(se.left, j, history_get, GF2) == 1) \
                    + sum(1 for j in range(L)
                          if _eval_total(se.right, j, history_get, GF2) == 1)
                mix_allowed[name] = [0] + ([1] if emitted + 1 <= received else [])

            names_sl = sorted(viable)
            names_mx = sorted(mix_allowed)
            letters_out = []
            seen = set()
            for combo in itertools.product(*(viable[n] for n in names_sl)):
                for bits in itertools.product(*(mix_allowed[n] for n in names_mx)):
                    chosen = dict(zip(names_sl, combo))
                    bit_of = dict(zip(names_mx, bits))
                    cache: Dict[str, object] = {}

                    def get(name: str, j: int):
                        if name in inputs:
                            return inputs[name].at(j)
                        if j < L:
                            return self._component(p[j], name)
                        if j > L:
                            raise KeyError((name, j))
                        if name in cache:
                            return cache[name]
                        if name in bit_of:
                            v = bit_of[name]
                        elif name in chosen:
                            v = _eval_total(chosen[name], L, get, domains[name])
                        else:
                            v = _eval_total(det_rhs[name], L, get, domains[name])
                        cache[name] = v
                        return v

                    try:
                        letter = self._letter({n: get(n, L) for n in self.defined_names})
                    except KeyError:
                        continue
                    if letter not in seen:
                        seen.add(letter)
                        letters_out.append(letter)
            return letters_out

        # The branch image is the set of run prefixes of the system, which
        # does not depend on the history argument at all: like the solution
        # map in the deterministic case, the windowed transformer is the
        # feedback closure, causal at the declared delay by construction.
        # Runs can multiply with mix choices, so solver paths use the
        # letters/member hooks instead of materializing this.
        run_levels: List[List[Prefix]] = [[Prefix(self.domain, ())]]

        def runs_to(n: int) -> List[Prefix]:
            while len(run_levels) <= n:
                nxt = []
                for r in run_levels[-1]:
                    for letter in letters(r):
                        nxt.append(r.append(letter))
                run_levels.append(nxt)
            return run_levels[n]

        def branch(p: Prefix) -> PrefixSet:
            out_len = len(p) + delta
            return PrefixSet.of(self.domain, out_len, runs_to(out_len))

        branching = 1
        for se in setlit.values():
            branching *= len(se.alternatives)
        branching *= 2 ** len(mixes)
        return NDetTransformer(self.domain, self.domain, delta, branch,
                               branching=branching, name="system",
                               member_fn=member, letters_fn=letters)

    # -- per-step image (delta = 0 serves weakly causal diagnosis) ----------

    def _step_ndet(self, inputs: Dict[str, Stream], delta: int) -> NDetTransformer:
        det_rhs = {f.name: f.rhs for f in self.system.defns if f.kind == "eq"}
        incl_rhs = {f.name: f.rhs for f in self.system.defns if f.kind == "in"}
        setlit = {n: se for n, se in incl_rhs.items() if isinstance(se, SetLit)}
        mixes = {n: se for n, se in incl_rhs.items() if isinstance(se, MixExpr)}
        domains = self._domains

        def make_get(p: Prefix, chosen: Dict[str, Expr], bits: Dict[str, Tuple[int, ...]]):
            """References below len(p) read the history; window positions are
            chased through definitions, alternatives and mix choices."""
            m = len(p)

            def get(name: str, j: int):
                if name in inputs:
                    return inputs[name].at(j)
                if j < m:
                    return self._component(p[j], name)
                if name in bits:
                    return bits[name][j - m]
                if name in chosen:
                    return _eval_total(chosen[name], j, get, domains[name])
                return _eval_total(det_rhs[name], j, get, domains[name])

            return get

        def component_value(name: str, j: int, get, chosen, bits, m: int):
            if name in mixes:
                return bits[name][j - m] if j >= m else _mix_step_value(name, j, get)
            if name in setlit:
                alt = chosen[name]
                return _eval_total(alt, j, get, domains[name])
            return _eval_total(det_rhs[name], j, get, domains[name])

        def _mix_step_value(name, j, get):
            raise AssertionError("mix history positions are enumerated, not derived")

        def branch(p: Prefix) -> PrefixSet:
            m = len(p)
            out_len = m + delta
            members = set()
            from .transformers import mix_words

            for combo in itertools.product(*(se.alternatives for se in
                                             (setlit[n] for n in sorted(setlit)))):
                chosen = dict(zip(sorted(setlit), combo))
                # Mix components range over all admissible emission words of
                # the full output length; their arguments are evaluated in an
                # environment without mix choices (mix edges are delayed, so
                # argument positions stay below the emission tick).
                mix_pools = []
                for name in sorted(mixes):
                    se = mixes[name]
                    get0 = make_get(p, chosen, {})
                    fw = tuple(_eval_total(se.left, j, get0, GF2)
                               for j in range(max(0, out_len - 1)))
                    gw = tuple(_eval_total(se.right, j, get0, GF2)
                               for j in range(max(0, out_len - 1)))
                    mix_pools.append(mix_words(fw, gw, out_len))
                for mix_combo in itertools.product(*mix_pools):
                    mix_full = dict(zip(sorted(mixes), mix_combo))
                    bits = {n: w[m:] for n, w in mix_full.items()}
                    get = make_get(p, chosen, bits)
                    word = []
                    for j in range(out_len):
                        values = {}
                        for n in self.defined_names:
                            if n in mixes:
                                values[n] = mix_full[n][j]
                            elif n in setlit:
                                values[n] = _eval_total(chosen[n], j, get, domains[n])
                            else:
                                values[n] = _eval_total(det_rhs[n], j, get, domains[n])
                        word.append(self._letter(values))
                    members.add(Prefix(self.domain, tuple(word)))
            return PrefixSet.of(self.domain, out_len, members)

        def member(p: Prefix, w: Prefix) -> bool:
            from .transformers import mix_word_ok

            mix_hist = {n: tuple(self._component(w[j], n) for j in range(len(w)))
                        for n in mixes}
            for combo in itertools.product(*(se.alternatives for se in
                                             (setlit[n] for n in sorted(setlit)))):
                chosen = dict(zip(sorted(setlit), combo))
                bits = {n: mix_hist[n][len(p):] for n in mixes}
                get = make_get(p, chosen, bits)
                ok = True
                for name, expr in det_rhs.items():
                    if not all(self._component(w[j], name)
                               == _eval_total(expr, j, get, domains[name])
                               for j in range(len(w))):
                        ok = False
                        break
                if ok:
                    for name, se in setlit.items():
                        if not all(self._component(w[j], name)
                                   == _eval_total(chosen[name], j, get, domains[name])
                                   for j in range(len(w))):
                            ok = False
                            break
                if ok:
                    for name, se in mixes.items():
                        fw = tuple(_eval_total(se.left, j, get, GF2)
                                   for j in range(max(0, len(w) - 1)))
                        gw = tuple(_eval_total(se.right, j, get, GF2)
                                   for j in range(max(0, len(w) - 1)))
                        if not mix_word_ok(fw, gw, mix_hist[name]):
                            ok = False
                            break
                if ok:
                    return True
            return False

        branching = 1
        for se in setlit.values():
            branching *= len(se.alternatives)
        branching *= 2 ** len(mixes)
        return NDetTransformer(self.domain, self.domain, delta, branch,
                               branching=branching, name="system-step",
                               member_fn=member)

    # -- solving -------------------------------------------------------------

    def solve(self, depth: int, strategy=None, inputs: Optional[Dict[str, Stream]] = None,
              samples: int = 64, seed: int = 0):
        """Route to the solver appropriate for the causality verdict."""
        from .solver import SolveResult, Strategy, diagnose_nonexpansive, solve_det, solve_inclusion
        from .metric import Dyadic

        T = self.transformer(inputs)
        if self.kind == "det":
            return solve_det(T, depth)
        if self.kind == "ndet":
            return solve_inclusion(T, depth, strategy or Strategy.first())
        diagnosis = diagnose_nonexpansive(T, depth, samples=samples, seed=seed)
        if diagnosis.found_fixpoint():
            return SolveResult(prefixes=(diagnosis.prefix,), depth=depth,
                               certificate=Dyadic.at_most(depth), iterations=0,
                               status="ok")
        return SolveResult(prefixes=(), depth=depth,
                           certificate=Dyadic.at_most(depth), iterations=0,
                           status="no-solution")

    def diagnose(self, depth: int, samples: int = 64, seed: int = 0,
                 inputs: Optional[Dict[str, Stream]] = None):
        from .solver import diagnose_nonexpansive

        return diagnose_nonexpansive(self.transformer(inputs), depth,
                                     samples=samples, seed=seed)


def elaborate(sys_: EqnSystem) -> ElaboratedSystem:
    """Recast a parsed system as a single vector-valued transformer."""
    return ElaboratedSystem(sys_, analyze_causality(sys_))
