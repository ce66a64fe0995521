"""Expression trees for PDE residuals: parsing, canonicalization, serialization.

The surface grammar accepts both subscript notation (u_t, u_xx) and operator
notation (du/dt, d2u/dx2), infix + - * / ^, parentheses and the function set
{sin, cos, exp, log}.  An equation "lhs = rhs" parses to the residual lhs - rhs.
The interchange form used on module boundaries is a prefix (s-expression)
string, e.g. "(+ (dt 1 (var u)) (* -0.01 (d x 2 (var u))))".
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ExprSyntaxError, UnknownSymbolError

KIND_NUM = "num"
KIND_CONST = "const"
KIND_VAR = "var"
KIND_TIME = "dt"
KIND_SPACE = "d"
KIND_FUNC = "func"
KIND_POW = "pow"
KIND_PROD = "prod"
KIND_SUM = "sum"

FUNCTIONS = ("sin", "cos", "exp", "log")

# leaves first, then unary, then the composite kinds; drives canonical ordering
_KIND_RANK = {
    KIND_NUM: 0,
    KIND_CONST: 1,
    KIND_VAR: 2,
    KIND_TIME: 3,
    KIND_SPACE: 4,
    KIND_FUNC: 5,
    KIND_POW: 6,
    KIND_PROD: 7,
    KIND_SUM: 8,
}


@dataclass(frozen=True)
class ExprTree:
    kind: str
    children: tuple["ExprTree", ...] = ()
    name: str = ""    # symbol / function name, or axis for spatial derivatives
    value: float = 0.0
    order: int = 0    # derivative order

    def __post_init__(self):
        if self.kind in (KIND_SUM, KIND_PROD) and len(self.children) < 2:
            raise ValueError(f"{self.kind} node needs >= 2 children")
        if self.kind in (KIND_TIME, KIND_SPACE):
            if len(self.children) != 1:
                raise ValueError("derivative node needs exactly 1 child")
            if self.order < 1:
                raise ValueError("derivative order must be >= 1")
        if self.kind == KIND_POW and len(self.children) != 2:
            raise ValueError("pow node needs exactly 2 children")
        if self.kind == KIND_FUNC and len(self.children) != 1:
            raise ValueError("function node needs exactly 1 child")
        if self.kind in (KIND_NUM, KIND_CONST, KIND_VAR) and self.children:
            raise ValueError("leaf node cannot have children")
        if self.kind == KIND_NUM and not math.isfinite(self.value):
            raise ValueError("numeric literal must be finite")


def num(v: float) -> ExprTree:
    return ExprTree(KIND_NUM, value=float(v))


def var(name: str) -> ExprTree:
    return ExprTree(KIND_VAR, name=name)


def const(name: str) -> ExprTree:
    return ExprTree(KIND_CONST, name=name)


def time_deriv(child: ExprTree, order: int = 1) -> ExprTree:
    return ExprTree(KIND_TIME, (child,), order=order)


def space_deriv(child: ExprTree, axis: str, order: int = 1) -> ExprTree:
    return ExprTree(KIND_SPACE, (child,), name=axis, order=order)


def func(name: str, child: ExprTree) -> ExprTree:
    return ExprTree(KIND_FUNC, (child,), name=name)


def pow_(base: ExprTree, exponent: ExprTree) -> ExprTree:
    return ExprTree(KIND_POW, (base, exponent))


def sum_(*terms: ExprTree) -> ExprTree:
    return ExprTree(KIND_SUM, tuple(terms))


def prod(*factors: ExprTree) -> ExprTree:
    return ExprTree(KIND_PROD, tuple(factors))


def node_count(tree: ExprTree) -> int:
    """Total nodes including leaves."""
    return 1 + sum(node_count(c) for c in tree.children)


def sort_key(tree: ExprTree):
    """Total order on trees: kind rank, then labels, then children recursively."""
    params: tuple = ()
    if tree.kind == KIND_NUM:
        params = (tree.value,)
    elif tree.kind in (KIND_CONST, KIND_VAR, KIND_FUNC):
        params = (tree.name,)
    elif tree.kind == KIND_TIME:
        params = (tree.order,)
    elif tree.kind == KIND_SPACE:
        params = (tree.name, tree.order)
    return (_KIND_RANK[tree.kind], params, tuple(sort_key(c) for c in tree.children))


# ---------------------------------------------------------------------------
# lexer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z][A-Za-z0-9]*)*)
  | (?P<op>\*\*|[-+*/^()=])
  | (?P<ws>\s+)
    """,
    re.VERBOSE,
)

# derivative written in operator notation: "d2u" / "du" over "dx2" / "dt"
_DERIV_NUMER = re.compile(r"^d(\d*)([A-Za-z][A-Za-z0-9]*)$")
_DERIV_DENOM = re.compile(r"^d([A-Za-z])(\d*)$")

_NORMALIZE = str.maketrans({"−": "-", "·": "*", "×": "*", "‸": "^"})


@dataclass
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int


def _lex(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tok_kind = m.lastgroup
            tok_text = "^" if m.group(0) == "**" else m.group(0)
            tokens.append(_Token(tok_kind, tok_text, pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over the fixed token set."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError(f"expected {op!r}", tok.pos)
        return self.advance()

    def parse(self) -> ExprTree:
        expr = self.parse_sum()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "=":
            self.advance()
            rhs = self.parse_sum()
            expr = sum_(expr, prod(num(-1.0), rhs))
            tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)
        return expr

    def parse_sum(self) -> ExprTree:
        sign = 1.0
        tok = self.peek()
        while tok.kind == "op" and tok.text in "+-":
            if tok.text == "-":
                sign = -sign
            self.advance()
            tok = self.peek()
        node = self.parse_term()
        if sign < 0:
            node = prod(num(-1.0), node)
        terms = [node]
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                negate = tok.text == "-"
                self.advance()
                rhs = self.parse_term()
                terms.append(prod(num(-1.0), rhs) if negate else rhs)
            else:
                break
        return terms[0] if len(terms) == 1 else sum_(*terms)

    def parse_term(self) -> ExprTree:
        factors = [self.parse_power()]
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                divide = tok.text == "/"
                self.advance()
                rhs = self.parse_power()
                factors.append(pow_(rhs, num(-1.0)) if divide else rhs)
            else:
                break
        return factors[0] if len(factors) == 1 else prod(*factors)

    def parse_power(self) -> ExprTree:
        base = self.parse_unary()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.parse_power()  # right associative
            return pow_(base, exponent)
        return base

    def parse_unary(self) -> ExprTree:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            inner = self.parse_unary()
            return prod(num(-1.0), inner) if tok.text == "-" else inner
        return self.parse_primary()

    def parse_primary(self) -> ExprTree:
        tok = self.advance()
        if tok.kind == "num":
            return num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            inner = self.parse_sum()
            self.expect_op(")")
            return inner
        if tok.kind == "ident":
            return self.parse_ident(tok)
        raise ExprSyntaxError(f"expected expression, found {tok.text or 'end of input'!r}", tok.pos)

    def parse_ident(self, tok: _Token) -> ExprTree:
        name = tok.text
        if name in FUNCTIONS:
            nxt = self.peek()
            if not (nxt.kind == "op" and nxt.text == "("):
                raise ExprSyntaxError(f"function {name!r} needs an argument list", nxt.pos)
            self.advance()
            inner = self.parse_sum()
            self.expect_op(")")
            return func(name, inner)
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "(":
            raise UnknownSymbolError(name, tok.pos)
        numer = _DERIV_NUMER.match(name)
        if numer and nxt.kind == "op" and nxt.text == "/":
            after = self.tokens[self.i + 1]
            if after.kind == "ident" and after.text.startswith("d"):
                # committed derivative syntax: dKu / dAxisK
                self.advance()
                self.advance()
                return self._operator_derivative(tok, numer, after)
        if "_" in name:
            return self._subscript_derivative(tok)
        return ExprTree(KIND_CONST, name=name)  # var/const resolved after parse

    def _operator_derivative(self, numer_tok: _Token, numer: re.Match, denom_tok: _Token) -> ExprTree:
        denom = _DERIV_DENOM.match(denom_tok.text)
        if not denom:
            raise ExprSyntaxError("malformed derivative denominator", denom_tok.pos + 1)
        target = numer.group(2)
        top_order = int(numer.group(1)) if numer.group(1) else 1
        axis = denom.group(1)
        bottom_order = int(denom.group(2)) if denom.group(2) else 1
        if top_order != bottom_order:
            raise ExprSyntaxError(
                f"derivative order mismatch: d{numer.group(1)}{target} vs {denom_tok.text}",
                denom_tok.pos,
            )
        leaf = ExprTree(KIND_CONST, name=target)
        if axis == "t":
            return time_deriv(leaf, top_order)
        return space_deriv(leaf, axis, top_order)

    def _subscript_derivative(self, tok: _Token) -> ExprTree:
        base, _, subscript = tok.text.partition("_")
        if "_" in subscript or not subscript:
            raise ExprSyntaxError(f"malformed subscript in {tok.text!r}", tok.pos)
        if not subscript.isalpha():
            raise ExprSyntaxError(f"subscript must be axis letters in {tok.text!r}", tok.pos)
        node = ExprTree(KIND_CONST, name=base)
        # group consecutive equal letters into one derivative of that order
        i = 0
        while i < len(subscript):
            j = i
            while j < len(subscript) and subscript[j] == subscript[i]:
                j += 1
            order = j - i
            if subscript[i] == "t":
                node = time_deriv(node, order)
            else:
                node = space_deriv(node, subscript[i], order)
            i = j
        return node


def _differentiated_names(tree: ExprTree, acc: set[str]):
    if tree.kind in (KIND_TIME, KIND_SPACE):
        inner = tree.children[0]
        while inner.kind in (KIND_TIME, KIND_SPACE):
            inner = inner.children[0]
        if inner.kind in (KIND_CONST, KIND_VAR):
            acc.add(inner.name)
    for c in tree.children:
        _differentiated_names(c, acc)


def _resolve_symbols(tree: ExprTree, variables: set[str]) -> ExprTree:
    if tree.kind == KIND_CONST and tree.name in variables:
        return ExprTree(KIND_VAR, name=tree.name)
    if not tree.children:
        return tree
    return ExprTree(
        tree.kind,
        tuple(_resolve_symbols(c, variables) for c in tree.children),
        name=tree.name,
        value=tree.value,
        order=tree.order,
    )


def parse(text: str, variables: set[str] | None = None) -> ExprTree:
    """Parse an infix PDE expression into a raw tree.

    Symbols that appear under a derivative anywhere in the expression become
    variables; everything else is a named constant.  ``variables`` forces extra
    names to variable kind (used for boundary/initial expressions that mention
    the field without differentiating it).
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    tree = _Parser(text.translate(_NORMALIZE)).parse()
    names: set[str] = set(variables or ())
    _differentiated_names(tree, names)
    return _resolve_symbols(tree, names)


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------


def _split_coefficient(term: ExprTree) -> tuple[float, ExprTree | None]:
    """Term -> (numeric coefficient, canonical non-numeric factor or None)."""
    if term.kind == KIND_NUM:
        return term.value, None
    if term.kind == KIND_PROD:
        coeff = 1.0
        rest = []
        for c in term.children:
            if c.kind == KIND_NUM:
                coeff *= c.value
            else:
                rest.append(c)
        if not rest:
            return coeff, None
        if len(rest) == 1:
            return coeff, rest[0]
        return coeff, ExprTree(KIND_PROD, tuple(sorted(rest, key=sort_key)))
    return 1.0, term


def _rebuild_term(coeff: float, factor: ExprTree | None) -> ExprTree | None:
    if coeff == 0.0:
        return None
    if factor is None:
        return num(coeff)
    if coeff == 1.0:
        return factor
    parts = [num(coeff)]
    parts.extend(factor.children if factor.kind == KIND_PROD else (factor,))
    return ExprTree(KIND_PROD, tuple(sorted(parts, key=sort_key)))


def _canon_derivative_chain(tree: ExprTree) -> ExprTree:
    time_order = 0
    space_orders: dict[str, int] = {}
    node = tree
    while node.kind in (KIND_TIME, KIND_SPACE):
        if node.kind == KIND_TIME:
            time_order += node.order
        else:
            space_orders[node.name] = space_orders.get(node.name, 0) + node.order
        node = node.children[0]
    rebuilt = node
    for axis in sorted(space_orders, reverse=True):
        rebuilt = space_deriv(rebuilt, axis, space_orders[axis])
    if time_order:
        rebuilt = time_deriv(rebuilt, time_order)
    return rebuilt


def canonicalize(tree: ExprTree) -> ExprTree:
    """Normalize to the fixed canonical form (idempotent).

    Sorts commutative children, folds numeric literals, merges like terms,
    drops zero terms, collapses derivative chains into a fixed nesting order.
    """
    children = tuple(canonicalize(c) for c in tree.children)

    if tree.kind == KIND_NUM:
        v = tree.value
        return num(0.0) if v == 0.0 else num(v)

    if tree.kind in (KIND_CONST, KIND_VAR):
        return tree

    if tree.kind in (KIND_TIME, KIND_SPACE):
        node = ExprTree(tree.kind, children, name=tree.name, order=tree.order)
        return _canon_derivative_chain(node)

    if tree.kind == KIND_FUNC:
        return ExprTree(KIND_FUNC, children, name=tree.name)

    if tree.kind == KIND_POW:
        base, exponent = children
        if base.kind == KIND_NUM and exponent.kind == KIND_NUM:
            try:
                folded = base.value ** exponent.value
            except (OverflowError, ZeroDivisionError, ValueError):
                folded = None
            if folded is not None and isinstance(folded, float) and math.isfinite(folded):
                return num(folded)
        if exponent.kind == KIND_NUM:
            if exponent.value == 1.0:
                return base
            if exponent.value == 0.0:
                return num(1.0)
        return ExprTree(KIND_POW, (base, exponent))

    if tree.kind == KIND_PROD:
        flat: list[ExprTree] = []
        for c in children:
            flat.extend(c.children if c.kind == KIND_PROD else (c,))
        coeff = 1.0
        rest = []
        for c in flat:
            if c.kind == KIND_NUM:
                coeff *= c.value
            else:
                rest.append(c)
        if coeff == 0.0:
            return num(0.0)
        if not rest:
            return num(coeff)
        if len(rest) == 1 and rest[0].kind == KIND_SUM and coeff != 1.0:
            # numeric coefficient distributes over a sum, so that subtraction
            # of a parenthesized sum normalizes to negated terms
            distributed = ExprTree(
                KIND_SUM, tuple(prod(num(coeff), term) for term in rest[0].children)
            )
            return canonicalize(distributed)
        if coeff == 1.0:
            if len(rest) == 1:
                return rest[0]
            return ExprTree(KIND_PROD, tuple(sorted(rest, key=sort_key)))
        return ExprTree(KIND_PROD, tuple(sorted([num(coeff)] + rest, key=sort_key)))

    if tree.kind == KIND_SUM:
        flat = []
        for c in children:
            flat.extend(c.children if c.kind == KIND_SUM else (c,))
        constant = 0.0
        groups: dict[ExprTree, float] = {}
        order_seen: list[ExprTree] = []
        for term in flat:
            coeff, factor = _split_coefficient(term)
            if factor is None:
                constant += coeff
                continue
            if factor not in groups:
                order_seen.append(factor)
            groups[factor] = groups.get(factor, 0.0) + coeff
        terms = []
        for factor in order_seen:
            rebuilt = _rebuild_term(groups[factor], factor)
            if rebuilt is not None:
                terms.append(rebuilt)
        if constant != 0.0:
            terms.append(num(constant))
        if not terms:
            return num(0.0)
        if len(terms) == 1:
            return terms[0]
        return ExprTree(KIND_SUM, tuple(sorted(terms, key=sort_key)))

    raise ValueError(f"unknown node kind {tree.kind}")  # pragma: no cover


# ---------------------------------------------------------------------------
# prefix (interchange) serialization
# ---------------------------------------------------------------------------


def to_prefix(tree: ExprTree) -> str:
    if tree.kind == KIND_NUM:
        return repr(tree.value)
    if tree.kind == KIND_VAR:
        return f"(var {tree.name})"
    if tree.kind == KIND_CONST:
        return f"(const {tree.name})"
    if tree.kind == KIND_TIME:
        return f"(dt {tree.order} {to_prefix(tree.children[0])})"
    if tree.kind == KIND_SPACE:
        return f"(d {tree.name} {tree.order} {to_prefix(tree.children[0])})"
    if tree.kind == KIND_FUNC:
        return f"({tree.name} {to_prefix(tree.children[0])})"
    if tree.kind == KIND_POW:
        return f"(^ {to_prefix(tree.children[0])} {to_prefix(tree.children[1])})"
    head = "+" if tree.kind == KIND_SUM else "*"
    return f"({head} {' '.join(to_prefix(c) for c in tree.children)})"


_SEXPR_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def from_prefix(text: str) -> ExprTree:
    """Parse the interchange prefix form back into a tree."""
    tokens = _SEXPR_TOKEN.findall(text)
    if not tokens:
        raise ExprSyntaxError("empty prefix expression", 0)
    pos = 0

    def read() -> ExprTree:
        nonlocal pos
        if pos >= len(tokens):
            raise ExprSyntaxError("unexpected end of prefix expression", len(text))
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ExprSyntaxError("unexpected ')'", 0)
        if tok != "(":
            try:
                return num(float(tok))
            except ValueError:
                raise ExprSyntaxError(f"bare atom {tok!r} (only numbers may be bare)", 0) from None
        head = tokens[pos]
        pos += 1
        args: list[str | ExprTree] = []
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "(" or _is_number(tokens[pos]):
                args.append(read())
            else:
                args.append(tokens[pos])
                pos += 1
        if pos >= len(tokens):
            raise ExprSyntaxError("missing ')'", len(text))
        pos += 1  # consume ')'
        return _build(head, args)

    def _build(head: str, args: list) -> ExprTree:
        if head == "var":
            return var(_atom(args, 0))
        if head == "const":
            return const(_atom(args, 0))
        if head == "dt":
            return time_deriv(_tree(args, 1), int(_atom(args, 0)))
        if head == "d":
            return space_deriv(_tree(args, 2), _atom(args, 0), int(_atom(args, 1)))
        if head in FUNCTIONS:
            return func(head, _tree(args, 0))
        if head == "^":
            return pow_(_tree(args, 0), _tree(args, 1))
        if head == "+":
            return sum_(*[_require_tree(a) for a in args])
        if head == "*":
            return prod(*[_require_tree(a) for a in args])
        raise ExprSyntaxError(f"unknown prefix head {head!r}", 0)

    def _atom(args: list, i: int) -> str:
        if i >= len(args):
            raise ExprSyntaxError("missing argument in prefix expression", 0)
        a = args[i]
        if isinstance(a, ExprTree):
            if a.kind == KIND_NUM and a.value == int(a.value):
                return str(int(a.value))
            raise ExprSyntaxError("expected atom in prefix expression", 0)
        return a

    def _tree(args: list, i: int) -> ExprTree:
        if i >= len(args):
            raise ExprSyntaxError("missing argument in prefix expression", 0)
        return _require_tree(args[i])

    def _require_tree(a) -> ExprTree:
        if isinstance(a, ExprTree):
            return a
        raise ExprSyntaxError(f"expected subexpression, found {a!r}", 0)

    def _is_number(tok: str) -> bool:
        try:
            float(tok)
            return True
        except ValueError:
            return False

    tree = read()
    if pos != len(tokens):
        raise ExprSyntaxError("trailing tokens in prefix expression", 0)
    return tree


# ---------------------------------------------------------------------------
# structural queries
# ---------------------------------------------------------------------------


def max_derivative_order(tree: ExprTree) -> int:
    best = tree.order if tree.kind in (KIND_TIME, KIND_SPACE) else 0
    for c in tree.children:
        best = max(best, max_derivative_order(c))
    return best


def max_time_order(tree: ExprTree) -> int:
    best = tree.order if tree.kind == KIND_TIME else 0
    for c in tree.children:
        best = max(best, max_time_order(c))
    return best


def spatial_axes(tree: ExprTree) -> set[str]:
    axes = {tree.name} if tree.kind == KIND_SPACE else set()
    for c in tree.children:
        axes |= spatial_axes(c)
    return axes


def depends_on_field(tree: ExprTree) -> bool:
    """True when the expression involves an unknown field (a var node)."""
    if tree.kind == KIND_VAR:
        return True
    return any(depends_on_field(c) for c in tree.children)


def is_linear(tree: ExprTree) -> bool:
    """Linear in the unknown fields: no term multiplies two field-dependent
    factors, raises a field to a power, or feeds a field through a function."""

    def term_linear(t: ExprTree) -> bool:
        if not depends_on_field(t):
            return True
        if t.kind in (KIND_VAR, KIND_TIME, KIND_SPACE):
            return True
        if t.kind == KIND_PROD:
            dependents = [c for c in t.children if depends_on_field(c)]
            return len(dependents) <= 1 and all(term_linear(c) for c in dependents)
        if t.kind == KIND_POW:
            base, exponent = t.children
            if depends_on_field(exponent):
                return False
            if depends_on_field(base):
                return exponent.kind == KIND_NUM and exponent.value == 1.0
            return True
        if t.kind == KIND_FUNC:
            return not depends_on_field(t.children[0])
        return False

    terms = tree.children if tree.kind == KIND_SUM else (tree,)
    return all(term_linear(t) for t in terms)


def evaluate(tree: ExprTree, env: dict[str, object]) -> object:
    """Numeric evaluation with names bound in env; pi and e are built in.

    Works elementwise when env values are numpy arrays.
    """
    import numpy as _np

    builtins = {"pi": math.pi, "e": math.e}
    if tree.kind == KIND_NUM:
        return tree.value
    if tree.kind in (KIND_CONST, KIND_VAR):
        if tree.name in env:
            return env[tree.name]
        if tree.name in builtins:
            return builtins[tree.name]
        raise KeyError(f"unbound symbol {tree.name!r}")
    if tree.kind == KIND_FUNC:
        arg = evaluate(tree.children[0], env)
        return {"sin": _np.sin, "cos": _np.cos, "exp": _np.exp, "log": _np.log}[tree.name](arg)
    if tree.kind == KIND_POW:
        return evaluate(tree.children[0], env) ** evaluate(tree.children[1], env)
    if tree.kind == KIND_PROD:
        out = evaluate(tree.children[0], env)
        for c in tree.children[1:]:
            out = out * evaluate(c, env)
        return out
    if tree.kind == KIND_SUM:
        out = evaluate(tree.children[0], env)
        for c in tree.children[1:]:
            out = out + evaluate(c, env)
        return out
    raise ValueError(f"cannot evaluate node kind {tree.kind}")
