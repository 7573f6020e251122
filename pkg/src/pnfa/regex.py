"""Regular expressions over the core fragment: parsing, continuations and a
reference backtracking matcher.

The fragment is ``|``, concatenation, ``*``, lazy ``*?``, single symbols,
``ε`` (``@eps``) and ``∅`` (``@empty``).  Anything else (classes, anchors,
counted repetition, ``+``, ``?``) is a syntax error.

Grammar::

    union   := concat ('|' concat)*
    concat  := postfix postfix*
    postfix := atom ('*' | '*?')*
    atom    := SYMBOL | ESCAPE | 'ε' | '@eps' | '∅' | '@empty' | '(' union ')'
    ESCAPE  := '\\' ( '|' | '*' | '(' | ')' | '\\' | '$' )
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

Position = Tuple[int, ...]

DEFAULT_JAVA_BUDGET = 10_000_000


class Kind(enum.Enum):
    UNION = "union"
    CONCAT = "concat"
    STAR = "star"
    LAZY_STAR = "lazy_star"
    SYMBOL = "symbol"
    EPSILON = "epsilon"
    EMPTY = "empty"


_ARITY = {
    Kind.UNION: 2,
    Kind.CONCAT: 2,
    Kind.STAR: 1,
    Kind.LAZY_STAR: 1,
    Kind.SYMBOL: 0,
    Kind.EPSILON: 0,
    Kind.EMPTY: 0,
}

# characters that need a backslash to be read as symbols
_ESCAPABLE = set("|*()\\$")
# characters with regex meaning outside the fragment
_REJECTED = set("[].^$+?{}")


class RegexSyntaxError(ValueError):
    """Raised by :func:`parse`; ``offset`` is the UTF-8 byte offset of the error."""

    def __init__(self, message: str, text: str, index: int):
        self.index = index
        self.offset = len(text[:index].encode("utf-8"))
        super().__init__(f"{message} at byte {self.offset}")


class BudgetExceeded(RuntimeError):
    """A bounded simulation ran out of budget.

    ``count`` holds the work done before giving up (invocations, tree nodes,
    enumerated runs, ... depending on the caller).
    """

    def __init__(self, count: int, budget: int, what: str = "steps"):
        self.count = count
        self.budget = budget
        self.what = what
        super().__init__(f"budget of {budget} {what} exhausted (count={count})")


@dataclass(frozen=True)
class RegexAst:
    kind: Kind
    children: Tuple["RegexAst", ...] = ()
    symbol: Optional[str] = None

    def __post_init__(self):
        if len(self.children) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} takes {_ARITY[self.kind]} children")
        if (self.kind is Kind.SYMBOL) != (self.symbol is not None):
            raise ValueError("only symbol nodes carry a symbol")
        if self.kind is Kind.SYMBOL and len(self.symbol) != 1:
            raise ValueError("symbols are single characters")

    def subtree(self, pos: Position) -> "RegexAst":
        node = self
        for i in pos:
            node = node.children[i - 1]
        return node

    def positions(self) -> Iterator[Position]:
        """All vertices in preorder; child ``i`` of ``v`` is ``v + (i,)``."""
        stack: List[Tuple[Position, RegexAst]] = [((), self)]
        while stack:
            pos, node = stack.pop()
            yield pos
            for i in range(len(node.children), 0, -1):
                stack.append((pos + (i,), node.children[i - 1]))

    def alphabet(self) -> frozenset:
        return frozenset(self.subtree(p).symbol for p in self.positions()
                         if self.subtree(p).kind is Kind.SYMBOL)

    def size(self) -> int:
        return sum(1 for _ in self.positions())

    def __str__(self) -> str:
        return to_text(self)


def sym(c: str) -> RegexAst:
    return RegexAst(Kind.SYMBOL, symbol=c)


def union(*parts: RegexAst) -> RegexAst:
    out = parts[0]
    for p in parts[1:]:
        out = RegexAst(Kind.UNION, (out, p))
    return out


def concat(*parts: RegexAst) -> RegexAst:
    out = parts[0]
    for p in parts[1:]:
        out = RegexAst(Kind.CONCAT, (out, p))
    return out


def star(e: RegexAst) -> RegexAst:
    return RegexAst(Kind.STAR, (e,))


def lazy_star(e: RegexAst) -> RegexAst:
    return RegexAst(Kind.LAZY_STAR, (e,))


EPS = RegexAst(Kind.EPSILON)
EMPTY = RegexAst(Kind.EMPTY)


# --- parsing -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, msg: str, index: Optional[int] = None):
        raise RegexSyntaxError(msg, self.text, self.i if index is None else index)

    def peek(self) -> Optional[str]:
        return self.text[self.i] if self.i < len(self.text) else None

    def parse(self) -> RegexAst:
        if not self.text:
            self.error("empty expression (write @eps for the empty word)")
        node = self.union()
        if self.i < len(self.text):
            self.error(f"unexpected {self.text[self.i]!r}")
        return node

    def union(self) -> RegexAst:
        node = self.concat()
        while self.peek() == "|":
            self.i += 1
            node = RegexAst(Kind.UNION, (node, self.concat()))
        return node

    def concat(self) -> RegexAst:
        if self.peek() in (None, "|", ")"):
            self.error("missing operand (write @eps for the empty word)")
        node = self.postfix()
        while self.peek() not in (None, "|", ")"):
            node = RegexAst(Kind.CONCAT, (node, self.postfix()))
        return node

    def postfix(self) -> RegexAst:
        node = self.atom()
        while self.peek() == "*":
            self.i += 1
            if self.peek() == "?":
                self.i += 1
                node = RegexAst(Kind.LAZY_STAR, (node,))
            else:
                node = RegexAst(Kind.STAR, (node,))
        return node

    def atom(self) -> RegexAst:
        c = self.peek()
        start = self.i
        if c == "(":
            self.i += 1
            node = self.union()
            if self.peek() != ")":
                self.error("unbalanced '('", start)
            self.i += 1
            return node
        if c == "*":
            self.error("'*' without operand")
        if c == "\\":
            nxt = self.text[self.i + 1] if self.i + 1 < len(self.text) else None
            if nxt is None or nxt not in _ESCAPABLE:
                self.error("unsupported escape")
            self.i += 2
            return sym(nxt)
        for word, node in (("@eps", EPS), ("@empty", EMPTY)):
            if self.text.startswith(word, self.i):
                self.i += len(word)
                return node
        if c == "@":
            self.error("unknown @-keyword")
        if c == "ε":
            self.i += 1
            return EPS
        if c == "∅":
            self.i += 1
            return EMPTY
        if c in _REJECTED:
            self.error(f"{c!r} is outside the supported fragment")
        self.i += 1
        return sym(c)


def parse(text: str) -> RegexAst:
    """Parse ``text`` into a :class:`RegexAst`.

    >>> str(parse("ab*"))
    'ab*'
    """
    return _Parser(text).parse()


_PREC = {Kind.UNION: 0, Kind.CONCAT: 1, Kind.STAR: 2, Kind.LAZY_STAR: 2}


def _symbol_text(c: str) -> str:
    return "\\" + c if c in _ESCAPABLE else c


def to_text(ast: RegexAst) -> str:
    """Render with minimal parentheses; ``parse(to_text(e)) == e``."""

    def go(node: RegexAst, ctx: int, right: bool) -> str:
        k = node.kind
        if k is Kind.SYMBOL:
            return _symbol_text(node.symbol)
        if k is Kind.EPSILON:
            return "@eps"
        if k is Kind.EMPTY:
            return "@empty"
        if k in (Kind.STAR, Kind.LAZY_STAR):
            body = go(node.children[0], 2, False)
            s = body + ("*" if k is Kind.STAR else "*?")
        else:
            op = "|" if k is Kind.UNION else ""
            p = _PREC[k]
            # binary operators are left-associative: the right child needs
            # parentheses when it has the same precedence
            s = go(node.children[0], p, False) + op + go(node.children[1], p + 1, True)
        if _PREC[k] < ctx:
            return "(" + s + ")"
        return s

    return go(ast, 0, False)


# --- continuations and the reference matcher ----------------------------------

def next_map(ast: RegexAst) -> Dict[Position, Optional[Position]]:
    """The continuation of every vertex: where matching resumes after it."""
    nxt: Dict[Position, Optional[Position]] = {(): None}
    for v in ast.positions():
        node = ast.subtree(v)
        if node.kind is Kind.UNION:
            nxt[v + (1,)] = nxt[v]
            nxt[v + (2,)] = nxt[v]
        elif node.kind is Kind.CONCAT:
            nxt[v + (1,)] = v + (2,)
            nxt[v + (2,)] = nxt[v]
        elif node.kind in (Kind.STAR, Kind.LAZY_STAR):
            nxt[v + (1,)] = v
    return nxt


@dataclass(frozen=True)
class JavaMatchResult:
    matched: bool
    invocations: int


def java_match(ast: RegexAst, w: str, budget: int = DEFAULT_JAVA_BUDGET) -> JavaMatchResult:
    """Full-string match in the style of ``java.util.regex``.

    Every combinator of the matcher returns ``true`` as soon as one of its
    attempts does, so the recursion is a depth-first search over pending
    attempts; the explicit stack below visits calls in exactly the recursive
    order and counts one invocation per call.  The set ``C`` of star bodies
    entered since the last consumed symbol blocks empty iterations.
    """
    nodes = {v: ast.subtree(v) for v in ast.positions()}
    nxt = next_map(ast)
    n = len(w)
    stack: List[Tuple[Optional[Position], int, frozenset]] = [((), 0, frozenset())]
    count = 0
    while stack:
        v, i, C = stack.pop()
        count += 1
        if count > budget:
            raise BudgetExceeded(count - 1, budget, "invocations")
        if v is None:
            if i == n:
                return JavaMatchResult(True, count)
            continue
        node = nodes[v]
        k = node.kind
        if k is Kind.EPSILON:
            stack.append((nxt[v], i, C))
        elif k is Kind.SYMBOL:
            if i < n and w[i] == node.symbol:
                stack.append((nxt[v], i + 1, frozenset()))
        elif k is Kind.UNION:
            stack.append((v + (2,), i, C))
            stack.append((v + (1,), i, C))
        elif k is Kind.CONCAT:
            stack.append((v + (1,), i, C))
        elif k is Kind.STAR:
            body = v + (1,)
            stack.append((nxt[v], i, C))
            if body not in C:
                stack.append((body, i, C | {body}))
        elif k is Kind.LAZY_STAR:
            body = v + (1,)
            if body not in C:
                stack.append((body, i, C | {body}))
            stack.append((nxt[v], i, C))
        # Kind.EMPTY matches nothing
    return JavaMatchResult(False, count)


# --- corpus generation ---------------------------------------------------------

def hardness_gadget(e: RegexAst, alpha: str, alphabet: Optional[Iterable[str]] = None,
                    marker: str = "$") -> RegexAst:
    """Build ``((E | E$Γ*) | (Σ*$(α*)*$))`` with ``Γ = Σ ∪ {$}``.

    ``Σ`` is the symbol set of ``e`` unless ``alphabet`` is given.
    """
    sigma = sorted(set(alphabet) if alphabet is not None else e.alphabet())
    if marker in sigma:
        raise ValueError(f"{marker!r} already belongs to the alphabet")
    if alpha not in sigma:
        raise ValueError(f"{alpha!r} is not in the alphabet")
    d = sym(marker)
    sigma_star = star(union(*[sym(c) for c in sigma]))
    gamma_star = star(union(*[sym(c) for c in sigma + [marker]]))
    left = union(e, concat(e, d, gamma_star))
    right = concat(sigma_star, d, star(star(sym(alpha))), d)
    return union(left, right)


def random_ast(rng: random.Random, size: int, alphabet: Iterable[str] = "ab",
               lazy: bool = True, constants: bool = True) -> RegexAst:
    """A random expression with exactly ``size`` vertices."""
    letters = sorted(alphabet)
    if size <= 1:
        r = rng.random()
        if constants and r < 0.08:
            return EPS
        if constants and r < 0.12:
            return EMPTY
        return sym(rng.choice(letters))
    if size == 2:
        op = Kind.LAZY_STAR if lazy and rng.random() < 0.2 else Kind.STAR
        return RegexAst(op, (random_ast(rng, 1, letters, lazy, constants),))
    choices = [Kind.UNION, Kind.CONCAT, Kind.STAR] + ([Kind.LAZY_STAR] if lazy else [])
    op = rng.choice(choices)
    if op in (Kind.STAR, Kind.LAZY_STAR):
        return RegexAst(op, (random_ast(rng, size - 1, letters, lazy, constants),))
    left = rng.randint(1, size - 2)
    return RegexAst(op, (random_ast(rng, left, letters, lazy, constants),
                         random_ast(rng, size - 1 - left, letters, lazy, constants)))


def random_corpus(seed: int, count: int, max_size: int = 8,
                  alphabet: Iterable[str] = "ab") -> List[RegexAst]:
    rng = random.Random(seed)
    letters = sorted(alphabet)
    return [random_ast(rng, rng.randint(1, max_size), letters) for _ in range(count)]
