"""Regular expression to pNFA: prioritized Thompson (``Thᵖ``) and Java (``Jᵖ``)."""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

from .automaton import Pnfa
from .regex import Kind, RegexAst, parse

THOMPSON = "thompson"
JAVA = "java"
CONSTRUCTIONS = (THOMPSON, JAVA)


class _Builder:
    """Mutable state pool with union-find merging; ``finish`` compacts ids."""

    def __init__(self):
        self.parent: List[int] = []
        self.delta1: List[Tuple[int, str, int]] = []
        self.delta2: Dict[int, Tuple[int, ...]] = {}
        self.tags: List[str] = []

    def new(self, tag: str) -> int:
        self.parent.append(len(self.parent))
        self.tags.append(tag)
        return len(self.parent) - 1

    def find(self, q: int) -> int:
        root = q
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[q] != root:
            self.parent[q], q = root, self.parent[q]
        return root

    def merge(self, keep: int, drop: int) -> int:
        keep, drop = self.find(keep), self.find(drop)
        if keep != drop:
            # the dropped state never carries outgoing transitions
            if drop in self.delta2:
                if keep in self.delta2:
                    raise AssertionError("merging two choice states")
                self.delta2[keep] = self.delta2.pop(drop)
            self.parent[drop] = keep
        return keep

    def eps(self, q: int, *targets: int) -> None:
        q = self.find(q)
        if q in self.delta2:
            raise AssertionError("δ2 assigned twice")
        self.delta2[q] = targets

    def finish(self, initial: int, final: int, alphabet: Iterable[str]) -> Pnfa:
        # number states in order of first appearance from the initial state
        d1: Dict[Tuple[int, str], int] = {}
        for p, a, q in self.delta1:
            d1[(self.find(p), a)] = self.find(q)
        d2 = {self.find(p): tuple(self.find(t) for t in ts) for p, ts in self.delta2.items()}
        succ: Dict[int, List[int]] = {}
        for (p, a), q in sorted(d1.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            succ.setdefault(p, []).append(q)
        for p, ts in d2.items():
            succ.setdefault(p, []).extend(ts)
        roots = sorted({self.find(q) for q in range(len(self.parent))})
        order: List[int] = []
        seen = set()
        start = self.find(initial)
        stack = [start]
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen.add(q)
            order.append(q)
            stack.extend(reversed(succ.get(q, [])))
        order.extend(r for r in roots if r not in seen)
        ren = {q: i for i, q in enumerate(order)}
        return Pnfa(
            n_states=len(order),
            alphabet=frozenset(alphabet),
            initial=ren[start],
            delta1={(ren[p], a): ren[q] for (p, a), q in d1.items()},
            delta2={ren[p]: tuple(ren[t] for t in ts) for p, ts in d2.items()},
            finals=frozenset({ren[self.find(final)]}),
            choice=frozenset(ren[p] for p in d2),
            names=tuple(f"{self.tags[q]}{ren[q]}" for q in order),
        )


def _postorder(ast: RegexAst) -> List[RegexAst]:
    out: List[RegexAst] = []
    stack: List[Tuple[RegexAst, bool]] = [(ast, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            stack.append((c, False))
    return out


def _base(b: _Builder, node: RegexAst) -> Optional[Tuple[int, int]]:
    if node.kind is Kind.SYMBOL:
        q, f = b.new("s"), b.new("f")
        b.delta1.append((q, node.symbol, f))
        return q, f
    if node.kind is Kind.EPSILON:
        q, f = b.new("e"), b.new("f")
        b.eps(q, f)
        return q, f
    if node.kind is Kind.EMPTY:
        return b.new("z"), b.new("f")
    return None


def _compile(ast: RegexAst, step, alphabet: Optional[Iterable[str]]) -> Pnfa:
    b = _Builder()
    # equal subtrees may be shared objects, so results go on a value stack
    values: List[Tuple[int, int]] = []
    for node in _postorder(ast):
        pair = _base(b, node)
        if pair is None:
            k = len(node.children)
            parts = values[-k:]
            del values[-k:]
            pair = step(b, node, parts)
        values.append(pair)
    (q0, f0), = values
    sigma = set(ast.alphabet()) | set(alphabet or ())
    return b.finish(q0, f0, sigma)


def _thompson_step(b: _Builder, node: RegexAst, parts: List[Tuple[int, int]]) -> Tuple[int, int]:
    k = node.kind
    if k is Kind.CONCAT:
        (q1, f1), (q2, f2) = parts
        b.merge(f1, q2)
        return b.find(q1), b.find(f2)
    if k is Kind.UNION:
        (q1, f1), (q2, f2) = parts
        q0, f0 = b.new("u"), b.new("j")
        b.eps(q0, b.find(q1), b.find(q2))
        b.eps(f1, f0)
        b.eps(f2, f0)
        return q0, f0
    (q1, f1), = parts
    q0, f0 = b.new("k"), b.new("x")
    if k is Kind.STAR:
        b.eps(q0, q1, f0)
        b.eps(f1, q1, f0)
    else:
        b.eps(q0, f0, q1)
        b.eps(f1, f0, q1)
    return q0, f0


def _java_step(b: _Builder, node: RegexAst, parts: List[Tuple[int, int]]) -> Tuple[int, int]:
    k = node.kind
    if k is Kind.CONCAT:
        (q1, f1), (q2, f2) = parts
        b.merge(f1, q2)
        q0 = b.new("c")
        b.eps(q0, b.find(q1))
        return q0, b.find(f2)
    if k is Kind.UNION:
        (q1, f1), (q2, f2) = parts
        q0 = b.new("u")
        b.eps(q0, b.find(q1), b.find(q2))
        f = b.merge(f1, f2)
        return q0, f
    (q1, f1), = parts
    f0 = b.new("x")
    if k is Kind.STAR:
        b.eps(f1, b.find(q1), f0)
    else:
        b.eps(f1, f0, b.find(q1))
    return b.find(f1), f0


def thompson_prioritized(ast: RegexAst, alphabet: Optional[Iterable[str]] = None) -> Pnfa:
    """``Thᵖ(ast)``: Thompson's construction with prioritized ε-moves."""
    return _compile(ast, _thompson_step, alphabet)


def java_pnfa(ast: RegexAst, alphabet: Optional[Iterable[str]] = None) -> Pnfa:
    """``Jᵖ(ast)``: the automaton implicit in a Java-style backtracking matcher."""
    return _compile(ast, _java_step, alphabet)


def compile_regex(source, construction: str = JAVA, alphabet: Optional[Iterable[str]] = None) -> Pnfa:
    """Parse (if needed) and compile with the named construction."""
    ast = parse(source) if isinstance(source, str) else source
    if construction == THOMPSON:
        return thompson_prioritized(ast, alphabet)
    if construction == JAVA:
        return java_pnfa(ast, alphabet)
    raise ValueError(f"unknown construction {construction!r}; expected one of {CONSTRUCTIONS}")
