"""Prioritized NFAs, their backtracking runs and plain NFA utilities.

A :class:`Pnfa` splits its states into *reading* states (``Q1``) with a
partial deterministic symbol transition, and *choice* states (``Q2``) whose
ε-transitions are tried in a fixed priority order.  :func:`btr` builds the
tree of every attempt a prioritized depth-first matcher makes; its size is
the cost model used throughout the package.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

from .regex import BudgetExceeded

EPSILON = ""  # label of ε-transitions in an Nfa

DEFAULT_BUDGET = 5_000_000


class _Leaf(str):
    """Acc / Rej leaf labels; a str subclass so trees stay plain data."""

    __slots__ = ()

    def __repr__(self):
        return str(self)


ACC = _Leaf("Acc")
REJ = _Leaf("Rej")

Label = Union[int, str]


class Tree(NamedTuple):
    """An ordered tree ``label[children...]``; hashable and comparable."""

    label: Label
    children: Tuple["Tree", ...] = ()

    def size(self) -> int:
        """Number of vertices, leaves included."""
        total, stack = 0, [self]
        while stack:
            t = stack.pop()
            total += 1
            stack.extend(t.children)
        return total

    def steps(self) -> int:
        """Number of state-labelled vertices: one per case application of the
        backtracking-run definition and one per matcher invocation."""
        total, stack = 0, [self]
        while stack:
            t = stack.pop()
            if not isinstance(t.label, _Leaf):
                total += 1
            stack.extend(t.children)
        return total

    def leaves(self) -> List[Label]:
        out, stack = [], [self]
        while stack:
            t = stack.pop()
            if not t.children:
                out.append(t.label)
            stack.extend(reversed(t.children))
        return out

    def render(self, names: Optional[Tuple[str, ...]] = None) -> str:
        def lab(x):
            if isinstance(x, _Leaf) or names is None:
                return str(x)
            return names[x]

        # iterative to cope with deep runs
        out: List[str] = []
        stack: List[Union[Tree, str]] = [self]
        while stack:
            t = stack.pop()
            if isinstance(t, str):
                out.append(t)
                continue
            out.append(lab(t.label))
            if t.children:
                out.append("[")
                stack.append("]")
                for i, c in enumerate(reversed(t.children)):
                    stack.append(c)
                    if i < len(t.children) - 1:
                        stack.append(",")
        return "".join(out)


BtrTree = Tree


def leaf(label: Label) -> Tree:
    return Tree(label)


@dataclass(frozen=True, eq=True)
class Pnfa:
    """``(Q1, Q2, Σ, q0, δ1, δ2, F)`` over states ``0 .. n_states-1``.

    ``choice`` is the set ``Q2``; every other state is a reading state.
    ``delta1`` maps ``(state, symbol)`` to a state and may be partial;
    ``delta2`` maps every choice state to its targets in priority order.
    """

    n_states: int
    alphabet: FrozenSet[str]
    initial: int
    delta1: Mapping[Tuple[int, str], int]
    delta2: Mapping[int, Tuple[int, ...]]
    finals: FrozenSet[int]
    choice: FrozenSet[int]
    names: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        n = self.n_states
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "choice", frozenset(self.choice))
        object.__setattr__(self, "delta2", {q: tuple(v) for q, v in self.delta2.items()})
        object.__setattr__(self, "delta1", dict(self.delta1))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"q{i}" for i in range(n)))
        ok = lambda q: isinstance(q, int) and 0 <= q < n
        if not ok(self.initial):
            raise ValueError("initial state out of range")
        if not all(ok(q) for q in self.finals | self.choice):
            raise ValueError("undeclared state in F or Q2")
        for (q, a), t in self.delta1.items():
            if q in self.choice or not ok(q) or not ok(t):
                raise ValueError(f"bad δ1 entry ({q}, {a!r}) -> {t}")
            if a not in self.alphabet:
                raise ValueError(f"δ1 symbol {a!r} not in alphabet")
        if set(self.delta2) != set(self.choice):
            raise ValueError("δ2 must be defined on exactly Q2")
        for q, targets in self.delta2.items():
            if not all(ok(t) for t in targets):
                raise ValueError(f"bad δ2 target from {q}")
        if len(self.names) != n:
            raise ValueError("one name per state")

    def is_choice(self, q: int) -> bool:
        return q in self.choice

    def step(self, q: int, a: str) -> Optional[int]:
        return self.delta1.get((q, a))

    def alternatives(self, q: int) -> Tuple[int, ...]:
        return self.delta2.get(q, ())

    @property
    def reading(self) -> FrozenSet[int]:
        return frozenset(range(self.n_states)) - self.choice

    def transition_count(self) -> int:
        return len(self.delta1) + sum(len(v) for v in self.delta2.values())

    def reachable(self) -> FrozenSet[int]:
        seen = {self.initial}
        todo = [self.initial]
        succ: Dict[int, List[int]] = {}
        for (q, _), t in self.delta1.items():
            succ.setdefault(q, []).append(t)
        for q, ts in self.delta2.items():
            succ.setdefault(q, []).extend(ts)
        while todo:
            q = todo.pop()
            for t in succ.get(q, ()):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return frozenset(seen)

    def restrict(self, keep: Iterable[int]) -> Tuple["Pnfa", Dict[int, int]]:
        """Drop every state outside ``keep`` (which must contain the initial
        state and be closed under transitions); returns the old→new id map."""
        order = sorted(set(keep))
        remap = {q: i for i, q in enumerate(order)}
        if self.initial not in remap:
            raise ValueError("initial state must be kept")
        d1 = {(remap[q], a): remap[t] for (q, a), t in self.delta1.items() if q in remap}
        d2 = {remap[q]: tuple(remap[t] for t in ts) for q, ts in self.delta2.items() if q in remap}
        return Pnfa(
            n_states=len(order),
            alphabet=self.alphabet,
            initial=remap[self.initial],
            delta1=d1,
            delta2=d2,
            finals=frozenset(remap[q] for q in self.finals if q in remap),
            choice=frozenset(remap[q] for q in self.choice if q in remap),
            names=tuple(self.names[q] for q in order),
        ), remap

    def trim(self) -> "Pnfa":
        return self.restrict(self.reachable())[0]

    def with_finals(self, finals: Iterable[int]) -> "Pnfa":
        return Pnfa(self.n_states, self.alphabet, self.initial, self.delta1, self.delta2,
                    frozenset(finals), self.choice, self.names)


@dataclass(frozen=True)
class Nfa:
    """An NFA with ε-transitions (label ``""``).

    ``edges`` is a multiset: repeated ``(p, label, q)`` triples are distinct
    parallel transitions.  Automata derived from a pNFA never repeat an
    edge; the ε-free run graphs built by the ambiguity analysis do.
    """

    n_states: int
    alphabet: FrozenSet[str]
    initial: int
    edges: Tuple[Tuple[int, str, int], ...]
    finals: FrozenSet[int]
    names: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"q{i}" for i in range(self.n_states)))
        if EPSILON in self.alphabet:
            raise ValueError("ε cannot be a symbol")
        n = self.n_states
        if not 0 <= self.initial < n or not all(0 <= q < n for q in self.finals):
            raise ValueError("undeclared state")
        for p, a, q in self.edges:
            if not (0 <= p < n and 0 <= q < n):
                raise ValueError(f"edge ({p}, {a!r}, {q}) uses an undeclared state")
            if a != EPSILON and a not in self.alphabet:
                raise ValueError(f"edge symbol {a!r} not in alphabet")

    def delta(self, q: int, a: str) -> FrozenSet[int]:
        return frozenset(t for p, b, t in self.edges if p == q and b == a)

    def out_edges(self) -> Dict[int, List[Tuple[str, int]]]:
        out: Dict[int, List[Tuple[str, int]]] = {q: [] for q in range(self.n_states)}
        for p, a, q in self.edges:
            out[p].append((a, q))
        return out

    def multiplicities(self) -> Counter:
        return Counter(self.edges)


class Run(NamedTuple):
    """States ``p1 .. p(m+1)`` and labels ``a1 .. am`` (``""`` for ε)."""

    states: Tuple[int, ...]
    labels: Tuple[str, ...]

    def word(self) -> str:
        return "".join(self.labels)


# --- pNFA → NFA ----------------------------------------------------------------

def underlying_nfa(a: Pnfa) -> Nfa:
    """Forget priorities; duplicated δ2 targets collapse to one ε-edge."""
    edges: List[Tuple[int, str, int]] = []
    for (q, s), t in sorted(a.delta1.items()):
        edges.append((q, s, t))
    for q in sorted(a.delta2):
        seen = set()
        for t in a.delta2[q]:
            if t not in seen:
                seen.add(t)
                edges.append((q, EPSILON, t))
    return Nfa(a.n_states, a.alphabet, a.initial, tuple(edges), a.finals, a.names)


# --- backtracking runs -----------------------------------------------------------

def btr(a: Pnfa, w: str, budget: int = DEFAULT_BUDGET, state: Optional[int] = None) -> Tree:
    """The backtracking run of ``a`` on ``w`` from ``state`` (default q0).

    Children of a choice state are its not-yet-tried alternatives in priority
    order; construction stops at the first ``Acc``.  Because success
    propagates straight to the root, the run is the preorder of a plain
    depth-first search, built here with an explicit stack.  ``budget``
    bounds the number of state-labelled vertices.
    """
    n = len(w)
    start = a.initial if state is None else state
    labels: List[Label] = []
    parent: List[int] = []
    # pending attempts: (state, position, counters, parent vertex)
    stack: List[Tuple[int, int, Mapping[int, int], int]] = [(start, 0, {}, -1)]
    steps = 0
    while stack:
        q, i, C, par = stack.pop()
        steps += 1
        if steps > budget:
            raise BudgetExceeded(steps - 1, budget, "nodes")
        me = len(labels)
        labels.append(q)
        parent.append(par)
        if q in a.finals and i == n:
            labels.append(ACC)
            parent.append(me)
            break
        if q not in a.choice:
            t = a.delta1.get((q, w[i])) if i < n else None
            if t is None:
                labels.append(REJ)
                parent.append(me)
            else:
                stack.append((t, i + 1, {}, me))
            continue
        alts = a.delta2[q]
        first = C.get(q, 0)
        if first >= len(alts):
            labels.append(REJ)
            parent.append(me)
            continue
        for j in range(len(alts), first, -1):
            C2 = dict(C)
            C2[q] = j
            stack.append((alts[j - 1], i, C2, me))
    return _assemble(labels, parent)


def _assemble(labels: List[Label], parent: List[int]) -> Tree:
    kids: List[List[Tree]] = [[] for _ in labels]
    built: List[Optional[Tree]] = [None] * len(labels)
    # preorder ids: every child has a larger id than its parent
    for v in range(len(labels) - 1, -1, -1):
        built[v] = Tree(labels[v], tuple(reversed(kids[v])))
        if parent[v] >= 0:
            kids[parent[v]].append(built[v])
    return built[0]


def _count(a: Pnfa, w: str, budget: int) -> Tuple[int, int, bool]:
    # (state vertices, Acc/Rej leaves, succeeded) of the run, without building it
    n = len(w)
    stack: List[Tuple[int, int, Mapping[int, int]]] = [(a.initial, 0, {})]
    steps = leaves = 0
    while stack:
        q, i, C = stack.pop()
        steps += 1
        if steps > budget:
            raise BudgetExceeded(steps - 1, budget, "nodes")
        if q in a.finals and i == n:
            return steps, leaves + 1, True
        if q not in a.choice:
            t = a.delta1.get((q, w[i])) if i < n else None
            if t is None:
                leaves += 1
            else:
                stack.append((t, i + 1, {}))
            continue
        alts = a.delta2[q]
        first = C.get(q, 0)
        if first >= len(alts):
            leaves += 1
        for j in range(len(alts), first, -1):
            C2 = dict(C)
            C2[q] = j
            stack.append((alts[j - 1], i, C2))
    return steps, leaves, False


class BtrMeasure(NamedTuple):
    steps: int
    leaves: int
    succeeded: bool

    @property
    def size(self) -> int:
        return self.steps + self.leaves


def btr_measure(a: Pnfa, w: str, budget: int = DEFAULT_BUDGET) -> BtrMeasure:
    """Exact vertex counts of the backtracking run, computed by sharing.

    The subtree rooted at an attempt depends only on ``(state, position,
    counters)``, so each distinct triple is evaluated once.  This gives
    exact counts for runs far too large to enumerate; ``budget`` bounds the
    number of distinct triples.
    """
    n = len(w)
    memo: Dict[Tuple[int, int, FrozenSet], Tuple[int, int, bool]] = {}
    # frame: [key, state, position, counters, next alternative (-1 for reading), steps, leaves]
    stack: List[list] = []

    def enter(q: int, i: int, C: Dict[int, int]) -> Optional[Tuple[int, int, bool]]:
        k = (q, i, frozenset(C.items()))
        v = memo.get(k)
        if v is not None:
            return v
        if q in a.finals and i == n:
            v = (1, 1, True)
        elif q not in a.choice:
            if i < n and (q, w[i]) in a.delta1:
                stack.append([k, q, i, C, -1, 1, 0])
                return None
            v = (1, 1, False)
        elif C.get(q, 0) >= len(a.delta2[q]):
            v = (1, 1, False)
        else:
            stack.append([k, q, i, C, C.get(q, 0), 1, 0])
            return None
        memo[k] = v
        if len(memo) > budget:
            raise BudgetExceeded(len(memo) - 1, budget, "distinct attempts")
        return v

    child = enter(a.initial, 0, {})
    result = child
    launched = False
    while stack:
        fr = stack[-1]
        k, q, i, C, j = fr[0], fr[1], fr[2], fr[3], fr[4]
        if launched:
            launched = False
            fr[5] += child[0]
            fr[6] += child[1]
            done = child[2] or j < 0 or j >= len(a.delta2[q])
            if done:
                stack.pop()
                child = memo[k] = (fr[5], fr[6], child[2])
                if len(memo) > budget:
                    raise BudgetExceeded(len(memo) - 1, budget, "distinct attempts")
                result = child
                launched = True
                continue
        if j == -1:
            child = enter(a.delta1[(q, w[i])], i + 1, {})
            fr[4] = -2  # reading frame: its only child is under way
        else:
            C2 = dict(C)
            C2[q] = j + 1
            fr[4] = j + 1
            child = enter(a.delta2[q][j], i, C2)
        launched = child is not None
    return BtrMeasure(*result)


def btr_steps(a: Pnfa, w: str, budget: int = DEFAULT_BUDGET) -> Tuple[int, bool]:
    """``(steps, succeeded)`` of the backtracking run without building it."""
    steps, _, ok = _count(a, w, budget)
    return steps, ok


def btr_size(a: Pnfa, w: str, budget: int = DEFAULT_BUDGET) -> int:
    """Vertex count of :func:`btr` (leaves included) without building it."""
    steps, leaves, _ = _count(a, w, budget)
    return steps + leaves


def succeeds(t: Tree) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if x.label == ACC and not x.children:
            return True
        stack.extend(x.children)
    return False


def accepting_run(t: Tree, a: Optional[Pnfa] = None, w: Optional[str] = None) -> Optional[Run]:
    """States on the right-most path of a successful run, ``Acc`` dropped.

    Labels are recovered from ``a``/``w`` when given (a reading state
    consumed the next symbol, a choice state took an ε-step).
    """
    if not succeeds(t):
        return None
    states: List[int] = []
    x = t
    while x.children:
        states.append(x.label)
        x = x.children[-1]
    labels: List[str] = []
    if a is not None and w is not None:
        i = 0
        for q in states[:-1]:
            if q in a.choice:
                labels.append(EPSILON)
            else:
                labels.append(w[i])
                i += 1
    return Run(tuple(states), tuple(labels))


@dataclass(frozen=True)
class MatchResult:
    run: Optional[Run]
    invocations: int

    @property
    def matched(self) -> bool:
        return self.run is not None


def match_run(a: Pnfa, w: str, budget: int = DEFAULT_BUDGET) -> MatchResult:
    """Deterministic prioritized matcher returning the accepting run.

    Mirrors the recursive procedure frame by frame: a reading state either
    stops (end of input) or recurses once; a choice state loops over its
    untried alternatives and returns on the first success.  One invocation
    is counted per call.
    """
    n = len(w)
    FAIL = None

    # frame: [state, position, counters, next alternative index, kind]
    calls = 0

    def enter(q: int, i: int, C: Dict[int, int]):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise BudgetExceeded(calls - 1, budget, "invocations")
        return [q, i, C, C.get(q, 0) + 1]

    stack = [enter(a.initial, 0, {})]
    result: Optional[Tuple[Tuple[int, ...], Tuple[str, ...]]] = FAIL
    returning = False
    while stack:
        frame = stack[-1]
        q, i, C, nxt = frame
        if q not in a.choice:
            if returning:
                stack.pop()
                if result is not FAIL:
                    result = ((q,) + result[0], (w[i],) + result[1])
                continue
            if i == n:
                stack.pop()
                result = ((q,), ()) if q in a.finals else FAIL
                returning = True
                continue
            t = a.delta1.get((q, w[i]))
            if t is None:
                stack.pop()
                result = FAIL
                returning = True
                continue
            stack.append(enter(t, i + 1, {}))
            continue
        if not returning and i == n and q in a.finals:
            stack.pop()
            result = ((q,), ())
            returning = True
            continue
        if returning and result is not FAIL:
            stack.pop()
            result = ((q,) + result[0], (EPSILON,) + result[1])
            continue
        alts = a.delta2[q]
        if nxt > len(alts):
            stack.pop()
            result = FAIL
            returning = True
            continue
        frame[3] = nxt + 1
        C2 = dict(C)
        C2[q] = nxt
        returning = False
        stack.append(enter(alts[nxt - 1], i, C2))
    if result is FAIL:
        return MatchResult(None, calls)
    return MatchResult(Run(*result), calls)


# --- plain NFA oracles -------------------------------------------------------------

def epsilon_closure(n: Nfa, states: Iterable[int]) -> FrozenSet[int]:
    out = n.out_edges()
    seen = set(states)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for a, t in out[q]:
            if a == EPSILON and t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def nfa_membership(n: Nfa, w: str) -> bool:
    """Subset simulation with ε-closure."""
    out = n.out_edges()
    cur = epsilon_closure(n, [n.initial])
    for c in w:
        step = {t for q in cur for a, t in out[q] if a == c}
        cur = epsilon_closure(n, step)
        if not cur:
            return False
    return bool(cur & n.finals)


def is_valid_run(n: Nfa, run: Run, w: Optional[str] = None) -> bool:
    if len(run.states) != len(run.labels) + 1:
        return False
    edges = set(n.edges)
    for p, a, q in zip(run.states, run.labels, run.states[1:]):
        if (p, a, q) not in edges:
            return False
    return w is None or run.word() == w


def count_short_accepting_runs(n: Nfa, w: str, budget: int = DEFAULT_BUDGET) -> int:
    """Number of accepting runs on ``w`` in which no ε-transition occurs twice
    within one maximal block of consecutive ε-steps.

    Parallel edges count as distinct transitions.  Exhaustive enumeration;
    raises :class:`BudgetExceeded` after ``budget`` search nodes.
    """
    mult = n.multiplicities()
    out: Dict[int, List[Tuple[str, int, int]]] = {q: [] for q in range(n.n_states)}
    for (p, a, q), m in sorted(mult.items()):
        out[p].append((a, q, m))
    L = len(w)
    visited = 0
    total = 0
    # (state, position, ε-transitions used in the current block, weight)
    stack: List[Tuple[int, int, FrozenSet[Tuple[int, int, int]], int]] = [
        (n.initial, 0, frozenset(), 1)]
    while stack:
        q, i, used, weight = stack.pop()
        visited += 1
        if visited > budget:
            raise BudgetExceeded(visited - 1, budget, "search nodes")
        if i == L and q in n.finals:
            total += weight
        for a, t, m in out[q]:
            if a == EPSILON:
                # parallel copies are distinct transitions: track each copy
                for copy in range(m):
                    key = (q, t, copy)
                    if key not in used:
                        stack.append((t, i, used | {key}, weight))
            elif i < L and a == w[i]:
                stack.append((t, i + 1, frozenset(), weight * m))
    return total
