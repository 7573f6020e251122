"""Failure-backtracking classification through degrees of ambiguity.

The verdict is computed on the *run graph* of ``Aᶠ``: one node per state
at which a backtracking run can sit right after consuming a symbol (plus
the initial state), and one ``c``-edge from ``t`` to ``δ1(p, c)`` for every
time the ε-exploration started at ``t`` reaches reading state ``p``.
Every vertex of a failing backtracking run lies in the ε-exploration of a
run-graph path, and each exploration has bounded size, so run sizes grow
like the number of partial paths of that graph, i.e. like the degree of
ambiguity of ``a(G)``.

The route through the priority-free automaton ``a(N(Aᶠ))`` counts runs that
the counter map of a backtracking run forbids, so it can overstate the
growth when ε-cycles are present; it is kept as a diagnostic.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from .automaton import DEFAULT_BUDGET, EPSILON, Nfa, Pnfa, btr_measure, underlying_nfa
from .flatten import leaves
from .regex import BudgetExceeded


class Verdict(Enum):
    EXPONENTIAL = "Exponential"
    POLYNOMIAL = "Polynomial"


@dataclass(frozen=True)
class Attack:
    prefix: str
    pump: str
    suffix: str
    sizes: Tuple[int, ...]
    ratios: Tuple[float, ...]
    pumps: Tuple[int, ...]

    def word(self, i: int) -> str:
        return self.prefix + self.pump * i + self.suffix


@dataclass(frozen=True)
class BacktrackClass:
    """``Exponential`` or ``Polynomial(degree)`` failure backtracking.

    ``Polynomial(k)`` means run sizes in Θ(n^(k+1)); ``bounded`` marks the
    degenerate case of runs of bounded size, reported as degree 0.
    """

    verdict: Verdict
    degree: Optional[int] = None
    bounded: bool = False
    eda_state: Optional[int] = None
    eda_word: Optional[str] = None
    ida_chain: Tuple[Tuple[int, int, str], ...] = ()
    attack: Optional[Attack] = None
    diagnostic: str = ""
    short_run_verdict: Optional[str] = None
    quotient: Optional["SccQuotient"] = field(default=None, compare=False, repr=False)

    @property
    def exponential(self) -> bool:
        return self.verdict is Verdict.EXPONENTIAL

    def label(self) -> str:
        if self.exponential:
            return "Exponential"
        return f"Polynomial({self.degree})"


# --- weighted ε-free graphs ------------------------------------------------------

@dataclass(frozen=True)
class WGraph:
    """ε-free automaton with edge multiplicities; every state is final unless
    ``finals`` says otherwise."""

    n_states: int
    alphabet: FrozenSet[str]
    initial: int
    edges: Dict[Tuple[int, str, int], int]
    finals: FrozenSet[int]

    def succ(self) -> Dict[int, List[Tuple[str, int, int]]]:
        out: Dict[int, List[Tuple[str, int, int]]] = {q: [] for q in range(self.n_states)}
        for (p, c, q), m in sorted(self.edges.items()):
            out[p].append((c, q, m))
        return out

    def useful(self) -> FrozenSet[int]:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n_states))
        g.add_edges_from((p, q) for p, _, q in self.edges)
        fwd = nx.descendants(g, self.initial) | {self.initial}
        back: Set[int] = set(self.finals)
        for f in self.finals:
            back |= nx.ancestors(g, f)
        return frozenset(fwd & back)

    def to_nfa(self) -> Nfa:
        edges = [(p, c, q) for (p, c, q), m in sorted(self.edges.items()) for _ in range(m)]
        return Nfa(self.n_states, self.alphabet, self.initial, tuple(edges), self.finals)


def eliminate_epsilon(n: Nfa, budget: int = DEFAULT_BUDGET) -> WGraph:
    """Remove ε-moves, weighting ``p -c-> q`` by the number of ε-trails (no
    ε-transition used twice) from ``p`` to a ``c``-predecessor of ``q``.

    Path counts in the result equal short-run counts in ``n`` up to the
    bounded number of trails into a final state.
    """
    eps: Dict[int, List[Tuple[int, int]]] = {q: [] for q in range(n.n_states)}
    sym: Dict[int, List[Tuple[str, int]]] = {q: [] for q in range(n.n_states)}
    for idx, (p, c, q) in enumerate(n.edges):
        if c == EPSILON:
            eps[p].append((idx, q))
        else:
            sym[p].append((c, q))
    edges: Counter = Counter()
    finals = set()
    work = 0
    for p in range(n.n_states):
        reach: Counter = Counter()
        stack: List[Tuple[int, FrozenSet[int]]] = [(p, frozenset())]
        while stack:
            q, used = stack.pop()
            work += 1
            if work > budget:
                raise BudgetExceeded(work - 1, budget, "ε-trails")
            reach[q] += 1
            for idx, t in eps[q]:
                if idx not in used:
                    stack.append((t, used | {idx}))
        for q, m in reach.items():
            if q in n.finals:
                finals.add(p)
            for c, t in sym[q]:
                edges[(p, c, t)] += m
    return WGraph(n.n_states, n.alphabet, n.initial, dict(edges), frozenset(finals))


def a_construction(n: Nfa) -> Nfa:
    """Add an accepting sink ``z`` looping on every symbol, with an ε-edge from
    every original state; original finals are cleared."""
    z = n.n_states
    edges = list(n.edges)
    edges.extend((q, EPSILON, z) for q in range(n.n_states))
    edges.extend((z, c, z) for c in sorted(n.alphabet))
    return Nfa(n.n_states + 1, n.alphabet, n.initial, tuple(edges), frozenset({z}),
               tuple(n.names) + ("z",))


def _a_graph(g: WGraph) -> WGraph:
    # a(·) followed by ε-elimination, written directly for ε-free input
    z = g.n_states
    edges = dict(g.edges)
    for q in range(g.n_states + 1):
        for c in g.alphabet:
            edges[(q, c, z)] = edges.get((q, c, z), 0) + 1
    return WGraph(g.n_states + 1, g.alphabet, g.initial, edges, frozenset(range(g.n_states + 1)))


def failure_pnfa(a: Pnfa) -> Pnfa:
    return a.with_finals(())


@dataclass(frozen=True)
class RunGraph:
    graph: WGraph
    # run-graph node -> pNFA state
    state_of: Tuple[int, ...]


def run_graph(a: Pnfa) -> RunGraph:
    """The ε-free run graph of ``a`` described in the module docstring.

    Multiplicities count leaves of the priority-ordered ε-exploration, so the
    counter-map restrictions of backtracking runs are respected.
    """
    ids: Dict[int, int] = {a.initial: 0}
    order = [a.initial]
    edges: Counter = Counter()
    todo = deque([a.initial])
    while todo:
        t = todo.popleft()
        for p, m in Counter(leaves(a, t)).items():
            for c in sorted(a.alphabet):
                r = a.delta1.get((p, c))
                if r is None:
                    continue
                if r not in ids:
                    ids[r] = len(order)
                    order.append(r)
                    todo.append(r)
                edges[(ids[t], c, ids[r])] += m
    g = WGraph(len(order), a.alphabet, 0, dict(edges), frozenset(range(len(order))))
    return RunGraph(g, tuple(order))


# --- EDA / IDA on weighted graphs ------------------------------------------------------

def _restrict(g: WGraph, keep: FrozenSet[int]) -> Dict[int, List[Tuple[str, int, int]]]:
    out: Dict[int, List[Tuple[str, int, int]]] = {q: [] for q in keep}
    for (p, c, q), m in sorted(g.edges.items()):
        if p in keep and q in keep:
            out[p].append((c, q, m))
    return out


def _digraph(succ: Dict[int, List[Tuple[str, int, int]]]) -> nx.DiGraph:
    d = nx.DiGraph()
    d.add_nodes_from(succ)
    for p, outs in succ.items():
        for c, q, _ in outs:
            d.add_edge(p, q)
    return d


def _path(succ_fn, start, goal_fn, min_len: int = 0):
    """Shortest ``(labels, end)`` from ``start`` to a node satisfying
    ``goal_fn`` using at least ``min_len`` (0 or 1) steps; ``None`` if none."""
    if min_len == 0 and goal_fn(start):
        return "", start
    prev = {start: None}
    q = deque([start])
    while q:
        x = q.popleft()
        for c, y in succ_fn(x):
            if goal_fn(y):
                path = [c]
                while prev[x] is not None:
                    x, cc = prev[x]
                    path.append(cc)
                return "".join(reversed(path)), y
            if y not in prev:
                prev[y] = (x, c)
                q.append(y)
    return None


def _word(succ_fn, start, goal_fn, min_len: int = 0) -> Optional[str]:
    found = _path(succ_fn, start, goal_fn, min_len)
    return None if found is None else found[0]


def _eda(g: WGraph) -> Optional[Tuple[int, str]]:
    useful = g.useful()
    succ = _restrict(g, useful)
    base = _digraph(succ)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(base)):
        for q in scc:
            comp[q] = i
    letters = lambda x: [(c, q) for c, q, _ in succ[x]]
    # parallel edges inside one component
    for p in sorted(useful):
        for c, q, m in succ[p]:
            if m >= 2 and comp[p] == comp[q]:
                back = _word(letters, q, lambda y: y == p)
                return p, c + back
    # pair product: a component holding a diagonal and an off-diagonal pair
    prod = nx.DiGraph()
    lab: Dict[Tuple, List[Tuple[str, Tuple[int, int]]]] = {}
    for p in useful:
        for q in useful:
            if comp[p] != comp[q]:
                continue
            outs = []
            by_c: Dict[str, List[int]] = {}
            for c, r, _ in succ[q]:
                by_c.setdefault(c, []).append(r)
            for c, r, _ in succ[p]:
                for s in by_c.get(c, ()):
                    if comp[r] == comp[p] and comp[s] == comp[p]:
                        outs.append((c, (r, s)))
                        prod.add_edge((p, q), (r, s))
            lab[(p, q)] = outs
            prod.add_node((p, q))
    best: Optional[Tuple[int, str]] = None
    for scc in nx.strongly_connected_components(prod):
        diag = sorted(x for x in scc if x[0] == x[1])
        if not diag or len(diag) == len(scc):
            continue
        inside = lambda x: [(c, y) for c, y in lab[x] if y in scc]
        for d in diag:
            # shortest closed walk through d that leaves the diagonal
            there, off = _path(inside, d, lambda y: y[0] != y[1], min_len=1)
            back = _word(inside, off, lambda y: y == d)
            cand = (d[0], there + back)
            if best is None or (len(cand[1]), cand[0]) < (len(best[1]), best[0]):
                best = cand
    return best


def _ida_pairs(g: WGraph) -> Tuple[Dict[Tuple[int, int], str], Dict[int, int], nx.DiGraph, FrozenSet[int]]:
    useful = g.useful()
    succ = _restrict(g, useful)
    base = _digraph(succ)
    comp: Dict[int, int] = {}
    sccs = list(nx.strongly_connected_components(base))
    for i, scc in enumerate(sccs):
        for q in scc:
            comp[q] = i
    cyclic = {q for q in useful if len(sccs[comp[q]]) > 1 or base.has_edge(q, q)}
    cond = nx.condensation(base, sccs)
    reach = {i: nx.descendants(cond, i) for i in cond.nodes}
    by_c = {p: {} for p in useful}
    for p in useful:
        for c, r, _ in succ[p]:
            by_c[p].setdefault(c, []).append(r)
    pairs: Dict[Tuple[int, int], str] = {}
    for p in sorted(cyclic):
        for q in sorted(cyclic):
            if comp[p] == comp[q] or comp[q] not in reach[comp[p]]:
                continue
            cp, cq = comp[p], comp[q]

            def step(x):
                a_, b_, c_ = x
                for sym_, r1s in by_c[a_].items():
                    r3s = [r for r in by_c[c_].get(sym_, ()) if comp[r] == cq]
                    if not r3s:
                        continue
                    for r1 in r1s:
                        if comp[r1] != cp:
                            continue
                        for r2 in by_c[b_].get(sym_, ()):
                            for r3 in r3s:
                                yield sym_, (r1, r2, r3)

            w = _word(step, (p, p, q), lambda y: y == (p, q, q), min_len=1)
            if w is not None:
                pairs[(p, q)] = w
    return pairs, comp, cond, useful


def _ida_degree(g: WGraph) -> Tuple[int, Tuple[Tuple[int, int, str], ...]]:
    pairs, comp, cond, useful = _ida_pairs(g)
    if g.initial not in useful:
        return 0, ()
    best: Dict[int, Tuple[int, Tuple]] = {}
    for s in reversed(list(nx.topological_sort(cond))):
        cand = (0, ())
        for t in cond.successors(s):
            if best[t][0] > cand[0]:
                cand = best[t]
        for (p, q), w in pairs.items():
            if comp[p] == s:
                sub = best[comp[q]]
                if 1 + sub[0] > cand[0]:
                    cand = (1 + sub[0], ((p, q, w),) + sub[1])
        best[s] = cand
    return best[comp[g.initial]]


def has_eda(n: Nfa, budget: int = DEFAULT_BUDGET) -> Tuple[bool, Optional[Tuple[int, str]]]:
    """Whether some useful state has two distinct short runs to itself on one
    word; the witness is ``(state, word)``."""
    w = _eda(eliminate_epsilon(n, budget))
    return w is not None, w


def ida_degree(n: Nfa, budget: int = DEFAULT_BUDGET) -> int:
    """Polynomial degree of ambiguity (0 means finitely ambiguous)."""
    g = eliminate_epsilon(n, budget)
    if _eda(g) is not None:
        raise ValueError("automaton is exponentially ambiguous")
    return _ida_degree(g)[0]


# --- ε-SCC quotient ------------------------------------------------------------------

@dataclass(frozen=True)
class SccQuotient:
    """ε-SCCs of an NFA, the quotient with ε self-loops removed, and the set
    ``Z`` of classes that carry an ε-cycle."""

    quotient: Nfa
    cls: Tuple[int, ...]
    category: Tuple[str, ...]  # per class: "a" single, "b" single with ε-loop, "c" several
    members: Tuple[Tuple[int, ...], ...]

    @property
    def Z(self) -> FrozenSet[int]:
        return frozenset(i for i, k in enumerate(self.category) if k != "a")


def epsilon_scc_quotient(n: Nfa) -> SccQuotient:
    g = nx.DiGraph()
    g.add_nodes_from(range(n.n_states))
    g.add_edges_from((p, q) for p, c, q in n.edges if c == EPSILON)
    sccs = sorted((sorted(s) for s in nx.strongly_connected_components(g)), key=lambda s: s[0])
    cls = [0] * n.n_states
    for i, s in enumerate(sccs):
        for q in s:
            cls[q] = i
    category = []
    for s in sccs:
        if len(s) > 1:
            category.append("c")
        elif g.has_edge(s[0], s[0]):
            category.append("b")
        else:
            category.append("a")
    edges = sorted({(cls[p], c, cls[q]) for p, c, q in n.edges
                    if not (c == EPSILON and cls[p] == cls[q])})
    quotient = Nfa(len(sccs), n.alphabet, cls[n.initial], tuple(edges),
                   frozenset(cls[q] for q in n.finals),
                   tuple("{" + ",".join(n.names[q] for q in s) + "}" for s in sccs))
    return SccQuotient(quotient, tuple(cls), tuple(category), tuple(tuple(s) for s in sccs))


# --- classification -----------------------------------------------------------------

def short_run_verdict(a: Pnfa, budget: int = DEFAULT_BUDGET) -> str:
    """Ambiguity class of ``a(N(Aᶠ))`` under short-run counting."""
    g = eliminate_epsilon(a_construction(underlying_nfa(failure_pnfa(a).trim())), budget)
    if _eda(g) is not None:
        return "Exponential"
    return f"Polynomial({max(_ida_degree(g)[0] - 1, 0)})"


def classify_failure_backtracking(a: Pnfa, attack: bool = True,
                                  budget: int = DEFAULT_BUDGET) -> BacktrackClass:
    """Exponential or Polynomial(k) failure backtracking of ``a``."""
    af = failure_pnfa(a)
    rg = run_graph(af)
    ag = _a_graph(rg.graph)
    try:
        short = short_run_verdict(a, budget)
    except BudgetExceeded:
        short = None
    quotient = epsilon_scc_quotient(a_construction(underlying_nfa(af.trim())))
    eda = _eda(ag)
    if eda is not None:
        node, word = eda
        cls = BacktrackClass(Verdict.EXPONENTIAL, eda_state=rg.state_of[node], eda_word=word,
                             short_run_verdict=short, quotient=quotient)
        if not attack:
            return cls
        found, note = search_attack(cls, a, budget=budget, _graph=rg)
        return BacktrackClass(cls.verdict, eda_state=cls.eda_state, eda_word=word, attack=found,
                              diagnostic=note, short_run_verdict=short, quotient=quotient)
    deg, chain = _ida_degree(ag)
    z = ag.n_states - 1
    named = tuple((rg.state_of[p], -1 if q == z else rg.state_of[q], w) for p, q, w in chain)
    return BacktrackClass(Verdict.POLYNOMIAL, degree=max(deg - 1, 0), bounded=deg == 0,
                          ida_chain=named, short_run_verdict=short, quotient=quotient)


def classify(source, construction: str = "java", alphabet=None, **kw) -> BacktrackClass:
    from .construct import compile_regex

    a = source if isinstance(source, Pnfa) else compile_regex(source, construction, alphabet)
    return classify_failure_backtracking(a, **kw)


# --- attack strings --------------------------------------------------------------------

ATTACK_PUMPS = (3, 4, 5, 6, 7)
ATTACK_RATIO = 1.5


def validate_attack(a: Pnfa, prefix: str, pump: str, suffix: str,
                    pumps: Sequence[int] = ATTACK_PUMPS, budget: int = DEFAULT_BUDGET) -> Optional[Attack]:
    """Measure btr sizes on ``prefix·pumpⁱ·suffix``; ``None`` unless every
    successive ratio is at least 1.5."""
    sizes = tuple(btr_measure(a, prefix + pump * i + suffix, budget).size for i in pumps)
    ratios = tuple(sizes[i + 1] / sizes[i] for i in range(len(sizes) - 1))
    if all(r >= ATTACK_RATIO for r in ratios):
        return Attack(prefix, pump, suffix, sizes, ratios, tuple(pumps))
    return None


def search_attack(cls: BacktrackClass, a: Pnfa, max_suffix: int = 3,
                  budget: int = DEFAULT_BUDGET, _graph: Optional[RunGraph] = None) -> Tuple[Optional[Attack], str]:
    """Prefix reaching the EDA state, its pump, and the first short suffix
    that makes btr sizes grow by at least 1.5 per pump."""
    if not cls.exponential or cls.eda_word is None:
        return None, "no EDA witness"
    rg = _graph or run_graph(failure_pnfa(a))
    target = rg.state_of.index(cls.eda_state)
    succ = rg.graph.succ()
    prefix = _word(lambda x: [(c, q) for c, q, _ in succ[x]], 0, lambda y: y == target)
    if prefix is None:
        return None, "EDA state unreachable"
    sigma = sorted(a.alphabet)
    suffixes = [""] + ["".join(p) for k in range(1, max_suffix + 1)
                       for p in itertools.product(sigma, repeat=k)]
    # the primitive root of the pump, absorbing any trailing copies in the prefix
    root = _primitive_root(cls.eda_word)
    short_prefix = prefix
    while root and short_prefix.endswith(root):
        short_prefix = short_prefix[: -len(root)]
    shapes = list(dict.fromkeys([(short_prefix, root), (prefix, root), (prefix, cls.eda_word)]))
    for pre, pump in shapes:
        for suffix in suffixes:
            try:
                found = validate_attack(a, pre, pump, suffix, budget=budget)
            except BudgetExceeded as exc:
                return None, f"validation budget exhausted: {exc}"
            if found is not None:
                return found, ""
    return None, f"no suffix of length <= {max_suffix} validated"


def _primitive_root(v: str) -> str:
    for k in range(1, len(v) + 1):
        if len(v) % k == 0 and v[:k] * (len(v) // k) == v:
            return v[:k]
    return v


def attack_strings(cls: BacktrackClass, a: Pnfa, budget: int = DEFAULT_BUDGET) -> Optional[Tuple[str, str, str]]:
    found = cls.attack if cls.attack is not None else search_attack(cls, a, budget=budget)[0]
    return None if found is None else (found.prefix, found.pump, found.suffix)
