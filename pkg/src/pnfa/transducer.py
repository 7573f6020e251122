"""String-to-tree transducers that replay backtracking runs of flat pNFAs."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .automaton import ACC, REJ, Pnfa, Tree
from .flatten import is_final_closed, is_flat
from .regex import BudgetExceeded

PAD = "♭"
END = "$"

DEFAULT_THETA = 0.25
DEFAULT_WINDOW = 4
STABLE_RATIO = 0.9  # last excess ratio over first, across the window


@dataclass(frozen=True, order=True)
class StState:
    """Transducer state: ``start``, or ``a``/``f`` paired with a pNFA state.

    ``a_q`` produces runs from ``q`` that accept, ``f_q`` runs that fail.
    """

    mode: str
    q: int = -1

    def __str__(self):
        return "q0'" if self.mode == "start" else f"{self.mode}_{self.q}"


START = StState("start")


@dataclass(frozen=True)
class Stt:
    states: Tuple[StState, ...]
    input_alphabet: FrozenSet[str]
    output_alphabet: FrozenSet[object]
    initial: StState
    # right-hand sides are trees whose leaves may be labelled by StState
    rules: Dict[Tuple[StState, str], Tuple[Tree, ...]] = field(hash=False)
    source: Optional[Pnfa] = field(default=None, compare=False, hash=False)

    def rhs(self, s: StState, c: str) -> Tuple[Tree, ...]:
        return self.rules.get((s, c), ())

    def rule_count(self) -> int:
        return sum(len(v) for v in self.rules.values())

    def dump_rules(self) -> List[str]:
        names = self.source.names if self.source is not None else None

        def show(t: Tree) -> str:
            lab = t.label
            if isinstance(lab, StState):
                text = str(lab) if names is None or lab.q < 0 else f"{lab.mode}_{names[lab.q]}"
            elif isinstance(lab, int) and names is not None:
                text = names[lab]
            else:
                text = str(lab)
            if not t.children:
                return text
            return text + "[" + ",".join(show(c) for c in t.children) + "]"

        out = []
        for (s, c), rhss in sorted(self.rules.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            for t in rhss:
                out.append(f"{show(Tree(s))} --{c}--> {show(t)}")
        return out


class NotFlatError(ValueError):
    pass


def build_stt(a: Pnfa) -> Stt:
    """Transducer whose output on ``decorate(w)`` is the backtracking run of
    ``a`` on ``w``.  ``a`` must be flat and final-closed (as produced by
    :func:`pnfa.flatten.flatten`)."""
    if not is_flat(a):
        raise NotFlatError("pNFA has a choice state targeting a choice state; flatten it first")
    if not is_final_closed(a):
        raise NotFlatError("a non-final choice state has a final alternative; flatten it first")
    sym = sorted(a.alphabet)
    if PAD in a.alphabet or END in a.alphabet:
        raise ValueError(f"alphabet must not contain {PAD!r} or {END!r}")
    A = lambda q: StState("a", q)
    Fm = lambda q: StState("f", q)
    rules: Dict[Tuple[StState, str], List[Tree]] = {}

    def add(s: StState, c: str, t: Tree) -> None:
        rules.setdefault((s, c), []).append(t)

    states = [START] + [m(q) for q in range(a.n_states) for m in (A, Fm)]
    # 1. start and padding
    add(START, END, Tree(A(a.initial)))
    add(START, END, Tree(Fm(a.initial)))
    for s in states:
        add(s, PAD, Tree(s))
    for q in range(a.n_states):
        if q not in a.choice:
            # 2. reading states
            for c in sym:
                t = a.delta1.get((q, c))
                if t is not None:
                    add(A(q), c, Tree(q, (Tree(A(t)),)))
                    add(Fm(q), c, Tree(q, (Tree(Fm(t)),)))
                else:
                    add(Fm(q), c, Tree(q, (Tree(REJ),)))
        else:
            # 3. choice states; an empty alternative list fails outright
            alts = a.delta2[q]
            for i in range(len(alts)):
                kids = tuple(Tree(Fm(p)) for p in alts[:i]) + (Tree(A(alts[i])),)
                add(A(q), PAD, Tree(q, kids))
            if alts:
                add(Fm(q), PAD, Tree(q, tuple(Tree(Fm(p)) for p in alts)))
            else:
                add(Fm(q), PAD, Tree(q, (Tree(REJ),)))
        # 4. end of input
        if q in a.finals:
            add(A(q), END, Tree(q, (Tree(ACC),)))
        elif q not in a.choice or not a.delta2[q]:
            add(Fm(q), END, Tree(q, (Tree(REJ),)))
        else:
            add(Fm(q), END, Tree(q, tuple(Tree(p, (Tree(REJ),)) for p in a.delta2[q])))
    gamma = frozenset(range(a.n_states)) | {ACC, REJ}
    return Stt(tuple(states), frozenset(a.alphabet) | {PAD, END}, gamma, START,
               {k: tuple(v) for k, v in rules.items()}, a)


def decorate(w: str, alphabet: Optional[Iterable[str]] = None) -> str:
    """``$♭a1♭a2…♭an$``."""
    if PAD in w or END in w:
        raise ValueError(f"input must not contain {PAD!r} or {END!r}")
    if alphabet is not None:
        bad = set(w) - set(alphabet)
        if bad:
            raise ValueError(f"symbols {sorted(bad)} not in alphabet")
    return END + "".join(PAD + c for c in w) + END


def _plug(rhs: Tree, table: Dict[StState, Tuple[Tree, ...]]) -> List[Tree]:
    """Every way of replacing the state leaves of ``rhs`` by trees in ``table``."""
    if isinstance(rhs.label, StState):
        return list(table.get(rhs.label, ()))
    if not rhs.children:
        return [rhs]
    options = [_plug(c, table) for c in rhs.children]
    if any(not o for o in options):
        return []
    return [Tree(rhs.label, combo) for combo in itertools.product(*options)]


def run_stt(t: Stt, u: str, budget: int = 100_000) -> FrozenSet[Tree]:
    """All output trees of ``t`` on ``u``.

    ``S[i][s]`` holds the trees state ``s`` yields on the suffix ``u[i:]``;
    it depends only on ``S[i+1]``, so the table is filled right to left.
    Subtrees are shared, never copied.  ``budget`` caps the number of
    distinct intermediate trees.
    """
    n = len(u)
    table: Dict[StState, Tuple[Tree, ...]] = {}  # position n: nothing survives
    made = 0
    for i in range(n - 1, -1, -1):
        c = u[i]
        nxt: Dict[StState, Tuple[Tree, ...]] = {}
        for s in t.states:
            out = set()
            for rhs in t.rhs(s, c):
                if _has_state_leaf(rhs):
                    out.update(_plug(rhs, table))
                else:
                    out.add(rhs)
            if out:
                made += len(out)
                if made > budget:
                    raise BudgetExceeded(made, budget, "trees")
                nxt[s] = tuple(out)
        table = nxt
    return frozenset(table.get(t.initial, ()))


def _has_state_leaf(t: Tree) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x.label, StState):
            return True
        stack.extend(x.children)
    return False


# --- empirical growth ------------------------------------------------------------

@dataclass(frozen=True)
class GrowthEstimate:
    """Per-length maxima of output size and an empirical verdict.

    ``verdict`` is ``"exponential"``, ``"poly"`` (with ``degree`` k meaning
    Θ(n^(k+1))), ``"bounded"`` or ``"inconclusive"``.
    """

    lengths: Tuple[int, ...]
    maxima: Tuple[int, ...]
    witnesses: Tuple[str, ...]
    ratios: Tuple[float, ...]
    verdict: str
    degree: Optional[int] = None
    slope: Optional[float] = None
    exhaustive_upto: int = 0
    note: str = ""
    method: str = "empirical"

    def label(self) -> str:
        if self.verdict == "poly":
            return f"poly({self.degree})"
        return self.verdict


def _candidates(alphabet: Sequence[str], n: int, exhaustive_limit: int, samples: int,
                rng: random.Random) -> Tuple[List[str], bool]:
    sigma = sorted(alphabet)
    if not sigma:
        return ([""] if n == 0 else []), True
    if len(sigma) ** n <= exhaustive_limit:
        return ["".join(p) for p in itertools.product(sigma, repeat=n)], True
    words = set()
    # pumped words: short periods repeated, then a one-letter tail
    for plen in range(1, 4):
        for period in itertools.product(sigma, repeat=plen):
            for tail in [""] + sigma:
                body = "".join(period) * n
                words.add(body[: n - len(tail)] + tail)
    while len(words) < samples + 1:
        words.add("".join(rng.choice(sigma) for _ in range(n)))
    return sorted(words), False


def classify_growth(lengths: Sequence[int], maxima: Sequence[int],
                    theta: float = DEFAULT_THETA, window: int = DEFAULT_WINDOW) -> Tuple[str, Optional[int], Optional[float], Tuple[float, ...]]:
    """Verdict from a monotone size sequence: successive ratios, then the
    log-log slope over the last ``window`` lengths."""
    ratios = tuple(maxima[i + 1] / maxima[i] for i in range(len(maxima) - 1) if maxima[i] > 0)
    if len(maxima) < window or window < 2:
        return "inconclusive", None, None, ratios
    tail_n = [x for x in lengths[-window:]]
    tail_f = [x for x in maxima[-window:]]
    tail_r = ratios[-(window - 1):]
    # exponential: ratios settle at a constant above 1 + θ; polynomial ratios
    # keep sinking towards 1 (r - 1 shrinks like k/n)
    if all(r >= 1 + theta for r in tail_r) and tail_r[-1] - 1 >= STABLE_RATIO * (tail_r[0] - 1):
        return "exponential", None, None, ratios
    if len(set(tail_f)) == 1:
        return "bounded", None, 0.0, ratios
    if tail_n[0] <= 0:
        return "inconclusive", None, None, ratios
    xs = [math.log(x) for x in tail_n]
    ys = [math.log(y) for y in tail_f]
    slope = _lsq_slope(xs, ys)
    half = window // 2
    s1 = _lsq_slope(xs[: half + 1], ys[: half + 1])
    s2 = _lsq_slope(xs[half:], ys[half:])
    deg = round(slope)
    if deg >= 1 and abs(s1 - s2) < 0.5 and abs(slope - deg) < 0.45:
        return "poly", deg - 1, slope, ratios
    return "inconclusive", None, slope, ratios


def _lsq_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    den = sum((x - mx) ** 2 for x in xs)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / den if den else 0.0


def growth_probe(t: Stt, max_n: int = 10, budget: int = 200_000, seed: int = 0,
                 exhaustive_limit: int = 256, samples: int = 64,
                 theta: float = DEFAULT_THETA, window: int = DEFAULT_WINDOW,
                 min_n: int = 1) -> GrowthEstimate:
    """Largest transducer output over decorated inputs of each length.

    Lengths whose words all fit in ``exhaustive_limit`` are enumerated;
    longer ones use pumped candidates plus ``samples`` seeded random words.
    """
    rng = random.Random(seed)
    sigma = sorted(t.input_alphabet - {PAD, END})
    lengths: List[int] = []
    maxima: List[int] = []
    witnesses: List[str] = []
    best, best_w = 0, ""
    exhaustive_upto = -1
    note = ""
    for n in range(0, max_n + 1):
        words, exhaustive = _candidates(sigma, n, exhaustive_limit, samples, rng)
        if exhaustive and exhaustive_upto == n - 1:
            exhaustive_upto = n
        try:
            for w in words:
                for tree in run_stt(t, decorate(w), budget):
                    size = tree.size()
                    if size > best:
                        best, best_w = size, w
        except BudgetExceeded as exc:
            note = f"stopped at length {n}: {exc}"
            break
        if n >= min_n:
            lengths.append(n)
            maxima.append(best)
            witnesses.append(best_w)
    verdict, degree, slope, ratios = classify_growth(lengths, maxima, theta, window)
    if note and verdict != "exponential":
        verdict = "inconclusive"
    return GrowthEstimate(tuple(lengths), tuple(maxima), tuple(witnesses), ratios, verdict,
                          degree, slope, max(exhaustive_upto, 0), note)
