"""δ₂-flattening: make every priority transition point at a reading state."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .automaton import Pnfa


def rbar(seq: Iterable[Hashable]) -> Tuple:
    """Keep the first two occurrences of every element, in order."""
    seen: Dict[Hashable, int] = {}
    out = []
    for q in seq:
        c = seen.get(q, 0)
        if c < 2:
            out.append(q)
        seen[q] = c + 1
    return tuple(out)


def leaves(a: Pnfa, q: int, counters: Optional[Mapping[int, int]] = None,
           trace: Optional[List[str]] = None) -> Tuple[int, ...]:
    """``d(q, C)``: the reading states met, in priority order, by exploring
    ε-moves from ``q`` under counter map ``C``.

    Branch ``j`` of a choice state is explored with ``C(q) = j``, the same
    bookkeeping a backtracking run uses, so the result lists exactly the
    reading-state leaves of that run's ε-prefix.
    """
    return _explore(a, q, counters, trace)[0]


def _explore(a: Pnfa, q: int, counters: Optional[Mapping[int, int]],
             trace: Optional[List[str]]) -> Tuple[Tuple[int, ...], bool]:
    # also reports whether any visited state, choice states included, is final
    hit = False
    out: List[int] = []
    stack: List[Tuple[int, Dict[int, int], int]] = [(q, dict(counters or {}), 0)]
    while stack:
        p, C, depth = stack.pop()
        if trace is not None:
            shown = ",".join(f"{a.names[k]}:{v}" for k, v in sorted(C.items()) if v)
            trace.append(f"{'  ' * depth}d({a.names[p]}, {{{shown}}})")
        hit = hit or p in a.finals
        if p not in a.choice:
            out.append(p)
            continue
        alts = a.delta2[p]
        for j in range(len(alts), C.get(p, 0), -1):
            C2 = dict(C)
            C2[p] = j
            stack.append((alts[j - 1], C2, depth + 1))
    return tuple(out), hit


@dataclass(frozen=True)
class FlattenResult:
    automaton: Pnfa
    # old state id -> new state id, for states that survived pruning
    state_map: Dict[int, int]
    trace: Tuple[str, ...] = field(default=())


def flatten_with_log(a: Pnfa, prune: bool = True, trace: bool = False) -> FlattenResult:
    lines: Optional[List[str]] = [] if trace else None
    d0 = {q: _explore(a, q, None, lines) for q in sorted(a.choice)}
    delta2 = {q: rbar(seq) for q, (seq, _) in d0.items()}
    # a choice state accepts at end of input iff its ε-exploration meets F
    finals = set(a.finals)
    finals.update(q for q, (_, hit) in d0.items() if hit)
    flat = Pnfa(a.n_states, a.alphabet, a.initial, a.delta1, delta2, frozenset(finals),
                a.choice, a.names)
    mapping = {q: q for q in range(a.n_states)}
    if prune:
        flat, mapping = flat.restrict(flat.reachable())
    return FlattenResult(flat, mapping, tuple(lines or ()))


def flatten(a: Pnfa, prune: bool = True) -> Pnfa:
    """The δ₂-flattening of ``a``; unreachable states are dropped by default."""
    return flatten_with_log(a, prune).automaton


def is_flat(a: Pnfa) -> bool:
    return all(t not in a.choice for ts in a.delta2.values() for t in ts)


def is_final_closed(a: Pnfa) -> bool:
    """Every choice state with a final alternative is itself final.

    Flattening establishes this; the transducer relies on it because a
    choice state's end-of-input behaviour is read off its own final flag.
    """
    return all(q in a.finals for q, ts in a.delta2.items() if a.finals.intersection(ts))
