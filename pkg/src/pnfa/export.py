"""JSON and Graphviz DOT serialization."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence

from .ambiguity import BacktrackClass
from .automaton import ACC, EPSILON, REJ, Nfa, Pnfa, Tree, accepting_run, succeeds
from .transducer import GrowthEstimate


def load_schema(name: str) -> Dict[str, Any]:
    """One of ``pnfa``, ``nfa``, ``btr``, ``classify``, ``growth``, ``report``."""
    text = resources.files("pnfa.schemas").joinpath(f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def pnfa_to_json(a: Pnfa) -> Dict[str, Any]:
    return {
        "schema": "pnfa/1",
        "alphabet": sorted(a.alphabet),
        "initial": a.initial,
        "states": [{"id": q, "name": a.names[q], "kind": "choice" if q in a.choice else "read",
                    "final": q in a.finals} for q in range(a.n_states)],
        "delta1": [{"from": q, "symbol": c, "to": t} for (q, c), t in sorted(a.delta1.items())],
        "delta2": [{"from": q, "targets": list(ts)} for q, ts in sorted(a.delta2.items())],
    }


def pnfa_from_json(doc: Dict[str, Any]) -> Pnfa:
    states = sorted(doc["states"], key=lambda s: s["id"])
    if [s["id"] for s in states] != list(range(len(states))):
        raise ValueError("state ids must be 0..n-1")
    return Pnfa(
        n_states=len(states),
        alphabet=frozenset(doc["alphabet"]),
        initial=doc["initial"],
        delta1={(d["from"], d["symbol"]): d["to"] for d in doc["delta1"]},
        delta2={d["from"]: tuple(d["targets"]) for d in doc["delta2"]},
        finals=frozenset(s["id"] for s in states if s["final"]),
        choice=frozenset(s["id"] for s in states if s["kind"] == "choice"),
        names=tuple(s["name"] for s in states),
    )


def nfa_to_json(n: Nfa) -> Dict[str, Any]:
    return {
        "schema": "nfa/1",
        "alphabet": sorted(n.alphabet),
        "initial": n.initial,
        "states": list(n.names),
        "finals": sorted(n.finals),
        "edges": [{"from": p, "label": None if c == EPSILON else c, "to": q} for p, c, q in n.edges],
    }


def tree_preorder(t: Tree) -> List[List[Any]]:
    out: List[List[Any]] = []
    stack = [t]
    while stack:
        x = stack.pop()
        out.append([str(x.label) if x.label in (ACC, REJ) else x.label, len(x.children)])
        stack.extend(reversed(x.children))
    return out


def tree_from_preorder(items: Sequence[Sequence[Any]]) -> Tree:
    def lab(x):
        return ACC if x == "Acc" else REJ if x == "Rej" else int(x)

    # rebuild right to left: a node's children are the finished subtrees on top
    done: List[Tree] = []
    for label, k in reversed(items):
        kids = tuple(done.pop() for _ in range(k))
        done.append(Tree(lab(label), kids))
    if len(done) != 1:
        raise ValueError("preorder list does not describe one tree")
    return done[0]


def tree_to_json(t: Tree, w: str = "", a: Optional[Pnfa] = None) -> Dict[str, Any]:
    run = accepting_run(t)
    return {
        "schema": "btr/1",
        "input": w,
        "size": t.size(),
        "steps": t.steps(),
        "succeeds": succeeds(t),
        "run": None if run is None else list(run.states),
        "preorder": tree_preorder(t),
    }


def classify_to_json(c: BacktrackClass, regex: str, construction: str, seconds: float,
                     names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
    nm = (lambda q: "z" if q < 0 else (names[q] if names else str(q)))
    witness: Optional[Dict[str, Any]] = None
    if c.exponential and c.eda_state is not None:
        witness = {"state": nm(c.eda_state), "word": c.eda_word}
    elif c.ida_chain:
        witness = {"ida_chain": [{"p": nm(p), "q": nm(q), "word": w} for p, q, w in c.ida_chain]}
    attack = None
    if c.attack is not None:
        at = c.attack
        attack = {"prefix": at.prefix, "pump": at.pump, "suffix": at.suffix, "pumps": list(at.pumps),
                  "sizes": list(at.sizes), "ratios": [round(r, 4) for r in at.ratios]}
    doc = {
        "schema": "classify/1",
        "regex": regex,
        "construction": construction,
        "verdict": c.verdict.value,
        "degree": c.degree,
        "bounded": c.bounded,
        "witness": witness,
        "attack": attack,
        "diagnostic": c.diagnostic,
        "short_run_verdict": c.short_run_verdict,
        "timings": {"seconds": round(seconds, 6)},
    }
    if c.quotient is not None:
        q = c.quotient
        doc["epsilon_classes"] = {"count": len(q.members),
                                  "Z": sorted(q.quotient.names[i] for i in q.Z)}
    return doc


def growth_to_json(g: GrowthEstimate, regex: str, construction: str, seed: int) -> Dict[str, Any]:
    return {
        "schema": "growth/1",
        "regex": regex,
        "construction": construction,
        "method": g.method,
        "verdict": g.verdict,
        "degree": g.degree,
        "slope": g.slope,
        "lengths": list(g.lengths),
        "maxima": list(g.maxima),
        "witnesses": list(g.witnesses),
        "ratios": [round(r, 6) for r in g.ratios],
        "exhaustive_upto": g.exhaustive_upto,
        "note": g.note,
        "seed": seed,
    }


# --- DOT ---------------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def pnfa_to_dot(a: Pnfa, title: str = "pnfa") -> str:
    """Choice states are boxes; ε-edges carry their priority."""
    lines = [f"digraph {_q(title)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in range(a.n_states):
        shape = "box" if q in a.choice else "circle"
        periph = 2 if q in a.finals else 1
        lines.append(f"  {q} [label={_q(a.names[q])}, shape={shape}, peripheries={periph}];")
    lines.append(f"  __start -> {a.initial};")
    for (q, c), t in sorted(a.delta1.items()):
        lines.append(f"  {q} -> {t} [label={_q(c)}];")
    for q, ts in sorted(a.delta2.items()):
        for i, t in enumerate(ts, 1):
            lines.append(f"  {q} -> {t} [label={_q(f'ε/{i}')}, style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def nfa_to_dot(n: Nfa, title: str = "nfa") -> str:
    lines = [f"digraph {_q(title)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in range(n.n_states):
        periph = 2 if q in n.finals else 1
        lines.append(f"  {q} [label={_q(n.names[q])}, shape=circle, peripheries={periph}];")
    lines.append(f"  __start -> {n.initial};")
    for p, c, q in n.edges:
        lines.append(f"  {p} -> {q} [label={_q(c or 'ε')}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_dot(t: Tree, names: Optional[Sequence[str]] = None, title: str = "btr") -> str:
    lines = [f"digraph {_q(title)} {{", "  node [shape=plaintext];"]
    counter = 0
    stack = [(t, None)]
    while stack:
        x, parent = stack.pop()
        me = counter
        counter += 1
        if x.label in (ACC, REJ):
            text = str(x.label)
        else:
            text = names[x.label] if names else str(x.label)
        lines.append(f"  n{me} [label={_q(text)}];")
        if parent is not None:
            lines.append(f"  n{parent} -> n{me};")
        stack.extend((c, me) for c in reversed(x.children))
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False)
