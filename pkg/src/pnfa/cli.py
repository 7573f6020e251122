"""Command-line interface.

Exit codes: 0 ok, 1 usage or parse error, 2 exponential verdict,
3 budget exhausted.
"""

from __future__ import annotations

import csv
import io
import os
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence

import click

from . import export
from .ambiguity import classify_failure_backtracking, failure_pnfa
from .automaton import DEFAULT_BUDGET, btr, btr_measure, match_run
from .construct import CONSTRUCTIONS, JAVA, compile_regex
from .flatten import flatten_with_log
from .regex import (BudgetExceeded, RegexAst, RegexSyntaxError, hardness_gadget, parse,
                    random_corpus, to_text)
from .transducer import PAD, build_stt, decorate, growth_probe, run_stt

EXIT_OK, EXIT_USAGE, EXIT_EXPONENTIAL, EXIT_BUDGET = 0, 1, 2, 3
BUDGET_ENV = "PNFA_BUDGET"
_FRESH = "bcdefghijklmnopqrstuvwxyz#"


def _default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise click.UsageError(f"{BUDGET_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise click.UsageError(f"{BUDGET_ENV} must be positive")
    return value


def _alphabet(ast: RegexAst, given: Optional[str]) -> List[str]:
    """Explicit ``--alphabet``, else the regex symbols plus one symbol the
    regex does not mention (real inputs contain foreign characters)."""
    if given is not None:
        if "$" in given or PAD in given:
            raise click.UsageError("alphabet must not contain '$' or '♭'")
        return sorted(set(given))
    sigma = set(ast.alphabet())
    sigma.add(next(c for c in "a" + _FRESH if c not in sigma))
    return sorted(sigma)


def _common(f: Callable) -> Callable:
    opts = [
        click.option("--construction", "-c", type=click.Choice(CONSTRUCTIONS), default=JAVA,
                     show_default=True, help="pNFA construction."),
        click.option("--alphabet", "-a", default=None,
                     help="Input alphabet as a string of symbols (default: regex symbols plus one foreign symbol)."),
        click.option("--budget-nodes", "budget", type=click.IntRange(min=1), default=None,
                     help=f"Node budget for runs (default ${BUDGET_ENV} or {DEFAULT_BUDGET})."),
        click.option("--json", "as_json", is_flag=True, help="Emit JSON."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _compile(regex: str, construction: str, alphabet: Optional[str]):
    ast = parse(regex)
    sigma = _alphabet(ast, alphabet)
    return ast, compile_regex(ast, construction, sigma)


def _budget(b: Optional[int]) -> int:
    return b if b is not None else _default_budget()


def _check_word(w: str, sigma: Sequence[str]) -> None:
    bad = sorted(set(w) - set(sigma))
    if bad:
        raise click.UsageError(f"input symbols {bad} are not in the alphabet {sigma}")


def _emit(doc) -> None:
    click.echo(export.dumps(doc))


def _table(rows: List[Sequence], header: Sequence[str], path: Optional[str], delimiter: str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    click.echo(buf.getvalue(), nl=False)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli() -> None:
    """Backtracking analysis of regular expressions via prioritized NFAs."""


@cli.command("compile")
@_common
@click.argument("regex")
@click.option("--dot", "as_dot", is_flag=True, help="Emit Graphviz DOT instead of JSON.")
def compile_cmd(regex, construction, alphabet, budget, as_json, as_dot):
    """Compile REGEX to a pNFA."""
    _, a = _compile(regex, construction, alphabet)
    if as_dot:
        click.echo(export.pnfa_to_dot(a), nl=False)
    else:
        _emit(export.pnfa_to_json(a))
    return EXIT_OK


@cli.command("match")
@_common
@click.argument("regex")
@click.argument("word")
def match_cmd(regex, word, construction, alphabet, budget, as_json):
    """Run the prioritized matcher on WORD and report its cost."""
    ast, a = _compile(regex, construction, alphabet)
    _check_word(word, sorted(a.alphabet))
    res = match_run(a, word, _budget(budget))
    size = btr_measure(a, word, _budget(budget)).size
    run = None if res.run is None else [a.names[q] for q in res.run.states]
    if as_json:
        _emit({"schema": "report/1", "command": "match", "regex": to_text(ast), "input": word,
               "construction": construction, "accepted": res.matched, "invocations": res.invocations,
               "btr_size": size, "run": run})
    else:
        click.echo(f"{'accept' if res.matched else 'reject'}\tinvocations={res.invocations}\tbtr_size={size}")
        if run:
            click.echo("run: " + " ".join(run))
    return EXIT_OK


@cli.command("btr")
@_common
@click.argument("regex")
@click.argument("word")
@click.option("--dot", "as_dot", is_flag=True, help="Emit the tree as Graphviz DOT.")
def btr_cmd(regex, word, construction, alphabet, budget, as_json, as_dot):
    """Print the backtracking run of REGEX on WORD."""
    _, a = _compile(regex, construction, alphabet)
    _check_word(word, sorted(a.alphabet))
    t = btr(a, word, _budget(budget))
    if as_dot:
        click.echo(export.tree_to_dot(t, a.names), nl=False)
    elif as_json:
        _emit(export.tree_to_json(t, word, a))
    else:
        click.echo(t.render(a.names))
        click.echo(f"size={t.size()} steps={t.steps()}")
    return EXIT_OK


@cli.command("classify")
@_common
@click.argument("regex")
def classify_cmd(regex, construction, alphabet, budget, as_json):
    """Decide exponential versus polynomial failure backtracking (exit 2 if exponential)."""
    ast, a = _compile(regex, construction, alphabet)
    start = time.perf_counter()
    c = classify_failure_backtracking(a, budget=_budget(budget))
    seconds = time.perf_counter() - start
    if as_json:
        _emit(export.classify_to_json(c, to_text(ast), construction, seconds, a.names))
    else:
        line = c.label() + (" (bounded)" if c.bounded else "")
        if c.attack is not None:
            at = c.attack
            line += f"\tattack: prefix={at.prefix!r} pump={at.pump!r} suffix={at.suffix!r}"
        elif c.exponential:
            line += f"\tno validated attack: {c.diagnostic}"
        click.echo(line)
    return EXIT_EXPONENTIAL if c.exponential else EXIT_OK


def _family(prefix: str, pump: str, suffix: str, n: int) -> str:
    return prefix + pump * n + suffix


@cli.command("compare")
@click.argument("regex")
@click.option("--alphabet", "-a", default=None, help="Input alphabet.")
@click.option("--prefix", default="", show_default=True)
@click.option("--pump", default="a", show_default=True)
@click.option("--suffix", default="b", show_default=True)
@click.option("--min-n", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--max-n", type=click.IntRange(min=0), default=12, show_default=True)
@click.option("--failure", is_flag=True, help="Measure the pNFAs with accepting states removed.")
@click.option("--budget-nodes", "budget", type=click.IntRange(min=1), default=None)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Also write the table here.")
@click.option("--figure", type=click.Path(dir_okay=False), default=None, help="Render a PNG plot.")
@click.option("--delimiter", default="\t", show_default=False, help="Column delimiter (default tab).")
@click.option("--json", "as_json", is_flag=True)
def compare_cmd(regex, alphabet, prefix, pump, suffix, min_n, max_n, failure, budget, output, figure,
                delimiter, as_json):
    """Backtracking run sizes of both constructions on prefix·pumpⁿ·suffix.

    Sizes are exact; identical sub-attempts are counted once and reused.
    """
    ast = parse(regex)
    sigma = _alphabet(ast, alphabet)
    for part in (prefix, pump, suffix):
        _check_word(part, sigma)
    auto = {c: compile_regex(ast, c, sigma) for c in CONSTRUCTIONS}
    if failure:
        auto = {c: failure_pnfa(a) for c, a in auto.items()}
    b = _budget(budget)
    lengths = list(range(min_n, max_n + 1))
    series: Dict[str, List[Optional[int]]] = {c: [] for c in CONSTRUCTIONS}
    for c, a in auto.items():
        dead = False
        for n in lengths:
            if dead:
                series[c].append(None)
                continue
            try:
                series[c].append(btr_measure(a, _family(prefix, pump, suffix, n), b).size)
            except BudgetExceeded:
                series[c].append(None)
                dead = True

    def ratio(ys, i):
        return "" if i == 0 or ys[i] is None or ys[i - 1] in (None, 0) else f"{ys[i] / ys[i - 1]:.4f}"

    rows = []
    for i, n in enumerate(lengths):
        rows.append([n] + [("budget" if series[c][i] is None else series[c][i]) for c in CONSTRUCTIONS]
                    + [ratio(series[c], i) for c in CONSTRUCTIONS])
    header = ["n"] + list(CONSTRUCTIONS) + [f"{c}_ratio" for c in CONSTRUCTIONS]
    if as_json:
        _emit({"schema": "report/1", "command": "compare", "regex": to_text(ast), "failure": failure,
               "family": {"prefix": prefix, "pump": pump, "suffix": suffix},
               "lengths": lengths, "sizes": series})
    else:
        _table(rows, header, output, delimiter)
    if figure:
        from .plotting import plot_series

        kind = "failure run size" if failure else "backtracking run size"
        plot_series(lengths, series, figure, title=f"{to_text(ast)} on {prefix}({pump})^n{suffix}",
                    ylabel=kind)
    budget_hit = any(v is None for ys in series.values() for v in ys)
    return EXIT_BUDGET if budget_hit else EXIT_OK


@cli.command("corpus")
@click.argument("path", required=False, type=click.Path(exists=True, dir_okay=False))
@_common
@click.option("--generate", type=click.IntRange(min=1), default=None, help="Generate this many random expressions.")
@click.option("--max-size", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--top", type=click.IntRange(min=0), default=5, show_default=True, help="Worst offenders to list.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Also write the table here.")
@click.option("--figure", type=click.Path(dir_okay=False), default=None, help="Render a PNG histogram.")
@click.option("--delimiter", default="\t")
def corpus_cmd(path, construction, alphabet, budget, as_json, generate, max_size, seed, top, output,
               figure, delimiter):
    """Classify every expression in PATH (one per line) or a generated corpus."""
    if (path is None) == (generate is None):
        raise click.UsageError("give either PATH or --generate N")
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
        sources = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")]
    else:
        click.echo(f"# seed={seed}", err=True)
        sources = [(i + 1, to_text(e)) for i, e in
                   enumerate(random_corpus(seed, generate, max_size, alphabet or "ab"))]
    rows, verdicts, errors = [], [], []
    for line_no, text in sources:
        try:
            ast, a = _compile(text, construction, alphabet)
            c = classify_failure_backtracking(a, budget=_budget(budget))
        except RegexSyntaxError as exc:
            errors.append((line_no, text, str(exc)))
            continue
        except BudgetExceeded as exc:
            errors.append((line_no, text, str(exc)))
            continue
        verdicts.append(c.label())
        attack = "" if c.attack is None else c.attack.prefix + "|" + c.attack.pump + "|" + c.attack.suffix
        growth = max(c.attack.ratios) if c.attack is not None else 0.0
        rows.append([line_no, text, c.label(), attack, f"{growth:.3f}" if growth else ""])
    counts: Dict[str, int] = {}
    for v in verdicts:
        counts[v] = counts.get(v, 0) + 1
    worst = sorted((r for r in rows if r[2] == "Exponential"), key=lambda r: (-float(r[4] or 0), r[0]))[:top]
    if as_json:
        _emit({"schema": "report/1", "command": "corpus", "seed": seed if path is None else None,
               "counts": counts, "errors": [{"line": l, "regex": t, "error": e} for l, t, e in errors],
               "rows": [{"line": r[0], "regex": r[1], "verdict": r[2], "attack": r[3]} for r in rows],
               "worst": [r[1] for r in worst]})
    else:
        _table(rows, ["line", "regex", "verdict", "attack", "ratio"], output, delimiter)
        click.echo("# " + ", ".join(f"{k}={counts[k]}" for k in sorted(counts)))
        for l, t, e in errors:
            click.echo(f"# error line {l}: {t!r}: {e}")
        if worst:
            click.echo("# worst: " + "; ".join(r[1] for r in worst))
    if figure:
        from .plotting import plot_verdicts

        plot_verdicts(verdicts, figure)
    return EXIT_OK


@cli.command("flatten")
@_common
@click.argument("regex")
@click.option("--trace-d", is_flag=True, help="Dump the d-recursion instead of the automaton.")
@click.option("--no-prune", is_flag=True, help="Keep unreachable states.")
@click.option("--dot", "as_dot", is_flag=True)
def flatten_cmd(regex, construction, alphabet, budget, as_json, trace_d, no_prune, as_dot):
    """δ₂-flatten the pNFA of REGEX."""
    _, a = _compile(regex, construction, alphabet)
    res = flatten_with_log(a, prune=not no_prune, trace=trace_d)
    if trace_d:
        click.echo("\n".join(res.trace))
    elif as_dot:
        click.echo(export.pnfa_to_dot(res.automaton, "flat"), nl=False)
    else:
        doc = export.pnfa_to_json(res.automaton)
        if as_json:
            doc = {"schema": "report/1", "command": "flatten", "automaton": doc,
                   "state_map": {str(k): v for k, v in sorted(res.state_map.items())}}
        _emit(doc)
    return EXIT_OK


@cli.command("transduce")
@_common
@click.argument("regex")
@click.argument("word", required=False)
@click.option("--raw", is_flag=True, help="Treat WORD as an already decorated transducer input.")
@click.option("--dump-rules", is_flag=True, help="Print the transducer rules.")
def transduce_cmd(regex, word, construction, alphabet, budget, as_json, raw, dump_rules):
    """Build the string-to-tree transducer of the flattened pNFA and run it."""
    _, a = _compile(regex, construction, alphabet)
    flat = flatten_with_log(a).automaton
    t = build_stt(flat)
    if dump_rules:
        click.echo("\n".join(t.dump_rules()))
    if word is None:
        return EXIT_OK
    u = word if raw else decorate(word, sorted(a.alphabet))
    trees = sorted(run_stt(t, u, _budget(budget)), key=lambda x: x.render())
    if as_json:
        _emit({"schema": "report/1", "command": "transduce", "input": u,
               "trees": [export.tree_preorder(x) for x in trees]})
    else:
        click.echo(f"input {u}: {len(trees)} tree(s)")
        for x in trees:
            click.echo(x.render(flat.names))
    return EXIT_OK


@cli.command("probe")
@_common
@click.argument("regex")
@click.option("--max-n", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--theta", type=float, default=0.25, show_default=True)
@click.option("--window", type=click.IntRange(min=2), default=4, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--figure", type=click.Path(dir_okay=False), default=None)
@click.option("--delimiter", default="\t")
def probe_cmd(regex, construction, alphabet, budget, as_json, max_n, seed, theta, window, output,
              figure, delimiter):
    """Empirical growth of transducer output on decorated inputs."""
    ast, a = _compile(regex, construction, alphabet)
    click.echo(f"# seed={seed}", err=True)
    t = build_stt(flatten_with_log(a).automaton)
    g = growth_probe(t, max_n=max_n, budget=_budget(budget), seed=seed, theta=theta, window=window)
    if as_json:
        _emit(export.growth_to_json(g, to_text(ast), construction, seed))
    else:
        rows = [[n, m, w, "" if i == 0 else f"{g.ratios[i - 1]:.4f}"]
                for i, (n, m, w) in enumerate(zip(g.lengths, g.maxima, g.witnesses))]
        _table(rows, ["n", "max_size", "witness", "ratio"], output, delimiter)
        click.echo(f"# empirical verdict: {g.label()}" + (f" ({g.note})" if g.note else ""))
    if figure:
        from .plotting import plot_series

        plot_series(list(g.lengths), {"max output size": list(g.maxima)}, figure,
                    title=f"{to_text(ast)} ({construction})", ylabel="transducer output size")
    return EXIT_BUDGET if g.note else EXIT_OK


@cli.command("gadget")
@click.argument("regex")
@click.argument("alpha")
@click.option("--alphabet", "-a", default=None, help="Alphabet of REGEX (default: its symbols).")
@click.option("--marker", default="$", show_default=True)
def gadget_cmd(regex, alpha, alphabet, marker):
    """Print the reduction gadget built from REGEX and symbol ALPHA."""
    ast = parse(regex)
    try:
        g = hardness_gadget(ast, alpha, alphabet=alphabet, marker=marker)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(to_text(g))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="pnfa",
                      standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except RegexSyntaxError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        click.echo(f"error: {exc}; partial count {exc.count}", err=True)
        return EXIT_BUDGET
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
