"""Golden programs, equivalence pairs and the coverage table.

``manifest.json`` format (version 1)::

    {"schema": "ltau-corpus", "version": 1,
     "config": {"tau_paint": 2, "tau_dry": 4, "tau_assemble": 3},
     "entries": [ENTRY, ...]}

A ``check`` entry names a ``program`` and a ``sig`` file and expects either
``{"type": "X ! t"}`` or ``{"error": KIND, "rule": RULE?, "message": TEXT?}``.
It may carry a ``trace`` golden (``[event, name-or-null, time]`` rows) and an
``unsafe_run`` golden (``{"monitor_time": t, "required": r}``) for running
without the checker.

An ``equiv`` entry names ``left`` and ``right`` programs, the expected
verdict (``Equal`` or ``Unknown``), the ``equations`` the pair instantiates,
and optionally the expected ``normal_form`` of the left side.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cache
from pathlib import Path

from ..equiv import EQUATION_TAGS, check_equiv, normalize
from ..errors import LtauError, MonitorViolation
from ..evaluation import evaluate, monitor_all_paths, run
from ..parser import load_signature, parse_program
from ..syntax import Signature, alpha_eq
from ..trees import canonicalize_delays, tree_eq
from ..typecheck import COMP_RULES, VALUE_RULES, infer_comp, rules_used

CORPUS_DIR = Path(__file__).parent
MANIFEST = CORPUS_DIR / "manifest.json"


@dataclass(frozen=True)
class Entry:
    name: str
    kind: str
    sig: str
    expect: object
    program: str | None = None
    left: str | None = None
    right: str | None = None
    trace: tuple | None = None
    unsafe_run: dict | None = None
    equations: tuple[str, ...] = ()
    normal_form: str | None = None

    @property
    def files(self) -> list[str]:
        return [f for f in (self.program, self.left, self.right) if f]


@dataclass(frozen=True)
class Manifest:
    config: dict
    entries: tuple[Entry, ...]


@cache
def load_manifest(path: Path = MANIFEST) -> Manifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema") != "ltau-corpus" or data.get("version") != 1:
        raise ValueError(f"{path}: not an ltau corpus manifest (version 1)")
    entries = []
    for e in data["entries"]:
        entries.append(Entry(
            name=e["name"], kind=e["kind"], sig=e["sig"], expect=e["expect"],
            program=e.get("program"), left=e.get("left"), right=e.get("right"),
            trace=tuple(tuple(row) for row in e["trace"]) if "trace" in e else None,
            unsafe_run=e.get("unsafe_run"), equations=tuple(e.get("equations", ())),
            normal_form=e.get("normal_form"),
        ))
    return Manifest(data["config"], tuple(entries))


def corpus_manifest() -> tuple[Entry, ...]:
    return load_manifest().entries


@cache
def signature(name: str) -> Signature:
    return load_signature(CORPUS_DIR / name)


def source(name: str) -> str:
    return (CORPUS_DIR / name).read_text(encoding="utf-8")


def program(name: str, sig: str):
    return parse_program(source(name), signature(sig))


# ---------------------------------------------------------------------------
# Running entries


@dataclass
class EntryResult:
    entry: Entry
    ok: bool
    detail: str = ""
    rules: set[str] = field(default_factory=set)
    fired: Counter = field(default_factory=Counter)
    verdict: str | None = None
    # well-typed closed programs from this entry (for the monitor sweep)
    programs: list = field(default_factory=list)


def run_entry(entry: Entry) -> EntryResult:
    if entry.kind == "check":
        return _run_check(entry)
    if entry.kind == "equiv":
        return _run_equiv(entry)
    return EntryResult(entry, False, f"unknown entry kind {entry.kind}")


def _run_check(entry: Entry) -> EntryResult:
    sig = signature(entry.sig)
    want = entry.expect
    try:
        m = program(entry.program, entry.sig)
        ty = infer_comp((), m, sig)
    except LtauError as e:
        if "error" not in want:
            return EntryResult(entry, False, f"unexpected {e}")
        ok = e.kind == want["error"] and want.get("rule", e.rule) == e.rule
        ok = ok and want.get("message", e.message) == e.message
        res = EntryResult(entry, ok, str(e))
        if ok and entry.unsafe_run:
            res.ok, res.detail = _check_unsafe(entry, sig)
        return res
    if "error" in want:
        return EntryResult(entry, False, f"expected {want['error']}, got {ty}")
    res = EntryResult(entry, str(ty) == want["type"], f"{ty}", rules_used(m, sig))
    res.programs.append((m, sig))
    normalize(m, sig, stats=res.fired)
    if res.ok and entry.trace is not None:
        got = tuple((e.kind, e.data.get("name"), e.time) for e in run(m, sig).trace)
        if got != entry.trace:
            res.ok, res.detail = False, f"trace {got} differs from golden {entry.trace}"
    return res


def _check_unsafe(entry: Entry, sig) -> tuple[bool, str]:
    m = program(entry.program, entry.sig)
    want = entry.unsafe_run
    try:
        run(m, sig, check=False)
    except MonitorViolation as e:
        ok = (e.time, e.required) == (want["monitor_time"], want["required"])
        return ok, str(e)
    return False, "no monitor violation when run without the checker"


def _run_equiv(entry: Entry) -> EntryResult:
    sig = signature(entry.sig)
    res = EntryResult(entry, False)
    try:
        a, b = program(entry.left, entry.sig), program(entry.right, entry.sig)
        res.rules = rules_used(a, sig) | rules_used(b, sig)
        verdict = check_equiv(a, b, sig, stats=res.fired)
    except LtauError as e:
        res.detail = f"unexpected {e}"
        return res
    res.programs += [(a, sig), (b, sig)]
    res.verdict = str(verdict)
    res.ok = res.verdict == entry.expect
    res.detail = res.verdict + (f" via {', '.join(verdict.via)}" if verdict.via else "")
    if res.ok and entry.normal_form is not None:
        want = parse_program(entry.normal_form, sig)
        if not alpha_eq(normalize(a, sig), want):
            res.ok, res.detail = False, "normal form differs from golden"
    if res.ok and verdict.equal and not semantically_equal(a, b, sig):
        res.ok, res.detail = False, "Equal verdict but the run trees differ"
    return res


def semantically_equal(a, b, sig: Signature) -> bool:
    """``tree_eq`` of the two canonical run trees over every carrier instantiation."""
    ta = canonicalize_delays(evaluate(a, sig))
    tb = canonicalize_delays(evaluate(b, sig))
    return tree_eq(ta, tb, sig)


def run_corpus() -> list[EntryResult]:
    return [run_entry(e) for e in corpus_manifest()]


def monitor_sweep(results: list[EntryResult]) -> int:
    """Drive every path of every well-typed corpus program; returns the leaf count."""
    return sum(monitor_all_paths(m, sig) for r in results for m, sig in r.programs)


# ---------------------------------------------------------------------------
# Coverage


@dataclass
class Coverage:
    rows: list[tuple[str, str, list[str]]]  # (group, rule or tag, passing entries)

    @property
    def complete(self) -> bool:
        return all(names for _, _, names in self.rows)

    def missing(self) -> list[str]:
        return [tag for _, tag, names in self.rows if not names]

    def format(self) -> str:
        width = max(len(tag) for _, tag, _ in self.rows)
        lines = []
        for group, tag, names in self.rows:
            shown = ", ".join(names[:3]) + (f" (+{len(names) - 3})" if len(names) > 3 else "")
            lines.append(f"{group:<9} {tag:<{width}}  {len(names):>3}  {shown or 'MISSING'}")
        lines.append("coverage complete" if self.complete else "missing: " + ", ".join(self.missing()))
        return "\n".join(lines)


def coverage(results: list[EntryResult]) -> Coverage:
    """Each typing rule and equation, with the passing entries that exercise it.

    Typing rules count when a passing entry's derivation uses them.  An
    equation counts when the normaliser or an eta matcher applies it while
    handling a passing entry, or when a passing pair is declared to be an
    instance of it (the way the non-oriented eta equations are covered).
    """
    passing = [r for r in results if r.ok]
    rows = []
    for rule in VALUE_RULES:
        rows.append(("value", rule, [r.entry.name for r in passing if rule in r.rules]))
    for rule in COMP_RULES:
        rows.append(("comp", rule, [r.entry.name for r in passing if rule in r.rules]))
    for tag in EQUATION_TAGS:
        names = [r.entry.name for r in passing if r.fired[tag] or tag in r.entry.equations]
        rows.append(("equation", tag, names))
    return Coverage(rows)


__all__ = [
    "CORPUS_DIR", "Entry", "Manifest", "load_manifest", "corpus_manifest", "signature", "source",
    "program", "EntryResult", "run_entry", "run_corpus", "monitor_sweep", "coverage", "Coverage",
    "semantically_equal",
]
