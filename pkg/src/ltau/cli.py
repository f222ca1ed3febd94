"""Command-line front end.

Exit codes (stable):

    0  success (for ``eq``: either verdict; the verdict has its own code)
    1  type, grade or temporal error; run of a non-closed program; failed laws or coverage
    2  parse or signature error, unreadable input
    3  runtime monitor violation (only reachable with --unsafe-skip-check)
    4  internal error
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import __version__
from .errors import CheckError, LtauError, MonitorViolation, ParseError, SignatureError
from .evaluation import DEFAULT_FUEL, run
from .parser import load_signature, parse_program
from .syntax import pretty
from .trees import dump_tree
from .typecheck import infer_comp

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_MONITOR, EXIT_INTERNAL = 0, 1, 2, 3, 4
VERDICT_CODES = {"Equal": 0, "Unknown": 1}


def exit_code(err: BaseException) -> int:
    match err:
        case ParseError() | SignatureError() | OSError():
            return EXIT_PARSE
        case CheckError():
            return EXIT_CHECK
        case MonitorViolation():
            return EXIT_MONITOR
    return EXIT_INTERNAL


def diagnostic(err: BaseException, path: str | None = None) -> dict:
    if isinstance(err, LtauError):
        out = err.to_dict()
    elif isinstance(err, OSError):
        out = {"kind": "IOError", "rule": "io", "message": f"{err.strerror}: {err.filename}"}
    else:
        out = {"kind": "InternalError", "rule": "internal", "message": f"{type(err).__name__}: {err}"}
    if path is not None:
        out["file"] = path
    out["exit"] = exit_code(err)
    return out


def render(d: dict) -> str:
    where = d.get("file", "")
    if d.get("span"):
        where = f"{where}:{d['span']}" if where else d["span"]
    prefix = f"{where}: " if where else ""
    return f"{prefix}[{d['rule']}] {d['kind']}: {d['message']}"


def fail(err: BaseException, as_json: bool, path: str | None = None) -> None:
    d = diagnostic(err, path)
    if as_json:
        click.echo(json.dumps(d))
    else:
        click.echo(render(d), err=True)
    sys.exit(d["exit"])


def load(path: str, sig_path: str):
    sig = load_signature(sig_path)
    return parse_program(Path(path).read_text(encoding="utf-8"), sig), sig


sig_option = click.option("--sig", "sig_path", required=True, type=click.Path(dir_okay=False),
                          help="Signature file declaring base types, constants and operations.")
json_option = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")


@click.group()
@click.version_option(__version__, prog_name="ltau")
def main() -> None:
    """Type-check, run and reason about programs with temporal resources."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(dir_okay=False))
@sig_option
@json_option
@click.option("--jobs", default=4, show_default=True, help="Files checked in parallel.")
def check(files: tuple[str, ...], sig_path: str, as_json: bool, jobs: int) -> None:
    """Type-check FILES; prints each inferred type and grade."""
    try:
        sig = load_signature(sig_path)
    except (SignatureError, OSError) as e:
        fail(e, as_json)

    def one(path: str) -> dict:
        try:
            m = parse_program(Path(path).read_text(encoding="utf-8"), sig)
            ty = infer_comp((), m, sig)
            return {"file": path, "ok": True, "type": str(ty.ret), "grade": str(ty.grade), "exit": 0}
        except Exception as e:  # reported per file; the worst code wins
            return {**diagnostic(e, path), "ok": False}

    # results come back in input order whatever order they finish in
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(pool.map(one, files))
    for r in results:
        if as_json:
            click.echo(json.dumps(r))
        elif r["ok"]:
            click.echo(f"{r['file']}: {r['type']} ! {r['grade']}")
        else:
            click.echo(render(r), err=True)
    sys.exit(max(r["exit"] for r in results))


@main.command("run")
@click.argument("file", type=click.Path(dir_okay=False))
@sig_option
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False),
              help="Write the event trace here as JSON lines.")
@click.option("--unsafe-skip-check", is_flag=True,
              help="Run without type checking; the runtime monitor still watches every unbox.")
@click.option("--fuel", default=DEFAULT_FUEL, show_default=True, help="Evaluation step limit.")
@json_option
def run_cmd(file: str, sig_path: str, trace_path: str | None, unsafe_skip_check: bool, fuel: int,
            as_json: bool) -> None:
    """Evaluate a closed program along one path and print its tree and trace."""
    try:
        m, sig = load(file, sig_path)
        result = run(m, sig, check=not unsafe_skip_check, fuel=fuel)
        tree = dump_tree(result.tree, sig)
    except Exception as e:
        fail(e, as_json, file)
    if trace_path:
        Path(trace_path).write_text(result.trace_jsonl(), encoding="utf-8")
    if as_json:
        click.echo(json.dumps({"file": file, "grade": result.grade, "tree": tree,
                               "trace": [e.to_json() for e in result.trace]}))
        return
    click.echo(f"time taken: {result.grade}")
    click.echo("tree: " + json.dumps(tree))
    for e in result.trace:
        click.echo("  " + json.dumps(e.to_json()))


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@sig_option
def normalize(file: str, sig_path: str) -> None:
    """Print the normal form of FILE under the oriented equations."""
    from .equiv import normalize as norm

    try:
        m, sig = load(file, sig_path)
        ty = infer_comp((), m, sig)
        n = norm(m, sig)
        again = infer_comp((), n, sig)
    except Exception as e:
        fail(e, False, file)
    if again != ty:
        click.echo(f"internal error: normal form has type {again}, expected {ty}", err=True)
        sys.exit(EXIT_INTERNAL)
    click.echo(pretty(n))
    click.echo(f"# : {again}")


@main.command()
@click.argument("left", type=click.Path(dir_okay=False))
@click.argument("right", type=click.Path(dir_okay=False))
@sig_option
@json_option
def eq(left: str, right: str, sig_path: str, as_json: bool) -> None:
    """Decide whether LEFT and RIGHT are equal (Equal) or not known to be (Unknown)."""
    from .equiv import check_equiv

    try:
        sig = load_signature(sig_path)
        a = parse_program(Path(left).read_text(encoding="utf-8"), sig)
        b = parse_program(Path(right).read_text(encoding="utf-8"), sig)
        verdict = check_equiv(a, b, sig)
    except Exception as e:
        fail(e, as_json)
    name = str(verdict)
    if as_json:
        click.echo(json.dumps({"verdict": name, "code": VERDICT_CODES[name], "via": list(verdict.via)}))
    else:
        via = f" (via {', '.join(verdict.via)})" if verdict.via else ""
        click.echo(f"{name}{via}")
        click.echo(f"verdict-code: {VERDICT_CODES[name]}")


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--depth", default=4, show_default=True, help="Maximum tree depth.")
@click.option("--carriers", default=3, show_default=True, help="Maximum carrier size.")
@click.option("--count", default=200, show_default=True, help="Instances per law.")
@click.option("--suite", "suites", multiple=True,
              type=click.Choice(["monad", "strength", "algebraicity", "handling", "quotient"]))
@click.option("--mutant", default=None, help="Swap in a deliberately broken model (harness check).")
def laws(seed: int, depth: int, carriers: int, count: int, suites: tuple[str, ...],
         mutant: str | None) -> None:
    """Check the tree-model laws on seeded random instances."""
    from .laws import MUTANTS, run_laws

    if mutant is not None and mutant not in MUTANTS:
        raise click.BadParameter(f"choose from {', '.join(MUTANTS)}", param_hint="--mutant")
    report = run_laws(seed, depth, carriers, count, mutant, list(suites) or None)
    for w in report.warnings:
        click.echo(f"warning: {w}", err=True)
    for line in report.lines():
        if not line.startswith("warning:"):
            click.echo(line)
    sys.exit(EXIT_OK if report.ok else EXIT_CHECK)


@main.command()
def coverage() -> None:
    """Run the bundled corpus and print which rules and equations it exercises."""
    from .corpus import coverage as cov, run_corpus

    results = run_corpus()
    for r in results:
        click.echo(f"{'ok  ' if r.ok else 'FAIL'} {r.entry.name}: {r.detail}")
    table = cov(results)
    click.echo(table.format())
    sys.exit(EXIT_OK if table.complete and all(r.ok for r in results) else EXIT_CHECK)


if __name__ == "__main__":
    main()
