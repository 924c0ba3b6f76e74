"""Command-line scenario runner.

Exit codes: 0 expectations met, 1 expectations violated, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import fnmatch
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import ConfigError, Scenario, load_scenario, resolve_seed
from .expressions import ExpressionError
from .groups import AlgebraViolation, Generator, SeriesDivergence, exp_generator, membership_report, parse_generator
from .lagrangians import FreeRel, SamplingDegenerate, equivalence_report
from .quantities import DimensionMismatch
from .spacetime import ModelKind, NotFutureLike, WrongModel
from .symmetry import NotAGroupElement, certify_free
from .variational import (
    ChordNotFutureLike,
    NoConvergence,
    WorldPath,
    action,
    max_chord_deviation,
    path_csv,
    proper_time,
    solve_stationary,
)

EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_CONFIG_ERRORS = (ConfigError, DimensionMismatch, ExpressionError, WrongModel, NotAGroupElement,
                  AlgebraViolation, ChordNotFutureLike, NotFutureLike)
_NUMERIC_ERRORS = (NoConvergence, SeriesDivergence, SamplingDegenerate, np.linalg.LinAlgError,
                   FloatingPointError, ArithmeticError)


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _truthy(where: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(where, f"expected a boolean, got {text!r}")


def _float(where: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(where, f"expected a number, got {text!r}") from None


def _patterns(text: str) -> list[str]:
    return [p.strip() for p in text.replace("\n", ",").split(",") if p.strip()]


class _Run:
    """Collects report lines and expectation failures for one scenario."""

    def __init__(self, out_dir: Path | None) -> None:
        self.out_dir = out_dir
        self.lines: list[str] = []
        self.violations: list[str] = []

    def echo(self, line: str) -> None:
        self.lines.append(line)

    def check(self, ok: bool, message: str) -> None:
        self.echo(f"expect {message}: {'ok' if ok else 'VIOLATED'}")
        if not ok:
            self.violations.append(message)

    def write(self, name: str, text: str) -> None:
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / name).write_text(text)

    @property
    def code(self) -> int:
        return EXIT_VIOLATED if self.violations else EXIT_OK


def _need(sc: Scenario, attr: str, what: str):
    value = getattr(sc, attr)
    if value is None:
        raise ConfigError(sc.name, f"{what} required for this command")
    return value


def _tol(sc: Scenario, default: float) -> float:
    return _float("[expect] tol", sc.expect["tol"]) if "tol" in sc.expect else default


def cmd_certify(sc: Scenario, run: _Run) -> None:
    L = _need(sc, "lagrangian", "[lagrangian]")
    rep = certify_free(L, sc.box, n_random=sc.n_random, seed=sc.box.seed)
    run.write("symmetry_report.txt", rep.to_text())
    run.write("symmetry_report.csv", rep.to_csv())
    for line in rep.to_text().splitlines():
        run.echo(line)
    verdicts = rep.by_name()
    ex = sc.expect
    if "all_pass" in ex:
        want = _truthy("[expect] all_pass", ex["all_pass"])
        failing = rep.failed()
        detail = f" (failing: {', '.join(failing)})" if failing and want else ""
        run.check(rep.all_pass == want, f"all_pass = {want}{detail}")
    for pat in _patterns(ex.get("pass", "")):
        hits = [n for n in verdicts if fnmatch.fnmatchcase(n, pat)]
        if not hits:
            raise ConfigError("[expect] pass", f"pattern {pat!r} matches no generator")
        bad = [n for n in hits if not verdicts[n].is_symmetry]
        run.check(not bad, f"pass {pat}" + (f" (failing: {', '.join(bad)})" if bad else ""))
    for pat in _patterns(ex.get("fail", "")):
        hits = [n for n in verdicts if fnmatch.fnmatchcase(n, pat)]
        if not hits:
            raise ConfigError("[expect] fail", f"pattern {pat!r} matches no generator")
        run.check(any(not verdicts[n].is_symmetry for n in hits), f"fail {pat}")


def cmd_solve(sc: Scenario, run: _Run) -> None:
    L = _need(sc, "lagrangian", "[lagrangian]")
    x0 = _need(sc, "start", "[endpoints]")
    x1 = _need(sc, "end", "[endpoints]")
    try:
        path, rep = solve_stationary(L, x0, x1, N=sc.N, gauge=sc.gauge)
    except NoConvergence as exc:
        run.write("residual_trace.txt", "".join(f"{k} {fmt(r)}\n" for k, r in enumerate(exc.history)))
        raise
    run.write("path.csv", path_csv(L, path))
    deviation = max_chord_deviation(path)
    rel_dev = rep.momentum_deviation / rep.momentum_mean_norm if rep.momentum_mean_norm > 0 else math.inf
    summary = [
        ("lagrangian", L.name),
        ("model", L.model.value),
        ("N", str(sc.N)),
        ("gauge", rep.gauge),
        ("iterations", str(rep.iterations)),
        ("action", fmt(rep.action)),
        ("gradient_norm", fmt(rep.gradient_norm)),
        ("max_el_residual", fmt(float(rep.el_residual.max()))),
        ("momentum_deviation", fmt(rep.momentum_deviation)),
        ("momentum_relative_deviation", fmt(rel_dev)),
        ("max_chord_deviation", fmt(deviation)),
    ]
    if rep.proper_time is not None:
        summary.append(("proper_time", fmt(rep.proper_time)))
        if isinstance(L, FreeRel):
            summary.append(("mass_times_proper_time", fmt(L.m * rep.proper_time)))
    text = "".join(f"{k} = {v}\n" for k, v in summary)
    run.write("report.txt", text)
    for line in text.splitlines():
        run.echo(line)
    ex = sc.expect
    tol = _tol(sc, 1e-9)
    if "straight" in ex:
        want = _truthy("[expect] straight", ex["straight"])
        run.check((deviation < 1e-7) == want, f"straight = {want}")
    if "momentum_deviation_min" in ex:
        lim = _float("[expect] momentum_deviation_min", ex["momentum_deviation_min"])
        run.check(rel_dev > lim, f"relative momentum deviation > {fmt(lim)}")
    if "momentum_deviation_max" in ex:
        lim = _float("[expect] momentum_deviation_max", ex["momentum_deviation_max"])
        run.check(rep.momentum_deviation < lim, f"momentum deviation < {fmt(lim)}")
    if "action" in ex:
        want = _float("[expect] action", ex["action"])
        run.check(abs(rep.action - want) <= tol * max(1.0, abs(want)), f"action = {fmt(want)}")
    if "proper_time" in ex:
        want = _float("[expect] proper_time", ex["proper_time"])
        got = rep.proper_time if rep.proper_time is not None else math.nan
        run.check(abs(got - want) <= tol * max(1.0, abs(want)), f"proper_time = {fmt(want)}")


def cmd_equiv(sc: Scenario, run: _Run) -> None:
    L1 = _need(sc, "lagrangian", "[lagrangian]")
    L2 = _need(sc, "other", "[other]")
    rep = equivalence_report(L1, L2, sc.box)
    text = (
        f"first = {L1.name}\nsecond = {L2.name}\nequivalent = {str(rep.is_ftd).lower()}\n"
        f"lin_residual = {fmt(rep.lin_residual)}\ncurl_residual = {fmt(rep.curl_residual)}\n"
        f"witness_norm = {fmt(rep.witness.norm)}\nseed = {rep.seed}\n"
    )
    run.write("equivalence.txt", text)
    for line in text.splitlines():
        run.echo(line)
    if "equivalent" in sc.expect:
        want = _truthy("[expect] equivalent", sc.expect["equivalent"])
        run.check(bool(rep.is_ftd) == want, f"equivalent = {want}")


def cmd_proper_time(sc: Scenario, run: _Run) -> None:
    if sc.model is not ModelKind.REL:
        raise ConfigError("[scenario] model", "proper-time needs model = rel")
    if sc.waypoints:
        events = sc.waypoints
    else:
        events = [_need(sc, "start", "[endpoints]"), _need(sc, "end", "[endpoints]")]
    if len(events) < 2:
        raise ConfigError("[path] waypoints", "need at least two events")
    path = WorldPath(np.array([e.coords for e in events]), ModelKind.REL)
    tau = proper_time(path).value
    lines = [f"segments = {path.N}", f"proper_time = {fmt(tau)}"]
    if sc.lagrangian is not None:
        lines.append(f"action = {fmt(action(sc.lagrangian, path))}")
    text = "\n".join(lines) + "\n"
    run.write("proper_time.txt", text)
    for line in lines:
        run.echo(line)
    if "proper_time" in sc.expect:
        want = _float("[expect] proper_time", sc.expect["proper_time"])
        run.check(abs(tau - want) <= _tol(sc, 1e-12) * max(1.0, abs(want)), f"proper_time = {fmt(want)}")


def exp_report(gen: Generator, s: float) -> tuple[str, bool]:
    """Linear part, translation and membership checks of exp(s H)."""
    F = exp_generator(gen, s)
    report = membership_report(F)
    lines = [f"model = {gen.model.value}", f"s = {fmt(s)}", "linear ="]
    lines += ["  " + " ".join(fmt(v) for v in row) for row in F.linear]
    lines.append("translation = " + " ".join(fmt(v) for v in F.translation))
    lines += [f"{k} = {str(v).lower()}" for k, v in report.items()]
    return "\n".join(lines) + "\n", all(report.values())


def cmd_exp(sc: Scenario, run: _Run) -> None:
    text, member = exp_report(_need(sc, "generator", "[exp] generator"), sc.s)
    run.write("exp.txt", text)
    for line in text.splitlines():
        run.echo(line)
    if "member" in sc.expect:
        want = _truthy("[expect] member", sc.expect["member"])
        run.check(member == want, f"member = {want}")


COMMANDS: dict[str, Callable[[Scenario, _Run], None]] = {
    "certify": cmd_certify,
    "solve": cmd_solve,
    "exp": cmd_exp,
    "equiv": cmd_equiv,
    "proper-time": cmd_proper_time,
}


def run_scenario(command: str, config: str, seed: int | None, out: str | None, multi: bool) -> tuple[int, str]:
    """Run one scenario file; returns (exit code, captured output)."""
    buf = io.StringIO()
    try:
        sc = load_scenario(config)
        sc.box = replace(sc.box, seed=resolve_seed(seed, sc.seed))
        base = out if out is not None else sc.output
        out_dir = None if base is None else (Path(base) / sc.name if multi else Path(base))
        run = _Run(out_dir)
        run.echo(f"scenario = {sc.name}")
        run.echo(f"seed = {sc.box.seed}")
        try:
            COMMANDS[command](sc, run)
        finally:
            buf.write("\n".join(run.lines) + "\n")
        if run.violations:
            buf.write("violated: " + "; ".join(run.violations) + "\n")
        return run.code, buf.getvalue()
    except _CONFIG_ERRORS as exc:
        buf.write(f"config error: {exc}\n")
        return EXIT_CONFIG, buf.getvalue()
    except ValueError as exc:
        buf.write(f"config error: {exc}\n")
        return EXIT_CONFIG, buf.getvalue()
    except _NUMERIC_ERRORS as exc:
        buf.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC, buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noether-lab", description="Symmetry and variational scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", action="append", default=[], help="scenario file (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed and $NOETHER_LAB_SEED")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers across scenario files")
        if name == "exp":
            p.add_argument("generator", nargs="?", help="e.g. 'rotation axis=3' or 'translation [1s,0,0,0]'")
            p.add_argument("--s", type=float, default=1.0, help="group parameter")
            p.add_argument("--model", default="nonrel")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be non-negative")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")

    if args.command == "exp" and args.generator is not None:
        try:
            text, _ = exp_report(parse_generator(args.generator, ModelKind.parse(args.model)), args.s)
        except (ValueError, DimensionMismatch, AlgebraViolation) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except _NUMERIC_ERRORS as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        sys.stdout.write(text)
        if args.out is not None:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "exp.txt").write_text(text)
        return EXIT_OK

    if not args.config:
        parser.error("--config is required")
    multi = len(args.config) > 1
    jobs = [(args.command, c, args.seed, args.out, multi) for c in args.config]
    if args.jobs > 1 and multi:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_scenario, *zip(*jobs)))
    else:
        results = [run_scenario(*j) for j in jobs]
    for _, text in results:
        sys.stdout.write(text)
    return max(code for code, _ in results)


if __name__ == "__main__":
    sys.exit(main())
