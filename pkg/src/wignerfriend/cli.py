"""Command-line front end: ``wignerfriend {scan,verify,predict,compare}``.

Exit codes: 0 success, 1 invariant failure, 2 no joint distribution,
3 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernel as K
from .collapse import collapse_predictions, trajectory_sampler
from .joint import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESOLUTION,
    DEFAULT_TOL,
    MethodDisagreement,
    Verdict,
    angle_grid,
    classify_parameter_space,
)
from .predict import NoJointDistribution, round_sig, table_report, two_time_table
from .scenario import ScenarioConfig, Variant

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_NO_JOINT = 2
EXIT_CONFIG = 3

SCAN_COLUMNS = ["theta", "re_a", "im_a", "re_b", "im_b", "commutator_norm", "feasible",
                "residual", "iters"]
SAMPLE_COLUMNS = ["f1", "w", "f2", "count", "frequency", "analytic_p", "std_err"]


class UsageError(Exception):
    pass


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Evaluate a number such as ``3*pi/8`` or ``0.25``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise UsageError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError):
        raise UsageError(f"cannot parse number {text!r}") from None


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    step: float

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be 'start:stop:step', got {text!r}")
        return cls(*(parse_number(p) for p in parts))

    def thetas(self) -> list[float]:
        if self.step <= 0:
            raise UsageError("grid step must be positive")
        slack = 1e-12
        if self.start < -slack or self.stop > math.pi / 2 + slack:
            raise UsageError("grid range must lie within [0, pi/2]")
        n = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        if n <= 0:
            raise UsageError("empty grid")
        return [min(max(self.start + k * self.step, 0.0), math.pi / 2) for k in range(n)]


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: str | None = None
    grid: str = "0:pi/2:pi/16"
    phases: int = 1
    variant: str = "measurement"
    tol: float | None = None
    max_iter: int = DEFAULT_MAX_ITER
    resolution: float = DEFAULT_RESOLUTION
    seed: int | None = None
    shots: int | None = None
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    case: str | None = None
    samples: int = 200

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunManifest":
        fields = {k: v for k, v in vars(args).items() if k in cls.__dataclass_fields__}
        return cls(**fields)


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".15g")
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write output {out!r}: {exc}") from None


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _load_config(m: RunManifest) -> ScenarioConfig:
    if m.config is None:
        raise UsageError("--config is required")
    try:
        return ScenarioConfig.load(m.config)
    except OSError as exc:
        raise UsageError(f"cannot read config {m.config!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {m.config!r} is not valid JSON: {exc}") from None


# -- commands -----------------------------------------------------------------------

def cmd_scan(m: RunManifest) -> int:
    if m.phases < 1:
        raise UsageError("--phases must be at least 1")
    thetas = GridSpec.parse(m.grid).thetas()
    grid = angle_grid(thetas, m.phases)
    tol = DEFAULT_TOL if m.tol is None else m.tol
    points = classify_parameter_space(grid, Variant(m.variant), tol, m.max_iter,
                                      certify=False, resolution=m.resolution, jobs=m.jobs)
    rows = []
    theta_of = [t for t in thetas for _ in range(m.phases)]
    for p, theta in zip(points, theta_of):
        rows.append({
            "theta": theta, "re_a": p.a.real, "im_a": p.a.imag, "re_b": p.b.real,
            "im_b": p.b.imag, "commutator_norm": p.exact.commutator_norm,
            "feasible": int(p.verdict), "residual": p.solver.residual,
            "iters": p.solver.iterations,
        })
    if m.format == "json":
        text = _json_text([{k: (round_sig(v) if isinstance(v, float) else v) for k, v in r.items()}
                           for r in rows])
    else:
        text = _csv_text(SCAN_COLUMNS, rows)
    _emit(text, m.out)
    counts = {v: sum(1 for p in points if p.verdict is v) for v in Verdict}
    print(f"scan: {len(points)} points, feasible={counts[Verdict.FEASIBLE]} "
          f"infeasible={counts[Verdict.INFEASIBLE]} "
          f"indeterminate={counts[Verdict.INDETERMINATE]}", file=sys.stderr)
    return EXIT_OK


GOLDEN_CASES = {
    "computational": (ScenarioConfig(1.0, 0.0, 1.0, 0.0), {"U": {"U": 1.0, "D": 0.0},
                                                           "D": {"U": 0.0, "D": 1.0}}),
    "bell": (ScenarioConfig(1.0, 0.0, 1 / math.sqrt(2), 1 / math.sqrt(2)),
             {"U": {"U": 0.5, "D": 0.5}, "D": {"U": 0.5, "D": 0.5}}),
}


def _case_table(name: str, tol: float) -> tuple[str, bool]:
    cfg, expected = GOLDEN_CASES[name]
    rho = np.full((2, 2), 0.5, dtype=complex)
    table = two_time_table(cfg, rho)
    dev = max(abs(table.conditionals[f1][f2] - expected[f1][f2])
              for f1 in expected for f2 in expected[f1])
    lines = [f"case {name}: p(f2|f1), rho = |+><+|", "f1\\f2      U                  D"]
    for f1 in ("U", "D"):
        row = table.conditionals[f1]
        lines.append(f"{f1}     {fmt(row['U']):<18} {fmt(row['D'])}")
    lines.append(f"max deviation from expected: {dev:.3e}")
    return "\n".join(lines) + "\n", dev <= tol


def cmd_verify(m: RunManifest) -> int:
    from .verify import run_suites

    if m.case is not None:
        text, ok = _case_table(m.case, 1e-12 if m.tol is None else m.tol)
        _emit(text, m.out)
        if not ok:
            print(f"invariant failed: case {m.case}", file=sys.stderr)
        return EXIT_OK if ok else EXIT_INVARIANT
    seed = 0 if m.seed is None else m.seed
    results = run_suites(seed=seed, samples=m.samples, tol_override=m.tol)
    report = {
        "seed": seed,
        "passed": all(r.passed for r in results),
        "suites": [{"name": r.name, "max_deviation": round_sig(r.max_deviation),
                    "tolerance": r.tolerance, "passed": r.passed} for r in results],
    }
    _emit(_json_text(report), m.out)
    for r in results:
        if not r.passed:
            print(f"invariant failed: {r.name} (max deviation {r.max_deviation:.3e} > "
                  f"{r.tolerance:.3e})", file=sys.stderr)
            return EXIT_INVARIANT
    return EXIT_OK


def cmd_predict(m: RunManifest) -> int:
    cfg = _load_config(m)
    try:
        table = two_time_table(cfg, cfg.system_density)
    except NoJointDistribution as exc:
        print(f"NoJointDistribution: {exc}", file=sys.stderr)
        return EXIT_NO_JOINT
    if m.format == "csv":
        rows = [{"f1": f1, "f2": f2, "joint": p,
                 "conditional": ("undefined" if table.conditionals[f1] is None
                                 else table.conditionals[f1][f2])}
                for (f1, f2), p in table.joint.items()]
        _emit(_csv_text(["f1", "f2", "joint", "conditional"], rows), m.out)
    else:
        _emit(_json_text(table_report(cfg)), m.out)
    return EXIT_OK


def _round_map(d):
    if d is None:
        return None
    return {k: (round_sig(v) if isinstance(v, float) else _round_map(v)) for k, v in d.items()}


def cmd_compare(m: RunManifest) -> int:
    cfg = _load_config(m)
    rho = cfg.system_density
    if m.shots is not None:
        if m.seed is None:
            raise UsageError("--seed is required when sampling (--shots)")
        sampled = trajectory_sampler(cfg, rho, m.shots, m.seed, jobs=m.jobs)
        if m.format == "json":
            emp = sampled.empirical()
            payload = {"config": cfg.to_json(), "shots": m.shots, "seed": m.seed,
                       "rows": [{k: (round_sig(v) if isinstance(v, float) else v)
                                 for k, v in r.items()} for r in sampled.rows()],
                       "empirical": {"p_f2_collapse": _round_map(emp.p_f2_collapse),
                                     "p_f2_unitary": _round_map(emp.p_f2_unitary),
                                     "max_gap": round_sig(emp.max_gap)}}
            _emit(_json_text(payload), m.out)
        else:
            _emit(_csv_text(SAMPLE_COLUMNS, sampled.rows()), m.out)
        return EXIT_OK
    rep = collapse_predictions(cfg, rho)
    payload = {
        "config": cfg.to_json(),
        "wigner_unitary": rep.wigner_unitary,
        "p_f1": _round_map(rep.p_f1),
        "p_f2_given_f1_collapse": {k: _round_map(v) for k, v in rep.p_f2_given_f1_collapse.items()},
        "p_f2_collapse": _round_map(rep.p_f2_collapse),
        "p_f2_unitary": _round_map(rep.p_f2_unitary),
        "max_gap": round_sig(rep.max_gap),
    }
    _emit(_json_text(payload), m.out)
    return EXIT_OK


COMMANDS = {"scan": cmd_scan, "verify": cmd_verify, "predict": cmd_predict,
            "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerfriend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config JSON")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("scan", help="classify Wigner bases over an angle/phase grid")
    common(p)
    p.add_argument("--grid", default="0:pi/2:pi/16", help="theta range 'start:stop:step'")
    p.add_argument("--phases", type=int, default=1)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="measurement")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)

    p = sub.add_parser("verify", help="run the invariant suites")
    common(p)
    p.add_argument("--case", choices=sorted(GOLDEN_CASES))
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser("predict", help="two-time table for a config")
    common(p)

    p = sub.add_parser("compare", help="collapse vs unitary predictions")
    common(p)
    p.add_argument("--shots", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.format is None:
        args.format = "csv" if args.command == "scan" else "json"
    manifest = RunManifest.from_args(args)
    try:
        return COMMANDS[manifest.command](manifest)
    except (UsageError, K.ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MethodDisagreement as exc:
        print(f"invariant failed: method agreement: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
