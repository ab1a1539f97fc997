#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Batch front end for the coinsurance solver.

Reads one JSON problem file, runs it in one of three modes and writes a report
(aligned table, CSV or JSON) to stdout or to --output. Progress lines go to
stderr so the report itself stays machine-readable.

Usage:
    python cli_reporting.py solve   --input problems/cara_triangular.json [--format table|csv|json] [--tol 1e-10]
    python cli_reporting.py sweep   --input problems/cara_triangular.json --param lambda --from 0 --to 1 --steps 11
    python cli_reporting.py compare --input problems/cara_triangular.json --operators t1,t2,mix:0.5

Options:
    --output FILE    write the report to FILE instead of stdout
    --verbose        debug logging from the solver
Environment:
    POSSI_QUAD_NODES, POSSI_QUAD_INNER_NODES   quadrature node counts (override the file)
    POSSI_SWEEP_JOBS                           joblib workers for sweeps (default 1)

Exit code is 0 when every row was computed (warnings allowed), 1 otherwise.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Annotated, List, Literal, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from coinsurance_engine import (
    BracketError,
    CoinsuranceProblem,
    ConvergenceError,
    approximate_report,
    cara_positivity_sufficient,
    rate_gap_T1_T2,
    solve_exact,
)
from eu_operators import EUOperator, OperatorKind, convex_combination, t1, t2
from fuzzy_core import (
    DomainError,
    FuzzyNumber,
    PossibilisticError,
    PreconditionError,
    make_crisp,
    make_trapezoidal,
    make_triangular,
    trapezoid_from_samples,
)
from possibilistic_measures import (
    DEFAULT_INNER_NODES,
    DEFAULT_OUTER_NODES,
    WeightingFunction,
    make_power_weight,
    quadrature_from_env,
    uniform_weight,
)
from utility_functions import UtilityFunction, UtilityKind, cara, crra, hara, log_utility, quadratic

logger = logging.getLogger(__name__)

CSV_HEADER = ["mode", "lambda", "operator", "beta_exact", "beta_approx", "H_exact", "H_approx",
              "E_f", "Var_T", "P0", "w", "residual", "warnings"]
DEFAULT_TOL = 1e-10


class SchemaError(PossibilisticError):
    """The problem file is not valid JSON or does not match the schema"""


def load_env_file(env_file: str = ".env"):
    """Load KEY=VALUE lines from a .env file; variables already set win"""
    if os.path.exists(env_file):
        with open(env_file, "r") as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith("#") and "=" in line:
                    key, value = line.split("=", 1)
                    os.environ.setdefault(key.strip(), value.strip())


# ---------- Schemas ----------
class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PowerWeightSpec(_Spec):
    kind: Literal["power"]
    exponent: float = Field(1.0, ge=0)


class UniformWeightSpec(_Spec):
    kind: Literal["uniform"]


WeightingSpec = Annotated[Union[PowerWeightSpec, UniformWeightSpec], Field(discriminator="kind")]


class TriangularRiskSpec(_Spec):
    kind: Literal["triangular"]
    a: float
    alpha: float = Field(ge=0)
    beta: float = Field(ge=0)


class TrapezoidalRiskSpec(_Spec):
    kind: Literal["trapezoidal"]
    core_lo: float
    core_hi: float
    alpha: float = Field(ge=0)
    beta: float = Field(ge=0)


class CrispRiskSpec(_Spec):
    kind: Literal["crisp"]
    a: float


class SamplesRiskSpec(_Spec):
    kind: Literal["samples"]
    data: List[float] = Field(min_length=1)
    lo_q: float = Field(0.25, ge=0, le=1)
    hi_q: float = Field(0.75, ge=0, le=1)


RiskSpec = Annotated[Union[TriangularRiskSpec, TrapezoidalRiskSpec, CrispRiskSpec, SamplesRiskSpec],
                     Field(discriminator="kind")]


class HaraSpec(_Spec):
    kind: Literal["hara"]
    zeta: float = 1.0
    eta: float = 0.0
    gamma: float


class CrraSpec(_Spec):
    kind: Literal["crra"]
    gamma: float = Field(ge=1)


class LogSpec(_Spec):
    kind: Literal["log"]


class CaraSpec(_Spec):
    kind: Literal["cara"]


class QuadraticSpec(_Spec):
    kind: Literal["quadratic"]
    c: float = Field(gt=0)
    b: Optional[float] = None


UtilitySpec = Annotated[Union[HaraSpec, CrraSpec, LogSpec, CaraSpec, QuadraticSpec], Field(discriminator="kind")]


class OperatorSpec(_Spec):
    kind: Literal["t1", "t2", "mix"]
    c: Optional[float] = None
    left: Optional["OperatorSpec"] = None
    right: Optional["OperatorSpec"] = None

    @model_validator(mode="after")
    def _check_mix(self):
        if self.kind == "mix":
            if self.c is None:
                raise ValueError("a mix operator needs the weight c")
        elif self.c is not None or self.left is not None or self.right is not None:
            raise ValueError(f"operator {self.kind} takes no c/left/right")
        return self


OperatorSpec.model_rebuild()


class QuadratureSpec(_Spec):
    outer: int = Field(DEFAULT_OUTER_NODES, ge=2)
    inner: int = Field(DEFAULT_INNER_NODES, ge=2)


class ProblemFile(_Spec):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    weighting: WeightingSpec = Field(default_factory=lambda: PowerWeightSpec(kind="power"))
    risk: RiskSpec
    utility: UtilitySpec
    operator: OperatorSpec = Field(default_factory=lambda: OperatorSpec(kind="t1"))
    w0: float
    loading: float = Field(alias="lambda", ge=0)
    quadrature: Optional[QuadratureSpec] = None

    @model_validator(mode="after")
    def _check_quantiles(self):
        if isinstance(self.risk, SamplesRiskSpec) and not self.risk.lo_q < self.risk.hi_q:
            raise ValueError("samples risk needs lo_q < hi_q")
        return self

    def dump(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True)


class RunRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    mode: str
    loading: float = Field(alias="lambda")
    operator: str
    beta_exact: Optional[float] = None
    beta_approx: Optional[float] = None
    H_exact: Optional[float] = None
    H_approx: Optional[float] = None
    E_f: Optional[float] = None
    Var_T: Optional[float] = None
    P0: Optional[float] = None
    w: Optional[float] = None
    residual: Optional[float] = None
    warnings: List[str] = Field(default_factory=list)
    gap: Optional[float] = None
    predicted_gap: Optional[float] = None
    cara_positive: Optional[bool] = None
    failed: bool = False

    def warn(self, note: str):
        if note not in self.warnings:
            self.warnings.append(note)

    def notes(self) -> List[str]:
        """Warnings plus the extra key=value fields that have no CSV column"""
        extra = []
        if self.gap is not None:
            extra.append(f"gap={format_number(self.gap)}")
        if self.predicted_gap is not None:
            extra.append(f"predicted_gap={format_number(self.predicted_gap)}")
        if self.cara_positive is not None:
            extra.append(f"cara_positive={str(self.cara_positive).lower()}")
        return self.warnings + extra

    def csv_row(self) -> List[str]:
        return [self.mode, format_number(self.loading), self.operator] + [
            format_number(getattr(self, name)) for name in CSV_HEADER[3:-1]
        ] + ["; ".join(self.notes())]


def format_number(x: Optional[float]) -> str:
    """12 significant digits, empty for absent values"""
    return "" if x is None else f"{x:.12g}"


# ---------- Parsing ----------
def parse_problem(data: dict) -> ProblemFile:
    try:
        return ProblemFile.model_validate(data)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            where = ".".join(str(part) for part in err["loc"]) or "<root>"
            problems.append(f"{where}: {err['msg']}")
        raise SchemaError("invalid problem file: " + "; ".join(problems)) from None


def parse_problem_text(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return parse_problem(data)


def parse_problem_file(path: str) -> ProblemFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise SchemaError(f"cannot read problem file {path}: {e}") from None
    return parse_problem_text(text)


# ---------- Building domain objects ----------
def build_weighting(spec) -> WeightingFunction:
    if isinstance(spec, PowerWeightSpec):
        return make_power_weight(spec.exponent)
    return uniform_weight()


def build_risk(spec) -> FuzzyNumber:
    if isinstance(spec, TriangularRiskSpec):
        return make_triangular(spec.a, spec.alpha, spec.beta)
    if isinstance(spec, TrapezoidalRiskSpec):
        return make_trapezoidal(spec.core_lo, spec.core_hi, spec.alpha, spec.beta)
    if isinstance(spec, CrispRiskSpec):
        return make_crisp(spec.a)
    return trapezoid_from_samples(spec.data, spec.lo_q, spec.hi_q)


def build_utility(spec) -> UtilityFunction:
    if isinstance(spec, HaraSpec):
        return hara(spec.zeta, spec.eta, spec.gamma)
    if isinstance(spec, CrraSpec):
        return crra(spec.gamma)
    if isinstance(spec, LogSpec):
        return log_utility()
    if isinstance(spec, CaraSpec):
        return cara()
    return quadratic(spec.c, spec.b)


def build_operator(spec: OperatorSpec, f: WeightingFunction, quadrature) -> EUOperator:
    if spec.kind == "t1":
        return t1(f, quadrature)
    if spec.kind == "t2":
        return t2(f, quadrature)
    left = build_operator(spec.left or OperatorSpec(kind="t1"), f, quadrature)
    right = build_operator(spec.right or OperatorSpec(kind="t2"), f, quadrature)
    return convex_combination(spec.c, left, right)


def build_problem(file: ProblemFile) -> CoinsuranceProblem:
    quad = file.quadrature or QuadratureSpec()
    quadrature = quadrature_from_env(quad.outer, quad.inner)
    f = build_weighting(file.weighting)
    return CoinsuranceProblem(
        w0=file.w0,
        loading=file.loading,
        risk=build_risk(file.risk),
        utility=build_utility(file.utility),
        operator=build_operator(file.operator, f, quadrature),
    )


def parse_operator_token(token: str, f: WeightingFunction, quadrature) -> EUOperator:
    """'t1', 't2' or 'mix:<c>' (mixture of t1 and t2)"""
    token = token.strip().lower()
    if token == "t1":
        return t1(f, quadrature)
    if token == "t2":
        return t2(f, quadrature)
    if token.startswith("mix:"):
        try:
            c = float(token[4:])
        except ValueError:
            raise SchemaError(f"bad mixture weight in operator token {token!r}") from None
        return convex_combination(c, t1(f, quadrature), t2(f, quadrature))
    raise SchemaError(f"unknown operator token {token!r} (expected t1, t2 or mix:<c>)")


# ---------- Runs ----------
def solve_record(prob: CoinsuranceProblem, mode: str, tol: float = DEFAULT_TOL) -> RunRecord:
    """One report row; solver failures become warnings on the row"""
    record = RunRecord(mode=mode, loading=prob.loading, operator=prob.operator.label)
    try:
        approx = approximate_report(prob)
    except PossibilisticError as e:
        record.warn(f"approximation failed: {e}")
        record.failed = True
        return record
    record.beta_approx = approx.beta_approx
    record.H_approx = approx.H_approx_total
    record.E_f, record.Var_T = approx.E_f, approx.Var_T
    record.P0, record.w = approx.premium_P0, approx.w
    for note in approx.warnings:
        record.warn(note)

    if prob.utility.kind is UtilityKind.CARA:
        try:
            record.cara_positive = cara_positivity_sufficient(prob)
        except PreconditionError as e:
            logger.debug("no CARA positivity flag: %s", e)

    try:
        exact = solve_exact(prob, tol=tol)
    except PreconditionError as e:
        record.warn(f"exact solve skipped: {e}")
    except (BracketError, ConvergenceError, DomainError) as e:
        record.warn(f"exact solve failed: {e}")
        record.failed = True
    else:
        record.beta_exact = exact.beta_exact
        record.H_exact = exact.H_at_beta_exact
        record.residual = exact.diagnostics.residual
        for note in exact.warnings:
            record.warn(note)
    return record


def run_solve(file: ProblemFile, tol: float = DEFAULT_TOL) -> List[RunRecord]:
    return [solve_record(build_problem(file), "solve", tol)]


def _sweep_point(file: ProblemFile, param: str, value: float, tol: float) -> RunRecord:
    try:
        prob = build_problem(file)
        if param == "lambda":
            prob = prob.with_loading(value)
        else:
            T = prob.operator
            prob = prob.with_operator(convex_combination(value, T.left, T.right))
    except PossibilisticError as e:
        record = RunRecord(mode="sweep", loading=value if param == "lambda" else file.loading,
                           operator=file.operator.kind, failed=True)
        record.warn(f"point {param}={format_number(value)} rejected: {e}")
        return record
    return solve_record(prob, "sweep", tol)


def run_sweep(file: ProblemFile, param: str, start: float, stop: float, steps: int,
              tol: float = DEFAULT_TOL, n_jobs: Optional[int] = None) -> List[RunRecord]:
    """One row per grid point, ordered by parameter value whatever the worker count"""
    if param not in ("lambda", "c"):
        raise PreconditionError(f"sweep parameter must be 'lambda' or 'c', got {param!r}")
    if param == "c" and file.operator.kind != "mix":
        raise PreconditionError("a sweep over c needs a mix operator in the problem file")
    if steps < 2:
        raise PreconditionError(f"a sweep needs at least 2 steps, got {steps}")
    if n_jobs is None:
        n_jobs = int(os.getenv("POSSI_SWEEP_JOBS", "1"))
    grid = np.linspace(start, stop, steps)
    return Parallel(n_jobs=n_jobs)(delayed(_sweep_point)(file, param, float(v), tol) for v in grid)


def _reciprocal_gap(reference: Optional[float], beta: Optional[float]) -> Optional[float]:
    if reference is None or beta is None or reference == 1.0 or beta == 1.0:
        return None
    return 1.0 / (1.0 - reference) - 1.0 / (1.0 - beta)


def run_compare(file: ProblemFile, operators: Sequence[str], tol: float = DEFAULT_TOL) -> List[RunRecord]:
    """
    Side-by-side rows, one per operator token. Every row after the first carries
    gap = 1/(1 - beta_first) - 1/(1 - beta_row) on the approximate rates, and a
    t1/t2 pair also gets the closed-form prediction when the risk is triangular
    and f(t) = 2t.
    """
    if len(operators) < 2:
        raise PreconditionError(f"compare needs at least 2 operators, got {len(operators)}")
    base = build_problem(file)
    f, quadrature = base.weighting, base.operator.quadrature
    problems = [base.with_operator(parse_operator_token(tok, f, quadrature)) for tok in operators]
    records = [solve_record(prob, "compare", tol) for prob in problems]

    first = problems[0].operator
    for prob, record in zip(problems[1:], records[1:]):
        record.gap = _reciprocal_gap(records[0].beta_approx, record.beta_approx)
        kinds = (first.kind, prob.operator.kind)
        if kinds in ((OperatorKind.T1, OperatorKind.T2), (OperatorKind.T2, OperatorKind.T1)):
            try:
                predicted = rate_gap_T1_T2(prob)
            except PossibilisticError as e:
                logger.debug("no closed-form gap: %s", e)
            else:
                record.predicted_gap = predicted if kinds[0] is OperatorKind.T1 else -predicted
    return records


# ---------- Rendering ----------
def columnize(rows: List[List[str]], divider: str = " | ") -> str:
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append(divider.join(str(val).ljust(width) for val, width in zip(row, widths)).rstrip())
        if i == 0:
            lines.append(divider.join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def render(records: List[RunRecord], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.model_dump(by_alias=True) for r in records], indent=2) + "\n"
    rows = [r.csv_row() for r in records]
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
        return out.getvalue()
    return columnize([CSV_HEADER] + rows)


# ---------- CLI ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Optimal coinsurance rates for possibilistic risks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="problem file (JSON)")
        p.add_argument("--format", choices=["table", "csv", "json"], default="table")
        p.add_argument("--output", default="-", help="report file (default stdout)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="tolerance on |H'(beta)|")
        p.add_argument("--verbose", action="store_true", help="debug logging")

    common(sub.add_parser("solve", help="exact and approximate optimal rate"))
    sweep = sub.add_parser("sweep", help="rates over a grid of lambda or mixture weight c")
    common(sweep)
    sweep.add_argument("--param", choices=["lambda", "c"], required=True)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    compare = sub.add_parser("compare", help="rates under several operators")
    common(compare)
    compare.add_argument("--operators", default="t1,t2", help="comma separated: t1, t2, mix:<c>")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    load_env_file()

    print(f"🚀 {args.command}: {args.input}", file=sys.stderr)
    try:
        file = parse_problem_file(args.input)
        if args.command == "solve":
            records = run_solve(file, args.tol)
        elif args.command == "sweep":
            records = run_sweep(file, args.param, args.start, args.stop, args.steps, args.tol)
        else:
            records = run_compare(file, args.operators.split(","), args.tol)
    except PossibilisticError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 1

    report = render(records, args.format)
    if args.output == "-":
        sys.stdout.write(report)
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(report)

    failed = sum(r.failed for r in records)
    warned = sum(bool(r.warnings) for r in records)
    print(f"📊 {len(records)} row(s)", file=sys.stderr)
    if warned:
        print(f"⚠️  {warned} row(s) with warnings", file=sys.stderr)
    if failed:
        print(f"❌ {failed} row(s) failed", file=sys.stderr)
        return 1
    print("✅ Done", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
