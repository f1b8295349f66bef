"""Command-line front end: ``masscalc <subcommand> [options]``.

Exit codes: 0 success, 1 usage or argument error, 2 when the computation ran
but a verification identity failed or a report was flagged.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from importlib.resources import files

import numpy as np

from .geometry import builtin_chart
from .mass import boundary_report, mass_quadrature, theorem_check
from .spectral import (
    CapabilityError,
    ConsistencyError,
    build_B,
    build_projections,
    build_rep,
    spectral_report,
    symbol_matrix,
)
from .weights import DominantWeight, casimir, decompose, parse_weight, weyl_dimension
from .weitzenbock import (
    classify,
    mass_coefficient,
    random_unit_vectors,
    universal_mass_coefficient,
    universal_vector,
    weitzenbock_basis,
)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
COMMANDS = (
    "decompose",
    "casimir",
    "weitzenbock",
    "mu",
    "classify",
    "verify-rep",
    "mass",
    "boundary",
    "theorem-check",
)
SPAN_TOL = 1e-9
SYMBOL_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- serialization


def load_schema(command: str) -> dict:
    """The JSON schema shipped for a subcommand's report."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    return json.loads(files("masscalc").joinpath("schemas", f"{command}.json").read_text())


def rational(x) -> dict:
    f = Fraction(x)
    return {"num": f.numerator, "den": f.denominator}


def _number(x):
    if isinstance(x, Fraction):
        return rational(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _cell(v) -> str:
    if isinstance(v, dict) and set(v) == {"num", "den"}:
        return str(Fraction(v["num"], v["den"]))
    if isinstance(v, list):
        return " ".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    if v is None:
        return ""
    return str(v)


def _scalar_rows(payload: dict) -> list[dict]:
    return [{"key": k, "value": v} for k, v in sorted(payload.items()) if not isinstance(v, list)]


def render(payload: dict, rows: list[dict] | None, fmt: str) -> str:
    data = _jsonable(payload)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    table = _jsonable(rows) if rows else _scalar_rows(data)
    header = list(table[0]) if table else ["key", "value"]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in table:
            writer.writerow([_cell(row.get(h)) for h in header])
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(_cell(row.get(h)) for h in header) + " |" for row in table]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- argument helpers


def _parse_list(text: str, what: str, conv=float) -> list:
    try:
        return [conv(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse {what} {text!r}") from None


def _radii(text: str) -> list[float]:
    radii = _parse_list(text, "radii")
    if not radii:
        raise UsageError("--radii is empty")
    if any(not math.isfinite(r) or r <= 0 for r in radii):
        raise UsageError("radii must be positive numbers")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise UsageError("radii must be strictly increasing")
    return radii


def _family_weight(n: int, family: str, p, k) -> DominantWeight:
    if family == "trivial":
        return DominantWeight.zero(n)
    if family == "exterior":
        if p is None:
            raise UsageError("--family exterior needs --p")
        return DominantWeight.forms(n, p)
    if family == "spin":
        return DominantWeight.spin(n)
    if family == "symmetric_traceless":
        if k is None:
            raise UsageError("--family symmetric_traceless needs --k")
        return DominantWeight.symmetric(n, k)
    raise UsageError(f"unsupported family {family!r}")


def _infer_family(rho: DominantWeight) -> tuple[str, int | None, int | None]:
    n = rho.n
    if rho == DominantWeight.zero(n):
        return "trivial", None, None
    if rho == DominantWeight.spin(n):
        return "spin", None, None
    for p in range(1, n // 2 + 1):
        if rho == DominantWeight.forms(n, p):
            return "exterior", p, None
    k = rho.doubled[0] // 2
    if rho.doubled[0] % 2 == 0 and k >= 1 and rho == DominantWeight.symmetric(n, k):
        return "symmetric_traceless", None, k
    raise CapabilityError(
        f"no matrix family realizes weight {rho.text()}; use exterior, spin, symmetric_traceless or trivial"
    )


class Context:
    """Lazily built objects shared by the subcommand handlers."""

    def __init__(self, args):
        self.args = args
        if args.n is None:
            raise UsageError("--n is required")
        if args.n < 3:
            raise UsageError("--n must be at least 3")
        self.n = args.n
        self._rep = None
        self._proj = None
        self._basis = None
        self._rho = None
        self._decomp = None

    @property
    def rho(self) -> DominantWeight:
        if self._rho is None:
            self._rho = self._resolve_weight()
        return self._rho

    @property
    def decomp(self):
        if self._decomp is None:
            self._decomp = decompose(self.rho)
        return self._decomp

    def _resolve_weight(self) -> DominantWeight:
        a = self.args
        family_rho = None
        if a.family is not None:
            try:
                family_rho = _family_weight(self.n, a.family, a.p, a.k)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        if a.weight is not None:
            try:
                rho = parse_weight(self.n, a.weight)
            except ValueError as exc:
                raise UsageError(f"bad weight {a.weight!r}: {exc}") from None
            if family_rho is not None and family_rho != rho:
                raise UsageError(f"--weight {rho.text()} does not match family weight {family_rho.text()}")
            return rho
        if family_rho is None:
            raise UsageError("give --weight or --family")
        return family_rho

    @property
    def rep(self):
        if self._rep is None:
            a = self.args
            if a.family is not None:
                family, p, k = a.family, a.p, a.k
            else:
                family, p, k = _infer_family(self.rho)
            self._rep = build_rep(self.n, family, p=p, k=k)
        return self._rep

    @property
    def proj(self):
        if self._proj is None:
            self._proj = build_projections(build_B(self.rep), self.decomp)
        return self._proj

    @property
    def basis(self):
        if self._basis is None:
            self._basis = weitzenbock_basis(self.proj, self.decomp, seed=self.args.seed)
        return self._basis

    def coefficient_sets(self) -> list[tuple]:
        text = self.args.coeffs
        if text is None:
            raise UsageError("--coeffs is required (a list, 'universal' or 'basis')")
        if text == "universal":
            return [universal_vector(self.decomp).coeffs]
        if text == "basis":
            return [v.coeffs for v in self.basis.vectors()]
        coeffs = _parse_list(text, "coefficients", Fraction)
        if len(coeffs) != self.decomp.N:
            raise UsageError(f"expected {self.decomp.N} coefficients for weight {self.rho.text()}, got {len(coeffs)}")
        return [tuple(coeffs)]

    def chart(self):
        a = self.args
        if a.metric == "flat":
            return builtin_chart("flat", self.n)
        if a.metric == "schwarzschild":
            if a.M is None:
                raise UsageError("--metric schwarzschild needs --M")
            try:
                return builtin_chart("schwarzschild", self.n, M=a.M)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        raise UsageError(f"unsupported metric {a.metric!r}")

    def radii(self, chart) -> list[float]:
        if self.args.radii is None:
            raise UsageError("--radii is required")
        radii = _radii(self.args.radii)
        if radii[0] <= chart.r_min:
            raise UsageError(f"radii must exceed r_min = {chart.r_min:g}")
        return radii


def _head(ctx: Context) -> dict:
    return {"rho": ctx.rho.text(), "n": ctx.n}


def _coeff_list(coeffs) -> list:
    return [_number(c) if not isinstance(c, Fraction) else c for c in coeffs]


def _summand_rows(ctx: Context) -> list[dict]:
    return [
        {"index": j, "weight": s.weight.text(), "w": s.conformal_weight, "dim": s.dim, "origin": s.origin_text}
        for j, s in enumerate(ctx.decomp.summands)
    ]


# ---------------------------------------------------------------- handlers


def cmd_decompose(ctx: Context):
    checks = ctx.decomp.check_invariants()
    payload = {**ctx.decomp.to_dict(), "dim_V": ctx.decomp.dim_V, "invariants": checks}
    return payload, _summand_rows(ctx), all(checks.values())


def cmd_casimir(ctx: Context):
    payload = {
        **_head(ctx),
        "casimir": casimir(ctx.rho),
        "dim_V": weyl_dimension(ctx.rho),
        "universal_mass_coefficient": universal_mass_coefficient(ctx.decomp),
    }
    return payload, None, True


def _basis_payload(ctx: Context) -> dict:
    b = ctx.basis
    return {
        "basis": [list(row) for row in b.rational] if b.rational is not None else b.basis.tolist(),
        "basis_is_rational": b.rational is not None,
        "dimension": b.dimension,
        "expected_dimension": b.expected_dimension,
        "anomaly": b.anomaly,
        "residual": b.residual,
        "universal_residual": b.universal_residual,
    }


def cmd_weitzenbock(ctx: Context):
    info = _basis_payload(ctx)
    payload = {**ctx.decomp.to_dict(), **info, "universal": list(universal_vector(ctx.decomp).coeffs)}
    ok = not info["anomaly"] and info["residual"] <= SYMBOL_TOL and info["universal_residual"] <= SPAN_TOL
    rows = [{"index": i, "coeffs": row} for i, row in enumerate(payload["basis"])]
    return payload, rows, ok


def cmd_mu(ctx: Context):
    results = [
        {"coeffs": _coeff_list(c), "mu": mass_coefficient(ctx.decomp, c)} for c in ctx.coefficient_sets()
    ]
    payload = {**_head(ctx), "N": ctx.decomp.N, "results": results}
    if len(results) == 1:
        payload["mu"] = results[0]["mu"]
    return payload, results, True


def cmd_classify(ctx: Context):
    sets = ctx.coefficient_sets()
    if len(sets) != 1:
        raise UsageError("classify takes a single coefficient vector")
    try:
        basis = ctx.basis
    except CapabilityError:
        basis = None
    report = classify(ctx.decomp, sets[0], basis)
    payload = {
        **ctx.decomp.to_dict(),
        "coeffs": _coeff_list(sets[0]),
        "basis": None if basis is None else _basis_payload(ctx)["basis"],
        **report,
    }
    if basis is None:
        payload["span_residual"] = None
        payload["in_span"] = None
    ok = payload["in_span"] is not False
    return payload, None, ok


def _symbol_checks(ctx: Context, samples: int = 20) -> dict:
    rng = np.random.default_rng(ctx.args.seed)
    xis = random_unit_vectors(ctx.n, samples, rng)
    w = [float(x) for x in ctx.decomp.weights]
    eye = np.eye(ctx.rep.dim_V)
    resolve = trace_b = spread = 0.0
    for xi in xis:
        qs = [symbol_matrix(ctx.proj, j, xi) for j in range(len(ctx.proj))]
        resolve = max(resolve, float(np.max(np.abs(sum(qs) - eye))))
        trace_b = max(trace_b, float(np.max(np.abs(sum(c * q for c, q in zip(w, qs))))))
    ref = [np.linalg.eigvalsh(symbol_matrix(ctx.proj, j, xis[0])) for j in range(len(ctx.proj))]
    for xi in xis[1:]:
        for j in range(len(ctx.proj)):
            spread = max(spread, float(np.max(np.abs(np.linalg.eigvalsh(symbol_matrix(ctx.proj, j, xi)) - ref[j]))))
    return {"symbols_resolve_identity": resolve, "symbols_weighted_sum": trace_b, "symbol_spectrum_spread": spread}


def cmd_verify_rep(ctx: Context):
    report = spectral_report(ctx.rep, ctx.decomp)
    B, proj = report.pop("_B"), report.pop("_projections")
    ctx._proj = proj
    sym = _symbol_checks(ctx)
    report["symbol_residuals"] = sym
    report["checks"]["symbols"] = all(v <= 1e-9 for v in sym.values())
    report["passed"] = all(report["checks"].values())
    if ctx.args.dump_spectral:
        dump = {
            "n": ctx.n,
            "family": ctx.rep.family,
            "params": dict(ctx.rep.params),
            "rho": ctx.rho.text(),
            "generators": {
                f"{i},{j}": {"real": ctx.rep.generator(i, j).real.tolist(), "imag": ctx.rep.generator(i, j).imag.tolist()}
                for i in range(ctx.n)
                for j in range(i + 1, ctx.n)
            },
            "B_eigenvalues": np.sort(B.eigenvalues()).tolist(),
            "predicted": [{"w": s.conformal_weight, "dim": s.dim} for s in ctx.decomp.summands],
        }
        with open(ctx.args.dump_spectral, "w") as fh:
            fh.write(json.dumps(_jsonable(dump), sort_keys=True) + "\n")
    rows = [{"check": k, "passed": v} for k, v in sorted(report["checks"].items())]
    return report, rows, report["passed"]


def _radius_rows(results: list[dict]) -> list[dict]:
    rows = []
    for idx, res in enumerate(results):
        for r, v in zip(res["radii"], res["values"]):
            rows.append({"result": idx, "radius": r, "value": v})
    return rows


def cmd_mass(ctx: Context):
    chart = ctx.chart()
    report = mass_quadrature(chart, ctx.radii(chart), ctx.args.quad_order).to_dict()
    return report, _radius_rows([report]), report["accepted"]


def cmd_boundary(ctx: Context):
    chart = ctx.chart()
    radii = ctx.radii(chart)
    results = []
    for c in ctx.coefficient_sets():
        rep = boundary_report(chart, ctx.rep, ctx.proj, c, radii, ctx.args.quad_order, ctx.args.exact_frame)
        results.append({"coeffs": _coeff_list(c), "mu": mass_coefficient(ctx.decomp, c), **rep.to_dict()})
    payload = {**_head(ctx), "exact_frame": ctx.args.exact_frame, "results": results}
    return payload, _radius_rows(results), all(r["accepted"] for r in results)


def cmd_theorem_check(ctx: Context):
    chart = ctx.chart()
    radii = ctx.radii(chart)
    results = []
    for c in ctx.coefficient_sets():
        res = theorem_check(chart, ctx.rep, ctx.proj, c, radii, ctx.args.quad_order, ctx.args.rel_tol)
        results.append(
            {
                "coeffs": _coeff_list(c),
                "mu": res["mu"],
                "ratio": res["ratio"],
                "ratio_exact_frame": res["ratio_exact_frame"],
                "per_radius_ratio": res["per_radius_ratio"],
                "mass": res["mass"].to_dict(),
                "boundary": res["boundary"].to_dict(),
                "boundary_exact_frame": res["boundary_exact_frame"].to_dict(),
                "passed": res["passed"],
            }
        )
    passed = all(r["passed"] for r in results)
    payload = {**_head(ctx), "rel_tol": ctx.args.rel_tol, "results": results, "passed": passed}
    rows = [
        {"result": i, "mu": r["mu"], "ratio": r["ratio"], "ratio_exact_frame": r["ratio_exact_frame"], "passed": r["passed"]}
        for i, r in enumerate(results)
    ]
    return payload, rows, passed


HANDLERS = {
    "decompose": cmd_decompose,
    "casimir": cmd_casimir,
    "weitzenbock": cmd_weitzenbock,
    "mu": cmd_mu,
    "classify": cmd_classify,
    "verify-rep": cmd_verify_rep,
    "mass": cmd_mass,
    "boundary": cmd_boundary,
    "theorem-check": cmd_theorem_check,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="masscalc", description="so(n) weight calculus, Weitzenboeck formulas and mass checks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--n", type=int, help="ambient dimension (>= 3)")
    parser.add_argument("--weight", help='dominant weight, e.g. "3/2,1/2"')
    parser.add_argument("--family", choices=("trivial", "exterior", "spin", "symmetric_traceless"))
    parser.add_argument("--p", type=int, help="form degree for --family exterior")
    parser.add_argument("--k", type=int, help="degree for --family symmetric_traceless")
    parser.add_argument("--coeffs", help="comma list of rationals, 'universal' or 'basis'")
    parser.add_argument("--metric", default="schwarzschild", choices=("flat", "schwarzschild"))
    parser.add_argument("--M", type=float, default=None, help="Schwarzschild mass parameter")
    parser.add_argument("--radii", help="strictly increasing comma list of sphere radii")
    parser.add_argument("--quad-order", type=int, default=32)
    parser.add_argument("--exact-frame", action="store_true", help="boundary: use the g-unit normal and induced area")
    parser.add_argument("--rel-tol", type=float, default=0.01, help="theorem-check tolerance on the ratio")
    parser.add_argument("--format", default="json", choices=("json", "csv", "markdown"))
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dump-spectral", metavar="PATH", help="verify-rep: dump generators and B spectrum")
    return parser


def _thread_limit():
    raw = os.environ.get("MASSCALC_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"MASSCALC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"MASSCALC_THREADS must be a positive integer, got {raw!r}")
    return value


def _execute(args) -> int:
    if args.quad_order < 1:
        raise UsageError("--quad-order must be positive")
    ctx = Context(args)
    payload, rows, ok = HANDLERS[args.command](ctx)
    text = render(payload, rows, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAILED


VALUE_OPTIONS = ("--coeffs", "--weight", "--radii")


def _glue_values(argv: list[str]) -> list[str]:
    """Attach values such as ``-1,2`` to their option so argparse does not read them as flags."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        limit = _thread_limit()
        if limit is None:
            return _execute(args)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=limit):
            return _execute(args)
    except UsageError as exc:
        print(f"masscalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"masscalc: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (CapabilityError, ValueError, OSError) as exc:
        print(f"masscalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
