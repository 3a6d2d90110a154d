"""Command-line interface.

Every subcommand reads JSON inputs (dense complex matrices and symbol value
grids), runs one computation, and emits a run report: command, input file
digests, outputs, stage timings, seed and tool version.  Reports go to
stdout or to --out as JSON; verify-main can emit its trial table as CSV.

Exit status: 0 when all checks pass, 2 when a numerical check or tolerance
fails, 1 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import BudgetExceeded, NotNormal, OpintError, ParseError
from .linalg import (
    NormalOperator,
    matrix_from_json,
    matrix_to_json,
    normal_eig,
    schatten_norm,
    trace_pairing,
)
from .norms import (
    AGREEMENT_TOL,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    DEFAULT_SWEEPS,
    doi_s1_norm,
    gamma2,
    norm_estimate_to_json,
    recover_factorization,
    s1_bilinear_norm_lower,
    s2s2_to_s2_norm,
    trilinear_factor_norm,
)
from .opint import doi_apply, doi_via_toi, moi_apply, toi_apply
from .sdp import GAP_TOL, solve_gamma2_sdp
from .symbols import SymbolGrid, grid_from_json, grid_to_json, sup_norm
from .linalg import NORMALITY_TOL

_VERIFY_DIM_CAP = 4


@dataclass
class RunReport:
    """What one CLI invocation did, in wire form."""

    command: str
    inputs: dict
    outputs: dict
    timings: dict
    seed: int | None
    tool_version: str

    def to_json(self) -> dict:
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            digest.update(handle.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return digest.hexdigest()


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def _load_matrix(path: str) -> np.ndarray:
    return matrix_from_json(_read_json(path))


def _load_operator(path: str, tol: float = NORMALITY_TOL) -> NormalOperator:
    return normal_eig(_load_matrix(path), normality_tol=tol)


def _load_grid(path: str) -> SymbolGrid:
    return grid_from_json(_read_json(path))


def _operator_to_json(op: NormalOperator) -> dict:
    mat = op.matrix
    adj = mat.conj().T
    scale = max(float(np.linalg.norm(mat)), 1e-300)
    return {
        "dim": op.dim,
        "eigenvalues_re": op.eigenvalues.real.tolist(),
        "eigenvalues_im": op.eigenvalues.imag.tolist(),
        "eigenbasis": matrix_to_json(op.eigenbasis),
        "residuals": {
            "normality": float(np.linalg.norm(mat @ adj - adj @ mat)) / scale**2,
            "orthonormality": float(
                np.linalg.norm(op.eigenbasis @ op.eigenbasis.conj().T - np.eye(op.dim))
            ),
            "reconstruction": float(
                np.linalg.norm(
                    op.eigenbasis @ (op.eigenvalues[:, None] * op.eigenbasis.conj().T)
                    - mat
                )
            )
            / scale,
        },
    }


def _emit(report: RunReport, args, csv_rows=None, csv_header=None) -> None:
    if getattr(args, "format", "json") == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
        text = buffer.getvalue()
    else:
        text = json.dumps(report.to_json(), indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _digests(paths: dict) -> dict:
    return {label: _sha256(path) for label, path in paths.items() if path}


def _rel_gap(upper: float, lower: float) -> float:
    return abs(upper - lower) / max(abs(upper), 1e-12)


def _diag_op(dim: int) -> NormalOperator:
    return NormalOperator.from_eigensystem(np.arange(dim, dtype=np.float64))


def _diag_axes(dims) -> tuple:
    return tuple(np.arange(d, dtype=np.complex128) for d in dims)


def _random_grid(rng, dims, complex_entries: bool) -> SymbolGrid:
    if complex_entries:
        radius = np.sqrt(rng.uniform(0.0, 1.0, size=dims))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=dims)
        values = radius * np.exp(1j * angle)
    else:
        values = rng.uniform(-1.0, 1.0, size=dims)
    return SymbolGrid(axes=_diag_axes(dims), values=values)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eig(args):
    t0 = time.perf_counter()
    inputs = _digests({"matrix": args.matrix})
    mat = _load_matrix(args.matrix)
    try:
        op = normal_eig(mat, normality_tol=args.tol)
    except NotNormal as exc:
        report = RunReport(
            command="eig",
            inputs=inputs,
            outputs={"error": "NotNormal", "message": str(exc)},
            timings={"total": time.perf_counter() - t0},
            seed=None,
            tool_version=__version__,
        )
        return report, 2, None, None
    report = RunReport(
        command="eig",
        inputs=inputs,
        outputs=_operator_to_json(op),
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0, None, None


def cmd_doi(args):
    t0 = time.perf_counter()
    inputs = _digests({"op_a": args.op_a, "op_b": args.op_b, "grid": args.grid, "x": args.x})
    op_a = _load_operator(args.op_a)
    op_b = _load_operator(args.op_b)
    psi = _load_grid(args.grid)
    x = _load_matrix(args.x)
    result = doi_apply(op_a, op_b, psi, x)
    bound = sup_norm(psi) * schatten_norm(x, 2)
    out_norm = schatten_norm(result, 2)
    report = RunReport(
        command="doi",
        inputs=inputs,
        outputs={
            "result": matrix_to_json(result),
            "result_s2": out_norm,
            "bound_ok": bool(out_norm <= bound + 1e-10),
        },
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0 if out_norm <= bound + 1e-10 else 2, None, None


def cmd_toi(args):
    t0 = time.perf_counter()
    inputs = _digests(
        {
            "op_a": args.op_a,
            "op_b": args.op_b,
            "op_c": args.op_c,
            "grid": args.grid,
            "x": args.x,
            "y": args.y,
        }
    )
    op_a = _load_operator(args.op_a)
    op_b = _load_operator(args.op_b)
    op_c = _load_operator(args.op_c)
    phi = _load_grid(args.grid)
    x = _load_matrix(args.x)
    y = _load_matrix(args.y)
    result = toi_apply(op_a, op_b, op_c, phi, x, y)
    bound = sup_norm(phi) * schatten_norm(x, 2) * schatten_norm(y, 2)
    out_norm = schatten_norm(result, 2)
    bound_ok = bool(out_norm <= bound + 1e-10)
    report = RunReport(
        command="toi",
        inputs=inputs,
        outputs={
            "result": matrix_to_json(result),
            "result_s2": out_norm,
            "contraction_bound": bound,
            "bound_ok": bound_ok,
        },
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0 if bound_ok else 2, None, None


def cmd_moi(args):
    t0 = time.perf_counter()
    paths = {f"op_{m}": p for m, p in enumerate(args.op)}
    paths.update({f"arg_{m}": p for m, p in enumerate(args.arg)})
    paths["grid"] = args.grid
    inputs = _digests(paths)
    ops = [_load_operator(p) for p in args.op]
    grid = _load_grid(args.grid)
    mats = [_load_matrix(p) for p in args.arg]
    result = moi_apply(ops, grid, mats)
    report = RunReport(
        command="moi",
        inputs=inputs,
        outputs={"result": matrix_to_json(result), "result_s2": schatten_norm(result, 2)},
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0, None, None


def cmd_norm_s2(args):
    t0 = time.perf_counter()
    inputs = _digests(
        {"op_a": args.op_a, "op_b": args.op_b, "op_c": args.op_c, "grid": args.grid}
    )
    op_a = _load_operator(args.op_a)
    op_b = _load_operator(args.op_b)
    op_c = _load_operator(args.op_c)
    phi = _load_grid(args.grid)
    est = s2s2_to_s2_norm(op_a, op_b, op_c, phi)
    achieved = schatten_norm(
        toi_apply(op_a, op_b, op_c, phi, est.witness["X"], est.witness["Y"]), 2
    )
    report = RunReport(
        command="norm-s2",
        inputs=inputs,
        outputs={
            "estimate": norm_estimate_to_json(est),
            "witness_value": achieved,
            "witness_residual": abs(achieved - est.value),
        },
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0, None, None


def cmd_norm_s1(args):
    t0 = time.perf_counter()
    inputs = _digests(
        {"op_a": args.op_a, "op_b": args.op_b, "op_c": args.op_c, "grid": args.grid}
    )
    op_a = _load_operator(args.op_a)
    op_b = _load_operator(args.op_b)
    op_c = _load_operator(args.op_c)
    phi = _load_grid(args.grid)
    est = s1_bilinear_norm_lower(
        op_a, op_b, op_c, phi, restarts=args.restarts, max_iter=args.max_iter,
        seed=args.seed,
    )
    reeval = abs(
        trace_pairing(
            toi_apply(op_a, op_b, op_c, phi, est.witness["X"], est.witness["Y"]),
            est.witness["Z"],
        )
    )
    report = RunReport(
        command="norm-s1",
        inputs=inputs,
        outputs={
            "estimate": norm_estimate_to_json(est),
            "witness_value": reeval,
            "witness_residual": abs(reeval - est.value) / max(est.value, 1e-12),
        },
        timings={"total": time.perf_counter() - t0},
        seed=args.seed,
        tool_version=__version__,
    )
    return report, 0, None, None


def cmd_gamma2(args):
    t0 = time.perf_counter()
    inputs = _digests({"matrix": args.matrix})
    mat = _load_matrix(args.matrix)
    sol = solve_gamma2_sdp(mat, gap_tol=args.tol)
    p, q = mat.shape
    evals = np.linalg.eigvalsh((sol.gram + sol.gram.conj().T) / 2.0)
    diag = np.diag(sol.gram).real
    report = RunReport(
        command="gamma2",
        inputs=inputs,
        outputs={
            "value": sol.value,
            "duality_gap": sol.duality_gap,
            "iterations": sol.iterations,
            "status": sol.status,
            "gram": matrix_to_json(sol.gram),
            "feasibility": {
                "min_eigenvalue": float(evals[0]),
                "diag_excess": float(max(0.0, np.max(diag) - sol.value)),
                "data_block_residual": float(
                    np.linalg.norm(sol.gram[:p, p:] - mat)
                ),
            },
        },
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0 if sol.status == "Optimal" else 2, None, None


def cmd_factor(args):
    t0 = time.perf_counter()
    inputs = _digests({"matrix": args.matrix})
    mat = _load_matrix(args.matrix)
    p, q = mat.shape
    sol = solve_gamma2_sdp(mat, gap_tol=args.tol)
    pair = recover_factorization(sol.gram, p, q)
    recon = pair.reconstruct()
    scale = max(float(np.linalg.norm(mat)), 1e-300)
    residual = float(np.linalg.norm(recon - mat)) / scale
    ok = sol.status == "Optimal" and residual <= 1e-6
    report = RunReport(
        command="factor",
        inputs=inputs,
        outputs={
            "value": sol.value,
            "duality_gap": sol.duality_gap,
            "status": sol.status,
            "hilbert_dim": pair.hilbert_dim,
            "norm_a": pair.norm_a,
            "norm_b": pair.norm_b,
            "norm_product": pair.norm_a * pair.norm_b,
            "reconstruction_residual": residual,
            "a": matrix_to_json(pair.a),
            "b": matrix_to_json(pair.b),
        },
        timings={"total": time.perf_counter() - t0},
        seed=None,
        tool_version=__version__,
    )
    return report, 0 if ok else 2, None, None


def run_verify_main(
    dims,
    trials: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
    tol: float = AGREEMENT_TOL,
    complex_entries: bool = False,
    max_iter: int = DEFAULT_SWEEPS,
) -> dict:
    """Check lower/upper agreement for the trace-norm-output trilinear norm.

    For each trial a random grid is drawn on the given dimensions, the
    multi-start ascent produces a lower bound, the slice factorization norms
    an upper bound, and the relative gap must not exceed ``tol``.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"need three positive dimensions, got {dims}")
    if any(d > _VERIFY_DIM_CAP for d in dims):
        raise BudgetExceeded(
            f"dimensions {dims} exceed the default verification budget "
            f"(each must be <= {_VERIFY_DIM_CAP})"
        )
    ops = tuple(_diag_op(d) for d in dims)
    rows = []
    t_lower = t_upper = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        grid = _random_grid(rng, dims, complex_entries)
        t0 = time.perf_counter()
        lower = s1_bilinear_norm_lower(
            *ops, grid, restarts=restarts, max_iter=max_iter, seed=seed ^ (trial + 1)
        ).value
        t1 = time.perf_counter()
        upper = trilinear_factor_norm(grid)[0].value
        t2 = time.perf_counter()
        t_lower += t1 - t0
        t_upper += t2 - t1
        rows.append(
            {
                "trial": trial,
                "lower": lower,
                "upper": upper,
                "rel_gap": _rel_gap(upper, lower),
            }
        )
    max_gap = max(row["rel_gap"] for row in rows) if rows else 0.0
    return {
        "dims": list(dims),
        "trials": trials,
        "restarts": restarts,
        "tolerance": tol,
        "complex": complex_entries,
        "results": rows,
        "max_rel_gap": max_gap,
        "passed": bool(max_gap <= tol),
        "timings": {"ascent": t_lower, "slice_sdp": t_upper},
    }


def cmd_verify_main(args):
    t0 = time.perf_counter()
    dims = tuple(int(part) for part in args.dims.split(","))
    outcome = run_verify_main(
        dims,
        trials=args.trials,
        restarts=args.restarts,
        seed=args.seed,
        tol=args.tol,
        complex_entries=args.complex,
    )
    report = RunReport(
        command="verify-main",
        inputs={},
        outputs=outcome,
        timings={"total": time.perf_counter() - t0, **outcome.pop("timings")},
        seed=args.seed,
        tool_version=__version__,
    )
    rows = [
        (row["trial"], row["lower"], row["upper"], row["rel_gap"])
        for row in outcome["results"]
    ]
    code = 0 if outcome["passed"] else 2
    return report, code, rows, ("trial", "lower", "upper", "rel_gap")


def run_example_ex1(n: int, seed: int = DEFAULT_SEED) -> dict:
    """Grid constant along its first axis: the transform is X times a
    Schur multiplier of Y, and the trace-output norm is the largest entry."""
    rng = np.random.default_rng([seed, 1])
    s = rng.uniform(-1.0, 1.0, size=(n, n))
    ops = (_diag_op(n), _diag_op(n), _diag_op(n))
    axes = _diag_axes((n, n, n))
    grid = SymbolGrid(axes=axes, values=np.broadcast_to(s[None, :, :], (n, n, n)).copy())
    schur = SymbolGrid(axes=axes[1:], values=s.astype(np.complex128))
    x = rng.uniform(-1.0, 1.0, size=(n, n))
    y = rng.uniform(-1.0, 1.0, size=(n, n))
    lhs = toi_apply(*ops, grid, x, y)
    rhs = x @ doi_apply(ops[1], ops[2], schur, y)
    residual = float(np.linalg.norm(lhs - rhs)) / max(float(np.linalg.norm(lhs)), 1e-300)
    value = trilinear_factor_norm(grid)[0].value
    expected = float(np.max(np.abs(s)))
    return {
        "n": n,
        "identity_residual": residual,
        "norm_value": value,
        "expected_value": expected,
        "norm_error": abs(value - expected),
        "passed": bool(residual <= 1e-11 and abs(value - expected) <= 1e-6),
    }


def _embed_middle_slice(s: np.ndarray, width: int) -> SymbolGrid:
    """Order-3 grid whose first middle slice is ``s`` and the rest vanish."""
    n1, n3 = s.shape
    values = np.zeros((n1, width, n3), dtype=np.complex128)
    values[:, 0, :] = s
    return SymbolGrid(axes=_diag_axes((n1, width, n3)), values=values)


def run_example_ex2(n: int, seed: int = DEFAULT_SEED, growth_sizes=(2, 4, 8, 16)) -> dict:
    """Single-slice grids and the separation between sup and trace norms.

    The canonical 2-by-2 sign matrix gives trace-output norm sqrt(2) against
    sup norm 1, and the factorization norm of the lower-triangular all-ones
    matrix grows strictly with its size.
    """
    canonical = np.array([[1.0, 1.0], [1.0, -1.0]])
    canon_grid = _embed_middle_slice(canonical, 2)
    canon_value = trilinear_factor_norm(canon_grid)[0].value
    canon_sup = sup_norm(canon_grid)

    rng = np.random.default_rng([seed, 2])
    s = rng.uniform(-1.0, 1.0, size=(n, n))
    embed_value = trilinear_factor_norm(_embed_middle_slice(s, n))[0].value
    direct_value = solve_gamma2_sdp(s).value

    growth = []
    for size in growth_sizes:
        tri = np.tril(np.ones((size, size)))
        growth.append({"n": size, "value": solve_gamma2_sdp(tri).value})
    increasing = all(
        growth[i + 1]["value"] > growth[i]["value"] for i in range(len(growth) - 1)
    )
    passed = (
        abs(canon_value - np.sqrt(2.0)) <= 1e-5
        and abs(canon_sup - 1.0) <= 1e-12
        and abs(embed_value - direct_value) <= 1e-6
        and increasing
    )
    return {
        "n": n,
        "canonical_norm": canon_value,
        "canonical_sup": canon_sup,
        "separation_ratio": canon_value / canon_sup,
        "embedded_norm": embed_value,
        "direct_factor_norm": direct_value,
        "growth": growth,
        "growth_strictly_increasing": increasing,
        "passed": bool(passed),
    }


def cmd_examples(args):
    t0 = time.perf_counter()
    if args.which == "ex1":
        outcome = run_example_ex1(args.n, seed=args.seed)
    else:
        outcome = run_example_ex2(args.n, seed=args.seed)
    report = RunReport(
        command=f"examples {args.which}",
        inputs={},
        outputs=outcome,
        timings={"total": time.perf_counter() - t0},
        seed=args.seed,
        tool_version=__version__,
    )
    return report, 0 if outcome["passed"] else 2, None, None


def cmd_peller(args):
    t0 = time.perf_counter()
    inputs = _digests({"op_a": args.op_a, "op_b": args.op_b, "grid": args.grid})
    op_a = _load_operator(args.op_a)
    op_b = _load_operator(args.op_b)
    psi = _load_grid(args.grid)
    est = doi_s1_norm(
        op_a, op_b, psi, restarts=args.restarts, max_iter=args.max_iter, seed=args.seed
    )
    upper = est.upper_certificate
    gap = _rel_gap(upper, est.value)

    sol = solve_gamma2_sdp(psi.values)
    pair = recover_factorization(sol.gram, op_a.dim, op_b.dim)
    recon = pair.reconstruct()
    scale = max(float(np.linalg.norm(psi.values)), 1e-300)
    recon_residual = float(np.linalg.norm(recon - psi.values)) / scale

    rng = np.random.default_rng([args.seed, 3])
    mid = _diag_op(op_a.dim)
    x = rng.uniform(-1.0, 1.0, size=(op_a.dim, mid.dim))
    y = rng.uniform(-1.0, 1.0, size=(mid.dim, op_b.dim))
    via = doi_via_toi(op_a, op_b, psi, x, y, mid)
    direct = doi_apply(op_a, op_b, psi, x @ y)
    reduction_residual = float(np.linalg.norm(via - direct)) / max(
        float(np.linalg.norm(direct)), 1e-300
    )

    passed = (
        gap <= args.tol
        and recon_residual <= 1e-5
        and reduction_residual <= 1e-11
        and pair.norm_a * pair.norm_b <= sol.value + 1e-5
    )
    report = RunReport(
        command="peller",
        inputs=inputs,
        outputs={
            "lower": est.value,
            "upper": upper,
            "rel_gap": gap,
            "converged": est.converged,
            "factor_norm_product": pair.norm_a * pair.norm_b,
            "factor_residual": recon_residual,
            "reduction_residual": reduction_residual,
            "passed": bool(passed),
        },
        timings={"total": time.perf_counter() - t0},
        seed=args.seed,
        tool_version=__version__,
    )
    return report, 0 if passed else 2, None, None


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opintlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"opintlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=False, restarts=False, tol=None):
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json",
            help="report format (csv only for verify-main)",
        )
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if restarts:
            p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
            p.add_argument("--max-iter", type=int, default=DEFAULT_SWEEPS)
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol)

    p = sub.add_parser("eig", help="spectral data of a normal matrix")
    p.add_argument("matrix")
    add_common(p, tol=NORMALITY_TOL)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("doi", help="apply a two-operator integral")
    for flag in ("--op-a", "--op-b", "--grid", "--x"):
        p.add_argument(flag, required=True)
    add_common(p)
    p.set_defaults(func=cmd_doi)

    p = sub.add_parser("toi", help="apply a three-operator integral")
    for flag in ("--op-a", "--op-b", "--op-c", "--grid", "--x", "--y"):
        p.add_argument(flag, required=True)
    add_common(p)
    p.set_defaults(func=cmd_toi)

    p = sub.add_parser("moi", help="apply an n-operator integral")
    p.add_argument("--op", action="append", required=True, help="repeat per operator")
    p.add_argument("--arg", action="append", required=True, help="repeat per argument")
    p.add_argument("--grid", required=True)
    add_common(p)
    p.set_defaults(func=cmd_moi)

    p = sub.add_parser("norm-s2", help="exact Hilbert-Schmidt bilinear norm")
    for flag in ("--op-a", "--op-b", "--op-c", "--grid"):
        p.add_argument(flag, required=True)
    add_common(p)
    p.set_defaults(func=cmd_norm_s2)

    p = sub.add_parser("norm-s1", help="trace-norm-output lower bound by ascent")
    for flag in ("--op-a", "--op-b", "--op-c", "--grid"):
        p.add_argument(flag, required=True)
    add_common(p, seed=True, restarts=True)
    p.set_defaults(func=cmd_norm_s1)

    p = sub.add_parser("gamma2", help="factorization norm of a matrix")
    p.add_argument("matrix")
    add_common(p, tol=GAP_TOL)
    p.set_defaults(func=cmd_gamma2)

    p = sub.add_parser("factor", help="factorization norm with recovered vectors")
    p.add_argument("matrix")
    add_common(p, tol=GAP_TOL)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser(
        "verify-main", help="lower/upper agreement for the trilinear trace norm"
    )
    p.add_argument("--dims", default="2,2,2", help="comma-separated dimensions")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--complex", action="store_true", help="complex unit-disk entries")
    add_common(p, seed=True, restarts=True, tol=AGREEMENT_TOL)
    p.set_defaults(func=cmd_verify_main)

    p = sub.add_parser("examples", help="built-in worked examples")
    p.add_argument("which", choices=("ex1", "ex2"))
    p.add_argument("--n", type=int, default=3)
    add_common(p, seed=True)
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("peller", help="trace-to-trace sandwich for one symbol")
    for flag in ("--op-a", "--op-b", "--grid"):
        p.add_argument(flag, required=True)
    add_common(p, seed=True, restarts=True, tol=AGREEMENT_TOL)
    p.set_defaults(func=cmd_peller)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "format", "json") == "csv" and args.command != "verify-main":
        sys.stderr.write("opintlab: error: --format csv is only available for verify-main\n")
        return 1
    try:
        report, code, rows, header = args.func(args)
    except (ParseError, BudgetExceeded) as exc:
        sys.stderr.write(f"opintlab: error: {exc}\n")
        return 1
    except NotNormal as exc:
        sys.stderr.write(f"opintlab: error: {exc}\n")
        return 2
    except OpintError as exc:
        sys.stderr.write(f"opintlab: error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"opintlab: error: {exc}\n")
        return 1
    _emit(report, args, csv_rows=rows, csv_header=header)
    return code
