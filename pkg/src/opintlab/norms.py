"""Operator norms of bilinear Schur-type transforms, with certificates.

Three norms are computed for the transform attached to an order-3 symbol:

* as a bilinear map on pairs of Hilbert-Schmidt matrices with a
  Hilbert-Schmidt-norm output it is an exact supremum (the transform acts
  entrywise in the rotated bases, so the norm is the sup norm of the grid);
* with a trace-norm output, lower bounds come from a multi-start
  block-coordinate ascent over (X, Y, Z) and upper bounds from the
  factorization norms of the grid's middle slices;
* for the two-operator transform, trace-to-trace norms are sandwiched the
  same way, with the factorization norm of the full grid as the upper side.

Lower bounds are always reported as lower bounds; upper certificates come
from the semidefinite solver and are correct up to its duality gap.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NotPsd, ShapeMismatch
from .linalg import NormalOperator, as_matrix
from .sdp import GAP_TOL, MAX_ITER, SdpSolution, solve_gamma2_sdp
from .symbols import SymbolGrid, middle_slices, sup_norm

DEFAULT_RESTARTS = 64
DEFAULT_SWEEPS = 500
DEFAULT_SEED = 0
AGREEMENT_TOL = 1e-3

_SWEEP_TOL = 1e-10
_ZERO_NORM = 1e-300


@dataclass
class NormEstimate:
    """A norm value with the evidence that produced it.

    value: the reported norm (a certified lower bound for ascent-based
        estimates, the exact or solver value otherwise).
    witness: named matrices achieving ``value`` when re-evaluated.
    upper_certificate: optional upper bound from a factorization certificate.
    restarts_used: number of ascent restarts behind the value (0 if exact).
    converged: False when the best restart was still improving at the sweep
        cap; the value is then still a valid lower bound.
    """

    value: float
    witness: dict
    upper_certificate: float | None = None
    restarts_used: int = 0
    converged: bool = True


@dataclass
class FactorizationPair:
    """Vector families (a, b) with <a_row, b_col> reproducing a matrix or grid.

    ``a`` and ``b`` hold the vectors along their last axis.  For a matrix
    factorization the shapes are (p, d) and (q, d); for an order-3 grid they
    are (n1, n2, d) and (n3, n2, d), indexed by (row, middle) and
    (column, middle).
    """

    a: np.ndarray
    b: np.ndarray

    @property
    def hilbert_dim(self) -> int:
        return self.a.shape[-1]

    @property
    def norm_a(self) -> float:
        return float(np.max(np.linalg.norm(self.a, axis=-1)))

    @property
    def norm_b(self) -> float:
        return float(np.max(np.linalg.norm(self.b, axis=-1)))

    def reconstruct(self) -> np.ndarray:
        """Pair the families back into the matrix (2-d) or grid (3-d) values."""
        if self.a.ndim == 2:
            return np.einsum("id,jd->ij", self.a, self.b.conj())
        if self.a.ndim == 3:
            return np.einsum("ikd,jkd->ikj", self.a, self.b.conj())
        raise ShapeMismatch(f"unsupported vector family rank {self.a.ndim}")


def _thread_cap() -> int:
    raw = os.environ.get("OPINT_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return max(1, os.cpu_count() or 1)


def _map_ordered(fn, items):
    items = list(items)
    cap = min(_thread_cap(), len(items))
    if cap <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))


def s2s2_to_s2_norm(
    op_a: NormalOperator,
    op_b: NormalOperator,
    op_c: NormalOperator,
    phi: SymbolGrid,
) -> NormEstimate:
    """Norm of the transform as a bilinear map between Hilbert-Schmidt spaces.

    The transform is an isometric representation of the grid algebra, so the
    norm equals the sup norm of the grid exactly, attained on a rank-one pair
    built from the eigenbasis columns at the largest grid entry.
    """
    _check_grid_ops(phi, (op_a, op_b, op_c))
    value = sup_norm(phi)
    i, k, j = np.unravel_index(int(np.argmax(np.abs(phi.values))), phi.shape)
    col_a = op_a.eigenbasis[:, i]
    col_b = op_b.eigenbasis[:, k]
    col_c = op_c.eigenbasis[:, j]
    x = np.outer(col_a, col_b.conj())
    y = np.outer(col_b, col_c.conj())
    return NormEstimate(
        value=value,
        witness={"X": x, "Y": y},
        upper_certificate=value,
        restarts_used=0,
        converged=True,
    )


def _check_grid_ops(grid: SymbolGrid, ops) -> None:
    if grid.order != len(ops):
        raise ShapeMismatch(
            f"grid order {grid.order} does not match {len(ops)} operators"
        )
    for slot, op in enumerate(ops):
        axis = grid.axes[slot]
        if axis.size != op.dim:
            raise ShapeMismatch(
                f"grid axis {slot} has length {axis.size}, operator dim {op.dim}"
            )
        tol = 1e-12 * (1.0 + np.max(np.abs(op.eigenvalues)))
        if not np.allclose(axis, op.eigenvalues, rtol=0.0, atol=tol):
            raise ShapeMismatch(
                f"grid axis {slot} does not match the operator's eigenvalue list"
            )


def _unit_gaussians(rng, shape) -> np.ndarray:
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / max(np.linalg.norm(z), _ZERO_NORM)


def _polar_batch(t: np.ndarray):
    """Batched trace-norm ascent partner: Z with tr(T Z) = ||T||_1 per batch."""
    u, sv, vh = np.linalg.svd(t, full_matrices=False)
    z = vh.conj().swapaxes(-1, -2) @ u.conj().swapaxes(-1, -2)
    return z, sv.sum(axis=-1)


def _renormalize(batch: np.ndarray, old: np.ndarray):
    """Scale each batch entry to unit Frobenius norm, keeping zero updates."""
    flat = batch.reshape(batch.shape[0], -1)
    norms = np.linalg.norm(flat, axis=1)
    ok = norms > 1e-200
    out = np.where(
        ok.reshape((-1,) + (1,) * (batch.ndim - 1)),
        batch / np.maximum(norms, _ZERO_NORM).reshape((-1,) + (1,) * (batch.ndim - 1)),
        old,
    )
    return out, norms, ok


def _ascent_trilinear(values: np.ndarray, restarts: int, max_iter: int, seed: int):
    """Multi-start alternating ascent for the trace-norm output, batched.

    Works in the rotated bases (the value is basis independent).  Each sweep
    updates Z by the trace-norm polar step, then X and Y by normalizing the
    linear representative of the objective; the objective never decreases.
    Restart r draws its start from a generator seeded with seed XOR r.
    """
    da, db, dc = values.shape
    xs = np.stack(
        [_unit_gaussians(np.random.default_rng(seed ^ r), (da, db)) for r in range(restarts)]
    )
    ys = np.stack(
        [_unit_gaussians(np.random.default_rng((seed ^ r) + 1), (db, dc)) for r in range(restarts)]
    )
    vals = np.zeros(restarts)
    settled = np.zeros(restarts, dtype=bool)
    for _ in range(max_iter):
        t = np.einsum("ikj,rik,rkj->rij", values, xs, ys)
        z, _ = _polar_batch(t)
        wx = np.einsum("ikj,rkj,rji->rik", values, ys, z)
        xs, _, _ = _renormalize(wx.conj(), xs)
        wy = np.einsum("ikj,rik,rji->rkj", values, xs, z)
        ys, new_vals, ok = _renormalize(wy.conj(), ys)
        new_vals = np.where(ok, new_vals, vals)
        gain = new_vals - vals
        settled = gain <= _SWEEP_TOL * np.maximum(1.0, new_vals)
        vals = new_vals
        if settled.all():
            break
    t = np.einsum("ikj,rik,rkj->rij", values, xs, ys)
    z, final_vals = _polar_batch(t)
    best = int(np.argmax(final_vals))
    return (
        xs[best],
        ys[best],
        z[best],
        float(final_vals[best]),
        bool(settled[best]),
    )


def s1_bilinear_norm_lower(
    op_a: NormalOperator,
    op_b: NormalOperator,
    op_c: NormalOperator,
    phi: SymbolGrid,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_SWEEPS,
    seed: int = DEFAULT_SEED,
) -> NormEstimate:
    """Lower bound on the trace-norm-output norm of the order-3 transform.

    Maximizes |tr(transform(X, Y) Z)| over unit Hilbert-Schmidt X, Y and
    operator-norm contractions Z by block-coordinate ascent with ``restarts``
    independently seeded starts.  The reported value is always a valid lower
    bound; pair it with :func:`trilinear_factor_norm` for the upper side.
    """
    _check_grid_ops(phi, (op_a, op_b, op_c))
    if restarts < 1:
        raise ValueError("need at least one restart")
    xr, yr, zr, value, settled = _ascent_trilinear(
        phi.values, restarts, max_iter, seed
    )
    ua, ub, uc = op_a.eigenbasis, op_b.eigenbasis, op_c.eigenbasis
    witness = {
        "X": ua @ xr @ ub.conj().T,
        "Y": ub @ yr @ uc.conj().T,
        "Z": uc @ zr @ ua.conj().T,
    }
    return NormEstimate(
        value=value,
        witness=witness,
        upper_certificate=None,
        restarts_used=restarts,
        converged=settled,
    )


def gamma2(
    s,
    gap_tol: float = GAP_TOL,
    max_iter: int = MAX_ITER,
) -> NormEstimate:
    """Factorization norm of a matrix, with its Gram certificate attached."""
    sol = solve_gamma2_sdp(s, gap_tol=gap_tol, max_iter=max_iter)
    return NormEstimate(
        value=sol.value,
        witness={"gram": sol.gram},
        upper_certificate=sol.value,
        restarts_used=0,
        converged=sol.status == "Optimal",
    )


def recover_factorization(gram, p: int, q: int) -> FactorizationPair:
    """Split a positive semidefinite Gram block into explicit vector families.

    ``gram`` must be (p+q)-square with the factored matrix in its upper-right
    p-by-q corner.  Eigenvalues below zero are clipped (a NotPsd error is
    raised if any falls under -1e-8), and rows of the resulting square root
    give the two families.
    """
    gm = as_matrix(gram, square=True)
    if gm.shape[0] != p + q:
        raise ShapeMismatch(f"gram must be {(p + q)}-square, got {gm.shape}")
    gm = (gm + gm.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(gm)
    if evals.size and float(evals[0]) < -1e-8:
        raise NotPsd(f"gram has eigenvalue {evals[0]:.3e} below -1e-8")
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    return FactorizationPair(a=root[:p], b=root[p:])


def trilinear_factor_norm(
    phi: SymbolGrid,
    gap_tol: float = GAP_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[NormEstimate, FactorizationPair]:
    """Trace-norm-output norm of the order-3 transform, by middle-axis slices.

    The norm equals the largest factorization norm among the grid's middle
    slices.  The returned pair assembles the per-slice factorizations into
    one family on the orthogonal direct sum of the slice spaces, rebalanced
    so that norm_a * norm_b does not exceed the reported value.
    """
    slices = middle_slices(phi)
    n1, n2, n3 = phi.shape

    def solve_slice(mat):
        if not np.any(mat):
            return None
        return solve_gamma2_sdp(mat, gap_tol=gap_tol, max_iter=max_iter)

    sols = _map_ordered(solve_slice, slices)
    slice_values = np.array(
        [0.0 if sol is None else sol.value for sol in sols], dtype=float
    )
    best_k = int(np.argmax(slice_values))
    value = float(slice_values[best_k])
    converged = all(sol is None or sol.status == "Optimal" for sol in sols)

    block = n1 + n3
    dim_total = n2 * block
    fam_a = np.zeros((n1, n2, dim_total), dtype=np.complex128)
    fam_b = np.zeros((n3, n2, dim_total), dtype=np.complex128)
    for k, sol in enumerate(sols):
        if sol is None or value <= 0.0:
            continue
        pair = recover_factorization(sol.gram, n1, n3)
        scale = np.sqrt(value / slice_values[k])
        off = k * block
        fam_a[:, k, off : off + block] = scale * pair.a
        fam_b[:, k, off : off + block] = pair.b / scale

    witness = {} if sols[best_k] is None else {"gram": sols[best_k].gram}
    estimate = NormEstimate(
        value=value,
        witness=witness,
        upper_certificate=value,
        restarts_used=0,
        converged=converged,
    )
    return estimate, FactorizationPair(a=fam_a, b=fam_b)


def _ascent_bilinear(values: np.ndarray, restarts: int, max_iter: int, seed: int):
    """Trace-to-trace ascent over rank-one arguments u v* for order-2 grids."""
    da, db = values.shape
    us = np.stack(
        [_unit_gaussians(np.random.default_rng(seed ^ r), (da,)) for r in range(restarts)]
    )
    vs = np.stack(
        [_unit_gaussians(np.random.default_rng((seed ^ r) + 1), (db,)) for r in range(restarts)]
    )
    vals = np.zeros(restarts)
    settled = np.zeros(restarts, dtype=bool)
    for _ in range(max_iter):
        t = values[None, :, :] * us[:, :, None] * vs.conj()[:, None, :]
        z, _ = _polar_batch(t)
        wu = np.einsum("ij,rj,rji->ri", values, vs.conj(), z)
        us, _, _ = _renormalize(wu.conj(), us)
        # v enters the objective conjugated, so its maximizer is wv itself.
        wv = np.einsum("ij,ri,rji->rj", values, us, z)
        vs, new_vals, ok = _renormalize(wv, vs)
        new_vals = np.where(ok, new_vals, vals)
        gain = new_vals - vals
        settled = gain <= _SWEEP_TOL * np.maximum(1.0, new_vals)
        vals = new_vals
        if settled.all():
            break
    t = values[None, :, :] * us[:, :, None] * vs.conj()[:, None, :]
    z, final_vals = _polar_batch(t)
    best = int(np.argmax(final_vals))
    return us[best], vs[best], z[best], float(final_vals[best]), bool(settled[best])


def doi_s1_norm(
    op_a: NormalOperator,
    op_b: NormalOperator,
    psi: SymbolGrid,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_SWEEPS,
    seed: int = DEFAULT_SEED,
    gap_tol: float = GAP_TOL,
) -> NormEstimate:
    """Trace-to-trace norm of the two-operator transform, sandwiched.

    The lower bound searches over rank-one arguments (the extreme points of
    the trace-norm ball); the upper certificate is the factorization norm of
    the grid, and the two agree up to solver gap plus ascent optimality.
    """
    _check_grid_ops(psi, (op_a, op_b))
    if restarts < 1:
        raise ValueError("need at least one restart")
    ur, vr, zr, value, settled = _ascent_bilinear(
        psi.values, restarts, max_iter, seed
    )
    upper = solve_gamma2_sdp(psi.values, gap_tol=gap_tol).value
    ua, ub = op_a.eigenbasis, op_b.eigenbasis
    u_full = ua @ ur
    v_full = ub @ vr
    witness = {
        "X": np.outer(u_full, v_full.conj()),
        "Z": ub @ zr @ ua.conj().T,
    }
    return NormEstimate(
        value=value,
        witness=witness,
        upper_certificate=float(upper),
        restarts_used=restarts,
        converged=settled,
    )


def norm_estimate_to_json(estimate: NormEstimate) -> dict:
    """Wire format for a norm estimate; witness matrices use the matrix format."""
    from .linalg import matrix_to_json

    witness = {}
    for name, arr in estimate.witness.items():
        mat = np.asarray(arr)
        if mat.ndim == 1:
            mat = mat.reshape(-1, 1)
        witness[name] = matrix_to_json(mat)
    return {
        "value": float(estimate.value),
        "upper_certificate": (
            None
            if estimate.upper_certificate is None
            else float(estimate.upper_certificate)
        ),
        "converged": bool(estimate.converged),
        "restarts_used": int(estimate.restarts_used),
        "witness": witness,
    }
