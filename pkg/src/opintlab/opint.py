"""Finite-dimensional multiple operator integrals.

Every transform here follows the same recipe: rotate the matrix arguments
into the eigenbases of the surrounding normal operators, contract them
against the symbol's value grid, and rotate the result back.  For a single
operator pair this is an entrywise (Schur) multiplication in the rotated
bases; for n operators it is a chain contraction

    out[i1, in] = sum over i2..i_{n-1} of
        grid[i1, ..., in] * X1~[i1, i2] * ... * X_{n-1}~[i_{n-1}, in].
"""

from __future__ import annotations

import numpy as np

from .errors import OrderTooLarge, ShapeMismatch
from .linalg import NormalOperator, as_matrix
from .symbols import SymbolGrid, embed_two_to_three

MAX_ORDER = 6

_AXIS_LETTERS = "abcdefg"


def _check_axis(grid: SymbolGrid, slot: int, op: NormalOperator) -> None:
    axis = grid.axes[slot]
    if axis.size != op.dim:
        raise ShapeMismatch(
            f"grid axis {slot} has length {axis.size}, operator has dimension {op.dim}"
        )
    tol = 1e-12 * (1.0 + np.max(np.abs(op.eigenvalues)))
    if not np.allclose(axis, op.eigenvalues, rtol=0.0, atol=tol):
        raise ShapeMismatch(
            f"grid axis {slot} does not match the operator's eigenvalue list"
        )


def _check_arg(x: np.ndarray, rows: int, cols: int, name: str) -> None:
    if x.shape != (rows, cols):
        raise ShapeMismatch(f"{name} must have shape ({rows}, {cols}), got {x.shape}")


def apply_function(op: NormalOperator, values) -> np.ndarray:
    """Assemble f(A) = U diag(values) U* from values on the eigenvalue list."""
    vals = np.asarray(values, dtype=np.complex128).reshape(-1)
    if vals.size != op.dim:
        raise ShapeMismatch(
            f"need one value per eigenvalue ({op.dim}), got {vals.size}"
        )
    u = op.eigenbasis
    return u @ (vals[:, None] * u.conj().T)


def doi_apply(op_a: NormalOperator, op_b: NormalOperator, psi: SymbolGrid, x) -> np.ndarray:
    """Double operator integral: Schur multiplication in the rotated bases."""
    if psi.order != 2:
        raise ShapeMismatch(f"need an order-2 grid, got order {psi.order}")
    _check_axis(psi, 0, op_a)
    _check_axis(psi, 1, op_b)
    xm = as_matrix(x)
    _check_arg(xm, op_a.dim, op_b.dim, "argument")
    ua, ub = op_a.eigenbasis, op_b.eigenbasis
    xr = ua.conj().T @ xm @ ub
    return ua @ (psi.values * xr) @ ub.conj().T


def toi_apply(
    op_a: NormalOperator,
    op_b: NormalOperator,
    op_c: NormalOperator,
    phi: SymbolGrid,
    x,
    y,
) -> np.ndarray:
    """Triple operator integral of an order-3 symbol against two arguments."""
    if phi.order != 3:
        raise ShapeMismatch(f"need an order-3 grid, got order {phi.order}")
    _check_axis(phi, 0, op_a)
    _check_axis(phi, 1, op_b)
    _check_axis(phi, 2, op_c)
    xm = as_matrix(x)
    ym = as_matrix(y)
    _check_arg(xm, op_a.dim, op_b.dim, "first argument")
    _check_arg(ym, op_b.dim, op_c.dim, "second argument")
    ua, ub, uc = op_a.eigenbasis, op_b.eigenbasis, op_c.eigenbasis
    xr = ua.conj().T @ xm @ ub
    yr = ub.conj().T @ ym @ uc
    core = np.einsum("ikj,ik,kj->ij", phi.values, xr, yr)
    return ua @ core @ uc.conj().T


def moi_apply(ops, grid: SymbolGrid, args) -> np.ndarray:
    """n-fold operator integral for 2 <= n <= MAX_ORDER.

    ``ops`` is a sequence of n normal operators, ``args`` a sequence of n-1
    matrices where args[m] maps between the spaces of ops[m+1] and ops[m].
    The contraction is performed index by index and never materializes
    anything larger than the grid itself.
    """
    ops = list(ops)
    args = [as_matrix(a) for a in args]
    n = len(ops)
    if n != grid.order or len(args) != n - 1:
        raise ShapeMismatch(
            f"got {n} operators, {len(args)} arguments, grid order {grid.order}"
        )
    if n < 2 or n > MAX_ORDER:
        raise OrderTooLarge(f"order {n} outside the supported range [2, {MAX_ORDER}]")
    for slot, op in enumerate(ops):
        _check_axis(grid, slot, op)
    for m, arg in enumerate(args):
        _check_arg(arg, ops[m].dim, ops[m + 1].dim, f"argument {m}")
    rotated = [
        ops[m].eigenbasis.conj().T @ args[m] @ ops[m + 1].eigenbasis
        for m in range(n - 1)
    ]
    letters = _AXIS_LETTERS[:n]
    spec = ",".join([letters] + [letters[m : m + 2] for m in range(n - 1)])
    spec += "->" + letters[0] + letters[-1]
    core = np.einsum(spec, grid.values, *rotated, optimize=True)
    return ops[0].eigenbasis @ core @ ops[-1].eigenbasis.conj().T


def separable_apply(ops, terms, args) -> np.ndarray:
    """Sum of products f1(A1) X1 f2(A2) X2 ... fn(An) over separable terms.

    Each term is a sequence of n value vectors, one per operator, sampled on
    that operator's eigenvalue list.  This is the direct evaluation path for
    symbols of the form sum_t f1_t (x) ... (x) fn_t; it must agree with
    :func:`moi_apply` on the summed elementary-tensor grid.
    """
    ops = list(ops)
    args = [as_matrix(a) for a in args]
    n = len(ops)
    if len(args) != n - 1:
        raise ShapeMismatch(f"got {n} operators but {len(args)} arguments")
    if n < 2 or n > MAX_ORDER:
        raise OrderTooLarge(f"order {n} outside the supported range [2, {MAX_ORDER}]")
    for m, arg in enumerate(args):
        _check_arg(arg, ops[m].dim, ops[m + 1].dim, f"argument {m}")
    out = np.zeros((ops[0].dim, ops[-1].dim), dtype=np.complex128)
    for term in terms:
        factors = list(term)
        if len(factors) != n:
            raise ShapeMismatch("each term needs one value vector per operator")
        acc = apply_function(ops[0], factors[0])
        for m in range(n - 1):
            acc = acc @ args[m] @ apply_function(ops[m + 1], factors[m + 1])
        out += acc
    return out


def doi_via_toi(
    op_a: NormalOperator,
    op_b: NormalOperator,
    psi: SymbolGrid,
    x,
    y,
    op_mid: NormalOperator,
) -> np.ndarray:
    """Evaluate a double operator integral through a three-operator detour.

    The two-variable symbol is lifted with the "outer" embedding (the middle
    slot is ignored), the middle operator is ``op_mid``, and the arguments are
    contracted as a pair.  The result must equal
    ``doi_apply(op_a, op_b, psi, x @ y)``.
    """
    if psi.order != 2:
        raise ShapeMismatch(f"need an order-2 grid, got order {psi.order}")
    lifted = embed_two_to_three(psi, "outer", op_mid.eigenvalues)
    return toi_apply(op_a, op_mid, op_b, lifted, x, y)
