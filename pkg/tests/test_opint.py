"""Operator integrals checked against independent reference computations.

Two oracle routes are used throughout:

* a spectral-projection reference that assembles the integral as an explicit
  triple/quadruple sum over rank-one eigenprojections (no shared code with
  the production contraction), and
* first-order perturbation theory: the derivative of exp at a Hermitian
  matrix equals the two-variable integral of the divided-difference table of
  exp, which we compare against a central finite difference of scipy's expm.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from opintlab import (
    NormalOperator,
    OrderTooLarge,
    ShapeMismatch,
    SymbolGrid,
    apply_function,
    doi_apply,
    doi_via_toi,
    elementary_tensor,
    embed_two_to_three,
    grid_from_function,
    moi_apply,
    normal_eig,
    pointwise_product,
    schatten_norm,
    separable_apply,
    toi_apply,
)

from conftest import (
    random_complex,
    random_hermitian,
    random_normal_operator,
    random_unitary,
)

RNG = np.random.default_rng(20240817)


def _projection(basis, idx):
    col = basis[:, idx]
    return np.outer(col, col.conj())


def toi_reference(op_a, op_b, op_c, grid, x, y):
    """Triple sum over eigenprojections: sum_ikj phi[i,k,j] P_i X Q_k Y R_j."""
    out = np.zeros((op_a.dim, op_c.dim), dtype=complex)
    vals = np.asarray(grid.values)
    for i in range(op_a.dim):
        pa = _projection(op_a.eigenbasis, i)
        for k in range(op_b.dim):
            left = pa @ x @ _projection(op_b.eigenbasis, k) @ y
            for j in range(op_c.dim):
                out += vals[i, k, j] * (left @ _projection(op_c.eigenbasis, j))
    return out


def moi_reference_order4(ops, grid, args):
    out = np.zeros((ops[0].dim, ops[3].dim), dtype=complex)
    vals = np.asarray(grid.values)
    for i0 in range(ops[0].dim):
        p0 = _projection(ops[0].eigenbasis, i0)
        for i1 in range(ops[1].dim):
            p1 = _projection(ops[1].eigenbasis, i1)
            for i2 in range(ops[2].dim):
                p2 = _projection(ops[2].eigenbasis, i2)
                for i3 in range(ops[3].dim):
                    p3 = _projection(ops[3].eigenbasis, i3)
                    out += vals[i0, i1, i2, i3] * (
                        p0 @ args[0] @ p1 @ args[1] @ p2 @ args[2] @ p3
                    )
    return out


def _random_grid(rng, axes_ops):
    axes = [op.eigenvalues for op in axes_ops]
    shape = tuple(op.dim for op in axes_ops)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return SymbolGrid(axes=tuple(axes), values=values)


# ---------------------------------------------------------------------------
# scalar functional calculus


def test_apply_function_exp_matches_scipy():
    h = random_hermitian(RNG, 5)
    op = normal_eig(h)
    got = apply_function(op, np.exp(op.eigenvalues))
    np.testing.assert_allclose(got, expm(h), rtol=1e-10, atol=1e-10)


def test_apply_function_square_matches_matmul():
    op = random_normal_operator(RNG, 4)
    m = (op.eigenbasis * op.eigenvalues) @ op.eigenbasis.conj().T
    got = apply_function(op, op.eigenvalues**2)
    np.testing.assert_allclose(got, m @ m, rtol=1e-10, atol=1e-12)


# ---------------------------------------------------------------------------
# two-variable integrals


def test_doi_is_first_derivative_of_exp():
    # d/ds exp(A + sX) at s=0 equals the two-variable integral of the
    # divided-difference table of exp over the spectrum of A.
    h = random_hermitian(RNG, 4)
    x = random_hermitian(RNG, 4)
    op = normal_eig(h)

    def dd_exp(a, b):
        if abs(a - b) < 1e-9:
            return np.exp((a + b) / 2.0)
        return (np.exp(a) - np.exp(b)) / (a - b)

    grid = grid_from_function(dd_exp, [op.eigenvalues, op.eigenvalues])
    got = doi_apply(op, op, grid, x)

    step = 1e-5
    fd = (expm(h + step * x) - expm(h - step * x)) / (2.0 * step)
    np.testing.assert_allclose(got, fd, rtol=0, atol=1e-7 * schatten_norm(fd, "op"))


def test_doi_matches_projection_sum():
    op_a = random_normal_operator(RNG, 3)
    op_b = random_normal_operator(RNG, 4)
    psi = _random_grid(RNG, [op_a, op_b])
    x = random_complex(RNG, (3, 4))
    got = doi_apply(op_a, op_b, psi, x)
    want = np.zeros((3, 4), dtype=complex)
    for i in range(3):
        for j in range(4):
            want += psi.values[i, j] * (
                _projection(op_a.eigenbasis, i) @ x @ _projection(op_b.eigenbasis, j)
            )
    np.testing.assert_allclose(got, want, atol=1e-12 * max(1.0, np.abs(want).max()))


def test_doi_constant_symbol_is_identity_map():
    op = random_normal_operator(RNG, 5)
    ones = SymbolGrid(
        axes=(op.eigenvalues, op.eigenvalues),
        values=np.ones((5, 5), dtype=complex),
    )
    x = random_complex(RNG, (5, 5))
    np.testing.assert_allclose(doi_apply(op, op, ones, x), x, atol=1e-12)


def test_doi_rejects_wrong_axis():
    op = random_normal_operator(RNG, 3)
    bad = SymbolGrid(
        axes=(op.eigenvalues + 0.5, op.eigenvalues),
        values=np.ones((3, 3), dtype=complex),
    )
    with pytest.raises(ShapeMismatch):
        doi_apply(op, op, bad, np.eye(3, dtype=complex))


# ---------------------------------------------------------------------------
# three-variable integrals


@pytest.mark.parametrize("dims", [(2, 2, 2), (3, 4, 2), (4, 3, 5)])
def test_toi_matches_projection_sum(dims):
    da, db, dc = dims
    op_a = random_normal_operator(RNG, da)
    op_b = random_normal_operator(RNG, db)
    op_c = random_normal_operator(RNG, dc)
    phi = _random_grid(RNG, [op_a, op_b, op_c])
    x = random_complex(RNG, (da, db))
    y = random_complex(RNG, (db, dc))
    got = toi_apply(op_a, op_b, op_c, phi, x, y)
    want = toi_reference(op_a, op_b, op_c, phi, x, y)
    np.testing.assert_allclose(got, want, atol=1e-11 * max(1.0, np.abs(want).max()))


def test_toi_adjoint_identity():
    # Taking adjoints reverses the argument order and conjugate-reverses the
    # symbol: Gamma_{A,B,C}(phi)(X, Y)^* = Gamma_{C,B,A}(phi~)(Y^*, X^*).
    op_a = random_normal_operator(RNG, 3)
    op_b = random_normal_operator(RNG, 2)
    op_c = random_normal_operator(RNG, 4)
    phi = _random_grid(RNG, [op_a, op_b, op_c])
    x = random_complex(RNG, (3, 2))
    y = random_complex(RNG, (2, 4))

    direct = toi_apply(op_a, op_b, op_c, phi, x, y).conj().T
    flipped = SymbolGrid(
        axes=(op_c.eigenvalues, op_b.eigenvalues, op_a.eigenvalues),
        values=np.conj(np.transpose(np.asarray(phi.values), (2, 1, 0))),
    )
    other = toi_apply(op_c, op_b, op_a, flipped, y.conj().T, x.conj().T)
    np.testing.assert_allclose(other, direct, atol=1e-12 * max(1.0, np.abs(direct).max()))


def test_toi_product_formula():
    # When the symbol factors through the middle variable as a product of
    # two-variable symbols, the integral splits into a product of
    # two-variable integrals.
    op_a = random_normal_operator(RNG, 3)
    op_b = random_normal_operator(RNG, 4)
    op_c = random_normal_operator(RNG, 3)
    psi1 = _random_grid(RNG, [op_a, op_b])
    psi2 = _random_grid(RNG, [op_b, op_c])
    phi = pointwise_product(
        embed_two_to_three(psi1, "left", op_c.eigenvalues),
        embed_two_to_three(psi2, "right", op_a.eigenvalues),
    )
    x = random_complex(RNG, (3, 4))
    y = random_complex(RNG, (4, 3))
    got = toi_apply(op_a, op_b, op_c, phi, x, y)
    want = doi_apply(op_a, op_b, psi1, x) @ doi_apply(op_b, op_c, psi2, y)
    np.testing.assert_allclose(got, want, atol=1e-12 * max(1.0, np.abs(want).max()))


def test_toi_contraction_bound():
    for _ in range(25):
        op_a = random_normal_operator(RNG, 3)
        op_b = random_normal_operator(RNG, 3)
        op_c = random_normal_operator(RNG, 3)
        phi = _random_grid(RNG, [op_a, op_b, op_c])
        x = random_complex(RNG, (3, 3))
        y = random_complex(RNG, (3, 3))
        out = toi_apply(op_a, op_b, op_c, phi, x, y)
        bound = (
            np.abs(phi.values).max() * schatten_norm(x, 2) * schatten_norm(y, 2)
        )
        assert schatten_norm(out, 2) <= bound + 1e-10 * max(1.0, bound)


def test_toi_basis_covariance():
    # Conjugating every operator by fixed unitaries commutes with the
    # integral: arguments rotate on the way in, the result on the way out.
    dims = (3, 2, 4)
    ops = [random_normal_operator(RNG, d) for d in dims]
    phi = _random_grid(RNG, ops)
    x = random_complex(RNG, (3, 2))
    y = random_complex(RNG, (2, 4))
    ws = [random_unitary(RNG, d) for d in dims]
    rotated_ops = [
        NormalOperator.from_eigensystem(op.eigenvalues, w @ op.eigenbasis)
        for op, w in zip(ops, ws)
    ]
    base = toi_apply(*ops, phi, x, y)
    rotated = toi_apply(
        *rotated_ops,
        phi,
        ws[0] @ x @ ws[1].conj().T,
        ws[1] @ y @ ws[2].conj().T,
    )
    want = ws[0] @ base @ ws[2].conj().T
    np.testing.assert_allclose(rotated, want, atol=1e-11 * max(1.0, np.abs(want).max()))


def test_toi_rejects_wrong_argument_shape():
    op = random_normal_operator(RNG, 3)
    phi = _random_grid(RNG, [op, op, op])
    with pytest.raises(ShapeMismatch):
        toi_apply(op, op, op, phi, np.eye(2, dtype=complex), np.eye(3, dtype=complex))


# ---------------------------------------------------------------------------
# higher orders


def test_moi_order_two_matches_doi():
    op_a = random_normal_operator(RNG, 3)
    op_b = random_normal_operator(RNG, 4)
    psi = _random_grid(RNG, [op_a, op_b])
    x = random_complex(RNG, (3, 4))
    np.testing.assert_allclose(
        moi_apply([op_a, op_b], psi, [x]),
        doi_apply(op_a, op_b, psi, x),
        atol=1e-13,
    )


def test_moi_order_three_matches_toi():
    ops = [random_normal_operator(RNG, d) for d in (2, 3, 2)]
    phi = _random_grid(RNG, ops)
    x = random_complex(RNG, (2, 3))
    y = random_complex(RNG, (3, 2))
    np.testing.assert_allclose(
        moi_apply(ops, phi, [x, y]),
        toi_apply(*ops, phi, x, y),
        atol=1e-13,
    )


def test_moi_order_four_matches_projection_sum():
    ops = [random_normal_operator(RNG, d) for d in (2, 3, 2, 3)]
    grid = _random_grid(RNG, ops)
    args = [
        random_complex(RNG, (2, 3)),
        random_complex(RNG, (3, 2)),
        random_complex(RNG, (2, 3)),
    ]
    got = moi_apply(ops, grid, args)
    want = moi_reference_order4(ops, grid, args)
    np.testing.assert_allclose(got, want, atol=1e-11 * max(1.0, np.abs(want).max()))


def test_moi_rejects_order_beyond_cap():
    ops = [NormalOperator.from_eigensystem([0.0, 1.0]) for _ in range(7)]
    axes = tuple(op.eigenvalues for op in ops)
    grid = SymbolGrid(axes=axes, values=np.zeros((2,) * 7, dtype=complex))
    args = [np.eye(2, dtype=complex)] * 6
    with pytest.raises(OrderTooLarge):
        moi_apply(ops, grid, args)


def test_moi_rejects_wrong_argument_count():
    ops = [random_normal_operator(RNG, 2) for _ in range(3)]
    grid = _random_grid(RNG, ops)
    with pytest.raises(ShapeMismatch):
        moi_apply(ops, grid, [np.eye(2, dtype=complex)])


def test_separable_apply_matches_moi_on_tensor_sums():
    ops = [random_normal_operator(RNG, d) for d in (2, 3, 2)]
    axes = [op.eigenvalues for op in ops]
    terms = []
    acc = None
    for _ in range(3):
        vecs = [random_complex(RNG, op.dim) for op in ops]
        terms.append(vecs)
        tensor = elementary_tensor(vecs, axes)
        acc = tensor.values if acc is None else acc + tensor.values
    grid = SymbolGrid(axes=tuple(axes), values=acc)
    args = [random_complex(RNG, (2, 3)), random_complex(RNG, (3, 2))]
    got = separable_apply(ops, terms, args)
    want = moi_apply(ops, grid, args)
    np.testing.assert_allclose(got, want, atol=1e-11 * max(1.0, np.abs(want).max()))


def test_doi_via_toi_reduction():
    op_a = random_normal_operator(RNG, 3)
    op_b = random_normal_operator(RNG, 4)
    op_mid = random_normal_operator(RNG, 3)
    psi = _random_grid(RNG, [op_a, op_b])
    x = random_complex(RNG, (3, 3))
    y = random_complex(RNG, (3, 4))
    got = doi_via_toi(op_a, op_b, psi, x, y, op_mid)
    want = doi_apply(op_a, op_b, psi, x @ y)
    np.testing.assert_allclose(got, want, atol=1e-12 * max(1.0, np.abs(want).max()))
