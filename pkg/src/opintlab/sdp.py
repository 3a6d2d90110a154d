"""Dense interior-point solver for the factorization-norm semidefinite program.

For a p-by-q matrix S the program is

    minimize   t
    subject to G(P, Q) = [[P, S], [S*, Q]]  positive semidefinite,
               P_ii <= t  for all i,     Q_jj <= t  for all j,

over Hermitian P, Q.  Its optimal value is the factorization norm of S: the
smallest max_i ||a_i|| * max_j ||b_j|| over vector families with
<a_i, b_j> = S_ij.

The solver is a log-barrier path-following method with exact Newton steps on
(P, Q, t).  Certification does not rely on the barrier weight reaching zero:
every centered iterate yields a feasible primal point (ridge-corrected, then
verified positive semidefinite by explicit eigenvalue bounds) and a feasible
dual certificate (diagonal blocks forced diagonal, ridge-corrected, verified,
trace-normalized), and consecutive centers are Richardson-extrapolated toward
the weight-zero limit to produce sharper candidates that pass through the
same verification.  Weak duality then makes the reported duality gap a true
bound on the distance to the optimum, no matter how the iterates were found.

Complex data is handled through the real symmetric embedding
X -> [[Re X, -Im X], [Im X, Re X]], which doubles multiplicities but leaves
the optimal value unchanged; the complex Gram block is read back off the
symmetrized real solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalBreakdown
from .linalg import as_matrix

GAP_TOL = 1e-7
FEAS_TOL = 1e-8
MAX_ITER = 300
MAX_SIDE = 256

_MU_SHRINK = 0.2
_MU_FLOOR = 1e-12
_FRAC_TO_BOUNDARY = 0.98
_ARMIJO = 1e-4
_INNER_CAP = 60
_EIG_GUARD = 1e-12


@dataclass
class SdpSolution:
    """Outcome of one solve.

    value: certified upper bound on the optimum (objective of the best
        verified-feasible primal point found).
    gram: the (p+q)-square Hermitian block matrix [[P, S], [S*, Q]] realizing
        ``value``; positive semidefinite with row norms bounded by ``value``.
    duality_gap: ``value`` minus the best verified dual lower bound.
    iterations: total Newton steps taken.
    status: "Optimal", "MaxIter" or "Infeasible".
    """

    value: float
    gram: np.ndarray
    duality_gap: float
    iterations: int
    status: str


def _sym_basis(n: int):
    """Upper-triangle index pairs and scaling for an orthonormal basis of Sym(n).

    Basis element k is coef[k] * (E[a_k, b_k] + E[b_k, a_k]) with coef 1/2 on
    the diagonal and 1/sqrt(2) off it.
    """
    ia, ib = np.triu_indices(n)
    coef = np.where(ia == ib, 0.5, 1.0 / np.sqrt(2.0))
    return ia, ib, coef


def _mat_from_vec(x: np.ndarray, ia, ib, coef, n: int) -> np.ndarray:
    tmp = np.zeros((n, n))
    tmp[ia, ib] = coef * x
    return tmp + tmp.T


def _chol_or_none(g: np.ndarray):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return None


def _barrier_value(sh, p, q, t, mu):
    """t + mu * (-logdet G - sum log slacks), or +inf outside the domain."""
    g = np.block([[p, sh], [sh.T, q]])
    chol = _chol_or_none(g)
    if chol is None:
        return np.inf, None
    slacks = np.concatenate([t - np.diag(p), t - np.diag(q)])
    if np.any(slacks <= 0.0):
        return np.inf, None
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return t + mu * (-logdet - np.sum(np.log(slacks))), chol


def _verified_dual_bound(sh: np.ndarray, z: np.ndarray) -> float:
    """True lower bound on the optimum from an approximate dual matrix.

    The dual cone consists of positive semidefinite matrices whose diagonal
    blocks are diagonal, normalized to unit trace; the bound is minus twice
    the pairing of the off-diagonal block with the data.  The candidate is
    projected onto that structure: off-diagonal entries of the diagonal
    blocks are dropped, a ridge covering both the projection and eigenvalue
    roundoff restores positive semidefiniteness, and the trace is rescaled.
    Weak duality makes the result a valid bound for any input whatsoever.
    """
    ph, qh = sh.shape
    m = ph + qh
    zd = z.copy()
    zd[:ph, :ph] = np.diag(np.diag(z[:ph, :ph]))
    zd[ph:, ph:] = np.diag(np.diag(z[ph:, ph:]))
    zd = (zd + zd.T) / 2.0
    if not np.all(np.isfinite(zd)):
        return -np.inf
    evals = np.linalg.eigvalsh(zd)
    scale = max(abs(float(evals[0])), abs(float(evals[-1])), 1e-300)
    delta = max(0.0, -float(evals[0])) + _EIG_GUARD * scale
    tau = float(np.trace(zd)) + delta * m
    if not np.isfinite(tau) or tau <= 1e-300:
        return -np.inf
    value = -2.0 * float(np.sum(zd[:ph, ph:] * sh)) / tau
    return value if np.isfinite(value) else -np.inf


def _verified_primal(sh: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Feasible primal blocks from approximate ones, with a certified value.

    A ridge large enough to cover the measured negative spectrum plus
    eigenvalue roundoff is added to both diagonal blocks, and the objective
    is the largest resulting diagonal entry, so the returned triple is a
    genuine feasible point and its value a true upper bound.
    """
    ph, qh = sh.shape
    g = np.block([[p, sh], [sh.T, q]])
    g = (g + g.T) / 2.0
    if not np.all(np.isfinite(g)):
        return None
    evals = np.linalg.eigvalsh(g)
    scale = max(abs(float(evals[0])), abs(float(evals[-1])), 1e-300)
    delta = max(0.0, -float(evals[0])) + _EIG_GUARD * scale
    pp = g[:ph, :ph] + delta * np.eye(ph)
    qq = g[ph:, ph:] + delta * np.eye(qh)
    t = float(max(np.max(np.diag(pp)), np.max(np.diag(qq))))
    return pp, qq, t


def _extrapolate(cur: np.ndarray, prev: np.ndarray, ratio: float) -> np.ndarray:
    """Cancel the leading term of a path expansion linear in ``ratio``."""
    return (cur - ratio * prev) / (1.0 - ratio)


def _solve_real(sh: np.ndarray, gap_tol: float, max_iter: int):
    """Path-following on the real symmetric program.

    Returns the best verified primal blocks, their value, the certified gap,
    the Newton step count and a status string.
    """
    ph, qh = sh.shape
    iap, ibp, cp = _sym_basis(ph)
    iaq, ibq, cq = _sym_basis(qh)
    kp, kq = iap.size, iaq.size
    diag_p = np.flatnonzero(iap == ibp)
    diag_q = np.flatnonzero(iaq == ibq)

    snorm = float(np.linalg.svd(sh, compute_uv=False)[0]) if min(ph, qh) else 0.0
    c0 = snorm + 1.0
    p = c0 * np.eye(ph)
    q = c0 * np.eye(qh)
    t = 2.0 * c0

    mu = max(1.0, snorm)
    newton_used = 0
    status = "MaxIter"
    best_upper = np.inf
    best_blocks = None
    best_lower = -np.inf
    centers = []  # (mu, p, q, z) at the last few centered weights

    while True:
        # Center at the current barrier weight.  The decrement threshold
        # tightens with the weight because the extrapolated certificates
        # below need centers resolved well below the path curvature; the
        # line-search failure break still guards the double-precision floor.
        threshold = 1e-13 * max(1.0, abs(t)) * min(1.0, mu)
        for _ in range(_INNER_CAP):
            if newton_used >= max_iter:
                break
            g = np.block([[p, sh], [sh.T, q]])
            chol = _chol_or_none(g)
            if chol is None:  # pragma: no cover - iterates stay interior
                raise NumericalBreakdown("iterate left the positive cone")
            linv = np.linalg.inv(chol)
            minv = linv.T @ linv
            m11 = minv[:ph, :ph]
            m12 = minv[:ph, ph:]
            m22 = minv[ph:, ph:]
            dvec = 1.0 / (t - np.diag(p))
            evec = 1.0 / (t - np.diag(q))

            grad_p = -2.0 * cp * m11[iap, ibp]
            grad_p[diag_p] += dvec
            grad_q = -2.0 * cq * m22[iaq, ibq]
            grad_q[diag_q] += evec
            grad_t = -(dvec.sum() + evec.sum())
            grad = mu * np.concatenate([grad_p, grad_q, [grad_t]])
            grad[-1] += 1.0

            hpp = 2.0 * np.outer(cp, cp) * (
                m11[np.ix_(iap, iap)] * m11[np.ix_(ibp, ibp)]
                + m11[np.ix_(iap, ibp)] * m11[np.ix_(ibp, iap)]
            )
            hpp[diag_p, diag_p] += dvec**2
            hqq = 2.0 * np.outer(cq, cq) * (
                m22[np.ix_(iaq, iaq)] * m22[np.ix_(ibq, ibq)]
                + m22[np.ix_(iaq, ibq)] * m22[np.ix_(ibq, iaq)]
            )
            hqq[diag_q, diag_q] += evec**2
            hpq = 2.0 * np.outer(cp, cq) * (
                m12[np.ix_(iap, ibq)] * m12[np.ix_(ibp, iaq)]
                + m12[np.ix_(iap, iaq)] * m12[np.ix_(ibp, ibq)]
            )
            hess = np.zeros((kp + kq + 1, kp + kq + 1))
            hess[:kp, :kp] = hpp
            hess[kp : kp + kq, kp : kp + kq] = hqq
            hess[:kp, kp : kp + kq] = hpq
            hess[kp : kp + kq, :kp] = hpq.T
            hess[diag_p, -1] = -(dvec**2)
            hess[-1, diag_p] = -(dvec**2)
            hess[kp + diag_q, -1] = -(evec**2)
            hess[-1, kp + diag_q] = -(evec**2)
            hess[-1, -1] = (dvec**2).sum() + (evec**2).sum()
            hess *= mu
            hess = (hess + hess.T) / 2.0

            step = None
            ridge = 0.0
            for _ in range(8):
                try:
                    step = np.linalg.solve(
                        hess + ridge * np.eye(hess.shape[0]), -grad
                    )
                    break
                except np.linalg.LinAlgError:
                    ridge = max(ridge * 100.0, 1e-12 * max(1.0, np.trace(hess)))
            if step is None:
                raise NumericalBreakdown("Newton system is singular")

            decrement = float(-grad @ step)
            if decrement <= threshold:
                break

            dp = _mat_from_vec(step[:kp], iap, ibp, cp, ph)
            dq = _mat_from_vec(step[kp : kp + kq], iaq, ibq, cq, qh)
            dt = float(step[-1])

            # Largest feasible step: stay in the positive cone ...
            dg = np.zeros_like(g)
            dg[:ph, :ph] = dp
            dg[ph:, ph:] = dq
            half = np.linalg.solve(chol, dg)
            whitened = np.linalg.solve(chol, half.T).T
            lam_min = float(np.linalg.eigvalsh((whitened + whitened.T) / 2.0)[0])
            smax = np.inf if lam_min >= -1e-300 else 1.0 / (-lam_min)
            # ... and keep the diagonal slacks positive.
            slacks = np.concatenate([t - np.diag(p), t - np.diag(q)])
            dslacks = dt - np.concatenate([np.diag(dp), np.diag(dq)])
            shrink = dslacks < 0.0
            if np.any(shrink):
                smax = min(smax, float(np.min(slacks[shrink] / -dslacks[shrink])))
            size = min(1.0, _FRAC_TO_BOUNDARY * smax)

            fval, _ = _barrier_value(sh, p, q, t, mu)
            accepted = False
            for _ in range(60):
                cand_p = p + size * dp
                cand_q = q + size * dq
                cand_t = t + size * dt
                cand_f, _ = _barrier_value(sh, cand_p, cand_q, cand_t, mu)
                if cand_f <= fval + _ARMIJO * size * float(grad @ step):
                    accepted = True
                    break
                size *= 0.5
            if not accepted:
                break  # no further progress at this weight
            p, q, t = cand_p, cand_q, cand_t
            newton_used += 1

        # Harvest certificates from this center and from extrapolations of
        # the recent centers toward weight zero (centers are first-order in
        # the weight, so linear extrapolation is second-order and the
        # three-point variant third-order; every candidate is re-verified,
        # so a poor extrapolation only wastes the attempt).
        g = np.block([[p, sh], [sh.T, q]])
        chol = _chol_or_none(g)
        if chol is not None:
            linv = np.linalg.inv(chol)
            z = mu * (linv.T @ linv)
        else:  # pragma: no cover - iterates stay interior
            z = mu * np.linalg.pinv((g + g.T) / 2.0)
        centers.append((mu, p.copy(), q.copy(), z))
        if len(centers) > 3:
            centers.pop(0)
        primal_candidates = [(p, q)]
        dual_candidates = [z]
        if len(centers) >= 2:
            mu_prev, p_prev, q_prev, z_prev = centers[-2]
            for ratio in (mu / mu_prev, np.sqrt(mu / mu_prev)):
                primal_candidates.append(
                    (
                        _extrapolate(p, p_prev, ratio),
                        _extrapolate(q, q_prev, ratio),
                    )
                )
                dual_candidates.append(_extrapolate(z, z_prev, ratio))
        if len(centers) >= 3:
            x1, x2, x3 = (c[0] for c in (centers[-1], centers[-2], centers[-3]))
            w1 = x2 * x3 / ((x2 - x1) * (x3 - x1))
            w2 = x1 * x3 / ((x1 - x2) * (x3 - x2))
            w3 = x1 * x2 / ((x1 - x3) * (x2 - x3))
            weights = (w1, w2, w3)
            recent = (centers[-1], centers[-2], centers[-3])
            primal_candidates.append(
                (
                    sum(wk * c[1] for wk, c in zip(weights, recent)),
                    sum(wk * c[2] for wk, c in zip(weights, recent)),
                )
            )
            dual_candidates.append(sum(wk * c[3] for wk, c in zip(weights, recent)))
        for cand_p, cand_q in primal_candidates:
            verified = _verified_primal(sh, cand_p, cand_q)
            if verified is not None and verified[2] < best_upper:
                best_blocks = verified[:2]
                best_upper = verified[2]
        for cand_z in dual_candidates:
            best_lower = max(best_lower, _verified_dual_bound(sh, cand_z))

        gap = max(0.0, best_upper - best_lower)
        if gap <= gap_tol:
            status = "Optimal"
            break
        if newton_used >= max_iter or mu < _MU_FLOOR:
            status = "MaxIter"
            break
        mu *= _MU_SHRINK

    if best_blocks is None:  # pragma: no cover - initial point always verifies
        raise NumericalBreakdown("no feasible iterate was certified")
    return best_blocks[0], best_blocks[1], best_upper, gap, newton_used, status


def _real_embed(s: np.ndarray) -> np.ndarray:
    return np.block([[s.real, -s.imag], [s.imag, s.real]])


def _extract_embedded(block: np.ndarray, n: int) -> np.ndarray:
    """Read a Hermitian n-square matrix off its symmetrized 2n-square embedding."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    sym = (block + j @ block @ j.T) / 2.0
    return sym[:n, :n] + 1j * sym[n:, :n]


def solve_gamma2_sdp(s, gap_tol: float = GAP_TOL, max_iter: int = MAX_ITER) -> SdpSolution:
    """Compute the factorization norm of a dense matrix with certificates.

    Returns an :class:`SdpSolution` whose ``gram`` block is positive
    semidefinite with the data matrix in its off-diagonal corner and whose
    ``duality_gap`` bounds the distance between ``value`` and the true norm.
    A ``MaxIter`` status returns the best iterate together with its gap.
    """
    sm = as_matrix(s)
    p_dim, q_dim = sm.shape
    if p_dim + q_dim > MAX_SIDE:
        raise ValueError(
            f"matrix of shape {sm.shape} exceeds the dense budget p+q <= {MAX_SIDE}"
        )
    if gap_tol <= 0.0:
        raise ValueError("gap_tol must be positive")
    complex_data = bool(np.any(sm.imag != 0.0))
    sh = _real_embed(sm) if complex_data else sm.real.copy()

    p, q, value, gap, iters, status = _solve_real(sh, gap_tol, max_iter)

    if complex_data:
        pc = _extract_embedded(p, p_dim)
        qc = _extract_embedded(q, q_dim)
    else:
        pc = p.astype(np.complex128)
        qc = q.astype(np.complex128)
    gram = np.zeros((p_dim + q_dim, p_dim + q_dim), dtype=np.complex128)
    gram[:p_dim, :p_dim] = pc
    gram[:p_dim, p_dim:] = sm
    gram[p_dim:, :p_dim] = sm.conj().T
    gram[p_dim:, p_dim:] = qc

    return SdpSolution(
        value=float(value),
        gram=gram,
        duality_gap=float(gap),
        iterations=int(iters),
        status=status,
    )
