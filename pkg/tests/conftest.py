"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from opintlab import NormalOperator, normal_eig


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish unitary via QR of a complex Gaussian, phases normalized."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_normal_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """A normal matrix with generic (complex, well separated) spectrum."""
    u = random_unitary(rng, n)
    lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return (u * lam) @ u.conj().T


def random_normal_operator(rng: np.random.Generator, n: int) -> NormalOperator:
    return normal_eig(random_normal_matrix(rng, n))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
