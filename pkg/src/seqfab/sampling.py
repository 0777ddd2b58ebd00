"""Random unitaries, Hermitian matrices and density matrices."""

from __future__ import annotations

import numpy as np


def _ginibre(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary from the QR of a Ginibre matrix.

    The phases of ``diag(R)`` are moved into ``Q`` so the distribution is
    exactly uniform rather than biased by the QR sign convention.
    """
    q, r = np.linalg.qr(_ginibre(n, n, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(n, n, rng)
    return 0.5 * (g + g.conj().T)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Normalized Wishart density matrix ``A A^dagger / Tr[A A^dagger]``."""
    a = _ginibre(n, rank or n, rng)
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = _ginibre(n, 1, rng)[:, 0]
    return psi / np.linalg.norm(psi)


def noisy_pure_state(n: int, rng: np.random.Generator, weight: float = 0.5) -> np.ndarray:
    """Random pure state mixed with white noise: ``(1-w)|psi><psi| + w I/n``.

    Positive for any ``0 <= w <= 1``, and correlated across any bipartition
    with probability one when ``w < 1``.
    """
    psi = random_pure_state(n, rng)
    return (1.0 - weight) * np.outer(psi, psi.conj()) + weight * np.eye(n) / n
