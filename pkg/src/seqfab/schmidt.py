"""Operator-Schmidt decomposition and the nonlocality measures built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, kron, reshuffle, svd

RANK_TOL = 1e-10


@dataclass(frozen=True)
class OperatorSchmidtDecomposition:
    """``u = sum_i coefficients[i] * kron(left_ops[i], right_ops[i])``.

    Both operator families are Hilbert-Schmidt orthonormal; the weights live
    in ``coefficients`` (descending). Only the first ``schmidt_number`` terms
    are kept.
    """

    coefficients: np.ndarray
    left_ops: tuple[np.ndarray, ...]
    right_ops: tuple[np.ndarray, ...]
    schmidt_number: int
    threshold: float
    dims: tuple[int, int]

    def reconstruct(self) -> np.ndarray:
        da, db = self.dims
        out = np.zeros((da * db, da * db), dtype=np.complex128)
        for s, a, b in zip(self.coefficients, self.left_ops, self.right_ops):
            out += s * kron(a, b)
        return out

    @property
    def weights(self) -> np.ndarray:
        """Normalized squared coefficients ``s_i^2 / sum_j s_j^2``."""
        sq = np.asarray(self.coefficients) ** 2
        total = sq.sum()
        if total == 0:
            raise ValueError("operator has no nonzero Schmidt coefficient")
        return sq / total


def operator_schmidt(u, dim_a: int, dim_b: int, threshold: float = RANK_TOL) -> OperatorSchmidtDecomposition:
    """Decompose ``u`` across the cut ``C^dim_a | C^dim_b``.

    ``threshold`` is relative to the largest coefficient; terms at or below it
    are dropped and do not count towards the Schmidt number.
    """
    m = reshuffle(as_matrix(u), dim_a, dim_b)
    x, s, v = svd(m)
    cutoff = threshold * s[0] if s.size and s[0] > 0 else 0.0
    chi = int(np.count_nonzero(s > cutoff)) if s.size and s[0] > 0 else 0
    vh = np.conj(v).T
    left = tuple(x[:, i].reshape(dim_a, dim_a) for i in range(chi))
    right = tuple(vh[i, :].reshape(dim_b, dim_b) for i in range(chi))
    return OperatorSchmidtDecomposition(
        coefficients=s[:chi].copy(),
        left_ops=left,
        right_ops=right,
        schmidt_number=chi,
        threshold=threshold,
        dims=(dim_a, dim_b),
    )


def schmidt_strength(d: OperatorSchmidtDecomposition) -> float:
    """Linear entropy ``1 - sum_i p_i^2`` of the normalized squared coefficients.

    Gives 0.5 for CNOT, 0.75 for SWAP and 0 for any product operator.
    """
    p = d.weights
    return float(1.0 - np.sum(p * p))


def schmidt_entropy(d: OperatorSchmidtDecomposition, base: float = 2.0) -> float:
    """Shannon entropy of the same distribution (1 bit for CNOT, 2 for SWAP)."""
    p = d.weights
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / np.log(base))


def is_entangling(u, dim_a: int, dim_b: int, threshold: float = RANK_TOL) -> bool:
    return operator_schmidt(u, dim_a, dim_b, threshold).schmidt_number > 1
