"""Dense complex linear algebra kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Tensor
factor structure is carried separately as a list of local dimensions
(``dims``), with the first factor on the slowest (leftmost) index, so that
``kron(a, b)`` places ``a`` on the high-order index.
"""

from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-d complex128 array (no copy when already one)."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def check_dims(dims: Sequence[int], size: int | None = None) -> list[int]:
    """Validate a factor shape and, optionally, that it multiplies to ``size``."""
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"factor dims must be positive integers, got {dims}")
    if size is not None and prod(dims) != size:
        raise ValueError(f"factor dims {dims} do not multiply to {size}")
    return dims


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])) <= tol)


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return bool(np.linalg.norm(h - dagger(h)) <= tol)


def kron(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product, leftmost operand on the high-order index."""
    out = np.kron(as_matrix(a), as_matrix(b))
    for m in rest:
        out = np.kron(out, as_matrix(m))
    return out


def reshuffle(u: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Realign a bipartite operator so that product operators become rank one.

    For ``u`` acting on ``C^dim_a (x) C^dim_b`` returns the
    ``dim_a**2 x dim_b**2`` matrix ``M[(i,i'),(j,j')] = u[(i,j),(i',j')]``.
    ``reshuffle(A (x) B)`` equals ``outer(A.ravel(), B.ravel())``.
    """
    u = as_matrix(u)
    n = dim_a * dim_b
    if u.shape != (n, n):
        raise ValueError(f"operator of shape {u.shape} is not {n}x{n} for dims ({dim_a}, {dim_b})")
    t = u.reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_a, dim_b * dim_b)


def unreshuffle(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Inverse of :func:`reshuffle`."""
    m = as_matrix(m)
    if m.shape != (dim_a * dim_a, dim_b * dim_b):
        raise ValueError(f"matrix of shape {m.shape} does not match dims ({dim_a}, {dim_b})")
    t = m.reshape(dim_a, dim_a, dim_b, dim_b)
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_b, dim_a * dim_b)


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition ``m = U @ diag(s) @ V^dagger``.

    Returns ``(U, s, V)`` with ``s`` sorted in descending order. Note that the
    right factor is ``V`` itself, not its adjoint.

    Raises:
        numpy.linalg.LinAlgError: if LAPACK fails to converge.
    """
    u, s, vh = np.linalg.svd(as_matrix(m), full_matrices=False)
    return u, s, dagger(vh)


def expm_hermitian(h: np.ndarray) -> np.ndarray:
    """Return ``exp(-1j * h)`` for Hermitian ``h`` via eigendecomposition."""
    h = as_matrix(h)
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    # symmetrize to kill the sub-tolerance anti-Hermitian part before eigh
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (v * np.exp(-1j * w)) @ dagger(v)


def hs_overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``Tr[a^dagger b]``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Kept factors appear in ascending index order in the result.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"factor index out of range in keep={keep} for {n} factors")
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    d = prod(dims[k] for k in keep)
    return np.einsum(t, row + col, out).reshape(d, d)


def embed(u: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Lift ``u`` acting on factors ``sites`` (in that order) to the full space."""
    u = as_matrix(u)
    dims = check_dims(dims)
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites) or any(s < 0 or s >= len(dims) for s in sites):
        raise ValueError(f"invalid sites {sites} for {len(dims)} factors")
    local = prod(dims[s] for s in sites)
    if u.shape != (local, local):
        raise ValueError(f"operator of shape {u.shape} does not act on sites {sites} of dims {dims}")
    rest = [i for i in range(len(dims)) if i not in sites]
    order = sites + rest
    full = np.kron(u, np.eye(prod(dims[i] for i in rest), dtype=np.complex128))
    n = len(dims)
    permuted = [dims[i] for i in order]
    t = full.reshape(permuted + permuted)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    size = prod(dims)
    return t.reshape(size, size)
