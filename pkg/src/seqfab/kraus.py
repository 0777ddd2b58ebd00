"""Quantum operations induced by an ancilla that interacts with the qubits.

The ancilla is always the last tensor factor. A joint unitary on
``system (x) ancilla`` together with an initial ancilla basis state defines
Kraus operators ``E_k = <k|_a U |in>_a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .gates import su_generators
from .linalg import as_matrix, check_dims, dagger, embed, is_hermitian, is_unitary, kron, partial_trace

DILATION_TOL = 1e-8
STATE_TOL = 1e-10


@dataclass(frozen=True)
class KrausSet:
    operators: tuple[np.ndarray, ...]
    system_dim: int
    ancilla_dim: int
    ancilla_in: int = 0

    def completeness_error(self) -> float:
        acc = sum(dagger(e) @ e for e in self.operators)
        return float(np.linalg.norm(acc - np.eye(self.system_dim)))

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(e) for e in self.operators])


def _split_dims(shape: Sequence[int], size: int) -> tuple[int, int]:
    dims = check_dims(shape, size)
    if len(dims) < 2:
        raise ValueError("shape needs at least one system factor and the ancilla factor")
    return prod(dims[:-1]), dims[-1]


def kraus_from_dilation(u_joint, shape: Sequence[int], ancilla_in: int = 0) -> KrausSet:
    """Kraus operators of ``rho -> Tr_a[U (rho (x) |in><in|) U^dagger]``.

    ``shape`` lists the factor dimensions with the ancilla last, e.g.
    ``[2, 2, D]`` or simply ``[4, D]``.
    """
    u = as_matrix(u_joint)
    ds, da = _split_dims(shape, u.shape[0])
    if not 0 <= ancilla_in < da:
        raise ValueError(f"ancilla_in={ancilla_in} outside [0, {da})")
    if not is_unitary(u, DILATION_TOL):
        raise ValueError("dilation is not unitary")
    t = u.reshape(ds, da, ds, da)
    ops = tuple(np.ascontiguousarray(t[:, k, :, ancilla_in]) for k in range(da))
    return KrausSet(ops, ds, da, ancilla_in)


def apply_channel(k: KrausSet, rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (k.system_dim, k.system_dim):
        raise ValueError(f"state of shape {rho.shape} does not match system dimension {k.system_dim}")
    return sum(e @ rho @ dagger(e) for e in k.operators)


def sequential_dilation(u1a, u2a, ancilla_dim: int) -> np.ndarray:
    """``(U_2a (x) 1_1)(1_2 (x) U_1a)`` on qubits 1, 2 and the ancilla, in that factor order."""
    dims = [2, 2, ancilla_dim]
    return embed(u2a, [1, 2], dims) @ embed(u1a, [0, 2], dims)


def readout_norms(k: KrausSet, align: bool = True) -> np.ndarray:
    """Frobenius norms of the Kraus operators, largest first when aligned.

    With ``align`` the ancilla readout basis is the eigenbasis of the Gram
    matrix ``G_kl = Tr[E_k^dagger E_l]``, and the norms are the singular
    values of the stacked, flattened Kraus operators. The ancilla decouples
    (up to a local unitary on the ancilla) exactly when only the first of
    these is nonzero.
    """
    if not align:
        return k.norms()
    # singular values directly; sqrt(eigvalsh(G)) would amplify roundoff to ~1e-8
    ops = np.array([e.ravel() for e in k.operators])
    return np.linalg.svd(ops, compute_uv=False)


def nogo_witness(u1a, u2a, ancilla_dim: int, align: bool = True) -> float:
    """Sum of the norms of every Kraus operator except the leading one.

    The sequential pair ``U_1a`` then ``U_2a`` starts with the ancilla in
    ``|0>``. Zero means the ancilla leaves deterministically, so the pair
    implements a unitary on the qubits; a positive value means it stays
    entangled with them.
    """
    n = 2 * ancilla_dim
    for name, u in (("u1a", u1a), ("u2a", u2a)):
        u = as_matrix(u)
        if u.shape != (n, n) or not is_unitary(u, DILATION_TOL):
            raise ValueError(f"{name} must be a {n}x{n} unitary")
    ks = kraus_from_dilation(sequential_dilation(u1a, u2a, ancilla_dim), [2, 2, ancilla_dim])
    return float(np.sum(readout_norms(ks, align)[1:]))


@dataclass(frozen=True)
class FanoForm:
    """``rho = rho_sys (x) rho_anc + sum_ij gamma[i, j] sigma_i (x) tau_j``.

    ``sigma_i`` and ``tau_j`` are :func:`seqfab.gates.su_generators` of the
    system and ancilla dimensions.
    """

    rho_sys: np.ndarray
    rho_anc: np.ndarray
    gamma: np.ndarray

    def reconstruct(self) -> np.ndarray:
        sig = su_generators(self.rho_sys.shape[0])
        tau = su_generators(self.rho_anc.shape[0])
        out = kron(self.rho_sys, self.rho_anc)
        for i, s in enumerate(sig):
            for j, t in enumerate(tau):
                if self.gamma[i, j] != 0:
                    out = out + self.gamma[i, j] * kron(s, t)
        return out


def _bipartite(rho, shape: Sequence[int]) -> tuple[np.ndarray, int, int]:
    rho = as_matrix(rho)
    ds, da = _split_dims(shape, rho.shape[0])
    return rho, ds, da


def marginals(rho, shape: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    rho, ds, da = _bipartite(rho, shape)
    return partial_trace(rho, [ds, da], [0]), partial_trace(rho, [ds, da], [1])


def fano_decompose(rho, shape: Sequence[int]) -> FanoForm:
    rho, ds, da = _bipartite(rho, shape)
    if not is_hermitian(rho, STATE_TOL) or abs(np.trace(rho) - 1) > STATE_TOL:
        raise ValueError("fano_decompose needs a Hermitian, unit-trace matrix")
    rho_s, rho_a = marginals(rho, [ds, da])
    corr = (rho - kron(rho_s, rho_a)).reshape(ds, da, ds, da)
    sig = np.array(su_generators(ds).generators)
    tau = np.array(su_generators(da).generators)
    # Tr[corr (sigma_i (x) tau_j)] / Tr[(sigma_i (x) tau_j)^2], the latter being 4
    gamma = np.einsum("xayb,iyx,jba->ij", corr, sig, tau).real / 4.0
    return FanoForm(rho_s, rho_a, gamma)


def _check_state(rho: np.ndarray) -> None:
    if not is_hermitian(rho, STATE_TOL) or abs(np.trace(rho) - 1) > STATE_TOL:
        raise ValueError("not a density matrix: must be Hermitian with unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0] < -STATE_TOL:
        raise ValueError("not a density matrix: negative eigenvalue")


def correlation_sensitivity(u_joint, rho_corr, shape: Sequence[int]) -> float:
    """How much initial system-ancilla correlations change the system output.

    Returns ``|| Tr_a[U rho U^dagger] - Tr_a[U (rho_s (x) rho_a) U^dagger] ||_F``
    where ``rho_s``, ``rho_a`` are the marginals of ``rho``.
    """
    u = as_matrix(u_joint)
    rho, ds, da = _bipartite(rho_corr, shape)
    if u.shape != rho.shape:
        raise ValueError(f"unitary {u.shape} and state {rho.shape} differ in size")
    _check_state(rho)
    rho_s, rho_a = marginals(rho, [ds, da])
    diff = u @ (rho - kron(rho_s, rho_a)) @ dagger(u)
    return float(np.linalg.norm(partial_trace(diff, [ds, da], [0])))
