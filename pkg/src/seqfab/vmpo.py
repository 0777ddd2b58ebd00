"""Variational sequential approximation of multiqubit unitaries.

An itinerant ancilla of dimension ``D`` interacts with qubit ``k`` through a
unitary ``U_k`` on ``C^2 (x) C^D`` (qubit on the high-order index), once per
qubit and round. The product of these site unitaries is an MPO whose bond
is the ancilla. :func:`optimize` maximizes its overlap with ``G (x) 1_D`` by
alternating exact single-site updates.

Global factor order is ``qubit 1, ..., qubit N, ancilla``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .gates import PAULIS, su_generators
from .linalg import UNITARY_TOL, as_matrix, dagger, embed, expm_hermitian, is_unitary, partial_trace, svd
from .sampling import haar_unitary

log = logging.getLogger(__name__)

UpdateRule = Literal["procrustes", "pauli_gradient"]
InitRule = Literal["haar_random", "identity"]


def site_order(n_qubits: int, rounds: int = 1, alternate: bool = True) -> list[int]:
    """Qubit index visited by each site unitary, 0-based.

    Odd rounds run ``0..N-1``; with ``alternate`` even rounds run back.
    """
    order: list[int] = []
    forward = list(range(n_qubits))
    for r in range(rounds):
        order += forward[::-1] if (alternate and r % 2 == 1) else forward
    return order


@dataclass
class SequentialCircuit:
    n_qubits: int
    ancilla_dim: int
    unitaries: list[np.ndarray]
    rounds: int = 1
    alternate: bool = True

    def __post_init__(self):
        if self.n_qubits < 2 or self.ancilla_dim < 2 or self.rounds < 1:
            raise ValueError("need n_qubits >= 2, ancilla_dim >= 2 and rounds >= 1")
        self.unitaries = [as_matrix(u) for u in self.unitaries]
        if len(self.unitaries) != self.rounds * self.n_qubits:
            raise ValueError(f"expected {self.rounds * self.n_qubits} site unitaries, got {len(self.unitaries)}")
        n = 2 * self.ancilla_dim
        for i, u in enumerate(self.unitaries):
            if u.shape != (n, n) or not is_unitary(u, UNITARY_TOL):
                raise ValueError(f"site {i} is not a {n}x{n} unitary")

    @classmethod
    def identity(cls, n_qubits, ancilla_dim, rounds=1, alternate=True) -> "SequentialCircuit":
        us = [np.eye(2 * ancilla_dim, dtype=np.complex128) for _ in range(rounds * n_qubits)]
        return cls(n_qubits, ancilla_dim, us, rounds, alternate)

    @classmethod
    def haar(cls, n_qubits, ancilla_dim, rng, rounds=1, alternate=True) -> "SequentialCircuit":
        us = [haar_unitary(2 * ancilla_dim, rng) for _ in range(rounds * n_qubits)]
        return cls(n_qubits, ancilla_dim, us, rounds, alternate)

    @property
    def dims(self) -> list[int]:
        return [2] * self.n_qubits + [self.ancilla_dim]

    @property
    def order(self) -> list[int]:
        return site_order(self.n_qubits, self.rounds, self.alternate)

    @property
    def size(self) -> int:
        return 2**self.n_qubits * self.ancilla_dim

    def __len__(self):
        return len(self.unitaries)

    def embedded(self, site: int) -> np.ndarray:
        return embed(self.unitaries[site], [self.order[site], self.n_qubits], self.dims)

    def with_site(self, site: int, u: np.ndarray) -> "SequentialCircuit":
        us = list(self.unitaries)
        us[site] = as_matrix(u)
        return replace(self, unitaries=us)


def seq_to_global(c: SequentialCircuit) -> np.ndarray:
    """Product of the embedded site unitaries, first site applied first."""
    out = np.eye(c.size, dtype=np.complex128)
    for s in range(len(c)):
        out = c.embedded(s) @ out
    return out


def lift_target(gate: np.ndarray, ancilla_dim: int) -> np.ndarray:
    """``G (x) 1_D``: the global operator the circuit should reproduce."""
    return np.kron(as_matrix(gate), np.eye(ancilla_dim, dtype=np.complex128))


class Cost(NamedTuple):
    cost: float
    normalized_cost: float
    fidelity: float


def _cost_from_overlap(overlap: complex, size: int) -> Cost:
    fidelity = overlap.real / size
    normalized = 1.0 - fidelity
    return Cost(2.0 * size * normalized, normalized, fidelity)


def cost(c: SequentialCircuit, target) -> Cost:
    """Frobenius distance ``||T - U_seq||_F^2`` and its normalized forms.

    ``C = 2M - 2 Re Tr[T^dagger U_seq]`` with ``M = 2^N D``; the normalized
    cost is ``C / 2M`` and the fidelity ``1 - C / 2M``.
    """
    t = as_matrix(target)
    if t.shape != (c.size, c.size):
        raise ValueError(f"target of shape {t.shape} does not match circuit dimension {c.size}")
    return _cost_from_overlap(np.vdot(t, seq_to_global(c)), c.size)


def environment(c: SequentialCircuit, target, site: int) -> np.ndarray:
    """Contraction of the target with every site but ``site``.

    Returns ``E`` with ``Tr[E^dagger U_site] = Tr[T^dagger U_seq]`` for any
    choice of the unitary at ``site``.
    """
    if not 0 <= site < len(c):
        raise IndexError(f"site {site} out of range for {len(c)} sites")
    t = as_matrix(target)
    if t.shape != (c.size, c.size):
        raise ValueError(f"target of shape {t.shape} does not match circuit dimension {c.size}")
    before = np.eye(c.size, dtype=np.complex128)
    for s in range(site):
        before = c.embedded(s) @ before
    after = np.eye(c.size, dtype=np.complex128)
    for s in range(site + 1, len(c)):
        after = c.embedded(s) @ after
    # Tr[T^dag A emb(U) B] = Tr[(B T^dag A) emb(U)] = Tr[Tr_rest(B T^dag A) U]
    m = before @ dagger(t) @ after
    reduced = partial_trace(m, c.dims, [c.order[site], c.n_qubits])
    return dagger(reduced)


def local_update_procrustes(env: np.ndarray) -> np.ndarray:
    """Unitary maximizing ``Re Tr[env^dagger U]``: ``X Y^dagger`` from ``env = X S Y^dagger``."""
    x, s, y = svd(env)
    if s.size == 0 or s[0] <= 0.0:
        raise ValueError("environment is identically zero; the local problem is degenerate")
    return x @ dagger(y)


# Pauli-coupling parameterization: U = exp(-i sum_{ab} h[a, b] sigma_a (x) b_b)
# with b_0 = 1_D and b_{1..} the SU(D) generators.

_SUPPORTED_D = (2, 4)


@lru_cache(maxsize=None)
def coupling_basis(ancilla_dim: int) -> np.ndarray:
    """Read-only array of shape ``(4, D^2, 2D, 2D)`` holding ``sigma_a (x) b_b``."""
    if ancilla_dim not in _SUPPORTED_D:
        raise ValueError(f"Pauli-coupling updates support D in {_SUPPORTED_D}, got {ancilla_dim}")
    anc = [np.eye(ancilla_dim, dtype=np.complex128)] + list(su_generators(ancilla_dim))
    basis = np.array([[np.kron(p, b) for b in anc] for p in PAULIS])
    basis.flags.writeable = False
    return basis


def unitary_from_couplings(h: np.ndarray, ancilla_dim: int) -> np.ndarray:
    basis = coupling_basis(ancilla_dim)
    h = np.asarray(h, dtype=float)
    if h.shape != basis.shape[:2] or not np.all(np.isfinite(h)):
        raise ValueError(f"coupling matrix must be finite with shape {basis.shape[:2]}")
    return expm_hermitian(np.tensordot(h, basis, axes=2))


def couplings_from_unitary(u: np.ndarray, ancilla_dim: int) -> np.ndarray:
    """Real couplings ``h`` with ``unitary_from_couplings(h) == u`` (principal branch)."""
    basis = coupling_basis(ancilla_dim)
    # complex Schur form of a normal matrix is diagonal with orthonormal Z
    t, z = scipy.linalg.schur(as_matrix(u), output="complex")
    theta = np.angle(np.diag(t))
    h_op = (z * -theta) @ dagger(z)
    norms = np.einsum("abij,abji->ab", basis, basis).real
    return np.einsum("abij,ji->ab", basis, h_op).real / norms


def _site_objective(env: np.ndarray, size: int, ancilla_dim: int):
    def f(h):
        return np.vdot(env, unitary_from_couplings(h, ancilla_dim)).real / size

    return f


def _fd_gradient(f, h: np.ndarray, step: float) -> np.ndarray:
    g = np.zeros_like(h)
    for idx in np.ndindex(h.shape):
        hp = h.copy()
        hm = h.copy()
        hp[idx] += step
        hm[idx] -= step
        g[idx] = (f(hp) - f(hm)) / (2 * step)
    return g


def coupling_gradient(c: SequentialCircuit, target, site: int, h, fd_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the fidelity with respect to the couplings at ``site``."""
    env = environment(c, target, site)
    f = _site_objective(env, c.size, c.ancilla_dim)
    return _fd_gradient(f, np.asarray(h, dtype=float), fd_step)


def local_update_pauli_gradient(
    c: SequentialCircuit,
    target,
    site: int,
    h=None,
    steps: int = 20,
    rate: float = 0.5,
    fd_step: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ascent on the fidelity over the couplings of one site.

    Starts from ``h`` (default: the couplings of the current site unitary).
    Steps that would lower the fidelity are halved until they do not, so the
    returned unitary is never worse than the one currently at ``site``.
    """
    env = environment(c, target, site)
    d = c.ancilla_dim
    f = _site_objective(env, c.size, d)
    current = c.unitaries[site]
    f_entry = np.vdot(env, current).real / c.size
    h = couplings_from_unitary(current, d) if h is None else np.array(h, dtype=float)
    fh = f(h)
    lr = rate
    for _ in range(steps):
        g = _fd_gradient(f, h, fd_step)
        if np.max(np.abs(g)) < 1e-12:
            break
        for _ in range(40):
            trial = h + lr * g
            ft = f(trial)
            if ft >= fh:
                h, fh = trial, ft
                lr *= 1.5
                break
            lr *= 0.5
        else:
            break
    if fh < f_entry:
        return current, couplings_from_unitary(current, d)
    return unitary_from_couplings(h, d), h


@dataclass(frozen=True)
class OptimizerConfig:
    max_sweeps: int = 500
    tol: float = 1e-10
    restarts: int = 8
    seed: int = 0
    update_rule: UpdateRule = "procrustes"
    init: InitRule = "haar_random"
    alternate_rounds: bool = True
    gradient_steps: int = 20
    gradient_rate: float = 0.5

    def __post_init__(self):
        if self.max_sweeps < 1 or self.restarts < 1 or self.tol < 0 or self.gradient_steps < 1:
            raise ValueError("max_sweeps, restarts and gradient_steps must be positive and tol non-negative")
        if self.update_rule not in ("procrustes", "pauli_gradient"):
            raise ValueError(f"unknown update rule {self.update_rule!r}")
        if self.init not in ("haar_random", "identity"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class OptimizationReport:
    cost: float
    normalized_cost: float
    fidelity: float
    sweeps_used: int
    converged: bool
    cost_trace: list[float]
    best_circuit: SequentialCircuit
    restarts_run: int
    best_restart: int = 0
    restart_fidelities: list[float] = field(default_factory=list)
    restarts_converged: int = 0
    restart_traces: list[list[float]] = field(default_factory=list)


def _sweep_schedule(n_sites: int) -> list[int]:
    # left-to-right, then back; the turning site is not revisited
    return list(range(n_sites)) + list(range(n_sites - 2, -1, -1))


def _run_restart(target, n_qubits, ancilla_dim, rounds, cfg: OptimizerConfig, restart: int):
    rng = np.random.default_rng([cfg.seed, restart])
    if cfg.init == "identity":
        c = SequentialCircuit.identity(n_qubits, ancilla_dim, rounds, cfg.alternate_rounds)
    else:
        c = SequentialCircuit.haar(n_qubits, ancilla_dim, rng, rounds, cfg.alternate_rounds)
    couplings = None
    if cfg.update_rule == "pauli_gradient":
        couplings = [couplings_from_unitary(u, ancilla_dim) for u in c.unitaries]

    trace = [cost(c, target).cost]
    converged = False
    for _ in range(cfg.max_sweeps):
        for s in _sweep_schedule(len(c)):
            if cfg.update_rule == "procrustes":
                u = local_update_procrustes(environment(c, target, s))
            else:
                u, couplings[s] = local_update_pauli_gradient(
                    c, target, s, couplings[s], cfg.gradient_steps, cfg.gradient_rate
                )
            c = c.with_site(s, u)
        trace.append(cost(c, target).cost)
        if trace[-2] - trace[-1] < cfg.tol:
            converged = True
            break
    return c, trace, converged


def optimize(target_gate, n_qubits: int, ancilla_dim: int, rounds: int = 1, cfg: OptimizerConfig | None = None) -> OptimizationReport:
    """Best sequential approximation of ``target_gate`` over ``cfg.restarts`` starts.

    Each restart draws its initial circuit from ``default_rng([seed, restart])``,
    so results do not depend on how restarts are scheduled. The reported
    circuit is the one with the highest fidelity (lowest restart index on ties).
    """
    cfg = cfg or OptimizerConfig()
    g = as_matrix(target_gate)
    if n_qubits < 2 or g.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError(f"target of shape {g.shape} is not a {n_qubits}-qubit operator")
    if ancilla_dim < 2 or rounds < 1:
        raise ValueError("need ancilla_dim >= 2 and rounds >= 1")
    if not is_unitary(g, 1e-8):
        raise ValueError("target gate is not unitary")
    target = lift_target(g, ancilla_dim)

    best = None
    fidelities = []
    traces = []
    n_converged = 0
    for r in range(cfg.restarts):
        c, trace, converged = _run_restart(target, n_qubits, ancilla_dim, rounds, cfg, r)
        res = cost(c, target)
        fidelities.append(res.fidelity)
        traces.append(trace)
        n_converged += converged
        log.debug("restart %d: F=%.12f after %d sweeps (converged=%s)", r, res.fidelity, len(trace) - 1, converged)
        if best is None or res.fidelity > best[1].fidelity:
            best = (r, res, c, trace, converged)

    r, res, c, trace, converged = best
    return OptimizationReport(
        cost=res.cost,
        normalized_cost=res.normalized_cost,
        fidelity=res.fidelity,
        sweeps_used=len(trace) - 1,
        converged=converged,
        cost_trace=trace,
        best_circuit=c,
        restarts_run=cfg.restarts,
        best_restart=r,
        restart_fidelities=fidelities,
        restarts_converged=n_converged,
        restart_traces=traces,
    )


def fidelity_gap(report: OptimizationReport) -> float:
    return 1.0 - report.fidelity
