"""Standard multiqubit gates and Hermitian operator bases.

Qubit 1 is the leftmost (slowest) tensor factor. Controlled gates put their
control(s) on the high-order qubits and the target on the lowest one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (I2, X, Y, Z)

DEFAULT_CPHASE = math.pi / 2

_QUBITS = {
    "CNOT": 2,
    "CZ": 2,
    "CPHASE": 2,
    "SWAP": 2,
    "TOFFOLI": 3,
    "FREDKIN": 3,
}
GATE_NAMES = tuple(_QUBITS)


def _permutation(images: list[int]) -> np.ndarray:
    # column j is mapped to row images[j]
    n = len(images)
    m = np.zeros((n, n), dtype=np.complex128)
    m[images, np.arange(n)] = 1
    return m


@dataclass(frozen=True)
class GateSpec:
    """Gate identifier. ``phase`` is only meaningful for CPHASE."""

    name: str
    phase: float | None = None
    qubits: int = field(default=0)

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        if name == "CUSTOM":
            if self.qubits < 1:
                raise ValueError("custom gates need an explicit qubit count")
            return
        if name not in _QUBITS:
            raise ValueError(f"unknown gate {self.name!r}; expected one of {', '.join(GATE_NAMES)} or custom")
        if self.phase is not None and name != "CPHASE":
            raise ValueError(f"phase given for {name}, which takes no parameter")
        if name == "CPHASE" and self.phase is None:
            object.__setattr__(self, "phase", DEFAULT_CPHASE)
        if self.qubits and self.qubits != _QUBITS[name]:
            raise ValueError(f"{name} acts on {_QUBITS[name]} qubits, not {self.qubits}")
        object.__setattr__(self, "qubits", _QUBITS[name])


def gate(spec: GateSpec | str, phase: float | None = None) -> np.ndarray:
    """Computational-basis matrix of a named gate.

    >>> gate("cnot").real.astype(int).tolist()
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    """
    if isinstance(spec, str):
        spec = GateSpec(spec, phase)
    elif phase is not None:
        raise ValueError("pass the phase inside the GateSpec")
    name = spec.name
    if name == "CNOT":
        return _permutation([0, 1, 3, 2])
    if name == "CZ":
        return np.diag([1, 1, 1, -1]).astype(np.complex128)
    if name == "CPHASE":
        return np.diag([1, 1, 1, np.exp(1j * spec.phase)])
    if name == "SWAP":
        return _permutation([0, 2, 1, 3])
    if name == "TOFFOLI":
        return _permutation([0, 1, 2, 3, 4, 5, 7, 6])
    if name == "FREDKIN":
        return _permutation([0, 1, 2, 3, 4, 6, 5, 7])
    raise ValueError("custom gates have no built-in matrix; load one from a matrix file")


@dataclass(frozen=True)
class GeneratorBasis:
    """Traceless Hermitian generators of SU(d), normalized to Tr[t_i t_j] = 2 delta_ij."""

    dim: int
    generators: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    def gram(self) -> np.ndarray:
        g = np.array(self.generators)
        return np.einsum("aij,bji->ab", g, g)


def su_generators(d: int) -> GeneratorBasis:
    """Generalized Gell-Mann matrices for SU(d).

    Ordered as all symmetric off-diagonal generators, then the antisymmetric
    ones (both by row-major position of the upper entry), then the ``d-1``
    diagonal ones. For ``d=2`` this gives (X, Y, Z).
    """
    if d < 2:
        raise ValueError(f"SU(d) generators need d >= 2, got {d}")
    sym, anti, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1
            sym.append(s)
            a = np.zeros((d, d), dtype=np.complex128)
            a[j, k] = -1j
            a[k, j] = 1j
            anti.append(a)
    for l in range(1, d):
        # 48-bit mantissa: every partial sum of the entries is exact, so the
        # trace is exactly zero in any summation order (d <= 32)
        m, e = math.frexp(math.sqrt(2.0 / (l * (l + 1))))
        c = math.ldexp(round(math.ldexp(m, 48)), e - 48)
        entries = [c] * l + [-l * c] + [0.0] * (d - l - 1)
        diag.append(np.diag(entries).astype(np.complex128))
    return GeneratorBasis(d, tuple(sym + anti + diag))


def pauli_basis_two_site() -> list[np.ndarray]:
    """The 16 products ``sigma_a (x) sigma_b``, element ``4*a + b``."""
    return [np.kron(a, b) for a in PAULIS for b in PAULIS]
