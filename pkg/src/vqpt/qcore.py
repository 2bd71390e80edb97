"""Dense complex linear algebra for small qubit registers.

Bit order: qubit 0 is the least significant bit of a basis index, so the
basis state with index i reads |q_{n-1} ... q_1 q_0> as the binary digits
of i. All kernels, gate embeddings and serializations follow this
convention; a round-trip test enforces it.

Everything is exact dense complex128. Register ceilings keep experiment
runtimes in the minutes range: full operator matrices up to 10 qubits,
statevector evolution up to 12.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_STATE_QUBITS = 12
MAX_OPERATOR_QUBITS = 10


class Rng:
    """Deterministic counter-based random stream (Philox).

    Identical (seed, spawn_key) pairs reproduce identical draw sequences
    bit-exactly across platforms. ``child`` derives independent substreams
    so parallel work items never share a generator.
    """

    def __init__(self, seed: int, spawn_key: Sequence[int] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def child(self, *key: int) -> "Rng":
        return Rng(self.seed, self.spawn_key + tuple(key))

    def derive_seed(self, *key: int) -> int:
        """A plain integer seed derived from (seed, spawn_key, key)."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key + tuple(key))
        return int(seq.generate_state(1, np.uint64)[0])

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def multinomial(self, n: int, pvals) -> np.ndarray:
        return self._gen.multinomial(n, pvals)

    def choice_index(self, n: int, p) -> int:
        return int(self._gen.choice(n, p=p))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, spawn_key={self.spawn_key})"


def _as_complex(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state of ``n_qubits`` qubits; ``amps[i]`` is the amplitude of |i>."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 0 <= self.n_qubits <= MAX_STATE_QUBITS:
            raise ValueError(f"n_qubits must be in [0, {MAX_STATE_QUBITS}]")
        amps = _as_complex(self.amps, "amps").reshape(-1).copy()
        if amps.shape[0] != 2 ** self.n_qubits:
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, got {amps.shape[0]}")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        if not 0 <= index < 2 ** n_qubits:
            raise ValueError("basis index out of range")
        amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm < 1e-300:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amps / nrm)

    def to_json(self) -> dict:
        return {
            "dim": len(self.amps),
            "re": self.amps.real.tolist(),
            "im": self.amps.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StateVector":
        dim = int(obj["dim"])
        n = dim.bit_length() - 1
        if 2 ** n != dim:
            raise ValueError("dim is not a power of two")
        return cls(n, np.asarray(obj["re"]) + 1j * np.asarray(obj["im"]))


@dataclass(frozen=True)
class UnitaryMatrix:
    """Dense operator on a power-of-two dimensional space (not necessarily
    verified unitary; use :func:`is_unitary` where the contract requires it)."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ValueError("dim must be a power of two >= 2")
        if self.dim > 2 ** MAX_OPERATOR_QUBITS:
            raise ValueError(f"dim exceeds the {MAX_OPERATOR_QUBITS}-qubit operator ceiling")
        mat = _as_complex(self.mat, "mat").reshape(self.dim, self.dim).copy()
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.dim, self.mat.conj().T)

    def power(self, k: int) -> "UnitaryMatrix":
        """U**k for integer k >= 0 by repeated squaring."""
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = np.eye(self.dim, dtype=np.complex128)
        base = self.mat
        while k:
            if k & 1:
                result = base @ result
            base = base @ base
            k >>= 1
        return UnitaryMatrix(self.dim, result)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return UnitaryMatrix(self.dim, self.mat @ other.mat)

    def to_json(self) -> dict:
        flat = self.mat.reshape(-1)  # row-major
        return {"dim": self.dim, "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "UnitaryMatrix":
        dim = int(obj["dim"])
        mat = (np.asarray(obj["re"]) + 1j * np.asarray(obj["im"])).reshape(dim, dim)
        return cls(dim, mat)


def identity(n_qubits: int = 1) -> UnitaryMatrix:
    return UnitaryMatrix(2 ** n_qubits, np.eye(2 ** n_qubits))


def is_unitary(u: UnitaryMatrix, tol: float = 1e-8) -> bool:
    """Frobenius check of U^dag U = I."""
    delta = u.mat.conj().T @ u.mat - np.eye(u.dim)
    return float(np.linalg.norm(delta)) <= tol


# ---------------------------------------------------------------------------
# Standard gates. Rotation conventions:
#   RZ(t) = diag(e^{-it/2}, e^{it/2}),  RY/RX = exp(-it sigma/2),
#   P(lam) = diag(1, e^{i lam}),  CX listed as (control, target).


def x() -> UnitaryMatrix:
    return UnitaryMatrix(2, np.array([[0, 1], [1, 0]]))


def h() -> UnitaryMatrix:
    return UnitaryMatrix(2, np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def rx(theta: float) -> UnitaryMatrix:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return UnitaryMatrix(2, np.array([[c, -1j * s], [-1j * s, c]]))


def ry(theta: float) -> UnitaryMatrix:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return UnitaryMatrix(2, np.array([[c, -s], [s, c]]))


def rz(theta: float) -> UnitaryMatrix:
    return UnitaryMatrix(2, np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]))


def p(lam: float) -> UnitaryMatrix:
    return UnitaryMatrix(2, np.diag([1.0, np.exp(1j * lam)]))


def cx() -> UnitaryMatrix:
    """CX with the control on the first listed qubit, target on the second."""
    m = np.zeros((4, 4))
    m[0, 0] = m[2, 2] = 1.0  # control bit clear
    m[3, 1] = m[1, 3] = 1.0  # control bit set: target flips
    return UnitaryMatrix(4, m)


def standard_gates() -> dict:
    """Catalogue of the supported gate constructors."""
    return {"RX": rx, "RY": ry, "RZ": rz, "P": p, "H": h, "X": x, "CX": cx}


# ---------------------------------------------------------------------------
# Kernels. `amps` may carry a trailing batch axis, which lets the same code
# evolve a statevector or all columns of a matrix at once.


def _apply_gate_kernel(amps: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    if mat.shape != (2 ** k, 2 ** k):
        raise ValueError("gate dimension does not match the number of listed qubits")
    if len(set(qubits)) != k:
        raise ValueError("duplicate qubit index")
    if any(q < 0 or q >= n for q in qubits):
        raise ValueError("qubit index out of range")
    batch = amps.shape[1:]
    psi = amps.reshape([2] * n + list(batch))
    # Listed qubits are the gate's index bits, least significant first.
    src = [n - 1 - q for q in reversed(qubits)]
    psi = np.moveaxis(psi, src, range(k))
    rest = psi.shape[k:]
    out = (mat @ psi.reshape(2 ** k, -1)).reshape([2] * k + list(rest))
    out = np.moveaxis(out, range(k), src)
    return np.ascontiguousarray(out).reshape(amps.shape)


def _apply_controlled_kernel(amps: np.ndarray, mat: np.ndarray, qubits: Sequence[int],
                             control: int, control_value: int, n: int) -> np.ndarray:
    if control in qubits:
        raise ValueError("control qubit collides with a target qubit")
    if not 0 <= control < n:
        raise ValueError("control qubit index out of range")
    if control_value not in (0, 1):
        raise ValueError("control_value must be 0 or 1")
    batch = amps.shape[1:]
    psi = amps.reshape([2] * n + list(batch)).copy()
    sl = [slice(None)] * psi.ndim
    sl[n - 1 - control] = control_value
    sector = np.ascontiguousarray(psi[tuple(sl)]).reshape((2 ** (n - 1),) + batch)
    shifted = [q - 1 if q > control else q for q in qubits]
    sector = _apply_gate_kernel(sector, mat, shifted, n - 1)
    psi[tuple(sl)] = sector.reshape([2] * (n - 1) + list(batch))
    return psi.reshape(amps.shape)


def apply_gate(state: StateVector, gate: UnitaryMatrix, qubits: Sequence[int]) -> StateVector:
    """Apply ``gate`` to the listed qubits (least significant first)."""
    amps = _apply_gate_kernel(state.amps, gate.mat, list(qubits), state.n_qubits)
    return StateVector(state.n_qubits, amps)


def apply_controlled(state: StateVector, gate: UnitaryMatrix, qubits: Sequence[int],
                     control: int, control_value: int) -> StateVector:
    """Apply ``gate`` only on the amplitude sector where ``control`` reads
    ``control_value``; identity on the complementary sector."""
    amps = _apply_controlled_kernel(state.amps, gate.mat, list(qubits),
                                    control, control_value, state.n_qubits)
    return StateVector(state.n_qubits, amps)


# ---------------------------------------------------------------------------
# Random unitaries and the Fourier transform.


def haar_unitary(dim: int, rng: Rng) -> UnitaryMatrix:
    """Haar-distributed unitary via phase-corrected QR of a Ginibre matrix.

    Plain QR of a Gaussian matrix is not Haar; rescaling the columns of Q by
    the phases of R's diagonal restores the exact distribution.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    while True:
        g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        if np.min(np.abs(d)) > 1e-12:  # redraw on a degenerate diagonal
            return UnitaryMatrix(dim, q * (d / np.abs(d)))


def qft(n_qubits: int) -> UnitaryMatrix:
    """Fourier transform |j> -> 2^{-n/2} sum_k e^{2 pi i jk / 2^n} |k>."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    dim = 2 ** n_qubits
    idx = np.arange(dim)
    return UnitaryMatrix(dim, np.exp(2j * np.pi * np.outer(idx, idx) / dim) / math.sqrt(dim))


# ---------------------------------------------------------------------------
# Metrics.


def fidelity_pure(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for pure states."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("dimension mismatch")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def similarity(a: UnitaryMatrix, b: UnitaryMatrix) -> float:
    """S = 1 - ||A - B||_F / ||A||_F (can be negative for distant operators)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return 1.0 - float(np.linalg.norm(a.mat - b.mat) / np.linalg.norm(a.mat))


def average_fidelity(target: UnitaryMatrix, model: UnitaryMatrix) -> float:
    """Mean over the computational basis of |<i| target^dag model |i>|^2.

    This is the pure-state average of the output-state fidelity between the
    target evolution and the model evolution over all basis initializations.
    """
    if target.dim != model.dim:
        raise ValueError("dimension mismatch")
    diag = np.einsum("ij,ij->j", target.mat.conj(), model.mat)
    return float(np.mean(np.abs(diag) ** 2))
