"""Layered variational circuit: per layer an entangling CX block followed by
per-qubit Euler rotation chains.

Two single-qubit chain variants are supported: RZ-RY-RZ for unitary
process learning (PTVQC) and RY-RX-RY for the eigendecomposition variant
(UVQSVD). Layer j's entangler alternates with the parity of j:

  odd j:  CX(q -> q+1) for even q, pairs (0,1), (2,3), ...
  even j: CX(q -> q+1 mod n) for odd q, pairs (1,2), (3,4), ...,
          closing the (n-1, 0) pair when n is even

so every layer carries floor(n/2) two-qubit gates and adjacent pairs never
overlap. For n = 1 the entangler is the identity. Parameters are ordered
layer-major, then qubit, then position within the chain; `param_index` is
the public index map.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .qcore import (
    StateVector,
    UnitaryMatrix,
    _apply_gate_kernel,
    cx,
    rx,
    ry,
    rz,
)


class Variant(str, Enum):
    PTVQC = "ptvqc"    # RZ-RY-RZ chains
    UVQSVD = "uvqsvd"  # RY-RX-RY chains


_CHAINS: dict[Variant, tuple[Callable[[float], UnitaryMatrix], ...]] = {
    Variant.PTVQC: (rz, ry, rz),
    Variant.UVQSVD: (ry, rx, ry),
}


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    depth: int
    variant: Variant

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def n_params(self) -> int:
        return 3 * self.n_qubits * self.depth

    def to_json(self) -> dict:
        return {"n": self.n_qubits, "d": self.depth, "variant": self.variant.value}

    @classmethod
    def from_json(cls, obj: dict) -> "AnsatzSpec":
        return cls(int(obj["n"]), int(obj["d"]), Variant(obj["variant"]))


@dataclass(frozen=True)
class ParamVector:
    """Flat vector of rotation angles in radians (unbounded, no wrapping)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1).copy()
        if not np.all(np.isfinite(vals)):
            raise ValueError("parameters must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self) -> list:
        return self.values.tolist()

    @classmethod
    def from_json(cls, obj: Sequence[float]) -> "ParamVector":
        return cls(np.asarray(obj, dtype=np.float64))


def param_index(spec: AnsatzSpec, layer: int, qubit: int, pos: int) -> int:
    """Index of the angle for 1-based ``layer``, ``qubit`` and chain ``pos`` (0..2)."""
    if not 1 <= layer <= spec.depth:
        raise ValueError("layer out of range")
    if not 0 <= qubit < spec.n_qubits:
        raise ValueError("qubit out of range")
    if pos not in (0, 1, 2):
        raise ValueError("chain position must be 0, 1 or 2")
    return (layer - 1) * 3 * spec.n_qubits + 3 * qubit + pos


def entangler_pairs(n_qubits: int, layer: int) -> list[tuple[int, int]]:
    """(control, target) CX pairs of the 1-based ``layer``."""
    if n_qubits == 1:
        return []
    if layer % 2 == 1:
        return [(q, q + 1) for q in range(0, n_qubits - 1, 2)]
    return [(q, (q + 1) % n_qubits) for q in range(1, n_qubits, 2)]


def gate_counts(spec: AnsatzSpec) -> tuple[int, int]:
    """(single-qubit, two-qubit) gate totals of the circuit."""
    two = sum(len(entangler_pairs(spec.n_qubits, j)) for j in range(1, spec.depth + 1))
    return 3 * spec.n_qubits * spec.depth, two


def _check_params(spec: AnsatzSpec, params: ParamVector) -> np.ndarray:
    if len(params) != spec.n_params:
        raise ValueError(f"expected {spec.n_params} parameters, got {len(params)}")
    return params.values


def _entangler_perm(n_qubits: int, layer: int) -> np.ndarray:
    """Basis permutation enacted by the layer's CX block (an involution)."""
    idx = np.arange(2 ** n_qubits)
    shift = np.zeros_like(idx)
    for control, target in entangler_pairs(n_qubits, layer):
        shift ^= ((idx >> control) & 1) << target
    return idx ^ shift


def build_unitary(spec: AnsatzSpec, params: ParamVector) -> UnitaryMatrix:
    """Full matrix of the circuit: layers applied in ascending order, each
    layer entangling first and then rotating every qubit."""
    theta = _check_params(spec, params)
    n = spec.n_qubits
    chain = _CHAINS[spec.variant]
    u = np.eye(2 ** n, dtype=np.complex128)
    for layer in range(1, spec.depth + 1):
        u = u[_entangler_perm(n, layer), :]
        # kron in descending qubit order keeps qubit 0 least significant
        singles = []
        for q in range(n - 1, -1, -1):
            base = param_index(spec, layer, q, 0)
            g = chain[2](theta[base + 2]).mat @ chain[1](theta[base + 1]).mat @ chain[0](theta[base]).mat
            singles.append(g)
        u = reduce(np.kron, singles) @ u
    return UnitaryMatrix(2 ** n, u)


def _apply_kernel(spec: AnsatzSpec, theta: np.ndarray, amps: np.ndarray, n_register: int,
                  qubit_map: Sequence[int]) -> np.ndarray:
    """Gate-by-gate evolution; ``qubit_map[k]`` is the register index of
    ansatz qubit k."""
    chain = _CHAINS[spec.variant]
    cx_mat = cx().mat
    for layer in range(1, spec.depth + 1):
        for control, target in entangler_pairs(spec.n_qubits, layer):
            amps = _apply_gate_kernel(amps, cx_mat, [qubit_map[control], qubit_map[target]], n_register)
        for q in range(spec.n_qubits):
            base = param_index(spec, layer, q, 0)
            for pos in range(3):
                amps = _apply_gate_kernel(amps, chain[pos](theta[base + pos]).mat,
                                          [qubit_map[q]], n_register)
    return amps


def apply_ansatz(spec: AnsatzSpec, params: ParamVector, state: StateVector) -> StateVector:
    """Evolve ``state`` gate by gate, without building the full matrix."""
    theta = _check_params(spec, params)
    if state.n_qubits != spec.n_qubits:
        raise ValueError("state dimension does not match the circuit")
    amps = _apply_kernel(spec, theta, state.amps, spec.n_qubits, range(spec.n_qubits))
    return StateVector(state.n_qubits, amps)


def apply_controlled_ansatz(spec: AnsatzSpec, params: ParamVector, state: StateVector,
                            ancilla_index: int, control_value: int) -> StateVector:
    """Apply the whole circuit on the amplitude sector where the ancilla
    qubit reads ``control_value``; identity on the complementary sector.

    The non-ancilla register qubits map to ansatz qubits in increasing
    index order.
    """
    theta = _check_params(spec, params)
    n_tot = state.n_qubits
    if not 0 <= ancilla_index < n_tot:
        raise ValueError("ancilla index out of range")
    if n_tot != spec.n_qubits + 1:
        raise ValueError("register must hold the circuit qubits plus one ancilla")
    if control_value not in (0, 1):
        raise ValueError("control_value must be 0 or 1")
    psi = state.amps.reshape([2] * n_tot).copy()
    sl = [slice(None)] * n_tot
    sl[n_tot - 1 - ancilla_index] = control_value
    sector = np.ascontiguousarray(psi[tuple(sl)]).reshape(-1)
    sector = _apply_kernel(spec, theta, sector, spec.n_qubits, range(spec.n_qubits))
    psi[tuple(sl)] = sector.reshape([2] * spec.n_qubits)
    return StateVector(n_tot, psi.reshape(-1))
