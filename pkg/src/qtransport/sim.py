"""Dense statevector engine.

Amplitudes live in one complex128 array indexed LSB-first (bit i of the
basis index is qubit i). Gate application works in place on index pairs
selected by bit masks; controls filter the index set instead of expanding
the gate matrix, which keeps a k-controlled gate exactly as cheap as the
uncontrolled one. A circuit can be compiled once into per-gate index plans
(`CompiledCircuit`) and re-applied many times, which is what makes repeated
Grover powers affordable.

Shot sampling is sequential and vectorized from a single seeded stream, so
counts are bit-identical for a given seed no matter how the surrounding
code is parallelized.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, GateKind
from .errors import CapacityError, InvariantError

DEFAULT_MAX_QUBITS = 26
MAX_QUBITS_ENV = "QTRANSPORT_MAX_QUBITS"


def engine_max_qubits() -> int:
    """Qubit ceiling: QTRANSPORT_MAX_QUBITS overrides the default of 26."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    return int(raw) if raw else DEFAULT_MAX_QUBITS


@dataclass
class Statevector:
    """2^n complex amplitudes plus the register map of the circuit that made it."""

    amplitudes: np.ndarray
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)

    @property
    def qubit_count(self) -> int:
        return int(len(self.amplitudes)).bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(n: int, registers: dict[str, tuple[int, ...]] | None = None) -> Statevector:
    """|0...0> on n qubits; rejects n outside [1, engine ceiling]."""
    if n < 1:
        raise InvariantError("need at least one qubit")
    ceiling = engine_max_qubits()
    if n > ceiling:
        raise CapacityError(f"{n} qubits exceeds the configured ceiling of {ceiling}")
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[0] = 1.0
    return Statevector(amplitudes, dict(registers or {}))


def _control_mask(indices: np.ndarray, controls) -> np.ndarray:
    ok = np.ones(len(indices), dtype=bool)
    for q, positive in controls:
        bit = (indices >> q) & 1
        ok &= bit.astype(bool) if positive else ~bit.astype(bool)
    return ok


# Op codes for compiled gates: (code, payload...)
_PAIR, _XSWAP, _PHASE, _SWAP = range(4)


def _compile_gate(gate: Gate, indices: np.ndarray):
    kind = gate.kind
    if kind is GateKind.SWAP:
        t1, t2 = gate.targets
        sel = _control_mask(indices, gate.controls)
        sel &= ((indices >> t1) & 1).astype(bool)
        sel &= ~((indices >> t2) & 1).astype(bool)
        ia = indices[sel]
        ib = ia - (1 << t1) + (1 << t2)
        return (_SWAP, ia, ib)
    t = gate.targets[0]
    if kind is GateKind.PHASE_SHIFT:
        sel = _control_mask(indices, gate.controls)
        sel &= ((indices >> t) & 1).astype(bool)
        return (_PHASE, indices[sel], np.exp(1j * gate.angle))
    sel = _control_mask(indices, gate.controls)
    sel &= ~((indices >> t) & 1).astype(bool)
    i0 = indices[sel]
    i1 = i0 + (1 << t)
    if kind is GateKind.PAULI_X:
        return (_XSWAP, i0, i1)
    if kind is GateKind.HADAMARD:
        s = 1.0 / np.sqrt(2.0)
        return (_PAIR, i0, i1, s, s, s, -s)
    if kind is GateKind.ROT_Y:
        c, s = np.cos(gate.angle / 2.0), np.sin(gate.angle / 2.0)
        return (_PAIR, i0, i1, c, -s, s, c)
    raise InvariantError(f"unknown gate kind {kind}")


class CompiledCircuit:
    """Per-gate index plans for repeated application of one circuit."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        indices = np.arange(1 << circuit.qubit_count, dtype=np.int64)
        self._ops = [_compile_gate(g, indices) for g in circuit.gates]

    def run_inplace(self, amplitudes: np.ndarray) -> None:
        for op in self._ops:
            code = op[0]
            if code == _PAIR:
                _, i0, i1, u00, u01, u10, u11 = op
                a0 = amplitudes[i0]
                a1 = amplitudes[i1]
                amplitudes[i0] = u00 * a0 + u01 * a1
                amplitudes[i1] = u10 * a0 + u11 * a1
            elif code == _XSWAP:
                _, i0, i1 = op
                amplitudes[i0], amplitudes[i1] = amplitudes[i1], amplitudes[i0]
            elif code == _PHASE:
                _, idx, factor = op
                amplitudes[idx] *= factor
            else:
                _, ia, ib = op
                amplitudes[ia], amplitudes[ib] = amplitudes[ib], amplitudes[ia]


def apply(state: Statevector, circuit: Circuit) -> Statevector:
    """Run a circuit on a state, returning the new state (input untouched)."""
    if circuit.qubit_count != state.qubit_count:
        raise InvariantError(
            f"circuit has {circuit.qubit_count} qubits, state has {state.qubit_count}"
        )
    amplitudes = state.amplitudes.copy()
    CompiledCircuit(circuit).run_inplace(amplitudes)
    result = Statevector(amplitudes, {**state.registers, **dict(circuit.registers)})
    assert abs(result.norm() - 1.0) < 1e-9, "statevector norm drifted"
    return result


def marginal(state: Statevector, register: str) -> np.ndarray:
    """Probability of each integer value of a named register (length 2^width)."""
    if register not in state.registers:
        raise InvariantError(f"unknown register {register!r}")
    qubits = state.registers[register]
    probs = np.abs(state.amplitudes) ** 2
    if not qubits:
        return np.array([probs.sum()])
    indices = np.arange(len(probs), dtype=np.int64)
    values = np.zeros(len(probs), dtype=np.int64)
    for place, q in enumerate(qubits):
        values |= ((indices >> q) & 1) << place
    return np.bincount(values, weights=probs, minlength=1 << len(qubits))


def flag_probability(state: Statevector, qubit: int) -> float:
    """Probability that the given qubit reads |1>."""
    if not 0 <= qubit < state.qubit_count:
        raise InvariantError(f"qubit {qubit} out of range")
    indices = np.arange(len(state.amplitudes), dtype=np.int64)
    mask = ((indices >> qubit) & 1).astype(bool)
    return float(np.sum(np.abs(state.amplitudes[mask]) ** 2))


def sample(state: Statevector, which: str | int, shots: int, seed: int) -> np.ndarray:
    """Counts of measurement outcomes of a register (by name) or single qubit.

    Outcomes are drawn i.i.d. from the exact probabilities; identical seeds
    give identical counts.
    """
    if shots < 1:
        raise InvariantError("shots must be >= 1")
    if isinstance(which, str):
        probs = marginal(state, which)
    else:
        p1 = flag_probability(state, which)
        probs = np.array([1.0 - p1, p1])
    cdf = np.cumsum(probs)
    u = np.random.default_rng(seed).random(shots)
    outcomes = np.searchsorted(cdf, u, side="right")
    outcomes = np.minimum(outcomes, len(probs) - 1)
    return np.bincount(outcomes, minlength=len(probs))
