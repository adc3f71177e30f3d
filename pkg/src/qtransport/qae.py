"""Amplitude estimation over the transport circuit.

The state-preparation operator A is the transport circuit followed by a
predicate oracle that flips a dedicated flag qubit when the position
register satisfies the predicate, so the flag's |1> probability is exactly
the probability being estimated. The Grover operator Q = A S0 A^-1 S_chi
rotates that amplitude; measuring the flag after Q^m A|0> sees probability
sin^2((2m+1) theta) with theta = arcsin sqrt(p).

Estimation is maximum-likelihood over a schedule of Grover powers: shot
counts at each power are fused into one likelihood over theta, maximized on
a dense grid with local refinement. Oracle-call accounting: each A or A^-1
counts as one call, so a shot at power m costs 2m+1 calls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, compose, inverse, phase_shift, x
from .errors import PredicateError
from .sim import CompiledCircuit, zero_state
from .transport import TransportCircuit, TransportProblem, _region_flag_gates

GEQ, EQ, REGION2 = "geq", "eq", "region2"


@dataclass(frozen=True)
class Predicate:
    """Position predicate to estimate: x >= 2^k, x == v, or "in region 2"."""

    kind: str
    value: int | None = None

    @classmethod
    def geq(cls, threshold: int) -> "Predicate":
        return cls(GEQ, threshold)

    @classmethod
    def eq(cls, value: int) -> "Predicate":
        return cls(EQ, value)

    @classmethod
    def region2(cls) -> "Predicate":
        return cls(REGION2)

    def __str__(self) -> str:
        return self.kind if self.kind == REGION2 else f"{self.kind}:{self.value}"


def parse_predicate(text: str) -> Predicate:
    """Parse the CLI grammar: geq:K, eq:V, or region2."""
    if text == REGION2:
        return Predicate.region2()
    kind, sep, raw = text.partition(":")
    if not sep or kind not in (GEQ, EQ):
        raise PredicateError(f"unknown predicate {text!r}; expected geq:K, eq:V, or region2")
    try:
        value = int(raw)
    except ValueError:
        raise PredicateError(f"predicate value {raw!r} is not an integer") from None
    return Predicate(kind, value)


def _resolve_threshold(pred: Predicate, problem: TransportProblem) -> Predicate:
    if pred.kind == REGION2:
        return Predicate.geq(problem.boundary)
    return pred


def predicate_mask(pred: Predicate, problem: TransportProblem) -> np.ndarray:
    """Boolean mask over position values selected by the predicate."""
    pred = _resolve_threshold(pred, problem)
    positions = np.arange(problem.position_count)
    if pred.kind == GEQ:
        _check_geq(pred.value, problem.x_qubits)
        return positions >= pred.value
    _check_eq(pred.value, problem.x_qubits)
    return positions == pred.value


def _check_geq(threshold, width: int) -> None:
    if threshold is None or threshold <= 0 or threshold & (threshold - 1):
        raise PredicateError(f"geq threshold must be a power of two, got {threshold}")
    if threshold >= (1 << width):
        raise PredicateError(f"geq threshold {threshold} not below 2^{width}")


def _check_eq(value, width: int) -> None:
    if value is None or not 0 <= value < (1 << width):
        raise PredicateError(f"eq value {value} outside the position register")


def build_flag_oracle(tc: TransportCircuit, pred: Predicate) -> Circuit:
    """Circuit flipping the flag qubit iff the X register satisfies the predicate."""
    pred = _resolve_threshold(pred, tc.problem)
    x_register, flag = tc.x_register, tc.flag_qubit
    if pred.kind == GEQ:
        _check_geq(pred.value, len(x_register))
        gates = _region_flag_gates(x_register, pred.value, flag)
    else:
        _check_eq(pred.value, len(x_register))
        controls = [(q, bool((pred.value >> i) & 1)) for i, q in enumerate(x_register)]
        gates = [x(flag, controls)]
    return Circuit(tc.circuit.qubit_count, tuple(gates), tc.circuit.registers)


def build_a_operator(tc: TransportCircuit, pred: Predicate) -> Circuit:
    """A = transport circuit then predicate oracle."""
    return compose(tc.circuit, build_flag_oracle(tc, pred))


def build_grover_operator(a: Circuit, flag: int) -> Circuit:
    """Q = A S0 A^-1 S_chi as a gate sequence (S_chi applied first).

    S_chi is a Z on the flag; S0 flips the sign of the all-zeros state via
    an X-conjugated phase flip negatively controlled on every other qubit.
    """
    n = a.qubit_count
    s_chi = Circuit(n, (phase_shift(math.pi, flag),))
    s0 = Circuit(
        n,
        (
            x(0),
            phase_shift(math.pi, 0, [(q, False) for q in range(1, n)]),
            x(0),
        ),
    )
    return compose(s_chi, inverse(a), s0, a)


def _flag_mask(n: int, flag: int) -> np.ndarray:
    indices = np.arange(1 << n, dtype=np.int64)
    return ((indices >> flag) & 1).astype(bool)


def exact_amplitude(a: Circuit, flag: int) -> float:
    """Flag |1> probability of A|0>, bypassing estimation."""
    amps = zero_state(a.qubit_count).amplitudes
    CompiledCircuit(a).run_inplace(amps)
    return float(np.sum(np.abs(amps[_flag_mask(a.qubit_count, flag)]) ** 2))


def grover_flag_probabilities(a: Circuit, flag: int, powers) -> np.ndarray:
    """Exact flag probabilities after Q^m A|0> for each requested power m."""
    powers = list(powers)
    n = a.qubit_count
    mask = _flag_mask(n, flag)
    compiled_a = CompiledCircuit(a)
    compiled_q = CompiledCircuit(build_grover_operator(a, flag))
    amps = zero_state(n).amplitudes
    compiled_a.run_inplace(amps)
    current = 0
    probs = []
    for m in sorted(set(powers)):
        if m < 0:
            raise PredicateError("Grover powers must be nonnegative")
        while current < m:
            compiled_q.run_inplace(amps)
            current += 1
        probs.append((m, float(np.sum(np.abs(amps[mask]) ** 2))))
    by_power = dict(probs)
    return np.array([by_power[m] for m in powers])


@dataclass
class QaeEstimate:
    """MLQAE result with oracle-call accounting."""

    p_hat: float
    theta_hat: float
    total_oracle_calls: int
    schedule: tuple[int, ...]
    shots_per_power: int
    hits: tuple[int, ...]
    log_likelihood_curve: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "theta_hat": self.theta_hat,
            "total_oracle_calls": self.total_oracle_calls,
            "schedule": list(self.schedule),
            "shots_per_power": self.shots_per_power,
            "hits": list(self.hits),
        }


def oracle_calls(schedule, shots_per_power: int) -> int:
    return sum(shots_per_power * (2 * m + 1) for m in schedule)


def _log_likelihood(theta: np.ndarray, powers, shots, hits) -> np.ndarray:
    tiny = 1e-300
    ll = np.zeros_like(theta)
    for m, s, hit in zip(powers, shots, hits):
        amplified = (2 * m + 1) * theta
        sin2 = np.sin(amplified) ** 2
        if hit > 0:
            ll = ll + hit * np.log(np.maximum(sin2, tiny))
        if s - hit > 0:
            ll = ll + (s - hit) * np.log(np.maximum(1.0 - sin2, tiny))
    return ll


def max_likelihood_theta(powers, shots, hits, grid_points: int = 100_000) -> float:
    """Argmax of the fused likelihood over theta in [0, pi/2]: dense grid
    then two rounds of local refinement."""
    lo, hi = 0.0, math.pi / 2
    points = grid_points
    best = 0.0
    for _ in range(3):
        grid = np.linspace(lo, hi, points + 1)
        ll = _log_likelihood(grid, powers, shots, hits)
        i = int(np.argmax(ll))
        best = float(grid[i])
        step = (hi - lo) / points
        lo, hi = max(0.0, best - step), min(math.pi / 2, best + step)
        points = 1000
    return best


def mlqae_estimate(
    a: Circuit,
    flag: int,
    schedule,
    shots_per_power: int,
    seed: int,
    grid_points: int = 100_000,
    keep_curve: bool = False,
) -> QaeEstimate:
    """Maximum-likelihood amplitude estimation from simulated flag counts.

    For each Grover power in the schedule the flag is measured
    `shots_per_power` times (counts drawn from the exact simulated
    probability), and all counts are fused into one likelihood.
    """
    schedule = tuple(int(m) for m in schedule)
    if not schedule:
        raise PredicateError("schedule must be non-empty")
    if shots_per_power < 1:
        raise PredicateError("shots_per_power must be >= 1")
    probs = np.clip(grover_flag_probabilities(a, flag, schedule), 0.0, 1.0)
    rng = np.random.default_rng(seed)
    hits = tuple(int(rng.binomial(shots_per_power, p)) for p in probs)
    shots = [shots_per_power] * len(schedule)
    if all(hit == 0 for hit in hits):
        theta = 0.0
    elif all(hit == shots_per_power for hit in hits):
        theta = math.pi / 2
    else:
        theta = max_likelihood_theta(schedule, shots, hits, grid_points)
    curve = None
    if keep_curve:
        grid = np.linspace(0.0, math.pi / 2, 2001)
        curve = (grid, _log_likelihood(grid, schedule, shots, hits))
    return QaeEstimate(
        p_hat=math.sin(theta) ** 2,
        theta_hat=theta,
        total_oracle_calls=oracle_calls(schedule, shots_per_power),
        schedule=schedule,
        shots_per_power=shots_per_power,
        hits=hits,
        log_likelihood_curve=curve,
    )


def exponential_schedule(max_exponent: int) -> tuple[int, ...]:
    """Powers 2^0 .. 2^max_exponent."""
    if max_exponent < 0:
        raise PredicateError("schedule exponent must be >= 0")
    return tuple(1 << k for k in range(max_exponent + 1))
