"""Phase-estimation authentication token: challenge generation and
verification rounds, plus the three-actor forgery experiment.

A token instance is a Haar-sampled unitary on t target qubits probed
through textbook phase estimation with a ancilla qubits: uniform
superposition on the ancillas, a controlled-U^{2^j} ladder, inverse
Fourier transform, full ancilla measurement. Generation records the
classical outcome k and the post-measurement target state; verification
reruns the circuit on a submitted state and scores the circular deviation
between the two outcomes, normalized to [0, 1/2].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import AnsatzSpec, Variant, apply_ansatz, build_unitary
from .estimator import EXACT, ShotPlan, uvqsvd_eigenphase
from .qcore import (
    Rng,
    StateVector,
    UnitaryMatrix,
    _apply_controlled_kernel,
    _apply_gate_kernel,
    h,
    haar_unitary,
    is_unitary,
    qft,
)
from .training import TrainConfig, TrainTrace, train


@dataclass
class QpufInstance:
    """Token (U, t, a); target qubits occupy indices 0..t-1, ancillas above."""

    t: int
    a: int
    unitary: UnitaryMatrix
    seed: int = 0
    _qpe: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.t < 1 or self.a < 1:
            raise ValueError("need at least one target and one ancilla qubit")
        if self.unitary.dim != 2 ** self.t:
            raise ValueError("unitary dimension does not match t")
        if not is_unitary(self.unitary):
            raise ValueError("instance operator failed the unitarity check")

    @property
    def n_total(self) -> int:
        return self.t + self.a

    def qpe_matrix(self) -> np.ndarray:
        """Full circuit operator, built once and cached."""
        if self._qpe is None:
            n = self.n_total
            targets = list(range(self.t))
            m = np.eye(2 ** n, dtype=np.complex128)
            h_mat = h().mat
            for j in range(self.a):
                m = _apply_gate_kernel(m, h_mat, [self.t + j], n)
            power = self.unitary
            for j in range(self.a):
                m = _apply_controlled_kernel(m, power.mat, targets, self.t + j, 1, n)
                power = power @ power
            iqft = qft(self.a).dagger()
            m = _apply_gate_kernel(m, iqft.mat, [self.t + j for j in range(self.a)], n)
            self._qpe = m
        return self._qpe


def circular_deviation(k: int, k_prime: int, modulus: int) -> float:
    """Wrap-around distance |k - k'| on Z_modulus, normalized to [0, 1/2]."""
    d = abs(int(k) - int(k_prime)) % modulus
    return min(d, modulus - d) / modulus


def outcome_distribution(instance: QpufInstance, input_state: StateVector) -> np.ndarray:
    """Exact probability of each ancilla outcome k for the given input."""
    if input_state.n_qubits != instance.t:
        raise ValueError("input state must live on the target register")
    full = np.zeros(2 ** instance.n_total, dtype=np.complex128)
    full[: 2 ** instance.t] = input_state.amps  # ancillas start in |0...0>
    full = instance.qpe_matrix() @ full
    blocks = full.reshape(2 ** instance.a, 2 ** instance.t)
    return np.sum(np.abs(blocks) ** 2, axis=1)


def qpe_round(instance: QpufInstance, input_state: StateVector,
              rng: Rng) -> tuple[int, StateVector]:
    """One phase-estimation round: sample k from the exact outcome
    distribution and return it with the renormalized post-measurement
    target state."""
    if input_state.n_qubits != instance.t:
        raise ValueError("input state must live on the target register")
    full = np.zeros(2 ** instance.n_total, dtype=np.complex128)
    full[: 2 ** instance.t] = input_state.amps
    full = instance.qpe_matrix() @ full
    blocks = full.reshape(2 ** instance.a, 2 ** instance.t)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    k = rng.choice_index(2 ** instance.a, probs)
    post = blocks[k] / np.linalg.norm(blocks[k])
    return k, StateVector(instance.t, post)


@dataclass
class ChallengeRecord:
    k: int
    post_state: StateVector
    k_prime: int | None = None
    deviation: float | None = None


def generation(instance: QpufInstance, rng: Rng,
               initial_state: StateVector | None = None) -> ChallengeRecord:
    """Initialization round; default input is |0...0> on the target register."""
    state = initial_state if initial_state is not None else StateVector.zero(instance.t)
    k, post = qpe_round(instance, state, rng)
    return ChallengeRecord(k=k, post_state=post)


def verification(instance: QpufInstance, submitted_state: StateVector, k: int,
                 rng: Rng) -> tuple[int, float]:
    """One verification round on a submitted state; returns (k', deviation)."""
    k_prime, _ = qpe_round(instance, submitted_state, rng)
    return k_prime, circular_deviation(k, k_prime, 2 ** instance.a)


def haar_state(n_qubits: int, rng: Rng) -> StateVector:
    """Haar-random pure state (first column of a Haar unitary)."""
    amps = rng.standard_normal(2 ** n_qubits) + 1j * rng.standard_normal(2 ** n_qubits)
    return StateVector(n_qubits, amps / np.linalg.norm(amps))


# ---------------------------------------------------------------------------
# Eigendecomposition attack.


@dataclass
class LearnedEigenpairs:
    phases: np.ndarray                 # estimated eigenphases in [0, 2 pi)
    states: list[StateVector]          # matching learned eigenvectors
    trace: TrainTrace


def learn_eigenpairs(target: UnitaryMatrix, depth: int, config: TrainConfig) -> LearnedEigenpairs:
    """Run eigendecomposition training against the target and read out the
    learned (phase, eigenvector) set.

    Phase readout reuses the training measurement plan, so a shot-based
    adversary also carries shot noise into its phase estimates.
    """
    n = target.n_qubits
    spec = AnsatzSpec(n, depth, Variant.UVQSVD)
    trace = train("uvqsvd", target, spec, config)
    params = trace.final_params
    model = build_unitary(spec, params)
    phases = np.empty(2 ** n)
    states = []
    for i in range(2 ** n):
        _, phases[i] = uvqsvd_eigenphase(target, spec, params, i, config.plan, model=model)
        states.append(apply_ansatz(spec, params, StateVector.basis(n, i)))
    return LearnedEigenpairs(phases, states, trace)


def attack_uvqsvd(instance: QpufInstance, learned: LearnedEigenpairs, k: int) -> StateVector:
    """Submit the learned eigenvector whose phase fraction lies circularly
    closest to k / 2^a; ties break toward the lowest index."""
    if len(learned.states) == 0:
        raise ValueError("empty learned set")
    frac = k / 2 ** instance.a
    diffs = np.abs(learned.phases / (2 * np.pi) - frac) % 1.0
    dist = np.minimum(diffs, 1.0 - diffs)
    return learned.states[int(np.argmin(dist))]


# ---------------------------------------------------------------------------
# Three-actor experiment.

ACTORS = ("trusted", "random", "uvqsvd")


@dataclass
class AttackReport:
    t: int
    a: int
    actor: str
    mean_deviation: float
    std_deviation: float
    users: int
    forgeries: int
    failed_users: int = 0

    CSV_COLUMNS = ("t", "a", "actor", "mean_deviation", "std_deviation", "users", "forgeries")


def write_reports_csv(reports: Sequence[AttackReport], path) -> None:
    lines = [",".join(AttackReport.CSV_COLUMNS)]
    for r in reports:
        lines.append(f"{r.t},{r.a},{r.actor},{r.mean_deviation!r},{r.std_deviation!r},"
                     f"{r.users},{r.forgeries}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class ExperimentConfig:
    """Experiment knobs. The adversary defaults model a physical attacker:
    shot-based circuit estimates and the learning algorithm's own 0.10
    stopping threshold, rather than an idealized exact-expectation trainer."""

    users: int = 10
    actors: tuple[str, ...] = ACTORS
    forgeries_per_user: int | None = None   # default 25 * 2^a
    attacker_depth: dict[int, int] | None = None  # t -> ansatz depth
    attacker_iters: int = 300
    attacker_threshold: float = 0.20
    attacker_lr: float = 0.1
    attacker_shots: int = 1024              # 0 trains on exact expectations
    random_forger_haar: bool = False  # default sends |0...0>
    haar_generation_input: bool = False  # default generation input is |0...0>
    seed: int = 0


def _attacker_depth(config: ExperimentConfig, t: int) -> int:
    if config.attacker_depth and t in config.attacker_depth:
        return config.attacker_depth[t]
    return max(1, 2 * t)


def run_experiment(t_values: Sequence[int], a_values: Sequence[int],
                   config: ExperimentConfig) -> list[AttackReport]:
    """Grid of (t, a) cells; for every cell and user, sample a fresh token
    and score each actor over the configured number of forgery rounds.

    Per round, a fresh generation precedes the verification: the trusted
    actor submits the genuine post-measurement state, the uninformed forger
    submits |0...0> (or a Haar state when configured), and the informed
    forger submits the learned eigenvector matched to the revealed k.
    Users whose attacker training aborts are excluded from that actor's
    statistics and counted in the report.
    """
    for actor in config.actors:
        if actor not in ACTORS:
            raise ValueError(f"unknown actor {actor!r}")
    master = Rng(config.seed)
    reports: list[AttackReport] = []
    cells = [(t, a) for t in t_values for a in a_values]
    for cell_idx, (t, a) in enumerate(cells):
        forgeries = config.forgeries_per_user or 25 * 2 ** a
        per_actor: dict[str, list[float]] = {actor: [] for actor in config.actors}
        failed: dict[str, int] = {actor: 0 for actor in config.actors}
        for user in range(config.users):
            rng_u = master.child(cell_idx, user)
            target = haar_unitary(2 ** t, rng_u.child(0))
            instance = QpufInstance(t, a, target, seed=config.seed)
            learned = None
            if "uvqsvd" in config.actors:
                plan = (EXACT if config.attacker_shots == 0
                        else ShotPlan(config.attacker_shots, rng_u.child(1)))
                cfg = TrainConfig(max_iters=config.attacker_iters,
                                  cost_threshold=config.attacker_threshold,
                                  learning_rate=config.attacker_lr,
                                  plan=plan,
                                  seed=rng_u.derive_seed(2))
                learned = learn_eigenpairs(target, _attacker_depth(config, t), cfg)
            for actor_idx, actor in enumerate(config.actors):
                if actor == "uvqsvd" and learned is not None and learned.trace.aborted:
                    failed[actor] += 1
                    continue
                rng_actor = rng_u.child(10 + actor_idx)
                devs = np.empty(forgeries)
                for round_idx in range(forgeries):
                    gen_input = haar_state(t, rng_actor) if config.haar_generation_input else None
                    record = generation(instance, rng_actor, gen_input)
                    if actor == "trusted":
                        submitted = record.post_state
                    elif actor == "random":
                        submitted = (haar_state(t, rng_actor) if config.random_forger_haar
                                     else StateVector.zero(t))
                    else:
                        submitted = attack_uvqsvd(instance, learned, record.k)
                    _, devs[round_idx] = verification(instance, submitted, record.k, rng_actor)
                per_actor[actor].append(float(devs.mean()))
        for actor in config.actors:
            means = np.asarray(per_actor[actor])
            if means.size == 0:
                mean, std = float("nan"), float("nan")
            else:
                mean = float(means.mean())
                std = float(means.std(ddof=1)) if means.size > 1 else 0.0
            reports.append(AttackReport(t, a, actor, mean, std, config.users,
                                        forgeries, failed[actor]))
    return reports
