"""Cost functions, parameter-shift gradients, Adam loop, and the
optimal-depth scan with its exponential extrapolation fit.

Gradient routes. The process-learning cost is, in every parameter, a pure
period-4pi sinusoid (each angle enters the controlled circuit once), so the
four-term shift rule differentiates it exactly. The eigendecomposition cost
contains a modulus, which no shift rule applied to the cost itself can
differentiate consistently; its gradient instead applies the two-term rule
to the separately measured real and imaginary overlap components (each a
period-2pi sinusoid, where the rule is exact) and chains through
|f| = sqrt(Re^2 + Im^2) classically.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ansatz import AnsatzSpec, ParamVector, Variant, build_unitary
from .estimator import EXACT, ShotPlan, ptvqc_overlap_real, uvqsvd_eigenphase
from .qcore import Rng, UnitaryMatrix, average_fidelity, haar_unitary, similarity

_SHIFT4_C1 = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_SHIFT4_C2 = (math.sqrt(2) - 1) / (4 * math.sqrt(2))


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("VQPT_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence) -> list:
    """Deterministic-order parallel map, capped by VQPT_THREADS."""
    workers = min(_worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Costs.


def cost_ptvqc(target: UnitaryMatrix, spec: AnsatzSpec, params: ParamVector,
               plan: ShotPlan = EXACT, model: UnitaryMatrix | None = None) -> float:
    """Interference cost 2^{1-n} sum_i (1 - Re<target i|circuit i>), in [0, 4]."""
    if spec.variant is not Variant.PTVQC:
        raise ValueError("cost_ptvqc requires the PTVQC variant")
    if model is None:
        model = build_unitary(spec, params)
    dim = 2 ** spec.n_qubits
    total = sum(1.0 - ptvqc_overlap_real(target, spec, params, i, plan, model=model)
                for i in range(dim))
    return total / 2 ** (spec.n_qubits - 1)


def cost_uvqsvd(target: UnitaryMatrix, spec: AnsatzSpec, params: ParamVector,
                plan: ShotPlan = EXACT, model: UnitaryMatrix | None = None) -> float:
    """Mean over the basis of 1 - |<i| circuit^dag target circuit |i>|, in [0, 1]."""
    if spec.variant is not Variant.UVQSVD:
        raise ValueError("cost_uvqsvd requires the UVQSVD variant")
    if model is None:
        model = build_unitary(spec, params)
    dim = 2 ** spec.n_qubits
    total = sum(1.0 - uvqsvd_eigenphase(target, spec, params, i, plan, model=model)[0]
                for i in range(dim))
    return total / dim


# ---------------------------------------------------------------------------
# Shift rules. Both take the cost as a plain callable of the parameter array.


def grad_shift4(cost: Callable[[np.ndarray], float], values: np.ndarray, index: int) -> float:
    """Four-term rule, exact for costs of the form
    a + b cos(theta/2 + u) + c cos(theta + v)."""

    def at(delta: float) -> float:
        shifted = np.array(values, dtype=np.float64)
        shifted[index] += delta
        return cost(shifted)

    return (_SHIFT4_C1 * (at(np.pi / 2) - at(-np.pi / 2))
            - _SHIFT4_C2 * (at(1.5 * np.pi) - at(-1.5 * np.pi)))


def grad_shift2(cost: Callable[[np.ndarray], float], values: np.ndarray, index: int) -> float:
    """Two-term rule (C(+pi/2) - C(-pi/2)) / 2, exact for period-2pi sinusoids."""

    def at(delta: float) -> float:
        shifted = np.array(values, dtype=np.float64)
        shifted[index] += delta
        return cost(shifted)

    return 0.5 * (at(np.pi / 2) - at(-np.pi / 2))


def gradient_ptvqc(target: UnitaryMatrix, spec: AnsatzSpec, values: np.ndarray,
                   plan: ShotPlan = EXACT) -> np.ndarray:
    """Full gradient of the process-learning cost via the four-term rule."""

    def cost(theta: np.ndarray) -> float:
        return cost_ptvqc(target, spec, ParamVector(theta), plan)

    indices = list(range(len(values)))
    if plan.shots == 0:
        comps = _pmap(lambda i: grad_shift4(cost, values, i), indices)
    else:  # shot mode shares one rng; keep the draw order sequential
        comps = [grad_shift4(cost, values, i) for i in indices]
    return np.asarray(comps, dtype=np.float64)


def _overlap_components(target: UnitaryMatrix, spec: AnsatzSpec, theta: np.ndarray,
                        plan: ShotPlan) -> np.ndarray:
    params = ParamVector(theta)
    model = build_unitary(spec, params)
    dim = 2 ** spec.n_qubits
    out = np.empty(dim, dtype=np.complex128)
    for i in range(dim):
        mag, phase = uvqsvd_eigenphase(target, spec, params, i, plan, model=model)
        out[i] = mag * np.exp(1j * phase)
    return out


def gradient_uvqsvd(target: UnitaryMatrix, spec: AnsatzSpec, values: np.ndarray,
                    plan: ShotPlan = EXACT) -> np.ndarray:
    """Gradient of the eigendecomposition cost.

    Applies the two-term rule to the measured Re/Im overlap components and
    chains through the modulus; the zero-modulus subgradient is taken as 0.
    """
    dim = 2 ** spec.n_qubits
    base = _overlap_components(target, spec, values, plan)
    base_abs = np.abs(base)
    safe = np.where(base_abs < 1e-12, 1.0, base_abs)

    def component(i: int) -> float:
        plus = np.array(values)
        plus[i] += np.pi / 2
        minus = np.array(values)
        minus[i] -= np.pi / 2
        f_plus = _overlap_components(target, spec, plus, plan)
        f_minus = _overlap_components(target, spec, minus, plan)
        d_re = 0.5 * (f_plus.real - f_minus.real)
        d_im = 0.5 * (f_plus.imag - f_minus.imag)
        d_abs = np.where(base_abs < 1e-12, 0.0,
                         (base.real * d_re + base.imag * d_im) / safe)
        return float(-np.sum(d_abs) / dim)

    indices = list(range(len(values)))
    if plan.shots == 0:
        comps = _pmap(component, indices)
    else:
        comps = [component(i) for i in indices]
    return np.asarray(comps, dtype=np.float64)


# ---------------------------------------------------------------------------
# Adam.


@dataclass
class AdamState:
    learning_rate: float = 0.1
    beta1: float = 0.8
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    step: int = 0


def adam_step(state: AdamState, values: np.ndarray, grad: np.ndarray) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; purely functional and deterministic."""
    if state.m is None:
        state = AdamState(state.learning_rate, state.beta1, state.beta2, state.eps,
                          np.zeros_like(values), np.zeros_like(values), 0)
    if state.m.shape != values.shape or grad.shape != values.shape:
        raise ValueError("moment/parameter/gradient lengths disagree")
    t = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad ** 2
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    new_values = values - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return AdamState(state.learning_rate, state.beta1, state.beta2, state.eps, m, v, t), new_values


# ---------------------------------------------------------------------------
# Training loop.


@dataclass
class TraceRecord:
    iteration: int
    cost: float
    fidelity: float
    similarity: float
    elapsed_ms: float


@dataclass
class TrainConfig:
    max_iters: int = 100
    cost_threshold: float = 0.10
    learning_rate: float = 0.1
    plan: ShotPlan = field(default_factory=lambda: EXACT)
    seed: int = 0


@dataclass
class TrainTrace:
    records: list[TraceRecord]
    final_params: ParamVector
    metadata: dict
    reached: bool
    iterations_to_threshold: int | None
    aborted: bool = False
    abort_reason: str | None = None

    CSV_COLUMNS = ("iteration", "cost", "fidelity", "similarity")

    def write_csv(self, path) -> None:
        lines = [",".join(self.CSV_COLUMNS)]
        for r in self.records:
            lines.append(f"{r.iteration},{r.cost!r},{r.fidelity!r},{r.similarity!r}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _trace_metrics(algorithm: str, target: UnitaryMatrix, model: UnitaryMatrix) -> tuple[float, float]:
    if algorithm == "ptvqc":
        fid = average_fidelity(target, model)
    else:
        # learned eigenvector quality: mean |<i| model^dag target model |i>|^2
        m = model.mat.conj().T @ target.mat @ model.mat
        fid = float(np.mean(np.abs(np.diagonal(m)) ** 2))
    return fid, similarity(target, model)


def train(algorithm: str, target: UnitaryMatrix, spec: AnsatzSpec,
          config: TrainConfig) -> TrainTrace:
    """Full-gradient Adam minimization with per-iteration bookkeeping.

    Angles start uniform on [0, 2 pi) from the seeded stream. The trace gets
    one record per evaluated iterate (including the initial one); training
    stops once the cost drops to the threshold or the iteration cap is hit.
    A non-finite cost aborts with a diagnostic instead of raising.
    """
    if algorithm not in ("ptvqc", "uvqsvd"):
        raise ValueError("algorithm must be 'ptvqc' or 'uvqsvd'")
    want = Variant.PTVQC if algorithm == "ptvqc" else Variant.UVQSVD
    if spec.variant is not want:
        raise ValueError(f"spec variant {spec.variant.value} does not match {algorithm}")

    rng = Rng(config.seed)
    values = rng.uniform(0.0, 2.0 * np.pi, spec.n_params)
    cost_fn = cost_ptvqc if algorithm == "ptvqc" else cost_uvqsvd
    grad_fn = gradient_ptvqc if algorithm == "ptvqc" else gradient_uvqsvd

    meta = {
        "algorithm": algorithm,
        "seed": config.seed,
        "n": spec.n_qubits,
        "d": spec.depth,
        "variant": spec.variant.value,
        "shots": config.plan.shots,
        "learning_rate": config.learning_rate,
        "cost_threshold": config.cost_threshold,
        "max_iters": config.max_iters,
    }
    records: list[TraceRecord] = []
    adam = AdamState(learning_rate=config.learning_rate)
    start = time.perf_counter()
    reached = False
    hit_iteration: int | None = None
    aborted = False
    reason = None

    for iteration in range(config.max_iters + 1):
        params = ParamVector(values)
        model = build_unitary(spec, params)
        cost = cost_fn(target, spec, params, config.plan, model=model)
        if not math.isfinite(cost):
            aborted, reason = True, f"non-finite cost at iteration {iteration}"
            break
        fid, sim = _trace_metrics(algorithm, target, model)
        elapsed = (time.perf_counter() - start) * 1e3
        records.append(TraceRecord(iteration, float(cost), fid, sim, elapsed))
        if cost <= config.cost_threshold:
            reached, hit_iteration = True, iteration
            break
        if iteration == config.max_iters:
            break
        grad = grad_fn(target, spec, values, config.plan)
        adam, values = adam_step(adam, values, grad)

    return TrainTrace(records, ParamVector(values), meta, reached, hit_iteration,
                      aborted, reason)


# ---------------------------------------------------------------------------
# Depth scan.


@dataclass
class DepthScanResult:
    algorithm: str
    n_qubits: int
    depths: list[int]
    iterations: dict[int, list[int]]      # depth -> per-target iterations-to-threshold
    reached: dict[int, list[bool]]        # depth -> per-target success flags
    aggregate: dict[int, float]           # depth -> mean (ptvqc) or max (uvqsvd)
    resource: dict[int, float]            # depth -> depth * aggregate
    d_opt: int
    cost_threshold: float
    max_iters: int

    RUNS_COLUMNS = ("depth", "target", "iterations", "reached")
    SUMMARY_COLUMNS = ("depth", "aggregate_iterations", "resource", "is_opt")

    def write_runs_csv(self, path) -> None:
        lines = [",".join(self.RUNS_COLUMNS)]
        for d in self.depths:
            for t, (iters, ok) in enumerate(zip(self.iterations[d], self.reached[d])):
                lines.append(f"{d},{t},{iters},{int(ok)}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def write_summary_csv(self, path) -> None:
        lines = [",".join(self.SUMMARY_COLUMNS)]
        for d in self.depths:
            lines.append(f"{d},{self.aggregate[d]!r},{self.resource[d]!r},{int(d == self.d_opt)}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def depth_scan(algorithm: str, n_qubits: int, depths: Sequence[int],
               n_targets: int = 10, cost_threshold: float = 0.10,
               max_iters: int = 100, learning_rate: float = 0.1,
               plan: ShotPlan = EXACT, seed: int = 0) -> DepthScanResult:
    """Train each (depth, target) pair to the threshold and pick the depth
    minimizing depth x aggregated iterations.

    The per-target iterations aggregate as the mean for process learning and
    as the maximum for the eigendecomposition variant. Runs that never reach
    the threshold contribute the iteration cap (failures are data, not
    errors).
    """
    depths = sorted(set(int(d) for d in depths))
    if not depths:
        raise ValueError("depth range is empty")
    variant = Variant.PTVQC if algorithm == "ptvqc" else Variant.UVQSVD
    master = Rng(seed)
    targets = [haar_unitary(2 ** n_qubits, master.child(0, t)) for t in range(n_targets)]

    iterations: dict[int, list[int]] = {}
    reached: dict[int, list[bool]] = {}
    for d in depths:
        spec = AnsatzSpec(n_qubits, d, variant)
        iters_d: list[int] = []
        ok_d: list[bool] = []
        for t, target in enumerate(targets):
            cfg = TrainConfig(max_iters=max_iters, cost_threshold=cost_threshold,
                              learning_rate=learning_rate, plan=plan,
                              seed=master.derive_seed(1, d, t))
            trace = train(algorithm, target, spec, cfg)
            ok = trace.reached and not trace.aborted
            iters_d.append(trace.iterations_to_threshold if ok else max_iters)
            ok_d.append(ok)
        iterations[d] = iters_d
        reached[d] = ok_d

    aggregate = {}
    for d in depths:
        vals = np.asarray(iterations[d], dtype=np.float64)
        aggregate[d] = float(vals.mean() if algorithm == "ptvqc" else vals.max())
    resource = {d: d * aggregate[d] for d in depths}
    # A depth at which nothing ever reached the threshold cannot "suffice";
    # all-failure depths only win the argmin through the iteration cap, so
    # they are excluded whenever any depth shows a success.
    feasible = [d for d in depths if any(reached[d])]
    d_opt = min(feasible or depths, key=lambda d: (resource[d], d))
    return DepthScanResult(algorithm, n_qubits, depths, iterations, reached,
                           aggregate, resource, d_opt, cost_threshold, max_iters)


# ---------------------------------------------------------------------------
# Exponential fit for the depth-vs-size extrapolation.


@dataclass
class ExpFit:
    a: float
    b: float
    c: float
    residual: float  # RMS of the pointwise residuals
    converged: bool

    def predict(self, n) -> np.ndarray:
        return self.a * np.exp(self.b * np.asarray(n, dtype=np.float64)) + self.c


def _fit_initial_guess(ns: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    diffs = np.diff(ys)
    usable = np.abs(diffs) > 1e-12
    if usable.sum() >= 2:
        # y = a e^{bn} + c  =>  log |dy| is linear in n with slope b
        ln = np.log(np.abs(diffs[usable]))
        xs = ns[:-1][usable]
        b0 = float(np.polyfit(xs, ln, 1)[0])
        b0 = float(np.clip(b0, -5.0, 5.0))
        if abs(b0) < 1e-6:
            b0 = 1e-3
        dn = ns[1] - ns[0]
        denom = math.exp(b0 * ns[0]) * (math.exp(b0 * dn) - 1.0)
        a0 = float(diffs[0] / denom) if abs(denom) > 1e-12 else 0.0
    else:
        a0, b0 = 0.0, 1e-3
    c0 = float(np.mean(ys - a0 * np.exp(b0 * ns)))
    return a0, b0, c0


def fit_exponential(points: Sequence[tuple[float, float]], max_iters: int = 1000) -> ExpFit:
    """Least-squares fit of y = a e^{bn} + c by damped Gauss-Newton,
    initialized from log-differenced estimates."""
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    pts = sorted(points)
    ns = np.asarray([float(n) for n, _ in pts])
    ys = np.asarray([float(y) for _, y in pts])
    a, b, c = _fit_initial_guess(ns, ys)

    def residuals(a, b, c):
        return a * np.exp(np.clip(b * ns, -500, 500)) + c - ys

    lam = 1e-3
    r = residuals(a, b, c)
    sse = float(r @ r)
    converged = False
    for _ in range(max_iters):
        e = np.exp(np.clip(b * ns, -500, 500))
        jac = np.column_stack([e, a * ns * e, np.ones_like(ns)])
        g = jac.T @ r
        if np.linalg.norm(g) < 1e-12:
            converged = True
            break
        jtj = jac.T @ jac
        try:
            step = np.linalg.solve(jtj + lam * np.diag(np.maximum(np.diagonal(jtj), 1e-12)), -g)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        a2, b2, c2 = a + step[0], b + step[1], c + step[2]
        r2 = residuals(a2, b2, c2)
        sse2 = float(r2 @ r2)
        if sse2 < sse:
            if sse - sse2 < 1e-15 * (1 + sse):
                a, b, c, r, sse = a2, b2, c2, r2, sse2
                converged = True
                break
            a, b, c, r, sse = a2, b2, c2, r2, sse2
            lam = max(lam / 10, 1e-12)
        else:
            lam *= 10
            if lam > 1e12:
                break
    return ExpFit(float(a), float(b), float(c), float(math.sqrt(sse / len(ns))), converged)
