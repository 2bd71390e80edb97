"""Variational learning of unknown unitaries on an exact statevector
simulator, with an optimal-depth scan and a phase-estimation
authentication-token experiment."""

__version__ = "0.1.0"

from .qcore import (  # noqa: F401
    Rng,
    StateVector,
    UnitaryMatrix,
    apply_controlled,
    apply_gate,
    average_fidelity,
    fidelity_pure,
    haar_unitary,
    is_unitary,
    qft,
    similarity,
    standard_gates,
)
from .ansatz import AnsatzSpec, ParamVector, Variant, apply_ansatz, build_unitary  # noqa: F401
from .estimator import EXACT, ShotPlan, overlap_re_im, ptvqc_overlap_real, sample_bits, uvqsvd_eigenphase  # noqa: F401
from .training import (  # noqa: F401
    AdamState,
    DepthScanResult,
    ExpFit,
    TrainConfig,
    TrainTrace,
    adam_step,
    cost_ptvqc,
    cost_uvqsvd,
    depth_scan,
    fit_exponential,
    grad_shift2,
    grad_shift4,
    train,
)
from .qpuf import (  # noqa: F401
    AttackReport,
    ChallengeRecord,
    ExperimentConfig,
    QpufInstance,
    attack_uvqsvd,
    circular_deviation,
    generation,
    learn_eigenpairs,
    qpe_round,
    run_experiment,
    verification,
)
