"""Derivative-free maximization of the bilocality score over measurement settings.

The searches are numerical oracles for the closed forms in
:mod:`biloc.criteria` and exploration tools for measurements Bob could use
beyond an aligned Bell-state measurement.  Each restart draws its starting
point from its own generator seeded by ``(seed, restart_index)``; restarts
run in a thread pool (capped by ``BILOC_THREADS``) and are merged by
maximum, ties going to the lowest restart index.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels as K
from .network import (
    DichotomicSetting,
    biloc_score,
    born_distribution,
    canonical_bsm,
    compute_I,
    compute_J,
    measurement_after_unitary,
    score_from_IJ,
)
from .states import DomainError, TwoQubitState, pauli_decompose, unitary_of_rotation_vector

log = logging.getLogger(__name__)

MODES = {
    "fixed-bsm": K.FIXED_BSM,
    "general-bob": K.GENERAL_BOB,
    "two-input-bob": K.TWO_INPUT_BOB,
}
MODE_NAMES = {v: k for k, v in MODES.items()}

INITIAL_STEP = 0.5
GENERATOR_SCALE = 0.5
REFINE_STEP = 1e-4


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iterations: int = 2000
    tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")


@dataclass(frozen=True)
class SearchResult:
    s_best: float
    settings: np.ndarray
    mode: str
    converged: bool
    evaluations: int
    restart_scores: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "sBest": self.s_best,
            "mode": self.mode,
            "settings": self.settings.tolist(),
            "converged": self.converged,
            "evaluations": self.evaluations,
            "restartScores": list(self.restart_scores),
        }


def _thread_count() -> int:
    raw = os.environ.get("BILOC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer BILOC_THREADS=%r", raw)
    return os.cpu_count() or 1


def _tables(rho_ab: TwoQubitState, rho_bc: TwoQubitState):
    return (
        np.ascontiguousarray(pauli_decompose(rho_ab).full()),
        np.ascontiguousarray(pauli_decompose(rho_bc).full()),
    )


def random_start(mode: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Bloch directions (inverse CDF in cos theta) plus Gaussian Bob parameters."""
    u = rng.random((4, 2))
    theta = np.arccos(1.0 - 2.0 * u[:, 0])
    phi = 2.0 * np.pi * u[:, 1]
    angles = np.column_stack([theta, phi]).reshape(-1)
    bob = GENERATOR_SCALE * rng.standard_normal(K.N_PARAMS[mode] - K.N_SETTINGS)
    return np.concatenate([angles, bob])


def _run_restart(mode, t_ab, t_bc, start, config):
    xtol = math.sqrt(config.tolerance)
    x, f, _, evals, converged = K.nelder_mead(
        start, INITIAL_STEP, mode, t_ab, t_bc, K.PRODUCTS, K.GENERATORS,
        config.max_iterations, config.tolerance, xtol,
    )
    x, f, extra = K.coordinate_refine(x, f, REFINE_STEP, mode, t_ab, t_bc, K.PRODUCTS, K.GENERATORS)
    return x, -f, evals + extra, converged


def _search(mode: int, rho_ab, rho_bc, config: OptimizerConfig, warm_starts=()) -> SearchResult:
    t_ab, t_bc = _tables(rho_ab, rho_bc)
    starts = [np.asarray(w, dtype=float) for w in warm_starts]
    for r in range(config.restarts):
        starts.append(random_start(mode, np.random.default_rng([config.seed, r])))

    workers = min(_thread_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda s: _run_restart(mode, t_ab, t_bc, s, config), starts))
    else:
        outcomes = [_run_restart(mode, t_ab, t_bc, s, config) for s in starts]

    best = max(range(len(outcomes)), key=lambda k: (outcomes[k][1], -k))
    x, score, _, converged = outcomes[best]
    total = sum(o[2] for o in outcomes)
    if not converged:
        log.debug("best restart of %s search did not meet the simplex tolerance", MODE_NAMES[mode])
    return SearchResult(
        s_best=float(score),
        settings=x,
        mode=MODE_NAMES[mode],
        converged=bool(converged),
        evaluations=int(total),
        restart_scores=tuple(float(o[1]) for o in outcomes),
    )


def maximize_fixed_bsm(rho_ab: TwoQubitState, rho_bc: TwoQubitState, config: OptimizerConfig | None = None) -> SearchResult:
    """Best score with Bob restricted to a Bell-state measurement in rotated local frames (14 parameters)."""
    return _search(K.FIXED_BSM, rho_ab, rho_bc, config or OptimizerConfig())


def bsm_generator(params: np.ndarray) -> np.ndarray:
    """General-Bob generator coefficients reproducing a fixed-BSM parameter vector exactly."""
    h_left = params[K.N_SETTINGS : K.N_SETTINGS + 3]
    h_right = params[K.N_SETTINGS + 3 : K.N_SETTINGS + 6]
    coeffs = np.zeros((4, 4))
    coeffs[1:, 0] = h_left / 2.0
    coeffs[0, 1:] = h_right / 2.0
    return coeffs.reshape(16)[1:]


def generator_of_unitary(u: np.ndarray) -> np.ndarray:
    """Traceless generator coefficients ``g`` with ``exp(-i g.P) = u`` up to a global phase."""
    h = 1j * scipy.linalg.logm(u)
    h = 0.5 * (h + h.conj().T)
    return np.array([np.trace(h @ p).real / 4.0 for p in K.GENERATORS])


# controlled on the second qubit, target the first: CNOT^dagger (sz(x)1) CNOT = sz(x)sz
CNOT = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def _bsm_local_unitary(params: np.ndarray) -> np.ndarray:
    return np.kron(
        unitary_of_rotation_vector(params[K.N_SETTINGS : K.N_SETTINGS + 3]),
        unitary_of_rotation_vector(params[K.N_SETTINGS + 3 : K.N_SETTINGS + 6]),
    )


def two_input_generators(params: np.ndarray) -> np.ndarray:
    """Two-input parameters whose observables equal the BSM bits of a fixed-BSM vector.

    ``sz(x)sz = CNOT^dagger (sz(x)1) CNOT`` and
    ``sx(x)sx = (H(x)H) CNOT^dagger (sz(x)1) CNOT (H(x)H)``.
    """
    local = _bsm_local_unitary(params)
    u0 = CNOT @ local
    u1 = CNOT @ np.kron(HADAMARD, HADAMARD) @ local
    return np.concatenate([generator_of_unitary(u0), generator_of_unitary(u1)])


def maximize_general_bob(rho_ab: TwoQubitState, rho_bc: TwoQubitState, config: OptimizerConfig | None = None) -> SearchResult:
    """Best score over all four-outcome projective measurements for Bob.

    The fixed-BSM optimum is used as an extra warm start, so the result is
    never below the fixed-BSM search.
    """
    config = config or OptimizerConfig()
    fixed = maximize_fixed_bsm(rho_ab, rho_bc, config)
    warm = np.concatenate([fixed.settings[: K.N_SETTINGS], bsm_generator(fixed.settings)])
    result = _search(K.GENERAL_BOB, rho_ab, rho_bc, config, warm_starts=[warm])
    return _with_extra_evals(result, fixed.evaluations)


def maximize_two_input_bob(rho_ab: TwoQubitState, rho_bc: TwoQubitState, config: OptimizerConfig | None = None) -> SearchResult:
    """Best score when Bob chooses between two dichotomic two-qubit observables."""
    config = config or OptimizerConfig()
    fixed = maximize_fixed_bsm(rho_ab, rho_bc, config)
    warm = np.concatenate([fixed.settings[: K.N_SETTINGS], two_input_generators(fixed.settings)])
    result = _search(K.TWO_INPUT_BOB, rho_ab, rho_bc, config, warm_starts=[warm])
    return _with_extra_evals(result, fixed.evaluations)


def _with_extra_evals(result: SearchResult, extra: int) -> SearchResult:
    return SearchResult(
        result.s_best, result.settings, result.mode, result.converged,
        result.evaluations + extra, result.restart_scores,
    )


@dataclass(frozen=True)
class ActivationResult:
    search: SearchResult
    activated: bool

    def to_json(self) -> dict:
        return {**self.search.to_json(), "activated": self.activated}


def activation_scan(rho: TwoQubitState, config: OptimizerConfig | None = None) -> ActivationResult:
    """General-Bob search on two copies of ``rho``; ``activated`` iff the score exceeds 2."""
    result = maximize_general_bob(rho, rho, config)
    if result.s_best > 2.0:
        log.info("activation candidate: S = %.9f", result.s_best)
    return ActivationResult(result, bool(result.s_best > 2.0))


# --- independent re-evaluation -----------------------------------------


def settings_from_params(params: np.ndarray):
    p = np.asarray(params, dtype=float)
    alice = tuple(DichotomicSetting.from_angles(p[2 * k], p[2 * k + 1]) for k in (0, 1))
    charlie = tuple(DichotomicSetting.from_angles(p[2 * k], p[2 * k + 1]) for k in (2, 3))
    return alice, charlie


def _unitary(coeffs: np.ndarray) -> np.ndarray:
    h = np.tensordot(coeffs, K.GENERATORS, axes=1)
    return scipy.linalg.expm(-1j * h)


COMPUTATIONAL = np.eye(4, dtype=complex)


def evaluate_params(mode: str, params, rho_ab: TwoQubitState, rho_bc: TwoQubitState) -> float:
    """Score of a parameter vector through the dense Born-rule path of :mod:`biloc.network`."""
    params = np.asarray(params, dtype=float)
    alice, charlie = settings_from_params(params)
    bob = params[K.N_SETTINGS :]
    if mode == "fixed-bsm":
        meas = canonical_bsm(unitary_of_rotation_vector(bob[:3]), unitary_of_rotation_vector(bob[3:6]))
        return biloc_score(born_distribution(rho_ab, rho_bc, alice, charlie, meas))
    if mode in ("general-bob", "activation"):
        meas = measurement_after_unitary(_unitary(bob[:15]))
        return biloc_score(born_distribution(rho_ab, rho_bc, alice, charlie, meas))
    if mode == "two-input-bob":
        # computational outcome |jk> carries (-1)^j on the measured bit
        bits0 = tuple((s0, s1) for s0 in (1, -1) for s1 in (1, -1))
        bits1 = tuple((s1, s0) for s0 in (1, -1) for s1 in (1, -1))
        meas0 = measurement_after_unitary(_unitary(bob[:15]), COMPUTATIONAL, bits0)
        meas1 = measurement_after_unitary(_unitary(bob[15:30]), COMPUTATIONAL, bits1)
        i_val = compute_I(born_distribution(rho_ab, rho_bc, alice, charlie, meas0))
        j_val = compute_J(born_distribution(rho_ab, rho_bc, alice, charlie, meas1))
        return score_from_IJ(i_val, j_val)
    raise ValueError(f"unknown mode {mode!r}")


def kernel_score(mode: str, params, rho_ab: TwoQubitState, rho_bc: TwoQubitState) -> tuple[float, float, float]:
    """``(S, I, J)`` through the compiled objective (same path the search uses)."""
    t_ab, t_bc = _tables(rho_ab, rho_bc)
    code = MODES["general-bob" if mode == "activation" else mode]
    s, i, j = K.evaluate(np.asarray(params, dtype=float), code, t_ab, t_bc, K.PRODUCTS, K.GENERATORS)
    return float(s), float(i), float(j)

