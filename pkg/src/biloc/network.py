"""Born-rule statistics of the entanglement-swapping network.

Alice holds the first qubit of ``rho_ab``, Charlie the second qubit of
``rho_bc`` and Bob the two middle qubits, on which he performs a four-outcome
projective measurement.  Outcomes are stored densely as
``p[x, z, a, b0, b1, c]`` where the last four indices map ``+1 -> 0`` and
``-1 -> 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import BELL_STATES, I2, PAULIS, DomainError, TwoQubitState

SIGNS = np.array([1.0, -1.0])

# Outcome k of a Bell-type measurement -> (B0, B1); read off from the
# eigenvalues of sz(x)sz and sx(x)sx on phi+, phi-, psi+, psi-.
CANONICAL_BITS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class DichotomicSetting:
    """Observable ``bloch . sigma`` with outcomes +1 / -1."""

    bloch: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bloch, dtype=float).reshape(3)
        if abs(np.linalg.norm(b) - 1.0) > 1e-12:
            raise DomainError(f"Bloch vector must have unit norm, got {np.linalg.norm(b):.15g}")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bloch", b)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> DichotomicSetting:
        return cls(np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]))

    @classmethod
    def normalized(cls, vec) -> DichotomicSetting:
        vec = np.asarray(vec, dtype=float)
        return cls(vec / np.linalg.norm(vec))

    def projectors(self) -> np.ndarray:
        """``(P_plus, P_minus)`` with ``P_pm = (1 +- bloch . sigma) / 2``."""
        obs = np.tensordot(self.bloch, PAULIS, axes=1)
        return np.stack([(I2 + obs) / 2.0, (I2 - obs) / 2.0])


def zx_plane_settings(angle: float) -> tuple[DichotomicSetting, DichotomicSetting]:
    """The pair ``(sin a, 0, cos a)`` and ``(-sin a, 0, cos a)``."""
    return DichotomicSetting.from_angles(angle), DichotomicSetting.from_angles(-angle)


@dataclass(frozen=True)
class JointMeasurement:
    """Bob's orthonormal four-outcome basis with its (B0, B1) labelling.

    ``basis[k]`` is the k-th basis vector in the (Bob-left, Bob-right) order.
    """

    basis: np.ndarray
    bits: tuple = CANONICAL_BITS

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.shape != (4, 4):
            raise DomainError(f"basis must hold four 4-vectors, got shape {basis.shape}")
        gram = basis.conj() @ basis.T
        if np.max(np.abs(gram - np.eye(4))) > 1e-10:
            raise DomainError("measurement basis is not orthonormal")
        bits = tuple((int(b0), int(b1)) for b0, b1 in self.bits)
        if sorted(bits) != sorted(CANONICAL_BITS):
            raise DomainError(f"bits must be a bijection onto {{+-1}}^2, got {bits}")
        basis = basis.copy()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "bits", bits)

    def projectors(self) -> np.ndarray:
        return np.einsum("ki,kj->kij", self.basis, self.basis.conj())

    def observable(self, bob_bit: int) -> np.ndarray:
        """Bob's +-1 observable for bit ``B0`` (0) or ``B1`` (1)."""
        weights = np.array([b[bob_bit] for b in self.bits], dtype=float)
        return np.einsum("k,kij->ij", weights, self.projectors())

    def mirrored(self) -> JointMeasurement:
        """Same measurement with Bob's two qubit factors exchanged."""
        swapped = self.basis.reshape(4, 2, 2).transpose(0, 2, 1).reshape(4, 4)
        return JointMeasurement(swapped, self.bits)


def _check_unitary(u: np.ndarray, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u.conj().T @ u - I2)) > 1e-10:
        raise DomainError(f"{name} is not a 2x2 unitary")
    return u


def canonical_bsm(u_left=I2, u_right=I2) -> JointMeasurement:
    """Bell-state measurement after Bob applies ``u_left (x) u_right``.

    The basis vectors are ``(u_left (x) u_right)^dagger |Bell_k>`` in the
    order phi+, phi-, psi+, psi-.
    """
    u_left = _check_unitary(u_left, "u_left")
    u_right = _check_unitary(u_right, "u_right")
    g = np.kron(u_left, u_right).conj().T
    return JointMeasurement((g @ BELL_STATES.T).T, CANONICAL_BITS)


def measurement_after_unitary(u: np.ndarray, reference: np.ndarray = BELL_STATES, bits=CANONICAL_BITS) -> JointMeasurement:
    """Measure ``reference`` after applying the two-qubit unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    return JointMeasurement((u.conj().T @ np.asarray(reference).T).T, bits)


@dataclass(frozen=True)
class TripartiteDistribution:
    """Dense table ``p[x, z, a, b0, b1, c]`` (see module docstring)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2,) * 6:
            raise DomainError(f"distribution must have shape (2,)*6, got {p.shape}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def check(self, tol: float = 1e-10) -> None:
        """Raise ``AssertionError`` unless positivity, normalization and no-signaling hold."""
        p = self.p
        assert p.min() >= -1e-12 and p.max() <= 1 + 1e-12, "entries outside [0, 1]"
        sums = p.sum(axis=(2, 3, 4, 5))
        assert np.max(np.abs(sums - 1.0)) <= tol, "slices do not sum to 1"
        left = p.sum(axis=5)  # x, z, a, b0, b1
        assert np.max(np.abs(left[:, 0] - left[:, 1])) <= tol, "Alice-Bob marginal depends on z"
        right = p.sum(axis=2)  # x, z, b0, b1, c
        assert np.max(np.abs(right[0] - right[1])) <= tol, "Bob-Charlie marginal depends on x"

    def to_json(self) -> dict:
        return {"p": self.p.tolist()}


def born_distribution(
    rho_ab: TwoQubitState,
    rho_bc: TwoQubitState,
    alice: Sequence[DichotomicSetting],
    charlie: Sequence[DichotomicSetting],
    bob: JointMeasurement,
) -> TripartiteDistribution:
    """Exact outcome probabilities from the four-qubit state ``rho_ab (x) rho_bc``."""
    rho = np.kron(rho_ab.matrix, rho_bc.matrix).reshape(2, 4, 2, 2, 4, 2)
    pa = np.stack([s.projectors() for s in alice])  # x, a, i, i'
    pc = np.stack([s.projectors() for s in charlie])  # z, c, l, l'
    pb = bob.projectors()  # k, j, j'
    # Tr[(PA (x) PB (x) PC) rho] = sum PA[i,i'] PB[j,j'] PC[l,l'] rho[i',j',l',i,j,l]
    probs = np.einsum("xaip,kjq,zclr,pqrijl->xzakc", pa, pb, pc, rho, optimize=True).real
    p = np.zeros((2,) * 6)
    for k, (b0, b1) in enumerate(bob.bits):
        p[:, :, :, 0 if b0 == 1 else 1, 0 if b1 == 1 else 1, :] = probs[:, :, :, k, :]
    return TripartiteDistribution(p)


def correlator(dist: TripartiteDistribution, x: int, z: int, bob_bit: int) -> float:
    """``<A_x B_y C_z>`` with ``y = bob_bit``."""
    slab = dist.p[x, z]
    if bob_bit == 0:
        weights = np.einsum("a,b,d,c->abdc", SIGNS, SIGNS, np.ones(2), SIGNS)
    elif bob_bit == 1:
        weights = np.einsum("a,b,d,c->abdc", SIGNS, np.ones(2), SIGNS, SIGNS)
    else:
        raise ValueError("bob_bit must be 0 or 1")
    return float(np.sum(weights * slab))


def bob_marginals(dist: TripartiteDistribution, x: int = 0, z: int = 0) -> tuple[float, float]:
    """``(<B0>, <B1>)`` for one input pair; diagnostics only."""
    pb = dist.p[x, z].sum(axis=(0, 3))
    return float(SIGNS @ pb.sum(axis=1)), float(SIGNS @ pb.sum(axis=0))


def compute_I(dist: TripartiteDistribution) -> float:
    return sum(correlator(dist, x, z, 0) for x in (0, 1) for z in (0, 1))


def compute_J(dist: TripartiteDistribution) -> float:
    return sum((-1) ** (x + z) * correlator(dist, x, z, 1) for x in (0, 1) for z in (0, 1))


def score_from_IJ(i_value: float, j_value: float) -> float:
    return math.sqrt(abs(i_value)) + math.sqrt(abs(j_value))


def biloc_score(dist: TripartiteDistribution) -> float:
    """``sqrt|I| + sqrt|J|``; values above 2 certify non-bilocal statistics."""
    return score_from_IJ(compute_I(dist), compute_J(dist))


def two_party_correlator(rho: TwoQubitState, a: DichotomicSetting, b: DichotomicSetting) -> float:
    obs = np.kron(np.tensordot(a.bloch, PAULIS, axes=1), np.tensordot(b.bloch, PAULIS, axes=1))
    return float(np.trace(obs @ rho.matrix).real)


def chsh_score(rho: TwoQubitState, settings_a: Sequence[DichotomicSetting], settings_b: Sequence[DichotomicSetting]) -> float:
    e = [[two_party_correlator(rho, a, b) for b in settings_b] for a in settings_a]
    return abs(e[0][0] + e[0][1] + e[1][0] - e[1][1])


# --- finite statistics ---------------------------------------------------


@dataclass(frozen=True)
class SampleEstimate:
    """Empirical I, J, S from a finite number of shots per input pair.

    Standard errors are ``nan`` (and ``reliable`` is False) when fewer than
    two shots per input pair are available.
    """

    I: float
    J: float
    S: float
    stderr_I: float
    stderr_J: float
    stderr_S: float
    shots: int
    reliable: bool
    counts: np.ndarray

    def to_json(self) -> dict:
        def clean(v):
            return None if not math.isfinite(v) else v

        return {
            "I": self.I,
            "J": self.J,
            "S": self.S,
            "stderr_I": clean(self.stderr_I),
            "stderr_J": clean(self.stderr_J),
            "stderr_S": clean(self.stderr_S),
            "shots": self.shots,
            "reliable": self.reliable,
        }


def sample_outcomes(dist: TripartiteDistribution, shots: int, seed: int = 0) -> SampleEstimate:
    """Draw ``shots`` outcomes for every ``(x, z)`` by inverse-CDF sampling.

    Each input pair owns an independent generator spawned from ``seed``.
    The uncertainty on S is propagated with the delta method, including
    the covariance between the I and J estimators.
    """
    if int(shots) != shots or shots < 1:
        raise DomainError(f"shots must be a positive integer, got {shots}")
    shots = int(shots)
    streams = np.random.SeedSequence(seed).spawn(4)
    # outcome index o = a*8 + b0*4 + b1*2 + c over sign-index bits
    idx = np.arange(16)
    a_val = SIGNS[(idx >> 3) & 1]
    b0_val = SIGNS[(idx >> 2) & 1]
    b1_val = SIGNS[(idx >> 1) & 1]
    c_val = SIGNS[idx & 1]
    prod0 = a_val * b0_val * c_val
    prod1 = a_val * b1_val * c_val

    counts = np.zeros((2, 2, 16), dtype=np.int64)
    means = np.zeros((2, 2, 2))
    variances = np.zeros((2, 2, 2))
    covariances = np.zeros((2, 2))
    for x in (0, 1):
        for z in (0, 1):
            rng = np.random.default_rng(streams[2 * x + z])
            probs = np.clip(dist.p[x, z].reshape(16), 0.0, None)
            cdf = np.cumsum(probs)
            cdf /= cdf[-1]
            draws = np.searchsorted(cdf, rng.random(shots), side="right")
            draws = np.minimum(draws, 15)
            n = np.bincount(draws, minlength=16)
            counts[x, z] = n
            m0 = n @ prod0 / shots
            m1 = n @ prod1 / shots
            means[x, z] = m0, m1
            if shots > 1:
                # products are +-1, so E[v^2] = 1
                variances[x, z, 0] = (1.0 - m0 * m0) * shots / (shots - 1)
                variances[x, z, 1] = (1.0 - m1 * m1) * shots / (shots - 1)
                covariances[x, z] = (n @ (prod0 * prod1) / shots - m0 * m1) * shots / (shots - 1)

    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    i_hat = float(means[:, :, 0].sum())
    j_hat = float((sign * means[:, :, 1]).sum())
    s_hat = score_from_IJ(i_hat, j_hat)
    if shots < 2:
        nan = float("nan")
        return SampleEstimate(i_hat, j_hat, s_hat, nan, nan, nan, shots, False, counts)

    var_i = float(variances[:, :, 0].sum()) / shots
    var_j = float(variances[:, :, 1].sum()) / shots
    cov_ij = float((sign * covariances).sum()) / shots
    with np.errstate(divide="ignore", invalid="ignore"):
        g_i = np.sign(i_hat) / (2.0 * np.sqrt(abs(i_hat))) if i_hat != 0 else np.inf
        g_j = np.sign(j_hat) / (2.0 * np.sqrt(abs(j_hat))) if j_hat != 0 else np.inf
        var_s = g_i * g_i * var_i + g_j * g_j * var_j + 2.0 * g_i * g_j * cov_ij
    stderr_s = float(np.sqrt(var_s)) if np.isfinite(var_s) and var_s >= 0 else float("inf")
    if var_i == 0 and var_j == 0:
        stderr_s = 0.0
    return SampleEstimate(
        i_hat, j_hat, s_hat, float(np.sqrt(var_i)), float(np.sqrt(var_j)), stderr_s, shots, True, counts
    )
