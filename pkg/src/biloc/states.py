"""Two-qubit states, their Pauli-basis description and correlation spectra.

Tensor-index convention for every four-qubit operator in the package is
(Alice, Bob-left, Bob-right, Charlie); Bob's two qubits are the middle
factors of ``rho_ab (x) rho_bc``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .linalg import jacobi_eigh, jacobi_svd

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SX, SY, SZ])
PAULIS_WITH_ID = np.stack([I2, SX, SY, SZ])

SQRT_HALF = 1.0 / np.sqrt(2.0)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) * SQRT_HALF
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) * SQRT_HALF
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) * SQRT_HALF
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) * SQRT_HALF
BELL_STATES = np.stack([PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS])


class InvalidStateError(ValueError):
    """Input does not describe a valid two-qubit density matrix."""


class DomainError(ValueError):
    """A scalar parameter lies outside its admissible range."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TwoQubitState:
    """Validated 4x4 density matrix (Hermitian, unit trace, PSD)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidStateError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace is {tr.real:.15g}, expected 1")
        w, _ = jacobi_eigh(m)
        if w[0] < PSD_TOL:
            raise InvalidStateError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    def eigenvalues(self) -> np.ndarray:
        return jacobi_eigh(self.matrix)[0]

    def swapped(self) -> TwoQubitState:
        """The same state with the two qubit factors exchanged."""
        m = self.matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        return TwoQubitState(m)

    def conjugated(self, u: np.ndarray, w: np.ndarray) -> TwoQubitState:
        """Apply the local unitary ``u (x) w``."""
        g = np.kron(u, w)
        m = g @ self.matrix @ g.conj().T
        return TwoQubitState(0.5 * (m + m.conj().T))


@dataclass(frozen=True)
class SchmidtPureState:
    c0: float
    c1: float

    def __post_init__(self):
        if self.c0 < 0 or self.c1 < 0:
            raise DomainError("Schmidt coefficients must be nonnegative")
        if abs(self.c0**2 + self.c1**2 - 1.0) > 1e-12:
            raise DomainError("Schmidt coefficients must satisfy c0^2 + c1^2 = 1")

    @property
    def c(self) -> float:
        return 2.0 * self.c0 * self.c1

    @classmethod
    def from_concurrence(cls, c: float) -> SchmidtPureState:
        """Coefficients with ``c0 >= c1`` reproducing ``2*c0*c1 = c``."""
        if not 0.0 <= c <= 1.0:
            raise DomainError(f"c must lie in [0, 1], got {c}")
        root = np.sqrt(max(0.0, 1.0 - c * c))
        c0 = np.sqrt((1.0 + root) / 2.0)
        # c / (2 c0) avoids the cancellation in sqrt((1 - root) / 2) for small c
        c1 = c / (2.0 * c0)
        norm = np.hypot(c0, c1)
        return cls(float(c0 / norm), float(c1 / norm))

    def state(self) -> TwoQubitState:
        return make_schmidt_state(self.c0, self.c1)


@dataclass(frozen=True)
class PauliDecomposition:
    """Bloch vectors ``m_a``, ``m_b`` and correlation matrix ``t``.

    ``t[i, j] = Tr[(sigma_i (x) sigma_j) rho]``: the row index belongs to the
    first qubit, the column index to the second.
    """

    m_a: np.ndarray
    m_b: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m_a", _frozen(np.asarray(self.m_a, dtype=float)))
        object.__setattr__(self, "m_b", _frozen(np.asarray(self.m_b, dtype=float)))
        object.__setattr__(self, "t", _frozen(np.asarray(self.t, dtype=float)))

    def full(self) -> np.ndarray:
        """4x4 coefficient table over (1, sx, sy, sz) x (1, sx, sy, sz)."""
        out = np.zeros((4, 4))
        out[0, 0] = 1.0
        out[1:, 0] = self.m_a
        out[0, 1:] = self.m_b
        out[1:, 1:] = self.t
        return out

    def swapped(self) -> PauliDecomposition:
        return PauliDecomposition(self.m_b, self.m_a, self.t.T)

    def rebuild(self) -> np.ndarray:
        coeffs = self.full()
        m = np.einsum("mn,mij,nkl->ikjl", coeffs, PAULIS_WITH_ID, PAULIS_WITH_ID).reshape(4, 4)
        return m / 4.0


@dataclass(frozen=True)
class CorrelationSpectrum:
    """Singular values and axes of a correlation matrix.

    ``left_axes @ diag(values) @ right_axes.T`` reproduces the matrix.
    ``right_axes`` is always a proper rotation (determinant +1).
    """

    values: np.ndarray
    left_axes: np.ndarray
    right_axes: np.ndarray

    def __post_init__(self):
        for name in ("values", "left_axes", "right_axes"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=float)))

    def matrix(self) -> np.ndarray:
        return self.left_axes @ np.diag(self.values) @ self.right_axes.T


def make_schmidt_state(c0: float, c1: float) -> TwoQubitState:
    """Density matrix of ``c0|00> + c1|11>``; the pair is renormalized."""
    if c0 < 0 or c1 < 0:
        raise DomainError("Schmidt coefficients must be nonnegative")
    norm = np.hypot(c0, c1)
    if norm == 0.0:
        raise InvalidStateError("both Schmidt coefficients are zero")
    if abs(norm - 1.0) > 1e-9:
        raise DomainError(f"c0^2 + c1^2 = {norm**2:.12g}, expected 1")
    psi = np.array([c0, 0.0, 0.0, c1], dtype=complex) / norm
    return TwoQubitState(np.outer(psi, psi.conj()))


def pure_state(psi) -> TwoQubitState:
    psi = np.asarray(psi, dtype=complex).reshape(4)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise InvalidStateError("zero state vector")
    psi = psi / norm
    return TwoQubitState(np.outer(psi, psi.conj()))


def make_werner(v: float) -> TwoQubitState:
    """``v |phi+><phi+| + (1 - v) 1/4``, PSD for ``-1/3 <= v <= 1``."""
    if not -1.0 / 3.0 <= v <= 1.0:
        raise DomainError(f"Werner visibility {v} outside [-1/3, 1]")
    return TwoQubitState(v * np.outer(PHI_PLUS, PHI_PLUS.conj()) + (1.0 - v) * np.eye(4) / 4.0)


def add_isotropic_noise(state: TwoQubitState, v: float) -> TwoQubitState:
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"visibility {v} outside [0, 1]")
    return TwoQubitState(v * state.matrix + (1.0 - v) * np.eye(4) / 4.0)


def pauli_decompose(state: TwoQubitState) -> PauliDecomposition:
    rho = state.matrix
    m_a = np.array([np.trace(np.kron(s, I2) @ rho).real for s in PAULIS])
    m_b = np.array([np.trace(np.kron(I2, s) @ rho).real for s in PAULIS])
    t = np.array([[np.trace(np.kron(si, sj) @ rho).real for sj in PAULIS] for si in PAULIS])
    return PauliDecomposition(m_a, m_b, t)


def _orient(u: np.ndarray, v: np.ndarray):
    # First clearly nonzero entry of each right vector is made positive.
    u = u.copy()
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12))
        if col[idx] < 0:
            v[:, k] = -col
            u[:, k] = -u[:, k]
    return u, v


def correlation_spectrum(decomp: PauliDecomposition | np.ndarray, tie_tol: float = 1e-12) -> CorrelationSpectrum:
    """Singular values (descending) and axes of the correlation matrix.

    Ties within ``tie_tol`` are ordered by descending lexicographic order of
    the right singular vectors.  When the right axes come out improper, the
    third column of both axis matrices is negated, which keeps the
    factorization exact.
    """
    t = decomp.t if isinstance(decomp, PauliDecomposition) else np.asarray(decomp, dtype=float)
    u, s, v = jacobi_svd(t)
    u, v = _orient(u, v)

    order = list(range(3))
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and s[start] - s[stop] <= tie_tol:
            stop += 1
        if stop - start > 1:
            group = sorted(range(start, stop), key=lambda k: tuple(-v[:, k]))
            order[start:stop] = group
        start = stop
    u = u[:, order]
    v = v[:, order]

    if np.linalg.det(v) < 0:
        u[:, 2] = -u[:, 2]
        v[:, 2] = -v[:, 2]
    return CorrelationSpectrum(s, u, v)


def correlation_eigenvalues(decomp: PauliDecomposition) -> np.ndarray:
    """Eigenvalues of ``sqrt(T^T T)``, descending, via a symmetric eigensolve."""
    t = decomp.t
    w, _ = jacobi_eigh(t.T @ t)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def tensor_product(a: TwoQubitState, b: TwoQubitState) -> np.ndarray:
    """16x16 operator ``a (x) b`` in (A, B-left, B-right, C) order."""
    return np.kron(a.matrix, b.matrix)


def partial_trace(rho16: np.ndarray, keep: Literal["ab", "bc"]) -> np.ndarray:
    r = np.asarray(rho16).reshape(4, 4, 4, 4)
    if keep == "ab":
        return np.einsum("ijkj->ik", r)
    if keep == "bc":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'ab' or 'bc', got {keep!r}")


def random_state(kind: Literal["pure", "mixed"], seed: int) -> TwoQubitState:
    """Seeded random state: Haar-random pure state, or normalized ``G G^dagger``."""
    rng = np.random.default_rng(seed)
    if kind == "pure":
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        return pure_state(psi)
    if kind == "mixed":
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        m = g @ g.conj().T
        m = 0.5 * (m + m.conj().T)
        return TwoQubitState(m / np.trace(m).real)
    raise ValueError(f"unknown kind {kind!r}")


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# --- single-qubit rotations -------------------------------------------------


def rotation_of_unitary(u: np.ndarray) -> np.ndarray:
    """SO(3) matrix ``R`` with ``u sigma_j u^dagger = sum_i R[i, j] sigma_i``."""
    u = np.asarray(u, dtype=complex)
    return np.array(
        [[0.5 * np.trace(si @ u @ sj @ u.conj().T).real for sj in PAULIS] for si in PAULIS]
    )


def unitary_of_rotation(r: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rotation_of_unitary` up to a global sign.

    Uses the quaternion (axis-angle) form of the rotation.
    """
    r = np.asarray(r, dtype=float)
    if np.linalg.det(r) < 0:
        raise DomainError("improper rotation has no SU(2) preimage")
    tr = np.trace(r)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = 2.0 * np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    q /= np.linalg.norm(q)
    return q[0] * I2 - 1j * (q[1] * SX + q[2] * SY + q[3] * SZ)


def unitary_of_rotation_vector(h) -> np.ndarray:
    """``exp(-i h.sigma / 2)``: rotation by ``|h|`` about ``h``."""
    h = np.asarray(h, dtype=float)
    angle = np.linalg.norm(h)
    if angle == 0.0:
        return I2.copy()
    n = h / angle
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * (n[0] * SX + n[1] * SY + n[2] * SZ)


def frame_unitary(z_axis, x_axis) -> np.ndarray:
    """Unitary ``u`` whose conjugation maps the Z and X axes onto the given directions.

    ``u^dagger sigma_z u = z_axis . sigma`` and ``u^dagger sigma_x u = x_axis . sigma``;
    the Y direction is completed as ``z_axis x x_axis`` so the frame is proper.
    """
    z = np.asarray(z_axis, dtype=float)
    x = np.asarray(x_axis, dtype=float)
    z = z / np.linalg.norm(z)
    x = x - (x @ z) * z
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    frame = np.column_stack([x, y, z])
    return unitary_of_rotation(frame.T)


# --- JSON state descriptions ------------------------------------------------


def _number(spec: dict, key: str) -> float:
    if key not in spec:
        raise KeyError(f"state description is missing {key!r}")
    value = spec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{key!r} must be a number")
    return float(value)


def state_from_spec(spec: dict) -> TwoQubitState:
    """Build a state from its JSON description.

    Malformed descriptions raise ``KeyError``/``TypeError``/``ValueError``
    (other than :class:`InvalidStateError`); physically invalid ones raise
    :class:`InvalidStateError` or :class:`DomainError`.
    """
    if not isinstance(spec, dict):
        raise TypeError("state description must be a JSON object")
    family = spec.get("family")
    if family == "werner":
        return make_werner(_number(spec, "V"))
    if family == "schmidt":
        return make_schmidt_state(_number(spec, "c0"), _number(spec, "c1"))
    if family == "noisy_schmidt":
        base = make_schmidt_state(_number(spec, "c0"), _number(spec, "c1"))
        return add_isotropic_noise(base, _number(spec, "V"))
    if family == "dense":
        try:
            re = np.array(spec["re"], dtype=float)
            im = np.array(spec.get("im", np.zeros((4, 4))), dtype=float)
        except KeyError as exc:
            raise KeyError("dense state needs 're' (and optionally 'im')") from exc
        if re.shape != (4, 4) or im.shape != (4, 4):
            raise TypeError("dense 're'/'im' must be 4x4 arrays")
        return TwoQubitState(re + 1j * im)
    raise ValueError(f"unknown state family {family!r}")


def state_to_spec(state: TwoQubitState) -> dict:
    m = state.matrix
    return {"family": "dense", "re": m.real.tolist(), "im": m.imag.tolist()}


def load_state_spec(text_or_path: str) -> dict:
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    text = text_or_path.strip()
    if not text.startswith("{"):
        text = Path(text_or_path).read_text(encoding="utf-8")
    return json.loads(text)
