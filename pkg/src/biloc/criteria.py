"""Closed-form maximal violations of the bilocality inequality.

For a Bell-state measurement whose local frames are aligned with the
correlation matrices, the optimal score depends only on the two leading
singular values of each correlation matrix: ``2 sqrt(xi1 zeta1 + xi2 zeta2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .network import DichotomicSetting, JointMeasurement, canonical_bsm
from .states import (
    CorrelationSpectrum,
    DomainError,
    TwoQubitState,
    correlation_spectrum,
    frame_unitary,
    pauli_decompose,
)

MARGINAL_TOL = 1e-9


def _unitary_to_json(u: np.ndarray) -> dict:
    return {"re": u.real.tolist(), "im": u.imag.tolist()}


@dataclass(frozen=True)
class BilocReport:
    s_max: float
    alpha: float
    gamma: float
    xi: tuple[float, float]
    zeta: tuple[float, float]
    bob_alignment: tuple[np.ndarray, np.ndarray]
    chsh_ab: float
    chsh_bc: float
    violates: bool
    marginal: bool
    alice_settings: tuple[DichotomicSetting, DichotomicSetting]
    charlie_settings: tuple[DichotomicSetting, DichotomicSetting]

    def bob_measurement(self) -> JointMeasurement:
        return canonical_bsm(*self.bob_alignment)

    def to_json(self) -> dict:
        return {
            "sMax": self.s_max,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "xi": list(self.xi),
            "zeta": list(self.zeta),
            "bobAlignment": [_unitary_to_json(u) for u in self.bob_alignment],
            "chshAB": self.chsh_ab,
            "chshBC": self.chsh_bc,
            "violates": self.violates,
            "marginal": self.marginal,
            "aliceSettings": [s.bloch.tolist() for s in self.alice_settings],
            "charlieSettings": [s.bloch.tolist() for s in self.charlie_settings],
        }


def _check_unit_interval(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def pure_pair_optimum(c: float, q: float) -> tuple[float, float, float]:
    """Optimal ``(alpha, gamma, s_max)`` for two pure states with entanglement ``c`` and ``q``.

    Alice measures at ``+-alpha`` and Charlie at ``+-gamma`` from the Z axis
    in the Z-X plane, Bob performs the standard Bell-state measurement.
    """
    c = _check_unit_interval("c", c)
    q = _check_unit_interval("q", q)
    angle = math.acos(1.0 / math.sqrt(1.0 + c * q))
    return angle, angle, 2.0 * math.sqrt(1.0 + c * q)


def _bob_side_spectra(rho_ab: TwoQubitState, rho_bc: TwoQubitState) -> tuple[CorrelationSpectrum, CorrelationSpectrum]:
    # Both spectra are oriented so that left axes belong to Alice / Charlie
    # and right axes to Bob.
    spec_ab = correlation_spectrum(pauli_decompose(rho_ab))
    spec_bc = correlation_spectrum(pauli_decompose(rho_bc).swapped())
    return spec_ab, spec_bc


def optimal_angle(xi: tuple[float, float], zeta: tuple[float, float]) -> float:
    """Common optimal angle ``alpha = gamma`` from the leading spectra."""
    lead = xi[0] * zeta[0]
    total = lead + xi[1] * zeta[1]
    if total <= 0.0:
        return 0.0
    return math.acos(min(1.0, math.sqrt(lead / total)))


def horodecki_value(values) -> float:
    return 2.0 * math.hypot(values[0], values[1])


def mixed_pair_optimum(rho_ab: TwoQubitState, rho_bc: TwoQubitState) -> BilocReport:
    """Maximal bilocality score with an aligned Bell-state measurement.

    Bob's frame toward Alice uses the Bob-side singular directions of
    ``T_ab`` for ``xi1`` (Z) and ``xi2`` (X); toward Charlie those of
    ``T_bc`` for ``zeta1`` and ``zeta2``.  Alice and Charlie measure at
    ``+-alpha`` in the plane of their own two leading singular directions.
    """
    if not isinstance(rho_ab, TwoQubitState) or not isinstance(rho_bc, TwoQubitState):
        raise DomainError("mixed_pair_optimum expects two TwoQubitState inputs")
    spec_ab, spec_bc = _bob_side_spectra(rho_ab, rho_bc)
    xi = (float(spec_ab.values[0]), float(spec_ab.values[1]))
    zeta = (float(spec_bc.values[0]), float(spec_bc.values[1]))
    s_max = 2.0 * math.sqrt(xi[0] * zeta[0] + xi[1] * zeta[1])
    angle = optimal_angle(xi, zeta)

    u_left = frame_unitary(spec_ab.right_axes[:, 0], spec_ab.right_axes[:, 1])
    u_right = frame_unitary(spec_bc.right_axes[:, 0], spec_bc.right_axes[:, 1])

    def planar(spec: CorrelationSpectrum):
        e1, e2 = spec.left_axes[:, 0], spec.left_axes[:, 1]
        return (
            DichotomicSetting.normalized(math.cos(angle) * e1 + math.sin(angle) * e2),
            DichotomicSetting.normalized(math.cos(angle) * e1 - math.sin(angle) * e2),
        )

    return BilocReport(
        s_max=s_max,
        alpha=angle,
        gamma=angle,
        xi=xi,
        zeta=zeta,
        bob_alignment=(u_left, u_right),
        chsh_ab=horodecki_value(xi),
        chsh_bc=horodecki_value(zeta),
        violates=s_max > 2.0,
        marginal=abs(s_max - 2.0) < MARGINAL_TOL,
        alice_settings=planar(spec_ab),
        charlie_settings=planar(spec_bc),
    )


def biloc_criterion(rho_ab: TwoQubitState, rho_bc: TwoQubitState) -> bool:
    """True iff ``xi1 zeta1 + xi2 zeta2 > 1``."""
    spec_ab, spec_bc = _bob_side_spectra(rho_ab, rho_bc)
    xi, zeta = spec_ab.values, spec_bc.values
    return bool(xi[0] * zeta[0] + xi[1] * zeta[1] > 1.0)


def horodecki_chsh(rho: TwoQubitState):
    """Maximal CHSH value ``2 sqrt(xi1^2 + xi2^2)`` and settings reaching it.

    Returns ``(value, settings_a, settings_b)``; the settings are ordered so
    that ``network.chsh_score(rho, settings_a, settings_b)`` equals the value.
    """
    spec = correlation_spectrum(pauli_decompose(rho))
    xi1, xi2 = float(spec.values[0]), float(spec.values[1])
    value = horodecki_value((xi1, xi2))
    u1, u2 = spec.left_axes[:, 0], spec.left_axes[:, 1]
    v1, v2 = spec.right_axes[:, 0], spec.right_axes[:, 1]
    theta = math.atan2(xi2, xi1) if value > 0 else 0.0
    settings_a = (DichotomicSetting.normalized(u1), DichotomicSetting.normalized(u2))
    settings_b = (
        DichotomicSetting.normalized(math.cos(theta) * v1 + math.sin(theta) * v2),
        DichotomicSetting.normalized(math.cos(theta) * v1 - math.sin(theta) * v2),
    )
    return value, settings_a, settings_b


class BoundChain(NamedTuple):
    s_biloc: float
    s_chsh_ab: float
    s_chsh_bc: float
    chain_holds: bool
    equality: bool


def bound_chain_check(rho_ab: TwoQubitState, rho_bc: TwoQubitState, tol: float = 1e-10) -> BoundChain:
    """Compare the bilocal optimum with the geometric mean of the CHSH optima."""
    spec_ab, spec_bc = _bob_side_spectra(rho_ab, rho_bc)
    xi = np.asarray(spec_ab.values[:2])
    zeta = np.asarray(spec_bc.values[:2])
    s_biloc = 2.0 * math.sqrt(float(xi @ zeta))
    s_ab = horodecki_value(xi)
    s_bc = horodecki_value(zeta)
    holds = s_biloc <= math.sqrt(s_ab * s_bc) + tol
    n_xi, n_zeta = np.linalg.norm(xi), np.linalg.norm(zeta)
    if n_xi == 0.0 or n_zeta == 0.0:
        equality = True
    else:
        equality = bool(np.max(np.abs(xi / n_xi - zeta / n_zeta)) <= 1e-9)
    return BoundChain(s_biloc, s_ab, s_bc, bool(holds), equality)


class VisibilityProducts(NamedTuple):
    biloc: float
    local: float
    attainable: bool


def critical_visibility_product(c: float, q: float) -> VisibilityProducts:
    """Products of critical visibilities for noisy pure states.

    ``biloc = 1 / (1 + c q)`` is the least ``V_ab V_bc`` that still allows a
    bilocality violation; ``local = 1 / sqrt((1 + c^2)(1 + q^2))`` is the
    product of the two CHSH thresholds.  ``attainable`` is False when the
    bilocal threshold cannot be reached with visibilities at most 1.
    """
    c = _check_unit_interval("c", c)
    q = _check_unit_interval("q", q)
    biloc = 1.0 / (1.0 + c * q)
    local = math.sqrt(1.0 / (1.0 + c * c)) * math.sqrt(1.0 / (1.0 + q * q))
    return VisibilityProducts(biloc, local, biloc < 1.0)
