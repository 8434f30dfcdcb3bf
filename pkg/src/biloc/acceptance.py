"""Executable acceptance criteria.

Each ``ac_*`` function runs one criterion at its pinned tolerance and returns a
:class:`CriterionResult`.  ``run_all`` is used both by ``biloc verify`` and by
``tests/test_acceptance.py``.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import criteria, network, optimizer
from .states import (
    SchmidtPureState,
    TwoQubitState,
    correlation_spectrum,
    make_schmidt_state,
    make_werner,
    pauli_decompose,
    random_state,
    random_unitary,
)

SQRT2 = math.sqrt(2.0)


@dataclass
class CriterionResult:
    id: str
    title: str
    expected: str
    computed: str
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.id:<6} {self.title:<44} expected: {self.expected:<34} computed: {self.computed}"


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _schmidt(c: float) -> TwoQubitState:
    return SchmidtPureState.from_concurrence(c).state()


def ac1_pure_maximal_pair() -> CriterionResult:
    _, _, s_closed = criteria.pure_pair_optimum(1.0, 1.0)
    phi = make_schmidt_state(SQRT2 / 2, SQRT2 / 2)
    settings = network.zx_plane_settings(math.pi / 4)
    dist = network.born_distribution(phi, phi, settings, settings, network.canonical_bsm())
    i_val, j_val = network.compute_I(dist), network.compute_J(dist)
    s_val = network.biloc_score(dist)
    tol = 1e-9
    ok = (
        abs(s_closed - 2 * SQRT2) <= tol
        and abs(i_val - 2.0) <= tol
        and abs(j_val - 2.0) <= tol
        and abs(s_val - 2 * SQRT2) <= tol
    )
    return CriterionResult(
        "AC-1", "pure maximal pair: I=J=2, S=2*sqrt2",
        f"I=2 J=2 S={_fmt(2 * SQRT2)}",
        f"I={_fmt(i_val)} J={_fmt(j_val)} S={_fmt(s_val)} closed={_fmt(s_closed)}",
        ok,
    )


def ac2_pure_pair_oracle(n_pairs: int = 200, seed: int = 2) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    all_violate = True
    for k in range(n_pairs):
        c, q = rng.random(2)
        found = optimizer.maximize_fixed_bsm(_schmidt(c), _schmidt(q), optimizer.OptimizerConfig(seed=k))
        closed = 2.0 * math.sqrt(1.0 + c * q)
        worst = max(worst, abs(found.s_best - closed))
        if c >= 0.01 and q >= 0.01 and not found.s_best > 2.0:
            all_violate = False
    ok = worst <= 1e-5 and all_violate
    return CriterionResult(
        "AC-2", f"pure-pair oracle sweep ({n_pairs} pairs)",
        "|S_opt - 2sqrt(1+cq)| <= 1e-5, S>2",
        f"max gap={worst:.3g} all_violate={all_violate}",
        ok,
    )


def ac3_mixed_pair_criterion(n_pairs: int = 200, seed: int = 3000) -> CriterionResult:
    worst_oracle = 0.0
    worst_achieve = 0.0
    for k in range(n_pairs):
        rho_ab = random_state("mixed", seed + 2 * k)
        rho_bc = random_state("mixed", seed + 2 * k + 1)
        report = criteria.mixed_pair_optimum(rho_ab, rho_bc)
        found = optimizer.maximize_fixed_bsm(rho_ab, rho_bc, optimizer.OptimizerConfig(seed=k))
        worst_oracle = max(worst_oracle, abs(found.s_best - report.s_max))
        dist = network.born_distribution(
            rho_ab, rho_bc, report.alice_settings, report.charlie_settings, report.bob_measurement()
        )
        worst_achieve = max(worst_achieve, abs(network.biloc_score(dist) - report.s_max))
    ok = worst_oracle <= 1e-5 and worst_achieve <= 1e-8
    return CriterionResult(
        "AC-3", f"mixed-pair criterion ({n_pairs} pairs)",
        "oracle gap <= 1e-5, achieved <= 1e-8",
        f"oracle gap={worst_oracle:.3g} achieved gap={worst_achieve:.3g}",
        ok,
    )


def ac4a_equal_werner_threshold() -> CriterionResult:
    threshold = 2.0 ** -0.5
    at = criteria.mixed_pair_optimum(make_werner(threshold), make_werner(threshold)).s_max
    grid_ok = True
    for v in np.linspace(0.5, 1.0, 501):
        if abs(v * v - 0.5) < 1e-9:
            continue
        report = criteria.mixed_pair_optimum(make_werner(v), make_werner(v))
        if report.violates != (v * v > 0.5):
            grid_ok = False
    ok = grid_ok and abs(at - 2.0) <= 1e-6
    return CriterionResult(
        "AC-4a", "equal Werner pair: violation iff V^2 > 1/2",
        "S(0.7071)=2, crossing at V^2=1/2",
        f"S(2^-1/2)={_fmt(at)} grid_consistent={grid_ok}",
        ok,
    )


def ac4b_werner_vs_pure_threshold() -> CriterionResult:
    v = 0.5**0.25
    phi = make_schmidt_state(SQRT2 / 2, SQRT2 / 2)
    at = criteria.mixed_pair_optimum(make_werner(v), phi).s_max
    ok = abs(at - 2.0) <= 1e-6
    return CriterionResult(
        "AC-4b", "Werner vs pure pair at V=(1/2)^(1/4)",
        "|S - 2| <= 1e-6",
        f"S={_fmt(at)}",
        ok,
    )


def ac5_bound_chain(n_pairs: int = 500, seed: int = 5000) -> CriterionResult:
    holds = True
    worst_equal = 0.0
    for k in range(n_pairs):
        kind = "pure" if k % 4 == 0 else "mixed"
        rho_ab = random_state(kind, seed + 2 * k)
        rho_bc = random_state("mixed", seed + 2 * k + 1)
        chain = criteria.bound_chain_check(rho_ab, rho_bc)
        holds = holds and chain.chain_holds
        same = criteria.bound_chain_check(rho_ab, rho_ab)
        worst_equal = max(worst_equal, abs(same.s_biloc - math.sqrt(same.s_chsh_ab * same.s_chsh_bc)))
    ok = holds and worst_equal <= 1e-10
    return CriterionResult(
        "AC-5", f"bound chain ({n_pairs} pairs)",
        "2sqrt(xi.zeta) <= sqrt(S_AB S_BC)",
        f"holds={holds} equal-state gap={worst_equal:.3g}",
        ok,
    )


def ac6_chsh_link(n_states: int = 200, seed: int = 6000) -> CriterionResult:
    worst = 0.0
    implication = True
    for k in range(n_states):
        rho = random_state("pure" if k % 2 == 0 else "mixed", seed + k)
        s_biloc = criteria.mixed_pair_optimum(rho, rho).s_max
        s_chsh = criteria.horodecki_chsh(rho)[0]
        worst = max(worst, abs(s_biloc - s_chsh))
        if s_chsh > 2.0 and not s_biloc > 2.0:
            implication = False
    ok = worst <= 1e-10 and implication
    return CriterionResult(
        "AC-6", f"CHSH link rho(x)rho ({n_states} states)",
        "S_biloc(rho,rho) = S_CHSH(rho)",
        f"max gap={worst:.3g} implication={implication}",
        ok,
    )


def ac7_visibility_products(n_pairs: int = 100, seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)
    ordering = True
    equality_iff = True
    worst_excess = 0.0
    for _ in range(n_pairs):
        c, q = rng.uniform(1e-3, 1.0, size=2)
        prod = criteria.critical_visibility_product(c, q)
        worst_excess = max(worst_excess, prod.biloc - prod.local)
        if not prod.biloc <= prod.local + 1e-12:
            ordering = False
        if (abs(prod.biloc - prod.local) <= 1e-12) != (abs(c - q) <= 1e-9):
            equality_iff = False
    ok = ordering and equality_iff
    return CriterionResult(
        "AC-7", f"visibility products ({n_pairs} pairs)",
        "biloc <= local + 1e-12",
        f"max(biloc - local)={worst_excess:.3g} ordering={ordering}",
        ok,
    )


def ac8_sampling(seed: int = 0) -> CriterionResult:
    phi = make_werner(1.0)
    report = criteria.mixed_pair_optimum(phi, phi)
    dist = network.born_distribution(phi, phi, report.alice_settings, report.charlie_settings, report.bob_measurement())
    big = network.sample_outcomes(dist, 10**6, seed)
    within = abs(big.S - 2 * SQRT2) <= 5 * big.stderr_S
    ratios = []
    for shots in (10**3, 10**4, 10**5, 10**6):
        est = network.sample_outcomes(dist, shots, seed)
        ratios.append(est.stderr_S * math.sqrt(shots) / (big.stderr_S * math.sqrt(10**6)))
    scaling = all(0.5 <= r <= 2.0 for r in ratios)
    ok = within and scaling
    return CriterionResult(
        "AC-8", "sampling consistency (1e6 shots)",
        f"|S-{_fmt(2 * SQRT2)}| <= 5 stderr",
        f"S={_fmt(big.S)} stderr={big.stderr_S:.3g} scaling={[round(r, 3) for r in ratios]}",
        ok,
    )


def ac9_general_bob(n_pairs: int = 50, seed: int = 9000) -> CriterionResult:
    worst_excess = -math.inf
    for k in range(n_pairs):
        rho_ab = random_state("pure", seed + 2 * k)
        rho_bc = random_state("pure", seed + 2 * k + 1)
        closed = criteria.mixed_pair_optimum(rho_ab, rho_bc).s_max
        found = optimizer.maximize_general_bob(rho_ab, rho_bc, optimizer.OptimizerConfig(seed=k))
        worst_excess = max(worst_excess, found.s_best - closed)
    werner_best = {}
    for v in (0.60, 0.65, 0.70):
        found = optimizer.activation_scan(make_werner(v), optimizer.OptimizerConfig(seed=int(v * 100)))
        werner_best[v] = found.search.s_best
    ok = worst_excess <= 1e-4 and all(s <= 2.0 + 1e-4 for s in werner_best.values())
    return CriterionResult(
        "AC-9", "general-Bob consistency",
        "pure excess <= 1e-4, Werner S <= 2+1e-4",
        f"pure excess={worst_excess:.3g} werner={ {k: round(s, 7) for k, s in werner_best.items()} }",
        ok,
    )


def _random_setting(rng) -> network.DichotomicSetting:
    return network.DichotomicSetting.normalized(rng.standard_normal(3))


def ac10_invariants(n: int = 500, seed: int = 10_000) -> CriterionResult:
    rng = np.random.default_rng(seed)
    no_signal = swap = lu = roundtrip = 0.0
    for k in range(n):
        rho_ab = random_state("mixed" if k % 3 else "pure", seed + 3 * k)
        rho_bc = random_state("mixed", seed + 3 * k + 1)
        alice = (_random_setting(rng), _random_setting(rng))
        charlie = (_random_setting(rng), _random_setting(rng))
        if k % 2:
            bob = network.canonical_bsm(random_unitary(rng), random_unitary(rng))
        else:
            bob = network.measurement_after_unitary(random_unitary(rng, 4))
        dist = network.born_distribution(rho_ab, rho_bc, alice, charlie, bob)
        p = dist.p
        left = p.sum(axis=5)
        right = p.sum(axis=2)
        no_signal = max(no_signal, np.max(np.abs(left[:, 0] - left[:, 1])), np.max(np.abs(right[0] - right[1])))

        mirrored = network.born_distribution(rho_bc.swapped(), rho_ab.swapped(), charlie, alice, bob.mirrored())
        swap = max(
            swap,
            abs(network.compute_I(dist) - network.compute_I(mirrored)),
            abs(network.compute_J(dist) - network.compute_J(mirrored)),
            abs(network.biloc_score(dist) - network.biloc_score(mirrored)),
        )

        u, w = random_unitary(rng), random_unitary(rng)
        before = correlation_spectrum(pauli_decompose(rho_ab)).values
        after = correlation_spectrum(pauli_decompose(rho_ab.conjugated(u, w))).values
        lu = max(lu, np.max(np.abs(before - after)))

        roundtrip = max(roundtrip, np.max(np.abs(pauli_decompose(rho_bc).rebuild() - rho_bc.matrix)))
    ok = no_signal <= 1e-10 and swap <= 1e-10 and lu <= 1e-10 and roundtrip <= 1e-12
    return CriterionResult(
        "AC-10", f"invariance suite ({n} instances each)",
        "nosig/swap/LU <= 1e-10, rebuild <= 1e-12",
        f"nosig={no_signal:.2g} swap={swap:.2g} LU={lu:.2g} rebuild={roundtrip:.2g}",
        ok,
    )


CRITERIA: dict[str, Callable[[], CriterionResult]] = {
    "AC-1": ac1_pure_maximal_pair,
    "AC-2": ac2_pure_pair_oracle,
    "AC-3": ac3_mixed_pair_criterion,
    "AC-4a": ac4a_equal_werner_threshold,
    "AC-4b": ac4b_werner_vs_pure_threshold,
    "AC-5": ac5_bound_chain,
    "AC-6": ac6_chsh_link,
    "AC-7": ac7_visibility_products,
    "AC-8": ac8_sampling,
    "AC-9": ac9_general_bob,
    "AC-10": ac10_invariants,
}


@contextlib.contextmanager
def injected_fault(name: str | None):
    """Temporarily break the library on purpose (``"j-sign"`` negates J)."""
    if name is None:
        yield
        return
    if name != "j-sign":
        raise ValueError(f"unknown fault {name!r}")
    original = network.compute_J
    network.compute_J = lambda dist: -original(dist)
    try:
        yield
    finally:
        network.compute_J = original


def run(criterion_id: str) -> CriterionResult:
    start = time.perf_counter()
    result = CRITERIA[criterion_id]()
    result.seconds = time.perf_counter() - start
    return result


def run_all(only=None, fault: str | None = None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    with injected_fault(fault):
        for cid in CRITERIA:
            if only and cid not in only:
                continue
            result = run(cid)
            if echo:
                echo(result.line())
            results.append(result)
    return results
