"""Compiled objective and simplex search used by :mod:`biloc.optimizer`.

Parameter layout (all modes start with the four Bloch angle pairs)::

    [theta_a0, phi_a0, theta_a1, phi_a1, theta_c0, phi_c0, theta_c1, phi_c1, bob...]

Bob's block depends on the mode:

* ``FIXED_BSM``: two rotation vectors (3 + 3) for ``exp(-i h.sigma/2)`` on
  each of his qubits, followed by the standard Bell-state measurement.
* ``GENERAL_BOB``: 15 generator coefficients of a two-qubit unitary ``U``
  applied before the Bell-state measurement.
* ``TWO_INPUT_BOB``: 15 + 15 coefficients; input y measures
  ``U_y^dagger (sz (x) 1) U_y``.

Correlators use the Pauli-coefficient form of the Born rule::

    <sigma_i (x) B (x) sigma_l> = 1/4 sum_{nu,lam} t_ab[i, nu] beta[nu, lam] t_bc[lam, l]

with ``beta[nu, lam] = Tr[B (sigma_nu (x) sigma_lam)]``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FIXED_BSM = 0
GENERAL_BOB = 1
TWO_INPUT_BOB = 2

N_SETTINGS = 8
N_PARAMS = {FIXED_BSM: N_SETTINGS + 6, GENERAL_BOB: N_SETTINGS + 15, TWO_INPUT_BOB: N_SETTINGS + 30}


def pauli_tables():
    """``(products, generators)``: the 16 two-qubit Pauli products and the 15 traceless ones."""
    s = [
        np.eye(2, dtype=np.complex128),
        np.array([[0, 1], [1, 0]], dtype=np.complex128),
        np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
        np.array([[1, 0], [0, -1]], dtype=np.complex128),
    ]
    products = np.zeros((4, 4, 4, 4), dtype=np.complex128)
    for nu in range(4):
        for lam in range(4):
            products[nu, lam] = np.kron(s[nu], s[lam])
    generators = products.reshape(16, 4, 4)[1:].copy()
    return products, generators


PRODUCTS, GENERATORS = pauli_tables()
ZZ = PRODUCTS[3, 3].copy()
XX = PRODUCTS[1, 1].copy()
ZI = PRODUCTS[3, 0].copy()


@njit(cache=True)
def _bloch(theta, phi):
    out = np.empty(3)
    st = np.sin(theta)
    out[0] = st * np.cos(phi)
    out[1] = st * np.sin(phi)
    out[2] = np.cos(theta)
    return out


@njit(cache=True)
def rodrigues(h):
    """Rotation matrix for the rotation vector ``h`` (angle ``|h|`` about ``h``)."""
    angle = np.sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
    r = np.eye(3)
    if angle < 1e-300:
        return r
    k = h / angle
    kx = np.zeros((3, 3))
    kx[0, 1] = -k[2]
    kx[0, 2] = k[1]
    kx[1, 0] = k[2]
    kx[1, 2] = -k[0]
    kx[2, 0] = -k[1]
    kx[2, 1] = k[0]
    return r + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)


@njit(cache=True)
def unitary_from_generator(coeffs, generators):
    """``exp(-i sum_k coeffs[k] generators[k])`` via a Hermitian eigensolve."""
    h = np.zeros((4, 4), dtype=np.complex128)
    for k in range(15):
        h += coeffs[k] * generators[k]
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w)
    return (v * phases) @ v.conj().T


@njit(cache=True)
def pauli_coefficients(b, products):
    """``beta[nu, lam] = Re Tr[b (sigma_nu (x) sigma_lam)]``."""
    beta = np.zeros((4, 4))
    for nu in range(4):
        for lam in range(4):
            acc = 0.0 + 0.0j
            p = products[nu, lam]
            for i in range(4):
                for j in range(4):
                    acc += b[i, j] * p[j, i]
            beta[nu, lam] = acc.real
    return beta


@njit(cache=True)
def bob_coefficients(params, mode, products, generators):
    """Pauli coefficients of Bob's B0 and B1 observables."""
    beta0 = np.zeros((4, 4))
    beta1 = np.zeros((4, 4))
    bob = params[N_SETTINGS:]
    if mode == FIXED_BSM:
        r_left = rodrigues(bob[0:3])
        r_right = rodrigues(bob[3:6])
        # u^dagger sigma_k u = sum_i R[k, i] sigma_i
        for i in range(3):
            for j in range(3):
                beta0[i + 1, j + 1] = 4.0 * r_left[2, i] * r_right[2, j]
                beta1[i + 1, j + 1] = 4.0 * r_left[0, i] * r_right[0, j]
    elif mode == GENERAL_BOB:
        u = unitary_from_generator(bob[0:15], generators)
        ud = u.conj().T
        beta0 = pauli_coefficients(ud @ products[3, 3] @ u, products)
        beta1 = pauli_coefficients(ud @ products[1, 1] @ u, products)
    else:
        u0 = unitary_from_generator(bob[0:15], generators)
        u1 = unitary_from_generator(bob[15:30], generators)
        beta0 = pauli_coefficients(u0.conj().T @ products[3, 0] @ u0, products)
        beta1 = pauli_coefficients(u1.conj().T @ products[3, 0] @ u1, products)
    return beta0, beta1


@njit(cache=True)
def evaluate(params, mode, t_ab, t_bc, products, generators):
    """Return ``(S, I, J)`` for a parameter vector."""
    a0 = _bloch(params[0], params[1])
    a1 = _bloch(params[2], params[3])
    c0 = _bloch(params[4], params[5])
    c1 = _bloch(params[6], params[7])
    beta0, beta1 = bob_coefficients(params, mode, products, generators)
    left = np.ascontiguousarray(t_ab[1:, :])
    right = np.ascontiguousarray(t_bc[:, 1:])
    k0 = 0.25 * (left @ beta0 @ right)
    k1 = 0.25 * (left @ beta1 @ right)
    i_val = (a0 + a1) @ (k0 @ (c0 + c1))
    j_val = (a0 - a1) @ (k1 @ (c0 - c1))
    s_val = np.sqrt(abs(i_val)) + np.sqrt(abs(j_val))
    return s_val, i_val, j_val


@njit(cache=True)
def _neg_score(x, mode, t_ab, t_bc, products, generators):
    return -evaluate(x, mode, t_ab, t_bc, products, generators)[0]


@njit(cache=True, nogil=True)
def nelder_mead(x0, step, mode, t_ab, t_bc, products, generators, max_iter, ftol, xtol):
    """Minimize ``-S`` from ``x0`` with the adaptive Nelder-Mead simplex.

    Returns ``(x_best, f_best, iterations, evaluations, converged)``.
    """
    n = x0.size
    rho = 1.0
    chi = 1.0 + 2.0 / n
    psi = 0.75 - 1.0 / (2.0 * n)
    sigma = 1.0 - 1.0 / n

    sim = np.empty((n + 1, n))
    fsim = np.empty(n + 1)
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step
    for i in range(n + 1):
        fsim[i] = _neg_score(sim[i], mode, t_ab, t_bc, products, generators)
    evals = n + 1

    converged = False
    iterations = 0
    while iterations < max_iter:
        order = np.argsort(fsim)
        sim = sim[order]
        fsim = fsim[order]

        fspread = 0.0
        xspread = 0.0
        for i in range(1, n + 1):
            fspread = max(fspread, abs(fsim[i] - fsim[0]))
            for j in range(n):
                xspread = max(xspread, abs(sim[i, j] - sim[0, j]))
        if fspread <= ftol and xspread <= xtol:
            converged = True
            break
        iterations += 1

        xbar = np.zeros(n)
        for i in range(n):
            xbar += sim[i]
        xbar /= n

        xr = (1.0 + rho) * xbar - rho * sim[n]
        fxr = _neg_score(xr, mode, t_ab, t_bc, products, generators)
        evals += 1
        shrink = False
        if fxr < fsim[0]:
            xe = (1.0 + rho * chi) * xbar - rho * chi * sim[n]
            fxe = _neg_score(xe, mode, t_ab, t_bc, products, generators)
            evals += 1
            if fxe < fxr:
                sim[n] = xe
                fsim[n] = fxe
            else:
                sim[n] = xr
                fsim[n] = fxr
        elif fxr < fsim[n - 1]:
            sim[n] = xr
            fsim[n] = fxr
        elif fxr < fsim[n]:
            xc = (1.0 + psi * rho) * xbar - psi * rho * sim[n]
            fxc = _neg_score(xc, mode, t_ab, t_bc, products, generators)
            evals += 1
            if fxc <= fxr:
                sim[n] = xc
                fsim[n] = fxc
            else:
                shrink = True
        else:
            xcc = (1.0 - psi) * xbar + psi * sim[n]
            fxcc = _neg_score(xcc, mode, t_ab, t_bc, products, generators)
            evals += 1
            if fxcc < fsim[n]:
                sim[n] = xcc
                fsim[n] = fxcc
            else:
                shrink = True
        if shrink:
            for i in range(1, n + 1):
                sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                fsim[i] = _neg_score(sim[i], mode, t_ab, t_bc, products, generators)
            evals += n

    best = np.argmin(fsim)
    return sim[best].copy(), fsim[best], iterations, evals, converged


@njit(cache=True, nogil=True)
def coordinate_refine(x0, f0, h, mode, t_ab, t_bc, products, generators):
    """One pass of +-h probes per coordinate, keeping any improvement."""
    x = x0.copy()
    f = f0
    evals = 0
    for i in range(x.size):
        for sgn in (1.0, -1.0):
            old = x[i]
            x[i] = old + sgn * h
            ft = _neg_score(x, mode, t_ab, t_bc, products, generators)
            evals += 1
            if ft < f:
                f = ft
                break
            x[i] = old
    return x, f, evals
