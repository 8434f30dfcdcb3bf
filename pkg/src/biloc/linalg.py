"""Self-contained Jacobi kernels for the small fixed-size matrices used here.

Everything in this package works with 2x2, 3x3 and 4x4 operators, where a
cyclic Jacobi sweep converges in a handful of iterations and gives full
relative accuracy.  The routines are deliberately plain numpy.
"""

from __future__ import annotations

import numpy as np

OFF_DIAGONAL_TOL = 1e-14
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    pass


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(matrix, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric or complex Hermitian matrix.

    Cyclic Jacobi: each (p, q) rotation first removes the phase of the
    off-diagonal element, then applies the real symmetric 2x2 rotation.

    Parameters
    ----------
    matrix : array_like, shape (n, n)
        Hermitian input. Only the Hermitian part is used.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``tol * max(1, ||matrix||_F)``.
    max_sweeps : int
        Hard cap on the number of full sweeps.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, ``matrix @ v = v @ diag(w)``.
    """
    a = np.array(matrix)
    complex_input = np.iscomplexobj(a)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    v = np.eye(n, dtype=a.dtype)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps):
        if _off_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r if complex_input else np.sign(apq)
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) on (p, q) followed by the real rotation
                g_pp = c
                g_pq = s
                g_qp = -s * np.conj(phase)
                g_qq = c * np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = col_p * g_pp + col_q * g_qp
                a[:, q] = col_p * g_pq + col_q * g_qq
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = np.conj(g_pp) * row_p + np.conj(g_qp) * row_q
                a[q, :] = np.conj(g_pq) * row_p + np.conj(g_qq) * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * g_pp + vq * g_qp
                v[:, q] = vp * g_pq + vq * g_qq
    else:
        if _off_norm(a) >= threshold:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_svd(matrix, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """One-sided (Hestenes) Jacobi SVD of a real square matrix.

    Returns ``(u, s, v)`` with ``matrix = u @ diag(s) @ v.T``, ``s`` sorted
    in descending order and both ``u`` and ``v`` orthogonal.  Columns of
    ``u`` belonging to zero singular values are completed to an orthonormal
    basis.
    """
    w = np.array(matrix, dtype=float)
    n = w.shape[1]
    if w.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    v = np.eye(n)
    # work on a unit-scale copy so that products of column norms cannot under/overflow
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return np.eye(n), np.zeros(n), np.eye(n)
    w = w / scale
    # columns at round-off level relative to the whole matrix count as zero
    negligible = (4.0 * np.finfo(float).eps) ** 2 * float(np.sum(w * w))

    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = w[:, p] @ w[:, p]
                beta = w[:, q] @ w[:, q]
                gamma = w[:, p] @ w[:, q]
                if min(alpha, beta) <= negligible or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wp = w[:, p].copy()
                w[:, p] = c * wp - s * w[:, q]
                w[:, q] = s * wp + c * w[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")

    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    w = w[:, order]
    v = v[:, order]

    u = np.zeros((n, n))
    filled = []
    for k in range(n):
        if s[k] > 1e-13 * max(1.0, float(s[0])):
            u[:, k] = w[:, k] / s[k]
            filled.append(k)
    missing = [k for k in range(n) if k not in filled]
    if missing:
        u[:, missing] = _complete_basis(u[:, filled], len(missing))
    return u, s * scale, v


def _complete_basis(columns: np.ndarray, count: int) -> np.ndarray:
    # Gram-Schmidt the standard basis against the given orthonormal columns.
    n = columns.shape[0]
    basis = [columns[:, k] for k in range(columns.shape[1])]
    extra = []
    for e in np.eye(n):
        vec = e.copy()
        for b in basis + extra:
            vec -= (b @ vec) * b
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            extra.append(vec / norm)
        if len(extra) == count:
            break
    return np.column_stack(extra)
