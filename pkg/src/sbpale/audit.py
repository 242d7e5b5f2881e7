"""Semi-boundedness auditing.

The energy condition in physical variables,

    S = diag(P) M + M^T diag(P) + E^T diag(P_surf) diag(n*xdot) E - alpha diag(P) <= 0,

is congruent to the reference-variable condition

    S_hat = diag(P_hat) M_hat + M_hat^T diag(P_hat) - alpha diag(P_hat) <= 0

through diag(sqrt J)^-1, so the two have identical inertia and, with
alpha = 0, a non-positive S_hat pins the spectrum of M_hat to the left half
plane.  Eigenvalues come from an in-repo cyclic Jacobi solver: the audit
matrices are small and Jacobi's backward stability makes the PASS/FAIL
verdict trustworthy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ale import AleOperators, SystemMatrices

PASS_TOL = 1e-10


def jacobi_eigenvalues(s: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.

    Sweeps continue until the off-diagonal Frobenius norm drops below
    ``tol`` times the Frobenius norm of the input.  Non-symmetric input
    (relative max-norm asymmetry above 1e-12) raises ValueError.
    """
    a = np.array(s, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    scale = np.abs(a).max()
    if scale == 0.0:
        return np.zeros(n)
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)

    fro = np.linalg.norm(a)
    skip = 1e-40 * fro
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[off_mask])
        if off <= tol * fro:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                app, aqq = a[p, p], a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - sn * col_q
                a[:, q] = sn * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - sn * row_q
                a[q, :] = sn * row_p + c * row_q
                # exact 2x2 update is more accurate than the rotated block
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
        fro = np.linalg.norm(a)
    raise ArithmeticError(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")


def energy_matrix(system: SystemMatrices, ale: AleOperators, alpha: float = 0.0) -> np.ndarray:
    """Symmetric energy-condition matrix S in physical variables."""
    p = ale.p
    m = system.m
    s = p[:, None] * m + m.T * p[None, :]
    for k, idx in enumerate(ale.surface_indices):
        s[idx, idx] += ale.surface_weights[k] * ale.normal_velocity[k]
    s -= alpha * np.diag(p)
    return s


def reference_matrix(system: SystemMatrices, ale: AleOperators, alpha: float = 0.0) -> np.ndarray:
    """Symmetric semi-boundedness matrix S_hat in reference variables."""
    ph = ale.p_hat
    mh = system.m_hat
    return ph[:, None] * mh + mh.T * ph[None, :] - alpha * np.diag(ph)


@dataclass
class AuditReport:
    t: float
    lambda_max_energy: float
    lambda_max_ref: float
    alpha: float
    passed: bool


def audit(system: SystemMatrices, ale: AleOperators, alpha: float = 0.0, t: float = 0.0, tol: float = 1e-12) -> AuditReport:
    """Largest eigenvalues of S and S_hat; PASS when S is non-positive.

    PASS means lambda_max(S) <= 1e-10 * max|S|, the roundoff-sized band
    around zero for a semi-bounded scheme at the given ``alpha``.
    """
    s = energy_matrix(system, ale, alpha)
    s_hat = reference_matrix(system, ale, alpha)
    lam = jacobi_eigenvalues(s, tol)
    lam_hat = jacobi_eigenvalues(s_hat, tol)
    scale = np.abs(s).max()
    return AuditReport(
        t=float(t),
        lambda_max_energy=float(lam[-1]),
        lambda_max_ref=float(lam_hat[-1]),
        alpha=float(alpha),
        passed=bool(lam[-1] <= PASS_TOL * scale),
    )


def matrix_inertia(eigvals: np.ndarray, scale: float, zero_tol: float = 1e-10) -> tuple[int, int, int]:
    """Counts of (negative, zero, positive) eigenvalues with a relative zero band."""
    band = zero_tol * max(scale, 1e-300)
    neg = int(np.sum(eigvals < -band))
    pos = int(np.sum(eigvals > band))
    return neg, eigvals.size - neg - pos, pos


def inertia_equivalence(system: SystemMatrices, ale: AleOperators, alpha: float = 0.0, tol: float = 1e-12) -> bool:
    """True when S and S_hat have matching inertia (the congruence law)."""
    s = energy_matrix(system, ale, alpha)
    s_hat = reference_matrix(system, ale, alpha)
    lam = jacobi_eigenvalues(s, tol)
    lam_hat = jacobi_eigenvalues(s_hat, tol)
    return matrix_inertia(lam, np.abs(s).max()) == matrix_inertia(lam_hat, np.abs(s_hat).max())
