"""Stabilizing solutions of the discrete algebraic Riccati equation.

The LQ data enters through the output pair: with stage cost
``|C x + D u|^2`` the equation solved is

    P = A'PA + C'C - (A'PB + C'D) (D'D + B'PB)^{-1} (B'PA + D'C)

and the stabilizing feedback uses the sign convention ``A_K = A + B K``
with ``K = -(D'D + B'PB)^{-1} (B'PA + D'C)``.

The solver bootstraps a stabilizing gain by value iteration (pseudoinverse
weights, so a singular ``D'D`` is fine) and then refines with Newton steps,
each of which is a single Smith-doubling Lyapunov solve. Stability is always
certified operationally through the Smith iteration, never spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotStabilizable, NotStable, SingularMatrix, SingularWeight
from .matcore import DEFAULT_TOL, EPS, ToleranceConfig, solve_linear
from .reachdecomp import StaircaseForm, SystemQuadruple
from .stablyap import solve_dlyap_stable, stability_certificate

__all__ = [
    "RiccatiSolution",
    "RestrictedSolution",
    "solve_dare",
    "solve_dare_restricted",
    "gain_partition",
]


@dataclass
class RiccatiSolution:
    """Stabilizing Riccati solution with gain and innovation weight.

    ``P`` is symmetric positive semidefinite, ``Rw = D'D + B'PB`` is strictly
    positive definite, and ``A_K = A + B K`` is discrete-stable (certified by
    Smith convergence).
    """

    P: np.ndarray
    K: np.ndarray
    Rw: np.ndarray
    A_K: np.ndarray
    iterations: int


@dataclass
class RestrictedSolution:
    """Riccati data for the reachable part ``(A_c, B_c, C_c, D)``."""

    P_c: np.ndarray
    K_c: np.ndarray
    Rw_c: np.ndarray
    iterations: int


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _dare_kernel(A, B, C, D, cfg: ToleranceConfig):
    """Shared solver core; returns (P, K, Rw, A_K, iterations)."""
    n = A.shape[0]
    Q = C.T @ C
    S = C.T @ D
    R = D.T @ D

    # Phase 1: find any certified stabilizing gain. K = 0 works whenever A
    # is already stable (and keeps the Newton weights maximal, since policy
    # costs only decrease from there). Otherwise bootstrap by value
    # iteration from P = 0; pseudoinverse weights tolerate a singular stage
    # weight before P has built up.
    P = np.zeros((n, n))
    K = None
    boot_iters = 0
    found = False
    if stability_certificate(A, cfg):
        K = np.zeros((B.shape[1], n))
        found = True
    else:
        for it in range(cfg.max_iter):
            Rw = _sym(R + B.T @ P @ B)
            L = B.T @ P @ A + S.T
            Rw_pinv = np.linalg.pinv(Rw, hermitian=True)
            K = -(Rw_pinv @ L)
            if stability_certificate(A + B @ K, cfg):
                boot_iters = it
                found = True
                break
            P = _sym(A.T @ P @ A + Q - L.T @ (Rw_pinv @ L))
            if not np.all(np.isfinite(P)):
                raise NotStabilizable(
                    f"value iteration diverged after {it + 1} steps; "
                    "no stabilizing feedback exists for this system"
                )
    if not found:
        raise NotStabilizable(
            f"no stabilizing gain certified within {cfg.max_iter} value-iteration steps"
        )

    # Phase 2: Newton (policy iteration) refinement. Each step solves the
    # closed-loop cost equation P = A_K' P A_K + (C + D K)'(C + D K), which
    # keeps the right-hand side positive semidefinite by construction and
    # converges quadratically from a stabilizing gain.
    newton_iters = 0
    prev_dp = np.inf
    for it in range(1, cfg.max_iter + 1):
        newton_iters = it
        CK = C + D @ K
        A_K = A + B @ K
        try:
            gram = solve_dlyap_stable(A_K.T, CK.T @ CK, cfg)
        except NotStable as exc:
            raise NotStabilizable(
                "Newton iterate lost closed-loop stability; system violates "
                "the operational assumptions"
            ) from exc
        P_new = gram.W
        Rw = _sym(R + B.T @ P_new @ B)
        try:
            K = -solve_linear(Rw, B.T @ P_new @ A + S.T, cfg)
        except SingularMatrix as exc:
            raise SingularWeight(
                "innovation weight D'D + B'PB is singular to working tolerance"
            ) from exc
        dp = float(np.linalg.norm(P_new - P, "fro"))
        P = P_new
        p_scale = 1.0 + float(np.linalg.norm(P, "fro"))
        if dp <= 64.0 * EPS * p_scale:
            break
        if dp >= prev_dp and dp <= np.sqrt(EPS) * p_scale:
            break  # rounding floor reached; the residual check below decides
        prev_dp = dp
    else:
        raise ConvergenceFailure(
            f"Newton refinement did not settle within {cfg.max_iter} iterations"
        )

    P = _sym(P)
    Rw = _sym(R + B.T @ P @ B)
    try:
        chol = np.linalg.cholesky(Rw)
    except np.linalg.LinAlgError as exc:
        raise SingularWeight("innovation weight D'D + B'PB is not positive definite") from exc
    if float(np.min(np.diag(chol)) ** 2) <= cfg.abs_zero_tol:
        raise SingularWeight(
            "innovation weight D'D + B'PB has a pivot at or below the zero tolerance"
        )
    K = -solve_linear(Rw, B.T @ P @ A + S.T, cfg)
    A_K = A + B @ K

    residual = np.linalg.norm(
        A.T @ P @ A + Q - (B.T @ P @ A + S.T).T @ solve_linear(Rw, B.T @ P @ A + S.T, cfg) - P,
        "fro",
    )
    if residual > cfg.residual_tol * (1.0 + float(np.linalg.norm(P, "fro"))):
        raise ConvergenceFailure(
            f"Riccati residual {residual:.3e} exceeds tolerance after convergence"
        )
    if not stability_certificate(A_K, cfg):
        raise NotStabilizable("final closed loop failed the Smith stability certificate")
    return P, K, Rw, A_K, boot_iters + newton_iters


def solve_dare(sys: SystemQuadruple, cfg: ToleranceConfig = DEFAULT_TOL) -> RiccatiSolution:
    """Stabilizing Riccati solution for the full system.

    Parameters
    ----------
    sys : SystemQuadruple
        Plant data; ``(A, B)`` must be stabilizable and the stabilizing
        solution must exist with a strictly positive definite innovation
        weight.
    cfg : ToleranceConfig
        Tolerances and iteration budget.

    Raises
    ------
    NotStabilizable
        No stabilizing feedback could be certified.
    SingularWeight
        ``D'D + B'PB`` is singular at the solution.
    ConvergenceFailure
        Iteration budget exhausted or residual above tolerance.
    """
    P, K, Rw, A_K, iters = _dare_kernel(sys.A, sys.B, sys.C, sys.D, cfg)
    return RiccatiSolution(P=P, K=K, Rw=Rw, A_K=A_K, iterations=iters)


def solve_dare_restricted(
    st: StaircaseForm, D, cfg: ToleranceConfig = DEFAULT_TOL
) -> RestrictedSolution:
    """Riccati solution restricted to the reachable part ``(A_c, B_c, C_c, D)``.

    Requires ``n_c >= 1``. Consistency with the full solution: ``P_c`` equals
    the leading ``n_c`` block of ``T' P T``.
    """
    if st.n_c < 1:
        raise ValueError("restricted Riccati equation needs a nonempty reachable part")
    D = np.asarray(D, dtype=np.float64)
    P_c, K_c, Rw_c, _, iters = _dare_kernel(st.A_c, st.B_c, st.C_c, D, cfg)
    return RestrictedSolution(P_c=P_c, K_c=K_c, Rw_c=Rw_c, iterations=iters)


def gain_partition(sol: RiccatiSolution, st: StaircaseForm):
    """Split the gain in the staircase basis: ``K T = [K_c  K_u]``."""
    KT = sol.K @ st.T
    return KT[:, : st.n_c], KT[:, st.n_c :]
