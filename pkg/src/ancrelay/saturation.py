"""Pieces shared by the diamond and subnet solvers.

Both maximise ``(s . v)**2 / (noise_var + v^T C v)`` over a box on a
hyperplane where one node ``k`` is pinned to its bound.  The saturation loop
(first phase) follows the closed-form recursion; :func:`refine_on_hyperplane`
then certifies or repairs its output.

Repair works in bound fractions ``u = v / v_max`` in ``[0, 1]``.  For a fixed
sign of the signal sum ``A = s . v`` the problem is pseudo-concave, and the
substitution ``w = u / A``, ``t = 1 / A`` turns it into the strictly convex
quadratic program::

    minimise   nv t**2 + w^T C~ w
    subject to s~ . w = 1,  w_k = t,  0 <= w_j <= t

with ``s~ = s * v_max`` and ``C~ = diag(v_max) C diag(v_max)``.  Its unique
solution is the exact optimum on the hyperplane for that sign; both signs
are tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SATURATION_RTOL",
    "DegenerateHyperplane",
    "HyperplaneCandidate",
    "select_best",
    "ratio_snr",
    "refine_on_hyperplane",
    "finish_candidate",
]

# beta >= beta_max * (1 - SATURATION_RTOL) counts as saturated.
SATURATION_RTOL = 1e-12


class DegenerateHyperplane(ArithmeticError):
    """Every hyperplane had a zero signal sum over its saturated set."""


@dataclass(frozen=True)
class HyperplaneCandidate:
    """Best point found on the hyperplane where node ``k`` is pinned to its bound.

    ``k`` and the members of ``saturated`` / ``zeroed`` are 0-based node
    positions.  ``zeroed`` nodes sit at 0 (clamped, unreachable, or placed
    there by the repair phase).  ``iterations`` counts passes of the
    saturation loop after its initial evaluation; ``refined`` tells whether
    the repair phase moved the loop's output, and ``loop_beta`` keeps that
    output.
    """

    k: int
    saturated: frozenset[int]
    beta: np.ndarray
    snr: float
    zeroed: frozenset[int] = field(default_factory=frozenset)
    iterations: int = 0
    degenerate: bool = False
    refined: bool = False
    loop_beta: np.ndarray | None = None
    loop_saturated: frozenset[int] | None = None

    @property
    def unsaturated(self) -> list[int]:
        n = self.beta.size
        return [i for i in range(n) if i not in self.saturated and i not in self.zeroed]


def select_best(candidates: list[HyperplaneCandidate]) -> HyperplaneCandidate:
    """Highest-SNR candidate; the smallest ``k`` wins ties."""
    if not candidates:
        raise ValueError("no candidates")
    if all(c.degenerate for c in candidates):
        raise DegenerateHyperplane(
            "all hyperplanes degenerate: the saturated signal sum is zero on every one"
        )
    best = None
    for c in sorted(candidates, key=lambda c: c.k):
        if best is None or c.snr > best.snr:
            best = c
    return best


def ratio_snr(s, C, noise_var: float, source_power: float, v) -> float:
    v = np.asarray(v, dtype=float)
    return source_power * float(np.dot(s, v)) ** 2 / (noise_var + float(v @ C @ v))


def _active_set_qp(G, E, e, A, b, x, W, max_iter):
    """Primal active-set method for ``min 1/2 x^T G x`` s.t. ``E x = e``, ``A x >= b``.

    ``x`` must be feasible and ``W`` a set of inequality rows active at it.
    Returns the solution and the final working set.
    """
    for _ in range(max_iter):
        rows = sorted(W)
        Aw = np.vstack([E, A[rows]]) if rows else E
        # Step within the null space of the working constraints.
        _, sv, vt = np.linalg.svd(Aw)
        rank = int(np.sum(sv > 1e-12 * sv[0]))
        Z = vt[rank:].T
        if Z.shape[1]:
            y = np.linalg.solve(Z.T @ G @ Z, -Z.T @ (G @ x))
            p = Z @ y
        else:
            p = np.zeros_like(x)
        if np.max(np.abs(p)) <= 1e-12 * max(1.0, float(np.max(np.abs(x)))):
            lam = np.linalg.lstsq(Aw.T, G @ x, rcond=None)[0]
            lam_ineq = lam[E.shape[0]:]
            if not rows or np.min(lam_ineq) >= -1e-10 * max(1.0, float(np.max(np.abs(lam)))):
                return x, W
            W = W - {rows[int(np.argmin(lam_ineq))]}
            continue
        alpha, block = 1.0, None
        Ap = A @ p
        for j in range(A.shape[0]):
            if j in W or Ap[j] >= 0:
                continue
            step = (b[j] - A[j] @ x) / Ap[j]
            if step < alpha:
                alpha, block = max(step, 0.0), j
        x = x + alpha * p
        if block is not None:
            W = W | {block}
    raise ArithmeticError("active-set repair did not converge")


def _solve_orientation(st, Ct, nv, k, u0):
    """Exact optimum (in fractions ``u``) for the branch ``st . u > 0``, or None."""
    n = st.size
    a0 = float(st @ u0)
    if not a0 > 0:
        u0 = np.where(st > 0, 1.0, 0.0)
        u0[k] = 1.0
        a0 = float(st @ u0)
        if not a0 > 0:
            return None
    # x = (w_0..w_{n-1}, t)
    G = np.zeros((n + 1, n + 1))
    G[:n, :n] = 2.0 * Ct
    G[n, n] = 2.0 * nv
    E = np.zeros((2, n + 1))
    E[0, :n] = st
    E[1, k], E[1, n] = 1.0, -1.0
    e = np.array([1.0, 0.0])
    others = [j for j in range(n) if j != k]
    A = np.zeros((2 * len(others), n + 1))
    for r, j in enumerate(others):
        A[2 * r, j] = 1.0  # w_j >= 0
        A[2 * r + 1, j], A[2 * r + 1, n] = -1.0, 1.0  # t - w_j >= 0
    b = np.zeros(A.shape[0])
    x0 = np.concatenate([u0 / a0, [1.0 / a0]])
    W = set()
    for r, j in enumerate(others):
        if u0[j] <= 0.0:
            W.add(2 * r)
        elif u0[j] >= 1.0:
            W.add(2 * r + 1)
    x, W = _active_set_qp(G, E, e, A, b, x0, W, max_iter=50 * (n + 1) ** 2)
    t = x[n]
    u = np.clip(x[:n] / t, 0.0, 1.0)
    u[k] = 1.0
    for r, j in enumerate(others):
        if 2 * r in W:
            u[j] = 0.0
        elif 2 * r + 1 in W:
            u[j] = 1.0
    return u


def refine_on_hyperplane(s, C, noise_var, source_power, h, bmax, k, beta0):
    """Exact maximiser on the hyperplane ``beta_k = bmax_k``, starting from ``beta0``.

    ``v = beta * h`` enters the ratio.  Returns ``None`` unless a strictly
    better point than ``beta0`` exists.  Nodes with ``h == 0`` stay at 0.
    """
    s, C = np.asarray(s, float), np.asarray(C, float)
    h, bmax = np.asarray(h, float), np.asarray(bmax, float)
    vmax = bmax * h
    live = [j for j in range(s.size) if vmax[j] != 0.0]
    if k not in live:
        return None
    kk = live.index(k)
    st = s[live] * vmax[live]
    Ct = vmax[live, None] * C[np.ix_(live, live)] * vmax[None, live]
    u_start = np.clip(np.asarray(beta0, float)[live] / bmax[live], 0.0, 1.0)

    best, best_snr = None, ratio_snr(s, C, noise_var, source_power, np.asarray(beta0) * h)
    for sign in (1.0, -1.0):
        u = _solve_orientation(sign * st, Ct, noise_var, kk, u_start.copy())
        if u is None:
            continue
        beta = np.zeros(s.size)
        beta[live] = u * bmax[live]
        beta[k] = bmax[k]
        snr = ratio_snr(s, C, noise_var, source_power, beta * h)
        if snr > best_snr * (1.0 + 1e-13):
            best, best_snr = beta, snr
    return best


def finish_candidate(k, beta, saturated, zeroed, iterations, s, C, noise_var,
                     source_power, h, bmax, refine=True) -> HyperplaneCandidate:
    """Wrap the saturation loop's output, repairing it when it is not optimal."""
    snr = ratio_snr(s, C, noise_var, source_power, beta * h)
    if refine:
        better = refine_on_hyperplane(s, C, noise_var, source_power, h, bmax, k, beta)
        if better is not None:
            n = better.size
            return HyperplaneCandidate(
                k,
                frozenset(i for i in range(n) if better[i] == bmax[i]),
                better,
                ratio_snr(s, C, noise_var, source_power, better * h),
                frozenset(i for i in range(n) if better[i] == 0.0),
                iterations,
                refined=True,
                loop_beta=beta,
                loop_saturated=frozenset(saturated),
            )
    return HyperplaneCandidate(
        k, frozenset(saturated), beta, snr, frozenset(zeroed), iterations,
        loop_beta=beta, loop_saturated=frozenset(saturated),
    )
