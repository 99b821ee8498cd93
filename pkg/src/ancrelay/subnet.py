"""One relay layer with correlated input noise feeding a single target node.

Writing ``v_i = beta_i * h_it`` the target SNR is::

    P_s * (s . v)**2 / (noise_var + v^T C v)

On a hyperplane with saturated set ``S`` held at ``v_S = beta_max,S * h_S``,
the stationarity conditions of the free nodes ``U`` are linear once the
common ratio ``c = D / A`` (noise power over signal amplitude) is known::

    C_UU v_U = c s_U - C_US v_S

and substituting back gives ``c`` in closed form (see ``_solve_free``).
With ``C = noise_var * I`` this is exactly the diamond closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .saturation import SATURATION_RTOL, HyperplaneCandidate, finish_candidate, select_best
from .propagation import LayerState

__all__ = [
    "SubnetProblem",
    "subnet_problem",
    "subnet_snr",
    "subnet_hyperplane_solve",
    "solve_subnet",
    "stationary_beta",
]


@dataclass(frozen=True)
class SubnetProblem:
    s: np.ndarray
    C: np.ndarray
    h_t: np.ndarray
    powers: np.ndarray
    source_power: float
    noise_var: float

    def __post_init__(self) -> None:
        n = self.s.size
        if self.C.shape != (n, n) or self.h_t.shape != (n,) or self.powers.shape != (n,):
            raise ValueError("subnet problem dimensions disagree")

    @property
    def size(self) -> int:
        return self.s.size

    @property
    def beta_max(self) -> np.ndarray:
        rx = self.s**2 * self.source_power + np.diag(self.C)
        return np.sqrt(self.powers / rx)


def subnet_problem(state: LayerState, net, target: int) -> SubnetProblem:
    """Subproblem from the layer ``state`` toward node ``target`` (0-based) of the next layer."""
    return SubnetProblem(
        np.asarray(state.s, dtype=float),
        np.asarray(state.C, dtype=float),
        np.asarray(net.gains[state.layer][:, target], dtype=float),
        np.asarray(net.relay_powers[state.layer - 1], dtype=float),
        net.source_power,
        net.noise_var,
    )


def subnet_snr(prob: SubnetProblem, beta) -> float:
    v = np.asarray(beta, dtype=float) * prob.h_t
    sig = float(np.dot(prob.s, v)) ** 2
    return prob.source_power * sig / (prob.noise_var + float(v @ prob.C @ v))


def stationary_beta(prob: SubnetProblem, beta, i: int) -> float:
    """Value of ``beta_i`` solving its own extremum condition, the rest held fixed.

    Uses ``alpha`` (signal amplitude from the other nodes) and ``gamma``
    (their noise correlation with node ``i``, normalised by ``noise_var``)::

        beta_i = (s_i + s_i Q / nv - alpha gamma) / (h_it (alpha C_ii / nv - s_i gamma))

    where ``Q`` is the forwarded noise power of the other nodes.
    """
    v = np.asarray(beta, dtype=float) * prob.h_t
    others = np.arange(v.size) != i
    nv = prob.noise_var
    s, C = prob.s, prob.C
    alpha = float(np.dot(s[others], v[others]))
    gamma = float(np.dot(C[i, others], v[others])) / nv
    q = float(v[others] @ C[np.ix_(others, others)] @ v[others])
    num = s[i] + s[i] * q / nv - alpha * gamma
    den = prob.h_t[i] * (alpha * C[i, i] / nv - s[i] * gamma)
    return num / den


def _solve_free(prob: SubnetProblem, v: np.ndarray, S: list[int], U: list[int]):
    """Stationary ``v_U`` given saturated ``v_S``; ``None`` if the ratio is undefined.

    With ``g = C_US v_S`` and ``M = C_UU^{-1}``::

        c = (nv + v_S^T C_SS v_S - g^T M g) / (s_S . v_S - s_U^T M g)
    """
    s, C, nv = prob.s, prob.C, prob.noise_var
    vS = v[S]
    a_S = float(np.dot(s[S], vS))
    q_S = float(vS @ C[np.ix_(S, S)] @ vS)
    if not U:
        return np.zeros(0) if a_S != 0.0 else None
    C_UU = C[np.ix_(U, U)]
    g = C[np.ix_(U, S)] @ vS
    Mg = np.linalg.solve(C_UU, g)
    Ms = np.linalg.solve(C_UU, s[U])
    den = a_S - float(np.dot(s[U], Mg))
    if den == 0.0:
        return None
    c = (nv + q_S - float(np.dot(g, Mg))) / den
    return c * Ms - Mg


def subnet_hyperplane_solve(prob: SubnetProblem, k: int, refine: bool = True) -> HyperplaneCandidate:
    """Saturation loop on ``beta_k = beta_k,max`` with correlated input noise.

    Each pass re-solves the free nodes jointly.  Nodes reaching their bound
    move to the saturated set; when none do, nodes with a negative solution
    are clamped to 0 and the rest re-solved.  Either way at least one node
    leaves the free set per pass, so there are at most ``N - 1`` passes.

    Under strong noise correlation the loop can stop at a poor point: a
    negative solution may still prefer the bound, and a batch saturation may
    pin a node that should be off.  ``refine`` repairs this exactly (see
    :mod:`ancrelay.saturation`).
    """
    n = prob.size
    if not 0 <= k < n:
        raise IndexError(f"node {k} out of range for {n} relays")
    h = prob.h_t
    bmax = prob.beta_max
    v = np.zeros(n)
    v[k] = bmax[k] * h[k]

    saturated = {k}
    zeroed = {i for i in range(n) if h[i] == 0 and i != k}
    free = [i for i in range(n) if i not in saturated and i not in zeroed]

    iterations = 0
    while True:
        S = sorted(saturated)
        vU = _solve_free(prob, v, S, free)
        if vU is None:
            beta = np.zeros(n)
            beta[S] = bmax[S]
            return HyperplaneCandidate(
                k, frozenset(saturated), beta, subnet_snr(prob, beta),
                frozenset(zeroed), iterations, degenerate=True,
            )
        bU = vU / h[free]
        hit = [i for i, b in zip(free, bU) if b >= bmax[i] * (1.0 - SATURATION_RTOL)]
        negative = [i for i, b in zip(free, bU) if b < 0.0]
        if hit:
            for i in hit:
                v[i] = bmax[i] * h[i]
            saturated.update(hit)
        elif negative:
            zeroed.update(negative)
        else:
            v[free] = vU
            break
        iterations += 1
        free = [i for i in free if i not in saturated and i not in zeroed]
        v[sorted(zeroed)] = 0.0

    beta = np.zeros(n)
    beta[sorted(saturated)] = bmax[sorted(saturated)]
    beta[free] = v[free] / h[free]
    return finish_candidate(
        k, beta, saturated, zeroed, iterations, prob.s, prob.C, prob.noise_var,
        prob.source_power, h, bmax, refine,
    )


def solve_subnet(prob: SubnetProblem, refine: bool = True) -> tuple[np.ndarray, HyperplaneCandidate]:
    """Best hyperplane candidate over all pinned nodes (ties: smallest ``k``)."""
    best = select_best([subnet_hyperplane_solve(prob, k, refine) for k in range(prob.size)])
    return best.beta.copy(), best
