"""Exact ANC scaling for the N-relay Gaussian diamond network.

The optimum lies on one of the ``N`` hyperplanes ``beta_k = beta_k,max``.  On
each of them a saturation loop pins nodes to their bounds until the closed
form for the remaining (unsaturated) nodes respects every bound; the best
hyperplane wins.
"""

from __future__ import annotations

import numpy as np

from .bounds import RateReport, rate_report
from .network import LayeredNetwork, ScalingVector
from .saturation import (
    SATURATION_RTOL,
    DegenerateHyperplane,
    HyperplaneCandidate,
    finish_candidate,
    select_best,
)

__all__ = [
    "SATURATION_RTOL",
    "DegenerateHyperplane",
    "HyperplaneCandidate",
    "diamond_beta_max",
    "diamond_snr",
    "hyperplane_solve",
    "best_hyperplane",
    "solve_diamond",
    "unsaturated_beta",
    "select_best",
]

def _require_diamond(net: LayeredNetwork) -> None:
    if not net.is_diamond:
        raise ValueError(f"expected a diamond network (L=1), got L={net.num_layers}")


def diamond_beta_max(net: LayeredNetwork) -> np.ndarray:
    _require_diamond(net)
    hs = net.gains[0][0]
    return np.sqrt(net.relay_powers[0] / (hs**2 * net.source_power + net.noise_var))


def diamond_snr(net: LayeredNetwork, beta) -> float:
    """Closed-form destination SNR of a diamond network."""
    _require_diamond(net)
    b = np.asarray(beta, dtype=float)
    hs, ht = net.gains[0][0], net.gains[1][:, 0]
    num = float(np.dot(hs * b, ht)) ** 2
    return net.source_power / net.noise_var * num / (1.0 + float(np.sum(b**2 * ht**2)))


def unsaturated_beta(net: LayeredNetwork, beta, i: int) -> float:
    """Stationary value of ``beta_i`` with every other coordinate held fixed.

    This is the per-node extremum condition; at a hyperplane optimum it must
    reproduce each unsaturated coordinate.
    """
    b = np.asarray(beta, dtype=float)
    hs, ht = net.gains[0][0], net.gains[1][:, 0]
    others = np.arange(b.size) != i
    num = 1.0 + float(np.sum(b[others] ** 2 * ht[others] ** 2))
    den = float(np.sum(hs[others] * b[others] * ht[others]))
    return hs[i] / ht[i] * num / den


def hyperplane_solve(net: LayeredNetwork, k: int, refine: bool = True) -> HyperplaneCandidate:
    """Saturation loop on the hyperplane ``beta_k = beta_k,max`` (``k`` 0-based).

    All nodes whose closed-form value reaches its bound saturate together, and
    the loop stops once none do.  That batch rule can stop short of the
    optimum on the hyperplane; with ``refine`` the loop's output is handed to
    :func:`~ancrelay.saturation.refine_on_hyperplane`, which leaves it alone
    when it is already optimal.
    """
    _require_diamond(net)
    n = net.layer_sizes[0]
    if not 0 <= k < n:
        raise IndexError(f"node {k} out of range for {n} relays")
    hs, ht = net.gains[0][0], net.gains[1][:, 0]
    bmax = diamond_beta_max(net)
    beta = np.zeros(n)

    saturated = {k}
    zeroed = {i for i in range(n) if ht[i] == 0 and i != k}
    free = [i for i in range(n) if i not in saturated and i not in zeroed]
    beta[k] = bmax[k]

    iterations = 0
    while True:
        S = sorted(saturated)
        num = 1.0 + float(np.sum(bmax[S] ** 2 * ht[S] ** 2))
        den = float(np.sum(hs[S] * bmax[S] * ht[S]))
        if den == 0.0:
            # Nothing useful to scale against: keep S at its bounds, rest off.
            beta = np.zeros(n)
            beta[S] = bmax[S]
            return HyperplaneCandidate(
                k, frozenset(saturated), beta, diamond_snr(net, beta),
                frozenset(zeroed), iterations, degenerate=True,
            )
        for i in free:
            beta[i] = hs[i] / ht[i] * num / den
        negative = [i for i in free if beta[i] < 0.0]
        for i in negative:
            beta[i] = 0.0
        zeroed.update(negative)
        free = [i for i in free if i not in zeroed]

        hit = [i for i in free if beta[i] >= bmax[i] * (1.0 - SATURATION_RTOL)]
        if not hit:
            break
        iterations += 1
        for i in hit:
            beta[i] = bmax[i]
        saturated.update(hit)
        free = [i for i in free if i not in saturated]

    return finish_candidate(
        k, beta, saturated, zeroed, iterations, hs, net.noise_var * np.eye(n),
        net.noise_var, net.source_power, ht, bmax, refine,
    )


def best_hyperplane(net: LayeredNetwork, refine: bool = True) -> HyperplaneCandidate:
    _require_diamond(net)
    return select_best([hyperplane_solve(net, k, refine) for k in range(net.layer_sizes[0])])


def solve_diamond(net: LayeredNetwork, refine: bool = True) -> tuple[ScalingVector, RateReport]:
    """Optimal scaling vector for a diamond network, with its rate report.

    ``refine=False`` returns the plain saturation-loop answer.
    """
    best = best_hyperplane(net, refine)
    beta = ScalingVector((best.beta.copy(),))
    return beta, rate_report(net, beta)
