"""Solver-versus-oracle checks and structural invariants for one network."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import mac_upper_bound, rate_from_snr
from .diamond import best_hyperplane, hyperplane_solve, unsaturated_beta
from .greedy import greedy_scaling
from .network import LayeredNetwork, validate_scaling
from .oracle import default_resolution, grid_search, relative_tolerance
from .propagation import forward, snr_destination, snr_from_modified_gains
from .saturation import HyperplaneCandidate
from .subnet import stationary_beta, subnet_problem

__all__ = ["Check", "is_exact_class", "check_candidate", "run_verification"]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (
            f"  ({self.detail})" if self.detail else ""
        )


def is_exact_class(net: LayeredNetwork) -> bool:
    """True when every node's outgoing gains are all equal (symmetric class)."""
    return all(np.all(g == g[:, :1]) for g in net.gains)


def check_candidate(c: HyperplaneCandidate, bmax: np.ndarray, fixed_point) -> list[str]:
    """Problems with one hyperplane candidate; empty when it is well formed.

    ``fixed_point(beta, i)`` re-evaluates the per-node extremum condition.
    The saturation loop's own output is checked for its exit shape as well.
    """
    n = c.beta.size
    errors = []
    if c.iterations > n:
        errors.append(f"k={c.k}: {c.iterations} iterations > N={n}")
    if c.loop_beta is not None and not c.degenerate:
        for i in range(n):
            b = c.loop_beta[i]
            if i in c.loop_saturated:
                if b != bmax[i]:
                    errors.append(f"k={c.k}: loop left saturated node {i} off its bound")
            elif not 0.0 <= b < bmax[i]:
                errors.append(f"k={c.k}: loop left node {i} outside [0, beta_max)")
    for i in c.saturated:
        if c.beta[i] != bmax[i]:
            errors.append(f"k={c.k}: saturated node {i} not at its bound")
    if not c.degenerate:
        for i in c.unsaturated:
            if not 0.0 <= c.beta[i] < bmax[i]:
                errors.append(f"k={c.k}: free node {i} outside [0, beta_max)")
            elif c.beta[i] > 0:
                again = fixed_point(c.beta, i)
                if abs(again - c.beta[i]) > 1e-10 * abs(c.beta[i]):
                    errors.append(f"k={c.k}: node {i} not a fixed point ({again} vs {c.beta[i]})")
    return errors


def _invariant_checks(net: LayeredNetwork, beta, trace) -> list[Check]:
    out = []
    feas = validate_scaling(net, beta)
    out.append(Check("greedy vector feasible", feas.ok,
                     "" if feas.ok else f"node {feas.node}: {feas.value} > {feas.bound}"))

    a, b = snr_destination(net, beta), snr_from_modified_gains(net, beta)
    rel = abs(a - b) / max(abs(a), 1e-300)
    out.append(Check("SNR via covariance recursion == via modified gains", rel <= 1e-9,
                     f"rel diff {rel:.2e}"))

    worst = 0.0
    for st in forward(net, beta):
        ev = np.linalg.eigvalsh(st.C)
        worst = min(worst, ev[0] / np.trace(st.C))
    out.append(Check("noise covariances symmetric PSD", worst >= -1e-12,
                     f"min eig/trace {worst:.2e}"))

    errors = []
    state_list = forward(net, beta)
    for lt, st in zip(trace.layers, state_list):
        for j, sol in enumerate(lt.solutions):
            prob = subnet_problem(st, net, j)
            errors += [f"layer {lt.layer} target {j + 1}: {e}" for e in
                       check_candidate(sol, prob.beta_max,
                                       lambda bb, i, p=prob: stationary_beta(p, bb, i))]
    if net.is_diamond:
        from .diamond import diamond_beta_max
        bmax = diamond_beta_max(net)
        for k in range(net.layer_sizes[0]):
            errors += check_candidate(hyperplane_solve(net, k), bmax,
                                      lambda bb, i: unsaturated_beta(net, bb, i))
    out.append(Check("saturation loop terminates with valid exit shape", not errors,
                     "; ".join(errors[:3])))

    bound = mac_upper_bound(net)
    r = rate_from_snr(a)
    out.append(Check("rate <= MAC cut bound", r <= bound + 1e-9, f"{r:.6g} <= {bound:.6g}"))
    return out


def run_verification(net: LayeredNetwork, resolution: int | None = None) -> tuple[list[Check], dict]:
    """Run every applicable check; returns the checks and a summary dict.

    Raises :class:`ancrelay.oracle.GridTooLarge` before doing any work when
    the oracle grid would exceed its size guard.
    """
    r = default_resolution(net.num_relays) if resolution is None else resolution
    beta, trace = greedy_scaling(net)
    checks = _invariant_checks(net, beta, trace)

    oracle = grid_search(net, r)
    snr = snr_destination(net, beta)
    tol = relative_tolerance(net.num_relays, r)
    exact = net.is_diamond or is_exact_class(net)
    gap = (oracle.best_snr - snr) / oracle.best_snr if oracle.best_snr > 0 else 0.0

    checks.append(Check("greedy SNR <= oracle best (lower bound)",
                        snr <= oracle.best_snr * (1 + tol),
                        f"greedy {snr:.10g}, oracle {oracle.best_snr:.10g}, tol {tol:.3g}"))
    if exact:
        checks.append(Check("greedy SNR matches oracle (exact class)",
                            snr >= oracle.best_snr * (1 - tol),
                            f"relative shortfall {gap:.3e}, tol {tol:.3g}"))
    if net.is_diamond:
        best = best_hyperplane(net)
        checks.append(Check("greedy == diamond solver",
                            bool(np.allclose(beta.flat, best.beta, rtol=1e-12, atol=0))))
        checks.append(Check("oracle argmax lies on a saturation hyperplane",
                            oracle.any_saturated, f"grid index {oracle.best_index.tolist()}"))

    summary = {
        "exact_class": exact,
        "resolution": r,
        "greedy_snr": snr,
        "oracle_snr": oracle.best_snr,
        "relative_shortfall": gap,
        "tolerance": tol,
    }
    return checks, summary
