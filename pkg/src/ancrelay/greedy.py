"""Layer-by-layer greedy scaling vector for general layered networks.

For every relay layer, one candidate vector is computed per node of the next
layer (the subnet optimum toward that node).  The candidate whose
next-layer received SNRs maximise ``prod_k (1 + SNR_k)`` is committed and the
statistics move on to the next layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import LayeredNetwork, ScalingVector
from .propagation import LayerState, initial_state, propagate, received_snrs
from .saturation import DegenerateHyperplane, HyperplaneCandidate
from .subnet import solve_subnet, subnet_problem

__all__ = ["LayerTrace", "GreedyTrace", "GreedyError", "product_score", "greedy_scaling"]


class GreedyError(ArithmeticError):
    pass


def product_score(state_next: LayerState, source_power: float) -> float:
    return float(np.prod(1.0 + received_snrs(state_next, source_power)))


@dataclass(frozen=True)
class LayerTrace:
    layer: int
    candidates: tuple[np.ndarray, ...]
    solutions: tuple[HyperplaneCandidate, ...]
    scores: tuple[float, ...]
    chosen: int
    state_next: LayerState


@dataclass(frozen=True)
class GreedyTrace:
    layers: tuple[LayerTrace, ...]

    def __getitem__(self, l: int) -> LayerTrace:
        return self.layers[l]

    def __len__(self) -> int:
        return len(self.layers)


def greedy_layer(state: LayerState, net: LayeredNetwork) -> LayerTrace:
    """Pick the scaling of layer ``state.layer`` among the per-target subnet optima."""
    l = state.layer
    candidates, solutions, scores, nexts = [], [], [], []
    for j in range(net.gains[l].shape[1]):
        try:
            beta_l, sol = solve_subnet(subnet_problem(state, net, j))
        except DegenerateHyperplane as exc:
            raise GreedyError(f"layer {l}, target node {j + 1}: {exc}") from exc
        nxt = propagate(state, beta_l, net)
        candidates.append(beta_l)
        solutions.append(sol)
        scores.append(product_score(nxt, net.source_power))
        nexts.append(nxt)
    chosen = 0
    for j in range(1, len(scores)):
        if scores[j] > scores[chosen]:
            chosen = j
    return LayerTrace(l, tuple(candidates), tuple(solutions), tuple(scores), chosen,
                      nexts[chosen])


def greedy_scaling(net: LayeredNetwork) -> tuple[ScalingVector, GreedyTrace]:
    """Greedy network-wide scaling vector and the full per-layer trace.

    On a diamond this is the exact optimum: there is one target (the
    destination) and its subnet problem has uncorrelated noise.
    """
    state = initial_state(net)
    layers = []
    for _ in range(net.num_layers):
        step = greedy_layer(state, net)
        layers.append(step)
        state = step.state_next
    beta = ScalingVector(tuple(t.candidates[t.chosen] for t in layers))
    return beta, GreedyTrace(tuple(layers))
