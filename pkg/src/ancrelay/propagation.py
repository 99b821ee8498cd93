"""Second-order statistics of amplify-and-forward signals, layer by layer.

At the inputs of relay layer ``l`` the received signal is ``s * x_s + z`` where
``s`` holds one real coefficient per node and ``z`` is zero-mean Gaussian
noise with covariance ``C``.  Everything is kept in absolute units (watts).
The end-to-end formulation normalises noise gains so the destination's own
noise counts as 1; dividing ``C`` by ``noise_var`` gives that convention::

    SNR_t = P_s * h_s**2 / (noise_var * (1 + sum h_lj**2))
          = P_s * s_dest**2 / C_dest
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import LayeredNetwork, ScalingVector

__all__ = [
    "LayerState",
    "ModifiedGains",
    "initial_state",
    "propagate",
    "beta_max",
    "received_snrs",
    "forward",
    "destination_state",
    "modified_gains",
    "snr_destination",
    "snr_from_modified_gains",
]


@dataclass(frozen=True)
class LayerState:
    """Signal coefficients and noise covariance at the inputs of one layer.

    ``layer`` runs from 1 (first relay layer) to ``L + 1`` (the destination).
    """

    layer: int
    s: np.ndarray
    C: np.ndarray

    @property
    def size(self) -> int:
        return self.s.size

    def received_power(self, source_power: float) -> np.ndarray:
        return self.s**2 * source_power + np.diag(self.C)


@dataclass(frozen=True)
class ModifiedGains:
    """Effective gains to the destination: source path sum and per-relay noise gains."""

    h_s: float
    h_relay: tuple[np.ndarray, ...]


def initial_state(net: LayeredNetwork) -> LayerState:
    """Statistics at the first relay layer: ``s = h_s,i`` and ``C = noise_var * I``."""
    n = net.layer_sizes[0]
    return LayerState(1, net.gains[0][0].copy(), net.noise_var * np.eye(n))


def propagate(state: LayerState, beta_l, net: LayeredNetwork) -> LayerState:
    """Forward layer ``state.layer`` with scaling ``beta_l`` to the next layer.

    ``s' = H^T B s`` and ``C' = H^T B C B H + noise_var * I`` with
    ``B = diag(beta_l)`` and ``H`` the gain matrix out of the current layer.
    """
    l = state.layer
    if not 1 <= l <= net.num_layers:
        raise ValueError(f"cannot propagate from layer {l} (network has {net.num_layers})")
    b = np.asarray(beta_l, dtype=float)
    if b.shape != state.s.shape:
        raise ValueError(f"beta has shape {b.shape}, layer {l} has {state.size} nodes")
    H = net.gains[l]
    BH = b[:, None] * H
    s_next = BH.T @ state.s
    C_next = BH.T @ state.C @ BH
    C_next = 0.5 * (C_next + C_next.T)
    C_next[np.diag_indices_from(C_next)] += net.noise_var
    return LayerState(l + 1, s_next, C_next)


def beta_max(state: LayerState, net: LayeredNetwork) -> np.ndarray:
    """Largest scaling each node of the layer can use without exceeding its power."""
    p = net.relay_powers[state.layer - 1]
    return np.sqrt(p / state.received_power(net.source_power))


def received_snrs(state: LayerState, source_power: float) -> np.ndarray:
    """Per-node input SNR ``s_i**2 P_s / C_ii``."""
    return state.s**2 * source_power / np.diag(state.C)


def forward(net: LayeredNetwork, beta: ScalingVector) -> list[LayerState]:
    """All layer states from layer 1 to the destination (``L + 1`` states)."""
    states = [initial_state(net)]
    for b in beta.layers:
        states.append(propagate(states[-1], b, net))
    return states


def destination_state(net: LayeredNetwork, beta: ScalingVector) -> LayerState:
    return forward(net, beta)[-1]


def snr_destination(net: LayeredNetwork, beta: ScalingVector, check: bool = False) -> float:
    """Destination SNR from the covariance recursion.

    With ``check=True`` the value is also computed from the modified gains and
    an ``AssertionError`` is raised if the two routes disagree beyond 1e-9
    relative.
    """
    dest = destination_state(net, beta)
    snr = float(dest.s[0] ** 2 * net.source_power / dest.C[0, 0])
    if check:
        other = snr_from_modified_gains(net, beta)
        if abs(snr - other) > 1e-9 * max(abs(snr), abs(other), 1e-300):
            raise AssertionError(f"SNR routes disagree: recursion {snr!r}, gains {other!r}")
    return snr


def modified_gains(net: LayeredNetwork, beta: ScalingVector) -> ModifiedGains:
    """Path-sum gains to the destination, by a backward pass over the layers.

    ``e`` holds, for every node input of layer ``l + 1``, the total gain to the
    destination; a relay's own noise gain is then ``beta * (H @ e)``.  The
    number of paths never has to be enumerated.
    """
    e = np.ones(1)
    h_relay = []
    for l in range(net.num_layers, 0, -1):
        e = beta.layers[l - 1] * (net.gains[l] @ e)
        h_relay.append(e)
    h_s = float(net.gains[0][0] @ e)
    return ModifiedGains(h_s, tuple(reversed(h_relay)))


def snr_from_modified_gains(net: LayeredNetwork, beta: ScalingVector) -> float:
    g = modified_gains(net, beta)
    noise_gain = 1.0 + sum(float(np.sum(h**2)) for h in g.h_relay)
    return net.source_power / net.noise_var * g.h_s**2 / noise_gain

