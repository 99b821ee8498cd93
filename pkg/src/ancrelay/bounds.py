"""Achievable rates, the all-max baseline and the destination MAC cut bound.

Rates are in bits per channel use (log base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import LayeredNetwork, ScalingVector
from .propagation import beta_max, initial_state, propagate, snr_destination

__all__ = [
    "MAC_BOUND_LABEL",
    "RateReport",
    "rate_from_snr",
    "rate",
    "all_max_beta",
    "mac_upper_bound",
    "rate_report",
]

MAC_BOUND_LABEL = "MAC cut (full cooperation, destination cut)"


def rate_from_snr(snr: float) -> float:
    return 0.5 * math.log2(1.0 + snr)


def rate(net: LayeredNetwork, beta: ScalingVector) -> float:
    return rate_from_snr(snr_destination(net, beta))


def all_max_beta(net: LayeredNetwork) -> ScalingVector:
    """Every relay at its power limit; each layer's bounds follow the previous layer's choice."""
    state = initial_state(net)
    layers = []
    for _ in range(net.num_layers):
        b = beta_max(state, net)
        layers.append(b)
        state = propagate(state, b, net)
    return ScalingVector(tuple(layers))


def mac_upper_bound(net: LayeredNetwork) -> float:
    """Multiple-access cut into the destination with fully cooperating last-layer relays.

    ``0.5 * log2(1 + (sum_i sqrt(P_i) |h_it|)**2 / noise_var)``; it does not
    depend on the source power.
    """
    p = net.relay_powers[-1]
    h = net.gains[-1][:, 0]
    amp = float(np.sum(np.sqrt(p) * np.abs(h)))
    return rate_from_snr(amp**2 / net.noise_var)


@dataclass(frozen=True)
class RateReport:
    source_power: float
    snr_t: float
    rate_bits: float
    baseline_rate: float
    mac_upper_bound: float

    @property
    def gap_to_bound(self) -> float:
        return self.mac_upper_bound - self.rate_bits


def rate_report(net: LayeredNetwork, beta: ScalingVector) -> RateReport:
    snr = snr_destination(net, beta)
    return RateReport(
        source_power=net.source_power,
        snr_t=snr,
        rate_bits=rate_from_snr(snr),
        baseline_rate=rate(net, all_max_beta(net)),
        mac_upper_bound=mac_upper_bound(net),
    )
