"""Exhaustive grid search over feasible scaling vectors, for certifying solvers.

Each relay coordinate runs over the endpoint-inclusive grid
``{0, 1/r, ..., 1} * beta_max``.  Later layers' ``beta_max`` depend on the
earlier layers' choice, so the grid is nested layer by layer: every prefix of
the enumeration carries its own propagated statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .network import LayeredNetwork, ScalingVector
from .propagation import initial_state, snr_destination
from .subnet import SubnetProblem, subnet_snr

__all__ = [
    "GridTooLarge",
    "OracleResult",
    "grid_size",
    "grid_search",
    "grid_search_subnet",
    "default_resolution",
    "relative_tolerance",
]

MAX_GRID_POINTS = 10**8
_CHUNK = 1 << 18


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_beta: ScalingVector
    best_snr: float
    resolution: int
    best_index: np.ndarray  # grid index per coordinate (r means beta_max)
    saturated: np.ndarray  # within one grid step of beta_max

    @property
    def any_saturated(self) -> bool:
        return bool(np.any(self.saturated))


def default_resolution(num_relays: int) -> int:
    return 200 if num_relays <= 3 else 50


def relative_tolerance(num_coords: int, resolution: int) -> float:
    """First-order grid error bound ``2 N / r`` used when comparing against the oracle."""
    return 2.0 * num_coords / resolution


def _axes(sizes, resolution, pinned) -> list[np.ndarray]:
    pinned = set(pinned or ())
    fine = np.linspace(0.0, 1.0, resolution + 1)
    axes, flat = [], 0
    for n in sizes:
        for _ in range(n):
            axes.append(np.ones(1) if flat in pinned else fine)
            flat += 1
    return axes


def grid_size(sizes: Iterable[int], resolution: int, pinned=None) -> int:
    return int(np.prod([a.size for a in _axes(list(sizes), resolution, pinned)], dtype=object))


def _combos(axes: list[np.ndarray], start: int, stop: int) -> np.ndarray:
    shape = tuple(a.size for a in axes)
    idx = np.unravel_index(np.arange(start, stop), shape)
    return np.stack([a[i] for a, i in zip(axes, idx)], axis=1)


def _combo_index(axes: list[np.ndarray], flat: int) -> np.ndarray:
    return np.array(np.unravel_index(flat, tuple(a.size for a in axes)))


def _check_guard(total: int, max_points: int) -> None:
    if total > max_points:
        raise GridTooLarge(
            f"grid has {total} points, above the limit of {max_points}; "
            "lower the resolution or use a smaller instance"
        )


def grid_search(
    net: LayeredNetwork,
    resolution: int | None = None,
    pinned: Iterable[int] | None = None,
    max_points: int = MAX_GRID_POINTS,
) -> OracleResult:
    """Maximise the destination SNR over the nested feasible grid.

    Parameters
    ----------
    net : LayeredNetwork
    resolution : int, optional
        Steps per coordinate; defaults to 200 for up to 3 relays, else 50.
    pinned : iterable of int, optional
        Flat (layer-major, 0-based) relay indices held at ``beta_max``.
    max_points : int
        Refuse grids larger than this.

    Ties resolve to the first point in lexicographic grid-index order.
    """
    r = default_resolution(net.num_relays) if resolution is None else int(resolution)
    if r < 1:
        raise ValueError("resolution must be >= 1")
    sizes = net.layer_sizes
    axes = _axes(sizes, r, pinned)
    _check_guard(grid_size(sizes, r, pinned), max_points)

    layer_axes, off = [], 0
    for n in sizes:
        layer_axes.append(axes[off:off + n])
        off += n

    st = initial_state(net)
    best = [-np.inf, None]  # snr, list of per-layer flat combo indices

    def recurse(l: int, s: np.ndarray, C: np.ndarray, prefix: np.ndarray) -> None:
        # s: (B, n_l), C: (B, n_l, n_l), prefix: (B, l) combo indices so far
        ax = layer_axes[l]
        G = int(np.prod([a.size for a in ax]))
        P = net.relay_powers[l]
        rx = s**2 * net.source_power + np.einsum("bii->bi", C)
        bmax = np.sqrt(P / rx)
        H = net.gains[l + 1]
        last = l == len(sizes) - 1
        B = s.shape[0]
        gstep = max(1, min(G, _CHUNK))
        for g0 in range(0, G, gstep):
            U = _combos(ax, g0, min(G, g0 + gstep))  # (g, n)
            g = U.shape[0]
            bstep = max(1, _CHUNK // g)
            for b0 in range(0, B, bstep):
                b1 = min(B, b0 + bstep)
                beta = bmax[b0:b1, None, :] * U[None, :, :]  # (b, g, n)
                BH = beta[..., :, None] * H[None, None, :, :]  # (b, g, n, m)
                s_next = np.einsum("bgnm,bn->bgm", BH, s[b0:b1])
                C_next = np.einsum("bgnm,bnk,bgkp->bgmp", BH, C[b0:b1], BH)
                m = H.shape[1]
                C_next = C_next + net.noise_var * np.eye(m)
                pre = np.concatenate(
                    [np.repeat(prefix[b0:b1, None, :], g, axis=1),
                     np.broadcast_to(np.arange(g0, g0 + g)[None, :, None], (b1 - b0, g, 1))],
                    axis=2,
                )
                if last:
                    snr = s_next[..., 0] ** 2 * net.source_power / C_next[..., 0, 0]
                    flat = snr.reshape(-1)
                    i = int(np.argmax(flat))
                    if flat[i] > best[0]:
                        best[0] = float(flat[i])
                        best[1] = pre.reshape(-1, pre.shape[-1])[i].copy()
                else:
                    recurse(
                        l + 1,
                        s_next.reshape(-1, m),
                        C_next.reshape(-1, m, m),
                        pre.reshape(-1, pre.shape[-1]),
                    )

    recurse(0, st.s[None, :], st.C[None, :, :], np.zeros((1, 0), dtype=np.int64))

    # Rebuild the winning vector exactly, layer by layer.
    from .propagation import beta_max, propagate

    state = initial_state(net)
    layers, index = [], []
    for l, ci in enumerate(best[1]):
        frac_idx = _combo_index(layer_axes[l], int(ci))
        fracs = np.array([a[i] for a, i in zip(layer_axes[l], frac_idx)])
        b = beta_max(state, net) * fracs
        layers.append(b)
        index.extend(int(round(f * r)) for f in fracs)
        state = propagate(state, b, net)
    beta = ScalingVector(tuple(layers))
    index = np.array(index)
    return OracleResult(beta, snr_destination(net, beta), r, index, index >= r - 1)


def grid_search_subnet(
    prob: SubnetProblem,
    resolution: int = 200,
    pinned: Iterable[int] | None = None,
    max_points: int = MAX_GRID_POINTS,
) -> OracleResult:
    """Grid maximisation of a single subnet problem's target SNR."""
    r = int(resolution)
    axes = _axes([prob.size], r, pinned)
    G = grid_size([prob.size], r, pinned)
    _check_guard(G, max_points)
    bmax = prob.beta_max
    best_snr, best_i = -np.inf, -1
    for g0 in range(0, G, _CHUNK):
        U = _combos(axes, g0, min(G, g0 + _CHUNK))
        v = U * (bmax * prob.h_t)[None, :]
        num = (v @ prob.s) ** 2 * prob.source_power
        den = prob.noise_var + np.einsum("gi,ij,gj->g", v, prob.C, v)
        snr = num / den
        i = int(np.argmax(snr))
        if snr[i] > best_snr:
            best_snr, best_i = float(snr[i]), g0 + i
    idx = _combo_index(axes, best_i)
    fracs = np.array([a[i] for a, i in zip(axes, idx)])
    beta = bmax * fracs
    index = np.rint(fracs * r).astype(int)
    return OracleResult(
        ScalingVector((beta,)), subnet_snr(prob, beta), r, index, index >= r - 1
    )
