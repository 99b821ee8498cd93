"""Layered relay network description, scaling vectors and the JSON config format.

A network has ``L`` relay layers between a source (layer 0) and a destination
(layer ``L + 1``).  Links only join consecutive layers, so the topology is the
list of dense gain matrices ``gains[l]`` of shape ``(n_l, n_{l+1})`` with
``n_0 = n_{L+1} = 1``.  A missing link is simply a zero gain.

Relay nodes are addressed by ``(layer, position)`` with both indices starting
at 1 for layers and 0 for positions inside the flat numpy arrays; the flat
order of all relays is layer-major.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

__all__ = [
    "NetworkError",
    "LayeredNetwork",
    "ScalingVector",
    "parse_network",
    "load_network",
    "serialize_network",
    "validate_scaling",
]


class NetworkError(ValueError):
    """Raised for malformed or physically invalid network descriptions."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LayeredNetwork:
    """Immutable Gaussian layered relay network.

    Parameters
    ----------
    layer_sizes : sequence of int
        Number of relays ``n_l`` in each relay layer ``l = 1..L``.
    gains : sequence of 2-D arrays
        ``L + 1`` gain matrices; ``gains[l][i, j]`` is the real gain from node
        ``i`` of layer ``l`` to node ``j`` of layer ``l + 1``.
    relay_powers : sequence of 1-D arrays
        Transmit power budget of every relay, grouped by layer.
    source_power : float
        Source power ``P_s``.
    noise_var : float
        Variance of the local receiver noise at every relay and at the
        destination.
    """

    layer_sizes: tuple[int, ...]
    gains: tuple[np.ndarray, ...]
    relay_powers: tuple[np.ndarray, ...]
    source_power: float
    noise_var: float = 1.0
    _validated: bool = field(default=False, init=False, repr=False)

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "gains", tuple(_readonly(g) for g in self.gains))
        object.__setattr__(
            self, "relay_powers", tuple(_readonly(p) for p in self.relay_powers)
        )
        object.__setattr__(self, "source_power", float(self.source_power))
        object.__setattr__(self, "noise_var", float(self.noise_var))
        self._check()

    def _check(self) -> None:
        sizes = self.layer_sizes
        if len(sizes) < 1:
            raise NetworkError("network needs at least one relay layer")
        if any(n < 1 for n in sizes):
            raise NetworkError(f"layer sizes must be >= 1, got {list(sizes)}")
        if len(self.gains) != len(sizes) + 1:
            raise NetworkError(
                f"expected {len(sizes) + 1} gain matrices, got {len(self.gains)}"
            )
        full = (1,) + sizes + (1,)
        for l, g in enumerate(self.gains):
            want = (full[l], full[l + 1])
            if g.ndim != 2 or g.shape != want:
                raise NetworkError(
                    f"non-layered link: gains[{l}] has shape {g.shape}, "
                    f"expected {want} (layer {l} -> layer {l + 1})"
                )
            if not np.all(np.isfinite(g)):
                raise NetworkError(f"gains[{l}] contains non-finite values")
        if len(self.relay_powers) != len(sizes):
            raise NetworkError(
                f"expected relay powers for {len(sizes)} layers, "
                f"got {len(self.relay_powers)}"
            )
        for l, (p, n) in enumerate(zip(self.relay_powers, sizes), start=1):
            if p.shape != (n,):
                raise NetworkError(
                    f"relay_powers[{l - 1}] has {p.size} entries, layer {l} has {n} nodes"
                )
            if not np.all(np.isfinite(p)) or np.any(p <= 0):
                raise NetworkError(f"relay powers of layer {l} must be finite and > 0")
        for name, v in (("source_power", self.source_power), ("noise_var", self.noise_var)):
            if not math.isfinite(v) or v <= 0:
                raise NetworkError(f"{name} must be finite and > 0, got {v}")
        for l in range(1, len(sizes) + 1):
            incoming = np.any(self.gains[l - 1] != 0, axis=0)
            outgoing = np.any(self.gains[l] != 0, axis=1)
            for i in range(sizes[l - 1]):
                if not (incoming[i] and outgoing[i]):
                    raise NetworkError(
                        f"isolated relay ({l},{i + 1}): needs a nonzero incoming "
                        "and a nonzero outgoing gain"
                    )

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes)

    @property
    def num_relays(self) -> int:
        return sum(self.layer_sizes)

    @property
    def is_diamond(self) -> bool:
        return self.num_layers == 1

    def with_source_power(self, source_power: float) -> "LayeredNetwork":
        """Copy of the network with a different source power."""
        return LayeredNetwork(
            self.layer_sizes, self.gains, self.relay_powers, source_power, self.noise_var
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayeredNetwork):
            return NotImplemented
        return (
            self.layer_sizes == other.layer_sizes
            and self.source_power == other.source_power
            and self.noise_var == other.noise_var
            and all(np.array_equal(a, b) for a, b in zip(self.gains, other.gains))
            and all(
                np.array_equal(a, b) for a, b in zip(self.relay_powers, other.relay_powers)
            )
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def diamond(
        cls,
        h_source: Sequence[float],
        h_dest: Sequence[float],
        powers: Sequence[float],
        source_power: float,
        noise_var: float = 1.0,
    ) -> "LayeredNetwork":
        """Build an ``N``-relay diamond from first- and second-hop gain vectors."""
        hs = np.asarray(h_source, dtype=float).reshape(1, -1)
        ht = np.asarray(h_dest, dtype=float).reshape(-1, 1)
        return cls((hs.shape[1],), (hs, ht), (np.asarray(powers, dtype=float),),
                   source_power, noise_var)


@dataclass(frozen=True, eq=False)
class ScalingVector:
    """Per-relay amplification factors, one array per relay layer."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(_readonly(b) for b in self.layers))

    @classmethod
    def from_flat(cls, flat: Sequence[float], layer_sizes: Sequence[int]) -> "ScalingVector":
        flat = np.asarray(flat, dtype=float)
        if flat.size != sum(layer_sizes):
            raise ValueError(f"expected {sum(layer_sizes)} values, got {flat.size}")
        cuts = np.cumsum(layer_sizes)[:-1]
        return cls(tuple(np.split(flat, cuts)))

    @classmethod
    def zeros(cls, layer_sizes: Sequence[int]) -> "ScalingVector":
        return cls(tuple(np.zeros(n) for n in layer_sizes))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate(self.layers)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, l: int) -> np.ndarray:
        return self.layers[l]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalingVector):
            return NotImplemented
        return self.sizes == other.sizes and all(
            np.array_equal(a, b) for a, b in zip(self.layers, other.layers)
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# JSON config
# ---------------------------------------------------------------------------

_REQUIRED = ("layers", "source_power", "noise_var", "relay_powers")


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise NetworkError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise NetworkError(f"{where}: non-finite value")
    return v


def _matrix_from_links(links: Any, sizes: tuple[int, ...]) -> list[np.ndarray]:
    # Sparse alternative to `gains`: [{"from": [l, i], "to": [l2, j], "gain": g}]
    # with layer 0 the source and layer L+1 the destination, positions 1-based.
    full = (1,) + sizes + (1,)
    mats = [np.zeros((full[l], full[l + 1])) for l in range(len(sizes) + 1)]
    if not isinstance(links, list):
        raise NetworkError("links: expected an array")
    for n, link in enumerate(links):
        try:
            (la, ia), (lb, ib), g = link["from"], link["to"], link["gain"]
        except (KeyError, TypeError, ValueError):
            raise NetworkError(f"links[{n}]: expected from/to/gain") from None
        la, ia, lb, ib = (int(x) for x in (la, ia, lb, ib))
        if lb != la + 1:
            raise NetworkError(
                f"non-layered link: links[{n}] joins layer {la} to layer {lb}"
            )
        if not (0 <= la <= len(sizes)) or not (1 <= ia <= full[la]) or not (1 <= ib <= full[lb]):
            raise NetworkError(f"links[{n}]: node index out of range")
        mats[la][ia - 1, ib - 1] = _number(g, f"links[{n}].gain")
    return mats


def network_from_dict(doc: dict) -> LayeredNetwork:
    """Build a network from an already-decoded config document."""
    if not isinstance(doc, dict):
        raise NetworkError("config must be a JSON object")
    missing = [k for k in _REQUIRED if k not in doc]
    if "gains" not in doc and "links" not in doc:
        missing.append("gains")
    if missing:
        raise NetworkError(f"missing field(s): {', '.join(missing)}")
    layers = doc["layers"]
    if not isinstance(layers, list) or not layers or not all(
        isinstance(n, int) and not isinstance(n, bool) for n in layers
    ):
        raise NetworkError("layers: expected a non-empty array of integers")
    sizes = tuple(layers)
    if "gains" in doc:
        gains = doc["gains"]
        if not isinstance(gains, list):
            raise NetworkError("gains: expected an array of matrices")
        mats = []
        for l, g in enumerate(gains):
            if not isinstance(g, list) or not all(isinstance(r, list) for r in g):
                raise NetworkError(f"gains[{l}]: expected a matrix (array of rows)")
            if len({len(r) for r in g}) > 1:
                raise NetworkError(f"gains[{l}]: ragged rows")
            mats.append(
                np.array(
                    [[_number(v, f"gains[{l}]") for v in row] for row in g], dtype=float
                ).reshape(len(g), len(g[0]) if g else 0)
            )
    else:
        mats = _matrix_from_links(doc["links"], sizes)
    powers = doc["relay_powers"]
    if not isinstance(powers, list) or not all(isinstance(p, list) for p in powers):
        raise NetworkError("relay_powers: expected an array of arrays")
    powers = [np.array([_number(v, "relay_powers") for v in p]) for p in powers]
    return LayeredNetwork(
        sizes,
        mats,
        powers,
        _number(doc["source_power"], "source_power"),
        _number(doc["noise_var"], "noise_var"),
    )


def parse_network(text: str) -> LayeredNetwork:
    """Parse a JSON network config.

    Raises
    ------
    NetworkError
        On malformed JSON, schema violations, links that skip a layer,
        non-positive powers or noise variance, and isolated relays.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from None
    return network_from_dict(doc)


def load_network(path) -> LayeredNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def network_to_dict(net: LayeredNetwork) -> dict:
    return {
        "layers": list(net.layer_sizes),
        "gains": [g.tolist() for g in net.gains],
        "relay_powers": [p.tolist() for p in net.relay_powers],
        "source_power": net.source_power,
        "noise_var": net.noise_var,
    }


def serialize_network(net: LayeredNetwork, indent: int | None = 2) -> str:
    # json writes floats with repr(), so parse(serialize(net)) is exact.
    return json.dumps(network_to_dict(net), indent=indent)


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingCheck:
    ok: bool
    node: tuple[int, int] | None = None  # 1-based (layer, position)
    value: float | None = None
    bound: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_scaling(
    net: LayeredNetwork, beta: ScalingVector, rtol: float = 1e-12
) -> ScalingCheck:
    """Check ``0 <= beta[l][i] <= beta_max[l][i]`` layer by layer.

    The bounds of layer ``l`` depend on the scaling already applied in layers
    ``1..l-1``, so they are recomputed from the propagated statistics.
    ``rtol`` absorbs rounding for vectors that sit exactly on a bound.
    """
    from .propagation import beta_max, initial_state, propagate

    if beta.sizes != net.layer_sizes:
        raise ValueError(
            f"scaling vector layout {beta.sizes} does not match network {net.layer_sizes}"
        )
    state = initial_state(net)
    for l, b in enumerate(beta.layers):
        bound = beta_max(state, net)
        for i, (v, m) in enumerate(zip(b, bound)):
            if not (v >= 0.0 and v <= m * (1.0 + rtol)):
                return ScalingCheck(False, (l + 1, i + 1), float(v), float(m))
        state = propagate(state, b, net)
    return ScalingCheck(True)
