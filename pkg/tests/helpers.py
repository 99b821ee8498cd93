import numpy as np

from ancrelay.network import LayeredNetwork, ScalingVector
from ancrelay.propagation import beta_max, initial_state, propagate


def two_layer_network(source_power=100.0):
    g0 = np.array([[10.0, 10.0]])
    g1 = np.array([[10.0, 2.0], [10.0, 2.0]])
    g2 = np.array([[10.0], [10.0]])
    return LayeredNetwork((2, 2), (g0, g1, g2), ([10.0, 10.0], [10.0, 10.0]), source_power, 1.0)


def symmetric_network(h0, h1, h2, ht, p12, p34, source_power=1.0, noise_var=1.0):
    """Two-layer instance with equal outgoing gains per node."""
    g0 = np.array([[h0, h0]])
    g1 = np.array([[h1, h1], [h2, h2]])
    g2 = np.array([[ht], [ht]])
    return LayeredNetwork((2, 2), (g0, g1, g2), (p12, p34), source_power, noise_var)


def symmetric_instance():
    return symmetric_network(1.0, 1.0, 3.0, 2.0, [2.0, 2.0], [5.0, 5.0])


def random_diamond(rng, n=None, ps=None):
    n = int(rng.integers(2, 4)) if n is None else n
    ps = float(rng.choice([1.0, 10.0, 100.0])) if ps is None else ps
    return LayeredNetwork.diamond(
        rng.uniform(0.5, 3.0, n), rng.uniform(0.5, 3.0, n), rng.uniform(1.0, 10.0, n), ps
    )


def random_network(rng, max_layers=4, max_nodes=5, signed=False, sizes=None):
    if sizes is None:
        L = int(rng.integers(1, max_layers + 1))
        sizes = tuple(int(rng.integers(1, max_nodes + 1)) for _ in range(L))
    full = (1,) + tuple(sizes) + (1,)
    gains = []
    for a, b in zip(full[:-1], full[1:]):
        g = rng.uniform(0.5, 3.0, (a, b))
        if signed:
            g *= rng.choice([-1.0, 1.0], (a, b))
        gains.append(g)
    powers = [rng.uniform(1.0, 10.0, n) for n in sizes]
    return LayeredNetwork(sizes, gains, powers, float(10 ** rng.uniform(0, 3)),
                          float(rng.uniform(0.5, 2.0)))


def random_feasible_beta(net, rng):
    """Uniformly random fraction of each node's bound, layer by layer."""
    state = initial_state(net)
    layers = []
    for _ in range(net.num_layers):
        b = beta_max(state, net) * rng.uniform(0.0, 1.0, state.size)
        layers.append(b)
        state = propagate(state, b, net)
    return ScalingVector(tuple(layers))


def simulate(net, beta, samples, rng):
    """Sample-by-sample amplify-and-forward run of the network.

    Each relay transmits its previous-instant input scaled by beta, so the
    inputs of layer l see the source symbol delayed by l - 1 instants.
    Returns the source sequence and, per layer (including the destination),
    the input sequences aligned so that index n pairs with x_s[n].
    """
    L = net.num_layers
    T = samples + L
    xs = rng.normal(0.0, np.sqrt(net.source_power), T)
    sd = np.sqrt(net.noise_var)
    y = np.outer(xs, net.gains[0][0]) + sd * rng.normal(size=(T, net.layer_sizes[0]))
    inputs = [y]
    for l in range(1, L + 1):
        x = np.zeros_like(y)
        x[1:] = y[:-1] * beta.layers[l - 1]  # x[n+1] = beta * y[n]
        m = net.gains[l].shape[1]
        y = x @ net.gains[l] + sd * rng.normal(size=(T, m))
        inputs.append(y)
    aligned = [inp[l: l + samples] for l, inp in enumerate(inputs)]
    return xs[:samples], aligned
