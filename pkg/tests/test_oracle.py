import numpy as np
import pytest

from ancrelay.network import LayeredNetwork, validate_scaling
from ancrelay.oracle import (
    GridTooLarge,
    default_resolution,
    grid_search,
    grid_search_subnet,
    grid_size,
    relative_tolerance,
)
from ancrelay.propagation import snr_destination
from ancrelay.diamond import diamond_beta_max, solve_diamond
from ancrelay.subnet import SubnetProblem

from helpers import two_layer_network, random_diamond, random_network


def test_single_relay_picks_bound():
    net = LayeredNetwork.diamond([1.3], [0.8], [4.0], 7.0)
    for r in (1, 3, 17, 200):
        o = grid_search(net, r)
        np.testing.assert_array_equal(o.best_beta.flat, diamond_beta_max(net))
        assert o.saturated.tolist() == [True]


def test_unit_diamond_converges_to_one():
    net = LayeredNetwork.diamond([1.0, 1.0], [1.0, 1.0], [1.0, 1.0], 1.0, 1.0)
    prev = 0.0
    for r in (4, 16, 64, 256):
        o = grid_search(net, r)
        assert prev <= o.best_snr <= 1.0 + 1e-14
        assert o.saturated.all()
        prev = o.best_snr
    assert prev == pytest.approx(1.0, rel=1e-14)


def test_refinement_monotone():
    rng = np.random.default_rng(2)
    for _ in range(5):
        net = random_network(rng, max_layers=2, max_nodes=2)
        snrs = [grid_search(net, r).best_snr for r in (5, 10, 20, 40)]
        assert all(a <= b * (1 + 1e-14) for a, b in zip(snrs, snrs[1:]))


def test_result_is_consistent():
    net = two_layer_network(10.0)
    o = grid_search(net, 12)
    assert validate_scaling(net, o.best_beta)
    assert o.best_snr == snr_destination(net, o.best_beta)
    assert o.resolution == 12 and o.best_index.shape == (4,)


def test_pinned_coordinates():
    net = random_diamond(np.random.default_rng(3), n=3)
    o = grid_search(net, 40, pinned=[1])
    assert o.best_index[1] == 40
    assert o.best_beta.flat[1] == diamond_beta_max(net)[1]
    assert o.best_snr <= grid_search(net, 40).best_snr


def test_guard():
    assert grid_size((3, 3), 50) == 51**6
    assert grid_size((2,), 10, pinned=[0]) == 11
    with pytest.raises(GridTooLarge, match="grid"):
        grid_search(two_layer_network(), 200)
    with pytest.raises(GridTooLarge):
        grid_search(two_layer_network(), 10, max_points=100)


def test_defaults():
    assert default_resolution(3) == 200 and default_resolution(4) == 50
    assert relative_tolerance(3, 200) == pytest.approx(0.03)


def test_random_three_relay_within_tolerance():
    rng = np.random.default_rng(4)
    for _ in range(3):
        net = random_diamond(rng, n=3)
        _, rep = solve_diamond(net)
        o = grid_search(net, 200)
        assert abs(o.best_snr - rep.snr_t) / rep.snr_t <= relative_tolerance(3, 200)


def test_boundary_structure():
    rng = np.random.default_rng(5)
    for _ in range(100):
        net = random_diamond(rng, n=int(rng.integers(1, 4)))
        assert grid_search(net, 40).any_saturated


def test_subnet_grid():
    prob = SubnetProblem(np.array([1.0, 1.0]), np.eye(2), np.ones(2), np.ones(2), 1.0, 1.0)
    o = grid_search_subnet(prob, 64)
    assert o.best_snr == pytest.approx(1.0, rel=1e-14)
