import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ancrelay.network import (
    LayeredNetwork,
    NetworkError,
    ScalingVector,
    network_to_dict,
    parse_network,
    serialize_network,
    validate_scaling,
)
from ancrelay.propagation import beta_max, initial_state, propagate

from helpers import two_layer_network, random_feasible_beta, random_network

DIAMOND3 = {
    "layers": [3],
    "gains": [[[1.0, 2.0, 0.5]], [[1.5], [0.25], [3.0]]],
    "relay_powers": [[1.0, 2.0, 3.0]],
    "source_power": 10.0,
    "noise_var": 1.0,
}


def test_parse_diamond():
    net = parse_network(json.dumps(DIAMOND3))
    assert net.num_layers == 1
    assert net.layer_sizes == (3,)
    np.testing.assert_array_equal(net.gains[0], [[1.0, 2.0, 0.5]])
    np.testing.assert_array_equal(net.gains[1][:, 0], [1.5, 0.25, 3.0])
    assert net.source_power == 10.0 and net.noise_var == 1.0


def test_parse_two_layer_config():
    doc = {
        "layers": [2, 2],
        "gains": [[[10, 10]], [[10, 2], [10, 2]], [[10], [10]]],
        "relay_powers": [[10, 10], [10, 10]],
        "source_power": 100,
        "noise_var": 1,
    }
    assert parse_network(json.dumps(doc)) == two_layer_network(100.0)


def test_shipped_configs_parse():
    from pathlib import Path

    for path in sorted(Path(__file__).parent.parent.joinpath("configs").glob("*.json")):
        parse_network(path.read_text())


def test_links_form_matches_dense():
    links = [
        {"from": [0, 1], "to": [1, 1], "gain": 1.0},
        {"from": [0, 1], "to": [1, 2], "gain": 2.0},
        {"from": [0, 1], "to": [1, 3], "gain": 0.5},
        {"from": [1, 1], "to": [2, 1], "gain": 1.5},
        {"from": [1, 2], "to": [2, 1], "gain": 0.25},
        {"from": [1, 3], "to": [2, 1], "gain": 3.0},
    ]
    doc = {k: v for k, v in DIAMOND3.items() if k != "gains"}
    doc["links"] = links
    assert parse_network(json.dumps(doc)) == parse_network(json.dumps(DIAMOND3))


def test_skipping_link_rejected():
    doc = {k: v for k, v in DIAMOND3.items() if k != "gains"}
    doc["links"] = [{"from": [0, 1], "to": [2, 1], "gain": 1.0}]
    with pytest.raises(NetworkError, match="non-layered link"):
        parse_network(json.dumps(doc))


def test_wrong_matrix_shape_is_non_layered():
    doc = dict(DIAMOND3, gains=[[[1.0, 2.0]], [[1.5], [0.25], [3.0]]])
    with pytest.raises(NetworkError, match="non-layered link"):
        parse_network(json.dumps(doc))


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"source_power": 0.0}, "source_power"),
        ({"noise_var": -1.0}, "noise_var"),
        ({"relay_powers": [[1.0, 0.0, 3.0]]}, "relay powers"),
        ({"gains": [[[1.0, 0.0, 0.5]], [[1.5], [0.25], [3.0]]]}, "isolated relay"),
        ({"gains": [[[1.0, 2.0, 0.5]], [[1.5], [0.0], [3.0]]]}, "isolated relay"),
        ({"layers": "3"}, "layers"),
        ({"source_power": "ten"}, "expected a number"),
    ],
)
def test_invalid_documents(patch, message):
    with pytest.raises(NetworkError, match=message):
        parse_network(json.dumps(dict(DIAMOND3, **patch)))


def test_missing_field_and_bad_json():
    doc = dict(DIAMOND3)
    del doc["noise_var"]
    with pytest.raises(NetworkError, match="missing"):
        parse_network(json.dumps(doc))
    with pytest.raises(NetworkError, match="invalid JSON"):
        parse_network("{not json")


def test_negative_gains_allowed():
    doc = dict(DIAMOND3, gains=[[[-1.0, 2.0, 0.5]], [[1.5], [-0.25], [3.0]]])
    assert parse_network(json.dumps(doc)).gains[0][0, 0] == -1.0


def test_network_is_immutable():
    net = two_layer_network()
    with pytest.raises(ValueError):
        net.gains[0][0, 0] = 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialize_round_trip(seed):
    net = random_network(np.random.default_rng(seed), signed=True)
    back = parse_network(serialize_network(net))
    assert back == net
    assert network_to_dict(back) == network_to_dict(net)


def test_validate_scaling_examples():
    net = two_layer_network(10.0)
    assert validate_scaling(net, ScalingVector.zeros(net.layer_sizes))

    b1 = beta_max(initial_state(net), net)
    bad = ScalingVector((np.array([2 * b1[0], 0.0]), np.zeros(2)))
    check = validate_scaling(net, bad)
    assert not check
    assert check.node == (1, 1)

    neg = ScalingVector((np.array([0.0, -0.1]), np.zeros(2)))
    assert validate_scaling(net, neg).node == (1, 2)

    with pytest.raises(ValueError):
        validate_scaling(net, ScalingVector.zeros((2,)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_validate_scaling_monotone(seed):
    # Holds for nonnegative gains: received powers only grow with earlier beta.
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    beta = random_feasible_beta(net, rng)
    assert validate_scaling(net, beta)
    lowered = ScalingVector(tuple(b * rng.uniform(0.0, 1.0, b.size) for b in beta.layers))
    assert validate_scaling(net, lowered)


def test_monotonicity_needs_nonnegative_gains():
    # With mixed signs, lowering a first-layer beta removes a cancellation and
    # raises the second layer's received power, so its bound shrinks.
    g0 = np.array([[1.0, 1.0]])
    g1 = np.array([[1.0], [-1.0]])
    g2 = np.array([[1.0]])
    net = LayeredNetwork((2, 1), (g0, g1, g2), ([1.0, 1.0], [1.0]), 100.0, 1.0)
    b1 = beta_max(initial_state(net), net)
    b2 = beta_max(propagate(initial_state(net), b1, net), net)
    beta = ScalingVector((b1, b2))
    assert validate_scaling(net, beta)
    lowered = ScalingVector((np.array([b1[0], 0.0]), b2))
    assert not validate_scaling(net, lowered)
