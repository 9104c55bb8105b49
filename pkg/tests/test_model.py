from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustnet import (
    InvalidNetworkError,
    Network,
    make_network,
    neighbors_in,
    network_from_dict,
    network_to_dict,
    system_matrix,
    validate,
    weighted_adjacency,
)
from robustnet.model import dumps_network, is_acyclic, loads_network, require_valid


def test_minimal_network_is_valid():
    assert validate(make_network([1.0])) == []


def test_negative_rate_reported_with_location():
    violations = validate(make_network([1.0, -1.0]))
    assert len(violations) == 1
    assert violations[0].location == "self_feedback[2]"


def test_self_loop_rejected():
    violations = validate(make_network([1.0, 1.0], {(1, 1): 0.5}))
    assert any("self-loop" in v.message for v in violations)


def test_zero_weight_and_bad_index_rejected():
    violations = validate(make_network([1.0, 1.0], [(1, 2, 0.0), (1, 3, 0.5)]))
    messages = {v.location: v.message for v in violations}
    assert "weight <= 0" in messages["edges[(1,2)]"]
    assert "out of range" in messages["edges[(1,3)]"]


def test_require_valid_raises_with_all_violations():
    net = make_network([1.0, -2.0], {(2, 2): 1.0})
    with pytest.raises(InvalidNetworkError) as err:
        require_valid(net)
    assert len(err.value.violations) == 2


def test_neighbors_in_chain3(chain3):
    assert neighbors_in(chain3, 3) == {1, 2}
    assert neighbors_in(chain3, 1) == frozenset()
    assert neighbors_in(make_network([2.0]), 1) == frozenset()
    with pytest.raises(IndexError):
        neighbors_in(chain3, 4)


def test_weighted_adjacency_chain3(chain3):
    expected = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0]], dtype=float)
    assert np.array_equal(weighted_adjacency(chain3), expected)


def test_weighted_adjacency_edgeless_and_single_edge():
    assert np.array_equal(weighted_adjacency(make_network([1, 1])), np.zeros((2, 2)))
    m = weighted_adjacency(make_network([1, 1], {(2, 1): 0.5}))
    assert np.array_equal(m, [[0, 0], [0.5, 0]])


def test_adjacency_matches_neighbors(chain3):
    m = weighted_adjacency(chain3)
    for i in range(1, 4):
        assert neighbors_in(chain3, i) == {j + 1 for j in np.nonzero(m[i - 1] > 0)[0]}


def test_system_matrix(chain3):
    x = system_matrix(chain3)
    assert np.array_equal(x, [[1, 0, 0], [-1, 1, 0], [-1, -1, 1]])


def test_acyclicity(chain3):
    assert is_acyclic(chain3)
    assert not is_acyclic(make_network([1, 1], {(1, 2): 0.5, (2, 1): 0.5}))


def test_file_format_round_trip(chain3):
    doc = network_to_dict(chain3)
    assert doc["nodes"][0] == {"id": 1, "a": "1"}
    assert {"from": 1, "to": 2, "weight": "1"} in doc["edges"]
    assert network_from_dict(doc) == chain3


@settings(max_examples=200, deadline=None)
@given(
    rates=st.lists(
        st.floats(min_value=1e-12, max_value=1e12, allow_nan=False),
        min_size=1,
        max_size=6,
    ),
    weights=st.lists(
        st.floats(min_value=1e-12, max_value=1e12, allow_nan=False), max_size=8
    ),
    edge_seed=st.randoms(use_true_random=False),
)
def test_round_trip_is_bit_identical(rates, weights, edge_seed):
    n = len(rates)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    edge_seed.shuffle(pairs)
    edges = [(i, j, w) for (i, j), w in zip(pairs, weights)]
    net = Network(tuple(rates), tuple(edges))
    again = loads_network(dumps_network(net))
    assert again == net
    assert all(a == b for a, b in zip(again.self_feedback, net.self_feedback))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(extra=1),
        lambda d: d["nodes"][0].update(label="x"),
        lambda d: d["edges"][0].update(direction="fwd"),
        lambda d: d["nodes"][0].update(a=1.0),  # bare number, not a string
        lambda d: d["nodes"].append({"id": 5, "a": "1"}),  # id gap
        lambda d: d["edges"].append(dict(d["edges"][0])),  # duplicate edge
    ],
)
def test_strict_parse_rejects(mutate, chain3):
    doc = json.loads(json.dumps(network_to_dict(chain3)))
    mutate(doc)
    with pytest.raises(ValueError):
        network_from_dict(doc)


def test_edges_are_normalized_sorted():
    a = make_network([1, 1, 1], [(3, 1, 0.2), (2, 1, 0.1)])
    b = make_network([1, 1, 1], [(2, 1, 0.1), (3, 1, 0.2)])
    assert a == b
    assert a.edges == ((2, 1, 0.1), (3, 1, 0.2))
