from __future__ import annotations

import pytest

from robustnet import make_network


@pytest.fixture
def chain3():
    """3-node fixture: unit rates, unit edges (2<-1), (3<-1), (3<-2).

    Its robustness vector is (1, 2, 4) with minimal level 4, attained at
    node 3 only."""
    return make_network([1.0, 1.0, 1.0], {(2, 1): 1.0, (3, 1): 1.0, (3, 2): 1.0})


@pytest.fixture
def chain4(chain3):
    """chain3 plus an isolated node with rate 1/4: vector (1, 2, 4, 4)."""
    return make_network(list(chain3.self_feedback) + [0.25], dict.fromkeys(
        [(i, j) for (i, j, _) in chain3.edges], 1.0
    ))
