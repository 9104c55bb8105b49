from __future__ import annotations

import numpy as np
import pytest

from netgen import absent_pairs, isolated_nodes, random_stable_network
from robustnet import (
    AddEdge,
    AddNode,
    Certificate,
    InvalidCertificateError,
    NotDiagonallyDominantError,
    PreconditionViolatedError,
    RemoveEdge,
    RemoveNode,
    RemoveNodeCascade,
    SequenceStepError,
    SetSelfFeedback,
    UnstableNetworkError,
    apply_change,
    change_from_dict,
    change_to_dict,
    check_certificate,
    check_sequence,
    diagonal_dominance_check,
    expand_cascade,
    lower_bound_added_edge,
    make_network,
    propose_repair,
    robustness_vector,
    sufficient_local_check,
    verdict,
    verdict_add_edge,
    verdict_add_node,
    verdict_remove_edge,
    verdict_remove_node,
    verdict_set_self_feedback,
    weighted_adjacency,
)
from robustnet.changes import _direct_u


# ---------------------------------------------------------------------------
# apply


def test_apply_add_node(chain3):
    applied = apply_change(chain3, AddNode(0.25))
    net = applied.network
    assert net.node_count == 4
    m = weighted_adjacency(net)
    assert np.array_equal(m[3], [0, 0, 0, 0]) and np.array_equal(m[:, 3], [0, 0, 0, 0])
    assert applied.index_map == {1: 1, 2: 2, 3: 3}


def test_apply_add_edge(chain4):
    net = apply_change(chain4, AddEdge(to=4, from_=2, weight=0.1)).network
    assert weighted_adjacency(net)[3, 1] == 0.1


def test_apply_remove_absent_edge_fails(chain3):
    with pytest.raises(PreconditionViolatedError):
        apply_change(chain3, RemoveEdge(to=1, from_=2))


def test_apply_remove_node_compacts_indices():
    net = make_network([1.0, 2.0, 3.0], {(3, 1): 0.5})
    applied = apply_change(net, RemoveNode(2))
    assert applied.network.self_feedback == (1.0, 3.0)
    assert applied.network.edges == ((2, 1, 0.5),)
    assert applied.index_map == {1: 1, 3: 2}


def test_apply_remove_node_with_edges_fails(chain3):
    with pytest.raises(PreconditionViolatedError):
        apply_change(chain3, RemoveNode(3))


def test_apply_self_loop_and_duplicate_edge_fail(chain3):
    with pytest.raises(PreconditionViolatedError):
        apply_change(chain3, AddEdge(to=2, from_=2, weight=0.1))
    with pytest.raises(PreconditionViolatedError):
        apply_change(chain3, AddEdge(to=3, from_=2, weight=0.1))


def test_change_json_round_trip():
    cases = [
        RemoveNode(4),
        RemoveEdge(to=3, from_=2),
        AddNode(0.25),
        AddEdge(to=4, from_=2, weight=0.1),
        SetSelfFeedback(4, 0.3),
        RemoveNodeCascade(2),
    ]
    for change in cases:
        assert change_from_dict(change_to_dict(change)) == change
    assert change_to_dict(AddEdge(4, 2, 0.1)) == {
        "op": "add_edge",
        "to": 4,
        "from": 2,
        "weight": "0.1",
    }


# ---------------------------------------------------------------------------
# removal verdicts


def test_remove_isolated_node_verdict(chain4):
    v = verdict_remove_node(chain4, RemoveNode(4), verify=True)
    assert v.scalable and v.stable_after
    assert np.array_equal(v.u_after, [1, 2, 4])
    assert np.array_equal(v.performance_loss, [0, 0, 0])


def test_remove_node_from_edgeless_pair():
    v = verdict_remove_node(make_network([1.0, 2.0]), RemoveNode(1), verify=True)
    assert v.scalable
    assert np.array_equal(v.u_after, [0.5])


def test_remove_node_with_edges_rejected(chain3):
    with pytest.raises(PreconditionViolatedError):
        verdict_remove_node(chain3, RemoveNode(3))


def test_remove_edge_verdicts(chain3):
    # dropping (3,2) removes the paths through node 2 into node 3
    v = verdict_remove_edge(chain3, RemoveEdge(to=3, from_=2), verify=True)
    assert v.scalable
    assert v.u_after == pytest.approx([1, 2, 2], rel=1e-12)
    # dropping (3,1) keeps the two-step path via node 2
    v = verdict_remove_edge(chain3, RemoveEdge(to=3, from_=1), verify=True)
    assert v.u_after == pytest.approx([1, 2, 3], rel=1e-12)
    # dropping (2,1) also shrinks node 3's total
    v = verdict_remove_edge(chain3, RemoveEdge(to=2, from_=1), verify=True)
    assert v.u_after == pytest.approx([1, 1, 3], rel=1e-12)
    assert np.all(v.performance_loss <= 0)


def test_remove_only_edge_decouples():
    net = make_network([1.0, 1.0], {(2, 1): 0.5})
    v = verdict_remove_edge(net, RemoveEdge(to=2, from_=1), verify=True)
    assert v.u_after == pytest.approx([1.0, 1.0], rel=1e-15)


def test_removals_always_scalable_random():
    rng = np.random.default_rng(23)
    for _ in range(40):
        net = random_stable_network(rng, n_max=10, density=0.4, isolated=1)
        for node in isolated_nodes(net):
            v = verdict_remove_node(net, RemoveNode(node), verify=True)
            assert v.scalable
        for i, j, _ in net.edges:
            v = verdict_remove_edge(net, RemoveEdge(to=i, from_=j), verify=True)
            assert v.scalable
            assert np.all(v.u_after <= v.u_before * (1 + 1e-12) + 1e-15)


# ---------------------------------------------------------------------------
# addition verdicts


def test_add_node_boundary_rate_is_scalable(chain3):
    v = verdict_add_node(chain3, AddNode(0.25), verify=True)
    assert v.scalable
    assert np.array_equal(v.u_after, [1, 2, 4, 4])
    assert v.gamma_after == 4.0


def test_add_node_below_boundary_not_scalable(chain3):
    v = verdict_add_node(chain3, AddNode(0.2), verify=True)
    assert not v.scalable
    assert v.u_after[-1] == 5.0
    assert verdict_add_node(chain3, AddNode(1.0)).scalable


def test_add_edge_chain4_not_scalable(chain4):
    v = verdict_add_edge(chain4, AddEdge(to=4, from_=2, weight=0.1), verify=True)
    assert not v.scalable and v.stable_after
    assert v.gamma_after == pytest.approx(4.8, rel=1e-12)
    assert v.u_after[3] == pytest.approx(4.8, rel=1e-12)
    assert v.head_to_argmax  # node 4 attains the bound itself
    assert np.all(v.performance_loss >= 0)


def test_add_edge_present_rejected(chain3):
    with pytest.raises(PreconditionViolatedError):
        verdict_add_edge(chain3, AddEdge(to=3, from_=1, weight=0.7))


def test_add_edge_pair_not_scalable():
    net = make_network([1.0, 1.0])
    v = verdict_add_edge(net, AddEdge(to=2, from_=1, weight=0.5), verify=True)
    assert v.u_after == pytest.approx([1.0, 1.5], rel=1e-15)
    assert not v.scalable  # level before is 1, after is 1.5


def test_add_edge_scalable_case():
    # plenty of slack at node 1: level stays at u_2 = 1
    net = make_network([2.0, 1.0])
    v = verdict_add_edge(net, AddEdge(to=1, from_=2, weight=0.5), verify=True)
    assert v.scalable and v.stable_after
    assert v.u_after == pytest.approx([0.75, 1.0], rel=1e-15)
    assert not v.head_to_argmax
    assert v.repair is None


def test_add_edge_destabilizing():
    net = make_network([1.0, 1.0], {(2, 1): 0.9})
    # closing the loop with product >= 1 kills stability
    v = verdict_add_edge(net, AddEdge(to=1, from_=2, weight=1.2), verify=True)
    assert not v.stable_after and not v.scalable
    assert v.u_after is None and v.gamma_after is None
    # the repair is still well defined and restores the certified level
    assert v.repair is not None


def test_add_edge_verdict_requires_stable_original():
    unstable = make_network([1, 1], {(1, 2): 2.0, (2, 1): 2.0})
    with pytest.raises(UnstableNetworkError):
        verdict_add_edge(unstable, AddEdge(to=1, from_=2, weight=0.1))


def test_incremental_matches_direct_random():
    rng = np.random.default_rng(29)
    done = 0
    while done < 60:
        net = random_stable_network(rng, n_max=12, density=0.35)
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        v = verdict_add_edge(
            net, AddEdge(to=to, from_=frm, weight=float(rng.uniform(0.05, 0.6))),
            verify=True,  # raises IncrementalMismatchError on disagreement
        )
        if v.stable_after:
            direct = _direct_u(apply_change(net, v.change).network)
            assert np.allclose(v.u_after, direct, rtol=1e-9)
            assert np.all(v.u_after >= v.u_before - 1e-12)  # monotone degradation
        done += 1


def test_cor1_reachability_forces_negative():
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 60:
        net = random_stable_network(rng, n_max=8, density=0.4)
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        v = verdict_add_edge(net, AddEdge(to=to, from_=frm, weight=0.2))
        if v.head_to_argmax:
            assert not v.scalable
            checked += 1


def test_add_remove_round_trip(chain3):
    rng = np.random.default_rng(37)
    for _ in range(20):
        net = random_stable_network(rng, n_max=8, density=0.3)
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        u0 = robustness_vector(net).u
        added = apply_change(net, AddEdge(to=to, from_=frm, weight=0.3)).network
        if not robustness_vector(added).stable:
            continue
        back = apply_change(added, RemoveEdge(to=to, from_=frm)).network
        assert back == net
        assert np.allclose(robustness_vector(back).u, u0, rtol=1e-12)


# ---------------------------------------------------------------------------
# self-feedback changes


def test_raising_rate_is_scalable(chain3):
    v = verdict_set_self_feedback(chain3, SetSelfFeedback(3, 2.0), verify=True)
    assert v.scalable
    assert v.u_after == pytest.approx([1, 2, 2], rel=1e-12)


def test_lowering_rate_can_destabilize():
    net = make_network([1.0, 1.0], {(1, 2): 0.5, (2, 1): 0.5})
    v = verdict_set_self_feedback(net, SetSelfFeedback(1, 0.2))
    assert not v.stable_after and not v.scalable


# ---------------------------------------------------------------------------
# sufficient local tests


def test_local_check_tight_certificate_never_passes(chain3):
    cert = Certificate([1, 2, 4], 4.0)
    for w in (1e-9, 0.1, 1.0):
        assert not sufficient_local_check(chain3, AddEdge(to=1, from_=2, weight=w), cert)


def test_local_check_with_slack_passes():
    net = make_network([3.0, 1.0])
    cert = Certificate([1.0, 1.0], 1.0)
    assert sufficient_local_check(net, AddEdge(to=1, from_=2, weight=1.0), cert)
    # soundness: the exact verdict is robust at the certificate level
    v = verdict_add_edge(net, AddEdge(to=1, from_=2, weight=1.0))
    assert v.stable_after and v.gamma_after <= cert.gamma * (1 + 1e-12)


def test_local_check_rejects_bad_certificate(chain3):
    with pytest.raises(InvalidCertificateError):
        sufficient_local_check(
            chain3, AddEdge(to=1, from_=2, weight=0.1), Certificate([1, 1, 1], 4.0)
        )


def test_local_check_incompleteness_witness():
    """A scalable addition the row-local test cannot certify."""
    net = make_network([2.0, 1.0])
    change = AddEdge(to=1, from_=2, weight=0.5)
    exact = verdict_add_edge(net, change)
    assert exact.scalable
    rep = robustness_vector(net)
    assert not sufficient_local_check(net, change, Certificate(rep.u, rep.gamma_min))


def test_diagonal_dominance_check_examples(chain3):
    net = make_network([2.0, 2.0], {(2, 1): 0.5})
    assert diagonal_dominance_check(net, AddEdge(to=1, from_=2, weight=0.5), 1.0)
    assert not diagonal_dominance_check(net, AddEdge(to=1, from_=2, weight=1.5), 1.0)
    with pytest.raises(NotDiagonallyDominantError):
        diagonal_dominance_check(chain3, AddEdge(to=1, from_=2, weight=0.1), 4.0)
    with pytest.raises(InvalidCertificateError):
        # gamma too small for the uniform certificate
        diagonal_dominance_check(net, AddEdge(to=1, from_=2, weight=0.5), 0.1)


def test_dominance_equals_local_check_with_uniform_cert():
    rng = np.random.default_rng(41)
    for _ in range(40):
        net = random_stable_network(rng, n_max=6, density=0.3)
        a = np.array(net.self_feedback)
        rows = weighted_adjacency(net).sum(axis=1)
        if not np.all(a > rows):
            continue
        gamma = float(1.0 / (a - rows).min() * rng.uniform(1.0, 3.0))
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        change = AddEdge(to=to, from_=frm, weight=float(rng.uniform(0.05, 0.5)))
        want = sufficient_local_check(
            net, change, Certificate(np.full(net.node_count, gamma), gamma)
        )
        assert diagonal_dominance_check(net, change, gamma) == want


# ---------------------------------------------------------------------------
# repair


def test_repair_reproduces_published_value(chain4):
    change = AddEdge(to=4, from_=2, weight=0.1)
    cert = Certificate([1, 2, 4, 4], 4.0)
    repair = propose_repair(chain4, change, cert)
    assert repair.node == 4
    assert repair.a_new == pytest.approx(0.3, rel=1e-12)
    combined = apply_change(
        apply_change(chain4, SetSelfFeedback(4, repair.a_new)).network, change
    ).network
    assert check_certificate(combined, cert)
    assert robustness_vector(combined).gamma_min == pytest.approx(4.0, rel=1e-12)


def test_repair_weight_limit_degenerates_to_old_rate():
    net = make_network([1.0, 1.0])
    repair = propose_repair(net, AddEdge(to=2, from_=1, weight=1e-13), Certificate([1, 1], 1.0))
    assert repair.a_new == pytest.approx(repair.a_old, rel=1e-12)
    assert repair.a_new >= repair.a_old


def test_repair_pair_example():
    net = make_network([1.0, 1.0])
    repair = propose_repair(net, AddEdge(to=2, from_=1, weight=0.5), Certificate([1, 1], 1.0))
    assert repair.a_new == pytest.approx(1.5, rel=1e-12)
    combined = apply_change(
        apply_change(net, SetSelfFeedback(2, repair.a_new)).network,
        AddEdge(to=2, from_=1, weight=0.5),
    ).network
    assert robustness_vector(combined).u == pytest.approx([1.0, 1.0], rel=1e-12)


def test_repair_soundness_random():
    rng = np.random.default_rng(43)
    done = 0
    while done < 40:
        net = random_stable_network(rng, n_max=8, density=0.35)
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        change = AddEdge(to=to, from_=frm, weight=float(rng.uniform(0.1, 1.0)))
        rep = robustness_vector(net)
        cert = Certificate(rep.u, rep.gamma_min)
        repair = propose_repair(net, change, cert)
        combined = apply_change(
            apply_change(net, SetSelfFeedback(repair.node, repair.a_new)).network,
            change,
        ).network
        assert check_certificate(combined, cert)
        done += 1


# ---------------------------------------------------------------------------
# lower bound


def test_lower_bound_examples(chain4):
    assert lower_bound_added_edge(chain4, 4, 2, 0.1) == pytest.approx(4.8, rel=1e-12)
    net = make_network([1.0, 1.0])
    assert lower_bound_added_edge(net, 2, 1, 0.5) == pytest.approx(1.5, rel=1e-15)


def test_lower_bound_never_exceeds_actual():
    rng = np.random.default_rng(47)
    done = 0
    while done < 40:
        net = random_stable_network(rng, n_max=8, density=0.4)
        pairs = absent_pairs(net)
        if not pairs:
            continue
        to, frm = pairs[rng.integers(len(pairs))]
        w = float(rng.uniform(0.05, 0.5))
        v = verdict_add_edge(net, AddEdge(to=to, from_=frm, weight=w))
        if not v.stable_after:
            continue
        bound = lower_bound_added_edge(net, to, frm, w)
        assert bound <= v.u_after[to - 1] * (1 + 1e-12)
        done += 1


# ---------------------------------------------------------------------------
# cascades and sequences


def test_expand_cascade(chain3):
    steps = expand_cascade(chain3, RemoveNodeCascade(3))
    assert steps == [RemoveEdge(to=3, from_=1), RemoveEdge(to=3, from_=2), RemoveNode(3)]


def test_cascade_apply_maps_indices(chain3):
    applied = apply_change(chain3, RemoveNodeCascade(2))
    assert applied.network.self_feedback == (1.0, 1.0)
    assert applied.network.edges == ((2, 1, 1.0),)
    assert applied.index_map == {1: 1, 3: 2}


def test_sequence_without_repair(chain3):
    rep = check_sequence(
        chain3, [AddNode(0.25), AddEdge(to=4, from_=2, weight=0.1)], gamma=4.0
    )
    assert [s.verdict.scalable for s in rep.steps] == [True, False]
    assert rep.halted_at is None
    assert rep.final_gamma == pytest.approx(4.8, rel=1e-12)
    assert not rep.final_robust


def test_sequence_with_repair(chain3):
    rep = check_sequence(
        chain3,
        [AddNode(0.25), AddEdge(to=4, from_=2, weight=0.1), SetSelfFeedback(4, 0.3)],
        gamma=4.0,
    )
    assert rep.final_robust
    assert rep.final_gamma == pytest.approx(4.0, rel=1e-12)


def test_empty_sequence(chain3):
    rep = check_sequence(chain3, [], gamma=4.0)
    assert rep.steps == ()
    assert rep.final_robust and rep.final_gamma == 4.0


def test_sequence_halts_on_destabilizing_step():
    net = make_network([1.0, 1.0], {(2, 1): 0.9})
    rep = check_sequence(
        net,
        [AddEdge(to=1, from_=2, weight=1.5), AddNode(1.0)],
        gamma=100.0,
    )
    assert rep.halted_at == 1
    assert len(rep.steps) == 1  # the destabilizing step is not applied
    assert rep.final_network == net


def test_sequence_expands_cascades_against_current_state(chain3):
    rep = check_sequence(chain3, [RemoveNodeCascade(3)], gamma=4.0)
    assert [type(s.change).__name__ for s in rep.steps] == [
        "RemoveEdge",
        "RemoveEdge",
        "RemoveNode",
    ]
    assert rep.final_robust


def test_sequence_error_carries_step_index(chain3):
    with pytest.raises(SequenceStepError) as err:
        check_sequence(chain3, [AddNode(1.0), RemoveEdge(to=1, from_=2)], gamma=4.0)
    assert err.value.step == 2


def test_verdict_dispatch(chain3):
    assert verdict(chain3, AddNode(1.0)).scalable
    with pytest.raises(TypeError):
        verdict(chain3, RemoveNodeCascade(3))
