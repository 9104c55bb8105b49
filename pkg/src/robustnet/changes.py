"""Structural changes: application, scalability verdicts, repairs.

The four elementary changes are removing an isolated node, removing an
edge, adding an isolated node, and adding an edge.  Removals always
preserve every certified amplification level; additions are adjudicated
exactly: an isolated node with rate a is admissible iff 1/a does not exceed
the current level, and an added edge is admissible iff the rank-one-updated
robustness vector stays within the current level.  A non-admissible edge
can be repaired by raising the head node's self-feedback rate.

Two compound conveniences are provided beyond the elementary four: a
self-feedback rate change (a rank-one diagonal update, used to apply
repairs inside sequences) and a cascading node removal that first removes
every incident edge.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from . import analysis, model
from .analysis import Certificate, leq_rel
from .errors import (
    IncrementalMismatchError,
    InvalidCertificateError,
    NotDiagonallyDominantError,
    PreconditionViolatedError,
    SequenceStepError,
)
from .model import Network, NodeId
from .numfmt import parse_decimal

#: Relative agreement required between incremental and direct solves.
VERIFY_RTOL = 1e-9


@dataclass(frozen=True)
class RemoveNode:
    node: NodeId


@dataclass(frozen=True)
class RemoveEdge:
    to: NodeId
    from_: NodeId


@dataclass(frozen=True)
class AddNode:
    a_new: float


@dataclass(frozen=True)
class AddEdge:
    to: NodeId
    from_: NodeId
    weight: float


@dataclass(frozen=True)
class SetSelfFeedback:
    node: NodeId
    a_new: float


@dataclass(frozen=True)
class RemoveNodeCascade:
    node: NodeId


ElementaryChange = Union[RemoveNode, RemoveEdge, AddNode, AddEdge]
StructuralChange = Union[ElementaryChange, SetSelfFeedback, RemoveNodeCascade]


@dataclass(frozen=True)
class AppliedChange:
    """New network plus the old-to-new index map (nodes added by the change
    have no old index and therefore no entry)."""

    network: Network
    index_map: dict[NodeId, NodeId]


@dataclass(frozen=True)
class SelfFeedbackRepair:
    node: NodeId
    a_old: float
    a_new: float


@dataclass(frozen=True, eq=False)
class ChangeVerdict:
    change: StructuralChange
    scalable: bool
    stable_after: bool
    u_before: np.ndarray
    u_after: np.ndarray | None
    gamma_before: float
    gamma_after: float | None
    performance_loss: np.ndarray | None
    repair: SelfFeedbackRepair | None = None
    #: Edge additions only: whether the head node reaches a bound-attaining
    #: node along the influence direction (which forces non-scalability).
    head_to_argmax: bool | None = None


# ---------------------------------------------------------------------------
# JSON forms


def change_to_dict(change: StructuralChange) -> dict:
    from .numfmt import format_decimal as f

    if isinstance(change, RemoveNode):
        return {"op": "remove_node", "node": change.node}
    if isinstance(change, RemoveEdge):
        return {"op": "remove_edge", "to": change.to, "from": change.from_}
    if isinstance(change, AddNode):
        return {"op": "add_node", "a": f(change.a_new)}
    if isinstance(change, AddEdge):
        return {
            "op": "add_edge",
            "to": change.to,
            "from": change.from_,
            "weight": f(change.weight),
        }
    if isinstance(change, SetSelfFeedback):
        return {"op": "set_self_feedback", "node": change.node, "a": f(change.a_new)}
    if isinstance(change, RemoveNodeCascade):
        return {"op": "remove_node_cascade", "node": change.node}
    raise TypeError(f"not a structural change: {change!r}")


def change_from_dict(d) -> StructuralChange:
    if not isinstance(d, dict):
        raise ValueError("change must be a JSON object")
    op = d.get("op")
    schemas = {
        "remove_node": {"node"},
        "remove_edge": {"to", "from"},
        "add_node": {"a"},
        "add_edge": {"to", "from", "weight"},
        "set_self_feedback": {"node", "a"},
        "remove_node_cascade": {"node"},
    }
    if op not in schemas:
        raise ValueError(f"unknown change op {op!r}")
    model._require_keys(d, schemas[op] | {"op"}, f"change[{op}]")

    def node(key):
        return model._require_int(d[key], f"change.{key}")

    if op == "remove_node":
        return RemoveNode(node("node"))
    if op == "remove_edge":
        return RemoveEdge(to=node("to"), from_=node("from"))
    if op == "add_node":
        return AddNode(parse_decimal(d["a"], "change.a"))
    if op == "add_edge":
        return AddEdge(
            to=node("to"),
            from_=node("from"),
            weight=parse_decimal(d["weight"], "change.weight"),
        )
    if op == "set_self_feedback":
        return SetSelfFeedback(node("node"), parse_decimal(d["a"], "change.a"))
    return RemoveNodeCascade(node("node"))


def changes_from_list(docs) -> list[StructuralChange]:
    if not isinstance(docs, list):
        raise ValueError("change sequence must be a JSON array")
    return [change_from_dict(d) for d in docs]


# ---------------------------------------------------------------------------
# Application


def _check_node(net: Network, node: NodeId, what: str = "node") -> None:
    if not (1 <= node <= net.node_count):
        raise PreconditionViolatedError(
            f"{what} {node} out of range [1..{net.node_count}]"
        )


def _incident_edges(net: Network, node: NodeId) -> list[tuple[int, int, float]]:
    return [(i, j, w) for (i, j, w) in net.edges if i == node or j == node]


def expand_cascade(net: Network, change: RemoveNodeCascade) -> list[ElementaryChange]:
    """The edge removals implied by a cascading node removal, followed by
    the isolated-node removal itself."""
    _check_node(net, change.node)
    steps: list[ElementaryChange] = [
        RemoveEdge(to=i, from_=j) for (i, j, _) in _incident_edges(net, change.node)
    ]
    steps.append(RemoveNode(change.node))
    return steps


def apply_change(net: Network, change: StructuralChange) -> AppliedChange:
    """Return the transformed network; raises PreconditionViolatedError when
    the change does not apply to this network."""
    model.require_valid(net)
    identity = {k: k for k in range(1, net.node_count + 1)}

    if isinstance(change, RemoveNode):
        _check_node(net, change.node)
        if net.node_count == 1:
            raise PreconditionViolatedError("cannot remove the only node")
        if _incident_edges(net, change.node):
            raise PreconditionViolatedError(
                f"node {change.node} has incident edges; remove them first"
            )
        k = change.node
        a = tuple(v for i, v in enumerate(net.self_feedback, 1) if i != k)
        remap = {old: (old if old < k else old - 1) for old in identity if old != k}
        edges = tuple(
            (remap[i], remap[j], w) for (i, j, w) in net.edges
        )
        return AppliedChange(Network(a, edges), remap)

    if isinstance(change, RemoveEdge):
        if not net.has_edge(change.to, change.from_):
            raise PreconditionViolatedError(
                f"edge to={change.to} from={change.from_} not present"
            )
        edges = tuple(
            (i, j, w)
            for (i, j, w) in net.edges
            if not (i == change.to and j == change.from_)
        )
        return AppliedChange(Network(net.self_feedback, edges), identity)

    if isinstance(change, AddNode):
        if not change.a_new > 0:
            raise PreconditionViolatedError("new node rate must be positive")
        return AppliedChange(
            Network(net.self_feedback + (change.a_new,), net.edges), identity
        )

    if isinstance(change, AddEdge):
        _check_node(net, change.to, "edge head")
        _check_node(net, change.from_, "edge tail")
        if change.to == change.from_:
            raise PreconditionViolatedError("self-loops are not allowed")
        if net.has_edge(change.to, change.from_):
            raise PreconditionViolatedError(
                f"edge to={change.to} from={change.from_} already present"
            )
        if not change.weight > 0:
            raise PreconditionViolatedError("edge weight must be positive")
        edges = net.edges + ((change.to, change.from_, change.weight),)
        return AppliedChange(Network(net.self_feedback, edges), identity)

    if isinstance(change, SetSelfFeedback):
        _check_node(net, change.node)
        if not change.a_new > 0:
            raise PreconditionViolatedError("self-feedback rate must be positive")
        a = tuple(
            change.a_new if i == change.node else v
            for i, v in enumerate(net.self_feedback, 1)
        )
        return AppliedChange(Network(a, net.edges), identity)

    if isinstance(change, RemoveNodeCascade):
        current = net
        composed = identity
        for step in expand_cascade(net, change):
            applied = apply_change(current, step)
            current = applied.network
            composed = {
                old: applied.index_map[new]
                for old, new in composed.items()
                if new in applied.index_map
            }
        return AppliedChange(current, composed)

    raise TypeError(f"not a structural change: {change!r}")


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True, eq=False)
class _Base:
    net: Network
    lu: tuple
    u: np.ndarray
    gamma: float
    argmax: tuple[NodeId, ...]


@functools.lru_cache(maxsize=8)
def _analyze_base(net: Network, eps_stab: float) -> _Base:
    # Networks are immutable and hashable, so verdicts on the same base
    # network (e.g. sweeping every candidate edge) share one factorization.
    report = analysis.robustness_vector(net, eps_stab=eps_stab)
    return _Base(net, analysis._lu(net), report.u, report.gamma_min, report.argmax_nodes)


def _direct_u(net: Network) -> np.ndarray:
    return scipy.linalg.solve(model.system_matrix(net), np.ones(net.node_count))


def _verify_incremental(u_incremental: np.ndarray, net_after: Network) -> None:
    direct = _direct_u(net_after)
    err = np.abs(u_incremental - direct)
    if not np.all(err <= VERIFY_RTOL * (1.0 + np.abs(direct))):
        raise IncrementalMismatchError(
            f"max deviation {float(err.max())!r} between rank-one update and direct solve"
        )


def _reaches_argmax(net: Network, head: NodeId, argmax: tuple[NodeId, ...]) -> bool:
    """BFS along influence direction from `head` (reflexively): True when a
    bound-attaining node is reachable, so any added edge into `head`
    strictly raises the bound."""
    targets = set(argmax)
    succ = model.influence_successors(net)
    seen = {head - 1}
    queue = [head - 1]
    while queue:
        v = queue.pop()
        if v + 1 in targets:
            return True
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def verdict_remove_node(
    net: Network,
    change: RemoveNode,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """Removing an isolated node preserves every certified level; the other
    nodes' robustness entries are untouched."""
    base = _analyze_base(net, eps_stab)
    applied = apply_change(net, change)
    u_after = np.delete(base.u, change.node - 1)
    if verify:
        _verify_incremental(u_after, applied.network)
    return ChangeVerdict(
        change=change,
        scalable=True,
        stable_after=True,
        u_before=base.u,
        u_after=u_after,
        gamma_before=base.gamma,
        gamma_after=float(u_after.max()),
        performance_loss=np.zeros(u_after.size),
    )


def verdict_remove_edge(
    net: Network,
    change: RemoveEdge,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """Removing any edge preserves every certified level.  The updated
    vector comes from a rank-one (Sherman-Morrison) update of the inverse;
    its denominator 1 + w*c is at least one, so the update never degenerates."""
    base = _analyze_base(net, eps_stab)
    w = net.edge_weight(change.to, change.from_)
    applied = apply_change(net, change)  # validates presence
    col = analysis._solve_unit(base.lu, change.to - 1)
    c = float(col[change.from_ - 1])
    u_after = base.u - (w / (1.0 + w * c)) * col * base.u[change.from_ - 1]
    if verify:
        _verify_incremental(u_after, applied.network)
    return ChangeVerdict(
        change=change,
        scalable=True,
        stable_after=True,
        u_before=base.u,
        u_after=u_after,
        gamma_before=base.gamma,
        gamma_after=float(u_after.max()),
        performance_loss=u_after - base.u,
    )


def verdict_add_node(
    net: Network,
    change: AddNode,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """An isolated node contributes the new entry 1/a and nothing else, so
    the change is scalable exactly when 1/a stays within the current level
    (non-strict: the boundary rate is admissible)."""
    base = _analyze_base(net, eps_stab)
    applied = apply_change(net, change)
    new_entry = 1.0 / change.a_new
    u_after = np.append(base.u, new_entry)
    if verify:
        _verify_incremental(u_after, applied.network)
    return ChangeVerdict(
        change=change,
        scalable=leq_rel(new_entry, base.gamma),
        stable_after=True,
        u_before=base.u,
        u_after=u_after,
        gamma_before=base.gamma,
        gamma_after=float(u_after.max()),
        performance_loss=np.zeros(u_after.size),
    )


def verdict_add_edge(
    net: Network,
    change: AddEdge,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """Exact adjudication of an edge addition.

    One unit solve gives the head column of (A - M)^{-1}; its tail entry c
    closes the new feedback loop, and the update denominator 1 - w*c
    vanishing is exactly the loss of stability.  When the denominator clears
    the stability margin (and the post-change spectral test agrees), the
    updated vector is u + w/(1 - w*c) * column * u_tail, and the change is
    scalable iff that vector stays within the current level everywhere.
    Reachability of a bound-attaining node from the head is recorded and
    forces a negative verdict; it can never contradict the exact comparison
    outside rounding margins.

    Non-scalable verdicts carry the self-feedback repair derived from the
    tight certificate.
    """
    base = _analyze_base(net, eps_stab)
    applied = apply_change(net, change)
    i0 = change.to - 1
    j0 = change.from_ - 1
    col = analysis._solve_unit(base.lu, i0)
    c = float(col[j0])
    denom = 1.0 - change.weight * c

    head_to_argmax = _reaches_argmax(net, change.to, base.argmax)

    stable_after = denom > eps_stab
    if stable_after:
        stable_after = analysis.stability(applied.network, eps_stab=eps_stab).stable

    if not stable_after:
        u_after = None
        gamma_after = None
        loss = None
        scalable = False
    else:
        u_after = base.u + (change.weight / denom) * col * base.u[j0]
        if verify:
            _verify_incremental(u_after, applied.network)
        gamma_after = float(u_after.max())
        loss = u_after - base.u
        within = bool(np.all(u_after <= base.gamma * (1.0 + analysis.GAMMA_RTOL)))
        scalable = within and not head_to_argmax

    repair = None
    if not scalable:
        repair = _repair_from_cert(net, change, Certificate(base.u, base.gamma))

    return ChangeVerdict(
        change=change,
        scalable=scalable,
        stable_after=stable_after,
        u_before=base.u,
        u_after=u_after,
        gamma_before=base.gamma,
        gamma_after=gamma_after,
        performance_loss=loss,
        repair=repair,
        head_to_argmax=head_to_argmax,
    )


def verdict_set_self_feedback(
    net: Network,
    change: SetSelfFeedback,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """Rate changes are rank-one diagonal updates.  Raising a rate weakly
    improves every entry; lowering it can destabilize, which the update
    denominator detects exactly."""
    base = _analyze_base(net, eps_stab)
    applied = apply_change(net, change)
    i0 = change.node - 1
    delta = change.a_new - net.self_feedback[i0]
    col = analysis._solve_unit(base.lu, i0)
    denom = 1.0 + delta * float(col[i0])

    stable_after = denom > eps_stab
    if stable_after:
        stable_after = analysis.stability(applied.network, eps_stab=eps_stab).stable

    if not stable_after:
        return ChangeVerdict(
            change=change,
            scalable=False,
            stable_after=False,
            u_before=base.u,
            u_after=None,
            gamma_before=base.gamma,
            gamma_after=None,
            performance_loss=None,
        )

    u_after = base.u - (delta / denom) * col * base.u[i0]
    if verify:
        _verify_incremental(u_after, applied.network)
    return ChangeVerdict(
        change=change,
        scalable=bool(np.all(u_after <= base.gamma * (1.0 + analysis.GAMMA_RTOL))),
        stable_after=True,
        u_before=base.u,
        u_after=u_after,
        gamma_before=base.gamma,
        gamma_after=float(u_after.max()),
        performance_loss=u_after - base.u,
    )


_VERDICTS = {
    RemoveNode: verdict_remove_node,
    RemoveEdge: verdict_remove_edge,
    AddNode: verdict_add_node,
    AddEdge: verdict_add_edge,
    SetSelfFeedback: verdict_set_self_feedback,
}


def verdict(
    net: Network,
    change: StructuralChange,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> ChangeVerdict:
    """Adjudicate a single change (cascades must be expanded first)."""
    fn = _VERDICTS.get(type(change))
    if fn is None:
        raise TypeError(
            f"no single-step verdict for {type(change).__name__}; "
            "expand it into elementary changes first"
        )
    return fn(net, change, eps_stab=eps_stab, verify=verify)


# ---------------------------------------------------------------------------
# Sufficient local tests, repairs, bounds


def _cert_or_default(net: Network, cert: Certificate | None, eps_stab: float) -> Certificate:
    if cert is not None:
        return cert
    report = analysis.robustness_vector(net, eps_stab=eps_stab)
    return Certificate(report.u, report.gamma_min)


def _require_add_edge(net: Network, change: AddEdge) -> None:
    # reuse the application preconditions without building the new network
    _check_node(net, change.to, "edge head")
    _check_node(net, change.from_, "edge tail")
    if change.to == change.from_ or net.has_edge(change.to, change.from_):
        raise PreconditionViolatedError("edge must be absent and not a self-loop")
    if not change.weight > 0:
        raise PreconditionViolatedError("edge weight must be positive")


def sufficient_local_check(
    net: Network,
    change: AddEdge,
    cert: Certificate | None = None,
    *,
    eps_stab: float = analysis.EPS_STAB,
) -> bool:
    """Row-local sufficient test for an edge addition.

    Using only the head node's row and the certificate entries, checks
    a_i >= (sum of m_ik v_k over in-neighbours + w v_j + 1) / v_i.  True
    guarantees the certificate survives the addition, hence the certified
    level is preserved.  False decides nothing: the exact verdict can still
    come out scalable.
    """
    model.require_valid(net)
    _require_add_edge(net, change)
    cert = _cert_or_default(net, cert, eps_stab)
    if not analysis.check_certificate(net, cert):
        raise InvalidCertificateError("certificate does not validate for this network")

    i0 = change.to - 1
    v = cert.v
    row = model.weighted_adjacency(net)[i0]
    needed = (float(row @ v) + change.weight * v[change.from_ - 1] + 1.0) / v[i0]
    return bool(net.self_feedback[i0] >= needed)


def diagonal_dominance_check(
    net: Network,
    change: AddEdge,
    gamma: float,
    *,
    eps_stab: float = analysis.EPS_STAB,
) -> bool:
    """Sufficient test in the strictly diagonally dominant regime, where the
    uniform vector gamma * 1 is a certificate: the addition is admissible at
    level gamma if a_i >= (row sum of m_ik) + w + 1/gamma.  Equivalent to
    :func:`sufficient_local_check` with that uniform certificate."""
    model.require_valid(net)
    _require_add_edge(net, change)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a = model.a_vector(net)
    row_sums = model.weighted_adjacency(net).sum(axis=1)
    if not np.all(a > row_sums):
        bad = int(np.argmax(a <= row_sums)) + 1
        raise NotDiagonallyDominantError(
            f"row {bad}: a = {a[bad - 1]!r} does not exceed its weight sum {row_sums[bad - 1]!r}"
        )
    if not np.all(gamma * (a - row_sums) >= 1.0):
        raise InvalidCertificateError(
            f"gamma = {gamma!r} is too small for the uniform certificate"
        )
    i0 = change.to - 1
    return bool(a[i0] >= row_sums[i0] + change.weight + 1.0 / gamma)


def _repair_from_cert(net: Network, change: AddEdge, cert: Certificate) -> SelfFeedbackRepair:
    i0 = change.to - 1
    v = cert.v
    a_old = net.self_feedback[i0]
    a_new = a_old + change.weight * v[change.from_ - 1] / v[i0]

    # Round up by ulps until the certificate verifiably survives the
    # combined change under the exact (zero-tolerance) test.
    combined = apply_change(
        apply_change(net, SetSelfFeedback(change.to, a_new)).network, change
    ).network
    while not analysis.check_certificate(combined, cert):
        a_new = float(np.nextafter(a_new, np.inf))
        combined = apply_change(
            apply_change(net, SetSelfFeedback(change.to, a_new)).network, change
        ).network
    return SelfFeedbackRepair(node=change.to, a_old=a_old, a_new=a_new)


def propose_repair(
    net: Network,
    change: AddEdge,
    cert: Certificate | None = None,
    *,
    eps_stab: float = analysis.EPS_STAB,
) -> SelfFeedbackRepair:
    """Raise the head node's rate to a + w * v_j / v_i so the certificate
    survives the edge addition.

    The returned rate is rounded up by at most a few ulps so that the exact
    certificate check provably passes on the repaired network.
    """
    model.require_valid(net)
    _require_add_edge(net, change)
    cert = _cert_or_default(net, cert, eps_stab)
    if not analysis.check_certificate(net, cert):
        raise InvalidCertificateError("certificate does not validate for this network")
    return _repair_from_cert(net, change, cert)


def lower_bound_added_edge(
    net: Network,
    to: NodeId,
    from_: NodeId,
    weight: float,
    *,
    eps_stab: float = analysis.EPS_STAB,
) -> float:
    """Certified lower bound u_i + (w / a_i) u_j on the head node's updated
    robustness entry, without solving the updated system."""
    _require_add_edge(net, AddEdge(to=to, from_=from_, weight=weight))
    report = analysis.robustness_vector(net, eps_stab=eps_stab)
    return float(
        report.u[to - 1] + (weight / net.self_feedback[to - 1]) * report.u[from_ - 1]
    )


# ---------------------------------------------------------------------------
# Sequences


@dataclass(frozen=True)
class SequenceStep:
    index: int  # 1-based over the expanded change list
    change: StructuralChange
    verdict: ChangeVerdict
    index_map: dict[NodeId, NodeId]


@dataclass(frozen=True)
class SequenceReport:
    gamma: float
    steps: tuple[SequenceStep, ...]
    halted_at: int | None  # step index whose change would destabilize
    final_network: Network
    final_gamma: float | None
    final_robust: bool

    @property
    def all_scalable(self) -> bool:
        return all(s.verdict.scalable for s in self.steps)


def check_sequence(
    net: Network,
    changes: list[StructuralChange],
    gamma: float | None = None,
    *,
    eps_stab: float = analysis.EPS_STAB,
    verify: bool = False,
) -> SequenceReport:
    """Adjudicate a change script step by step.

    Cascading removals are expanded in place.  Non-scalable but stable
    steps are applied and flagged; a destabilizing step halts the run
    without being applied.  The final decision is whether the resulting
    network is robust at `gamma` (default: the original minimal level).
    Per-step failures are re-raised with their step index attached.
    """
    report = analysis.robustness_vector(net, eps_stab=eps_stab)
    if gamma is None:
        gamma = report.gamma_min

    current = net
    steps: list[SequenceStep] = []
    halted_at = None
    queue = list(changes)
    pos = 0
    idx = 0
    while pos < len(queue):
        change = queue[pos]
        pos += 1
        if isinstance(change, RemoveNodeCascade):
            # expand against the network state at this step
            try:
                queue[pos:pos] = expand_cascade(current, change)
            except PreconditionViolatedError as err:
                raise SequenceStepError(idx + 1, err) from err
            continue
        idx += 1
        try:
            v = verdict(current, change, eps_stab=eps_stab, verify=verify)
            if not v.stable_after:
                steps.append(SequenceStep(idx, change, v, {}))
                halted_at = idx
                break
            applied = apply_change(current, change)
        except (PreconditionViolatedError, TypeError, ValueError) as err:
            raise SequenceStepError(idx, err) from err
        steps.append(SequenceStep(idx, change, v, applied.index_map))
        current = applied.network

    final_report = analysis.analyze(current, eps_stab=eps_stab)
    final_robust = final_report.stable and leq_rel(final_report.gamma_min, gamma)
    return SequenceReport(
        gamma=float(gamma),
        steps=tuple(steps),
        halted_at=halted_at,
        final_network=current,
        final_gamma=final_report.gamma_min,
        final_robust=final_robust,
    )
