"""Robustness analysis: stability, amplification bounds, certificates.

The disturbance dynamics are dx/dt = -(A - M) x + d with A = diag(a) and M
the weighted adjacency.  The network is stable exactly when the nonnegative
matrix M A^{-1} has spectral radius below one; in that case

    u = (A - M)^{-1} 1

is strictly positive, max_i u_i is the smallest amplification level gamma
for which peak state deviation is bounded by gamma times the peak
disturbance amplitude, and a_j u_j - 1 equals the total weight of all
directed walks ending at node j (walk weight: product of m/a factors along
the walk).  Certificates (v, gamma) with v > 0, (A - M) v >= 1 and
v <= gamma 1 witness a given level gamma.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import model
from ._kernels import johnson_cycles
from .errors import CycleBudgetExceededError, UnstableNetworkError
from .model import Network, NodeId

log = logging.getLogger("robustnet.analysis")

#: Relative margin excluded around the spectral-radius stability boundary.
EPS_STAB = 1e-9
#: Relative convergence target of the spectral-radius iteration.
POWER_TOL = 1e-12
#: Iteration cap of the spectral-radius iteration.
POWER_MAX_ITER = 100_000
#: Relative tie tolerance for reporting bound-attaining nodes.
ARGMAX_RTOL = 1e-12
#: Relative slack absorbing rounding noise in non-strict gamma comparisons.
GAMMA_RTOL = 1e-12
#: Default cap on simple-cycle enumeration.
CYCLE_CAP = 10**6


def leq_rel(x: float, y: float, rtol: float = GAMMA_RTOL) -> bool:
    """Non-strict x <= y with relative slack, for positive magnitudes."""
    return x <= y + rtol * abs(y)


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    spectral_radius: float
    converged: bool = True
    boundary_warning: bool = False


@dataclass(frozen=True, eq=False)
class RobustnessReport:
    """Stability flag plus, for stable networks, the robustness vector u,
    the minimal certified level gamma_min = max u, and every node attaining
    it within the tie tolerance."""

    stable: bool
    spectral_radius: float
    u: np.ndarray | None = None
    gamma_min: float | None = None
    argmax_nodes: tuple[NodeId, ...] | None = None
    boundary_warning: bool = False


@dataclass(frozen=True, eq=False)
class Certificate:
    v: np.ndarray
    gamma: float

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class NodeCheck:
    node: NodeId
    limit: float  # a_i * gamma
    passes: bool


@dataclass(frozen=True)
class CycleRecord:
    nodes: tuple[NodeId, ...]  # walk order, rooted at the smallest node
    weight: float
    bound: float  # 1 / (1 - weight)
    checks: tuple[NodeCheck, ...]


@dataclass(frozen=True)
class CycleReport:
    gamma: float
    cycles: tuple[CycleRecord, ...]
    violations: tuple[tuple[int, NodeId], ...]  # (cycle index, node)


@dataclass(frozen=True)
class WalkSumResult:
    """Truncated total weight of walks ending at the target, with a
    certified geometric tail bound lambda^(K+1) / (1 - lambda) * kappa
    reported alongside.  lambda and kappa come from a positive witness
    vector x with (M A^{-1}) x <= lambda x elementwise (kappa is the spread
    max x / min x), which dominates transient growth that a bare
    spectral-radius estimate would miss.  Exactly zero once the cutoff
    covers every walk of an acyclic graph."""

    target: NodeId
    max_length: int
    total: float
    tail_bound: float
    spectral_radius: float


def _walk_matrix(net: Network) -> np.ndarray:
    """M A^{-1}: nonnegative, entry (i, j) = m_ij / a_j."""
    return model.weighted_adjacency(net) / model.a_vector(net)[np.newaxis, :]


def _cyclic_core(B: np.ndarray) -> np.ndarray:
    """0-based indices of nodes inside nontrivial strongly connected
    components.  The spectral radius of a nonnegative matrix is attained on
    this submatrix; everything outside it is nilpotent."""
    import scipy.sparse
    import scipy.sparse.csgraph

    _, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(B > 0), directed=True, connection="strong"
    )
    sizes = np.bincount(labels)
    return np.nonzero(sizes[labels] >= 2)[0]


def stability(
    net: Network,
    *,
    eps_stab: float = EPS_STAB,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> StabilityResult:
    """Decide asymptotic stability via the spectral radius of M A^{-1}.

    Networks whose influence graph has no cycle are nilpotent and reported
    with radius exactly zero.  Otherwise a power iteration with start
    vector 1 runs on the shifted matrix I + B restricted to the cyclic core
    (the shift removes periodicity, which stalls the plain iteration on
    cycles with asymmetric weights; the restriction drops feeder and sink
    nodes, whose stagnant ratios block convergence).  The largest component
    ratio is a monotone upper estimate of the radius at every step, so
    stability claims remain sound even when the iteration is stopped early.
    Networks whose estimate falls inside the relative margin eps_stab below
    one are reported not stable with a boundary warning.
    """
    model.require_valid(net)
    B = _walk_matrix(net)
    core = _cyclic_core(B)
    if core.size == 0:
        return StabilityResult(stable=True, spectral_radius=0.0)
    B = np.ascontiguousarray(B[np.ix_(core, core)])

    x = np.ones(core.size)
    hi = np.inf
    hi_prev = np.inf
    lo_best = 0.0
    converged = False
    for it in range(max_iter):
        y = x + B @ x
        r = y / x
        hi = float(r.max())
        lo_best = max(lo_best, float(r.min()))
        if hi_prev - hi <= tol * hi:
            converged = True
            log.debug("spectral radius converged after %d iterations", it + 1)
            break
        hi_prev = hi
        x = y / y.sum()
        if x.min() <= 0.0:
            # a subdominant block underflowed; ratios are exhausted
            break

    rho = max(hi - 1.0, 0.0)
    threshold = 1.0 - eps_stab
    if converged:
        stable = rho < threshold
        boundary = (not stable) and abs(rho - 1.0) <= eps_stab
        return StabilityResult(stable, rho, True, boundary)

    # Stopped early: the upper estimate still never understates the radius,
    # and the best lower ratio bounds it from below.  Decide soundly when
    # either bound clears the threshold; otherwise declare near-boundary.
    rho_lo = max(lo_best - 1.0, 0.0)
    if rho < threshold:
        return StabilityResult(True, rho, False, False)
    if rho_lo >= threshold:
        return StabilityResult(False, rho, False, False)
    log.warning("spectral-radius iteration stopped near the boundary")
    return StabilityResult(False, rho, False, True)


def _require_stable(net: Network, eps_stab: float) -> StabilityResult:
    st = stability(net, eps_stab=eps_stab)
    if not st.stable:
        raise UnstableNetworkError(st.spectral_radius, st.boundary_warning)
    return st


def _lu(net: Network):
    return scipy.linalg.lu_factor(model.system_matrix(net))


def _solve_ones(lu) -> np.ndarray:
    n = lu[0].shape[0]
    return scipy.linalg.lu_solve(lu, np.ones(n))


def _solve_unit(lu, idx0: int) -> np.ndarray:
    """Column idx0 (0-based) of (A - M)^{-1}, via one unit-vector solve."""
    n = lu[0].shape[0]
    e = np.zeros(n)
    e[idx0] = 1.0
    return scipy.linalg.lu_solve(lu, e)


def _argmax_nodes(u: np.ndarray, gamma: float) -> tuple[NodeId, ...]:
    tie = gamma * (1.0 - ARGMAX_RTOL)
    return tuple(int(i) + 1 for i in np.nonzero(u >= tie)[0])


def _certify_u(x_mat: np.ndarray, lu, u: np.ndarray) -> np.ndarray:
    """Refine the solved vector until (A - M) u >= 1 holds row by row under
    the exact certificate comparison.  Rounding can leave solved rows a few
    ulps short of one; each pass pushes the deficient rows up through the
    (entrywise nonnegative) inverse, perturbing u far below every reported
    tolerance."""
    eps = np.finfo(float).eps
    for attempt in range(60):
        r = x_mat @ u
        if np.all(r >= 1.0):
            return u
        pad = (2.0**attempt) * eps * (1.0 + np.abs(r))
        deficit = np.maximum(0.0, 1.0 - r) + pad
        u = u + scipy.linalg.lu_solve(lu, deficit)
    raise ArithmeticError("failed to certify the solved robustness vector")


def robustness_vector(net: Network, *, eps_stab: float = EPS_STAB) -> RobustnessReport:
    """Solve (A - M) u = 1 (LU with partial pivoting, no explicit inverse)
    and report the minimal amplification level and its attaining nodes.

    The returned vector is refined so that it passes the exact certificate
    check at its own level.  Raises UnstableNetworkError when no finite
    level exists.
    """
    st = _require_stable(net, eps_stab)
    lu = _lu(net)
    u = _certify_u(model.system_matrix(net), lu, _solve_ones(lu))
    if not np.all(u > 0.0):
        raise UnstableNetworkError(st.spectral_radius, boundary=True)
    gamma = float(u.max())
    u.setflags(write=False)
    return RobustnessReport(
        stable=True,
        spectral_radius=st.spectral_radius,
        u=u,
        gamma_min=gamma,
        argmax_nodes=_argmax_nodes(u, gamma),
        boundary_warning=st.boundary_warning,
    )


def analyze(net: Network, *, eps_stab: float = EPS_STAB) -> RobustnessReport:
    """Like :func:`robustness_vector`, but returns a stability-only report
    instead of raising when the network is unstable."""
    try:
        return robustness_vector(net, eps_stab=eps_stab)
    except UnstableNetworkError as err:
        return RobustnessReport(
            stable=False,
            spectral_radius=err.spectral_radius,
            boundary_warning=err.boundary,
        )


def check_certificate(net: Network, cert: Certificate) -> bool:
    """Exact certificate test: v > 0, (A - M) v >= 1 and v <= gamma * 1,
    all elementwise and non-strict with zero comparison tolerance."""
    model.require_valid(net)
    v = np.asarray(cert.v, dtype=float)
    if v.shape != (net.node_count,):
        raise ValueError(
            f"certificate has {v.size} entries, network has {net.node_count} nodes"
        )
    if not np.all(v > 0.0):
        return False
    residual = model.system_matrix(net) @ v
    return bool(np.all(residual >= 1.0) and np.all(v <= cert.gamma))


def is_gamma_robust(net: Network, gamma: float, *, eps_stab: float = EPS_STAB) -> bool:
    """True iff the network is stable and its minimal level is at most gamma
    (non-strict, with relative rounding slack)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    report = analyze(net, eps_stab=eps_stab)
    return report.stable and leq_rel(report.gamma_min, gamma)


def _tail_certificate(B: np.ndarray, max_iter: int = 10_000) -> tuple[float, float]:
    """A decay certificate for walk totals: a positive x and lambda < 1 with
    B x <= lambda x elementwise, so (B^k 1)_j <= lambda^k * max(x)/min(x).

    Runs the shifted power iteration just long enough for the largest
    component ratio to drop below one, then a few extra steps; stopping
    early keeps the witness spread (and hence the bound) tight."""
    n = B.shape[0]
    x = np.ones(n)
    lam = np.inf
    settled = 0
    for _ in range(max_iter):
        bx = B @ x
        lam = float((bx / x).max())
        if lam < 1.0:
            settled += 1
            if settled >= 10:
                break
        y = x + bx
        x = y / y.sum()
    if not lam < 1.0:
        return np.inf, np.inf
    return lam, float(x.max() / x.min())


def walk_sum_oracle(
    net: Network,
    target: NodeId,
    max_length: int,
    *,
    eps_stab: float = EPS_STAB,
) -> WalkSumResult:
    """Sum the weights of all directed walks of length 1..max_length that
    end at the target node, by iterated multiplication with M A^{-1}.

    Converges monotonically from below to a_target * u_target - 1; the
    reported tail bound certifies the distance to the limit.
    """
    model.require_valid(net)
    if not (1 <= target <= net.node_count):
        raise IndexError(f"node {target} out of range [1..{net.node_count}]")
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    st = _require_stable(net, eps_stab)

    B = _walk_matrix(net)
    x = np.ones(net.node_count)
    total = 0.0
    for _ in range(max_length):
        x = B @ x
        total += float(x[target - 1])

    if st.spectral_radius == 0.0 and max_length >= net.node_count - 1:
        # acyclic graphs have no walk longer than N - 1
        tail = 0.0
    else:
        lam, kappa = _tail_certificate(B)
        if np.isfinite(lam):
            tail = lam ** (max_length + 1) / (1.0 - lam) * kappa
        else:
            tail = float("inf")
    return WalkSumResult(target, max_length, total, tail, st.spectral_radius)


def _walk_csr(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """CSR adjacency in walk direction (tail j -> head i for edge (i, j)),
    heads sorted per tail for deterministic traversal."""
    succ = model.influence_successors(net)
    indptr = np.zeros(net.node_count + 1, dtype=np.int64)
    for j, lst in enumerate(succ):
        indptr[j + 1] = indptr[j] + len(lst)
    heads = np.fromiter(
        (i for lst in succ for i in lst), dtype=np.int64, count=int(indptr[-1])
    )
    return indptr, heads


def enumerate_simple_cycles(
    net: Network, *, cap: int = CYCLE_CAP
) -> tuple[tuple[NodeId, ...], ...]:
    """All simple cycles of the influence graph as 1-based node sequences in
    walk order, each rooted at its smallest node, sorted by length then
    lexicographically.  Raises CycleBudgetExceededError beyond the cap."""
    model.require_valid(net)
    indptr, heads = _walk_csr(net)
    raw, truncated = johnson_cycles(indptr, heads, net.node_count, cap)
    if truncated:
        raise CycleBudgetExceededError(cap)
    cycles = [tuple(int(v) + 1 for v in seq) for seq in raw]
    cycles.sort(key=lambda seq: (len(seq), seq))
    return tuple(cycles)


def cycle_weight(net: Network, nodes: tuple[NodeId, ...]) -> float:
    """Product of m/a factors along the cycle, each scaled by the tail
    node's self-feedback rate."""
    m = model.weighted_adjacency(net)
    a = model.a_vector(net)
    w = 1.0
    for pos, tail in enumerate(nodes):
        head = nodes[(pos + 1) % len(nodes)]
        w *= m[head - 1, tail - 1] / a[tail - 1]
    return w


def cycle_small_gain(
    net: Network,
    gamma: float,
    *,
    cap: int = CYCLE_CAP,
    eps_stab: float = EPS_STAB,
) -> CycleReport:
    """Necessary cycle condition at level gamma: every simple cycle of
    weight w must satisfy 1/(1 - w) <= a_i * gamma for each node i on it.

    An empty violation list is necessary but not sufficient for the level
    to be certified.  The report is complete and canonically ordered or the
    call fails; it is never silently truncated.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    _require_stable(net, eps_stab)
    a = model.a_vector(net)

    records = []
    violations = []
    for idx, nodes in enumerate(enumerate_simple_cycles(net, cap=cap)):
        w = float(cycle_weight(net, nodes))
        if w >= 1.0:
            # Unreachable for a stable network; guards a torn invariant.
            raise UnstableNetworkError(spectral_radius=w)
        bound = 1.0 / (1.0 - w)
        checks = []
        for node in nodes:
            limit = float(a[node - 1] * gamma)
            passes = bound <= limit
            checks.append(NodeCheck(node, limit, passes))
            if not passes:
                violations.append((idx, node))
        records.append(CycleRecord(nodes, w, bound, tuple(checks)))
    return CycleReport(gamma, tuple(records), tuple(violations))
