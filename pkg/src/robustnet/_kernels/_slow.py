"""Pure NumPy/Python backend for the hot kernels.

Same call signatures and semantics as the compiled backend in ``_fast``:
fixed-step trajectory integration under piecewise-constant input, and
Johnson simple-cycle enumeration.  Selected at import when the compiled
extension is unavailable or ROBUSTNET_PURE is set.
"""

from __future__ import annotations

import numpy as np


def _record_count(total_steps: int, stride: int) -> int:
    n = total_steps // stride + 1
    if total_steps % stride:
        n += 1
    return n


def rk4_path(S, x0, seg_values, seg_steps, h, stride):
    """Integrate dx/dt = -S x + d with classic RK4 at fixed step h.

    d is constant within each segment; seg_values is (n_seg, N) and
    seg_steps the step count per segment.  Returns (samples, peaks, final,
    ok, steps_done): samples holds x at step 0, every stride-th step and the
    final step; peaks is max |x_i| over all steps including t=0.
    """
    S = np.asarray(S, dtype=float)
    x = np.array(x0, dtype=float)
    total = int(np.sum(seg_steps))
    samples = np.empty((_record_count(total, stride), len(x)))
    samples[0] = x
    peaks = np.abs(x)
    rec = 1
    k = 0
    for s in range(len(seg_steps)):
        d = np.asarray(seg_values[s], dtype=float)
        for _ in range(int(seg_steps[s])):
            k1 = d - S @ x
            k2 = d - S @ (x + (0.5 * h) * k1)
            k3 = d - S @ (x + (0.5 * h) * k2)
            k4 = d - S @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            k += 1
            if not np.isfinite(np.sum(x)):
                return samples[:rec], peaks, x, False, k
            np.maximum(peaks, np.abs(x), out=peaks)
            if k % stride == 0 or k == total:
                samples[rec] = x
                rec += 1
    return samples, peaks, x, True, total


def exact_path(E, F, x0, seg_values, seg_steps, stride):
    """Step the exact discrete map x <- E x + F d on the same grid contract
    as :func:`rk4_path`.  E, F are precomputed for one step of size h."""
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    x = np.array(x0, dtype=float)
    total = int(np.sum(seg_steps))
    samples = np.empty((_record_count(total, stride), len(x)))
    samples[0] = x
    peaks = np.abs(x)
    rec = 1
    k = 0
    for s in range(len(seg_steps)):
        fd = F @ np.asarray(seg_values[s], dtype=float)
        for _ in range(int(seg_steps[s])):
            x = E @ x + fd
            k += 1
            if not np.isfinite(np.sum(x)):
                return samples[:rec], peaks, x, False, k
            np.maximum(peaks, np.abs(x), out=peaks)
            if k % stride == 0 or k == total:
                samples[rec] = x
                rec += 1
    return samples, peaks, x, True, total


# ---------------------------------------------------------------------------
# Simple-cycle enumeration (Johnson's algorithm)


def _strongly_connected(indptr, heads, nodes):
    """Tarjan SCC restricted to `nodes` (iterative).  Returns a list of
    components, each a list of 0-based node ids."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    components = []
    counter = [0]
    allowed = set(nodes)

    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack.add(v)
            advanced = False
            for off in range(indptr[v] + pi, indptr[v + 1]):
                w = heads[off]
                if w not in allowed:
                    continue
                if w not in index:
                    work[-1] = (v, off - indptr[v] + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def johnson_cycles(indptr, heads, n, cap):
    """Enumerate simple cycles of the digraph given in CSR form.

    Each cycle is a tuple of 0-based nodes in walk order, rooted at its
    smallest node.  Stops and reports truncated=True as soon as more than
    `cap` cycles have been produced.
    """
    indptr = [int(v) for v in indptr]
    heads = [int(v) for v in heads]
    cycles: list[tuple[int, ...]] = []
    truncated = False

    remaining = list(range(n))
    while remaining and not truncated:
        comps = [c for c in _strongly_connected(indptr, heads, remaining) if len(c) > 1]
        if not comps:
            break
        comp = min(comps, key=min)
        scc = set(comp)
        s = min(comp)

        blocked = {v: False for v in comp}
        blist = {v: set() for v in comp}
        path = [s]
        blocked[s] = True
        # frame: [node, next-offset, found-cycle-flag]
        frames = [[s, indptr[s], False]]
        while frames:
            v, off, found = frames[-1]
            advanced = False
            while off < indptr[v + 1]:
                w = heads[off]
                off += 1
                if w not in scc:
                    continue
                if w == s:
                    cycles.append(tuple(path))
                    found = True
                    if len(cycles) > cap:
                        truncated = True
                        break
                elif not blocked[w]:
                    frames[-1] = [v, off, found]
                    path.append(w)
                    blocked[w] = True
                    frames.append([w, indptr[w], False])
                    advanced = True
                    break
            if truncated:
                break
            if advanced:
                continue
            # node fully explored
            if found:
                unblock = [v]
                while unblock:
                    u = unblock.pop()
                    if blocked.get(u):
                        blocked[u] = False
                        unblock.extend(blist[u])
                        blist[u].clear()
            else:
                for off2 in range(indptr[v], indptr[v + 1]):
                    w = heads[off2]
                    if w in scc:
                        blist[w].add(v)
            path.pop()
            frames.pop()
            if frames:
                frames[-1][2] = frames[-1][2] or found
        remaining = [v for v in remaining if v != s]

    if truncated:
        cycles = cycles[: cap + 1]
    return cycles, truncated
