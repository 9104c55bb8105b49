"""Command-line surface: deterministic, machine-readable, exit-code driven.

Subcommands: analyze | check | apply | repair | cycles | walks | simulate |
sequence.  Bodies are JSON with all numerics as decimal strings (see
numfmt); "human" output rounds to 6 significant digits.  Identical inputs
and seeds produce byte-identical output.  Exit codes: 0 success/affirmative,
1 usage or data error (JSON error body on stderr), 2 unstable/destabilizing,
3 negative adjudication.  Set ROBUSTNET_LOG=debug|info|warning for
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import analysis, changes, model, simulation
from .errors import RobustnetError, UnstableNetworkError
from .numfmt import format_decimal, format_human, format_vector, parse_decimal

EPS_STAB_RANGE = (1e-15, 1e-3)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_body(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_json(path, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ValueError(f"{what}: malformed JSON ({err})") from err


def _load_network(path) -> model.Network:
    net = model.network_from_dict(_load_json(path, "network file"))
    model.require_valid(net)
    return net


def _load_certificate(path) -> analysis.Certificate:
    d = _load_json(path, "certificate file")
    if not isinstance(d, dict):
        raise ValueError("certificate file must be a JSON object")
    model._require_keys(d, {"v", "gamma"}, "certificate")
    if not isinstance(d["v"], list):
        raise ValueError("certificate: 'v' must be an array of decimal strings")
    v = [parse_decimal(s, "certificate.v[]") for s in d["v"]]
    return analysis.Certificate(np.array(v), parse_decimal(d["gamma"], "certificate.gamma"))


def _eps_stab(args) -> float:
    eps = args.eps_stab
    lo, hi = EPS_STAB_RANGE
    if not (lo <= eps <= hi):
        raise _UsageError(f"--eps-stab must lie in [{lo:g}, {hi:g}]")
    return eps


# ---------------------------------------------------------------------------
# Report bodies


def _analyze_dict(report: analysis.RobustnessReport) -> dict:
    body = {
        "stable": report.stable,
        "spectral_radius": format_decimal(report.spectral_radius),
    }
    if report.stable:
        body["u"] = format_vector(report.u)
        body["gamma"] = format_decimal(report.gamma_min)
        body["argmax"] = list(report.argmax_nodes)
    body["boundary_warning"] = report.boundary_warning
    return body


def _verdict_dict(v: changes.ChangeVerdict) -> dict:
    def vec(arr):
        return None if arr is None else format_vector(arr)

    repair = None
    if v.repair is not None:
        repair = {
            "node": v.repair.node,
            "a_old": format_decimal(v.repair.a_old),
            "a_new": format_decimal(v.repair.a_new),
        }
    return {
        "change": changes.change_to_dict(v.change),
        "scalable": v.scalable,
        "stable_after": v.stable_after,
        "gamma_before": format_decimal(v.gamma_before),
        "gamma_after": None if v.gamma_after is None else format_decimal(v.gamma_after),
        "u_before": vec(v.u_before),
        "u_after": vec(v.u_after),
        "performance_loss": vec(v.performance_loss),
        "head_to_argmax": v.head_to_argmax,
        "repair": repair,
    }


def _cycles_dict(report: analysis.CycleReport) -> dict:
    return {
        "gamma": format_decimal(report.gamma),
        "cycle_count": len(report.cycles),
        "cycles": [
            {
                "nodes": list(rec.nodes),
                "weight": format_decimal(rec.weight),
                "bound": format_decimal(rec.bound),
                "checks": [
                    {"node": c.node, "limit": format_decimal(c.limit), "passes": c.passes}
                    for c in rec.checks
                ],
            }
            for rec in report.cycles
        ],
        "violations": [[idx, node] for idx, node in report.violations],
    }


def _trajectory_dict(traj: simulation.Trajectory) -> dict:
    return {
        "method": traj.method,
        "step": format_decimal(traj.step),
        "t": format_vector(traj.t),
        "x": [format_vector(row) for row in traj.x],
        "d": [format_vector(row) for row in traj.d],
        "node_peaks": format_vector(traj.node_peaks),
        "peak": format_decimal(traj.peak),
    }


def _trajectory_csv(traj: simulation.Trajectory) -> str:
    n = traj.x.shape[1]
    header = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"d{i}" for i in range(1, n + 1)]
    lines = [",".join(header)]
    for k in range(len(traj.t)):
        row = [format_decimal(traj.t[k])]
        row += [format_decimal(v) for v in traj.x[k]]
        row += [format_decimal(v) for v in traj.d[k]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _witness_dict(rep: simulation.WitnessReport) -> dict:
    return {
        "gamma": format_decimal(rep.gamma),
        "amplitude": format_decimal(rep.amplitude),
        "limit": format_decimal(rep.limit),
        "max_ratio": format_decimal(rep.max_ratio),
        "trials": [
            {
                "trial": t.trial,
                "seed": list(t.seed),
                "peak": format_decimal(t.peak),
                "ratio": format_decimal(t.ratio),
            }
            for t in rep.trials
        ],
    }


def _sequence_dict(rep: changes.SequenceReport) -> dict:
    return {
        "gamma": format_decimal(rep.gamma),
        "steps": [
            {
                "index": s.index,
                "change": changes.change_to_dict(s.change),
                "scalable": s.verdict.scalable,
                "stable_after": s.verdict.stable_after,
                "gamma_after": None
                if s.verdict.gamma_after is None
                else format_decimal(s.verdict.gamma_after),
            }
            for s in rep.steps
        ],
        "halted_at": rep.halted_at,
        "final_gamma": None if rep.final_gamma is None else format_decimal(rep.final_gamma),
        "final_robust": rep.final_robust,
    }


def _human_lines(body, indent: str = "") -> list[str]:
    lines = []
    if isinstance(body, dict):
        for key, val in body.items():
            if isinstance(val, (dict, list)) and val and not _is_flat(val):
                lines.append(f"{indent}{key}:")
                lines.extend(_human_lines(val, indent + "  "))
            else:
                lines.append(f"{indent}{key}: {_human_scalar(val)}")
    elif isinstance(body, list):
        for item in body:
            if isinstance(item, (dict, list)):
                lines.append(f"{indent}-")
                lines.extend(_human_lines(item, indent + "  "))
            else:
                lines.append(f"{indent}- {_human_scalar(item)}")
    else:
        lines.append(f"{indent}{_human_scalar(body)}")
    return lines


def _is_flat(val) -> bool:
    return isinstance(val, list) and all(not isinstance(x, (dict, list)) for x in val)


def _human_scalar(val) -> str:
    if isinstance(val, str):
        try:
            return format_human(float(val))
        except ValueError:
            return val
    if isinstance(val, list):
        return " ".join(_human_scalar(x) for x in val)
    if val is None:
        return "-"
    if isinstance(val, bool):
        return "yes" if val else "no"
    return str(val)


def _render(body: dict, fmt: str) -> str:
    if fmt == "human":
        return "\n".join(_human_lines(body)) + "\n"
    return _json_body(body)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_analyze(args) -> int:
    net = _load_network(args.network)
    report = analysis.analyze(net, eps_stab=_eps_stab(args))
    _emit(_render(_analyze_dict(report), args.format), args.out)
    return 0 if report.stable else 2


def _cmd_check(args) -> int:
    net = _load_network(args.network)
    change = changes.change_from_dict(_load_json(args.change, "change file"))
    if isinstance(change, changes.RemoveNodeCascade):
        raise ValueError("cascading removals are adjudicated by the sequence command")
    v = changes.verdict(net, change, eps_stab=_eps_stab(args))
    body = _verdict_dict(v)

    decision = v.scalable
    if args.gamma is not None:
        level_ok = (
            v.stable_after
            and analysis.leq_rel(v.gamma_before, args.gamma)
            and analysis.leq_rel(v.gamma_after, args.gamma)
        )
        body["gamma_level"] = format_decimal(args.gamma)
        body["gamma_scalable"] = level_ok
        decision = level_ok
    if args.local_cert is not None and isinstance(change, changes.AddEdge):
        cert = _load_certificate(args.local_cert)
        body["local_check"] = changes.sufficient_local_check(net, change, cert)

    _emit(_render(body, args.format), args.out)
    if not v.stable_after:
        return 2
    return 0 if decision else 3


def _cmd_apply(args) -> int:
    net = _load_network(args.network)
    change = changes.change_from_dict(_load_json(args.change, "change file"))
    applied = changes.apply_change(net, change)
    if args.out:
        model.save_network(applied.network, args.out)
    body = {
        "network": model.network_to_dict(applied.network),
        "index_map": {str(k): v for k, v in sorted(applied.index_map.items())},
    }
    sys.stdout.write(_render(body, args.format))
    return 0


def _cmd_repair(args) -> int:
    net = _load_network(args.network)
    change = changes.change_from_dict(_load_json(args.change, "change file"))
    if not isinstance(change, changes.AddEdge):
        raise ValueError("repairs apply to edge additions only")
    cert = _load_certificate(args.local_cert) if args.local_cert else None
    repair = changes.propose_repair(net, change, cert, eps_stab=_eps_stab(args))
    body = {
        "node": repair.node,
        "a_old": format_decimal(repair.a_old),
        "a_new": format_decimal(repair.a_new),
    }
    _emit(_render(body, args.format), args.out)
    return 0


def _cmd_cycles(args) -> int:
    net = _load_network(args.network)
    gamma = args.gamma
    if gamma is None:
        gamma = analysis.robustness_vector(net, eps_stab=_eps_stab(args)).gamma_min
    report = analysis.cycle_small_gain(
        net, gamma, cap=args.cycle_cap, eps_stab=_eps_stab(args)
    )
    _emit(_render(_cycles_dict(report), args.format), args.out)
    return 0


def _cmd_walks(args) -> int:
    net = _load_network(args.network)
    res = analysis.walk_sum_oracle(
        net, args.target, args.max_len, eps_stab=_eps_stab(args)
    )
    body = {
        "target": res.target,
        "max_length": res.max_length,
        "walk_sum": format_decimal(res.total),
        "tail_bound": format_decimal(res.tail_bound),
        "spectral_radius": format_decimal(res.spectral_radius),
    }
    _emit(_render(body, args.format), args.out)
    return 0


def _parse_signal(spec: str, seed) -> simulation.DisturbanceSignal:
    if spec == "zero":
        return simulation.DisturbanceSignal.constant(0.0)
    kind, _, rest = spec.partition(":")
    if kind == "constant" and rest:
        vals = [parse_decimal(s, "--signal constant value") for s in rest.split(",")]
        return simulation.DisturbanceSignal.constant(vals if len(vals) > 1 else vals[0])
    if kind == "random" and rest:
        amp = parse_decimal(rest, "--signal random amplitude")
        return simulation.DisturbanceSignal.piecewise_random(amp, seed=seed)
    raise _UsageError(
        f"bad --signal {spec!r}: expected zero | constant:<v[,v,...]> | random:<amplitude>"
    )


def _cmd_simulate(args) -> int:
    net = _load_network(args.network)
    if args.trials is not None:
        if args.gamma is None:
            raise _UsageError("--trials requires --gamma")
        rep = simulation.witness_bound(
            net,
            args.gamma,
            args.trials,
            args.seed,
            horizon=args.horizon,
            step=args.step,
        )
        _emit(_render(_witness_dict(rep), args.format), args.out)
        return 0

    if args.horizon is None:
        raise _UsageError("--horizon is required for trajectory simulation")
    signal = _parse_signal(args.signal, args.seed)
    x0 = None
    if args.x0 is not None:
        x0 = [parse_decimal(s, "--x0 value") for s in args.x0.split(",")]
        x0 = x0 if len(x0) > 1 else x0[0]
    traj = simulation.simulate(
        net,
        signal,
        x0,
        horizon=args.horizon,
        step=args.step,
        method=args.method,
        record_stride=args.stride,
    )
    if args.format == "csv":
        _emit(_trajectory_csv(traj), args.out)
    else:
        _emit(_render(_trajectory_dict(traj), args.format), args.out)
    return 0


def _cmd_sequence(args) -> int:
    net = _load_network(args.network)
    seq = changes.changes_from_list(_load_json(args.changes, "changes file"))
    rep = changes.check_sequence(net, seq, args.gamma, eps_stab=_eps_stab(args))
    _emit(_render(_sequence_dict(rep), args.format), args.out)
    if rep.halted_at is not None:
        return 2
    return 0 if rep.final_robust else 3


# ---------------------------------------------------------------------------
# Wiring


def _add_common(p, formats=("json", "human")) -> None:
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--out", default=None, help="write the body to this file")
    p.add_argument("--eps-stab", type=float, default=analysis.EPS_STAB,
                   help="stability decision margin")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robustnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="stability, robustness vector, minimal level")
    p.add_argument("network")
    _add_common(p)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("check", help="adjudicate one structural change")
    p.add_argument("network")
    p.add_argument("change")
    p.add_argument("--gamma", type=float, default=None,
                   help="also adjudicate at this fixed level")
    p.add_argument("--local-cert", default=None,
                   help="certificate file for the row-local sufficient test")
    _add_common(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("apply", help="apply a change and emit the new network")
    p.add_argument("network")
    p.add_argument("change")
    _add_common(p)
    p.set_defaults(fn=_cmd_apply)

    p = sub.add_parser("repair", help="self-feedback repair for an edge addition")
    p.add_argument("network")
    p.add_argument("change")
    p.add_argument("--local-cert", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_repair)

    p = sub.add_parser("cycles", help="cycle small-gain report")
    p.add_argument("network")
    p.add_argument("--gamma", type=float, default=None,
                   help="level to check (default: the minimal level)")
    p.add_argument("--cycle-cap", type=int, default=analysis.CYCLE_CAP)
    _add_common(p)
    p.set_defaults(fn=_cmd_cycles)

    p = sub.add_parser("walks", help="truncated walk-weight sum with tail estimate")
    p.add_argument("network")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--max-len", type=int, default=50)
    _add_common(p)
    p.set_defaults(fn=_cmd_walks)

    p = sub.add_parser("simulate", help="integrate trajectories / witness a level")
    p.add_argument("network")
    p.add_argument("--signal", default="zero")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--method", choices=("rk4", "exact"), default="rk4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stride", type=int, default=1, help="record every k-th step")
    p.add_argument("--x0", default=None, help="initial state (comma separated)")
    p.add_argument("--trials", type=int, default=None,
                   help="witness mode: number of random trials (needs --gamma)")
    p.add_argument("--gamma", type=float, default=None)
    _add_common(p, formats=("json", "csv", "human"))
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sequence", help="adjudicate a script of changes")
    p.add_argument("network")
    p.add_argument("changes")
    p.add_argument("--gamma", type=float, default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_sequence)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("ROBUSTNET_LOG", "").upper()
    if level_name:
        level = getattr(logging, level_name, None)
        if isinstance(level, int):
            logging.basicConfig(stream=sys.stderr, level=level)


def _error_body(kind: str, message: str) -> None:
    sys.stderr.write(_json_body({"error": message, "kind": kind}))


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        _error_body("UsageError", str(err))
        return 1
    try:
        return args.fn(args)
    except _UsageError as err:
        _error_body("UsageError", str(err))
        return 1
    except UnstableNetworkError as err:
        _error_body(type(err).__name__, str(err))
        return 1
    except RobustnetError as err:
        _error_body(type(err).__name__, str(err))
        return 1
    except (ValueError, IndexError, OSError) as err:
        _error_body(type(err).__name__, str(err))
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
