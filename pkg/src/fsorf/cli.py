"""Command-line interface: config ingestion, dispatch, sweeps, CSV emission.

Commands: ``channel`` (link-state summary), ``solve`` (per-node metrics at
the configured point), ``sweep`` (one CSV row per sweep point per protocol
per node), ``optimize-p`` (golden-section persistence optimization) and
``simulate`` (joint Monte-Carlo run with empirical columns).

CSV output is schema-stable: fixed column order, header row, ``{:.<p>g}``
formatting with 12 significant digits by default, rows ordered by sweep
index, then protocol index, then node index. Exit codes: 0 success,
1 validation error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import __version__
from .channel import linear_to_db
from .config import RunConfig, load_config
from .errors import NumericError, ValidationError
from .markov import ChainParams
from .metrics import network_metrics
from .optimizer import optimize_p
from .protocol import ProtocolConfig, ProtocolMode, cascade_solve
from .simulator import SimConfig, simulate_chain, simulate_network

ANALYTIC_COLUMNS = [
    "omega", "a", "b", "gamma_T_dB", "N", "B", "Omega", "protocol", "p",
    "node", "p_rf", "Th", "Qa", "Tq", "PL", "phi", "Th_total", "Ne", "U",
]
EMPIRICAL_COLUMNS = [
    "sim_Th", "sim_PL", "sim_Qa", "sim_Tq", "sim_rf_busy", "sim_rf_grants",
    "seed", "steps", "warmup",
]
CHANNEL_COLUMNS = [
    "a", "b", "gamma_T", "gamma_T_dB", "avg_snr_fso", "avg_snr_fso_dB",
    "avg_snr_rf", "avg_snr_rf_dB",
]
OPTIMIZE_COLUMNS = [
    "omega", "a", "b", "N", "B", "Omega", "p_star", "th_total_at_star",
    "iterations", "bracket_width", "grid_fallback",
]


def _fmt(value, precision: int) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format(value, f".{precision}g")
    return str(value)


def _write_csv(path: str | None, header: list[str], rows: list[list], precision: int) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v, precision) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


class _Point:
    """One evaluated parameter point (a single sweep value, or the base config)."""

    def __init__(self, cfg: RunConfig, var: str | None, value: float | None,
                 base_link=None):
        net = cfg.network
        self.omega = net.omega
        self.n_nodes = net.n_nodes
        self.buffer_size = net.buffer_size
        self.omega_ratio = net.omega_ratio
        self.protocols = list(net.protocols)
        channel = cfg.channel
        if var == "omega":
            self.omega = float(value)
        elif var == "omega_ratio":
            self.omega_ratio = int(value)
        elif var == "n_nodes":
            self.n_nodes = int(value)
            self.protocols = [replace(p, n_nodes=self.n_nodes) for p in self.protocols]
        elif var == "p":
            self.protocols = [
                replace(p, p=float(value)) if p.mode is ProtocolMode.P_PERSISTENCE else p
                for p in self.protocols]
        elif var == "a":
            channel = replace(channel, a=float(value))
        elif var == "b":
            channel = replace(channel, b=float(value))
        self.link = base_link if base_link is not None and var not in ("a", "b") \
            else channel.link_state()


def _analytic_rows(point: _Point, precision_unused=None) -> list[list]:
    link = point.link
    gamma_db = linear_to_db(link.gamma_T) if link.gamma_T > 0 else math.nan
    rows = []
    for proto in point.protocols:
        cascade = cascade_solve(link.a, link.b, proto, point.omega,
                                point.buffer_size, point.omega_ratio)
        net = network_metrics(cascade, link.a, link.b)
        for ns, m in zip(cascade.nodes, net.per_node):
            rows.append([
                point.omega, link.a, link.b, gamma_db, point.n_nodes,
                point.buffer_size, point.omega_ratio, proto.mode.value, proto.p,
                m.node_index, ns.p_rf, m.throughput, m.avg_buffer, m.queue_delay,
                m.loss_prob, m.efficiency, net.total_throughput,
                net.rf_need_prob, net.rf_utilization,
            ])
    return rows


def _points(cfg: RunConfig) -> list[_Point]:
    if cfg.sweep_var is None:
        return [_Point(cfg, None, None)]
    base_link = cfg.channel.link_state() if cfg.sweep_var not in ("a", "b") else None
    return [_Point(cfg, cfg.sweep_var, v, base_link) for v in cfg.sweep_values]


def cmd_channel(cfg: RunConfig, out: str | None, precision: int) -> None:
    link = cfg.channel.link_state()
    print(f"a (FSO poor)      = {link.a:.6f}")
    print(f"b (RF poor)       = {link.b:.6f}")
    print(f"gamma_T           = {link.gamma_T:.6f} ({linear_to_db(link.gamma_T):.4f} dB)")
    for name, snr in (("avg SNR FSO", link.avg_snr_fso), ("avg SNR RF", link.avg_snr_rf)):
        if math.isnan(snr):
            print(f"{name:<17} = n/a (direct channel override)")
        else:
            print(f"{name:<17} = {snr:.6g} ({linear_to_db(snr):.4f} dB)")
    row = [link.a, link.b, link.gamma_T, linear_to_db(link.gamma_T),
           link.avg_snr_fso,
           linear_to_db(link.avg_snr_fso) if not math.isnan(link.avg_snr_fso) else math.nan,
           link.avg_snr_rf,
           linear_to_db(link.avg_snr_rf) if not math.isnan(link.avg_snr_rf) else math.nan]
    if out:
        _write_csv(out, CHANNEL_COLUMNS, [row], precision)


def cmd_solve(cfg: RunConfig, out: str | None, precision: int, threads: int) -> None:
    # the configured scalar point only; sweep declarations belong to `sweep`
    rows = _analytic_rows(_Point(cfg, None, None))
    _print_metric_table(rows)
    if out:
        _write_csv(out, ANALYTIC_COLUMNS, rows, precision)


def cmd_sweep(cfg: RunConfig, out: str | None, precision: int, threads: int) -> None:
    if cfg.sweep_var is None:
        raise ValidationError("the sweep command needs a sweep declaration in the config")
    rows = _collect_rows(cfg, threads)
    _write_csv(out, ANALYTIC_COLUMNS, rows, precision)


def _collect_rows(cfg: RunConfig, threads: int) -> list[list]:
    points = _points(cfg)
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_analytic_rows, points))
    else:
        chunks = [_analytic_rows(pt) for pt in points]
    return [row for chunk in chunks for row in chunk]


def _print_metric_table(rows: list[list]) -> None:
    head = ["protocol", "p", "node", "Th", "Qa", "Tq", "PL", "phi"]
    sel = [7, 8, 9, 11, 12, 13, 14, 15]
    print("  ".join(f"{h:>12}" for h in head))
    for row in rows:
        cells = []
        for idx in sel:
            v = row[idx]
            cells.append(f"{v:>12}" if isinstance(v, (str, int)) else f"{v:>12.6g}")
        print("  ".join(cells))


def cmd_optimize(cfg: RunConfig, out: str | None, precision: int) -> None:
    link = cfg.channel.link_state()
    net = cfg.network
    result = optimize_p(link.a, link.b, net.omega, net.buffer_size,
                        net.omega_ratio, net.n_nodes)
    print(f"p*            = {result.p_star:.6f}")
    print(f"Th_total(p*)  = {result.th_total_at_star:.9f}")
    print(f"iterations    = {result.iterations}")
    print(f"bracket width = {result.bracket_width:.3e}")
    if result.grid_fallback:
        print("note: unimodality pre-scan disagreed; result from fine grid scan")
    if out:
        row = [net.omega, link.a, link.b, net.n_nodes, net.buffer_size,
               net.omega_ratio, result.p_star, result.th_total_at_star,
               result.iterations, result.bracket_width, result.grid_fallback]
        _write_csv(out, OPTIMIZE_COLUMNS, [row], precision)


def cmd_simulate(cfg: RunConfig, out: str | None, precision: int,
                 seed_override: int | None) -> None:
    if cfg.simulation is None:
        raise ValidationError("the simulate command needs a [simulation] section")
    sim = cfg.simulation
    if seed_override is not None:
        sim = replace(sim, seed=seed_override)
    rows = []
    for pt in _points(cfg):
        analytic = _analytic_rows(pt)
        k = 0
        for proto in pt.protocols:
            if sim.scope == "chain":
                stats_rows = _simulate_chain_rows(pt, proto, sim)
            else:
                stats = simulate_network(pt.link.a, pt.link.b, proto, pt.omega,
                                         pt.buffer_size, pt.omega_ratio, sim)
                stats_rows = _stats_to_rows(stats, pt.n_nodes, sim)
            for node_idx in range(len(stats_rows)):
                rows.append(analytic[k] + stats_rows[node_idx])
                k += 1
    _write_csv(out, ANALYTIC_COLUMNS + EMPIRICAL_COLUMNS, rows, precision)


def _stats_to_rows(stats, n_nodes: int, sim: SimConfig) -> list[list]:
    rows = []
    for j in range(n_nodes):
        th = stats.delivered_frames[j] / stats.steps_measured
        pl = stats.lost_frames[j] / stats.steps_measured
        rows.append([
            th, pl, float(stats.time_avg_buffer[j]), float(stats.mean_tagged_delay[j]),
            stats.rf_busy_fraction, stats.rf_grant_events,
            sim.seed, sim.steps, sim.warmup,
        ])
    return rows


def _simulate_chain_rows(pt: _Point, proto: ProtocolConfig, sim: SimConfig) -> list[list]:
    """Chain-level scope: per-node single-chain runs with the cascade's P_RF."""
    cascade = cascade_solve(pt.link.a, pt.link.b, proto, pt.omega,
                            pt.buffer_size, pt.omega_ratio)
    rows = []
    for ns in cascade.nodes:
        params = ChainParams(pt.omega, 1.0 - pt.link.a, ns.p_rf,
                             pt.buffer_size, pt.omega_ratio)
        stats = simulate_chain(params, sim)
        rows.append([
            stats.delivered_frames[0] / stats.steps_measured,
            stats.lost_frames[0] / stats.steps_measured,
            float(stats.time_avg_buffer[0]), float(stats.mean_tagged_delay[0]),
            stats.rf_busy_fraction, stats.rf_grant_events,
            sim.seed, sim.steps, sim.warmup,
        ])
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--out", default=None, help="CSV output path")
    common.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    common.add_argument("--threads", type=int, default=1, help="parallel sweep evaluation")

    parser = argparse.ArgumentParser(
        prog="fsorf",
        description="Multiuser hybrid FSO/RF network performance analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("channel", parents=[common], help="compute link outage probabilities")
    sub.add_parser("solve", parents=[common], help="per-node metrics at the configured point")
    sub.add_parser("sweep", parents=[common], help="iterate the declared sweep variable")
    sub.add_parser("optimize-p", parents=[common], help="golden-section search for p*")
    sub.add_parser("simulate", parents=[common], help="joint Monte-Carlo simulation")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        precision = cfg.precision
        out = args.out or cfg.csv_path
        if args.command == "channel":
            cmd_channel(cfg, out, precision)
        elif args.command == "solve":
            cmd_solve(cfg, out, precision, args.threads)
        elif args.command == "sweep":
            cmd_sweep(cfg, out, precision, args.threads)
        elif args.command == "optimize-p":
            cmd_optimize(cfg, out, precision)
        elif args.command == "simulate":
            cmd_simulate(cfg, out, precision, args.seed)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
