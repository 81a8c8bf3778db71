"""Persistence-probability optimization.

Maximizes the aggregated throughput over p in [0.001, 1] by golden-section
search. The objective is assumed unimodal; a coarse pre-scan guards that
assumption and a fine grid scan takes over when the two disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .metrics import throughput
from .protocol import P_MIN, ProtocolConfig, ProtocolMode, cascade_solve

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0   # 1/phi ~ 0.618
PRESCAN_POINTS = 32
FALLBACK_GRID_POINTS = 1000


@dataclass(frozen=True)
class OptimizationResult:
    p_star: float
    th_total_at_star: float
    iterations: int
    bracket_width: float
    grid_fallback: bool = False   # set when the unimodality guard tripped


def total_throughput(a: float, b: float, omega: float, buffer_size: int,
                     omega_ratio: int, n_nodes: int, p: float) -> float:
    """Network throughput sum over all nodes under p-persistence."""
    cfg = ProtocolConfig(mode=ProtocolMode.P_PERSISTENCE, n_nodes=n_nodes, p=p)
    cascade = cascade_solve(a, b, cfg, omega, buffer_size, omega_ratio)
    return sum(throughput(ns.chain) for ns in cascade.nodes)


def optimize_p(a: float, b: float, omega: float, buffer_size: int,
               omega_ratio: int, n_nodes: int, tol: float = 1e-3) -> OptimizationResult:
    """Golden-section search for the throughput-maximizing persistence p*.

    Searches [0.001, 1]; returns the bracket midpoint once the width drops
    below `tol`. A 32-point pre-scan cross-checks unimodality: if its argmax
    falls outside the final bracket (plus one pre-scan cell), the result is
    recomputed by a 1000-point grid scan and flagged.
    """
    if tol <= 0.0:
        raise ValidationError(f"tol must be > 0, got {tol}")

    def objective(p: float) -> float:
        return total_throughput(a, b, omega, buffer_size, omega_ratio, n_nodes, p)

    lo, hi = P_MIN, 1.0
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    prescan_values = [objective(p) for p in grid]
    prescan_best = float(grid[int(np.argmax(prescan_values))])
    cell = float(grid[1] - grid[0])

    # golden-section maximization
    a_br, b_br = lo, hi
    c = b_br - INV_PHI * (b_br - a_br)
    d = a_br + INV_PHI * (b_br - a_br)
    fc, fd = objective(c), objective(d)
    iterations = 0
    while b_br - a_br > tol:
        if fc >= fd:
            b_br, d, fd = d, c, fc
            c = b_br - INV_PHI * (b_br - a_br)
            fc = objective(c)
        else:
            a_br, c, fc = c, d, fd
            d = a_br + INV_PHI * (b_br - a_br)
            fd = objective(d)
        iterations += 1

    p_star = 0.5 * (a_br + b_br)
    width = b_br - a_br

    if not (a_br - cell <= prescan_best <= b_br + cell):
        # pre-scan disagrees: the objective is probably not unimodal here
        fine = np.linspace(lo, hi, FALLBACK_GRID_POINTS)
        values = [objective(p) for p in fine]
        k = int(np.argmax(values))
        return OptimizationResult(
            p_star=float(fine[k]), th_total_at_star=float(values[k]),
            iterations=iterations, bracket_width=float(fine[1] - fine[0]),
            grid_fallback=True)

    return OptimizationResult(p_star=p_star, th_total_at_star=objective(p_star),
                              iterations=iterations, bracket_width=width)
