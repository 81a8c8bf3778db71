"""Per-node and network-wide queueing performance metrics.

All metrics are functions of a solved chain and the protocol operating
point: throughput, average buffer occupancy, queueing delay (Little's
law), frame loss probability (traffic conservation), queue efficiency,
and the RF need/utilization probabilities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ValidationError
from .markov import ChainSolution, state_index
from .protocol import CascadeResult

LOSS_NOISE_TOL = 1e-9


@dataclass(frozen=True)
class NodeMetrics:
    node_index: int
    throughput: float     # frames per step
    avg_buffer: float     # frames
    queue_delay: float    # time steps; inf when throughput is 0
    loss_prob: float      # frames per step
    efficiency: float     # throughput / omega


@dataclass(frozen=True)
class NetworkMetrics:
    per_node: tuple[NodeMetrics, ...]
    total_throughput: float
    rf_need_prob: float     # N_e
    rf_utilization: float   # U


def throughput(chain: ChainSolution) -> float:
    """Probability of successfully transmitting a frame in a step.

    Three disjoint contributions: an arrival served from an empty buffer,
    a stored head-of-queue frame entering service, and an RF transmission
    in progress delivering 1/Omega of a frame per step.
    """
    p = chain.params
    omr, b_size = p.omega_ratio, p.buffer_size
    s = chain.steady
    gain = p.p_fso + p.p_rf / omr
    th = p.omega * s[state_index(0, 0, omr)] * gain
    th += gain * sum(s[state_index(i, 0, omr)] for i in range(1, b_size + 1))
    th += sum(s[state_index(i, j, omr)]
              for i in range(1, b_size + 1) for j in range(1, omr)) / omr
    return th


def avg_buffer_size(chain: ChainSolution) -> float:
    """Mean number of frames stored in the transmit buffer."""
    p = chain.params
    return sum(i * chain.steady[state_index(i, j, p.omega_ratio)]
               for i in range(1, p.buffer_size + 1) for j in range(p.omega_ratio))


def queue_delay(avg_buffer: float, th: float) -> float:
    """Little's law delay Q_a / Th, infinite when the queue never drains."""
    if th <= 0.0:
        return math.inf
    return avg_buffer / th


def loss_prob(omega: float, th: float) -> float:
    """Frame loss rate omega - Th from traffic conservation, clamped at 0."""
    pl = omega - th
    if pl < -LOSS_NOISE_TOL:
        warnings.warn(f"throughput exceeds arrival rate by {-pl:.3e}; "
                      "clamping loss probability to 0", stacklevel=2)
    return max(0.0, pl)


def efficiency(omega: float, th: float) -> float:
    """Fraction of arriving frames that eventually depart, Th / omega."""
    if omega <= 0.0:
        raise ValidationError("efficiency requires omega > 0")
    return min(1.0, max(0.0, th / omega))


def rf_need_and_utilization(a: float, b: float, p: float, n_nodes: int) -> tuple[float, float]:
    """N_e = Pr[some FSO link fails] and U = (1-b) p N_e (RF link used)."""
    n_e = 1.0 - (1.0 - a) ** n_nodes
    return n_e, (1.0 - b) * p * n_e


def node_metrics(chain: ChainSolution, node_index: int) -> NodeMetrics:
    """All scalar metrics of one node."""
    om = chain.params.omega
    th = throughput(chain)
    qa = avg_buffer_size(chain)
    return NodeMetrics(
        node_index=node_index,
        throughput=th,
        avg_buffer=qa,
        queue_delay=queue_delay(qa, th),
        loss_prob=loss_prob(om, th),
        efficiency=efficiency(om, th) if om > 0.0 else 1.0,
    )


def network_metrics(cascade: CascadeResult, a: float, b: float) -> NetworkMetrics:
    """Aggregate the cascade into per-node and network-wide metrics."""
    per_node = tuple(node_metrics(ns.chain, ns.node) for ns in cascade.nodes)
    n_e, u = rf_need_and_utilization(a, b, cascade.p, len(cascade.nodes))
    return NetworkMetrics(
        per_node=per_node,
        total_throughput=sum(m.throughput for m in per_node),
        rf_need_prob=n_e,
        rf_utilization=u,
    )
