"""RF backup-link servicing protocols.

Two arbitration policies for the common backup RF link: equal priority
(uniform sharing among nodes with failed FSO links) and non-equal priority
with p-persistence (fixed ordering, the best-ranked contender transmits
with probability p). The persistence cascade couples the per-node chains
strictly downward: node J sees the RF link only through the probabilities
x_k = 1 - y_k of nodes k < J.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import FsorfError, ValidationError
from .markov import ChainParams, ChainSolution, solve_chain, state_index

P_MIN = 0.001


class ProtocolMode(enum.Enum):
    EQUAL_PRIORITY = "equal-priority"
    P_PERSISTENCE = "p-persistence"


@dataclass(frozen=True)
class ProtocolConfig:
    mode: ProtocolMode
    n_nodes: int
    p: float = 1.0   # persistence probability, used only in P_PERSISTENCE mode

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValidationError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if self.mode is ProtocolMode.P_PERSISTENCE and not P_MIN <= self.p <= 1.0:
            raise ValidationError(f"persistence p must be in [{P_MIN}, 1], got {self.p}")


@dataclass(frozen=True)
class NodeSolution:
    """Cascade output for one node."""

    node: int            # 1-based priority order
    p_rf: float          # P_RF^(J)
    chain: ChainSolution
    y: float             # Pr[central node uses RF for this node in a step]
    x: float             # 1 - y


@dataclass(frozen=True)
class CascadeResult:
    mode: ProtocolMode
    p: float
    nodes: tuple[NodeSolution, ...]


def equal_priority_prf(a: float, b: float, n_nodes: int) -> float:
    """RF service probability under equal priority: ((1-b)/N) [1 - (1-a)^N]."""
    _check_prob("a", a)
    _check_prob("b", b)
    if n_nodes < 1:
        raise ValidationError(f"n_nodes must be >= 1, got {n_nodes}")
    return ((1.0 - b) / n_nodes) * (1.0 - (1.0 - a) ** n_nodes)


def rf_service_prob_y(chain: ChainSolution, omega: float, a: float, b: float,
                      p: float) -> float:
    """Probability y that the node consumes the RF link in a given step.

    y = s_00 w a(1-b)p + a(1-b)p sum_i s_(i,0) + sum_(i,j>=1) s_(i,j):
    an empty-buffer arrival leaving over RF, a stored head-of-queue frame
    starting RF service, or an RF transmission already in progress.
    """
    pars = chain.params
    omr, b_size = pars.omega_ratio, pars.buffer_size
    c = a * (1.0 - b) * p
    s = chain.steady
    y = s[state_index(0, 0, omr)] * omega * c
    y += c * sum(s[state_index(i, 0, omr)] for i in range(1, b_size + 1))
    y += sum(s[state_index(i, j, omr)]
             for i in range(1, b_size + 1) for j in range(1, omr))
    return min(1.0, max(0.0, y))


def cascade_solve(a: float, b: float, cfg: ProtocolConfig, omega: float,
                  buffer_size: int, omega_ratio: int) -> CascadeResult:
    """Solve all N node chains under the configured protocol.

    P-persistence: a single forward pass, P_RF^(J) = a(1-b)p prod_{k<J} x_k
    with x_0 = 1; each x_J comes from the already-solved chain J. Equal
    priority: every node uses the same closed-form P_RF and an identical chain.
    """
    _check_prob("a", a)
    _check_prob("b", b)
    p_fso = 1.0 - a
    nodes = []
    if cfg.mode is ProtocolMode.EQUAL_PRIORITY:
        p_rf = equal_priority_prf(a, b, cfg.n_nodes)
        chain = _solve_node(1, ChainParams(omega, p_fso, p_rf, buffer_size, omega_ratio))
        for j in range(1, cfg.n_nodes + 1):
            y = rf_service_prob_y(chain, omega, a, b, cfg.p)
            nodes.append(NodeSolution(node=j, p_rf=p_rf, chain=chain, y=y, x=1.0 - y))
    else:
        avail = 1.0  # prod_{k<J} x_k, with x_0 = 1
        for j in range(1, cfg.n_nodes + 1):
            p_rf = a * (1.0 - b) * cfg.p * avail
            chain = _solve_node(j, ChainParams(omega, p_fso, p_rf, buffer_size, omega_ratio))
            y = rf_service_prob_y(chain, omega, a, b, cfg.p)
            nodes.append(NodeSolution(node=j, p_rf=p_rf, chain=chain, y=y, x=1.0 - y))
            avail *= 1.0 - y
    return CascadeResult(mode=cfg.mode, p=cfg.p, nodes=tuple(nodes))


def _solve_node(node: int, params: ChainParams) -> ChainSolution:
    try:
        return solve_chain(params)
    except FsorfError as exc:
        raise type(exc)(f"node {node}: {exc}") from exc


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must be in [0,1], got {value}")
