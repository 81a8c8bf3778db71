"""Performance-analysis toolkit for multiuser hybrid FSO/RF networks.

Physical channel models feed per-node discrete-time Markov chains whose
steady states yield throughput, buffer, delay, loss, efficiency and RF
utilization metrics under equal-priority or p-persistence backup-link
arbitration, with seeded Monte-Carlo cross-validation.
"""

__version__ = "0.1.0"

from .channel import (FsoParams, LinkState, RfParams, ScintillationParams,
                      evaluate_link_state, fso_avg_snr, fso_outage_prob,
                      rf_avg_snr, rf_outage_prob, scintillation,
                      switching_threshold)
from .errors import FsorfError, NumericError, ValidationError
from .markov import (ChainParams, ChainSolution, TransitionProbs, build_matrix,
                     solve_chain, state_index, state_of, steady_state,
                     transition_probs)
from .metrics import (NetworkMetrics, NodeMetrics, avg_buffer_size, efficiency,
                      loss_prob, network_metrics, node_metrics, queue_delay,
                      rf_need_and_utilization, throughput)
from .optimizer import OptimizationResult, optimize_p, total_throughput
from .protocol import (CascadeResult, NodeSolution, ProtocolConfig, ProtocolMode,
                       cascade_solve, equal_priority_prf, rf_service_prob_y)
from .simulator import (SimConfig, SimStats, occupancy_tv_distance,
                        simulate_chain, simulate_network)

__all__ = [
    "FsoParams", "RfParams", "ScintillationParams", "LinkState",
    "switching_threshold", "scintillation", "fso_avg_snr", "rf_avg_snr",
    "fso_outage_prob", "rf_outage_prob", "evaluate_link_state",
    "ChainParams", "TransitionProbs", "ChainSolution", "transition_probs",
    "build_matrix", "steady_state", "solve_chain", "state_index", "state_of",
    "ProtocolMode", "ProtocolConfig", "NodeSolution", "CascadeResult",
    "equal_priority_prf", "rf_service_prob_y", "cascade_solve",
    "NodeMetrics", "NetworkMetrics", "throughput", "avg_buffer_size",
    "queue_delay", "loss_prob", "efficiency", "rf_need_and_utilization",
    "node_metrics", "network_metrics",
    "OptimizationResult", "total_throughput", "optimize_p",
    "SimConfig", "SimStats", "simulate_chain", "simulate_network",
    "occupancy_tv_distance",
    "FsorfError", "ValidationError", "NumericError",
]
