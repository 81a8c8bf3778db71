"""Seeded Monte-Carlo simulators.

Two levels of validation:

* chain-level: steps a single node's state according to the exact
  transition-matrix columns (each column decomposed into its constituent
  arrival/service events so frame flows can be counted), validating the
  steady-state solver;
* joint-system: simulates all N buffers contending for the one backup RF
  channel, validating the decoupled per-node analytics end to end.

PRNG: numpy PCG64 via ``np.random.default_rng`` (seedable, 64-bit, stable
across platforms). The joint simulator splits streams by seed offset:
node J draws from ``default_rng(seed + J)`` (J = 1..N) and channel-level
draws come from ``default_rng(seed)``. Channel draws are consumed every
step whether or not there is contention, so streams stay aligned for any
traffic pattern. The chain-level simulator uses the single stream
``default_rng(seed)``, two uniforms per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ValidationError
from .markov import ChainParams, _effective_params, n_states, state_index
from .protocol import ProtocolConfig, ProtocolMode

CHUNK_STEPS = 1 << 16

# event flags for chain-level atoms
_ARR = 1       # an arrival occurred
_PUSH = 2      # the arrival enters the buffer
_POP = 4       # the head frame departs
_DIRECT = 8    # the arrival departs in its own arrival step (zero delay)
_LOST = 16     # the arrival is dropped
_RFBUSY = 32   # the RF channel carries a chunk this step
_RFSTART = 64  # an RF transmission starts this step


@dataclass(frozen=True)
class SimConfig:
    """Run length, warmup cutoff and seeding for one simulation."""

    seed: int
    steps: int
    warmup: int = 0
    scope: str = "joint"      # "joint" or "chain"
    chain_node: int = 1       # node index when scope == "chain"

    def __post_init__(self):
        if self.steps <= self.warmup or self.warmup < 0:
            raise ValidationError(
                f"need steps > warmup >= 0, got steps={self.steps} warmup={self.warmup}")
        if self.scope not in ("joint", "chain"):
            raise ValidationError(f"scope must be 'joint' or 'chain', got {self.scope!r}")


@dataclass(frozen=True)
class SimStats:
    """Empirical counters; per-node arrays are indexed 0..N-1 for nodes 1..N."""

    config: SimConfig
    steps_measured: int
    arrivals: np.ndarray
    delivered_frames: np.ndarray
    lost_frames: np.ndarray
    time_avg_buffer: np.ndarray
    mean_tagged_delay: np.ndarray       # NaN where nothing was delivered
    buffer_at_start: np.ndarray         # occupancy when measurement began
    buffer_at_end: np.ndarray
    rf_busy_fraction: float
    rf_grant_events: int
    state_occupancy: np.ndarray | None = field(default=None)  # chain-level only

    def empirical_throughput(self) -> np.ndarray:
        return self.delivered_frames / self.steps_measured

    def empirical_loss(self) -> np.ndarray:
        return self.lost_frames / self.steps_measured


def occupancy_tv_distance(occupancy: np.ndarray, steady: np.ndarray) -> float:
    """Total-variation distance between an occupancy histogram and a distribution."""
    emp = occupancy / occupancy.sum()
    return 0.5 * float(np.abs(emp - steady).sum())


def _chain_atoms(params: ChainParams):
    """Decompose every transition-matrix column into event atoms.

    Returns (cum, nxt, flags, counts, frames_of_state); summing atom masses
    by target state reproduces the matrix column exactly.
    """
    eff = _effective_params(params)
    om, pf, pr = eff.omega, eff.p_fso, eff.p_rf
    b_size, omr = eff.buffer_size, eff.omega_ratio
    n = n_states(b_size, omr)
    idx = lambda i, j: state_index(i, j, omr)
    atoms: list[list[tuple[float, int, int]]] = [[] for _ in range(n)]

    ps = pf + pr
    atoms[idx(0, 0)] = [
        (1.0 - om, idx(0, 0), 0),
        (om * pf, idx(0, 0), _ARR | _DIRECT),
        (om * (1.0 - ps), idx(1, 0), _ARR | _PUSH),
    ]
    if omr >= 2:
        atoms[idx(0, 0)].append((om * pr, idx(1, 1), _ARR | _PUSH | _RFBUSY | _RFSTART))

    for i in range(1, b_size + 1):
        at_top = i == b_size
        lst = [
            ((1.0 - om) * (1.0 - ps), idx(i, 0), 0),
            (om * pf, idx(i, 0), _ARR | _POP | _PUSH),
            ((1.0 - om) * pf, idx(i - 1, 0), _POP),
        ]
        if at_top:
            lst.append((om * (1.0 - ps), idx(i, 0), _ARR | _LOST))
            if omr >= 2:
                lst.append(((1.0 - om) * pr, idx(i, 1), _RFBUSY | _RFSTART))
                lst.append((om * pr, idx(i, 1), _ARR | _LOST | _RFBUSY | _RFSTART))
        else:
            lst.append((om * (1.0 - ps), idx(i + 1, 0), _ARR | _PUSH))
            if omr >= 2:
                lst.append(((1.0 - om) * pr, idx(i, 1), _RFBUSY | _RFSTART))
                lst.append((om * pr, idx(i + 1, 1), _ARR | _PUSH | _RFBUSY | _RFSTART))
        atoms[idx(i, 0)] = lst

        for j in range(1, omr - 1):
            if at_top:
                atoms[idx(i, j)] = [
                    (1.0 - om, idx(i, j + 1), _RFBUSY),
                    (om, idx(i, j + 1), _ARR | _LOST | _RFBUSY),
                ]
            else:
                atoms[idx(i, j)] = [
                    (1.0 - om, idx(i, j + 1), _RFBUSY),
                    (om, idx(i + 1, j + 1), _ARR | _PUSH | _RFBUSY),
                ]
        if omr >= 2:
            atoms[idx(i, omr - 1)] = [
                (1.0 - om, idx(i - 1, 0), _POP | _RFBUSY),
                (om, idx(i, 0), _ARR | _POP | _PUSH | _RFBUSY),
            ]

    width = max(len(lst) for lst in atoms)
    cum = np.zeros((n, width))
    nxt = np.zeros((n, width), dtype=np.int64)
    flg = np.zeros((n, width), dtype=np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    for s, lst in enumerate(atoms):
        total = 0.0
        for k, (prob, target, flags) in enumerate(lst):
            total += prob
            cum[s, k] = total
            nxt[s, k] = target
            flg[s, k] = flags
        cnt[s] = len(lst)
        cum[s, len(lst) - 1] = 1.0  # kill roundoff in the last edge
    frames = np.array([0] + [(k - 1) // omr + 1 for k in range(1, n)], dtype=np.int64)
    return cum, nxt, flg, cnt, frames


@njit(cache=True)
def _chain_kernel(u, cum, nxt, flg, cnt, frames, fifo, state_vec, counters,
                  delay_sum, occupancy, t0, warmup):
    state = state_vec[0]
    head = state_vec[1]
    length = state_vec[2]
    cap = fifo.shape[0]
    for k in range(u.shape[0]):
        t = t0 + k
        uu = u[k]
        a = 0
        while uu > cum[state, a] and a < cnt[state] - 1:
            a += 1
        flags = flg[state, a]
        measure = t >= warmup
        if flags & _ARR and measure:
            counters[0] += 1
        if flags & _POP:
            ts = fifo[head]
            head = (head + 1) % cap
            length -= 1
            if measure:
                counters[1] += 1
                delay_sum[0] += t - ts
        if flags & _DIRECT and measure:
            counters[1] += 1
        if flags & _PUSH:
            fifo[(head + length) % cap] = t
            length += 1
        if measure:
            if flags & _LOST:
                counters[2] += 1
            if flags & _RFBUSY:
                counters[3] += 1
            if flags & _RFSTART:
                counters[4] += 1
        state = nxt[state, a]
        if measure:
            occupancy[state] += 1
            counters[5] += frames[state]
    state_vec[0] = state
    state_vec[1] = head
    state_vec[2] = length


def simulate_chain(chain_params: ChainParams, sim: SimConfig) -> SimStats:
    """Step one node's chain and collect occupancy and flow statistics.

    The empirical occupancy converges to the steady-state vector of
    ``build_matrix(chain_params)``; delivered/lost rates converge to the
    analytic throughput and loss probability.
    """
    cum, nxt, flg, cnt, frames = _chain_atoms(chain_params)
    eff = _effective_params(chain_params)
    n = n_states(eff.buffer_size, eff.omega_ratio)
    rng = np.random.default_rng(sim.seed)

    fifo = np.zeros(eff.buffer_size + 1, dtype=np.int64)
    state_vec = np.zeros(3, dtype=np.int64)
    counters = np.zeros(6, dtype=np.int64)  # arrivals, delivered, lost, busy, starts, bufsum
    delay_sum = np.zeros(1)
    occupancy = np.zeros(n, dtype=np.int64)

    buffer_at_start = 0
    done = 0
    while done < sim.steps:
        block = min(CHUNK_STEPS, sim.steps - done)
        u = rng.random(block)
        # snapshot occupancy at the measurement boundary
        if done == sim.warmup:
            buffer_at_start = int(state_vec[2])
        elif done < sim.warmup < done + block:
            # split the chunk at the boundary so the snapshot is exact
            pre = sim.warmup - done
            _chain_kernel(u[:pre], cum, nxt, flg, cnt, frames, fifo, state_vec,
                          counters, delay_sum, occupancy, done, sim.warmup)
            buffer_at_start = int(state_vec[2])
            _chain_kernel(u[pre:], cum, nxt, flg, cnt, frames, fifo, state_vec,
                          counters, delay_sum, occupancy, sim.warmup, sim.warmup)
            done += block
            continue
        _chain_kernel(u, cum, nxt, flg, cnt, frames, fifo, state_vec, counters,
                      delay_sum, occupancy, done, sim.warmup)
        done += block

    measured = sim.steps - sim.warmup
    delivered = counters[1]
    mean_delay = delay_sum[0] / delivered if delivered > 0 else np.nan
    return SimStats(
        config=sim,
        steps_measured=measured,
        arrivals=np.array([counters[0]]),
        delivered_frames=np.array([delivered]),
        lost_frames=np.array([counters[2]]),
        time_avg_buffer=np.array([counters[5] / measured]),
        mean_tagged_delay=np.array([mean_delay]),
        buffer_at_start=np.array([buffer_at_start]),
        buffer_at_end=np.array([int(state_vec[2])]),
        rf_busy_fraction=counters[3] / measured,
        rf_grant_events=int(counters[4]),
        state_occupancy=occupancy,
    )


@njit(cache=True)
def _joint_kernel(arrived, fso_bad, rf_u, grant_u, b, p, equal_mode, omega_ratio,
                  buf_cap, buf, fifo, fifo_head, rf_state, arrivals, delivered,
                  lost, delay_sum, occ_sum, global_cnt, buf_start, t0, warmup):
    n_nodes = buf.shape[0]
    cap = fifo.shape[1]
    for k in range(arrived.shape[0]):
        t = t0 + k
        if t == warmup:
            for j in range(n_nodes):
                buf_start[j] = buf[j]
        measure = t >= warmup

        # FSO service: a head frame, or a same-step arrival to an empty buffer
        for j in range(n_nodes):
            if arrived[k, j] and measure:
                arrivals[j] += 1
            if fso_bad[k, j] or rf_state[0] == j:
                continue
            if buf[j] >= 1:
                ts = fifo[j, fifo_head[j]]
                fifo_head[j] = (fifo_head[j] + 1) % cap
                buf[j] -= 1
                if measure:
                    delivered[j] += 1
                    delay_sum[j] += t - ts
            elif arrived[k, j]:
                arrived[k, j] = False  # consumed: delivered in its arrival step
                if measure:
                    delivered[j] += 1

        # RF arbitration among nodes whose FSO failed and that hold a frame
        if rf_state[0] < 0:
            n_cont = 0
            first = -1
            for j in range(n_nodes):
                if fso_bad[k, j] and (buf[j] >= 1 or arrived[k, j]):
                    n_cont += 1
                    if first < 0:
                        first = j
            if n_cont > 0 and rf_u[k] < 1.0 - b:
                winner = -1
                if equal_mode:
                    pick = int(grant_u[k] * n_cont)
                    if pick >= n_cont:
                        pick = n_cont - 1
                    seen = 0
                    for j in range(n_nodes):
                        if fso_bad[k, j] and (buf[j] >= 1 or arrived[k, j]):
                            if seen == pick:
                                winner = j
                                break
                            seen += 1
                elif grant_u[k] < p:
                    winner = first
                if winner >= 0:
                    rf_state[0] = winner
                    rf_state[1] = omega_ratio  # counts this step's chunk too
                    if measure:
                        global_cnt[1] += 1
                    if buf[winner] == 0:
                        # the arriving frame itself enters service
                        arrived[k, winner] = False
                        fifo[winner, (fifo_head[winner] + buf[winner]) % cap] = t
                        buf[winner] += 1

        # settle remaining arrivals; a head completing RF this step frees a slot
        for j in range(n_nodes):
            if not arrived[k, j]:
                continue
            departing = rf_state[0] == j and rf_state[1] == 1
            if buf[j] < buf_cap or departing:
                fifo[j, (fifo_head[j] + buf[j]) % cap] = t
                buf[j] += 1
            elif measure:
                lost[j] += 1

        # end of step: the channel carried a chunk; completions free it
        if rf_state[0] >= 0:
            if measure:
                global_cnt[0] += 1
            rf_state[1] -= 1
            if rf_state[1] == 0:
                j = rf_state[0]
                ts = fifo[j, fifo_head[j]]
                fifo_head[j] = (fifo_head[j] + 1) % cap
                buf[j] -= 1
                if measure:
                    delivered[j] += 1
                    delay_sum[j] += t - ts
                rf_state[0] = -1

        if measure:
            for j in range(n_nodes):
                occ_sum[j] += buf[j]


def simulate_network(a: float, b: float, cfg: ProtocolConfig, omega: float,
                     buffer_size: int, omega_ratio: int, sim: SimConfig) -> SimStats:
    """Joint simulation of all N buffers sharing the backup RF channel.

    Per step: the RF busy countdown advances (a frame holds the channel for
    Omega steps, non-preemptive, healthy throughout); every node draws an
    arrival ~ Bernoulli(omega) and an FSO state ~ Bernoulli(1-a); good-FSO
    nodes deliver one frame; among contenders with failed FSO the channel,
    if idle and good (~ Bernoulli(1-b)), goes to the highest-priority node
    with probability p (or to a uniformly chosen one under equal priority).
    A failed persistence draw leaves the slot unused for that step. An
    arrival to a full buffer with no same-step departure is lost.
    """
    if not 0.0 <= a <= 1.0 or not 0.0 <= b <= 1.0:
        raise ValidationError(f"a and b must be in [0,1], got a={a} b={b}")
    if not 0.0 <= omega <= 1.0:
        raise ValidationError(f"omega must be in [0,1], got {omega}")
    if buffer_size < 1 or omega_ratio < 1:
        raise ValidationError("buffer_size and omega_ratio must be >= 1")
    n = cfg.n_nodes
    node_rngs = [np.random.default_rng(sim.seed + j) for j in range(1, n + 1)]
    chan_rng = np.random.default_rng(sim.seed)
    equal_mode = cfg.mode is ProtocolMode.EQUAL_PRIORITY

    buf = np.zeros(n, dtype=np.int64)
    fifo = np.zeros((n, buffer_size + 1), dtype=np.int64)
    fifo_head = np.zeros(n, dtype=np.int64)
    rf_state = np.array([-1, 0], dtype=np.int64)  # owner, remaining steps
    arrivals = np.zeros(n, dtype=np.int64)
    delivered = np.zeros(n, dtype=np.int64)
    lost = np.zeros(n, dtype=np.int64)
    delay_sum = np.zeros(n)
    occ_sum = np.zeros(n, dtype=np.int64)
    global_cnt = np.zeros(2, dtype=np.int64)  # busy steps, grants
    buf_start = np.zeros(n, dtype=np.int64)

    done = 0
    while done < sim.steps:
        block = min(CHUNK_STEPS, sim.steps - done)
        arrived = np.empty((block, n), dtype=np.bool_)
        fso_bad = np.empty((block, n), dtype=np.bool_)
        for j in range(n):
            arrived[:, j] = node_rngs[j].random(block) < omega
            fso_bad[:, j] = node_rngs[j].random(block) < a
        rf_u = chan_rng.random(block)
        grant_u = chan_rng.random(block)
        _joint_kernel(arrived, fso_bad, rf_u, grant_u, b, cfg.p, equal_mode,
                      omega_ratio, buffer_size, buf, fifo, fifo_head, rf_state,
                      arrivals, delivered, lost, delay_sum, occ_sum, global_cnt,
                      buf_start, done, sim.warmup)
        done += block

    measured = sim.steps - sim.warmup
    mean_delay = np.where(delivered > 0, delay_sum / np.maximum(delivered, 1), np.nan)
    return SimStats(
        config=sim,
        steps_measured=measured,
        arrivals=arrivals,
        delivered_frames=delivered,
        lost_frames=lost,
        time_avg_buffer=occ_sum / measured,
        mean_tagged_delay=mean_delay,
        buffer_at_start=buf_start.copy(),
        buffer_at_end=buf.copy(),
        rf_busy_fraction=global_cnt[0] / measured,
        rf_grant_events=int(global_cnt[1]),
        state_occupancy=None,
    )
