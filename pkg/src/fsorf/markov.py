"""Discrete-time Markov chain of one node's transmit buffer.

State (i, j): i frames stored (0..B), j steps elapsed of an in-progress
RF transmission (0..Omega-1, with j = 0 forced at i = 0). One frame takes
one step on the FSO link and Omega steps on the RF link. The transition
matrix is column-stochastic: P[to, from].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .errors import NumericError, ValidationError

STEADY_RESIDUAL_TOL = 1e-10
DENSE_SOLVE_LIMIT = 2000
POWER_ITER_TOL = 1e-12
POWER_ITER_MAX = 10 ** 6


@dataclass(frozen=True)
class ChainParams:
    """Inputs of one node's chain: arrival and service probabilities plus geometry."""

    omega: float        # frame arrival probability per step
    p_fso: float        # P_FSO = 1 - a
    p_rf: float         # P_RF^(J), from the servicing protocol
    buffer_size: int    # B >= 1, frames
    omega_ratio: int    # Omega >= 1, FSO/RF rate ratio (integer)

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ValidationError(f"omega must be in [0,1], got {self.omega}")
        if not 0.0 <= self.p_fso <= 1.0:
            raise ValidationError(f"p_fso must be in [0,1], got {self.p_fso}")
        if not 0.0 <= self.p_rf <= 1.0:
            raise ValidationError(f"p_rf must be in [0,1], got {self.p_rf}")
        if self.p_fso + self.p_rf > 1.0 + 1e-12:
            # FSO and RF service are disjoint events in one step
            raise ValidationError(
                f"p_fso + p_rf must not exceed 1, got {self.p_fso + self.p_rf}")
        if int(self.buffer_size) != self.buffer_size or self.buffer_size < 1:
            raise ValidationError(f"buffer_size must be an integer >= 1, got {self.buffer_size}")
        if int(self.omega_ratio) != self.omega_ratio or self.omega_ratio < 1:
            raise ValidationError(
                f"omega_ratio is restricted to integers >= 1, got {self.omega_ratio}")


@dataclass(frozen=True)
class TransitionProbs:
    u0: float
    f: float
    u: float
    u_b: float
    v1: float
    v2: float
    v3: float
    v4: float


@dataclass(frozen=True)
class ChainSolution:
    """Built matrix and its steady-state vector for one node."""

    params: ChainParams
    matrix: np.ndarray   # (n, n), column-stochastic
    steady: np.ndarray   # (n,), nonnegative, sums to 1

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]


def n_states(buffer_size: int, omega_ratio: int) -> int:
    return omega_ratio * buffer_size + 1


def state_index(i: int, j: int, omega_ratio: int) -> int:
    """Linear index of state (i, j): 0 for the empty buffer, else (i-1)*Omega + j + 1."""
    if i == 0:
        if j != 0:
            raise ValidationError("state (0, j) only exists for j = 0")
        return 0
    return (i - 1) * omega_ratio + j + 1


def state_of(index: int, omega_ratio: int) -> tuple[int, int]:
    """Inverse of `state_index`."""
    if index == 0:
        return (0, 0)
    return ((index - 1) // omega_ratio + 1, (index - 1) % omega_ratio)


def transition_probs(params: ChainParams) -> TransitionProbs:
    """Scalar transition probabilities of the chain."""
    om, pf, pr = params.omega, params.p_fso, params.p_rf
    ps = pf + pr
    return TransitionProbs(
        u0=1.0 - om + om * pf,
        f=om * (1.0 - ps),
        u=(1.0 - om) * (1.0 - ps) + om * pf,
        u_b=1.0 - ps + om * pf,
        v1=(1.0 - om) * pf,
        v2=om * pr,
        v3=(1.0 - om) * pr,
        v4=pr,
    )


def _effective_params(params: ChainParams) -> ChainParams:
    """Collapse the degenerate Omega = 1 case.

    With Omega = 1 an RF frame departs within its service step exactly like
    an FSO frame, so the two links merge into a single one-step service with
    probability p_fso + p_rf. This keeps every column stochastic and removes
    the (unreachable) in-progress states.
    """
    if params.omega_ratio == 1 and params.p_rf > 0.0:
        return ChainParams(omega=params.omega, p_fso=params.p_fso + params.p_rf,
                           p_rf=0.0, buffer_size=params.buffer_size, omega_ratio=1)
    return params


def build_matrix(params: ChainParams) -> np.ndarray:
    """Assemble the (Omega*B + 1)^2 column-stochastic transition matrix.

    Block layout: scalar A0 = [u0]; C0 = [v1 0 .. 0 1-om] couples block 1 back
    to the empty state; E0 = [f v2 0 .. 0]^T feeds block 1; a tridiagonal band
    of Omega x Omega blocks A (diagonal), C (super), E (sub); A_B closes the
    last diagonal block.
    """
    eff = _effective_params(params)
    om = eff.omega
    b_size, omr = eff.buffer_size, eff.omega_ratio
    t = transition_probs(eff)
    n = n_states(b_size, omr)
    mat = np.zeros((n, n))

    def idx(i: int, j: int) -> int:
        return state_index(i, j, omr)

    # from (0,0): A0 and E0
    mat[idx(0, 0), idx(0, 0)] += t.u0
    mat[idx(1, 0), idx(0, 0)] += t.f
    if omr >= 2:
        mat[idx(1, 1), idx(0, 0)] += t.v2

    for i in range(1, b_size + 1):
        at_top = i == b_size
        # from (i, 0): diagonal block column 0 plus C/E couplings
        c = idx(i, 0)
        mat[idx(i - 1, 0), c] += t.v1                      # C / C0 first entry
        if at_top:
            mat[idx(i, 0), c] += t.u_b                     # A_B
            if omr >= 2:
                mat[idx(i, 1), c] += t.v4
        else:
            mat[idx(i, 0), c] += t.u                       # A
            if omr >= 2:
                mat[idx(i, 1), c] += t.v3
            mat[idx(i + 1, 0), c] += t.f                   # E first column
            if omr >= 2:
                mat[idx(i + 1, 1), c] += t.v2

        # from (i, j), 1 <= j <= Omega-2: RF transmission in progress
        for j in range(1, omr - 1):
            c = idx(i, j)
            if at_top:
                mat[idx(i, j + 1), c] += 1.0               # arrivals lost at full buffer
            else:
                mat[idx(i, j + 1), c] += 1.0 - om
                mat[idx(i + 1, j + 1), c] += om            # E subdiagonal

        # from (i, Omega-1): RF completion
        if omr >= 2:
            c = idx(i, omr - 1)
            mat[idx(i, 0), c] += om                        # completion + fresh arrival
            mat[idx(i - 1, 0), c] += 1.0 - om              # C / C0 last entry

    return mat


def _recurrent_class(matrix: np.ndarray) -> np.ndarray:
    """Boolean mask of the chain's single closed recurrent class.

    States outside it are transient and carry exactly zero stationary mass;
    zeroing them removes linear-solver noise from structurally unreachable
    states. More than one closed class means the stationary distribution is
    not unique, which is reported rather than silently averaged.
    """
    support = csr_matrix(matrix.T > 0.0)  # edge (i, j): i -> j reachable in one step
    n_comp, labels = csgraph.connected_components(support, directed=True,
                                                  connection="strong")
    rows, cols = matrix.nonzero()      # edge source is the column, target the row
    cross = labels[rows] != labels[cols]
    open_comps = set(labels[cols[cross]])  # classes with an exit edge
    closed = [c for c in range(n_comp) if c not in open_comps]
    if len(closed) != 1:
        raise NumericError(
            f"the chain is reducible with {len(closed)} closed classes; "
            "the stationary distribution is not unique at these boundary parameters")
    return labels == closed[0]


def steady_state(matrix: np.ndarray) -> np.ndarray:
    """Stationary distribution s with P s = s, s >= 0, sum(s) = 1.

    One balance equation is replaced by the normalization constraint and the
    system solved directly; chains above DENSE_SOLVE_LIMIT states fall back
    to power iteration. The absorbing empty-buffer case (column 0 == e0,
    e.g. omega = 0 or a = 0 with no RF) short-circuits to the point mass.
    """
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValidationError(f"matrix must be square, got {matrix.shape}")
    colsums = matrix.sum(axis=0)
    if not np.allclose(colsums, 1.0, rtol=0.0, atol=1e-9):
        raise ValidationError("matrix is not column-stochastic")

    if matrix[0, 0] >= 1.0 - 1e-15:
        s = np.zeros(n)
        s[0] = 1.0
        return s

    recurrent = _recurrent_class(matrix)

    if n <= DENSE_SOLVE_LIMIT:
        m = matrix - np.eye(n)
        m[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        try:
            s = np.linalg.solve(m, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericError(
                f"steady-state solve failed ({exc}); the chain may be reducible "
                "at these boundary parameters") from exc
    else:
        s = np.full(n, 1.0 / n)
        for _ in range(POWER_ITER_MAX):
            s_next = matrix @ s
            s_next /= s_next.sum()
            if np.max(np.abs(s_next - s)) < POWER_ITER_TOL:
                s = s_next
                break
            s = s_next
        else:
            raise NumericError("power iteration did not converge")

    s[~recurrent] = 0.0   # transient states hold no mass; drop solver noise
    s = np.clip(s, 0.0, None)
    total = s.sum()
    if total <= 0.0:
        raise NumericError("steady-state solve produced a non-positive vector")
    s /= total
    residual = np.max(np.abs(matrix @ s - s))
    if residual > STEADY_RESIDUAL_TOL:
        raise NumericError(f"steady-state residual {residual:.3e} exceeds "
                           f"{STEADY_RESIDUAL_TOL:.1e}")
    return s


def solve_chain(params: ChainParams) -> ChainSolution:
    """Build and solve one node's chain."""
    matrix = build_matrix(params)
    steady = steady_state(matrix)
    return ChainSolution(params=params, matrix=matrix, steady=steady)


def mean_buffer_occupancy(solution: ChainSolution) -> float:
    """Sum of i * s_(i,j) over all states, used by monotonicity checks."""
    p = solution.params
    total = 0.0
    for i in range(1, p.buffer_size + 1):
        for j in range(p.omega_ratio):
            total += i * solution.steady[state_index(i, j, p.omega_ratio)]
    return total
