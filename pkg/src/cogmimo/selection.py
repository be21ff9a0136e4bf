"""Joint transmit/receive antenna selection on the virtual array.

The selector picks N transmit and N receive antennas out of M candidates so
that minimum-variance beamforming on the resulting N^2-element virtual
subarray maximizes output SINR.  Selection is encoded by relaxation vectors
``c`` (transmit) and ``r`` (receive) in [0, 1]^M that cap the Euclidean norm
of the corresponding weight groups: transmit antenna i owns virtual entries
``p*M + i``, receive antenna j owns ``j*M + q``, each together with its
imaginary twin in the lifted real vector.

A physical transceiver cannot transmit and receive on the same or directly
neighboring elements, so binary selections must satisfy the isolation rule
``c_i + r_{i-1} + r_i + r_{i+1} <= 1`` (truncated at the array ends).

The relaxed problem (a second-order cone program) is solved repeatedly with
linear reweighting terms that reward groups already close to 1 and punish
groups close to 0, driving the relaxation toward a binary point.  The final
pair is rounded, checked against the isolation rule, and the exact Capon
weights are recomputed on the selected subarray.
"""

from __future__ import annotations

import collections
import hashlib
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import cvxpy as cp
import numpy as np
import scipy.linalg

from .beamforming import (
    BeamformerSolution,
    capon_weights,
    lift_vector,
    loaded_covariance,
    loading_level,
    realify,
)
from .errors import DomainError, InfeasibleSelectionError, SolverFailureError
from .model import (
    ArrayGeometry,
    VirtualCovariance,
    virtual_indices,
    virtual_steering,
)

logger = logging.getLogger(__name__)

# Fixed transceiver used as the non-adaptive baseline in the experiments:
# evenly spread transmitters and a compact receive block at the far end of
# an 18-element candidate array.
CONVENTIONAL_TX = (0, 4, 8, 12)
CONVENTIONAL_RX = (14, 15, 16, 17)


@dataclass(frozen=True)
class SelectorConfig:
    """Tuning knobs of the reweighted selection loop.

    ``alpha_scale``/``beta_scale`` set the linear-term weights relative to
    ``trace(R_lifted) / (2 M^2)``, so the reweighting pressure tracks the
    overall power level of the scene.

    ``refine_budget`` caps how many transmit subsets the rounding stage may
    score exactly against the covariance before committing to a binary pair;
    0 rounds purely by relaxation magnitudes.  The relaxation alone ranks
    transmitters poorly (for receive-structured interference every transmit
    group looks identical to the full-array quadratic), so leave this on
    unless reproducing that behavior is the point.
    """

    num_selected: int
    alpha_scale: float = 0.1
    beta_scale: float = 0.1
    alpha0: float = 1.0
    beta0: float = 20.0
    eps: float = 1e-3
    binary_tol: float = 1e-2
    max_outer_iters: int = 50
    refine_budget: int = 4096
    solver: str = "CLARABEL"

    def __post_init__(self):
        if self.num_selected < 1:
            raise DomainError(f"num_selected must be >= 1, got {self.num_selected}")
        if not (0 < self.eps):
            raise DomainError("eps must be positive")
        if not (0 < self.binary_tol < 0.5):
            raise DomainError("binary_tol must lie in (0, 0.5)")
        if self.max_outer_iters < 1:
            raise DomainError("max_outer_iters must be >= 1")
        if self.refine_budget < 0:
            raise DomainError("refine_budget must be >= 0")


@dataclass(frozen=True)
class SelectionPair:
    """Binary transmit/receive selection masks over the candidate array."""

    c: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c)
        r = np.asarray(self.r)
        if c.shape != r.shape or c.ndim != 1:
            raise DomainError("selection masks must be 1-D and equally sized")
        if not (np.isin(c, (0, 1)).all() and np.isin(r, (0, 1)).all()):
            raise DomainError("selection masks must be binary")
        object.__setattr__(self, "c", c.astype(np.int8))
        object.__setattr__(self, "r", r.astype(np.int8))

    @property
    def num_antennas(self) -> int:
        return self.c.size

    @property
    def tx_indices(self) -> np.ndarray:
        return np.flatnonzero(self.c)

    @property
    def rx_indices(self) -> np.ndarray:
        return np.flatnonzero(self.r)

    def satisfies_isolation(self) -> bool:
        return bool(np.all(_isolation_matrix(self.num_antennas) @
                           np.concatenate([self.c, self.r]) <= 1))

    def virtual(self) -> np.ndarray:
        return virtual_indices(self.num_antennas, self.tx_indices, self.rx_indices)


@dataclass(frozen=True)
class GroupMasks:
    """Boolean masks of the lifted weight coordinates owned by each antenna."""

    transmit: np.ndarray  # (M, 2*M*M) bool
    receive: np.ndarray  # (M, 2*M*M) bool


def build_group_masks(num_antennas: int) -> GroupMasks:
    """Masks tying lifted weight coordinates to candidate antennas.

    Transmit antenna i owns virtual positions ``p*M + i`` for every receive
    row p; receive antenna j owns ``j*M + q`` for every transmit column q.
    Both the real half and the imaginary half (offset ``M^2``) are flagged, so
    each mask selects 2M coordinates and each family partitions all ``2 M^2``
    coordinates exactly once.
    """
    m = num_antennas
    n = m * m
    tx = np.zeros((m, 2 * n), dtype=bool)
    rx = np.zeros((m, 2 * n), dtype=bool)
    p = np.arange(m)
    for i in range(m):
        cols = p * m + i
        tx[i, cols] = True
        tx[i, n + cols] = True
        rows = i * m + p
        rx[i, rows] = True
        rx[i, n + rows] = True
    return GroupMasks(transmit=tx, receive=rx)


def _isolation_matrix(m: int) -> np.ndarray:
    """Rows of ``c_i + r_{i-1} + r_i + r_{i+1} <= 1`` over stacked [c; r]."""
    d = np.zeros((m, 2 * m))
    for i in range(m):
        d[i, i] = 1.0
        for j in (i - 1, i, i + 1):
            if 0 <= j < m:
                d[i, m + j] = 1.0
    return d


def update_reweights(
    c: np.ndarray, r: np.ndarray, cfg: SelectorConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Linear-term weights for the next iteration from the current relaxation.

    The weight of a group at activation level x is
    ``(1 - x) / (1 - exp(-beta0 x) + eps) - x**alpha0 / eps``:
    exactly ``+1/eps`` for a fully inactive group and ``-1/eps`` for a fully
    active one, strictly decreasing in between.  Applied to both families.
    """

    def weight(x: np.ndarray) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return (1.0 - x) / (1.0 - np.exp(-cfg.beta0 * x) + cfg.eps) - (
            x**cfg.alpha0
        ) / cfg.eps

    return weight(c), weight(r)


@dataclass
class QuadObjective:
    """Lifted quadratic form passed to the subproblem.

    Either a dense Cholesky factor of the lifted covariance or the pair
    (scaled identity level, lifted factor rows) of a low-rank-plus-identity
    analytic model.  ``trace_lifted`` feeds the reweighting scales.
    """

    dim: int
    trace_lifted: float
    dense_factor: Optional[np.ndarray] = None
    noise_level: float = 0.0
    factor_rows: Optional[np.ndarray] = None

    @property
    def structure(self) -> tuple:
        if self.dense_factor is not None:
            return ("dense", self.dim)
        return ("factored", self.dim, self.factor_rows.shape[0])

    def fingerprint(self) -> str:
        """Content hash used to reuse compiled subproblems across calls."""
        h = hashlib.blake2b(repr(self.structure).encode(), digest_size=16)
        if self.dense_factor is not None:
            h.update(self.dense_factor.tobytes())
        else:
            h.update(np.float64(self.noise_level).tobytes())
            h.update(self.factor_rows.tobytes())
        return h.hexdigest()

    @classmethod
    def from_covariance(cls, r) -> "QuadObjective":
        """Build from a complex covariance, exploiting analytic factors if present."""
        if isinstance(r, VirtualCovariance) and r.factors is not None:
            noise, u, s = r.factors
            level = loading_level(r.matrix)
            n = u.shape[0]
            rows = np.empty((2 * u.shape[1], 2 * n))
            for k in range(u.shape[1]):
                col = u[:, k] * math.sqrt(s[k])
                rows[2 * k] = np.concatenate([col.real, col.imag])
                rows[2 * k + 1] = np.concatenate([-col.imag, col.real])
            trace = 2.0 * (n * (noise + level) + float(np.sum(s * (np.abs(u) ** 2).sum(axis=0))))
            return cls(
                dim=2 * n,
                trace_lifted=trace,
                noise_level=noise + level,
                factor_rows=rows,
            )
        mat = loaded_covariance(r)
        lifted = realify(mat)
        lifted = 0.5 * (lifted + lifted.T)
        factor = scipy.linalg.cholesky(lifted, lower=False)
        return cls(
            dim=lifted.shape[0],
            trace_lifted=float(np.trace(lifted)),
            dense_factor=factor,
        )

    def value(self, w: np.ndarray) -> float:
        if self.dense_factor is not None:
            return float(np.sum((self.dense_factor @ w) ** 2))
        return float(
            self.noise_level * np.sum(w**2) + np.sum((self.factor_rows @ w) ** 2)
        )


class SubproblemSolver:
    """One compiled instance of the relaxed selection program.

    The quadratic data is baked in as constants (a parametrized covariance
    would blow up canonicalization memory at useful array sizes), while the
    steering vector and both reweight vectors stay parameters.  One instance
    therefore serves a whole reweighting loop and every look angle of the
    same covariance; a new covariance needs a fresh instance.  Instances are
    not thread-safe; concurrent scenes need separate solvers.
    """

    def __init__(
        self,
        num_antennas: int,
        num_selected: int,
        quad: QuadObjective,
        solver: str = "CLARABEL",
    ):
        m = num_antennas
        n = m * m
        dim = 2 * n
        if quad.dim != dim:
            raise DomainError(
                f"objective dimension {quad.dim} does not match {m} antennas"
            )
        self.num_antennas = m
        self.num_selected = num_selected
        self.structure = quad.structure
        self.fingerprint = quad.fingerprint()
        self.solver = solver

        self._w = cp.Variable(dim)
        self._c = cp.Variable(m)
        self._r = cp.Variable(m)
        self._b = cp.Parameter(dim)
        self._p = cp.Parameter(m)  # already scaled by alpha
        self._q = cp.Parameter(m)  # already scaled by beta

        w1 = cp.reshape(self._w[:n], (m, m), order="C")
        w2 = cp.reshape(self._w[n:], (m, m), order="C")
        col_stack = cp.vstack([w1, w2])  # columns collect transmit groups
        row_stack = cp.hstack([w1, w2])  # rows collect receive groups
        iso = _isolation_matrix(m)
        constraints = [
            self._w @ self._b == 1,
            cp.norm(col_stack, 2, axis=0) <= self._c,
            cp.norm(row_stack, 2, axis=1) <= self._r,
            self._c >= 0,
            self._c <= 1,
            self._r >= 0,
            self._r <= 1,
            cp.sum(self._c) == float(num_selected),
            cp.sum(self._r) == float(num_selected),
            iso @ cp.hstack([self._c, self._r]) <= 1.0,
        ]

        if quad.dense_factor is not None:
            quad_expr = cp.sum_squares(quad.dense_factor @ self._w)
        else:
            quad_expr = quad.noise_level * cp.sum_squares(self._w) + cp.sum_squares(
                quad.factor_rows @ self._w
            )
        objective = cp.Minimize(quad_expr + self._p @ self._c + self._q @ self._r)
        self._problem = cp.Problem(objective, constraints)

    def solve(
        self, b_lifted: np.ndarray, p_scaled: np.ndarray, q_scaled: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
        self._b.value = b_lifted
        self._p.value = p_scaled
        self._q.value = q_scaled
        try:
            self._problem.solve(solver=self.solver)
        except cp.error.SolverError as exc:
            raise SolverFailureError(f"subproblem solver failed: {exc}") from exc
        status = self._problem.status
        if status == cp.INFEASIBLE:
            raise InfeasibleSelectionError(
                "relaxed selection problem is infeasible for this cardinality "
                "and isolation rule"
            )
        if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            raise SolverFailureError(f"subproblem ended with status {status!r}")
        if status == cp.OPTIMAL_INACCURATE:
            logger.warning("subproblem solved to reduced accuracy")
        return (
            np.asarray(self._w.value),
            np.asarray(self._c.value),
            np.asarray(self._r.value),
            float(self._problem.value),
        )


def solve_subproblem(
    quad: QuadObjective,
    b_lifted: np.ndarray,
    p: np.ndarray,
    q: np.ndarray,
    cfg: SelectorConfig,
    state: Optional[SubproblemSolver] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, SubproblemSolver]:
    """Solve one reweighted relaxation instance.

    ``p``/``q`` are the raw reweighting vectors; the trace-relative scales
    from ``cfg`` are applied here.  Returns the lifted weights, both
    relaxation vectors, the objective value, and the (reusable) solver state.
    """
    m = int(math.isqrt(quad.dim // 2))
    if state is None or state.fingerprint != quad.fingerprint():
        state = SubproblemSolver(m, cfg.num_selected, quad, cfg.solver)
    alpha = cfg.alpha_scale * quad.trace_lifted / quad.dim
    beta = cfg.beta_scale * quad.trace_lifted / quad.dim
    w, c, r, obj = state.solve(
        b_lifted, alpha * np.asarray(p, dtype=float), beta * np.asarray(q, dtype=float)
    )
    return w, c, r, obj, state


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a full selection run."""

    pair: SelectionPair
    solution: BeamformerSolution
    c_relaxed: np.ndarray
    r_relaxed: np.ndarray
    iterations: int
    converged: bool
    objective: float


def _feasible_rx_mask(m: int, tx_indices: np.ndarray) -> np.ndarray:
    blocked = np.zeros(m, dtype=bool)
    for i in tx_indices:
        blocked[max(i - 1, 0) : min(i + 2, m)] = True
    return ~blocked


def _no_isolated_placement(m: int, num_selected: int) -> InfeasibleSelectionError:
    return InfeasibleSelectionError(
        f"no transmit placement of size {num_selected} leaves "
        f"{num_selected} isolated receive slots on {m} antennas"
    )


# Two receive antennas within two positions of each other land in one
# isolation-window row, so admissible receive sets need index gaps of at
# least three.
_RX_GAP = 3


def _rx_spacing_ok(rx) -> bool:
    """True when sorted receive indices keep the 3-slot isolation window."""
    return all(b - a >= _RX_GAP for a, b in itertools.pairwise(rx))


def _best_spaced_rx(
    scores: np.ndarray, feasible: np.ndarray, num_selected: int
) -> Optional[np.ndarray]:
    """Heaviest receive set of the given size honoring the isolation window.

    Dynamic program over antenna positions: ``best[j, i]`` is the largest
    total relaxation mass attainable by picking ``j`` window-respecting slots
    from positions ``i`` onward.  Ties prefer the lower index.  Returns None
    when no admissible set of that size exists.
    """
    m = feasible.size
    s = np.asarray(scores, dtype=float)
    best = np.full((num_selected + 1, m + _RX_GAP), -np.inf)
    best[0, :] = 0.0
    for i in range(m - 1, -1, -1):
        for j in range(1, num_selected + 1):
            take = -np.inf
            if feasible[i] and best[j - 1, i + _RX_GAP] > -np.inf:
                take = s[i] + best[j - 1, i + _RX_GAP]
            best[j, i] = max(best[j, i + 1], take)
    if not np.isfinite(best[num_selected, 0]):
        return None
    out = []
    i, j = 0, num_selected
    while j > 0:
        take = -np.inf
        if feasible[i] and best[j - 1, i + _RX_GAP] > -np.inf:
            take = s[i] + best[j - 1, i + _RX_GAP]
        if take >= best[j, i + 1]:
            out.append(i)
            i += _RX_GAP
            j -= 1
        else:
            i += 1
    return np.asarray(out)


def _pair_score(mat: np.ndarray, b: np.ndarray, m: int, tx, rx) -> float:
    """Capon quadratic ``b^H R_sub^{-1} b`` of one candidate subarray."""
    idx = virtual_indices(m, np.asarray(tx), np.asarray(rx))
    sub = mat[np.ix_(idx, idx)]
    b_sub = b[idx]
    return float(
        np.vdot(b_sub, scipy.linalg.solve(sub, b_sub, assume_a="pos")).real
    )


# How many leading transmit subsets get their receive side polished beyond
# the greedy relaxation ordering, and the enumeration size under which that
# polish is exhaustive rather than swap-based.  A transmit subset whose
# greedy receive choice lands on a coupled slot can score far below its
# polished value, so the refinement window must stay comfortably wider than
# the top handful.
_REFINE_TX = 32
_EXHAUSTIVE_RX_LIMIT = 256


def _round_selection(
    c: np.ndarray,
    r: np.ndarray,
    num_selected: int,
    *,
    mat: Optional[np.ndarray] = None,
    b: Optional[np.ndarray] = None,
    budget: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Round relaxation vectors to a feasible binary pair.

    With ``budget`` 0: transmitters are the top-N relaxation scores (ties to
    the lower index); if that choice admits no window-respecting receive set,
    transmit combinations are re-examined in order of decreasing total score
    until one does; receivers are the heaviest admissible set by relaxation
    mass.

    With a positive ``budget``: up to that many transmit subsets, taken in
    order of decreasing relaxation mass, are scored exactly through the Capon
    quadratic of their induced subarray (receive side first by relaxation
    order, then polished for the leading subsets).  The best-scoring feasible
    pair wins; earlier candidates win ties.  The budgeted path subsumes the
    relaxation-only one: its first candidate is exactly that rounding.
    """
    m = c.size
    if budget > 0:
        if mat is None or b is None:
            raise DomainError("scored rounding needs the covariance and steering")
        ranked = sorted(
            itertools.combinations(range(m), num_selected),
            key=lambda combo: (-float(c[list(combo)].sum()), combo),
        )[:budget]
        stage: list[tuple[float, tuple, tuple]] = []
        for combo in ranked:
            tx = np.asarray(combo)
            rx = _best_spaced_rx(r, _feasible_rx_mask(m, tx), num_selected)
            if rx is None:
                continue
            stage.append((_pair_score(mat, b, m, tx, rx), combo, tuple(rx)))
        if not stage:
            raise _no_isolated_placement(m, num_selected)
        order = sorted(range(len(stage)), key=lambda i: (-stage[i][0], stage[i][1]))
        best_score, best_tx, best_rx = stage[order[0]]
        for i in order[:_REFINE_TX]:
            _, combo, rx0 = stage[i]
            tx = np.asarray(combo)
            slots = np.flatnonzero(_feasible_rx_mask(m, tx))
            if math.comb(slots.size, num_selected) <= _EXHAUSTIVE_RX_LIMIT:
                candidates = itertools.combinations(slots.tolist(), num_selected)
                for rx in candidates:
                    if not _rx_spacing_ok(rx):
                        continue
                    score = _pair_score(mat, b, m, tx, rx)
                    if score > best_score:
                        best_score, best_tx, best_rx = score, combo, rx
            else:
                current = list(rx0)
                local = stage[i][0]
                improved = True
                while improved:
                    improved = False
                    for pos in range(num_selected):
                        for slot in slots.tolist():
                            if slot in current:
                                continue
                            trial = sorted(current[:pos] + [slot] + current[pos + 1 :])
                            if not _rx_spacing_ok(trial):
                                continue
                            score = _pair_score(mat, b, m, tx, trial)
                            if score > local:
                                local, current, improved = score, trial, True
                if local > best_score:
                    best_score, best_tx, best_rx = local, combo, tuple(current)
        return np.asarray(best_tx), np.asarray(best_rx)

    order = np.argsort(-c, kind="stable")
    tx = np.sort(order[:num_selected])
    rx = _best_spaced_rx(r, _feasible_rx_mask(m, tx), num_selected)
    if rx is None:
        ranked = sorted(
            itertools.combinations(range(m), num_selected),
            key=lambda combo: (-float(c[list(combo)].sum()), combo),
        )
        for combo in ranked:
            rx = _best_spaced_rx(r, _feasible_rx_mask(m, np.asarray(combo)), num_selected)
            if rx is not None:
                tx = np.asarray(combo)
                break
        else:
            raise _no_isolated_placement(m, num_selected)
    return tx, rx


def select_transceiver(
    r,
    geom: ArrayGeometry,
    look_angle_deg: float,
    cfg: SelectorConfig,
    *,
    state: Optional[SubproblemSolver] = None,
    _quad: Optional[QuadObjective] = None,
) -> SelectionResult:
    """Pick a binary transceiver for one look direction.

    Runs the reweighted relaxation until both vectors are within
    ``binary_tol`` of binary (or the iteration cap), rounds to a feasible
    pair, and recomputes exact minimum-variance weights on the selected
    virtual subarray from the same covariance.

    ``r`` is the full-array covariance (estimate or analytic).  Analytic
    inputs carrying factor structure are exploited to keep the cone program
    small.
    """
    m = geom.num_antennas
    n_sel = cfg.num_selected
    if 2 * n_sel > m:
        raise InfeasibleSelectionError(
            f"cannot place {n_sel}+{n_sel} isolated chains on {m} antennas"
        )
    quad = _quad if _quad is not None else QuadObjective.from_covariance(r)
    if quad.dim != 2 * m * m:
        raise DomainError(
            f"covariance dimension {quad.dim // 2} does not match M^2 = {m * m}"
        )
    b = virtual_steering(geom, look_angle_deg)
    b_lifted = lift_vector(b)

    p = np.zeros(m)
    q = np.zeros(m)
    c = r_vec = None
    prev = None
    obj = math.nan
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_outer_iters + 1):
        w, c, r_vec, obj, state = solve_subproblem(quad, b_lifted, p, q, cfg, state)
        gap = max(
            np.minimum(c, 1.0 - c).max(initial=0.0),
            np.minimum(r_vec, 1.0 - r_vec).max(initial=0.0),
        )
        if gap < cfg.binary_tol:
            converged = True
            break
        if prev is not None:
            drift = max(
                np.abs(c - prev[0]).max(initial=0.0),
                np.abs(r_vec - prev[1]).max(initial=0.0),
            )
            if drift < 1e-7:
                logger.debug("relaxation stalled after %d iterations", iterations)
                break
        prev = (c, r_vec)
        p, q = update_reweights(c, r_vec, cfg)
    if not converged:
        logger.warning(
            "selection did not reach a binary point in %d iterations "
            "(residual gap %.3g); rounding anyway",
            iterations,
            gap,
        )

    mat = loaded_covariance(r)
    tx, rx = _round_selection(
        c,
        r_vec,
        n_sel,
        mat=mat,
        b=b,
        budget=cfg.refine_budget,
    )
    pair = SelectionPair(
        c=np.isin(np.arange(m), tx).astype(np.int8),
        r=np.isin(np.arange(m), rx).astype(np.int8),
    )
    idx = pair.virtual()
    sub = mat[np.ix_(idx, idx)]
    b_sub = b[idx]
    weights = capon_weights(sub, b_sub)
    solution = BeamformerSolution(weights=weights, look_angle_deg=float(look_angle_deg))
    return SelectionResult(
        pair=pair,
        solution=solution,
        c_relaxed=np.asarray(c),
        r_relaxed=np.asarray(r_vec),
        iterations=iterations,
        converged=converged,
        objective=obj,
    )


class SelectorSession:
    """Reusable selection context that caches compiled subproblems.

    Selection runs against the same covariance (identified by content) reuse
    one compiled cone program across look angles and reweighting iterations,
    which matters when sweeping a whole angle grid.  A small least-recently-
    used cache keeps the memory bounded when covariances change over time.
    Sessions are not thread-safe; use one per worker.
    """

    _CACHE_SIZE = 4

    def __init__(self, geom: ArrayGeometry, cfg: SelectorConfig):
        self.geom = geom
        self.cfg = cfg
        self._solvers: "collections.OrderedDict[str, SubproblemSolver]" = (
            collections.OrderedDict()
        )

    def select(self, r, look_angle_deg: float) -> SelectionResult:
        quad = QuadObjective.from_covariance(r)
        key = quad.fingerprint()
        state = self._solvers.get(key)
        if state is None:
            state = SubproblemSolver(
                self.geom.num_antennas, self.cfg.num_selected, quad, self.cfg.solver
            )
            self._solvers[key] = state
            while len(self._solvers) > self._CACHE_SIZE:
                self._solvers.popitem(last=False)
        else:
            self._solvers.move_to_end(key)
        return select_transceiver(
            r, self.geom, look_angle_deg, self.cfg, state=state, _quad=quad
        )


def enumerate_feasible_pairs(m: int, num_selected: int):
    """Yield every isolated binary (tx, rx) index pair, lexicographically."""
    for tx in itertools.combinations(range(m), num_selected):
        feasible = np.flatnonzero(_feasible_rx_mask(m, np.asarray(tx)))
        if feasible.size < num_selected:
            continue
        for rx in itertools.combinations(feasible.tolist(), num_selected):
            if _rx_spacing_ok(rx):
                yield np.asarray(tx), np.asarray(rx)


def brute_force_oracle(
    r,
    geom: ArrayGeometry,
    look_angle_deg: float,
    num_selected: int,
    *,
    signal_power_scale: float = 1.0,
    max_pairs: int = 10**6,
) -> tuple[SelectionPair, float]:
    """Exhaustively score every feasible pair and return the best.

    The score of a pair is ``b_sub^H R_sub^{-1} b_sub``, which orders pairs
    by output SINR whether ``r`` is the interference-plus-noise covariance or
    includes the target term.  The returned dB value equals the true output
    SINR when ``r`` excludes the target and ``signal_power_scale`` carries
    the target power term.  First pair in lexicographic order wins ties.
    """
    m = geom.num_antennas
    bound = math.comb(m, num_selected) * math.comb(m - num_selected, num_selected)
    if bound > max_pairs:
        raise DomainError(
            f"enumeration of ~{bound} pairs exceeds the guard of {max_pairs}"
        )
    mat = loaded_covariance(r)
    b = virtual_steering(geom, look_angle_deg)
    best_score = -math.inf
    best: Optional[tuple[np.ndarray, np.ndarray]] = None
    for tx, rx in enumerate_feasible_pairs(m, num_selected):
        idx = virtual_indices(m, tx, rx)
        sub = mat[np.ix_(idx, idx)]
        b_sub = b[idx]
        score = float(np.vdot(b_sub, scipy.linalg.solve(sub, b_sub, assume_a="pos")).real)
        if score > best_score:
            best_score = score
            best = (tx, rx)
    if best is None:
        raise InfeasibleSelectionError(
            f"no isolated placement of {num_selected}+{num_selected} chains "
            f"exists on {m} antennas"
        )
    pair = SelectionPair(
        c=np.isin(np.arange(m), best[0]).astype(np.int8),
        r=np.isin(np.arange(m), best[1]).astype(np.int8),
    )
    return pair, 10.0 * math.log10(signal_power_scale * best_score)


def embed_weights(pair: SelectionPair, weights: np.ndarray) -> np.ndarray:
    """Place subarray weights into the full virtual array (zeros elsewhere)."""
    m = pair.num_antennas
    full = np.zeros(m * m, dtype=complex)
    full[pair.virtual()] = weights
    return full
