"""Simplex-free crossover from a near-optimal primal-dual pair to a vertex.

Pipeline: classify variables into basic (interior) and bound sets, run a
primal push (a cost-perturbed auxiliary LP plus a loop of kernel directions
and ratio tests that drives interior variables onto bounds), refresh the
active dual set, run a dual push (an activation auxiliary LP plus dual
kernel directions activating more columns), complete the basis with the
two-stage LU column selection, and verify the vertex.

All randomness flows from one seeded generator, so a run is reproducible
from (problem, point, config).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import RankCompletionError, least_squares, lu_select_independent_columns
from .model import BoxLp, GeneralLp, as_box, reformulate
from .pdhg import PdhgState, SolveResult, StepConfig, residuals, solve
from .scaling import ruiz_equilibrate

# Below this, a computed kernel direction counts as zero (relative to data size).
DIRECTION_ZERO_RTOL = 1e-9
# A ratio-test gain sigma_j a_j^T delta below this (relative to the column
# norm, direction unit-norm) is least-squares noise from a column already in
# the active span; treating it as positive would produce astronomically long
# steps that destroy the active slacks.
GAIN_RTOL = 1e-8
# Entries of a unit-norm push direction below this are noise and must not
# participate in a ratio test.
COMPONENT_RTOL = 1e-12


class CrossoverTimeout(RuntimeError):
    pass


class CrossoverFailed(RuntimeError):
    pass


@dataclass
class CrossoverConfig:
    gamma: float = 1.0
    epsilon: float = 1e-8
    seed: int = 0
    time_limit: float = 300.0
    aux_tol: float = 1e-8
    ols_method: str = "auto"
    max_push_rounds: int | None = None
    retries: int = 5
    aux_restart_period: int = 1024
    aux_max_iter: int = 2_000_000
    aux_per_round: bool = False
    direct_threshold: int = 1000


@dataclass
class Perturbation:
    """Uniform [0,1] perturbation draws from one seeded stream."""

    seed: int = 0
    rng: np.random.Generator = None
    delta_c: np.ndarray = None
    delta_b: np.ndarray = None

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    def fresh_cost(self, size: int) -> np.ndarray:
        self.delta_c = self.rng.uniform(0.0, 1.0, size)
        return self.delta_c

    def fresh_rhs(self, size: int) -> np.ndarray:
        self.delta_b = self.rng.uniform(0.0, 1.0, size)
        return self.delta_b


@dataclass
class CrossoverState:
    x: np.ndarray
    y: np.ndarray
    B: tuple[int, ...]
    E: tuple[int, ...]
    D: tuple[int, ...]
    N: tuple[int, ...]
    round: int = 0


@dataclass
class PushStep:
    direction: np.ndarray
    theta: float
    blocking: tuple[int, ...]


@dataclass
class VertexReport:
    conditions: dict[str, bool]
    details: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    @property
    def primal_ok(self) -> bool:
        keys = ("basis_nonsingular", "primal_solve", "primal_bounds",
                "offbasis_at_bounds")
        return all(self.conditions[k] for k in keys)


@dataclass
class CrossoverResult:
    x: np.ndarray
    y: np.ndarray
    basis: tuple[int, ...]
    status: str
    report: dict


def _slacks(lp: BoxLp, y: np.ndarray) -> np.ndarray:
    return lp.c - lp.A.T @ y


def _column_norms(A) -> np.ndarray:
    sq = A.multiply(A) if hasattr(A, "multiply") else np.square(A)
    return np.sqrt(np.asarray(sq.sum(axis=0)).ravel())


def _attracted_side(lp: BoxLp, x: np.ndarray, s: np.ndarray):
    """Distance to the nearest bound and the sign that orients each slack.

    sigma = +1 means the variable leans on its lower bound (slack should be
    >= 0 there), -1 the upper bound.  Free variables get infinite distance.
    """
    n = x.shape[0]
    dist = np.empty(n)
    sigma = np.empty(n)
    d_lo = np.where(np.isfinite(lp.lower), x - lp.lower, np.inf)
    d_up = np.where(np.isfinite(lp.upper), lp.upper - x, np.inf)
    lower_side = d_lo <= d_up
    dist = np.where(lower_side, d_lo, d_up)
    sigma = np.where(lower_side, 1.0, -1.0)
    return dist, sigma


def support_count(lp: BoxLp, x: np.ndarray, tol: float = 1e-8,
                  limit: int | None = None) -> int:
    """Number of variables strictly inside their bounds by more than tol.

    limit restricts the count to the first limit variables: benchmark tables
    count only the structural block of a reformulated problem, not the
    appended row variables.
    """
    d_lo = np.where(np.isfinite(lp.lower), x - lp.lower, np.inf)
    d_up = np.where(np.isfinite(lp.upper), lp.upper - x, np.inf)
    interior = np.minimum(d_lo, d_up) > tol
    if limit is not None:
        interior = interior[:limit]
    return int(np.sum(interior))


def identify_sets(z: PdhgState, problem, cfg: CrossoverConfig) -> CrossoverState:
    """Split variables into push sets from a near-optimal point.

    B keeps variables whose distance to the nearest bound beats both epsilon
    and gamma times the attracted slack; the rest (E) are fixed exactly onto
    their nearest bound, the aggressive part of the identification (the later
    repair absorbs the tiny feasibility error this introduces).  D collects
    columns whose slack is within epsilon of zero (plus B); N the remainder.
    """
    lp = as_box(problem)
    x, y = z.x.copy(), z.y.copy()
    s = _slacks(lp, y)
    dist, sigma = _attracted_side(lp, x, s)
    attracted = sigma * s
    basic = dist > np.maximum(cfg.gamma * attracted, cfg.epsilon)
    B = tuple(int(j) for j in np.flatnonzero(basic))
    E = tuple(int(j) for j in np.flatnonzero(~basic))
    for j in E:
        x[j] = lp.lower[j] if sigma[j] > 0 else lp.upper[j]
    active = (np.abs(s) <= cfg.epsilon) | basic
    D = tuple(int(j) for j in np.flatnonzero(active))
    N = tuple(int(j) for j in np.flatnonzero(~active))
    return CrossoverState(x=x, y=y, B=B, E=E, D=D, N=N, round=0)


def _refresh_dual_sets(lp: BoxLp, st: CrossoverState, cfg: CrossoverConfig) -> CrossoverState:
    s = _slacks(lp, st.y)
    active = np.zeros(lp.shape[1], dtype=bool)
    active[list(st.B)] = True
    active[list(st.D)] = True
    active |= np.abs(s) <= cfg.epsilon
    D = tuple(int(j) for j in np.flatnonzero(active))
    N = tuple(int(j) for j in np.flatnonzero(~active))
    return CrossoverState(x=st.x, y=st.y, B=st.B, E=st.E, D=D, N=N, round=st.round)


def _effective_rhs(lp: BoxLp, x: np.ndarray, B: tuple[int, ...]) -> np.ndarray:
    mask = np.ones(lp.shape[1], dtype=bool)
    mask[list(B)] = False
    off = np.flatnonzero(mask)
    if off.size == 0:
        return lp.b.copy()
    return lp.b - lp.A[:, off] @ x[off]


def build_primal_aux(problem, B, pert: Perturbation, x: np.ndarray | None = None) -> BoxLp:
    """The cost-perturbed restriction to the basic columns.

    min (c_B / (||c_B||_inf + 1) + delta_c) . x_B  over A_B x_B = b_eff with
    the original bounds on x_B.  b_eff discounts the off-B variables at their
    current values (equal to b for standard-form problems).
    """
    lp = as_box(problem)
    B = tuple(int(j) for j in B)
    if not B:
        raise ValueError("primal auxiliary problem needs a nonempty basic set")
    c_B = lp.c[list(B)]
    c_tilde = c_B / (np.linalg.norm(c_B, np.inf) + 1.0) + pert.fresh_cost(len(B))
    if x is None:
        b_eff = lp.b.copy()
    else:
        b_eff = _effective_rhs(lp, x, B)
    return BoxLp(
        A=lp.A[:, list(B)],
        b=b_eff,
        c=c_tilde,
        lower=lp.lower[list(B)],
        upper=lp.upper[list(B)],
        name="primal_aux",
    )


def primal_direction(problem, B, pert: Perturbation,
                     cfg: CrossoverConfig) -> np.ndarray:
    """A unit kernel direction of A_B that pushes some basic variable boundward.

    Built as the residual of the dual least-squares fit to a freshly
    perturbed cost, which lies in kernel(A_B); zero (signalling independent
    columns) when that residual vanishes.  Returned restricted to B in the
    given order.
    """
    lp = as_box(problem)
    B = tuple(int(j) for j in B)
    A_B = lp.A[:, list(B)]
    c_B = lp.c[list(B)]
    c_tilde = c_B / (np.linalg.norm(c_B, np.inf) + 1.0) + pert.fresh_cost(len(B))
    rep = least_squares(A_B.T, c_tilde, method=cfg.ols_method,
                        direct_threshold=cfg.direct_threshold)
    resid = c_tilde - A_B.T @ rep.solution
    norm = float(np.linalg.norm(resid))
    if norm <= DIRECTION_ZERO_RTOL * (1.0 + float(np.linalg.norm(c_tilde))):
        return np.zeros(len(B))
    delta = -resid / norm
    lower_B = lp.lower[list(B)]
    upper_B = lp.upper[list(B)]
    if not _has_progress(delta, lower_B, upper_B):
        delta = -delta
    return delta


def _has_progress(delta: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> bool:
    toward_lower = (delta < -COMPONENT_RTOL) & np.isfinite(lower)
    toward_upper = (delta > COMPONENT_RTOL) & np.isfinite(upper)
    return bool(np.any(toward_lower) or np.any(toward_upper))


def _primal_ratio(x_B: np.ndarray, delta: np.ndarray, lower: np.ndarray,
                  upper: np.ndarray) -> PushStep:
    """Largest step along delta keeping x_B inside its box, with blockers."""
    ratios = np.full(delta.shape[0], np.inf)
    toward_lower = (delta < -COMPONENT_RTOL) & np.isfinite(lower)
    toward_upper = (delta > COMPONENT_RTOL) & np.isfinite(upper)
    ratios[toward_lower] = (x_B[toward_lower] - lower[toward_lower]) / (
        -delta[toward_lower]
    )
    ratios[toward_upper] = (upper[toward_upper] - x_B[toward_upper]) / (
        delta[toward_upper]
    )
    theta = float(np.min(ratios))
    theta = max(theta, 0.0)
    blocking = tuple(int(j) for j in np.flatnonzero(ratios <= theta))
    return PushStep(direction=delta, theta=theta, blocking=blocking)


def _solve_aux(aux: BoxLp, cfg: CrossoverConfig, deadline: float | None):
    limit = None
    if deadline is not None:
        limit = deadline - time.perf_counter()
        if limit <= 0:
            raise CrossoverTimeout("time limit reached before auxiliary solve")
    step_cfg = StepConfig(
        tol=cfg.aux_tol,
        max_iter=cfg.aux_max_iter,
        restart_period=cfg.aux_restart_period,
        time_limit=limit,
        check_every=64,
    )
    # Equilibrating the auxiliary problem costs little and brings badly
    # conditioned restrictions back into the solver's comfort zone.
    scaled = ruiz_equilibrate(aux)
    result = solve(scaled.lp, None, step_cfg)
    if result.status == "time_limit":
        raise CrossoverTimeout("auxiliary solve hit the time limit")
    state = PdhgState(
        scaled.unscale_x(result.state.x),
        scaled.unscale_y(result.state.y),
        result.state.k,
    )
    return SolveResult(
        state=state,
        status=result.status,
        trajectory=result.trajectory,
        residuals=residuals(aux, state),
        eta=result.eta,
        idv=result.idv,
        wall_time_sec=result.wall_time_sec,
    )


def _snap_and_repair(lp: BoxLp, x: np.ndarray, B: tuple[int, ...],
                     cfg: CrossoverConfig):
    """Snap near-bound basic entries exactly onto bounds, then restore
    A_B x_B = b_eff by a minimal-norm correction on the surviving support.

    Returns (x_new, B_new) or None when the correction leaves the box (the
    caller then resamples the perturbation).
    """
    x = x.copy()
    B = list(B)
    at_lower = np.isfinite(lp.lower[B]) & (x[B] - lp.lower[B] <= cfg.epsilon)
    at_upper = np.isfinite(lp.upper[B]) & (lp.upper[B] - x[B] <= cfg.epsilon)
    for idx, j in enumerate(B):
        if at_lower[idx]:
            x[j] = lp.lower[j]
        elif at_upper[idx]:
            x[j] = lp.upper[j]
    survivors = [j for idx, j in enumerate(B) if not (at_lower[idx] or at_upper[idx])]
    if survivors:
        b_eff = _effective_rhs(lp, x, tuple(survivors))
        A_S = lp.A[:, survivors]
        rep = least_squares(A_S, b_eff - A_S @ x[survivors], method=cfg.ols_method,
                            direct_threshold=cfg.direct_threshold)
        x_new = x[survivors] + rep.solution
        if np.any(x_new < lp.lower[survivors] - 1e-12) or np.any(
            x_new > lp.upper[survivors] + 1e-12
        ):
            return None
        x[survivors] = np.clip(x_new, lp.lower[survivors], lp.upper[survivors])
    return x, tuple(survivors)


def primal_push(problem, st: CrossoverState, cfg: CrossoverConfig,
                pert: Perturbation | None = None,
                deadline: float | None = None) -> CrossoverState:
    """Drive the basic block onto a vertex of its own feasible set.

    Solves the perturbed auxiliary LP once and adopts its solution, then
    repeatedly walks along kernel directions of A_B until the direction
    generator certifies independent columns.  Every ratio step lands at
    least one variable exactly on a bound, so B shrinks monotonically.
    """
    lp = as_box(problem)
    pert = pert or Perturbation(cfg.seed)
    x = st.x.copy()
    B = tuple(st.B)
    rounds = st.round

    if B:
        direction = primal_direction(lp, B, pert, cfg)
        if np.any(direction != 0.0):
            for attempt in range(cfg.retries + 1):
                aux = build_primal_aux(lp, B, pert, x=x)
                result = _solve_aux(aux, cfg, deadline)
                if result.status == "optimal":
                    snapped = _snap_and_repair(lp, _adopt(x, B, result.state.x), B, cfg)
                    if snapped is not None:
                        x, B = snapped
                        break
                if attempt == cfg.retries:
                    raise CrossoverFailed(
                        "primal auxiliary solve failed (%s) after %d retries"
                        % (result.status, cfg.retries)
                    )
        max_rounds = cfg.max_push_rounds or (len(B) + 1)
        for _ in range(max_rounds):
            if deadline is not None and time.perf_counter() > deadline:
                raise CrossoverTimeout("time limit reached during primal push")
            if not B:
                break
            if cfg.aux_per_round and rounds > st.round:
                aux = build_primal_aux(lp, B, pert, x=x)
                result = _solve_aux(aux, cfg, deadline)
                if result.status == "optimal":
                    snapped = _snap_and_repair(lp, _adopt(x, B, result.state.x), B, cfg)
                    if snapped is not None:
                        x, B = snapped
            if not B:
                break
            delta = primal_direction(lp, B, pert, cfg)
            if not np.any(delta != 0.0):
                break
            lower_B = lp.lower[list(B)]
            upper_B = lp.upper[list(B)]
            if not _has_progress(delta, lower_B, upper_B):
                # Both orientations point at infinite bounds only; another
                # perturbation draws a different kernel vector.
                rounds += 1
                continue
            step = _primal_ratio(x[list(B)], delta, lower_B, upper_B)
            x_B = x[list(B)] + step.theta * delta
            for local in step.blocking:
                j = B[local]
                x_B[local] = (
                    lp.lower[j] if delta[local] < 0 else lp.upper[j]
                )
            x[list(B)] = x_B
            B = tuple(j for local, j in enumerate(B) if local not in step.blocking)
            rounds += 1

    if B:
        snapped = _snap_and_repair(lp, x, B, cfg)
        if snapped is not None:
            x, B = snapped

    E = tuple(int(j) for j in range(lp.shape[1]) if j not in set(B))
    return CrossoverState(x=x, y=st.y.copy(), B=B, E=E, D=st.D, N=st.N,
                          round=rounds)


def _adopt(x: np.ndarray, B: tuple[int, ...], x_B: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[list(B)] = x_B
    return out


def build_dual_aux(problem, D, N, sigma: np.ndarray | None = None) -> GeneralLp:
    """The slack-activation LP over the dual variables.

    Active columns pin their reduced cost to zero; the remaining columns keep
    their reduced-cost sign and their total (sign-oriented) slack is
    minimized, which activates as many of them as the geometry allows.
    sigma orients each slack (+1 lower-leaning, -1 upper-leaning); when
    omitted it is inferred from the bound structure.
    """
    lp = as_box(problem)
    D = [int(j) for j in D]
    N = [int(j) for j in N]
    m, n = lp.shape
    s_signs = sigma.copy() if sigma is not None else _dual_signs(lp, D, N)
    rows = lp.A.T  # one row per column of A
    row_lower = np.empty(n)
    row_upper = np.empty(n)
    d_mask = np.zeros(n, dtype=bool)
    d_mask[D] = True
    for j in range(n):
        cj = lp.c[j]
        if d_mask[j]:
            row_lower[j] = cj
            row_upper[j] = cj
        elif s_signs[j] >= 0:
            row_lower[j] = -np.inf
            row_upper[j] = cj
        else:
            row_lower[j] = cj
            row_upper[j] = np.inf
    sigma_N = s_signs.copy()
    sigma_N[d_mask] = 0.0
    c_dual = -(lp.A @ sigma_N)
    shift = float(lp.c @ sigma_N)
    return GeneralLp(
        A=rows,
        c=c_dual,
        row_lower=row_lower,
        row_upper=row_upper,
        col_lower=np.full(m, -np.inf),
        col_upper=np.full(m, np.inf),
        objective_shift=shift,
        name="dual_aux",
    )


def _dual_signs(lp: BoxLp, D, N) -> np.ndarray:
    """Orientation of each inactive column's slack: +1 lower-leaning, -1 upper."""
    n = lp.shape[1]
    signs = np.ones(n)
    upper_only = ~np.isfinite(lp.lower) & np.isfinite(lp.upper)
    signs[upper_only] = -1.0
    return signs


def dual_direction(problem, D, pert: Perturbation, cfg: CrossoverConfig,
                   sigma: np.ndarray | None = None) -> np.ndarray:
    """A unit kernel direction of A_D^T that tightens some inactive slack.

    Residual of the primal least-squares fit to a perturbed right-hand side;
    zero when A_D already has full row rank.
    """
    lp = as_box(problem)
    D = [int(j) for j in D]
    A_D = lp.A[:, D]
    b_tilde = lp.b / (np.linalg.norm(lp.b, np.inf) + 1.0) + pert.fresh_rhs(
        lp.shape[0]
    )
    rep = least_squares(A_D, b_tilde, method=cfg.ols_method,
                        direct_threshold=cfg.direct_threshold)
    resid = b_tilde - A_D @ rep.solution
    norm = float(np.linalg.norm(resid))
    if norm <= DIRECTION_ZERO_RTOL * (1.0 + float(np.linalg.norm(b_tilde))):
        return np.zeros(lp.shape[0])
    delta = resid / norm
    n = lp.shape[1]
    others = [j for j in range(n) if j not in set(D)]
    if others:
        if sigma is None:
            sigma = np.ones(n)
        gains = sigma[others] * (lp.A[:, others].T @ delta)
        genuine = gains > GAIN_RTOL * (1.0 + _column_norms(lp.A[:, others]))
        if not np.any(genuine):
            delta = -delta
    return delta


def dual_push(problem, st: CrossoverState, cfg: CrossoverConfig,
              pert: Perturbation | None = None,
              deadline: float | None = None) -> CrossoverState:
    """Grow the active dual set until A_D spans the row space.

    Runs the activation auxiliary LP once, then walks the dual variables
    along kernel directions of A_D^T; each ratio step makes at least one new
    slack exactly active.  Slack signs are preserved throughout.
    """
    lp = as_box(problem)
    pert = pert or Perturbation(cfg.seed)
    st = _refresh_dual_sets(lp, st, cfg)
    y = st.y.copy()
    D = tuple(st.D)
    rounds = st.round

    s = _slacks(lp, y)
    _, sigma_all = _attracted_side(lp, st.x, s)
    sigma = np.where(np.abs(s) > cfg.epsilon, np.sign(s), sigma_all)

    if np.any(dual_direction(lp, D, pert, cfg, sigma) != 0.0):
        aux = build_dual_aux(lp, D, tuple(j for j in range(lp.shape[1])
                                          if j not in set(D)), sigma=sigma)
        reform = reformulate(aux)
        result = _solve_aux(reform.to_box(), cfg, deadline)
        if result.status == "optimal":
            y_new = result.state.x[: lp.shape[0]]
            s_new = _slacks(lp, y_new)
            old_active = np.zeros(lp.shape[1], dtype=bool)
            old_active[list(D)] = True
            ok = np.all(np.abs(s_new[old_active]) <= 1e-6)
            if ok:
                y = y_new.copy()
                st = _refresh_dual_sets(
                    lp, CrossoverState(st.x, y, st.B, st.E, D, st.N, rounds), cfg
                )
                D = tuple(st.D)

        max_rounds = cfg.max_push_rounds or (lp.shape[0] + lp.shape[1])
        retries = 0
        col_norms = _column_norms(lp.A)
        for _ in range(max_rounds):
            if deadline is not None and time.perf_counter() > deadline:
                raise CrossoverTimeout("time limit reached during dual push")
            s = _slacks(lp, y)
            sigma = np.where(np.abs(s) > cfg.epsilon, np.sign(s), sigma)
            delta = dual_direction(lp, D, pert, cfg, sigma)
            if not np.any(delta != 0.0):
                break
            d_set = set(D)
            others = [j for j in range(lp.shape[1]) if j not in d_set]
            if not others:
                break
            gains = sigma[others] * (lp.A[:, others].T @ delta)
            progress = gains > GAIN_RTOL * (1.0 + col_norms[others])
            if not np.any(progress):
                retries += 1
                if retries > cfg.retries:
                    break
                continue
            ratios = np.full(len(others), np.inf)
            s_others = s[others]
            ratios[progress] = (sigma[others][progress] * s_others[progress]) / gains[
                progress
            ]
            ratios = np.maximum(ratios, 0.0)
            theta = float(np.min(ratios))
            blocking = [others[i] for i in np.flatnonzero(ratios <= theta)]
            y = y + theta * delta
            st = _refresh_dual_sets(
                lp,
                CrossoverState(st.x, y, st.B, st.E,
                               tuple(sorted(d_set | set(blocking))), st.N, rounds),
                cfg,
            )
            D = tuple(st.D)
            rounds += 1

    # Polish: zero the active slacks exactly in the least-squares sense.
    D_list = list(D)
    A_D = lp.A[:, D_list]
    s_D = lp.c[D_list] - A_D.T @ y
    if D_list and float(np.linalg.norm(s_D)) > 0:
        rep = least_squares(A_D.T, s_D, method=cfg.ols_method,
                            direct_threshold=cfg.direct_threshold)
        y = y + rep.solution

    st = _refresh_dual_sets(
        lp, CrossoverState(st.x, y, st.B, st.E, D, st.N, rounds), cfg
    )
    return st


def independence_check(problem, st: CrossoverState,
                       allow_outside_d: bool = True):
    """Complete B to a size-m basis with columns from D (then elsewhere).

    Returns (basis, dual_complete): dual_complete is False when columns
    outside D were needed, which downgrades the result to primal-only.
    """
    lp = as_box(problem)
    m = lp.shape[0]
    B = [int(j) for j in st.B]
    d_candidates = [j for j in st.D if j not in set(B)]
    A_B = lp.A[:, B]
    try:
        sel = lu_select_independent_columns(A_B, lp.A[:, d_candidates])
        basis = tuple(sorted(B + [d_candidates[i] for i in sel.selected_columns]))
        return basis, True
    except RankCompletionError as err:
        if not allow_outside_d:
            raise
        partial = [d_candidates[i] for i in err.selection.selected_columns]
        covered = B + partial
        rest = [j for j in range(lp.shape[1]) if j not in set(covered)]
        sel = lu_select_independent_columns(lp.A[:, covered], lp.A[:, rest])
        basis = tuple(sorted(covered + [rest[i] for i in sel.selected_columns]))
        return basis, False


def verify_vertex(problem, x: np.ndarray, y: np.ndarray, basis) -> VertexReport:
    """Check the six vertex conditions; report-only, never raises.

    Conditions: basis columns nonsingular; x satisfies the equality system;
    basic x within bounds; off-basis x exactly on bounds; y solves the basis
    dual system; off-basis reduced costs have feasible signs; and the duality
    gap is small.
    """
    lp = as_box(problem)
    m, n = lp.shape
    basis = [int(j) for j in basis]
    conditions: dict[str, bool] = {}
    details: dict[str, float] = {}

    A_K = np.asarray(lp.A[:, basis].todense())
    nonsingular = len(basis) == m
    x_K_solved = None
    if nonsingular:
        b_eff = _effective_rhs(lp, x, tuple(basis))
        try:
            x_K_solved = np.linalg.solve(A_K, b_eff)
            resid = float(np.linalg.norm(A_K @ x_K_solved - b_eff))
            details["basis_solve_residual"] = resid
            nonsingular = resid <= 1e-8 * (1.0 + float(np.linalg.norm(b_eff)))
        except np.linalg.LinAlgError:
            nonsingular = False
    conditions["basis_nonsingular"] = bool(nonsingular)

    r_primal = float(np.linalg.norm(lp.A @ x - lp.b))
    details["primal_residual"] = r_primal
    conditions["primal_solve"] = r_primal <= 1e-8 * (1.0 + float(np.linalg.norm(lp.b)))

    in_lower = x >= lp.lower - 1e-8
    in_upper = x <= lp.upper + 1e-8
    conditions["primal_bounds"] = bool(np.all(in_lower) and np.all(in_upper))

    off = [j for j in range(n) if j not in set(basis)]
    if off:
        lo_off = lp.lower[off]
        up_off = lp.upper[off]
        x_off = x[off]
        at_bound = (
            (np.isfinite(lo_off) & (np.abs(x_off - lo_off) <= 1e-8 * (1.0 + np.abs(lo_off))))
            | (np.isfinite(up_off) & (np.abs(x_off - up_off) <= 1e-8 * (1.0 + np.abs(up_off))))
        )
        conditions["offbasis_at_bounds"] = bool(np.all(at_bound))
    else:
        conditions["offbasis_at_bounds"] = True

    c_K = lp.c[basis]
    r_dual = float(np.linalg.norm(A_K.T @ y - c_K))
    details["dual_residual"] = r_dual
    conditions["dual_solve"] = r_dual <= 1e-8 * (1.0 + float(np.linalg.norm(c_K)))

    s = _slacks(lp, y)
    ok_signs = True
    for j in off:
        if lp.lower[j] == lp.upper[j]:
            continue
        at_lower = np.isfinite(lp.lower[j]) and abs(x[j] - lp.lower[j]) <= 1e-6 * (
            1.0 + abs(lp.lower[j])
        )
        if at_lower:
            if s[j] < -1e-8:
                ok_signs = False
        else:
            if s[j] > 1e-8:
                ok_signs = False
    conditions["dual_signs"] = bool(ok_signs)

    res = residuals(lp, PdhgState(x, y, 0))
    details["gap"] = res.gap
    conditions["gap"] = res.gap <= 1e-7

    return VertexReport(conditions=conditions, details=details)


def run_crossover(problem, z: PdhgState, cfg: CrossoverConfig | None = None) -> CrossoverResult:
    """Full crossover pipeline from a near-optimal point to a verified vertex.

    Status: "vertex" when every verification condition passes with a basis
    drawn from the active set; "primal_only" when the vertex is primal
    feasible and optimal but the dual side could not be completed; "timeout"
    or "failed" otherwise.  The report dict mirrors the JSON schema used by
    the CLI.
    """
    lp = as_box(problem)
    cfg = cfg or CrossoverConfig()
    start = time.perf_counter()
    deadline = start + cfg.time_limit if cfg.time_limit else None
    pert = Perturbation(cfg.seed)

    support_before = support_count(lp, z.x, cfg.epsilon)
    objective_in = lp.objective(z.x)

    status = "vertex"
    basis: tuple[int, ...] = ()
    st = identify_sets(z, lp, cfg)
    report_extra: dict = {}
    try:
        st = primal_push(lp, st, cfg, pert=pert, deadline=deadline)
        st = dual_push(lp, st, cfg, pert=pert, deadline=deadline)
        basis, dual_complete = independence_check(lp, st)
        vr = verify_vertex(lp, st.x, st.y, basis)
        report_extra["conditions"] = vr.conditions
        report_extra["details"] = {k: float(v) for k, v in vr.details.items()}
        if dual_complete and vr.passed:
            status = "vertex"
        elif vr.primal_ok:
            status = "primal_only"
        else:
            status = "failed"
    except CrossoverTimeout:
        status = "timeout"
    except (CrossoverFailed, RankCompletionError) as err:
        status = "failed"
        report_extra["error"] = str(err)

    wall = time.perf_counter() - start
    support_after = support_count(lp, st.x, cfg.epsilon)
    res = residuals(lp, PdhgState(st.x, st.y, 0))
    report = {
        "status": status,
        "basis": [int(j) for j in basis],
        "support_before": support_before,
        "support_after": support_after,
        "support_tol": cfg.epsilon,
        "objective_in": objective_in,
        "objective_out": lp.objective(st.x),
        "residuals": {
            "primal": res.primal_res,
            "dual": res.dual_res,
            "gap": res.gap,
        },
        "rounds": st.round,
        "wall_time_sec": wall,
    }
    report.update(report_extra)
    return CrossoverResult(x=st.x, y=st.y, basis=basis, status=status, report=report)
