"""The primal-dual hybrid gradient iteration for LPs, with KKT-residual
termination, optional average-iterate restarts, trajectory recording, and
estimation of the infimal displacement vector (IDV).

One iteration from z = (x, y) with step size eta:

    x+ = clamp(x - eta * (c - A^T y))        (clamp to the variable box)
    y+ = y  + eta * (b - A (2 x+ - x))

For eta strictly below 1/||A||_2 the map is nonexpansive in the M-norm with
M = [[I, eta*A^T], [eta*A, I]].  A feasible problem converges to a KKT point;
an infeasible or unbounded one drifts along a nonzero IDV, which the solver
detects and reports as divergence.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import spectral_norm_estimate
from .model import BoxLp, as_box

DEFAULT_SAFETY = 0.9
# Absolute M-norm agreement required between the two IDV estimators.
IDV_AGREE_TOL = 1e-4
DIVERGE_NORM_FACTOR = 1e8


class NonFiniteIterateError(RuntimeError):
    """An iterate picked up an inf or NaN; message names the first coordinate."""


@dataclass
class PdhgState:
    x: np.ndarray
    y: np.ndarray
    k: int = 0

    def copy(self) -> "PdhgState":
        return PdhgState(self.x.copy(), self.y.copy(), self.k)


@dataclass
class StepConfig:
    """Solve parameters; eta=None picks safety / (spectral norm estimate)."""

    eta: float | None = None
    safety: float = DEFAULT_SAFETY
    max_iter: int = 200_000
    tol: float = 1e-8
    restart_period: int | None = None
    record_stride: int = 0
    check_every: int = 16
    divergence_window: int = 512
    time_limit: float | None = None


@dataclass
class Residuals:
    primal_res: float
    dual_res: float
    gap: float

    def worst(self) -> float:
        return max(self.primal_res, self.dual_res, self.gap)


@dataclass
class Trajectory:
    snapshots: list[PdhgState] = field(default_factory=list)
    record_stride: int = 0
    eta: float = 0.0


@dataclass
class IdvEstimate:
    """Two estimates of the infimal displacement vector and their gap.

    v is the averaged successive difference over the final window; v_scaled
    is the endpoint average (z_K - z_0)/K.  degraded means the two disagreed
    by more than IDV_AGREE_TOL in the M-norm.
    """

    v: np.ndarray
    v_scaled: np.ndarray
    m_norm_gap: float
    degraded: bool
    iterations: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass
class SolveResult:
    state: PdhgState
    status: str
    trajectory: Trajectory
    residuals: Residuals
    eta: float
    idv: np.ndarray | None = None
    wall_time_sec: float = 0.0


def resolve_eta(problem, cfg: StepConfig) -> float:
    """The step size actually used: cfg.eta, or safety/||A||_2 estimated."""
    if cfg.eta is not None:
        return float(cfg.eta)
    lp = as_box(problem)
    norm = spectral_norm_estimate(lp.A)
    if norm == 0.0:
        return cfg.safety
    return cfg.safety / norm


def _check_finite(x: np.ndarray, y: np.ndarray, k: int):
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise NonFiniteIterateError(
            "x[%d] became non-finite at iteration %d" % (bad, k)
        )
    if not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        raise NonFiniteIterateError(
            "y[%d] became non-finite at iteration %d" % (bad, k)
        )


def pdhg_step(state: PdhgState, problem, eta: float) -> PdhgState:
    """One PDHG iteration; raises if the result is not finite."""
    lp = as_box(problem)
    x_new = np.clip(state.x - eta * (lp.c - lp.A.T @ state.y), lp.lower, lp.upper)
    y_new = state.y + eta * (lp.b - lp.A @ (2.0 * x_new - state.x))
    _check_finite(x_new, y_new, state.k + 1)
    return PdhgState(x_new, y_new, state.k + 1)


def residuals(problem, z: PdhgState) -> Residuals:
    """Relative KKT residuals of z (primal feasibility, dual sign, gap).

    Dual violations honor the bound structure: a reduced cost of the wrong
    sign only counts when the bound that would absorb it is infinite, and the
    dual objective carries the finite-bound terms.
    """
    lp = as_box(problem)
    x, y = z.x, z.y
    r_primal = float(np.linalg.norm(lp.A @ x - lp.b))
    primal_res = r_primal / (1.0 + float(np.linalg.norm(lp.b)))

    s = lp.c - lp.A.T @ y
    lower_inf = np.isinf(lp.lower)
    upper_inf = np.isinf(lp.upper)
    viol = np.zeros_like(s)
    pos = np.maximum(s, 0.0)
    neg = np.maximum(-s, 0.0)
    # s > 0 needs a finite lower bound to lean on; s < 0 a finite upper bound.
    viol += np.where(lower_inf, pos, 0.0)
    viol += np.where(upper_inf, neg, 0.0)
    dual_res = float(np.linalg.norm(viol)) / (1.0 + float(np.linalg.norm(lp.c)))

    obj_p = float(lp.c @ x)
    finite_lower = np.where(lower_inf, 0.0, lp.lower)
    finite_upper = np.where(upper_inf, 0.0, lp.upper)
    bound_terms = finite_lower * np.where(lower_inf, 0.0, pos) - finite_upper * np.where(
        upper_inf, 0.0, neg
    )
    obj_d = float(lp.b @ y) + float(np.sum(bound_terms))
    gap = abs(obj_p - obj_d) / (1.0 + abs(obj_p) + abs(obj_d))
    return Residuals(primal_res=primal_res, dual_res=dual_res, gap=gap)


def m_norm(u_x: np.ndarray, u_y: np.ndarray, A, eta: float) -> float:
    """The norm induced by M = [[I, eta*A^T], [eta*A, I]]."""
    quad = (
        float(u_x @ u_x)
        + float(u_y @ u_y)
        + 2.0 * eta * float(u_y @ (A @ u_x))
    )
    return float(np.sqrt(max(quad, 0.0)))


def initial_state(problem, z0=None) -> PdhgState:
    lp = as_box(problem)
    m, n = lp.shape
    if z0 is None:
        return PdhgState(lp.clamp(np.zeros(n)), np.zeros(m), 0)
    if isinstance(z0, PdhgState):
        return PdhgState(np.asarray(z0.x, dtype=float).copy(),
                         np.asarray(z0.y, dtype=float).copy(), 0)
    x0, y0 = z0
    return PdhgState(np.asarray(x0, dtype=float).copy(),
                     np.asarray(y0, dtype=float).copy(), 0)


def solve(problem, z0=None, cfg: StepConfig | None = None) -> SolveResult:
    """Iterate PDHG until the three relative residuals all fall under cfg.tol.

    Returns status "optimal", "iter_limit", "time_limit", or "diverging".
    Divergence is declared on iterate blowup, or when the windowed IDV
    estimate stabilizes at a norm above tol while agreeing with the endpoint
    estimator in the M-norm (the latter check is skipped when restarts are
    active, since restarts deliberately break the displacement pattern).
    """
    lp = as_box(problem)
    cfg = cfg or StepConfig()
    eta = resolve_eta(lp, cfg)
    state = initial_state(lp, z0)
    _check_finite(state.x, state.y, 0)

    A, At, b, c = lp.A, lp.A.T, lp.b, lp.c
    lower, upper = lp.lower, lp.upper
    x, y = state.x.copy(), state.y.copy()
    x0, y0 = x.copy(), y.copy()
    z0_norm = float(np.sqrt(x0 @ x0 + y0 @ y0))

    traj = Trajectory(record_stride=cfg.record_stride, eta=eta)
    if cfg.record_stride > 0:
        traj.snapshots.append(PdhgState(x.copy(), y.copy(), 0))

    start_time = time.perf_counter()
    res = residuals(lp, PdhgState(x, y, 0))
    if res.worst() <= cfg.tol:
        return SolveResult(
            state=PdhgState(x, y, 0),
            status="optimal",
            trajectory=traj,
            residuals=res,
            eta=eta,
            wall_time_sec=time.perf_counter() - start_time,
        )

    window = max(2, cfg.divergence_window)
    window_anchor = (x.copy(), y.copy())
    window_anchor_k = 0
    prev_window_v = None
    idv_vector = None

    restart_on = cfg.restart_period is not None and cfg.restart_period > 0
    if restart_on:
        avg_x = np.zeros_like(x)
        avg_y = np.zeros_like(y)
        avg_count = 0

    status = "iter_limit"
    k = 0
    while k < cfg.max_iter:
        x_new = np.clip(x - eta * (c - At @ y), lower, upper)
        y = y + eta * (b - A @ (2.0 * x_new - x))
        x = x_new
        k += 1

        if cfg.record_stride > 0 and k % cfg.record_stride == 0:
            traj.snapshots.append(PdhgState(x.copy(), y.copy(), k))

        if restart_on:
            avg_x += x
            avg_y += y
            avg_count += 1
            if avg_count == cfg.restart_period:
                x = avg_x / avg_count
                y = avg_y / avg_count
                np.clip(x, lower, upper, out=x)
                avg_x = np.zeros_like(x)
                avg_y = np.zeros_like(y)
                avg_count = 0

        if k % cfg.check_every == 0 or k == cfg.max_iter:
            _check_finite(x, y, k)
            res = residuals(lp, PdhgState(x, y, k))
            if res.worst() <= cfg.tol:
                status = "optimal"
                break
            z_norm = float(np.sqrt(x @ x + y @ y))
            if z_norm > DIVERGE_NORM_FACTOR * (1.0 + z0_norm):
                status = "diverging"
                span = max(k - window_anchor_k, 1)
                idv_vector = np.concatenate(
                    [(x - window_anchor[0]) / span, (y - window_anchor[1]) / span]
                )
                break
            if cfg.time_limit is not None and (
                time.perf_counter() - start_time > cfg.time_limit
            ):
                status = "time_limit"
                break

        if not restart_on and k - window_anchor_k >= window:
            span = k - window_anchor_k
            v_x = (x - window_anchor[0]) / span
            v_y = (y - window_anchor[1]) / span
            if prev_window_v is not None:
                v_norm_m = m_norm(v_x, v_y, A, eta)
                scale = IDV_AGREE_TOL * (1.0 + v_norm_m)
                stable = (
                    m_norm(v_x - prev_window_v[0], v_y - prev_window_v[1], A, eta)
                    <= scale
                )
                s_x = (x - x0) / k
                s_y = (y - y0) / k
                agrees = m_norm(v_x - s_x, v_y - s_y, A, eta) <= scale
                norm_v = float(np.sqrt(v_x @ v_x + v_y @ v_y))
                if stable and agrees and norm_v > cfg.tol:
                    status = "diverging"
                    idv_vector = np.concatenate([v_x, v_y])
                    break
            prev_window_v = (v_x, v_y)
            window_anchor = (x.copy(), y.copy())
            window_anchor_k = k

    final = PdhgState(x, y, k)
    res = residuals(lp, final)
    if cfg.record_stride > 0 and (not traj.snapshots or traj.snapshots[-1].k != k):
        traj.snapshots.append(final.copy())
    return SolveResult(
        state=final,
        status=status,
        trajectory=traj,
        residuals=res,
        eta=eta,
        idv=idv_vector,
        wall_time_sec=time.perf_counter() - start_time,
    )


def estimate_idv(problem, z0=None, cfg: StepConfig | None = None,
                 window: int = 512) -> IdvEstimate:
    """Estimate the IDV by running cfg.max_iter plain PDHG iterations.

    Returns the averaged successive difference over the final ``window``
    iterations together with the endpoint estimate (z_K - z_0)/K; the two
    must agree within IDV_AGREE_TOL in the M-norm or the result is flagged
    degraded.  A feasible problem yields v ~ 0; an infeasible or unbounded
    one a stable nonzero v.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    lp = as_box(problem)
    cfg = cfg or StepConfig(max_iter=10_000)
    K = cfg.max_iter
    if K <= window:
        raise ValueError("max_iter (%d) must exceed window (%d)" % (K, window))
    eta = resolve_eta(lp, cfg)
    state = initial_state(lp, z0)
    x0, y0 = state.x.copy(), state.y.copy()

    A, At, b, c = lp.A, lp.A.T, lp.b, lp.c
    lower, upper = lp.lower, lp.upper
    x, y = x0.copy(), y0.copy()
    anchor = None
    for k in range(1, K + 1):
        x_new = np.clip(x - eta * (c - At @ y), lower, upper)
        y = y + eta * (b - A @ (2.0 * x_new - x))
        x = x_new
        if k == K - window:
            anchor = (x.copy(), y.copy())
        if k % 256 == 0:
            _check_finite(x, y, k)
    _check_finite(x, y, K)

    v_x = (x - anchor[0]) / window
    v_y = (y - anchor[1]) / window
    s_x = (x - x0) / K
    s_y = (y - y0) / K
    gap = m_norm(v_x - s_x, v_y - s_y, A, eta)
    return IdvEstimate(
        v=np.concatenate([v_x, v_y]),
        v_scaled=np.concatenate([s_x, s_y]),
        m_norm_gap=gap,
        degraded=gap > IDV_AGREE_TOL,
        iterations=K,
    )


def trajectory_to_csv(traj: Trajectory, path):
    """Write snapshots as CSV with header k,x_1..x_n,y_1..y_m, full precision."""
    if not traj.snapshots:
        raise ValueError("trajectory has no snapshots")
    n = traj.snapshots[0].x.shape[0]
    m = traj.snapshots[0].y.shape[0]
    header = ["k"] + ["x_%d" % (j + 1) for j in range(n)] + [
        "y_%d" % (i + 1) for i in range(m)
    ]
    with open(path, "w", encoding="ascii") as handle:
        handle.write(",".join(header) + "\n")
        for snap in traj.snapshots:
            cells = [str(snap.k)]
            cells.extend(repr(float(v)) for v in snap.x)
            cells.extend(repr(float(v)) for v in snap.y)
            handle.write(",".join(cells) + "\n")
