"""Closed-form geometry of PDHG trajectories.

Between changes of the active-set structure, a PDHG run on an LP follows an
exact linear recursion: writing B for the basic variables (strictly inside
their bounds, or at a bound with a nonpositive attracted sign) and N for the
rest, the iterate decomposes as

    z(k) = z_v + P_B^k (z(0) - z_v) + k * v        on the (B, y) block,

with x_N pinned at its bounds.  z_v is the spiral center, v the ray
direction (both computable by minimal-norm least squares on A_B), and P_B a
rotation-contraction built from A_B and the step size.  This module
classifies bases, segments trajectories into phases, computes centers and
rays, applies the rotation operator, and labels basis-change events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import least_squares, project_kernel
from .model import as_box
from .pdhg import PdhgState, Trajectory

ROTATION_DENSE_GUARD = 2048


@dataclass(frozen=True)
class BasisPartition:
    """Index partition into basic (B) and nonbasic (N) variables."""

    basic: tuple[int, ...]
    nonbasic: tuple[int, ...]

    def __post_init__(self):
        if set(self.basic) & set(self.nonbasic):
            raise ValueError("basic and nonbasic sets overlap")

    @property
    def size(self) -> int:
        return len(self.basic) + len(self.nonbasic)


@dataclass
class SpiralRay:
    """Spiral center and ray direction of one phase.

    center_x / direction_x are full-length vectors (nonbasic components of
    the direction are zero; nonbasic components of the center sit at their
    bounds).  rhs_effective is b minus the contribution of nonbasic-at-bound
    variables; it equals b on standard-form problems.
    """

    center_x: np.ndarray
    center_y: np.ndarray
    direction_x: np.ndarray
    direction_y: np.ndarray
    basis: BasisPartition
    eta: float
    rhs_effective: np.ndarray
    anchor_iter: int = 0

    @property
    def center(self) -> np.ndarray:
        return np.concatenate([self.center_x, self.center_y])

    @property
    def direction(self) -> np.ndarray:
        return np.concatenate([self.direction_x, self.direction_y])

    @property
    def direction_norm(self) -> float:
        return float(np.linalg.norm(self.direction))


@dataclass
class BasisChangeEvent:
    iter: int
    leaving: tuple[int, ...]
    entering: tuple[int, ...]
    labels: dict[int, str] = field(default_factory=dict)


@dataclass
class Phase:
    start_iter: int
    end_iter: int
    basis: BasisPartition
    spiral: SpiralRay
    event: BasisChangeEvent | None = None


def classify_basis(z: PdhgState, problem) -> BasisPartition:
    """Exact active-set classification of an iterate.

    A variable is basic when strictly inside its bounds, or when sitting
    exactly on a bound whose reduced cost would pull it off the bound (<= 0
    at a lower bound, >= 0 at an upper bound).  Fixed variables are always
    nonbasic.  The tests are exact: projection produces exact bound values,
    so no tolerance is involved.
    """
    lp = as_box(problem)
    x, y = z.x, z.y
    s = lp.c - lp.A.T @ y
    basic = []
    nonbasic = []
    for j in range(x.shape[0]):
        lo, up = lp.lower[j], lp.upper[j]
        if lo == up:
            nonbasic.append(j)
        elif x[j] > lo and x[j] < up:
            basic.append(j)
        elif x[j] == lo:
            (basic if s[j] <= 0.0 else nonbasic).append(j)
        else:  # x[j] == up
            (basic if s[j] >= 0.0 else nonbasic).append(j)
    return BasisPartition(basic=tuple(basic), nonbasic=tuple(nonbasic))


def spiral_of_phase(problem, basis: BasisPartition, z0: PdhgState, eta: float,
                    ols_method: str = "auto") -> SpiralRay:
    """Center and ray of the phase that starts at z0 with the given basis.

    Both are assembled from minimal-norm least-squares solves on the basic
    column block: the center is the least-squares point of the kernel-shifted
    start, and the ray is eta times the (negated) residual pair.
    """
    lp = as_box(problem)
    B = list(basis.basic)
    N = list(basis.nonbasic)
    A_B = lp.A[:, B]
    x0_B = z0.x[B]
    b_eff = lp.b - lp.A[:, N] @ z0.x[N] if N else lp.b.copy()
    c_B = lp.c[B]

    x_star = least_squares(A_B, b_eff, method=ols_method).solution
    y_star = least_squares(A_B.T, c_B, method=ols_method).solution

    center_x = z0.x.copy()
    direction_x = np.zeros_like(z0.x)
    if B:
        center_x[B] = x_star + project_kernel(A_B, x0_B, method=ols_method)
        direction_x[B] = -eta * (c_B - A_B.T @ y_star)
    center_y = y_star + project_kernel(A_B.T, z0.y, method=ols_method)
    direction_y = eta * (b_eff - A_B @ x_star)

    return SpiralRay(
        center_x=center_x,
        center_y=center_y,
        direction_x=direction_x,
        direction_y=direction_y,
        basis=basis,
        eta=eta,
        rhs_effective=b_eff,
        anchor_iter=z0.k,
    )


def apply_rotation(basis: BasisPartition, problem, eta: float, w: np.ndarray,
                   k: int) -> np.ndarray:
    """Apply the phase rotation operator k times to a (|B|, m) block vector.

    The operator is [[I, eta*A_B^T], [-eta*A_B, I - 2 eta^2 A_B A_B^T]];
    each application costs two matrix-vector products with A_B.
    """
    lp = as_box(problem)
    B = list(basis.basic)
    A_B = lp.A[:, B]
    nb = len(B)
    m = lp.b.shape[0]
    w = np.asarray(w, dtype=float)
    if w.shape[0] != nb + m:
        raise ValueError("w has length %d, expected %d" % (w.shape[0], nb + m))
    p = w[:nb].copy()
    q = w[nb:].copy()
    for _ in range(k):
        t = A_B.T @ q
        p_new = p + eta * t
        q = q - eta * (A_B @ (p + 2.0 * eta * t))
        p = p_new
    return np.concatenate([p, q])


def rotation_matrix(basis: BasisPartition, problem, eta: float) -> np.ndarray:
    """Dense form of the rotation operator, for small-scale checks."""
    lp = as_box(problem)
    B = list(basis.basic)
    A_B = np.asarray(lp.A[:, B].todense())
    nb = len(B)
    m = lp.b.shape[0]
    if nb + m > ROTATION_DENSE_GUARD:
        raise ValueError("dense rotation matrix limited to %d" % ROTATION_DENSE_GUARD)
    P = np.zeros((nb + m, nb + m))
    P[:nb, :nb] = np.eye(nb)
    P[:nb, nb:] = eta * A_B.T
    P[nb:, :nb] = -eta * A_B
    P[nb:, nb:] = np.eye(m) - 2.0 * eta * eta * (A_B @ A_B.T)
    return P


def _phase_offset(spiral: SpiralRay, z0: PdhgState) -> np.ndarray:
    B = list(spiral.basis.basic)
    return np.concatenate(
        [z0.x[B] - spiral.center_x[B], z0.y - spiral.center_y]
    )


def closed_form_iterate(spiral: SpiralRay, z0: PdhgState, k: int,
                        problem=None) -> PdhgState:
    """Evaluate z_v + P_B^k (z0 - z_v) + k v, with x_N held at its bounds.

    z0 must be the first iterate of the phase.  ``problem`` is only needed to
    rebuild A_B; when omitted, a dense rotation of the stored basis cannot be
    formed, so the caller must pass the LP the spiral came from.
    """
    if problem is None:
        raise ValueError("closed_form_iterate needs the originating problem")
    w = _phase_offset(spiral, z0)
    w_k = apply_rotation(spiral.basis, problem, spiral.eta, w, k)
    return _assemble_state(spiral, z0, w_k, k)


def _assemble_state(spiral: SpiralRay, z0: PdhgState, w_k: np.ndarray,
                    k: int) -> PdhgState:
    B = list(spiral.basis.basic)
    nb = len(B)
    x = spiral.center_x.copy()
    if nb:
        x[B] = spiral.center_x[B] + w_k[:nb] + k * spiral.direction_x[B]
    y = spiral.center_y + w_k[nb:] + k * spiral.direction_y
    return PdhgState(x, y, z0.k + k)


def closed_form_trajectory(spiral: SpiralRay, z0: PdhgState, count: int,
                           problem=None):
    """Yield the closed-form iterates k = 0..count incrementally.

    Costs one rotation application per step instead of k, so sweeping a whole
    phase is linear in its length.
    """
    if problem is None:
        raise ValueError("closed_form_trajectory needs the originating problem")
    w = _phase_offset(spiral, z0)
    for k in range(count + 1):
        yield _assemble_state(spiral, z0, w, k)
        if k < count:
            w = apply_rotation(spiral.basis, problem, spiral.eta, w, 1)


def classify_basis_change(z: PdhgState, z_next: PdhgState, problem,
                          spiral: SpiralRay | None = None) -> BasisChangeEvent | None:
    """Describe the basis change between consecutive iterates, if any.

    Leaving variables were basic and got stuck on a bound with a holding
    sign; entering ones were nonbasic and acquired an attracting reduced
    cost.  When the current phase's spiral is supplied, each leaving variable
    gets a diagnostic label: "center_outside" when the spiral center violates
    the bound that was hit, "ray_hits_bound" when the ray points into that
    bound, "radius" when the rotation amplitude (the offset from the moving
    center) reaches the center's clearance, else "unclassified".
    """
    lp = as_box(problem)
    before = classify_basis(z, lp)
    after = classify_basis(z_next, lp)
    before_basic = set(before.basic)
    after_basic = set(after.basic)
    leaving = tuple(sorted(before_basic - after_basic))
    entering = tuple(sorted(set(before.nonbasic) - set(after.nonbasic)))
    if not leaving and not entering:
        return None

    labels: dict[int, str] = {}
    if spiral is not None and leaving:
        B = list(spiral.basis.basic)
        t = z.k - spiral.anchor_iter
        offset_x = z.x[B] - spiral.center_x[B] - t * spiral.direction_x[B]
        offset_y = z.y - spiral.center_y - t * spiral.direction_y
        amplitude = float(
            np.sqrt(offset_x @ offset_x + offset_y @ offset_y)
        )
        for i in leaving:
            hit_lower = z_next.x[i] == lp.lower[i]
            bound = lp.lower[i] if hit_lower else lp.upper[i]
            center_i = spiral.center_x[i]
            clearance = (center_i - bound) if hit_lower else (bound - center_i)
            ray_i = spiral.direction_x[i]
            if clearance < 0.0:
                labels[i] = "center_outside"
            elif (hit_lower and ray_i < 0.0) or (not hit_lower and ray_i > 0.0):
                labels[i] = "ray_hits_bound"
            elif amplitude >= clearance:
                labels[i] = "radius"
            else:
                labels[i] = "unclassified"
    return BasisChangeEvent(iter=z_next.k, leaving=leaving, entering=entering,
                            labels=labels)


def segment_phases(traj: Trajectory, problem) -> list[Phase]:
    """Split a stride-1 trajectory into maximal constant-dynamics phases.

    A phase ends when the active-set classification changes, and also when a
    variable lands exactly on a finite bound it was off at the previous
    iterate.  The second rule catches grazing clips: a basic variable can be
    clipped onto its bound and pulled straight back inside, which leaves the
    classification untouched but breaks the affine map the phase formula
    needs.  Such touch-only boundaries carry an event with empty
    leaving/entering sets and a "bound_touch" label per touched variable.

    Each phase carries the spiral computed from its first snapshot and, when
    another phase follows, the event that ended it.
    """
    if not traj.snapshots:
        return []
    if traj.record_stride != 1:
        raise ValueError(
            "phase segmentation needs a stride-1 trajectory (got stride %d)"
            % traj.record_stride
        )
    lp = as_box(problem)
    snaps = traj.snapshots
    bases = [classify_basis(z, lp) for z in snaps]
    at_lower = [
        np.isfinite(lp.lower) & (z.x == lp.lower) for z in snaps
    ]
    at_upper = [
        np.isfinite(lp.upper) & (z.x == lp.upper) for z in snaps
    ]

    phases: list[Phase] = []
    start = 0
    for idx in range(1, len(snaps) + 1):
        if idx < len(snaps):
            touched = (at_lower[idx] & ~at_lower[idx - 1]) | (
                at_upper[idx] & ~at_upper[idx - 1]
            )
            if bases[idx] == bases[start] and not np.any(touched):
                continue
        spiral = spiral_of_phase(lp, bases[start], snaps[start], traj.eta)
        event = None
        if idx < len(snaps):
            event = classify_basis_change(snaps[idx - 1], snaps[idx], lp, spiral)
            if event is None:
                event = BasisChangeEvent(
                    iter=snaps[idx].k,
                    leaving=(),
                    entering=(),
                    labels={int(j): "bound_touch" for j in np.nonzero(touched)[0]},
                )
        phases.append(
            Phase(
                start_iter=snaps[start].k,
                end_iter=snaps[idx - 1].k,
                basis=bases[start],
                spiral=spiral,
                event=event,
            )
        )
        start = idx
    return phases


def gap_drift(problem, spiral: SpiralRay) -> float:
    """Per-iteration drift of the duality gap along the ray: c.v_x - b.v_y.

    Nonpositive for every phase; strictly negative whenever the ray is
    nonzero (it equals -||v||^2 / eta).  On box problems the effective
    right-hand side of the phase replaces b.
    """
    lp = as_box(problem)
    return float(lp.c @ spiral.direction_x) - float(
        spiral.rhs_effective @ spiral.direction_y
    )


def phases_to_json(phases: list[Phase], problem=None) -> str:
    """Serialize phases (center, ray, gap drift, events) as JSON."""
    lp = as_box(problem) if problem is not None else None
    out = []
    for ph in phases:
        entry = {
            "start": int(ph.start_iter),
            "end": int(ph.end_iter),
            "basic_indices": [int(i) for i in ph.basis.basic],
            "center": {
                "x": [float(v) for v in ph.spiral.center_x],
                "y": [float(v) for v in ph.spiral.center_y],
            },
            "direction": {
                "x": [float(v) for v in ph.spiral.direction_x],
                "y": [float(v) for v in ph.spiral.direction_y],
            },
            "gap_drift": gap_drift(lp, ph.spiral) if lp is not None else None,
            "event": None,
        }
        if ph.event is not None:
            entry["event"] = {
                "iter": int(ph.event.iter),
                "leaving": [int(i) for i in ph.event.leaving],
                "entering": [int(i) for i in ph.event.entering],
                "labels": {str(k): v for k, v in (ph.event.labels or {}).items()},
            }
        out.append(entry)
    return json.dumps(out, indent=2)
