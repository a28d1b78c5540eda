"""Path evaluation and the spline motion planner.

A candidate path is a clamped B-spline whose interior control points live in
the axis-aligned box spanned by the leg endpoints; the endpoints themselves
are anchored. Sampled states carry heading, pitch and the velocity
composition with the local current:

    psi   = atan2(dY, dX)
    theta = atan2(-dZ, hypot(dX, dY))
    u = |v| cos(theta) cos(psi) + u_current
    v = |v| cos(theta) sin(psi) + v_current
    w = |v| sin(theta)

Violations are clamped excesses of depth, surge, sway and yaw-rate limits
plus a collision flag (coast cell or inside an obstacle's confidence
boundary), each scaled by its phi weight. The path cost is the chord-sum
length plus the q-weighted violation sum; the travel time is length / |v|.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from armpa.env.grid import TraversabilityGrid
from armpa.env.currents import CurrentField, current_at_batch
from armpa.env.obstacles import Obstacle, collision_boundary
from armpa.motion.spline import (
    DEFAULT_DEGREE, DEFAULT_SAMPLES, basis_matrix, path_length,
)
from armpa.optim import Problem, OptResult, EngineConfig, optimize, DEConfig

_EPS_LEN = 1e-12


@dataclass
class VehicleLimits:
    speed: float = 2.5                 # cruise speed |v|, m/s
    u_max: float = 2.7                 # surge ceiling, m/s
    sway_max: float = 0.5              # |sway| ceiling, m/s
    psi_rate_max_deg: float = 17.0     # yaw rate ceiling, deg/s
    theta_max_deg: float = 45.0        # pitch ceiling (informational)
    z_min: float = 0.0
    z_max: float = 100.0


@dataclass
class PathPhi:
    """Violation weights; collision dominates so infeasible paths sort last."""

    z_min: float = 10.0
    z_max: float = 10.0
    u: float = 5.0
    v: float = 5.0
    psi: float = 5.0
    collision: float = 1000.0

    def vector(self) -> np.ndarray:
        return np.array([self.z_min, self.z_max, self.u, self.v, self.psi,
                         self.collision])


@dataclass
class LambdaComponents:
    """Phi-weighted violation components; all zero iff the path is clean."""

    z_min: float = 0.0
    z_max: float = 0.0
    u: float = 0.0
    v: float = 0.0
    psi: float = 0.0
    collision: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.z_min, self.z_max, self.u, self.v, self.psi,
                         self.collision])

    @property
    def total_raw(self) -> float:
        return float(self.vector().sum())

    def is_clean(self) -> bool:
        return bool(np.all(self.vector() == 0.0))


@dataclass
class PathStates:
    """Per-segment kinematic states plus the raw position samples.

    positions has K+1 rows; the state arrays have one entry per segment,
    stamped at the segment start time.
    """

    positions: np.ndarray    # (K+1, 3)
    psi: np.ndarray          # (K,)
    theta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: np.ndarray            # (K,) timestamps at segment starts
    seg_len: np.ndarray      # (K,)

    def __len__(self) -> int:
        return len(self.psi)


@dataclass
class PathSolution:
    ctrl: np.ndarray         # (n, 3) control points
    degree: int
    positions: np.ndarray    # (M, 3) samples
    states: PathStates
    length: float
    duration: float          # length / speed
    lambdas: LambdaComponents
    cost: float
    engine: str = ""
    result: OptResult | None = dc_field(default=None, repr=False)


def wrap_angle(a: np.ndarray) -> np.ndarray:
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - a, 2.0 * np.pi)


def dedupe_positions(positions: np.ndarray) -> np.ndarray:
    p = np.asarray(positions, dtype=float)
    if len(p) < 2:
        return p
    keep = np.ones(len(p), dtype=bool)
    d = np.sqrt(((p[1:] - p[:-1]) ** 2).sum(axis=1))
    keep[1:] = d > _EPS_LEN
    return p[keep]


def path_kinematics(positions: np.ndarray, field: CurrentField | None,
                    limits: VehicleLimits, t0: float = 0.0) -> PathStates:
    """Per-segment attitude and body velocities along sampled positions.

    Zero-length segments are dropped first so no state is ill-defined.
    """
    p = dedupe_positions(positions)
    if len(p) < 2:
        empty = np.zeros(0)
        return PathStates(positions=p, psi=empty, theta=empty, u=empty,
                          v=empty, w=empty, t=empty, seg_len=empty)
    d = p[1:] - p[:-1]
    seg_len = np.sqrt((d ** 2).sum(axis=1))
    psi = np.arctan2(d[:, 1], d[:, 0])
    theta = np.arctan2(-d[:, 2], np.hypot(d[:, 0], d[:, 1]))
    if field is not None:
        cur = current_at_batch(field, p[:-1])
    else:
        cur = np.zeros((len(seg_len), 3))
    speed = limits.speed
    u = speed * np.cos(theta) * np.cos(psi) + cur[:, 0]
    v = speed * np.cos(theta) * np.sin(psi) + cur[:, 1]
    w = speed * np.sin(theta)
    t = t0 + np.concatenate([[0.0], np.cumsum(seg_len[:-1])]) / speed
    return PathStates(positions=p, psi=psi, theta=theta, u=u, v=v, w=w, t=t,
                      seg_len=seg_len)


def _psi_rate(psi: np.ndarray, seg_len: np.ndarray, speed: float) -> np.ndarray:
    """Yaw rate between consecutive segment states (rad/s)."""
    if len(psi) < 2:
        return np.zeros(0)
    dpsi = wrap_angle(psi[1:] - psi[:-1])
    dt = seg_len[:-1] / speed
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(dt > 0, dpsi / dt, 0.0)
    return rate


def path_violations(states: PathStates, grid: TraversabilityGrid | None,
                    obstacles: list[Obstacle] | None, limits: VehicleLimits,
                    phi: PathPhi | None = None,
                    elapsed: float = 0.0) -> LambdaComponents:
    """Phi-weighted violation components over a path.

    Depth and collision checks run over every position sample; surge and
    sway over the segment states; yaw rate over consecutive state pairs.
    """
    if phi is None:
        phi = PathPhi()
    p = states.positions
    z = p[:, 2]
    lz_min = float(np.maximum(limits.z_min - z, 0.0).sum())
    lz_max = float(np.maximum(z - limits.z_max, 0.0).sum())
    lu = float(np.maximum(states.u - limits.u_max, 0.0).sum())
    lv = float(np.maximum(np.abs(states.v) - limits.sway_max, 0.0).sum())
    rate = np.degrees(np.abs(_psi_rate(states.psi, states.seg_len, limits.speed)))
    lpsi = float(np.maximum(rate - limits.psi_rate_max_deg, 0.0).sum())

    collided = False
    if grid is not None and len(p):
        vals = grid.values_at_batch(p[:, 0], p[:, 1])
        collided = bool(np.any(vals == 0.0))
    if not collided and obstacles:
        for ob in obstacles:
            bound = collision_boundary(ob, elapsed)
            dist = np.sqrt(((p - ob.center) ** 2).sum(axis=1))
            if np.any(dist <= bound):
                collided = True
                break

    return LambdaComponents(
        z_min=phi.z_min * lz_min,
        z_max=phi.z_max * lz_max,
        u=phi.u * lu,
        v=phi.v * lv,
        psi=phi.psi * lpsi,
        collision=phi.collision * (1.0 if collided else 0.0),
    )


def path_cost(length: float, lambdas: LambdaComponents,
              q: np.ndarray | None = None) -> float:
    """C = L + sum_i q_i * Lambda_i."""
    vec = lambdas.vector()
    if q is None:
        q = np.ones(len(vec))
    return float(length + (np.asarray(q, dtype=float) * vec).sum())


# -- batch evaluation ---------------------------------------------------------


def _assemble_ctrl(X: np.ndarray, pa: np.ndarray, pb: np.ndarray,
                   n_ctrl: int) -> np.ndarray:
    """(P, 3(n-2)) interior coordinates -> (P, n, 3) anchored control sets."""
    P = X.shape[0]
    ctrl = np.empty((P, n_ctrl, 3))
    ctrl[:, 0] = pa
    ctrl[:, -1] = pb
    ctrl[:, 1:-1] = X.reshape(P, n_ctrl - 2, 3)
    return ctrl


def _batch_path_cost(grid, field, obstacles, pa, pb, n_ctrl, degree, m,
                     limits: VehicleLimits, phi: PathPhi, q: np.ndarray,
                     elapsed: float):
    """Vectorised population evaluator, consistent with the scalar path."""
    B = basis_matrix(n_ctrl, degree, m)
    speed = limits.speed
    qv = np.asarray(q, dtype=float)
    ob_centers = np.array([ob.center for ob in (obstacles or [])])
    ob_bounds = np.array([collision_boundary(ob, elapsed)
                          for ob in (obstacles or [])])

    def batch(X: np.ndarray) -> np.ndarray:
        ctrl = _assemble_ctrl(np.asarray(X, dtype=float), pa, pb, n_ctrl)
        pos = np.einsum("mn,pnc->pmc", B, ctrl)
        d = pos[:, 1:] - pos[:, :-1]
        seg = np.sqrt((d ** 2).sum(axis=2))
        live = seg > _EPS_LEN
        length = seg.sum(axis=1)

        psi = np.arctan2(d[:, :, 1], d[:, :, 0])
        theta = np.arctan2(-d[:, :, 2], np.hypot(d[:, :, 0], d[:, :, 1]))
        P, K = seg.shape
        if field is not None:
            cur = current_at_batch(field, pos[:, :-1].reshape(-1, 3))
            cur = cur.reshape(P, K, 3)
        else:
            cur = np.zeros((P, K, 3))
        u = speed * np.cos(theta) * np.cos(psi) + cur[:, :, 0]
        v = speed * np.cos(theta) * np.sin(psi) + cur[:, :, 1]

        lu = (np.maximum(u - limits.u_max, 0.0) * live).sum(axis=1)
        lv = (np.maximum(np.abs(v) - limits.sway_max, 0.0) * live).sum(axis=1)

        dpsi = wrap_angle(psi[:, 1:] - psi[:, :-1])
        dt = seg[:, :-1] / speed
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.where(dt > 0, np.degrees(np.abs(dpsi)) / dt, 0.0)
        rate_ok = live[:, 1:] & live[:, :-1]
        lpsi = (np.maximum(rate - limits.psi_rate_max_deg, 0.0) * rate_ok
                ).sum(axis=1)

        z = pos[:, :, 2]
        lz_min = np.maximum(limits.z_min - z, 0.0).sum(axis=1)
        lz_max = np.maximum(z - limits.z_max, 0.0).sum(axis=1)

        collided = np.zeros(P, dtype=bool)
        if grid is not None:
            vals = grid.values_at_batch(pos[:, :, 0].ravel(),
                                        pos[:, :, 1].ravel()).reshape(P, m)
            collided |= np.any(vals == 0.0, axis=1)
        if len(ob_centers):
            dist = np.sqrt(((pos[:, :, None, :] - ob_centers[None, None])
                            ** 2).sum(axis=3))
            collided |= np.any(dist <= ob_bounds[None, None, :], axis=(1, 2))

        lam = np.stack([lz_min, lz_max, lu, lv, lpsi,
                        collided.astype(float)], axis=1)
        lam *= phi.vector()[None, :]
        return length + (lam * qv[None, :]).sum(axis=1)

    return batch


# -- planning -----------------------------------------------------------------


def _endpoint_ok(grid: TraversabilityGrid | None, p: np.ndarray) -> bool:
    if grid is None:
        return True
    if not grid.in_bounds(p[0], p[1]):
        return False
    return grid.value_at(p[0], p[1]) > 0.0


def _evaluate_solution(ctrl, degree, m, grid, field, obstacles, limits, phi,
                       q, elapsed, engine="", result=None) -> PathSolution:
    from armpa.motion.spline import sample_positions

    positions = sample_positions(ctrl, degree, m)
    states = path_kinematics(positions, field, limits)
    lambdas = path_violations(states, grid, obstacles, limits, phi, elapsed)
    length = path_length(states.positions)
    cost = path_cost(length, lambdas, q)
    return PathSolution(ctrl=np.asarray(ctrl, dtype=float), degree=degree,
                        positions=positions, states=states, length=length,
                        duration=length / limits.speed, lambdas=lambdas,
                        cost=cost, engine=engine, result=result)


def plan_path(grid: TraversabilityGrid | None, field: CurrentField | None,
              obstacles: list[Obstacle] | None, pa, pb,
              limits: VehicleLimits | None = None,
              cfg: EngineConfig | None = None,
              rng: np.random.Generator | None = None,
              n_ctrl: int = 5, degree: int = DEFAULT_DEGREE,
              m_samples: int = DEFAULT_SAMPLES,
              phi: PathPhi | None = None, q: np.ndarray | None = None,
              elapsed: float = 0.0,
              warm_start: np.ndarray | None = None,
              clock=None) -> PathSolution:
    """Plan one leg from pa to pb through the given environment.

    Interior control points are searched inside the box spanned by the
    endpoints. Raises ValueError when an endpoint sits on a coast cell.
    """
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    if limits is None:
        limits = VehicleLimits()
    if phi is None:
        phi = PathPhi()
    if q is None:
        q = np.ones(6)
    if cfg is None:
        cfg = DEConfig(pop_size=120, cross_rate=0.4)
    if rng is None:
        rng = np.random.default_rng()
    if n_ctrl < 3:
        raise ValueError("need at least 3 control points (2 are anchored)")
    if not _endpoint_ok(grid, pa) or not _endpoint_ok(grid, pb):
        raise ValueError("leg endpoints must sit on traversable cells")

    if np.linalg.norm(pb - pa) < _EPS_LEN:
        ctrl = np.tile(pa, (n_ctrl, 1))
        return _evaluate_solution(ctrl, degree, m_samples, grid, field,
                                  obstacles, limits, phi, q, elapsed)

    lo = np.minimum(pa, pb)
    hi = np.maximum(pa, pb)
    dim = 3 * (n_ctrl - 2)
    lower = np.tile(lo, n_ctrl - 2)
    upper = np.tile(hi, n_ctrl - 2)
    batch = _batch_path_cost(grid, field, obstacles, pa, pb, n_ctrl, degree,
                             m_samples, limits, phi, q, elapsed)
    problem = Problem(
        dimension=dim, lower=lower, upper=upper,
        cost=lambda x: float(batch(np.atleast_2d(x))[0]),
        batch_cost=batch,
    )
    if warm_start is None:
        # Straight-line interior seeds help every engine out of the gate.
        fracs = np.linspace(0.0, 1.0, n_ctrl)[1:-1]
        straight = (pa[None, :] + fracs[:, None] * (pb - pa)[None, :]).ravel()
        warm_start = straight[None, :]
    result = optimize(problem, cfg, rng, warm_start=warm_start, clock=clock)
    ctrl = _assemble_ctrl(result.best_x[None, :], pa, pb, n_ctrl)[0]
    sol = _evaluate_solution(ctrl, degree, m_samples, grid, field, obstacles,
                             limits, phi, q, elapsed,
                             engine=type(cfg).__name__.removesuffix("Config").lower(),
                             result=result)
    return sol


def replan_path(prev: PathSolution, grid, field, obstacles, vehicle_pos, pb,
                limits: VehicleLimits | None = None,
                cfg: EngineConfig | None = None,
                rng: np.random.Generator | None = None,
                m_samples: int = DEFAULT_SAMPLES,
                phi: PathPhi | None = None, q: np.ndarray | None = None,
                elapsed: float = 0.0, clock=None) -> PathSolution:
    """Re-plan a leg from the vehicle's current position.

    The previous control points (re-anchored to the new start) seed the
    search; if the fresh search cannot beat the re-anchored previous path
    under the new environment, the previous path is kept.
    """
    if limits is None:
        limits = VehicleLimits()
    if phi is None:
        phi = PathPhi()
    if q is None:
        q = np.ones(6)
    vehicle_pos = np.asarray(vehicle_pos, dtype=float)
    pb = np.asarray(pb, dtype=float)
    n_ctrl = len(prev.ctrl)
    degree = prev.degree

    lo = np.minimum(vehicle_pos, pb)
    hi = np.maximum(vehicle_pos, pb)
    interior = np.clip(prev.ctrl[1:-1], lo, hi).ravel()

    prev_candidate = _assemble_ctrl(interior[None, :], vehicle_pos, pb, n_ctrl)[0]
    prev_sol = _evaluate_solution(prev_candidate, degree, m_samples, grid,
                                  field, obstacles, limits, phi, q, elapsed,
                                  engine=prev.engine)

    new_sol = plan_path(grid, field, obstacles, vehicle_pos, pb, limits=limits,
                        cfg=cfg, rng=rng, n_ctrl=n_ctrl, degree=degree,
                        m_samples=m_samples, phi=phi, q=q, elapsed=elapsed,
                        warm_start=interior[None, :], clock=clock)
    if new_sol.cost <= prev_sol.cost:
        return new_sol
    return prev_sol


# -- serialisation ------------------------------------------------------------


def path_to_dict(sol: PathSolution) -> dict:
    return {
        "ctrl": sol.ctrl.tolist(),
        "degree": sol.degree,
        "length": sol.length,
        "duration": sol.duration,
        "cost": sol.cost,
        "engine": sol.engine,
        "lambdas": {
            "z_min": sol.lambdas.z_min, "z_max": sol.lambdas.z_max,
            "u": sol.lambdas.u, "v": sol.lambdas.v, "psi": sol.lambdas.psi,
            "collision": sol.lambdas.collision,
        },
        "m_samples": len(sol.positions),
    }


def path_from_dict(d: dict, grid=None, field=None, obstacles=None,
                   limits: VehicleLimits | None = None,
                   phi: PathPhi | None = None,
                   q: np.ndarray | None = None) -> PathSolution:
    """Rebuild a solution from its control points; derived fields are
    recomputed so the loaded object is internally consistent."""
    if limits is None:
        limits = VehicleLimits()
    sol = _evaluate_solution(np.array(d["ctrl"]), d["degree"], d["m_samples"],
                             grid, field, obstacles, limits,
                             phi or PathPhi(), q if q is not None else np.ones(6),
                             0.0, engine=d.get("engine", ""))
    return sol


def save_path_json(sol: PathSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(path_to_dict(sol), fh, sort_keys=True, indent=1)


def save_path_csv(sol: PathSolution, path) -> None:
    """Per-state CSV: sample positions with segment kinematics."""
    st = sol.states
    with open(path, "w") as fh:
        fh.write("t,x,y,z,psi,theta,u,v,w\n")
        for k in range(len(st)):
            p = st.positions[k]
            fh.write(",".join(repr(float(val)) for val in (
                st.t[k], p[0], p[1], p[2], st.psi[k], st.theta[k], st.u[k],
                st.v[k], st.w[k])) + "\n")
