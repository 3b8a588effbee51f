"""Unicycle waypoint-planning environment: grid world, safety barrier,
five-step rollout feasibility, and the penalty-augmented waypoint cost,
exposed as a problem family for amortized gap certification.

The workspace is [-1.6, 1.6] x [-1.2, 1.2] overlaid with an 8x5 cell grid
(cells 0.4 m x 0.48 m).  An environment fixes 8 static obstacle cells,
3 goal cells, the controlled agent's start state and an uncontrolled agent's
position.  A candidate waypoint is scored by the grid shortest-path distance
from its cell to the nearest goal, replaced by a flat penalty of 100 whenever
driving toward it with the waypoint controller would break the safety barrier
within the next 5 steps.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng
from .percentile import DomainError, Problem
from .repetitive import ProblemFamily

X_MIN, X_MAX = -1.6, 1.6
Y_MIN, Y_MAX = -1.2, 1.2
COLS, ROWS = 8, 5
CELL_W = (X_MAX - X_MIN) / COLS   # 0.4
CELL_H = (Y_MAX - Y_MIN) / ROWS   # 0.48
N_OBSTACLES = 8
N_GOALS = 3
UNREACHABLE = 1e6

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WaypointProblemParams:
    horizon: int = 5
    dt: float = 0.033
    penalty: float = 100.0
    annulus_min: float = 0.05
    annulus_max: float = 0.2
    safety_radius: float = 0.18
    obstacle_barrier: float = -5.0
    k_v: float = 2.0
    k_omega: float = 4.0
    v_max: float = 0.2
    omega_max: float = math.pi


@dataclass(frozen=True)
class UnicycleState:
    x: float
    y: float
    theta: float  # wrapped to [0, 2*pi)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class ControlInput:
    v: float
    omega: float


def _wrap_02pi(theta):
    return np.mod(theta, TWO_PI)


def _wrap_pi(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle) + math.pi, TWO_PI) - math.pi
    return np.where(wrapped == -math.pi, math.pi, wrapped)


def cell_of(x, y):
    """Grid cell (col, row) of a planar point; boundary points go to the
    lower-index cell; (-1, -1) marks points outside the workspace."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (x >= X_MIN) & (x <= X_MAX) & (y >= Y_MIN) & (y <= Y_MAX)
    col = np.clip(np.ceil((x - X_MIN) / CELL_W).astype(np.intp) - 1, 0, COLS - 1)
    row = np.clip(np.ceil((y - Y_MIN) / CELL_H).astype(np.intp) - 1, 0, ROWS - 1)
    col = np.where(inside, col, -1)
    row = np.where(inside, row, -1)
    if col.ndim == 0:
        return int(col), int(row)
    return col, row


def cell_center(col: int, row: int) -> tuple[float, float]:
    return (X_MIN + (col + 0.5) * CELL_W, Y_MIN + (row + 0.5) * CELL_H)


@dataclass(frozen=True)
class Environment:
    """One sampled world: obstacle cells, goal cells, agent start states."""

    x_a: np.ndarray            # (3,) controlled agent state
    x_o: np.ndarray            # (2,) uncontrolled agent position
    so_cells: tuple[tuple[int, int], ...]
    goal_cells: tuple[tuple[int, int], ...]
    seed: int
    rejections: int = 0
    so_mask: np.ndarray = field(repr=False, default=None)
    goal_dist: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        so = set(self.so_cells)
        goals = set(self.goal_cells)
        if so & goals:
            raise DomainError("obstacle and goal cells must be disjoint")
        mask = np.zeros((ROWS, COLS), dtype=bool)
        for c, r in so:
            mask[r, c] = True
        object.__setattr__(self, "so_mask", mask)
        object.__setattr__(self, "goal_dist",
                           _goal_distance_field(mask, self.goal_cells))


def _goal_distance_field(so_mask: np.ndarray,
                         goal_cells) -> np.ndarray:
    """Multi-source Dijkstra from the goal cells over obstacle-free cells,
    4-connected, edge weight = distance between adjacent cell centers."""
    dist = np.full((ROWS, COLS), UNREACHABLE)
    heap = []
    for c, r in goal_cells:
        dist[r, c] = 0.0
        heapq.heappush(heap, (0.0, r, c))
    while heap:
        d, r, c = heapq.heappop(heap)
        if d > dist[r, c]:
            continue
        for dr, dc, w in ((0, 1, CELL_W), (0, -1, CELL_W),
                          (1, 0, CELL_H), (-1, 0, CELL_H)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < ROWS and 0 <= nc < COLS and not so_mask[nr, nc]:
                nd = d + w
                if nd < dist[nr, nc]:
                    dist[nr, nc] = nd
                    heapq.heappush(heap, (nd, nr, nc))
    dist[so_mask] = UNREACHABLE
    return dist


def dynamics_step(state: UnicycleState, control: ControlInput,
                  params: WaypointProblemParams = WaypointProblemParams()
                  ) -> UnicycleState:
    """One forward-Euler unicycle step; heading wraps, position is unclamped."""
    return UnicycleState(
        x=state.x + control.v * math.cos(state.theta) * params.dt,
        y=state.y + control.v * math.sin(state.theta) * params.dt,
        theta=float(_wrap_02pi(state.theta + control.omega * params.dt)),
    )


def lyapunov_controller(state: UnicycleState, waypoint,
                        params: WaypointProblemParams = WaypointProblemParams()
                        ) -> ControlInput:
    """Proportional heading/velocity law saturated to the input bounds.

    Forward speed scales with distance and the cosine of the heading error
    (negative cosine allows reversing); turn rate is proportional to the
    heading error.  At the waypoint the input is identically zero.
    """
    wx, wy = float(waypoint[0]), float(waypoint[1])
    dx, dy = wx - state.x, wy - state.y
    dist = math.hypot(dx, dy)
    if dist < 1e-6:
        return ControlInput(0.0, 0.0)
    e = float(_wrap_pi(math.atan2(dy, dx) - state.theta))
    v = max(-params.v_max, min(params.v_max, params.k_v * dist * math.cos(e)))
    omega = max(-params.omega_max, min(params.omega_max, params.k_omega * e))
    return ControlInput(v, omega)


def barrier(x_a, x_o, env: Environment,
            params: WaypointProblemParams = WaypointProblemParams()) -> float:
    """Safety margin: the obstacle value inside a static-obstacle cell, else
    planar distance to the uncontrolled agent minus the safety radius."""
    a = np.asarray(x_a, dtype=float).ravel()
    col, row = cell_of(a[0], a[1])
    if col >= 0 and env.so_mask[row, col]:
        return params.obstacle_barrier
    o = np.asarray(x_o, dtype=float).ravel()
    return float(math.hypot(a[0] - o[0], a[1] - o[1]) - params.safety_radius)


def _barrier_batch(x, y, env: Environment, params) -> np.ndarray:
    col, row = cell_of(x, y)
    valid = col >= 0
    in_so = np.zeros_like(valid)
    in_so[valid] = env.so_mask[row[valid], col[valid]]
    d = np.hypot(x - env.x_o[0], y - env.x_o[1]) - params.safety_radius
    return np.where(in_so, params.obstacle_barrier, d)


def _rollout_barriers(x_k, waypoints: np.ndarray, env: Environment,
                      params: WaypointProblemParams) -> np.ndarray:
    """Simulate the controller toward each waypoint; (m, horizon) barrier
    values at the predicted states (uncontrolled agent held static)."""
    w = np.atleast_2d(np.asarray(waypoints, dtype=float))
    m = len(w)
    x = np.full(m, float(x_k[0]))
    y = np.full(m, float(x_k[1]))
    th = np.full(m, float(x_k[2]))
    out = np.empty((m, params.horizon))
    for j in range(params.horizon):
        dx = w[:, 0] - x
        dy = w[:, 1] - y
        dist = np.hypot(dx, dy)
        e = _wrap_pi(np.arctan2(dy, dx) - th)
        v = np.clip(params.k_v * dist * np.cos(e), -params.v_max, params.v_max)
        om = np.clip(params.k_omega * e, -params.omega_max, params.omega_max)
        hold = dist < 1e-6
        v = np.where(hold, 0.0, v)
        om = np.where(hold, 0.0, om)
        x = x + v * np.cos(th) * params.dt
        y = y + v * np.sin(th) * params.dt
        th = _wrap_02pi(th + om * params.dt)
        out[:, j] = _barrier_batch(x, y, env, params)
    return out


def rollout_feasible(x_k, waypoint, env: Environment,
                     params: WaypointProblemParams = WaypointProblemParams()
                     ) -> bool:
    """True iff the barrier stays nonnegative at every predicted step."""
    x_k = _state_array(x_k)
    h = _rollout_barriers(x_k, np.asarray(waypoint, dtype=float)[None, :],
                          env, params)
    return bool((h >= 0.0).all())


def shortest_goal_distance(waypoint, env: Environment) -> float:
    """Grid shortest-path distance from the waypoint's cell to the nearest
    goal cell; the unreachable sentinel for obstacle or cut-off cells."""
    w = np.asarray(waypoint, dtype=float).ravel()
    col, row = cell_of(w[0], w[1])
    if col < 0:
        return UNREACHABLE
    return float(env.goal_dist[row, col])


def augmented_cost(waypoint, env: Environment, x_k=None,
                   params: WaypointProblemParams = WaypointProblemParams()
                   ) -> float:
    """Shortest-path-to-goal score, replaced by the flat penalty when the
    rollout is unsafe or the waypoint's cell is unreachable.  Always in
    [0, penalty]."""
    x_k = env.x_a if x_k is None else _state_array(x_k)
    return float(augmented_cost_batch(
        np.asarray(waypoint, dtype=float)[None, :], env, x_k, params)[0])


def augmented_cost_batch(waypoints: np.ndarray, env: Environment, x_k=None,
                         params: WaypointProblemParams = WaypointProblemParams()
                         ) -> np.ndarray:
    w = np.atleast_2d(np.asarray(waypoints, dtype=float))
    x_k = env.x_a if x_k is None else _state_array(x_k)
    h = _rollout_barriers(x_k, w, env, params)
    feasible = (h >= 0.0).all(axis=1)
    col, row = cell_of(w[:, 0], w[:, 1])
    s = np.full(len(w), UNREACHABLE)
    ok = col >= 0
    s[ok] = env.goal_dist[row[ok], col[ok]]
    feasible &= s < UNREACHABLE
    return np.where(feasible, s, params.penalty)


def _state_array(state) -> np.ndarray:
    if isinstance(state, UnicycleState):
        return state.as_array()
    return np.asarray(state, dtype=float).ravel()


@dataclass(frozen=True)
class AnnulusSpace:
    """Waypoint ring around a planar point, intersected with the workspace.

    Radius is drawn by the inverse transform on radius squared (uniform by
    area) and the angle uniformly; draws falling outside the workspace box are
    replaced from per-round refill blocks, so sample i stays a pure function
    of (seed, i).
    """

    center: np.ndarray
    r_min: float = 0.05
    r_max: float = 0.2

    def __init__(self, center, r_min: float = 0.05, r_max: float = 0.2):
        c = np.asarray(center, dtype=float).ravel()[:2]
        if not (0.0 <= r_min < r_max):
            raise DomainError("need 0 <= r_min < r_max")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "r_min", float(r_min))
        object.__setattr__(self, "r_max", float(r_max))

    @property
    def cardinality(self) -> None:
        return None

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.maximum(self.center - self.r_max, [X_MIN, Y_MIN])
        hi = np.minimum(self.center + self.r_max, [X_MAX, Y_MAX])
        return lo, hi

    def _candidates(self, u: np.ndarray) -> np.ndarray:
        r = np.sqrt(self.r_min**2 + u[:, 0] * (self.r_max**2 - self.r_min**2))
        phi = TWO_PI * u[:, 1]
        return self.center + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)

    def _in_box(self, w: np.ndarray) -> np.ndarray:
        return ((w[:, 0] >= X_MIN) & (w[:, 0] <= X_MAX)
                & (w[:, 1] >= Y_MIN) & (w[:, 1] <= Y_MAX))

    def sample(self, seed: int, n: int, path: tuple[int, ...] = (),
               max_rounds: int = 256) -> np.ndarray:
        out = self._candidates(_rng.uniform_block(seed, path, n, 2))
        pending = ~self._in_box(out)
        round_no = 0
        while pending.any():
            round_no += 1
            if round_no >= max_rounds:
                raise RuntimeError("annulus sampler exceeded its rejection cap; "
                                   "the ring barely intersects the workspace")
            refill = self._candidates(
                _rng.uniform_block(seed, (*path, round_no), n, 2))
            out[pending] = refill[pending]
            pending &= ~self._in_box(out)
        return out

    def contains(self, decision, tol: float = 1e-9) -> bool:
        w = np.asarray(decision, dtype=float).ravel()
        r = math.hypot(w[0] - self.center[0], w[1] - self.center[1])
        return (self.r_min - tol <= r <= self.r_max + tol
                and X_MIN <= w[0] <= X_MAX and Y_MIN <= w[1] <= Y_MAX)

    def project(self, point) -> np.ndarray:
        w = np.asarray(point, dtype=float).ravel()[:2]
        v = w - self.center
        r = math.hypot(v[0], v[1])
        if r < 1e-12:
            v, r = np.array([1.0, 0.0]), 1.0
        scaled = self.center + v * (min(max(r, self.r_min), self.r_max) / r)
        return np.clip(scaled, [X_MIN, Y_MIN], [X_MAX, Y_MAX])


def waypoint_sampler(x_k, seed: int, n: int = 1,
                     params: WaypointProblemParams = WaypointProblemParams()
                     ) -> np.ndarray:
    """n waypoints uniform by area over the ring around the agent's position
    intersected with the workspace."""
    s = _state_array(x_k)
    space = AnnulusSpace(s[:2], params.annulus_min, params.annulus_max)
    return space.sample(seed, n)


def sample_environment(seed: int, max_rejections: int = 10_000,
                       n_obstacles: int = N_OBSTACLES,
                       n_goals: int = N_GOALS) -> Environment:
    """Rejection-sample world configurations until the invariants hold:
    distinct obstacle/goal cells, both agents outside them, and a 4-connected
    obstacle-free path from the controlled agent's cell to some goal."""
    rng = _rng.stream(seed, _rng.ENVIRONMENT)
    for attempt in range(max_rejections):
        flat = rng.choice(ROWS * COLS, size=n_obstacles + n_goals, replace=False)
        cells = [(int(f) % COLS, int(f) // COLS) for f in flat]
        so = tuple(cells[:n_obstacles])
        goals = tuple(cells[n_obstacles:])
        blocked = set(so) | set(goals)
        ax = rng.uniform(X_MIN, X_MAX)
        ay = rng.uniform(Y_MIN, Y_MAX)
        atheta = rng.uniform(0.0, TWO_PI)
        ox = rng.uniform(X_MIN, X_MAX)
        oy = rng.uniform(Y_MIN, Y_MAX)
        if cell_of(ax, ay) in blocked or cell_of(ox, oy) in blocked:
            continue
        env = Environment(x_a=np.array([ax, ay, atheta]), x_o=np.array([ox, oy]),
                          so_cells=so, goal_cells=goals, seed=int(seed),
                          rejections=attempt)
        acol, arow = cell_of(ax, ay)
        if env.goal_dist[arow, acol] < UNREACHABLE:
            return env
    raise RuntimeError(f"no feasible environment after {max_rejections} draws; "
                       "this indicates a configuration bug")


def mpc_family(params: WaypointProblemParams = WaypointProblemParams()
               ) -> ProblemFamily:
    """Waypoint problems over freshly sampled environments, ready for
    amortized gap certification."""

    def build(instance_seed: int) -> Problem:
        env = sample_environment(instance_seed)
        space = AnnulusSpace(env.x_a[:2], params.annulus_min, params.annulus_max)
        return Problem(
            space=space,
            cost=lambda w: augmented_cost(w, env, env.x_a, params),
            batch_cost=lambda w: augmented_cost_batch(w, env, env.x_a, params),
            name=f"mpc-waypoint-{instance_seed}",
        )

    return ProblemFamily(build=build, description="mpc-waypoint")


def write_environment(env: Environment, path) -> None:
    Path(path).write_text(json.dumps({
        "x_a": env.x_a.tolist(),
        "x_o": env.x_o.tolist(),
        "so_cells": [list(c) for c in env.so_cells],
        "goal_cells": [list(c) for c in env.goal_cells],
        "seed": env.seed,
    }, indent=2), encoding="utf-8")


def read_environment(path) -> Environment:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return Environment(
        x_a=np.asarray(raw["x_a"], dtype=float),
        x_o=np.asarray(raw["x_o"], dtype=float),
        so_cells=tuple((int(c), int(r)) for c, r in raw["so_cells"]),
        goal_cells=tuple((int(c), int(r)) for c, r in raw["goal_cells"]),
        seed=int(raw["seed"]),
    )


def write_rollout_trace(x_k, waypoint, env: Environment, path,
                        params: WaypointProblemParams = WaypointProblemParams()
                        ) -> None:
    """Debug CSV ``j,x,y,theta,v,omega,h`` of one predicted rollout."""
    state = UnicycleState(*_state_array(x_k))
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("j,x,y,theta,v,omega,h\n")
        for j in range(1, params.horizon + 1):
            u = lyapunov_controller(state, waypoint, params)
            state = dynamics_step(state, u, params)
            h = barrier(state.as_array(), env.x_o, env, params)
            fh.write(f"{j},{state.x!r},{state.y!r},{state.theta!r},"
                     f"{u.v!r},{u.omega!r},{h!r}\n")
