"""Finite-difference oracle for the scalar conservation-form equation.

An explicit Lax-Friedrichs scheme solves d/dt f = xibar(d/dx f) on
[0, X] for scalar, nondecreasing, Lipschitz initial data.  No boundary
condition is needed at x = 0 (the one-sided forward difference is valid
because f_x >= 0 and xibar is nondecreasing there); at x = X the profile
is extended linearly with the Lipschitz cap P.  The module also
evaluates the penalized comparison functional
u - v - M (|x| + V t - R)_+ whose global supremum should sit at t = 0
for ordered solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import InvalidInputError
from .nonlinearity import Regularization


def xibar_deriv_sup(reg: Regularization, lo: float, hi: float) -> float:
    """sup of |xibar'| over slopes in [lo, hi] (D = 1).

    xibar is convex, so the sup sits at an endpoint; one-sided
    differences at the endpoints bound the derivative.
    """
    eps = 1e-7
    cands = []
    for p in (lo, hi):
        cands.append(abs(reg(p + eps) - reg(p)) / eps)
        cands.append(abs(reg(p) - reg(p - eps)) / eps)
    return float(max(cands))


@dataclass(frozen=True)
class FdGrid:
    """Uniform space-time grid for the scalar oracle with a CFL guard."""

    x_max: float
    dx: float
    dt: float
    slope_cap: float  # P: Lipschitz cap of the initial datum

    def validate(self, reg: Regularization):
        speed = xibar_deriv_sup(reg, 0.0, self.slope_cap)
        cfl = self.dt * speed / self.dx
        if cfl > 0.5 + 1e-12:
            raise InvalidInputError(f"CFL ratio {cfl:.3f} exceeds 1/2")
        return cfl

    @classmethod
    def make(cls, reg: Regularization, x_max: float, dx: float,
             slope_cap: float, safety: float = 0.9) -> "FdGrid":
        speed = max(xibar_deriv_sup(reg, 0.0, slope_cap), 1e-12)
        dt = safety * 0.5 * dx / speed
        return cls(x_max, dx, dt, slope_cap)

    @property
    def xs(self) -> np.ndarray:
        n = int(round(self.x_max / self.dx))
        return np.linspace(0.0, n * self.dx, n + 1)


@dataclass(frozen=True)
class FdSurface:
    """Scalar solution snapshots: values[i, k] = f(times[i], xs[k])."""

    times: np.ndarray
    xs: np.ndarray
    values: np.ndarray
    provenance: str

    def at(self, t: float, x: float) -> float:
        """Bilinear interpolation inside the tabulated rectangle."""
        ti = np.searchsorted(self.times, t) - 1
        ti = int(np.clip(ti, 0, self.times.size - 2))
        a = (t - self.times[ti]) / (self.times[ti + 1] - self.times[ti])
        row = (1 - a) * self.values[ti] + a * self.values[ti + 1]
        return float(np.interp(x, self.xs, row))


def fd_solve(phi, reg: Regularization, grid: FdGrid, T: float,
             n_snapshots: int = 33) -> FdSurface:
    """Lax-Friedrichs solution of d/dt f = xibar(d/dx f), f(0, .) = phi.

    ``phi`` must be vectorized, nondecreasing and Lipschitz with
    constant <= grid.slope_cap.  Snapshot rows are stored at
    ``n_snapshots`` evenly spaced times including 0 and T.
    """
    grid.validate(reg)
    xs = grid.xs
    u = np.asarray(phi(xs), dtype=float).copy()
    if np.any(np.diff(u) < -1e-12):
        raise InvalidInputError("initial datum must be nondecreasing")
    if np.max(np.abs(np.diff(u))) > grid.slope_cap * grid.dx * (1 + 1e-8):
        raise InvalidInputError("initial datum exceeds the slope cap")
    n_steps = int(np.ceil(T / grid.dt))
    dt = T / n_steps if n_steps > 0 else grid.dt
    snap_at = np.unique(np.round(np.linspace(0, n_steps, n_snapshots)).astype(int))
    times, rows = [], []
    P = grid.slope_cap
    for step in range(n_steps + 1):
        if step in snap_at:
            times.append(step * dt)
            rows.append(u.copy())
        if step == n_steps:
            break
        up = np.empty_like(u)
        ghost_hi = u[-1] + P * grid.dx
        left = u[:-1]
        right = np.concatenate((u[2:], [ghost_hi]))
        slope = (right - left) / (2.0 * grid.dx)
        up[1:] = 0.5 * (right + left) + dt * reg.eval_vec(slope)
        # one-sided forward difference at x = 0: no boundary data needed
        up[0] = u[0] + dt * reg((u[1] - u[0]) / grid.dx)
        u = up
    return FdSurface(np.asarray(times), xs, np.asarray(rows), "fd_oracle")


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of the penalized comparison functional scan."""

    M: float
    R: float
    V: float
    t_star: float
    x_star: float
    margin: float
    passed: bool

    def to_json(self):
        return {"M": self.M, "R": self.R, "V": self.V, "t_star": self.t_star,
                "x_star": self.x_star, "margin": self.margin, "pass": self.passed}


def comparison_check(u: FdSurface, v: FdSurface, L: float, reg: Regularization,
                     tol: float, M: float = None, R: float = None) -> ComparisonReport:
    """Scan u - v - M (|x| + V t - R)_+ for a global max away from t = 0.

    ``L`` bounds both spatial Lipschitz constants and M must exceed 2L;
    V is the Lipschitz constant of xibar on the slope ball of radius
    2L + 3M.  The report passes when the sup over t > 0 exceeds the
    t = 0 sup by at most ``tol``.
    """
    if u.xs.shape != v.xs.shape or not np.allclose(u.xs, v.xs):
        raise InvalidInputError("surfaces live on different spatial grids")
    if u.times.shape != v.times.shape or not np.allclose(u.times, v.times):
        raise InvalidInputError("surfaces live on different time grids")
    if M is None:
        M = 2.0 * L + 0.5
    if M <= 2.0 * L:
        raise InvalidInputError("comparison requires M > 2L")
    B = 2.0 * L + 3.0 * M
    V = xibar_deriv_sup(reg, -B, B)
    if R is None:
        R = 0.5 * float(u.xs[-1])
    pen = M * np.maximum(np.abs(u.xs)[None, :] + V * u.times[:, None] - R, 0.0)
    W = u.values - v.values - pen
    sup0 = float(W[0].max())
    sup_pos = float(W[1:].max()) if W.shape[0] > 1 else -np.inf
    margin = sup_pos - sup0
    if margin <= tol:
        # supremum effectively achieved on the initial slice
        t_star, x_star = 0.0, float(u.xs[int(np.argmax(W[0]))])
    else:
        ti, xi = np.unravel_index(int(np.argmax(W)), W.shape)
        t_star, x_star = float(u.times[ti]), float(u.xs[xi])
    return ComparisonReport(float(M), float(R), float(V), t_star, x_star,
                            float(margin), bool(margin <= tol))
