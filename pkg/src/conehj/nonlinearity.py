"""Covariance nonlinearities and their regularized / conjugated forms.

A covariance model xi is a polynomial with nonnegative coefficients
(scalar argument for D = 1, trace polynomial for D > 1) or a user
callable.  The regularization extends xi from the unit ball of the PSD
cone to a globally Lipschitz, proper (and convex, when xi is) function
by competing it against an affine function of the trace.  The monotone
conjugate xi*(r) = sup_{s >= 0} {r s - xi(s)} drives the
one-dimensional Hopf-Lax reduction, and H extends the integrated
nonlinearity off the cone as an infimum over dominating monotone
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .cones import (ConePoint, InvalidInputError, UnsupportedOperationError,
                    is_in_cone, sym)


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance function xi.

    ``poly`` maps exponent p >= 2 to the coefficient beta_p^2 >= 0.  For
    D = 1 the model is xi(r) = sum_p beta_p^2 r^p; for D > 1 it is the
    trace polynomial xi(a) = sum_p beta_p^2 tr(a^p).  Polynomial models
    with nonnegative coefficients are convex and proper on the PSD cone.
    """

    D: int = 1
    poly: dict = field(default_factory=dict)
    convex: bool = True
    proper: bool = True

    def __post_init__(self):
        for p, c in self.poly.items():
            if int(p) < 2:
                raise InvalidInputError("polynomial exponents must be >= 2")
            if c < 0:
                raise InvalidInputError("coefficients beta_p^2 must be >= 0")
        object.__setattr__(self, "poly", {int(p): float(c) for p, c in self.poly.items()})

    @classmethod
    def sk(cls, beta: float = 1.0) -> "CovarianceModel":
        """Sherrington-Kirkpatrick covariance xi(r) = beta r^2."""
        return cls(D=1, poly={2: beta})

    def __call__(self, a) -> float:
        if self.D == 1:
            r = float(np.asarray(a).reshape(()) if np.ndim(a) == 0 else
                      np.asarray(a).reshape(-1)[0] if np.size(a) == 1 else np.nan)
            if np.isnan(r):
                raise InvalidInputError("D = 1 model expects a scalar argument")
            return sum(c * r ** p for p, c in self.poly.items())
        m = sym(a)
        if m.shape[0] != self.D:
            raise InvalidInputError(f"expected a {self.D}x{self.D} matrix")
        evals = np.linalg.eigvalsh(m)
        return float(sum(c * np.sum(evals ** p) for p, c in self.poly.items()))

    def eval_vec(self, r: np.ndarray) -> np.ndarray:
        """Vectorized scalar evaluation (D = 1)."""
        if self.D != 1:
            raise UnsupportedOperationError("eval_vec requires D = 1")
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for p, c in self.poly.items():
            out += c * r ** p
        return out

    def deriv(self, r: float) -> float:
        """xi'(r) for D = 1 models."""
        if self.D != 1:
            raise UnsupportedOperationError("deriv requires D = 1")
        return sum(c * p * r ** (p - 1) for p, c in self.poly.items())

    def grad_sup_norm_on_trace_ball(self, radius: float) -> float:
        """sup of the spectral norm of the gradient over B_tr(radius)."""
        if self.D == 1:
            # xi' is nondecreasing on R_+ for nonnegative coefficients
            return self.deriv(radius)
        # trace polynomial: the sup is attained at a rank-one matrix with
        # full trace budget, where grad = sum_p c p a^(p-1)
        return float(sum(c * p * radius ** (p - 1) for p, c in self.poly.items()))

    def to_json(self):
        return {"D": self.D, "poly": {str(p): c for p, c in self.poly.items()},
                "convex": self.convex, "proper": self.proper}

    @classmethod
    def from_json(cls, obj) -> "CovarianceModel":
        return cls(D=int(obj.get("D", 1)),
                   poly={int(p): float(c) for p, c in obj["poly"].items()},
                   convex=bool(obj.get("convex", True)),
                   proper=bool(obj.get("proper", True)))


def xi_eval(model: CovarianceModel, a) -> float:
    return model(a)


@dataclass(frozen=True)
class Regularization:
    """Globally Lipschitz extension of xi from the unit ball of S^D_+.

    On the trace ball B_tr(2D) the value is max(xi(a), xi(0) + 2L(tr(a) - D));
    outside it is the affine branch alone.  L is the sup of the gradient
    norm of xi over B_tr(2D).
    """

    base: CovarianceModel
    L: float

    @property
    def D(self) -> int:
        return self.base.D

    @property
    def slope_cap(self) -> float:
        """Maximal slope along PSD directions (per unit trace): 2L."""
        return 2.0 * self.L

    def __call__(self, a) -> float:
        if self.D == 1:
            r = float(np.asarray(a).reshape(-1)[0])
            affine = self.base(0.0) + 2.0 * self.L * (r - 1.0)
            return max(self.base(r), affine) if r <= 2.0 else affine
        m = sym(a)
        tr = float(np.trace(m))
        affine = self.base(np.zeros((self.D, self.D))) + 2.0 * self.L * (tr - self.D)
        if tr <= 2.0 * self.D:
            return max(self.base(m), affine)
        return affine

    def eval_vec(self, r: np.ndarray) -> np.ndarray:
        if self.D != 1:
            raise UnsupportedOperationError("eval_vec requires D = 1")
        r = np.asarray(r, dtype=float)
        affine = self.base(0.0) + 2.0 * self.L * (r - 1.0)
        return np.where(r <= 2.0, np.maximum(self.base.eval_vec(r), affine), affine)

    def to_json(self):
        return {"base": self.base.to_json(), "L": self.L, "seam_trace": 2 * self.D}

    @classmethod
    def from_json(cls, obj) -> "Regularization":
        return cls(CovarianceModel.from_json(obj["base"]), float(obj["L"]))


def regularize(model: CovarianceModel, grid_samples: int = 10_000) -> Regularization:
    """Build the Lipschitz regularization of ``model``.

    For polynomial models L is exact (the gradient bound over B_tr(2D)
    has a closed form); callables would need a sampled estimate, which
    polynomial-only models never hit.
    """
    if not model.proper:
        raise InvalidInputError("regularization requires a proper model")
    L = model.grad_sup_norm_on_trace_ball(2.0 * model.D)
    return Regularization(model, L)


@dataclass(frozen=True)
class ConjugateModel:
    """Monotone conjugate xi*(r) = sup_{s>=0} {rs - xi(s)} for D = 1.

    For a regularized base the effective piece structure is cached: the
    regularization equals xi on [0, s0] and the affine branch beyond, so
    the conjugate is the Legendre transform of xi up to slope xi'(s0)
    and the chord through the seam from there to the slope cap 2L.
    """

    base: object  # CovarianceModel or Regularization

    def __post_init__(self):
        D = self.base.D if hasattr(self.base, "D") else 1
        if D != 1:
            raise UnsupportedOperationError("monotone conjugation requires D = 1")
        if self.is_regularized:
            s0 = _seam_point(self.base)
            object.__setattr__(self, "_s0", s0)
            object.__setattr__(self, "_r0", self.base.base.deriv(s0))

    @property
    def is_regularized(self) -> bool:
        return isinstance(self.base, Regularization)

    @property
    def model(self) -> CovarianceModel:
        return self.base.base if self.is_regularized else self.base

    def __call__(self, r: float) -> float:
        return xi_star(self, r)

    def eval_vec(self, r) -> np.ndarray:
        return xi_star_vec(self, np.asarray(r, dtype=float))


def _seam_point(reg: Regularization) -> float:
    """First s in [1, 2] where the affine branch overtakes xi.

    xi - affine is convex, nonnegative at s = 1 and nonpositive at
    s = 2, so the crossing is unique on [1, 2].
    """
    model = reg.base
    aff = lambda s: model(0.0) + 2.0 * reg.L * (s - 1.0)
    g = lambda s: model(s) - aff(s)
    if g(1.0) <= 0.0:
        return 1.0
    lo, hi = 1.0, 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _inv_deriv_vec(model: CovarianceModel, r: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Solve xi'(s) = r for s in [0, hi] by bisection (xi' nondecreasing)."""
    lo = np.zeros_like(r)
    hi = hi.copy()
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        d = np.zeros_like(mid)
        for p, c in model.poly.items():
            d += c * p * mid ** (p - 1)
        take = d < r
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    return 0.5 * (lo + hi)


def xi_star_vec(conj: ConjugateModel, r: np.ndarray) -> np.ndarray:
    """Vectorized monotone conjugate; exact up to bisection tolerance.

    Negative slopes give -xi(0) (the sup sits at s = 0 for nondecreasing
    xi).  Regularized bases cap the finite domain at the slope cap 2L;
    beyond it the conjugate is +inf.
    """
    r = np.asarray(r, dtype=float)
    model = conj.model
    out = np.full(r.shape, -model(0.0))
    pos = r > 0.0
    if not pos.any():
        return out
    rp = r[pos]
    if conj.is_regularized:
        s0, r0 = conj._s0, conj._r0
        vals = np.empty_like(rp)
        inner = rp <= r0
        if inner.any():
            s = _inv_deriv_vec(model, rp[inner], np.full(inner.sum(), s0))
            vals[inner] = rp[inner] * s - model.eval_vec(s)
        seam = (~inner) & (rp <= conj.base.slope_cap)
        if seam.any():
            vals[seam] = rp[seam] * s0 - model(s0)
        vals[rp > conj.base.slope_cap] = np.inf
        out[pos] = vals
        return out
    if set(model.poly) == {2}:
        out[pos] = rp ** 2 / (4.0 * model.poly[2])
        return out
    # superlinear polynomial: per-element bracket by doubling xi'(hi) >= r
    hi = np.ones_like(rp)
    for _ in range(60):
        need = np.array([model.deriv(h) for h in hi]) < rp
        if not need.any():
            break
        hi = np.where(need, 2.0 * hi, hi)
    s = _inv_deriv_vec(model, rp, hi)
    out[pos] = rp * s - model.eval_vec(s)
    return out


def xi_star(conj: ConjugateModel, r: float) -> float:
    """Scalar monotone conjugate xi*(r); see ``xi_star_vec``."""
    return float(xi_star_vec(conj, np.array([float(r)]))[0])


def bold_xi(x: ConePoint, model) -> float:
    """Integrated nonlinearity sum_k w_k xi(x_k) of a cone point."""
    w = x.partition.widths
    return float(sum(wk * model(xk) for wk, xk in zip(w, x.coords)))


# ---------------------------------------------------------------------------
# the extended nonlinearity H

def h_eval(kappa: ConePoint, reg: Regularization) -> float:
    """inf of the integrated regularization over monotone points dominating kappa.

    Feasible set: x in C^j with x - kappa in (C^j)*.  On the cone the
    infimum is attained at kappa itself.
    """
    if is_in_cone(kappa):
        return bold_xi(kappa, reg)
    if kappa.dim == 1:
        return _h_eval_1d(kappa, reg)
    raise UnsupportedOperationError(
        "H off the cone is implemented for D = 1 only")


def _h_eval_1d(kappa: ConePoint, reg: Regularization) -> float:
    w = kappa.partition.widths
    k = kappa.scalars
    n = k.size
    tail_k = np.cumsum((w * k)[::-1])[::-1]
    tail_w = np.cumsum(w[::-1])[::-1]

    def objective(x):
        return float(np.sum(w * reg.eval_vec(x)))

    # monotone nonneg chain + weighted tail-sum domination, all linear
    cons = []
    mono = np.zeros((n, n))
    mono[0, 0] = 1.0
    for i in range(1, n):
        mono[i, i] = 1.0
        mono[i, i - 1] = -1.0
    cons.append(optimize.LinearConstraint(mono, 0.0, np.inf))
    tails = np.triu(np.ones((n, n))) * w  # row i: sum_{j>=i} w_j x_j
    cons.append(optimize.LinearConstraint(tails, tail_k, np.inf))

    c0 = max(0.0, float(np.max(tail_k / tail_w)))
    x0 = np.full(n, c0)
    best = objective(x0)
    res = optimize.minimize(objective, x0, method="SLSQP", constraints=cons,
                            options={"maxiter": 300, "ftol": 1e-12})
    if res.success and _feasible_1d(res.x, w, tail_k):
        best = min(best, float(res.fun))
    return best


def _feasible_1d(x, w, tail_k, tol=1e-8):
    if x[0] < -tol or np.any(np.diff(x) < -tol):
        return False
    tails = np.cumsum((w * x)[::-1])[::-1]
    return bool(np.all(tails >= tail_k - tol))


def h_eval_bruteforce(kappa: ConePoint, reg: Regularization,
                      x_max: float = None, steps: int = 60,
                      zoom_rounds: int = 5) -> float:
    """Grid search over the feasible set; oracle for tiny D = 1 problems.

    A global scan locates the basin, then each zoom round re-grids a
    shrinking box around the incumbent; the objective is convex over a
    convex feasible set, so the zoom cannot leave the optimal basin.
    """
    if kappa.dim != 1:
        raise UnsupportedOperationError("brute force oracle requires D = 1")
    w = kappa.partition.widths
    k = kappa.scalars
    n = k.size
    if n > 3:
        raise UnsupportedOperationError("brute force oracle requires |j| <= 3")
    if x_max is None:
        x_max = max(2.0, 2.0 * np.abs(k).max(initial=0.0) + 1.0)
    tail_k = np.cumsum((w * k)[::-1])[::-1]
    tails_mat = np.triu(np.ones((n, n))).T

    def scan(axes):
        grids = np.meshgrid(*axes, indexing="ij")
        X = np.stack([g.ravel() for g in grids], axis=-1)
        ok = X[:, 0] >= 0
        for i in range(1, n):
            ok &= X[:, i] >= X[:, i - 1] - 1e-12
        ok &= np.all((X * w) @ tails_mat >= tail_k - 1e-12, axis=1)
        X = X[ok]
        vals = np.sum(w * reg.eval_vec(X), axis=1)
        i = int(np.argmin(vals))
        return float(vals[i]), X[i]

    best, arg = scan([np.linspace(0.0, x_max, steps)] * n)
    pad = 2.0 * x_max / (steps - 1)
    for _ in range(zoom_rounds):
        axes = [np.linspace(max(0.0, arg[i] - pad), arg[i] + pad, steps)
                for i in range(n)]
        val, cand = scan(axes)
        if val < best:
            best, arg = val, cand
        pad = 4.0 * pad / (steps - 1)
    return best
