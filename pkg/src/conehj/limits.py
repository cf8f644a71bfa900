"""Refinement studies across nested partitions.

A solution computed on a coarse partition j can be evaluated at fine
states by averaging them down: f_{j -> j'}(t, x) = f_j(t, p_j l_{j'} x).
The harness measures how fast these restricted values approach the
fine-level values along a dyadic chain, fits the empirical decay rate,
and audits the Lipschitz bounds that the formulas must preserve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import (ConePoint, InvalidInputError, Partition, StepPath,
                    lift_lj, project_pj)
from .nonlinearity import Regularization
from .solvers import (KIND_SEPARABLE, InitialCondition, SolutionSurface,
                      hopf_lax, hopf_lax_separable)


def lift_restrict(f_j, j: Partition, j_fine: Partition):
    """Wrap a coarse-level solver as a function of fine-level states.

    ``f_j`` maps (t, x in C^j) to a value; the result maps
    (t, x in C^{j_fine}) to f_j(t, p_j l_{j_fine} x).
    """
    if not j_fine.refines(j):
        raise InvalidInputError("partitions are not nested")

    def restricted(t: float, x: ConePoint) -> float:
        coarse = project_pj(lift_lj(x), j)
        return f_j(t, coarse)

    return restricted


def _solve(psi: InitialCondition, reg: Regularization, j: Partition,
           t: float, x: ConePoint) -> float:
    if psi.kind == KIND_SEPARABLE:
        return hopf_lax_separable(psi, reg, j, t, x)
    return hopf_lax(psi, reg, j, t, x)


@dataclass(frozen=True)
class RefinementStudy:
    """Per-level restriction errors along a dyadic chain and the fitted rate."""

    sizes: np.ndarray          # |j_n| for the coarse level of each gap
    errors: np.ndarray         # e_n = max over test points of the scaled gap
    slope: float               # least-squares slope of log e vs log |j| (last 3)
    constant: float            # fitted multiplicative constant
    test_count: int

    def to_json(self):
        return {"sizes": self.sizes.tolist(), "errors": self.errors.tolist(),
                "slope": self.slope, "constant": self.constant,
                "tests": self.test_count}


def rate_study(psi: InitialCondition, reg: Regularization, chain,
               test_points, fit_levels: int = 3) -> RefinementStudy:
    """Measure e_n = max |f_{j_n -> j_{n+1}} - f_{j_{n+1}}| / (t + |x|) per gap.

    ``chain`` is a nested list of partitions (each refining the last);
    ``test_points`` is a list of (t, mu) with mu a StepPath.  The decay
    exponent is fitted by least squares on the last ``fit_levels`` gaps.
    """
    chain = list(chain)
    if len(chain) < 3:
        raise InvalidInputError("rate study needs at least 3 levels")
    for a, b in zip(chain, chain[1:]):
        if not b.refines(a):
            raise InvalidInputError("chain partitions must be nested")
    sizes, errors = [], []
    for jc, jf in zip(chain, chain[1:]):
        worst = 0.0
        for t, mu in test_points:
            x_fine = project_pj(mu, jf)
            x_coarse = project_pj(lift_lj(x_fine), jc)
            f_fine = _solve(psi, reg, jf, t, x_fine)
            f_restricted = _solve(psi, reg, jc, t, x_coarse)
            scale = t + x_fine.norm()
            worst = max(worst, abs(f_restricted - f_fine) / max(scale, 1e-12))
        sizes.append(jc.size)
        errors.append(worst)
    sizes = np.asarray(sizes, dtype=float)
    errors = np.asarray(errors, dtype=float)
    tail_s, tail_e = sizes[-fit_levels:], errors[-fit_levels:]
    good = tail_e > 1e-13
    if good.sum() >= 2:
        A = np.vstack([np.log(tail_s[good]), np.ones(good.sum())]).T
        coef, *_ = np.linalg.lstsq(A, np.log(tail_e[good]), rcond=None)
        slope, logc = float(coef[0]), float(coef[1])
        constant = float(np.exp(logc))
    else:
        # errors at solver tolerance: exact projective consistency
        slope, constant = -np.inf, 0.0
    return RefinementStudy(sizes, errors, slope, constant, len(list(test_points)))


def seeded_test_points(seed: int, count: int = 32, radius: float = 4.0,
                       fine: int = 128, times=(0.25, 0.5, 1.0)):
    """Deterministic monotone step paths in the ball of the given radius.

    Returns (t, mu) pairs; mu lives on a fine uniform grid so every
    chain level is a strict coarsening.
    """
    rng = np.random.default_rng(seed)
    jf = Partition.uniform(fine)
    out = []
    for i in range(count):
        raw = np.cumsum(rng.exponential(1.0, fine))
        raw = raw / raw[-1] * rng.uniform(0.2, 1.0) * radius
        mu = StepPath(jf, raw[:, None, None])
        out.append((float(times[i % len(times)]), mu))
    return out


def lipschitz_audit(surface: SolutionSurface, psi: InitialCondition,
                    reg: Regularization, slack: float = 1.01) -> dict:
    """Observed difference quotients of a surface versus the formula bounds.

    Spatial quotients are taken in both the H^j norm (bound lip_h) and
    the weighted l1 norm (bound lip_l1); time quotients are bounded by
    the sup of |xibar| over slopes up to lip_l1.
    """
    samples = surface.samples
    vals = surface.values
    sup_h = sup_l1 = 0.0
    for a in range(len(samples)):
        for b in range(a + 1, len(samples)):
            dh = (samples[a] - samples[b]).norm()
            d1 = (samples[a] - samples[b]).norm_lp(1.0)
            gap = np.abs(vals[:, a] - vals[:, b]).max()
            if dh > 1e-12:
                sup_h = max(sup_h, float(gap / dh))
            if d1 > 1e-12:
                sup_l1 = max(sup_l1, float(gap / d1))
    sup_t = 0.0
    for ti in range(surface.times.size - 1):
        dt = surface.times[ti + 1] - surface.times[ti]
        if dt <= 1e-12:
            continue
        gap = np.abs(vals[ti + 1] - vals[ti]).max()
        sup_t = max(sup_t, float(gap / dt))
    slopes = np.linspace(0.0, psi.lip_l1, 256)
    time_bound = float(np.max(np.abs(reg.eval_vec(slopes))))
    report = {
        "spatial_h": sup_h, "spatial_h_bound": psi.lip_h,
        "spatial_l1": sup_l1, "spatial_l1_bound": psi.lip_l1,
        "time": sup_t, "time_bound": time_bound,
    }
    report["pass"] = bool(sup_h <= psi.lip_h * slack
                          and sup_l1 <= psi.lip_l1 * slack
                          and sup_t <= time_bound * slack)
    return report
