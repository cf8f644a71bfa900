"""Tour of the discretization algebra on monotone matrix paths.

Builds step paths on interval partitions, moves them between grids with
the cell-averaging projection and the step-embedding lift, and checks
the structural identities (adjointness, isometry, projectivity) that
make refinement arguments work.  Finishes with the monotone
rearrangement and the quantile view of discrete measures.
"""

import numpy as np

from conehj import (ConePoint, DiscreteMeasure, Partition, StepPath,
                    is_in_cone, lift_lj, measure_to_quantile, project_pj,
                    rearrange_sharp, wasserstein_p)

rng = np.random.default_rng(0)

# a non-uniform partition of [0, 1) and a finer uniform one
coarse = Partition(np.array([0.25, 0.6, 1.0]))
fine = Partition.uniform(6)
print("coarse cells:", coarse.breaks, "widths:", coarse.widths)

# a generic step path on the union grid, projected both ways
path = StepPath(coarse.union(fine), rng.normal(size=(coarse.union(fine).size,)))
x = project_pj(path, fine)
print("projected coords on the fine grid:", np.round(x.scalars, 3))

# adjointness: <p_j path, x> = <path, l_j x>
y = ConePoint(fine, rng.normal(size=6))
lhs = project_pj(path, fine).inner(y)
rhs = path.inner(lift_lj(y))
print(f"adjointness gap: {abs(lhs - rhs):.2e}")

# the lift is an isometry and projection then lift recovers the point
print(f"isometry gap:    {abs(lift_lj(y).norm() - y.norm()):.2e}")
rt = project_pj(lift_lj(y), fine)
print(f"p_j l_j = id gap: {np.abs(rt.scalars - y.scalars).max():.2e}")

# projectivity along a nested dyadic chain
j2, j4 = Partition.dyadic(1), Partition.dyadic(2)
via = project_pj(lift_lj(project_pj(path, j4)), j2)
direct = project_pj(path, j2)
print(f"projectivity gap: {np.abs(via.scalars - direct.scalars).max():.2e}")

# monotone rearrangement: sorts coordinates, lands in the cone, and the
# difference dominates in the dual order
z = ConePoint(Partition.uniform(5), rng.uniform(0.0, 2.0, 5))
zs = rearrange_sharp(z)
print("before:", np.round(z.scalars, 3), "-> after:", np.round(zs.scalars, 3))
print("rearranged point is monotone:", is_in_cone(zs))

# discrete measures embed as quantile step paths; Wasserstein distances
# reduce to weighted coordinate gaps
m1 = DiscreteMeasure(np.array([0.0, 0.3]), np.array([0.0, 0.5, 1.0]))
m2 = DiscreteMeasure.delta(0.3)
q = measure_to_quantile(m1)
print("quantile path of the two-atom measure:", q.values[:, 0, 0])
print(f"W_1 distance to delta_0.3: {wasserstein_p(m1, m2, 1.0):.3f}")
