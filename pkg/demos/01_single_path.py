# One simulated day: how the estimators see a path with jumps.
import numpy as np

import globalrv as g

spec = g.root_quadratic_model(theta=0.2, sigma=1.0, eta=3.0)
jumps = g.JumpSpec("compound-poisson", lam=30, mu=0.3, nu=0.2)
sim = g.simulate(spec, jumps, n=2000, seed=7)
path = sim.observed

print("true integrated variance", round(sim.theta_true, 4))
print("jumps", sim.jump_times.size, "total size", round(sim.jump_sizes.sum(), 3))

# plain RV soaks up every jump
params = g.EstimatorParams(truncate=False)
for label in ["rv", "bv", "mrv", "trv[0.45]", "grv[0.20]", "grv.lgrv[0.20]",
              "wgrv.lgrv[0.20]", "grv.lgrv.mov", "wgrv.lgrv.mov"]:
    e = g.estimate_by_label(label, path, params)
    print(f"{label:16s} {e.value:9.4f}  error {g.error_ratio(e, sim.theta_true):7.2f}%")

# which increments did the filter throw away?
spot = g.spot_series(path, "lgrv", 0.2)
est = g.grv_moving(path, g.MovingThresholdConfig(spot))
jump_cells = np.unique(np.ceil(sim.jump_times / path.h).astype(int))
flagged = set(est.filtered_indices.tolist())
hit = sum(int(j) in flagged for j in jump_cells)
print(f"moving threshold removed {len(flagged)} increments, {hit} of {jump_cells.size} jump cells")

# the spot estimate against the truth at the observation times
truth = sim.fine_spot_variance[::20]
print("spot variance: median relative error",
      round(float(np.median(np.abs(spot.values / truth - 1))), 3))
