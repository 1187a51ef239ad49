# Window width and spot volatility when volatility switches fast.
#
# Small windows track the level but are noisy; wide windows smear high and
# low regimes together, and the global filter then misreads large
# increments in quiet stretches as jumps.
import numpy as np

import globalrv as g

spec = g.sine_squared_model(theta=0.2, sigma=1.0, eta=5.0)
jumps = g.JumpSpec("compound-poisson", lam=10, mu=0.3, nu=0.2)
sims = [g.simulate(spec, jumps, 2000, seed=s) for s in range(20)]

print("   c   B  kappa  spot rel.err  grv.lgrv error%")
for c, B in [(0.1, 1), (0.2, 5), (0.3, 5), (0.45, 10), (0.49, 20)]:
    params = g.EstimatorParams(kappa_B=B, kappa_c=c, truncate=False)
    kappa = params.window(2000).kappa
    spot_err, errs = [], []
    for sim in sims:
        s = g.spot_series(sim.observed, "lgrv", 0.2, params.window(2000))
        truth = sim.fine_spot_variance[::20]
        spot_err.append(np.median(np.abs(s.values / truth - 1)))
        e = g.estimate_by_label("grv.lgrv[0.20]", sim.observed, params)
        errs.append(g.error_ratio(e, sim.theta_true))
    print(f"{c:4.2f} {B:3d} {kappa:6d} {np.mean(spot_err):12.3f} {np.mean(errs):15.2f}")
