# Correction factors for the global filter.
#
# Dropping the top alpha fraction of |N(0,1)| keeps q(alpha) of the second
# moment; capping instead of dropping keeps w(alpha) = q(alpha) + alpha c(alpha).
import numpy as np

from globalrv import filter_constants

print(" alpha        c        q        w")
for alpha in [0.0, 0.01, 0.05, 0.1, 0.2, 0.25, 0.5, 0.75]:
    k = filter_constants(alpha)
    print(f"{alpha:6.2f} {k.c:8.4f} {k.q:8.5f} {k.w:8.5f}")

# Monte Carlo sanity check of q and w at alpha = 0.2
z = np.random.default_rng(0).standard_normal(2_000_000)
k = filter_constants(0.2)
keep = z * z <= k.c
print("q: closed form", round(k.q, 5), "sample", round(float(np.mean(z * z * keep)), 5))
print("w: closed form", round(k.w, 5), "sample", round(float(np.mean(np.minimum(z * z, k.c))), 5))
