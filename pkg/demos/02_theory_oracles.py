"""The analytic side: update bound, stuck coordinates, and the coordinate chain.

Everything here is cheap; the Monte-Carlo parts use short runs.
"""

import numpy as np

from disagreement.theory import (
    BoundInputs, check_bound, check_floor_scaling, check_occupancy, lemma1_stuck_fraction,
    lemma2_error_floor, lemma2_stationary, lemma2_transition, run_stuck_coordinate_trial,
    theorem1_bound,
)

# Expected-update bound for a few settings
for K, mu in [(0, 0), (0, 0.25), (1, 0.1)]:
    print(f"bound K={K} mu={mu}: {theorem1_bound(BoundInputs(K, mu, 20)):.1f}  (|w*|^2 = 20)")

r = check_bound(0.25, repeats=10, iters=20_000)
print("measured mean updates at mu=0.25:", r.empirical, "bound:", round(r.theoretical, 1))

# Two inits that agree with each other but not with w* freeze a coordinate forever
ws = np.ones(4)
print("stuck fraction, hand example:", lemma1_stuck_fraction([-1, 1, -1, 1], [-1, -1, -1, 1], ws))
t = run_stuck_coordinate_trial(d=128, iters=20_000, seed=3)
print(f"random inits, d=128: stuck {t['stuck_fraction']:.3f}, final error {t['final_error']:.3f}")

# Coordinate chain of the vanilla perceptron on basis vectors
chain = lemma2_transition(0.2)
print("P =\n", chain.P)
print("pi =", lemma2_stationary(chain).round(6))
print("occupancy check:", check_occupancy(0.2, steps=200_000).details)
print("floor(0.2) =", round(lemma2_error_floor(0.2), 6))
ratios = check_floor_scaling().empirical
print("doubling mu multiplies the floor by", {k: round(float(v), 3) for k, v in ratios.items()})
