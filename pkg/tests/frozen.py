# Hand-derived expected values, fixed before the implementation was checked against them.

BOUND_CASES = [  # (K, mu, |w*|^2, bound)
    (0.0, 0.0, 100.0, 300.0),
    (0.0, 0.25, 1.0, 12.0),
    (1.0, 0.0, 1.0, 15.0),
]

# mu = 0.2: denominator 0.2 + 0.64 = 0.84
PI_MU_02 = (0.04 / 0.84, 0.16 / 0.84, 0.64 / 0.84)
PI_MU_02_ROUNDED = (0.047619, 0.190476, 0.761905)
FLOOR_MU_02 = (0.16 / 0.84) ** 2 * 0.2  # 0.0072562...
FLOOR_MU_02_ROUNDED = 0.007256

# three gated perceptron iterations, b = 4, reweight threshold 0.5, worked by hand
#   h1 = (1, 0), h2 = (0, 1)
#   t=1: only (1,-1) splits them; weight min(1, 1/(0.5*4)) = 0.5, step 0.5*(1,-1)
#        -> h1 = (1.5, -0.5), h2 = (0.5, 0.5)
#   t=2: all four points get the same sign from both -> skipped
#   t=3: (0,1) and (0,-1) split them; weight min(1, 2/2) = 1,
#        step (+1)(0,1) + (-1)(0,-1) = (0, 2) -> h1 = (1.5, 1.5), h2 = (0.5, 2.5)
REWEIGHT_BATCHES = [
    ([(1, -1), (1, 1), (-1, -1), (0.5, 0.5)], [1, 1, -1, -1]),
    ([(1, 1), (-1, -1), (1, 0), (-1, 0)], [-1, -1, -1, -1]),
    ([(0, 1), (1, -1), (1, 1), (0, -1)], [1, -1, 1, -1]),
]
REWEIGHT_DISAGREED = [True, False, True]
REWEIGHT_UPDATED = [True, False, True]
REWEIGHT_H1 = (1.5, 1.5)
REWEIGHT_H2 = (0.5, 2.5)
