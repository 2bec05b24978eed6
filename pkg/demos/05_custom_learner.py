"""Plugging in a different update rule.

The trainer only needs `dim`, `scores`, `predict`, `accuracy`, `update` and
a `mistake_driven` flag. Here the built-in logistic SGD learner is gated,
then a hand-written averaged-perceptron-style learner is dropped in.
"""

import numpy as np

from disagreement.core import seeded_rng, signs
from disagreement.datagen import DistributionStream, MarginDistribution, random_w_star
from disagreement.learners import SgdLearner
from disagreement.meta import DisagreementTrainer, RunConfig

rng = seeded_rng(1)
dist = MarginDistribution(random_w_star(20, 100.0, rng))
test = dist.sample_arrays(5000, rng)

h1, h2 = SgdLearner(rng.standard_normal(20), 0.5), SgdLearner(rng.standard_normal(20), 0.5)
tr = DisagreementTrainer(h1, h2, batch_size=16, reweight_threshold=0.1).train(
    DistributionStream(dist, 0.3, rng), RunConfig(5000, 1000), test)
print("gated logistic SGD:", tr.eval_points()[1].round(3), "updates", tr.total_updates)


class ScaledPerceptron:
    """Perceptron whose step shrinks as 1/sqrt(number of updates)."""

    mistake_driven = True

    def __init__(self, w):
        self.w, self.n = np.asarray(w, float), 0

    dim = property(lambda self: self.w.size)

    def scores(self, X):
        return np.asarray(X) @ self.w

    def predict(self, X):
        return signs(self.scores(X))

    def accuracy(self, X, y):
        return float(np.mean(self.predict(X) == y))

    def update(self, X, y, weight=1.0):
        self.n += 1
        self.w += weight / np.sqrt(self.n) * (np.asarray(y, float) @ np.asarray(X))
        return self


g1, g2 = ScaledPerceptron(rng.standard_normal(20)), ScaledPerceptron(rng.standard_normal(20))
tr = DisagreementTrainer(g1, g2).train(DistributionStream(dist, 0.3, rng), RunConfig(20000, 5000), test)
print("gated custom learner:", tr.eval_points()[1].round(3), "updates", tr.total_updates)
