"""Executable versions of the convergence bound and the two lower-bound constructions.

Three groups of tools live here:

* closed forms: the expected-update bound, the 3-state coordinate chain of
  the vanilla perceptron on basis-vector data and its stationary law, and the
  order-mu^3 failure probability built from it;
* the stuck-coordinate count for a pair of initial predictors;
* Monte-Carlo runners that drive the real trainer on the matching
  distributions so the closed forms can be checked against simulation.

Each runner returns an :class:`OracleReport`, serialisable as a flat JSON
record ``{quantity, parameters, theoretical, empirical, pass}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .core import RejectedInput, TrainingTrace, seeded_rng, signs
from .datagen import BasisDistribution, DistributionStream, MarginDistribution, random_sign_vector, random_w_star
from .learners import PerceptronLearner
from .meta import GATED, VANILLA, DisagreementTrainer, RunConfig

__all__ = [
    "BoundInputs",
    "MarkovChain3",
    "OracleReport",
    "theorem1_bound",
    "count_updates",
    "lemma2_transition",
    "lemma2_stationary",
    "lemma2_error_floor",
    "lemma1_stuck_fraction",
    "stuck_mask",
    "simulate_coordinate_occupancy",
    "run_stuck_coordinate_trial",
    "check_bound",
    "check_stuck_fraction",
    "check_occupancy",
    "check_floor_scaling",
    "check_stationarity",
]


def _check_mu(mu, allow_zero=True):
    lo_ok = mu >= 0 if allow_zero else mu > 0
    if not (lo_ok and mu < 0.5):
        rng = "[0, 0.5)" if allow_zero else "(0, 0.5)"
        raise RejectedInput(f"mu must lie in {rng}, got {mu}")


@dataclass(frozen=True)
class BoundInputs:
    K: float
    mu: float
    w_star_norm_sq: float

    def __post_init__(self):
        if self.K < 0:
            raise RejectedInput("K is a norm and cannot be negative")
        _check_mu(self.mu)
        if self.w_star_norm_sq < 1:
            raise RejectedInput("|w*|^2 must be at least 1 for margin-1 separability")


def theorem1_bound(b: BoundInputs) -> float:
    """Upper bound ``3 (4K + 1) / (1 - 2 mu)^2 * |w*|^2`` on the expected number of gated updates."""
    return 3.0 * (4.0 * b.K + 1.0) / (1.0 - 2.0 * b.mu) ** 2 * b.w_star_norm_sq


def count_updates(trace: TrainingTrace) -> int:
    return trace.total_updates if len(trace) else 0


@dataclass(frozen=True)
class MarkovChain3:
    """Chain over coordinate values (-1, 0, +1), oriented so the target sign is +1."""

    mu: float
    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.shape != (3, 3) or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise RejectedInput("P must be a 3x3 row-stochastic matrix")
        object.__setattr__(self, "P", P)


def lemma2_transition(mu: float) -> MarkovChain3:
    """One arrival of ``e_i``: a wrong or zero coordinate moves toward the label, a right one only moves on a flip."""
    _check_mu(mu)
    q = 1.0 - mu
    P = np.array([
        [mu, q, 0.0],
        [mu, 0.0, q],
        [0.0, mu, q],
    ])
    return MarkovChain3(mu, P)


def lemma2_stationary(chain: MarkovChain3) -> np.ndarray:
    mu = chain.mu
    q = 1.0 - mu
    z = mu + q * q
    return np.array([mu * mu, mu * q, q * q]) / z


def lemma2_error_floor(mu: float) -> float:
    """Probability that both warm-started coordinates sit at 0 and the next label is flipped.

    Uses the stationary law for two independent chains, so it is a heuristic
    lower-bound event probability of order ``mu**3``, not an exact error rate.
    """
    _check_mu(mu, allow_zero=False)
    pi0 = lemma2_stationary(lemma2_transition(mu))[1]
    return pi0 * pi0 * mu


def stuck_mask(w1_0, w2_0, w_star) -> np.ndarray:
    w1_0, w2_0, w_star = (np.asarray(a, dtype=np.float64) for a in (w1_0, w2_0, w_star))
    if not (w1_0.shape == w2_0.shape == w_star.shape) or w1_0.ndim != 1:
        raise RejectedInput("initial vectors and w_star must be vectors of one common length")
    s1, s2 = signs(w1_0), signs(w2_0)
    return (s1 == s2) & (s1 != signs(w_star))


def lemma1_stuck_fraction(w1_0, w2_0, w_star) -> float:
    """Fraction of coordinates where both initial signs agree with each other but not with ``w_star``."""
    return float(np.mean(stuck_mask(w1_0, w2_0, w_star)))


# -- Monte-Carlo oracles ------------------------------------------------------

def _native(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _native(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_native(x) for x in v]
    return v


@dataclass
class OracleReport:
    quantity: str
    parameters: dict
    theoretical: Any
    empirical: Any
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "parameters": _native(self.parameters),
            "theoretical": _native(self.theoretical),
            "empirical": _native(self.empirical),
            "pass": bool(self.passed),
        }
        if self.details:
            out["details"] = _native(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def simulate_coordinate_occupancy(mu: float, d: int, steps: int, seed: int) -> np.ndarray:
    """Vanilla perceptron from ``w = 0`` on noisy basis-vector data.

    Each step records the value of the arriving coordinate (times ``w*_i``)
    just before the update, so the result estimates the law of the embedded
    per-coordinate chain. Returns frequencies of (-1, 0, +1).
    """
    _check_mu(mu)
    rng = seeded_rng(seed)
    dist = BasisDistribution(random_sign_vector(d, rng))
    learner = PerceptronLearner(np.zeros(d))
    stream = DistributionStream(dist, mu, rng)
    w, ws = learner.w, dist.w_star
    counts = np.zeros(3, dtype=np.int64)
    chunk = 65536
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        X, y = stream.next_batch(n)
        idx = np.argmax(X, axis=1)
        for i, label in zip(idx.tolist(), y.tolist()):
            v = w[i]
            counts[int(v * ws[i]) + 1] += 1
            # mistake-driven rule on e_i: y * w_i <= 0
            if label * v <= 0:
                w[i] = v + label
        done += n
    return counts / counts.sum()


def run_stuck_coordinate_trial(d: int, iters: int, seed: int, mu: float = 0.0,
                               init_scale: float = 1.0) -> dict:
    """Gated perceptron on basis-vector data from independent Gaussian inits.

    Returns the predicted stuck fraction, the exact final clean error, and
    whether every stuck coordinate kept its initial sign.
    """
    rng = seeded_rng(seed)
    dist = BasisDistribution(random_sign_vector(d, rng))
    w1_0 = rng.standard_normal(d) * init_scale
    w2_0 = rng.standard_normal(d) * init_scale
    stuck = stuck_mask(w1_0, w2_0, dist.w_star)
    h1, h2 = PerceptronLearner(w1_0.copy()), PerceptronLearner(w2_0.copy())
    trainer = DisagreementTrainer(h1, h2, mode=GATED)
    trace = trainer.train(DistributionStream(dist, mu, rng), RunConfig(iters, iters))
    kept = bool(np.all(signs(h1.w)[stuck] == signs(w1_0)[stuck])
                and np.all(signs(h2.w)[stuck] == signs(w2_0)[stuck]))
    return {
        "seed": seed,
        "stuck_fraction": float(stuck.mean()),
        "final_error": dist.error(h1.w),
        "final_error_h2": dist.error(h2.w),
        "stuck_kept_sign": kept,
        "updates": trace.total_updates,
    }


def check_stuck_fraction(d: int = 128, inits: int = 200, iters: int = 20000, seed: int = 0,
                         band=(0.22, 0.28), min_eighth_rate: float = 0.95) -> OracleReport:
    """Symmetric random inits on the basis distribution leave about a quarter of coordinates stuck."""
    trials = [run_stuck_coordinate_trial(d, iters, seed + k) for k in range(inits)]
    fracs = np.array([t["stuck_fraction"] for t in trials])
    errs = np.array([t["final_error"] for t in trials])
    mean_frac = float(fracs.mean())
    err_dominates = bool(np.all(errs >= fracs))
    kept = all(t["stuck_kept_sign"] for t in trials)
    eighth_rate = float(np.mean(errs >= 0.125))
    ok = band[0] <= mean_frac <= band[1] and err_dominates and kept and eighth_rate >= min_eighth_rate
    return OracleReport(
        "lemma1_stuck_fraction",
        {"d": d, "inits": inits, "iters": iters, "seed": seed, "band": list(band)},
        0.25,
        mean_frac,
        ok,
        {"error_ge_stuck_all_runs": err_dominates, "stuck_signs_kept": kept,
         "fraction_runs_error_ge_1_8": eighth_rate, "mean_final_error": float(errs.mean())},
    )


def check_occupancy(mu: float = 0.2, d: int = 8, steps: int = 10**6, seed: int = 0,
                    tol: float = 0.02) -> OracleReport:
    pi = lemma2_stationary(lemma2_transition(mu))
    occ = simulate_coordinate_occupancy(mu, d, steps, seed)
    l1 = float(np.abs(occ - pi).sum())
    return OracleReport(
        "lemma2_occupancy",
        {"mu": mu, "d": d, "steps": steps, "seed": seed, "tol": tol},
        pi, occ, l1 <= tol, {"l1_distance": l1},
    )


def check_stationarity(n_mu: int = 100, seed: int = 0, tol: float = 1e-12) -> OracleReport:
    rng = seeded_rng(seed)
    worst_fix = worst_sum = 0.0
    for mu in rng.uniform(0.0, 0.5, size=n_mu):
        chain = lemma2_transition(float(mu))
        pi = lemma2_stationary(chain)
        worst_fix = max(worst_fix, float(np.abs(pi @ chain.P - pi).max()))
        worst_sum = max(worst_sum, abs(float(pi.sum()) - 1.0))
    return OracleReport(
        "lemma2_stationarity",
        {"n_mu": n_mu, "seed": seed, "tol": tol},
        0.0, max(worst_fix, worst_sum), worst_fix <= tol and worst_sum <= tol,
        {"max_abs_piP_minus_pi": worst_fix, "max_abs_sum_minus_1": worst_sum},
    )


def check_floor_scaling(mus=(0.05, 0.1, 0.2, 0.3), ratio_band=(6.0, 10.0),
                        small_mu: float = 0.1) -> OracleReport:
    """Cubic scaling of the failure probability: doubling a small mu multiplies it by about 8."""
    floors = {float(m): lemma2_error_floor(m) for m in mus}
    pairs = {}
    for m in mus:
        if 2 * m < 0.5 and m <= small_mu:
            pairs[f"{m}->{2 * m}"] = lemma2_error_floor(2 * m) / lemma2_error_floor(m)
    ok = bool(pairs) and all(ratio_band[0] <= r <= ratio_band[1] for r in pairs.values())
    return OracleReport(
        "lemma2_floor_scaling",
        {"mus": list(mus), "ratio_band": list(ratio_band), "small_mu": small_mu},
        8.0, pairs, ok, {"floors": floors},
    )


def check_bound(mu: float, d: int = 20, repeats: int = 20, iters: int = 10**5, seed: int = 0,
                init_scale: float = 0.1, identical_init: bool = False) -> OracleReport:
    """Mean gated update count on margin data against the expected-update bound.

    ``|w*|^2 = d``; ``K`` is the largest initial norm actually drawn across
    the repeats, so the comparison uses a bound valid for every repeat.
    """
    counts, Ks = [], []
    for r in range(repeats):
        rng = seeded_rng(seed + r)
        dist = MarginDistribution(random_w_star(d, np.sqrt(d), rng))
        w1_0 = rng.standard_normal(d) * init_scale
        w2_0 = w1_0.copy() if identical_init else rng.standard_normal(d) * init_scale
        Ks.append(max(np.linalg.norm(w1_0), np.linalg.norm(w2_0)))
        trainer = DisagreementTrainer(PerceptronLearner(w1_0), PerceptronLearner(w2_0))
        trace = trainer.train(DistributionStream(dist, mu, rng), RunConfig(iters, iters))
        counts.append(count_updates(trace))
    K = float(max(Ks))
    bound = theorem1_bound(BoundInputs(K, mu, float(d)))
    mean_T = float(np.mean(counts))
    return OracleReport(
        "theorem1_bound",
        {"mu": mu, "d": d, "w_star_norm_sq": d, "repeats": repeats, "iters": iters,
         "seed": seed, "init_scale": init_scale, "K": K},
        bound, mean_T, mean_T <= bound,
        {"update_counts": counts, "max_count": int(max(counts))},
    )
