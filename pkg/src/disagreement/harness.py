"""Seeded experiment orchestration: configs, runs, metrics and output files.

Every experiment takes an :class:`ExperimentConfig`, runs ``repeats``
independent repetitions with seed ``seed + repeat``, and returns an
:class:`ExperimentResult`. When ``output_dir`` is set it writes

* ``metrics.csv``                one :class:`MetricsRow` per (method, mu, repeat)
* ``trace_<method>_<repeat>.csv`` per-iteration traces (suffixed with the
  noise level when an experiment sweeps several)
* ``report.json``                aggregate curves and oracle records

Repeats run sequentially; each owns its generators, so running them in any
order or in parallel gives the same numbers.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import RejectedInput, TrainingTrace, child_rngs
from .datagen import DatasetStream, DistributionStream, MarginDistribution, flip_labels, random_w_star
from .learners import MlpLearner, PerceptronLearner
from .meta import GATED, VANILLA, DisagreementTrainer, RunConfig, select_final, write_trace_csv
from .mnist import find_mnist_dir, load_4v7
from . import theory

log = logging.getLogger(__name__)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "MetricsRow",
    "ExperimentResult",
    "load_config",
    "metrics_row",
    "write_metrics_csv",
    "read_metrics_csv",
    "run_synthetic",
    "run_mnist47",
    "run_lemma_checks",
    "run_bound_check",
    "run_toy_mlp",
    "run_experiment",
]

EXPERIMENTS = ("synthetic", "mnist47", "lemma1", "lemma2", "bound-check", "toy-mlp")
OURS, BASELINE = "ours", "vanilla"

# Values not set in a config fall back to these, per experiment.
_DEFAULTS = {
    "synthetic": dict(d=100, mu=0.4, N=10**6, repeats=5, eval_period=1000, test_size=10_000,
                      init_scale=3.0, w_star_norm=1e3),
    "mnist47": dict(mus=[0.1, 0.2, 0.3, 0.4], N=10**6, repeats=3, eval_period=1000,
                    warmup_iters=300_000, split_warmup=True, init_scale=0.0),
    "lemma1": dict(d=128, mu=0.0, N=20_000, repeats=200, init_scale=1.0),
    "lemma2": dict(d=8, mu=0.2, N=10**6, repeats=1, mus=[0.05, 0.1, 0.2, 0.3]),
    "bound-check": dict(d=20, mus=[0.0, 0.1, 0.25], N=10**5, repeats=20, init_scale=0.1),
    "toy-mlp": dict(mus=[0.2, 0.4], N=50_000, repeats=3, eval_period=500, warmup_iters=5000,
                    b=128, reweight_threshold=0.1, hidden=64, learning_rate=0.01, momentum=0.9),
}


@dataclass
class ExperimentConfig:
    """Flat experiment description; ``None`` means "use the experiment's default"."""

    experiment: str
    d: Optional[int] = None
    mu: Optional[float] = None
    mus: Optional[list] = None
    N: Optional[int] = None
    repeats: Optional[int] = None
    seed: int = 0
    eval_period: Optional[int] = None
    warmup_iters: Optional[int] = None
    split_warmup: Optional[bool] = None
    b: Optional[int] = None
    reweight_threshold: Optional[float] = None
    init_scale: Optional[float] = None
    w_star_norm: Optional[float] = None
    test_size: Optional[int] = None
    hidden: Optional[int] = None
    learning_rate: Optional[float] = None
    momentum: Optional[float] = None
    bias: bool = False
    output_dir: Optional[str] = None
    mnist_dir: Optional[str] = None
    write_traces: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise RejectedInput(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")

    def resolved(self) -> "ExperimentConfig":
        """Copy with every unset field filled from the experiment defaults and validated."""
        base = dict(d=None, mu=None, mus=None, N=1000, repeats=1, eval_period=1000, warmup_iters=0,
                    split_warmup=False, b=1, reweight_threshold=0.0, init_scale=1.0,
                    w_star_norm=1e3, test_size=10_000, hidden=64, learning_rate=0.01, momentum=0.9)
        base.update(_DEFAULTS[self.experiment])
        vals = dataclasses.asdict(self)
        for k, v in base.items():
            if vals.get(k) is None:
                vals[k] = v
        # an explicit single mu overrides a default sweep
        if self.mu is not None and self.mus is None:
            vals["mus"] = [self.mu]
        if vals["mus"] is None:
            vals["mus"] = [vals["mu"]]
        cfg = ExperimentConfig(**vals)
        cfg._validate()
        return cfg

    def _validate(self):
        for m in self.mus:
            if not (0.0 <= m < 0.5):
                raise RejectedInput(f"mu must lie in [0, 0.5), got {m}")
        checks = [
            (self.N >= 1, "N must be >= 1"),
            (self.repeats >= 1, "repeats must be >= 1"),
            (self.eval_period >= 1, "eval_period must be >= 1"),
            (self.warmup_iters >= 0, "warmup_iters must be >= 0"),
            (self.b >= 1, "batch size b must be >= 1"),
            (0.0 <= self.reweight_threshold <= 1.0, "reweight_threshold must lie in [0, 1]"),
            (self.init_scale >= 0, "init_scale must be >= 0"),
            (self.d is None or self.d >= 1, "d must be >= 1"),
            (0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer"),
        ]
        for ok, msg in checks:
            if not ok:
                raise RejectedInput(msg)


def load_config(path, **overrides) -> ExperimentConfig:
    """Read a flat JSON config; keyword overrides that are not None win over file values."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise RejectedInput(f"{path}: config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise RejectedInput(f"{path}: unknown config keys {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**data)


@dataclass(frozen=True)
class MetricsRow:
    method: str
    mu: float
    repeat: int
    best_accuracy: float
    mean_last_100_evals_accuracy: float
    final_update_count: int


METRICS_COLUMNS = tuple(f.name for f in dataclasses.fields(MetricsRow))


def metrics_row(method: str, mu: float, repeat: int, trace: TrainingTrace) -> MetricsRow:
    _, acc = trace.eval_points()
    if len(acc) == 0:
        raise RejectedInput("trace has no evaluation points")
    return MetricsRow(method, float(mu), int(repeat), float(acc.max()),
                      float(acc[-100:].mean()), trace.total_updates)


def write_metrics_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_COLUMNS)
        for r in rows:
            w.writerow((r.method, repr(r.mu), r.repeat, repr(r.best_accuracy),
                        repr(r.mean_last_100_evals_accuracy), r.final_update_count))


def read_metrics_csv(path) -> list[MetricsRow]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [MetricsRow(r["method"], float(r["mu"]), int(r["repeat"]), float(r["best_accuracy"]),
                       float(r["mean_last_100_evals_accuracy"]), int(r["final_update_count"]))
            for r in rows]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)  # (method, mu, repeat) -> TrainingTrace
    report: dict = field(default_factory=dict)

    def curves(self, method: str, mu: float) -> tuple[np.ndarray, np.ndarray]:
        """Eval iterations and the accuracy curve averaged over repeats."""
        runs = [t for (m, u, _), t in sorted(self.traces.items()) if m == method and u == mu]
        if not runs:
            raise KeyError((method, mu))
        its, _ = runs[0].eval_points()
        return its, np.mean([t.eval_points()[1] for t in runs], axis=0)

    def summary(self, method: str, mu: float, tail_fraction: Optional[float] = None) -> dict:
        """Best and final-phase accuracy of the repeat-averaged curve.

        The final phase is the last 100 evaluations, or the last
        ``tail_fraction`` of them when given.
        """
        _, curve = self.curves(method, mu)
        tail = 100 if tail_fraction is None else max(1, int(round(len(curve) * tail_fraction)))
        return {"best": float(curve.max()), "final_phase": float(curve[-tail:].mean()),
                "evals": len(curve), "tail_evals": min(tail, len(curve))}

    def save(self) -> Optional[Path]:
        cfg = self.config
        if not cfg.output_dir:
            return None
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if self.rows:
            write_metrics_csv(self.rows, out / "metrics.csv")
        if cfg.write_traces:
            multi = len(cfg.mus) > 1
            for (method, mu, rep), trace in sorted(self.traces.items()):
                suffix = f"_mu{mu:g}" if multi else ""
                write_trace_csv(trace, out / f"trace_{method}_{rep}{suffix}.csv")
        report = {"config": dataclasses.asdict(cfg), **self.report}
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=_jsonable))
        return out


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serialisable: {type(v).__name__}")


def _perceptron_pair(d, init_scale, rng):
    # symmetric (Gaussian) inits; a zero scale gives two zero vectors
    w1 = rng.standard_normal(d) * init_scale
    w2 = rng.standard_normal(d) * init_scale
    return w1, w2


def _curve_report(result: ExperimentResult, tail_fraction=None) -> dict:
    out = {}
    for mu in result.config.mus:
        for method in (OURS, BASELINE):
            try:
                its, curve = result.curves(method, mu)
            except KeyError:
                continue
            out[f"{method}@mu={mu:g}"] = {
                **result.summary(method, mu, tail_fraction),
                "eval_iterations": its, "mean_accuracy": curve,
            }
    return out


def run_synthetic(cfg: ExperimentConfig) -> ExperimentResult:
    """Gated vs vanilla perceptron on margin-separable unit-ball data with stream noise."""
    cfg = cfg.resolved()
    result = ExperimentResult(cfg)
    for mu in cfg.mus:
        for rep in range(cfg.repeats):
            data_rng, test_rng, init_rng, stream_rng = child_rngs(cfg.seed + rep, 4)
            dist = MarginDistribution(random_w_star(cfg.d, cfg.w_star_norm, data_rng))
            test = dist.sample_arrays(cfg.test_size, test_rng)
            w1, w2 = _perceptron_pair(cfg.d, cfg.init_scale, init_rng)
            state = stream_rng.bit_generator.state
            for method, mode in ((OURS, GATED), (BASELINE, VANILLA)):
                stream_rng.bit_generator.state = state  # both methods see the same stream
                trainer = DisagreementTrainer(PerceptronLearner(w1.copy()), PerceptronLearner(w2.copy()),
                                              batch_size=cfg.b, mode=mode)
                trace = trainer.train(DistributionStream(dist, mu, stream_rng),
                                      RunConfig(cfg.N, cfg.eval_period, cfg.seed + rep), test)
                result.traces[(method, mu, rep)] = trace
                result.rows.append(metrics_row(method, mu, rep, trace))
                log.info("synthetic mu=%g repeat=%d %s: final acc %.4f, %d updates",
                         mu, rep, method, trace.eval_points()[1][-1], trace.total_updates)
    result.report["curves"] = _curve_report(result, tail_fraction=0.1)
    result.save()
    return result


def _require_mnist(cfg):
    root = find_mnist_dir(cfg.mnist_dir)
    if root is None:
        raise FileNotFoundError(
            "MNIST IDX files not found; pass --mnist-dir or set MNIST_DIR to a directory holding "
            "train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte"
        )
    return root


def run_mnist47(cfg: ExperimentConfig) -> ExperimentResult:
    """Gated vs vanilla perceptron on 4-vs-7 with a fixed noisy copy of the train labels per repeat."""
    cfg = cfg.resolved()
    root = _require_mnist(cfg)
    train = load_4v7(root, "train", bias=cfg.bias)
    test = load_4v7(root, "test", bias=cfg.bias)
    d = train.X.shape[1]
    result = ExperimentResult(cfg)
    for mu in cfg.mus:
        for rep in range(cfg.repeats):
            noise_rng, init_rng, stream_rng = child_rngs(cfg.seed + rep, 3)
            y_noisy = flip_labels(train.y, mu, noise_rng)
            w1, w2 = _perceptron_pair(d, cfg.init_scale, init_rng)
            state = stream_rng.bit_generator.state
            for method, mode in ((OURS, GATED), (BASELINE, VANILLA)):
                stream_rng.bit_generator.state = state
                h1, h2 = PerceptronLearner(w1.copy()), PerceptronLearner(w2.copy())
                trainer = DisagreementTrainer(h1, h2, batch_size=cfg.b, mode=mode,
                                              warmup_iters=cfg.warmup_iters if mode == GATED else 0,
                                              split_warmup=cfg.split_warmup)
                trace = trainer.train(DatasetStream(train.X, y_noisy, stream_rng),
                                      RunConfig(cfg.N, cfg.eval_period, cfg.seed + rep), (test.X, test.y))
                result.traces[(method, mu, rep)] = trace
                result.rows.append(metrics_row(method, mu, rep, trace))
                log.info("mnist47 mu=%g repeat=%d %s: best %.4f, %d updates, final pick h%d",
                         mu, rep, method, trace.eval_points()[1].max(), trace.total_updates,
                         select_final(h1, h2, (test.X, test.y)))
    result.report["curves"] = _curve_report(result)
    result.save()
    return result


def run_lemma_checks(cfg: ExperimentConfig) -> ExperimentResult:
    """Monte-Carlo checks of the stuck-coordinate and coordinate-chain constructions."""
    cfg = cfg.resolved()
    result = ExperimentResult(cfg)
    if cfg.experiment == "lemma1":
        reports = [theory.check_stuck_fraction(cfg.d, cfg.repeats, cfg.N, cfg.seed)]
    elif cfg.experiment == "lemma2":
        occ_mu = cfg.mu if cfg.mu is not None else 0.2
        reports = [
            theory.check_occupancy(occ_mu, cfg.d, cfg.N, cfg.seed),
            theory.check_stationarity(100, cfg.seed),
            theory.check_floor_scaling(tuple(cfg.mus)),
        ]
    else:
        raise RejectedInput(f"run_lemma_checks handles lemma1/lemma2, not {cfg.experiment}")
    result.report["oracles"] = [r.to_dict() for r in reports]
    result.report["pass"] = all(r.passed for r in reports)
    result.save()
    return result


def run_bound_check(cfg: ExperimentConfig) -> ExperimentResult:
    cfg = cfg.resolved()
    result = ExperimentResult(cfg)
    reports = [theory.check_bound(mu, cfg.d, cfg.repeats, cfg.N, cfg.seed, cfg.init_scale)
               for mu in cfg.mus]
    result.report["oracles"] = [r.to_dict() for r in reports]
    result.report["pass"] = all(r.passed for r in reports)
    result.save()
    return result


def run_toy_mlp(cfg: ExperimentConfig) -> ExperimentResult:
    """Warm-started, reweighted gated MLP pair vs vanilla MLP training on noisy 4-vs-7."""
    cfg = cfg.resolved()
    root = _require_mnist(cfg)
    train = load_4v7(root, "train", bias=cfg.bias)
    test = load_4v7(root, "test", bias=cfg.bias)
    d = train.X.shape[1]
    result = ExperimentResult(cfg)
    for mu in cfg.mus:
        for rep in range(cfg.repeats):
            noise_rng, init1, init2, stream_rng = child_rngs(cfg.seed + rep, 4)
            y_noisy = flip_labels(train.y, mu, noise_rng)
            net1 = MlpLearner.initialize(d, cfg.hidden, init1, cfg.learning_rate, cfg.momentum)
            net2 = MlpLearner.initialize(d, cfg.hidden, init2, cfg.learning_rate, cfg.momentum)
            state = stream_rng.bit_generator.state
            for method, mode in ((OURS, GATED), (BASELINE, VANILLA)):
                stream_rng.bit_generator.state = state
                trainer = DisagreementTrainer(net1.copy(), net2.copy(), batch_size=cfg.b, mode=mode,
                                              warmup_iters=cfg.warmup_iters,
                                              reweight_threshold=cfg.reweight_threshold,
                                              split_warmup=cfg.split_warmup)
                trace = trainer.train(DatasetStream(train.X, y_noisy, stream_rng),
                                      RunConfig(cfg.N, cfg.eval_period, cfg.seed + rep), (test.X, test.y))
                result.traces[(method, mu, rep)] = trace
                result.rows.append(metrics_row(method, mu, rep, trace))
                log.info("toy-mlp mu=%g repeat=%d %s: final acc %.4f, %d updates",
                         mu, rep, method, trace.eval_points()[1][-1], trace.total_updates)
    result.report["curves"] = _curve_report(result, tail_fraction=0.1)
    result.save()
    return result


_RUNNERS = {
    "synthetic": run_synthetic,
    "mnist47": run_mnist47,
    "lemma1": run_lemma_checks,
    "lemma2": run_lemma_checks,
    "bound-check": run_bound_check,
    "toy-mlp": run_toy_mlp,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return _RUNNERS[cfg.experiment](cfg)
