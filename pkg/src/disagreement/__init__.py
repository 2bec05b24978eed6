"""Update by disagreement: train two learners and only update on examples they disagree on."""

from .core import (
    LabeledExample,
    LinearModel,
    NoiseSpec,
    RejectedInput,
    TraceRecord,
    TrainingTrace,
    child_rngs,
    predict,
    seeded_rng,
    sign,
    signs,
)
from .learners import MlpLearner, PerceptronLearner, SgdLearner, load_checkpoint, save_checkpoint
from .meta import GATED, VANILLA, DisagreementTrainer, RunConfig, batch_weight, disagreement_set, select_final
from .datagen import BasisDistribution, MarginDistribution, flip_noise, sample_basis, sample_margin
from .theory import (
    BoundInputs,
    MarkovChain3,
    count_updates,
    lemma1_stuck_fraction,
    lemma2_error_floor,
    lemma2_stationary,
    lemma2_transition,
    theorem1_bound,
)
from .harness import ExperimentConfig, MetricsRow, run_experiment

__version__ = "0.1.0"
