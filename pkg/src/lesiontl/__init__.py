"""lesiontl: reproducible two-class skin-lesion transfer-learning experiments.

Pipeline stages: dataset ingestion/splitting (`lesiontl.data`), model
assembly with freeze policies (`lesiontl.models`), seeded training with
early stopping (`lesiontl.training`), confusion-matrix evaluation and
K-fold cross-validation (`lesiontl.evaluation`), and experiment
orchestration plus the CLI (`lesiontl.experiment`, `lesiontl.cli`).
"""

__version__ = "0.1.0"

from .models import FreezePolicy, ModelSpec, apply_freeze_policy, build_model, list_removable_head_layers
from .training import EarlyStopSpec, TrainingConfig, early_stop_check, make_optimizer, train

__all__ = [
    "__version__",
    "FreezePolicy",
    "ModelSpec",
    "apply_freeze_policy",
    "build_model",
    "list_removable_head_layers",
    "EarlyStopSpec",
    "TrainingConfig",
    "early_stop_check",
    "make_optimizer",
    "train",
]
