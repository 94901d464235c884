"""Error-rate disparity toolkit."""

import json

from ._core import (
    GaussianGroupSpec,
    __version__,
    check_proposition1,
    check_theorem1,
    exhaustive_sweep,
    gamma,
    generate_cohort,
    group_fpr,
    group_tpr,
    optimal_cutoff,
    predict_scores,
    run_cli,
    score_given_creditworthy,
    solve_gamma_for_parity,
)
from ._core import audit as _audit
from ._core import train_logistic as _train_logistic


def audit(group, label, prediction):
    """Group confusion report as a dict."""
    return json.loads(_audit(list(group), list(label), list(prediction)))


def train_logistic(features, labels, l1_lambda=0.0):
    """Fitted model as a dict; pass json.dumps(model) to predict_scores."""
    return json.loads(_train_logistic(features, list(labels), l1_lambda))


__all__ = [
    "GaussianGroupSpec",
    "__version__",
    "audit",
    "check_proposition1",
    "check_theorem1",
    "exhaustive_sweep",
    "gamma",
    "generate_cohort",
    "group_fpr",
    "group_tpr",
    "optimal_cutoff",
    "predict_scores",
    "run_cli",
    "score_given_creditworthy",
    "solve_gamma_for_parity",
    "train_logistic",
]
