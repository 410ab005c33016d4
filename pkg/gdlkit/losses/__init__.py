from gdlkit.losses.classification import (
    ClassDistribution,
    LabeledBatch,
    cross_entropy,
    cross_entropy_loss,
    kl_divergence,
    onehot,
    shannon_entropy,
    softmax,
    softmax_rows,
)
from gdlkit.losses.regression import RegressionKind, regression_loss
