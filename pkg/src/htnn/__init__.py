"""Hadamard-transform neural networks.

Fast classical Hadamard transforms, a statevector simulation of the hybrid
quantum-classical transform, a transform-domain perceptron layer with
trainable soft-thresholding, cost accounting, and a small from-scratch
training stack for the digit-classification experiment.
"""

from .hadamard import (
    SYMMETRIC,
    FOLDED_INVERSE,
    hadamard_matrix,
    naive_ht,
    naive_ht2d,
    fht1d,
    ifht1d,
    fht2d,
    ifht2d,
    dyadic_conv,
    conv_theorem_check,
)
from .quantum import (
    MeasurementPlan,
    Statevector,
    HybridHTReport,
    prepare_state,
    apply_hadamard_all,
    measure,
    hybrid_ht,
    hybrid_ht2d,
    lemma1_check,
)
from .ht_layer import (
    HTPerceptronParams,
    soft_threshold,
    channelwise_1x1,
    init_params,
    ht_perceptron_forward,
    ht_perceptron_backward,
)
from .costs import (
    CostReport,
    LayerCost,
    conv2d_cost,
    dense_cost,
    ht_perceptron_cost,
    toy_model_cost,
    count_params,
    count_macs,
)
from .data import Dataset, load_mnist_idx
from .network import ModelSpec, Network, softmax_cross_entropy
from .optim import Adadelta
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .train import TrainConfig, TrainResult, evaluate, evaluate_checkpoint, train
from .estimator import FastHadamardTransformer, HadamardNetClassifier

__version__ = "0.1.0"

__all__ = [
    "SYMMETRIC",
    "FOLDED_INVERSE",
    "hadamard_matrix",
    "naive_ht",
    "naive_ht2d",
    "fht1d",
    "ifht1d",
    "fht2d",
    "ifht2d",
    "dyadic_conv",
    "conv_theorem_check",
    "MeasurementPlan",
    "Statevector",
    "HybridHTReport",
    "prepare_state",
    "apply_hadamard_all",
    "measure",
    "hybrid_ht",
    "hybrid_ht2d",
    "lemma1_check",
    "HTPerceptronParams",
    "soft_threshold",
    "channelwise_1x1",
    "init_params",
    "ht_perceptron_forward",
    "ht_perceptron_backward",
    "CostReport",
    "LayerCost",
    "conv2d_cost",
    "dense_cost",
    "ht_perceptron_cost",
    "toy_model_cost",
    "count_params",
    "count_macs",
    "Dataset",
    "load_mnist_idx",
    "ModelSpec",
    "Network",
    "softmax_cross_entropy",
    "Adadelta",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainResult",
    "evaluate",
    "evaluate_checkpoint",
    "train",
    "FastHadamardTransformer",
    "HadamardNetClassifier",
]
